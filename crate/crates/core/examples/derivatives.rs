//! Analytic derivatives of the learned distance up to third order, checked
//! against finite differences at a road point.

mod common;

fn main() {
    let t = common::track();
    let z = [78.3, 12.1];
    let d = t.model.derivatives(z);
    println!("d({z:?}) = {:.4} (true {:.4})", d.value, t.field.interpolate(z));
    println!("gradient {:?}", d.gradient);
    println!("hessian  {:?}", d.hessian);
    println!("third    {:?}", d.third);

    let h = 1e-5;
    let f = |x: f64, y: f64| t.model.predict([x, y]);
    let fd = [
        (f(z[0] + h, z[1]) - f(z[0] - h, z[1])) / (2.0 * h),
        (f(z[0], z[1] + h) - f(z[0], z[1] - h)) / (2.0 * h),
    ];
    println!("finite-difference gradient {fd:?}");

    // same numbers from plain per-support-vector loops
    let naive = t.model.derivatives_naive(z);
    let diff = d
        .third
        .iter()
        .flatten()
        .flatten()
        .zip(naive.third.iter().flatten().flatten())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    println!("batched vs per-entry third tensor: max diff {diff:e}");
}
