//! Versioned plain-text model files.
//!
//! ```text
//! learned-iccbf-svr v1
//! gamma = 0.075
//! bias = 1.7226
//! n_sv = 1785
//! -84.5 3.5 -7
//! ...
//! ```
//!
//! Numbers use the shortest decimal form that parses back to the same
//! `f64`, so a save/load cycle is lossless.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::model::SvrModel;
use crate::error::{Error, Result};

pub const MAGIC: &str = "learned-iccbf-svr";
pub const VERSION: &str = "v1";

pub fn to_text(model: &SvrModel) -> String {
    let mut out = String::with_capacity(48 * model.n_sv() + 96);
    let _ = writeln!(out, "{MAGIC} {VERSION}");
    let _ = writeln!(out, "gamma = {}", model.gamma());
    let _ = writeln!(out, "bias = {}", model.bias());
    let _ = writeln!(out, "n_sv = {}", model.n_sv());
    for (p, k) in model.support_vectors().zip(model.kappas()) {
        let _ = writeln!(out, "{} {} {}", p[0], p[1], k);
    }
    out
}

pub fn from_text(text: &str) -> Result<SvrModel> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| Error::ModelFormat("empty file".into()))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(MAGIC) {
        return Err(Error::ModelFormat(format!("not a model file (header {header:?})")));
    }
    match parts.next() {
        Some(VERSION) => {}
        other => {
            return Err(Error::ModelVersion {
                found: other.unwrap_or("").to_string(),
                expected: VERSION,
            })
        }
    }

    let mut field = |name: &str| -> Result<String> {
        let line = lines
            .next()
            .ok_or_else(|| Error::ModelFormat(format!("missing {name}")))?;
        match line.split_once('=') {
            Some((k, v)) if k.trim() == name => Ok(v.trim().to_string()),
            _ => Err(Error::ModelFormat(format!("expected `{name} = ...`, got {line:?}"))),
        }
    };
    let gamma: f64 = parse(&field("gamma")?, "gamma")?;
    let bias: f64 = parse(&field("bias")?, "bias")?;
    let n_sv: usize = parse(&field("n_sv")?, "n_sv")?;
    if n_sv == 0 {
        return Err(Error::ModelFormat("model has no support vectors".into()));
    }

    let mut svs = Vec::with_capacity(n_sv);
    let mut kappas = Vec::with_capacity(n_sv);
    for line in lines.by_ref().take(n_sv) {
        let vals: Vec<&str> = line.split_whitespace().collect();
        if vals.len() != 3 {
            return Err(Error::ModelFormat(format!("bad support-vector row {line:?}")));
        }
        svs.push([parse(vals[0], "x")?, parse(vals[1], "y")?]);
        kappas.push(parse(vals[2], "kappa")?);
    }
    if svs.len() != n_sv {
        return Err(Error::ModelFormat(format!(
            "declared {n_sv} support vectors, found {}",
            svs.len()
        )));
    }
    if lines.next().is_some() {
        return Err(Error::ModelFormat("trailing data after support vectors".into()));
    }
    SvrModel::new(svs, kappas, bias, gamma)
}

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::ModelFormat(format!("cannot parse {what} from {s:?}")))
}

pub fn save_model(model: &SvrModel, path: &Path) -> Result<()> {
    fs::write(path, to_text(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<SvrModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_text(&text)
}
