//! Plain-text serialisation of a calibrated model.
//!
//! ```text
//! CVF/1
//! alpha 0.1
//! beta0 0.0
//! kind intercept
//! measure nu_star
//! cov_mode known
//! flattening none
//! center 1.0
//! mapping per-T
//! T 100
//! cov 1.0 0.95 1.0
//! points 2
//! -50.0 0.61
//! 20.0 0.67
//! ```
//!
//! Numbers are written with Rust's shortest round-trip formatting, so a
//! written model parses back bit for bit.

use std::fmt::Write as _;

use super::{BaselineMeasure, CovMode, CvfModel, CvfSettings, Flattening, Grid, GridMapping};
use crate::error::{Error, Result};
use crate::model::{Cov2, Deterministic};

const HEADER: &str = "CVF/1";

pub fn write_model(model: &CvfModel) -> String {
    let st = model.settings();
    let grid = model.grid();
    let cov = model.design_cov();
    let mut out = String::new();
    let _ = writeln!(out, "{HEADER}");
    let _ = writeln!(out, "alpha {:?}", st.alpha);
    let _ = writeln!(out, "beta0 {:?}", st.beta0);
    let _ = writeln!(out, "kind {}", st.kind.name());
    let _ = writeln!(out, "measure {}", st.measure.name());
    let _ = writeln!(out, "cov_mode {}", st.cov_mode.name());
    match &st.flattening {
        None => {
            let _ = writeln!(out, "flattening none");
        }
        Some(f) => {
            let _ = writeln!(
                out,
                "flattening {:?} {:?} {:?} {:?}",
                f.ratio_threshold, f.k_low, f.k_high, f.value
            );
        }
    }
    let _ = writeln!(out, "center {:?}", grid.center());
    let _ = writeln!(out, "mapping {}", grid.mapping().name());
    let _ = writeln!(out, "T {}", grid.sample_len());
    let _ = writeln!(out, "cov {:?} {:?} {:?}", cov.syy, cov.sxy, cov.sxx);
    let _ = writeln!(out, "points {}", grid.len());
    for (c, k) in grid.offsets().iter().zip(model.k()) {
        let _ = writeln!(out, "{c:?} {k:?}");
    }
    out
}

fn num(s: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|_| Error::Format(format!("bad number `{s}`")))
}

fn field<'a>(lines: &mut impl Iterator<Item = &'a str>, key: &str) -> Result<Vec<&'a str>> {
    let line = lines.next().ok_or_else(|| Error::Format(format!("missing `{key}`")))?;
    let mut parts = line.split_whitespace();
    match parts.next() {
        Some(k) if k == key => Ok(parts.collect()),
        _ => Err(Error::Format(format!("expected `{key}`, found `{line}`"))),
    }
}

fn single<'a>(lines: &mut impl Iterator<Item = &'a str>, key: &str) -> Result<&'a str> {
    match field(lines, key)?.as_slice() {
        [v] => Ok(v),
        _ => Err(Error::Format(format!("`{key}` takes one value"))),
    }
}

pub fn parse_model(text: &str) -> Result<CvfModel> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    if lines.next() != Some(HEADER) {
        return Err(Error::Format(format!("missing `{HEADER}` header")));
    }
    let alpha = num(single(&mut lines, "alpha")?)?;
    let beta0 = num(single(&mut lines, "beta0")?)?;
    let kind: Deterministic = single(&mut lines, "kind")?.parse().map_err(fmt_err)?;
    let measure: BaselineMeasure = single(&mut lines, "measure")?.parse().map_err(fmt_err)?;
    let cov_mode: CovMode = single(&mut lines, "cov_mode")?.parse().map_err(fmt_err)?;
    let flattening = match field(&mut lines, "flattening")?.as_slice() {
        ["none"] => None,
        [r, lo, hi, v] => Some(Flattening {
            ratio_threshold: num(r)?,
            k_low: num(lo)?,
            k_high: num(hi)?,
            value: num(v)?,
        }),
        _ => return Err(Error::Format("`flattening` takes `none` or four numbers".into())),
    };
    let center = num(single(&mut lines, "center")?)?;
    let mapping: GridMapping = single(&mut lines, "mapping")?.parse().map_err(fmt_err)?;
    let t: usize = single(&mut lines, "T")?
        .parse()
        .map_err(|_| Error::Format("bad `T`".into()))?;
    let cov = match field(&mut lines, "cov")?.as_slice() {
        [a, b, c] => Cov2::new(num(a)?, num(b)?, num(c)?).map_err(fmt_err)?,
        _ => return Err(Error::Format("`cov` takes three numbers".into())),
    };
    let n: usize = single(&mut lines, "points")?
        .parse()
        .map_err(|_| Error::Format("bad `points`".into()))?;
    let mut offsets = Vec::with_capacity(n);
    let mut k = Vec::with_capacity(n);
    for _ in 0..n {
        let line = lines.next().ok_or_else(|| Error::Format("too few grid points".into()))?;
        match line.split_whitespace().collect::<Vec<_>>().as_slice() {
            [c, kv] => {
                offsets.push(num(c)?);
                k.push(num(kv)?);
            }
            _ => return Err(Error::Format(format!("bad grid line `{line}`"))),
        }
    }
    if let Some(extra) = lines.next() {
        return Err(Error::Format(format!("unexpected trailing line `{extra}`")));
    }
    let grid = Grid::new(center, offsets, mapping, t).map_err(fmt_err)?;
    let settings = CvfSettings { alpha, beta0, kind, measure, cov_mode, flattening, ..CvfSettings::new(alpha) };
    CvfModel::new(grid, k, settings, cov).map_err(fmt_err)
}

fn fmt_err(e: Error) -> Error {
    match e {
        Error::Format(_) => e,
        other => Error::Format(other.to_string()),
    }
}
