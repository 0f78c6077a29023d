//! JSON file formats.
//!
//! * function: `[{"x": 3, "re": 0.5, "im": -0.5}, ...]`, `im` optional;
//! * kernel: the same layout with real, nonnegative weights of total mass 1;
//! * set: `[1, 4, 9]`;
//! * local function: `{"M": .., "q": .., "anchor": .., "entries": [...]}`.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::funcspace::{FiniteFunction, ProbKernel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point {
    pub x: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses a JSON file into `T`.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `value` as pretty JSON followed by a newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("value serialises");
    text.push('\n');
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn check_points(points: &[Point]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for p in points {
        if !p.re.is_finite() || !p.im.is_finite() {
            return Err(invalid(format!("non-finite value at x = {}", p.x)));
        }
        if !seen.insert(p.x) {
            return Err(invalid(format!("duplicate point x = {}", p.x)));
        }
    }
    Ok(())
}

pub fn function_from_points(points: &[Point]) -> Result<FiniteFunction> {
    check_points(points)?;
    Ok(FiniteFunction::from_points(
        points.iter().map(|p| (p.x, Complex64::new(p.re, p.im))),
    ))
}

pub fn function_to_points(f: &FiniteFunction) -> Vec<Point> {
    f.iter()
        .filter(|(_, v)| *v != Complex64::default())
        .map(|(x, v)| Point { x, re: v.re, im: v.im })
        .collect()
}

pub fn read_function(path: &Path) -> Result<FiniteFunction> {
    function_from_points(&read_json::<Vec<Point>>(path)?)
}

/// Reads a function and rejects values of modulus above one.
pub fn read_bounded_function(path: &Path) -> Result<FiniteFunction> {
    let f = read_function(path)?;
    FiniteFunction::new_bounded(f.offset(), f.values().to_vec())
}

/// A kernel with the given weights; its width is the support radius.
pub fn kernel_from_points(points: &[Point]) -> Result<ProbKernel> {
    check_points(points)?;
    if points.is_empty() {
        return Err(Error::InvalidKernel("kernel has no points".into()));
    }
    if let Some(p) = points.iter().find(|p| p.im != 0.0) {
        return Err(Error::InvalidKernel(format!("weight at h = {} is not real", p.x)));
    }
    let lo = points.iter().map(|p| p.x).min().unwrap();
    let hi = points.iter().map(|p| p.x).max().unwrap();
    let mut weights = vec![0.0; (hi - lo + 1) as usize];
    for p in points {
        weights[(p.x - lo) as usize] = p.re;
    }
    let radius = lo.abs().max(hi.abs()) as f64 + 1.0;
    ProbKernel::new(lo, weights, radius)
}

pub fn read_kernel(path: &Path) -> Result<ProbKernel> {
    kernel_from_points(&read_json::<Vec<Point>>(path)?)
}

pub fn read_set(path: &Path) -> Result<Vec<i64>> {
    let mut set: Vec<i64> = read_json(path)?;
    set.sort_unstable();
    set.dedup();
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_round_trip() {
        let f = FiniteFunction::new(2, vec![Complex64::new(0.5, -0.5), Complex64::default(), Complex64::new(1.0, 0.0)]);
        let pts = function_to_points(&f);
        assert_eq!(pts.len(), 2);
        assert_eq!(function_from_points(&pts).unwrap(), f);
    }

    #[test]
    fn duplicates_and_bad_kernels_are_rejected() {
        let p = Point { x: 1, re: 0.5, im: 0.0 };
        assert!(function_from_points(&[p, p]).is_err());
        assert!(kernel_from_points(&[Point { x: 0, re: -1.0, im: 0.0 }]).is_err());
        assert!(kernel_from_points(&[Point { x: 0, re: 1.0, im: 0.1 }]).is_err());
        let k = kernel_from_points(&[Point { x: -1, re: 0.5, im: 0.0 }, Point { x: 1, re: 0.5, im: 0.0 }]).unwrap();
        assert_eq!(k.weight(0), 0.0);
        assert_eq!(k.weight(1), 0.5);
    }

    #[test]
    fn missing_im_defaults_to_zero() {
        let pts: Vec<Point> = serde_json::from_str(r#"[{"x": 1, "re": 1}]"#).unwrap();
        assert_eq!(pts[0].im, 0.0);
    }
}
