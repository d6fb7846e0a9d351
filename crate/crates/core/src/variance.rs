//! Empirical per-pixel variance between aligned capture and prior images.
//!
//! For `n` pre-aligned pairs the mask is
//! `Var[i, j] = 1/(n − 1) · Σ_k (a_ij⁽ᵏ⁾ − ã_ij⁽ᵏ⁾)²`. The deviation is taken
//! about the prior image, not about the sample mean, so this measures noise
//! relative to the map rather than the classical unbiased variance.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::atomic_write;
use crate::pgm::GrayImage;

/// Running sum of squared pixel differences.
///
/// Differences of 8-bit samples square to at most 65025, so the sums are
/// exact integers and the result does not depend on pair order or on how
/// the pairs were split between workers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskAccumulator {
    width: usize,
    height: usize,
    sum_sq: Vec<u64>,
    pairs: usize,
}

impl MaskAccumulator {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            sum_sq: vec![0; width * height],
            pairs: 0,
        }
    }

    pub fn pairs(&self) -> usize {
        self.pairs
    }

    pub fn add_pair(&mut self, local: &GrayImage, prior: &GrayImage) -> Result<()> {
        for img in [local, prior] {
            if img.width() != self.width || img.height() != self.height {
                return Err(Error::Dimension(format!(
                    "image is {}×{}, expected {}×{}",
                    img.width(),
                    img.height(),
                    self.width,
                    self.height
                )));
            }
        }
        for ((acc, &a), &p) in self
            .sum_sq
            .iter_mut()
            .zip(local.pixels())
            .zip(prior.pixels())
        {
            let d = i64::from(a) - i64::from(p);
            *acc += (d * d) as u64;
        }
        self.pairs += 1;
        Ok(())
    }

    pub fn merge(mut self, other: &MaskAccumulator) -> Result<Self> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::Dimension(
                "cannot merge masks of different sizes".into(),
            ));
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
        self.pairs += other.pairs;
        Ok(self)
    }

    /// Finishes the mask. Pixels where `valid` is zero are excluded.
    pub fn finish(&self, valid: Option<&GrayImage>) -> Result<VarianceMask> {
        if self.pairs < 2 {
            return Err(Error::TooFewPairs(self.pairs));
        }
        let valid = match valid {
            Some(v) if v.width() != self.width || v.height() != self.height => {
                return Err(Error::Dimension(format!(
                    "validity mask is {}×{}, images are {}×{}",
                    v.width(),
                    v.height(),
                    self.width,
                    self.height
                )))
            }
            Some(v) => Some(v.pixels().iter().map(|&p| p != 0).collect::<Vec<bool>>()),
            None => None,
        };
        let denom = (self.pairs - 1) as f64;
        let variance = self
            .sum_sq
            .iter()
            .enumerate()
            .map(|(k, &s)| match &valid {
                Some(v) if !v[k] => f64::NAN,
                _ => s as f64 / denom,
            })
            .collect();
        Ok(VarianceMask {
            width: self.width,
            height: self.height,
            variance,
            sample_count: self.pairs,
        })
    }
}

/// Per-pixel variance; excluded pixels hold `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceMask {
    width: usize,
    height: usize,
    variance: Vec<f64>,
    sample_count: usize,
}

impl VarianceMask {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    /// Row-major variances, `NaN` where excluded.
    pub fn values(&self) -> &[f64] {
        &self.variance
    }

    /// Variance at row `i`, column `j`, or `None` if the pixel was excluded.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let v = self.variance[i * self.width + j];
        (!v.is_nan()).then_some(v)
    }

    /// CSV with columns `i, j, variance`; excluded pixels leave `variance`
    /// empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.variance.len() * 16);
        out.push_str("i,j,variance\n");
        for i in 0..self.height {
            for j in 0..self.width {
                match self.get(i, j) {
                    Some(v) => writeln!(out, "{i},{j},{v}").unwrap(),
                    None => writeln!(out, "{i},{j},").unwrap(),
                }
            }
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        atomic_write(path.as_ref(), self.to_csv().as_bytes())
    }
}

/// Builds the mask from image pairs `(local, prior)`.
pub fn accumulate_mask(pairs: &[(GrayImage, GrayImage)]) -> Result<VarianceMask> {
    accumulate_mask_with_validity(pairs, None)
}

pub fn accumulate_mask_with_validity(
    pairs: &[(GrayImage, GrayImage)],
    valid: Option<&GrayImage>,
) -> Result<VarianceMask> {
    if pairs.len() < 2 {
        return Err(Error::TooFewPairs(pairs.len()));
    }
    let (w, h) = (pairs[0].0.width(), pairs[0].0.height());
    let acc = pairs
        .par_iter()
        .try_fold(
            || MaskAccumulator::new(w, h),
            |mut acc, (local, prior)| {
                acc.add_pair(local, prior)?;
                Ok::<_, Error>(acc)
            },
        )
        .try_reduce(|| MaskAccumulator::new(w, h), |a, b| a.merge(&b))?;
    acc.finish(valid)
}

/// Min-max scales the mask to `[0, 255]` for viewing. A constant mask maps to
/// zero; excluded pixels are black.
pub fn mask_preview(mask: &VarianceMask) -> GrayImage {
    let finite = mask.variance.iter().copied().filter(|v| !v.is_nan());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    let span = hi - lo;
    let px = mask
        .variance
        .iter()
        .map(|&v| {
            if v.is_nan() || !(span > 0.0) {
                0
            } else {
                (255.0 * (v - lo) / span).round().clamp(0.0, 255.0) as u8
            }
        })
        .collect();
    GrayImage::new(mask.width, mask.height, px).expect("mask has matching dimensions")
}

/// Reads a pair manifest with header `local_path,prior_path`. Relative paths
/// are resolved against the manifest's directory.
pub fn read_pair_manifest(path: impl AsRef<Path>) -> Result<Vec<(PathBuf, PathBuf)>> {
    let path = path.as_ref();
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("manifest lacks a {name:?} column")))
    };
    let (li, pi) = (col("local_path")?, col("prior_path")?);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let resolve = |s: &str| {
            let p = PathBuf::from(s);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        out.push((resolve(&rec[li]), resolve(&rec[pi])));
    }
    Ok(out)
}
