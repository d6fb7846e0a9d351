//! Joint histograms, entropies and normalized mutual information.
//!
//! A capture and a map section are paired tile by tile. The standard joint
//! distribution gives each pair unit weight in cell
//! `(bin(capture_k), bin(map_k))`. The likelihood-weighted variant spreads
//! each pair over capture bins according to the posterior of the noisy
//! capture amplitude, leaving the (noiseless) map coordinate fixed. Both are
//! scored with `NMI = (H[A] + H[B]) / H[A, B]`.

use serde::{Deserialize, Serialize};

use crate::binning::BinningScheme;
use crate::error::{Error, Result};
use crate::noise::{bin_posterior_into, AmplitudePrior};
use crate::scalar::Scalar;

/// Normalized `B × B` weight matrix indexed `(capture bin, map bin)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointHistogram<T> {
    bins: usize,
    weights: Vec<T>,
    total: T,
}

impl<T: Scalar> JointHistogram<T> {
    pub fn zeros(bins: usize) -> Self {
        Self {
            bins,
            weights: vec![T::zero(); bins * bins],
            total: T::zero(),
        }
    }

    /// Wraps a row-major matrix of nonnegative weights and normalizes it.
    pub fn from_weights(bins: usize, weights: Vec<T>) -> Result<Self> {
        if weights.len() != bins * bins {
            return Err(Error::Dimension(format!(
                "expected {} weights for {bins} bins, got {}",
                bins * bins,
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(*w >= T::zero()) || !w.is_finite()) {
            return Err(Error::Domain(
                "histogram weights must be finite and nonnegative".into(),
            ));
        }
        let total: T = weights.iter().copied().sum();
        if !(total > T::zero()) {
            return Err(Error::Domain("histogram has no mass".into()));
        }
        let mut h = Self {
            bins,
            weights,
            total,
        };
        h.normalize();
        Ok(h)
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    /// Weight accumulated before normalization.
    pub fn total(&self) -> T {
        self.total
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn get(&self, capture_bin: usize, map_bin: usize) -> T {
        self.weights[capture_bin * self.bins + map_bin]
    }

    pub fn transpose(&self) -> Self {
        let b = self.bins;
        let mut w = vec![T::zero(); b * b];
        for i in 0..b {
            for j in 0..b {
                w[j * b + i] = self.weights[i * b + j];
            }
        }
        Self {
            bins: b,
            weights: w,
            total: self.total,
        }
    }

    /// Capture marginal `P(A)` (row sums).
    pub fn capture_marginal(&self) -> Vec<T> {
        self.weights
            .chunks_exact(self.bins)
            .map(|row| row.iter().copied().sum())
            .collect()
    }

    /// Map marginal `P(B)` (column sums).
    pub fn map_marginal(&self) -> Vec<T> {
        let mut m = vec![T::zero(); self.bins];
        for row in self.weights.chunks_exact(self.bins) {
            for (acc, &w) in m.iter_mut().zip(row) {
                *acc = *acc + w;
            }
        }
        m
    }

    fn normalize(&mut self) {
        let t = self.total;
        self.weights.iter_mut().for_each(|w| *w = *w / t);
    }
}

fn check_lengths(capture: usize, map: usize, sigmas: Option<usize>) -> Result<()> {
    if capture == 0 {
        return Err(Error::Dimension(
            "amplitude vectors must be non-empty".into(),
        ));
    }
    if capture != map {
        return Err(Error::Dimension(format!(
            "capture has {capture} tiles but map has {map}"
        )));
    }
    if let Some(s) = sigmas {
        if s != capture {
            return Err(Error::Dimension(format!(
                "{capture} tiles but {s} noise levels"
            )));
        }
    }
    Ok(())
}

/// Unit-weight joint histogram of positionally paired amplitudes.
pub fn joint_standard<T: Scalar>(
    capture: &[T],
    map: &[T],
    binning: &BinningScheme<T>,
) -> Result<JointHistogram<T>> {
    check_lengths(capture.len(), map.len(), None)?;
    let b = binning.bin_count();
    let mut h = JointHistogram::zeros(b);
    for (&c, &m) in capture.iter().zip(map) {
        let cell = binning.bin_of(c) * b + binning.bin_of(m);
        h.weights[cell] = h.weights[cell] + T::one();
    }
    h.total = T::from_usize(capture.len());
    h.normalize();
    Ok(h)
}

/// Posterior bin weights of every capture tile, row-major `m × B`.
///
/// Computed once per capture and reused for every candidate it is scored
/// against.
#[derive(Debug, Clone, PartialEq)]
pub struct CapturePosterior<T> {
    bins: usize,
    weights: Vec<T>,
}

impl<T: Scalar> CapturePosterior<T> {
    pub fn new(
        capture: &[T],
        sigmas: &[T],
        binning: &BinningScheme<T>,
        prior: AmplitudePrior<T>,
    ) -> Result<Self> {
        check_lengths(capture.len(), capture.len(), Some(sigmas.len()))?;
        if sigmas.iter().any(|s| !(*s >= T::zero())) {
            return Err(Error::Domain("noise levels must be nonnegative".into()));
        }
        let bins = binning.bin_count();
        let mut weights = vec![T::zero(); capture.len() * bins];
        for ((&v, &s), out) in capture
            .iter()
            .zip(sigmas)
            .zip(weights.chunks_exact_mut(bins))
        {
            bin_posterior_into(v, s, binning, prior, out);
        }
        Ok(Self { bins, weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len() / self.bins
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn tile(&self, k: usize) -> &[T] {
        &self.weights[k * self.bins..(k + 1) * self.bins]
    }

    /// Likelihood-weighted joint histogram against a noiseless map.
    pub fn joint_with(&self, map: &[T], binning: &BinningScheme<T>) -> Result<JointHistogram<T>> {
        check_lengths(self.len(), map.len(), None)?;
        if binning.bin_count() != self.bins {
            return Err(Error::Dimension(format!(
                "posterior has {} bins, binning has {}",
                self.bins,
                binning.bin_count()
            )));
        }
        let b = self.bins;
        let mut h = JointHistogram::zeros(b);
        for (post, &m) in self.weights.chunks_exact(b).zip(map) {
            let col = binning.bin_of(m);
            for (a, &w) in post.iter().enumerate() {
                let cell = a * b + col;
                h.weights[cell] = h.weights[cell] + w;
            }
        }
        h.total = T::from_usize(map.len());
        h.normalize();
        Ok(h)
    }
}

/// Joint histogram in which each capture tile contributes its posterior bin
/// weights (noise level `sigmas[k]`) to the column of its map bin.
pub fn joint_likelihood<T: Scalar>(
    capture: &[T],
    map: &[T],
    sigmas: &[T],
    binning: &BinningScheme<T>,
) -> Result<JointHistogram<T>> {
    check_lengths(capture.len(), map.len(), Some(sigmas.len()))?;
    CapturePosterior::new(capture, sigmas, binning, AmplitudePrior::Uniform)?
        .joint_with(map, binning)
}

/// Shannon entropy in bits of a probability vector.
pub fn entropy<T: Scalar>(pmf: &[T]) -> Result<T> {
    if pmf.iter().any(|p| *p < T::zero()) {
        return Err(Error::Domain("negative probability".into()));
    }
    let total: T = pmf.iter().copied().sum();
    if !((total - T::one()).abs() <= T::lit(1e-9).max(T::epsilon() * T::lit(64.0))) {
        return Err(Error::Domain(format!(
            "probabilities sum to {total}, not 1"
        )));
    }
    Ok(entropy_unchecked(pmf))
}

fn entropy_unchecked<T: Scalar>(pmf: &[T]) -> T {
    let h: T = pmf
        .iter()
        .filter(|&&p| p > T::zero())
        .map(|&p| -p * p.log2())
        .sum();
    h.max(T::zero())
}

/// Marginal and joint entropies of a normalized histogram, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entropies<T> {
    pub capture: T,
    pub map: T,
    pub joint: T,
}

pub fn entropies<T: Scalar>(hist: &JointHistogram<T>) -> Entropies<T> {
    Entropies {
        capture: entropy_unchecked(&hist.capture_marginal()),
        map: entropy_unchecked(&hist.map_marginal()),
        joint: entropy_unchecked(&hist.weights),
    }
}

/// `(H[A] + H[B]) / H[A, B]`, in `[1, 2]`.
///
/// Fails with [`Error::DegenerateScore`] when all mass sits in one cell.
pub fn nmi<T: Scalar>(hist: &JointHistogram<T>) -> Result<T> {
    let e = entropies(hist);
    if !(e.joint > T::zero()) {
        return Err(Error::DegenerateScore);
    }
    // Rounding can push a perfectly dependent pair a hair outside [1, 2].
    Ok(((e.capture + e.map) / e.joint)
        .max(T::one())
        .min(T::lit(2.0)))
}

/// NMI of the likelihood-weighted joint histogram.
pub fn enmi_score<T: Scalar>(
    capture: &[T],
    map: &[T],
    sigmas: &[T],
    binning: &BinningScheme<T>,
) -> Result<T> {
    nmi(&joint_likelihood(capture, map, sigmas, binning)?)
}

/// NMI of the unit-weight joint histogram.
pub fn nmi_score<T: Scalar>(capture: &[T], map: &[T], binning: &BinningScheme<T>) -> Result<T> {
    nmi(&joint_standard(capture, map, binning)?)
}

/// Applies the matching policy for degenerate histograms: a single occupied
/// cell is a perfect match and scores 2.
pub fn score_or_max<T: Scalar>(score: Result<T>) -> Result<T> {
    match score {
        Err(Error::DegenerateScore) => Ok(T::lit(2.0)),
        other => other,
    }
}

/// Regression fixture stored as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreFixture {
    pub capture: Vec<f64>,
    pub map: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub binning: BinningScheme<f64>,
    pub expected_nmi: f64,
    pub expected_enmi: f64,
}

impl ScoreFixture {
    /// Recomputes both scores for comparison against the stored values.
    pub fn evaluate(&self) -> Result<(f64, f64)> {
        Ok((
            nmi_score(&self.capture, &self.map, &self.binning)?,
            enmi_score(&self.capture, &self.map, &self.sigmas, &self.binning)?,
        ))
    }
}
