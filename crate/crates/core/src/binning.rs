//! Amplitude bins shared by the histogram and posterior code.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `B` contiguous amplitude bins described by `B + 1` strictly increasing
/// edges. Values outside `[edges[0], edges[B])` clamp into the extreme bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BinningJson", into = "BinningJson", bound = "T: Scalar")]
pub struct BinningScheme<T> {
    edges: Vec<T>,
}

/// JSON form: either explicit edges or an equal-width range.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum BinningJson {
    Edges { edges: Vec<f64> },
    Uniform { bins: usize, lower: f64, upper: f64 },
}

impl<T: Scalar> TryFrom<BinningJson> for BinningScheme<T> {
    type Error = Error;

    fn try_from(j: BinningJson) -> Result<Self> {
        match j {
            BinningJson::Edges { edges } => {
                BinningScheme::from_edges(edges.into_iter().map(T::lit).collect())
            }
            BinningJson::Uniform { bins, lower, upper } => {
                BinningScheme::uniform(bins, T::lit(lower), T::lit(upper))
            }
        }
    }
}

impl<T: Scalar> From<BinningScheme<T>> for BinningJson {
    fn from(b: BinningScheme<T>) -> Self {
        BinningJson::Edges {
            edges: b.edges.iter().map(|e| e.to_f64_lossy()).collect(),
        }
    }
}

impl<T: Scalar> BinningScheme<T> {
    pub fn from_edges(edges: Vec<T>) -> Result<Self> {
        if edges.len() < 3 {
            return Err(Error::Binning(format!(
                "need at least 2 bins (3 edges), got {} edges",
                edges.len()
            )));
        }
        if edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::Binning("edges must be finite".into()));
        }
        if edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Binning("edges must be strictly increasing".into()));
        }
        Ok(Self { edges })
    }

    /// `bins` equal-width bins over `[lower, upper)`.
    pub fn uniform(bins: usize, lower: T, upper: T) -> Result<Self> {
        if bins < 2 {
            return Err(Error::Binning(format!("need at least 2 bins, got {bins}")));
        }
        if !(lower < upper) {
            return Err(Error::Binning(format!(
                "empty amplitude range [{lower}, {upper})"
            )));
        }
        let width = (upper - lower) / T::from_usize(bins);
        let mut edges: Vec<T> = (0..bins)
            .map(|i| lower + width * T::from_usize(i))
            .collect();
        edges.push(upper);
        Self::from_edges(edges)
    }

    /// `bins` equal-width bins over the 8-bit range `[0, 256)`.
    pub fn eight_bit(bins: usize) -> Result<Self> {
        Self::uniform(bins, T::zero(), T::lit(256.0))
    }

    pub fn bin_count(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn edges(&self) -> &[T] {
        &self.edges
    }

    pub fn lower(&self) -> T {
        self.edges[0]
    }

    pub fn upper(&self) -> T {
        self.edges[self.edges.len() - 1]
    }

    pub fn bin_width(&self, bin: usize) -> T {
        self.edges[bin + 1] - self.edges[bin]
    }

    /// Index of the bin containing `v`, clamping out-of-range values.
    pub fn bin_of(&self, v: T) -> usize {
        // Interior edges e_1..e_{B-1}; the count of those <= v is the bin.
        let interior = &self.edges[1..self.edges.len() - 1];
        interior.partition_point(|&e| e <= v)
    }
}
