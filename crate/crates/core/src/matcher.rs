//! Picks the map section that best explains a captured image.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binning::BinningScheme;
use crate::error::{Error, Result};
use crate::grid::TileGrid;
use crate::mi::{joint_standard, nmi, score_or_max, CapturePosterior};
use crate::noise::{AmplitudePrior, NoiseSpec};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreMode {
    /// Unit-weight joint histogram.
    Nmi,
    /// Likelihood-weighted joint histogram with per-tile noise.
    Enmi,
}

/// A section of the prior map together with its location metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CandidateSection<T> {
    pub id: String,
    #[serde(default)]
    pub meta: serde_json::Value,
    pub values: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct MatchResult<T> {
    pub best_id: String,
    pub best_index: usize,
    /// `(id, score)` in candidate order.
    pub scores: Vec<(String, T)>,
    pub mode: ScoreMode,
}

/// Scores `capture` against every candidate and returns the argmax.
///
/// Ties go to the lowest list index. Degenerate (single-cell) histograms
/// score 2.
pub fn best_match<T: Scalar>(
    capture: &[T],
    candidates: &[CandidateSection<T>],
    mode: ScoreMode,
    grid: &TileGrid<T>,
    spec: NoiseSpec<T>,
    binning: &BinningScheme<T>,
) -> Result<MatchResult<T>> {
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    if capture.len() != grid.len() {
        return Err(Error::Dimension(format!(
            "capture has {} tiles, grid has {}",
            capture.len(),
            grid.len()
        )));
    }
    if let Some(c) = candidates.iter().find(|c| c.values.len() != grid.len()) {
        return Err(Error::Dimension(format!(
            "candidate {:?} has {} tiles, grid has {}",
            c.id,
            c.values.len(),
            grid.len()
        )));
    }

    let scores: Vec<T> = match mode {
        ScoreMode::Nmi => candidates
            .par_iter()
            .map(|c| score_or_max(nmi(&joint_standard(capture, &c.values, binning)?)))
            .collect::<Result<_>>()?,
        ScoreMode::Enmi => {
            let sigmas = grid.tile_sigmas(spec);
            let posterior =
                CapturePosterior::new(capture, &sigmas, binning, AmplitudePrior::Uniform)?;
            candidates
                .par_iter()
                .map(|c| score_or_max(nmi(&posterior.joint_with(&c.values, binning)?)))
                .collect::<Result<_>>()?
        }
    };
    Ok(select(candidates, scores, mode))
}

/// Matches with precomputed per-tile noise levels instead of a grid.
pub fn best_match_with_sigmas<T: Scalar>(
    capture: &[T],
    candidates: &[CandidateSection<T>],
    sigmas: &[T],
    binning: &BinningScheme<T>,
) -> Result<MatchResult<T>> {
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    let posterior = CapturePosterior::new(capture, sigmas, binning, AmplitudePrior::Uniform)?;
    let scores = candidates
        .par_iter()
        .map(|c| score_or_max(nmi(&posterior.joint_with(&c.values, binning)?)))
        .collect::<Result<Vec<T>>>()?;
    Ok(select(candidates, scores, ScoreMode::Enmi))
}

fn select<T: Scalar>(
    candidates: &[CandidateSection<T>],
    scores: Vec<T>,
    mode: ScoreMode,
) -> MatchResult<T> {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
        }
    }
    MatchResult {
        best_id: candidates[best].id.clone(),
        best_index: best,
        scores: candidates
            .iter()
            .zip(scores)
            .map(|(c, s)| (c.id.clone(), s))
            .collect(),
        mode,
    }
}
