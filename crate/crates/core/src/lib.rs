//! Map-based localization of a downward-pitched camera from road-surface
//! texture.
//!
//! The road ahead of the camera is cut into square tiles. Each tile projects
//! to a focal-plane region whose area sets its noise level. A captured image
//! is compared with candidate map sections through normalized mutual
//! information, either on the raw joint histogram ([`ScoreMode::Nmi`]) or on
//! a histogram where each capture tile spreads its unit weight across bins
//! by Gaussian likelihood ([`ScoreMode::Enmi`]).
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`). The aliases at
//! the crate root fix the scalar to `f64`; the `*F32` variants use `f32`.
//! Generic forms live in their modules.
//!
//! ```
//! use enmi_core::{build_grid, CameraConfig, NoiseSpec};
//!
//! let cam = CameraConfig::reference();
//! let grid = build_grid(&cam, 20.0).unwrap();
//! assert_eq!(grid.len(), 66);
//! let sigmas = grid.tile_sigmas(NoiseSpec::new(0.01).unwrap());
//! assert!(sigmas.iter().all(|s| *s > 0.0));
//! ```

// `!(a < b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod binning;
pub mod camera;
pub mod error;
pub mod grid;
pub mod io;
pub mod matcher;
pub mod mi;
pub mod montecarlo;
pub mod noise;
pub mod pgm;
pub mod report;
pub mod scalar;
pub mod variance;

pub use error::{Error, Result};
pub use grid::{build_grid, build_grid_with, LateralFov, LatticeAlignment};
pub use matcher::{best_match, best_match_with_sigmas, ScoreMode};
pub use mi::{entropies, entropy, joint_likelihood, joint_standard, nmi, score_or_max};
pub use montecarlo::{sweep, sweep_with_workers, SimConfig, SweepResult, SweepRow, TrialOutcome};
pub use noise::{bin_posterior, tile_likelihood, tile_variance};
pub use pgm::GrayImage;
pub use report::{emit_curves, read_sweep_csv, render_svg, write_sweep_csv};
pub use scalar::Scalar;
pub use variance::{accumulate_mask, mask_preview, MaskAccumulator, VarianceMask};

pub type CameraConfig = camera::CameraConfig<f64>;
pub type RoadPoint = camera::RoadPoint<f64>;
pub type FocalPoint = camera::FocalPoint<f64>;
pub type RoadRegion = camera::RoadRegion<f64>;
pub type Jacobian = camera::Jacobian<f64>;
pub type BinningScheme = binning::BinningScheme<f64>;
pub type NoiseSpec = noise::NoiseSpec<f64>;
pub type TileNoise = noise::TileNoise<f64>;
pub type AmplitudePrior = noise::AmplitudePrior<f64>;
pub type GridOptions = grid::GridOptions<f64>;
pub type Tile = grid::Tile<f64>;
pub type TileGrid = grid::TileGrid<f64>;
pub type JointHistogram = mi::JointHistogram<f64>;
pub type CapturePosterior = mi::CapturePosterior<f64>;
pub type CandidateSection = matcher::CandidateSection<f64>;
pub type MatchResult = matcher::MatchResult<f64>;

pub type CameraConfigF32 = camera::CameraConfig<f32>;
pub type RoadPointF32 = camera::RoadPoint<f32>;
pub type FocalPointF32 = camera::FocalPoint<f32>;
pub type RoadRegionF32 = camera::RoadRegion<f32>;
pub type BinningSchemeF32 = binning::BinningScheme<f32>;
pub type NoiseSpecF32 = noise::NoiseSpec<f32>;
pub type TileGridF32 = grid::TileGrid<f32>;
pub type JointHistogramF32 = mi::JointHistogram<f32>;
pub type CandidateSectionF32 = matcher::CandidateSection<f32>;
pub type MatchResultF32 = matcher::MatchResult<f32>;
