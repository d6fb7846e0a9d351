//! Tessellation of the visible road into equal squares.
//!
//! Squares of side `s` are laid on the road plane on a lattice symmetric
//! about the camera's centerline. Rows run from near to far, one side length
//! apart along the ground. Because the optical depth `z` of a road point is
//! affine in its ground distance (`z = d·cosθ + h·sinθ`), a ground square
//! `[x_l, x_u] × [d, d + s]` is exactly the camera-coordinate rectangle
//! `[x_l, x_u] × [z(d), z(d + s)]`, whose depth extent is `s·cosθ`.
//!
//! A square belongs to the grid iff all four of its corners image inside the
//! field of view. Tiles are flattened row-major, near row first, columns
//! left to right.

use serde::{Deserialize, Serialize};

use crate::camera::{CameraConfig, FocalPoint, RoadPoint, RoadRegion};
use crate::error::{Error, Result};
use crate::noise::NoiseSpec;
use crate::scalar::Scalar;

/// How the horizontal field of view bounds the image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LateralFov {
    /// Rectangular sensor: `|x̃| ≤ f·tan(hfov/2)`.
    Pinhole,
    /// Angular field: a ray is visible when its angle off the camera's
    /// vertical center plane is at most `hfov/2`, i.e.
    /// `|x̃| ≤ tan(hfov/2)·√(f² + ỹ²)`. This reproduces the v-shaped
    /// 66-square simulation grid.
    #[default]
    Angular,
}

/// Registration of the lattice columns relative to `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeAlignment {
    /// A column is centered on `x = 0`; every row has an odd width.
    #[default]
    Centered,
    /// A column edge lies on `x = 0`; every row has an even width.
    Straddle,
}

/// Tunables for [`build_grid_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound = "T: Scalar")]
pub struct GridOptions<T> {
    pub lateral_fov: LateralFov,
    pub alignment: LatticeAlignment,
    /// Lateral slack (cm, on the road) granted to tile corners at the side
    /// edges of the view. The reference parameters are rounded to 0.1°, which
    /// leaves the outermost squares of rows 1 and 3 short by 0.3–0.4 mm;
    /// half a millimeter restores the intended 66-square layout.
    pub lateral_margin_cm: T,
    /// Extra ground distance (cm) between the bottom of the view and the
    /// near edge of the first row.
    pub near_offset_cm: T,
}

/// Relative slack on the vertical frame edges; the first row starts exactly
/// on the bottom edge and must not be lost to rounding.
const VERTICAL_TOLERANCE: f64 = 1e-9;

/// Upper bound on rows or columns, to reject absurdly small tiles.
const MAX_LATTICE_SPAN: usize = 100_000;

impl<T: Scalar> Default for GridOptions<T> {
    fn default() -> Self {
        Self {
            lateral_fov: LateralFov::Angular,
            alignment: LatticeAlignment::Centered,
            lateral_margin_cm: T::lit(0.05),
            near_offset_cm: T::zero(),
        }
    }
}

/// One road square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Tile<T> {
    /// Row index, near to far.
    pub row: usize,
    /// Column index within the row, left to right.
    pub col: usize,
    /// Camera-coordinate rectangle covered by the square.
    pub region: RoadRegion<T>,
    /// Focal-plane area `Ã_k` of the square's image.
    pub area: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TileGrid<T> {
    camera: CameraConfig<T>,
    side_cm: T,
    options: GridOptions<T>,
    tiles: Vec<Tile<T>>,
}

/// Builds the grid with [`GridOptions::default`].
pub fn build_grid<T: Scalar>(camera: &CameraConfig<T>, side: T) -> Result<TileGrid<T>> {
    build_grid_with(camera, side, GridOptions::default())
}

pub fn build_grid_with<T: Scalar>(
    camera: &CameraConfig<T>,
    side: T,
    options: GridOptions<T>,
) -> Result<TileGrid<T>> {
    if !(side > T::zero() && side.is_finite()) {
        return Err(Error::Domain(format!(
            "tile side must be positive, got {side}"
        )));
    }
    if !(options.lateral_margin_cm >= T::zero()) || !(options.near_offset_cm >= T::zero()) {
        return Err(Error::Domain(
            "grid margin and near offset must be non-negative".into(),
        ));
    }

    let view = View::new(camera, options);
    let (z_near, z_far) = camera.visible_depth_range();
    let ground_start = camera.ground_of_depth(z_near) + options.near_offset_cm;
    let ground_end = camera.ground_of_depth(z_far);
    let row_span = ((ground_end - ground_start) / side).floor().to_f64_lossy();
    if row_span > MAX_LATTICE_SPAN as f64 {
        return Err(Error::Domain(format!(
            "tile side {side} cm yields more than {MAX_LATTICE_SPAN} rows"
        )));
    }

    let mut tiles = Vec::new();
    let mut row = 0usize;
    for lattice_row in 0usize.. {
        let g0 = ground_start + side * T::from_usize(lattice_row);
        let z_l = camera.depth_of_ground(g0);
        let z_u = camera.depth_of_ground(g0 + side);
        if !view.depth_visible(z_u) {
            break;
        }
        if !view.depth_visible(z_l) {
            continue;
        }
        let cols = view.row_tiles(side, z_l, z_u)?;
        if cols.is_empty() {
            continue;
        }
        for (col, (x_l, x_u)) in cols.into_iter().enumerate() {
            let region = RoadRegion::new(x_l, x_u, z_l, z_u)?;
            let area = camera.projected_area(&region)?;
            tiles.push(Tile {
                row,
                col,
                region,
                area,
            });
        }
        row += 1;
    }

    if tiles.is_empty() {
        return Err(Error::EmptyGrid {
            side: side.to_f64_lossy(),
        });
    }
    Ok(TileGrid {
        camera: *camera,
        side_cm: side,
        options,
        tiles,
    })
}

struct View<'a, T> {
    camera: &'a CameraConfig<T>,
    options: GridOptions<T>,
    half_w: T,
    half_h: T,
    tan_half_hfov: T,
}

impl<'a, T: Scalar> View<'a, T> {
    fn new(camera: &'a CameraConfig<T>, options: GridOptions<T>) -> Self {
        let (half_w, half_h) = camera.sensor_half_extent();
        Self {
            camera,
            options,
            half_w,
            half_h,
            tan_half_hfov: (camera.horizontal_fov() / T::lit(2.0)).tan(),
        }
    }

    fn depth_visible(&self, z: T) -> bool {
        match self.camera.project_point(RoadPoint::new(T::zero(), z)) {
            Ok(q) => q.y.abs() <= self.half_h * (T::one() + T::lit(VERTICAL_TOLERANCE)),
            Err(_) => false,
        }
    }

    fn lateral_visible(&self, q: FocalPoint<T>) -> bool {
        let bound = match self.options.lateral_fov {
            LateralFov::Pinhole => self.half_w,
            LateralFov::Angular => {
                let f = self.camera.focal_length();
                self.tan_half_hfov * (f * f + q.y * q.y).sqrt()
            }
        };
        q.x.abs() <= bound
    }

    fn corner_visible(&self, x: T, z: T) -> Result<bool> {
        let pulled_in = (x.abs() - self.options.lateral_margin_cm).max(T::zero());
        let q = self.camera.project_point(RoadPoint::new(pulled_in, z))?;
        Ok(self.lateral_visible(q))
    }

    fn tile_visible(&self, x_l: T, x_u: T, z_l: T, z_u: T) -> Result<bool> {
        for (x, z) in [(x_l, z_l), (x_u, z_l), (x_l, z_u), (x_u, z_u)] {
            if !self.corner_visible(x, z)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Visible lattice squares of one row as `(x_l, x_u)`, left to right.
    /// Visibility is symmetric and shrinks with `|x|`, so columns are added
    /// in mirrored pairs until one falls outside.
    fn row_tiles(&self, side: T, z_l: T, z_u: T) -> Result<Vec<(T, T)>> {
        let half = T::lit(0.5);
        let mut right: Vec<(T, T)> = Vec::new();
        let mut center: Option<(T, T)> = None;
        match self.options.alignment {
            LatticeAlignment::Centered => {
                let (x_l, x_u) = (-half * side, half * side);
                if !self.tile_visible(x_l, x_u, z_l, z_u)? {
                    return Ok(Vec::new());
                }
                center = Some((x_l, x_u));
                for j in 1..MAX_LATTICE_SPAN {
                    let x_l = (T::from_usize(j) - half) * side;
                    let x_u = (T::from_usize(j) + half) * side;
                    if !self.tile_visible(-x_u, -x_l, z_l, z_u)?
                        || !self.tile_visible(x_l, x_u, z_l, z_u)?
                    {
                        break;
                    }
                    right.push((x_l, x_u));
                }
            }
            LatticeAlignment::Straddle => {
                for j in 0..MAX_LATTICE_SPAN {
                    let x_l = T::from_usize(j) * side;
                    let x_u = T::from_usize(j + 1) * side;
                    if !self.tile_visible(-x_u, -x_l, z_l, z_u)?
                        || !self.tile_visible(x_l, x_u, z_l, z_u)?
                    {
                        break;
                    }
                    right.push((x_l, x_u));
                }
            }
        }
        let mut cols: Vec<(T, T)> = right.iter().rev().map(|&(l, u)| (-u, -l)).collect();
        cols.extend(center);
        cols.extend(right);
        Ok(cols)
    }
}

impl<T: Scalar> TileGrid<T> {
    pub fn camera(&self) -> &CameraConfig<T> {
        &self.camera
    }

    pub fn side(&self) -> T {
        self.side_cm
    }

    pub fn options(&self) -> &GridOptions<T> {
        &self.options
    }

    /// Tiles in flattening order.
    pub fn tiles(&self) -> &[Tile<T>] {
        &self.tiles
    }

    /// Number of tiles `m`.
    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    /// Tiles per row, near to far.
    pub fn row_widths(&self) -> Vec<usize> {
        let mut widths = Vec::new();
        for t in &self.tiles {
            if t.row == widths.len() {
                widths.push(0);
            }
            widths[t.row] += 1;
        }
        widths
    }

    /// Projected areas `Ã_1..Ã_m`.
    pub fn tile_areas(&self) -> Vec<T> {
        self.tiles.iter().map(|t| t.area).collect()
    }

    /// Noise standard deviations `σ_k = √(N0 / Ã_k)`.
    pub fn tile_sigmas(&self, spec: NoiseSpec<T>) -> Vec<T> {
        self.tiles
            .iter()
            .map(|t| (spec.psd() / t.area).sqrt())
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let grid: Self = serde_json::from_str(s)?;
        if grid.tiles.is_empty() {
            return Err(Error::EmptyGrid {
                side: grid.side_cm.to_f64_lossy(),
            });
        }
        Ok(grid)
    }
}
