//! Pinhole camera looking down at a planar road.
//!
//! Camera coordinates put the origin at the pinhole, `z` along the optical
//! axis and `y` up. A point on the road is fully described by its lateral
//! offset `x` and its optical depth `z`; its height follows from the road
//! constraint `y = z·tanθ − h·secθ`, so `y` never appears in the public
//! types. Lengths are centimeters and angles are radians.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Intrinsics and mounting of the road-facing camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CameraJson", into = "CameraJson", bound = "T: Scalar")]
pub struct CameraConfig<T> {
    focal_length: T,
    height: T,
    pitch: T,
    vertical_fov: T,
    horizontal_fov: T,
}

/// On-disk representation of [`CameraConfig`]; angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraJson {
    pub focal_length_cm: f64,
    pub height_cm: f64,
    pub pitch_deg: f64,
    pub vfov_deg: f64,
    pub hfov_deg: f64,
}

impl<T: Scalar> TryFrom<CameraJson> for CameraConfig<T> {
    type Error = Error;

    fn try_from(j: CameraJson) -> Result<Self> {
        CameraConfig::from_degrees(
            T::lit(j.focal_length_cm),
            T::lit(j.height_cm),
            T::lit(j.pitch_deg),
            T::lit(j.vfov_deg),
            T::lit(j.hfov_deg),
        )
    }
}

impl<T: Scalar> From<CameraConfig<T>> for CameraJson {
    fn from(c: CameraConfig<T>) -> Self {
        CameraJson {
            focal_length_cm: c.focal_length.to_f64_lossy(),
            height_cm: c.height.to_f64_lossy(),
            pitch_deg: c.pitch.to_degrees().to_f64_lossy(),
            vfov_deg: c.vertical_fov.to_degrees().to_f64_lossy(),
            hfov_deg: c.horizontal_fov.to_degrees().to_f64_lossy(),
        }
    }
}

/// Point on the road plane in camera coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoadPoint<T> {
    pub x: T,
    pub z: T,
}

impl<T> RoadPoint<T> {
    pub fn new(x: T, z: T) -> Self {
        Self { x, z }
    }
}

/// Point on the focal plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocalPoint<T> {
    pub x: T,
    pub y: T,
}

/// Axis-aligned rectangle `[x_l, x_u] × [z_l, z_u]` on the road, in camera
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RoadRegion<T> {
    x_lower: T,
    x_upper: T,
    z_lower: T,
    z_upper: T,
}

impl<T: Scalar> RoadRegion<T> {
    pub fn new(x_lower: T, x_upper: T, z_lower: T, z_upper: T) -> Result<Self> {
        let finite = [x_lower, x_upper, z_lower, z_upper]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(x_lower < x_upper) || !(T::zero() < z_lower) || !(z_lower < z_upper) {
            return Err(Error::Domain(format!(
                "road region [{x_lower}, {x_upper}] × [{z_lower}, {z_upper}] needs x_l < x_u and 0 < z_l < z_u"
            )));
        }
        Ok(Self {
            x_lower,
            x_upper,
            z_lower,
            z_upper,
        })
    }

    pub fn x_lower(&self) -> T {
        self.x_lower
    }
    pub fn x_upper(&self) -> T {
        self.x_upper
    }
    pub fn z_lower(&self) -> T {
        self.z_lower
    }
    pub fn z_upper(&self) -> T {
        self.z_upper
    }
    pub fn width(&self) -> T {
        self.x_upper - self.x_lower
    }
    pub fn depth(&self) -> T {
        self.z_upper - self.z_lower
    }

    /// Corners in the order near-left, near-right, far-left, far-right.
    pub fn corners(&self) -> [RoadPoint<T>; 4] {
        [
            RoadPoint::new(self.x_lower, self.z_lower),
            RoadPoint::new(self.x_upper, self.z_lower),
            RoadPoint::new(self.x_lower, self.z_upper),
            RoadPoint::new(self.x_upper, self.z_upper),
        ]
    }

    pub(crate) fn validate(&self) -> Result<()> {
        Self::new(self.x_lower, self.x_upper, self.z_lower, self.z_upper).map(|_| ())
    }
}

/// Jacobian of the road-to-focal-plane map, laid out as
/// `[[∂x̃/∂x, ∂ỹ/∂x], [∂x̃/∂z, ∂ỹ/∂z]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobian<T>(pub [[T; 2]; 2]);

impl<T: Scalar> Jacobian<T> {
    pub fn det(&self) -> T {
        let [[a, b], [c, d]] = self.0;
        a * d - b * c
    }
}

impl<T: Scalar> CameraConfig<T> {
    /// Builds a camera from radians, checking that the whole view strikes the
    /// road (no horizon in frame).
    pub fn new(
        focal_length: T,
        height: T,
        pitch: T,
        vertical_fov: T,
        horizontal_fov: T,
    ) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidCamera(msg.to_string()));
        let all_finite = [focal_length, height, pitch, vertical_fov, horizontal_fov]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return bad("all parameters must be finite");
        }
        if !(focal_length > T::zero()) {
            return bad("focal length must be positive");
        }
        if !(height > T::zero()) {
            return bad("height must be positive");
        }
        if !(pitch > T::zero() && pitch < T::FRAC_PI_2()) {
            return bad("pitch must lie in (0, 90°)");
        }
        if !(vertical_fov > T::zero() && vertical_fov < T::PI()) {
            return bad("vertical field of view must lie in (0, 180°)");
        }
        if !(horizontal_fov > T::zero() && horizontal_fov < T::PI()) {
            return bad("horizontal field of view must lie in (0, 180°)");
        }
        if !(pitch - vertical_fov / T::lit(2.0) > T::zero()) {
            return bad("pitch must exceed half the vertical field of view (horizon in frame)");
        }
        Ok(Self {
            focal_length,
            height,
            pitch,
            vertical_fov,
            horizontal_fov,
        })
    }

    pub fn from_degrees(
        focal_length: T,
        height: T,
        pitch_deg: T,
        vfov_deg: T,
        hfov_deg: T,
    ) -> Result<Self> {
        Self::new(
            focal_length,
            height,
            pitch_deg.to_radians(),
            vfov_deg.to_radians(),
            hfov_deg.to_radians(),
        )
    }

    /// Parameters used for the simulated road grid: f = 0.0367 cm,
    /// h = 58.3095 cm, θ = 35.9020°, 39.3° × 70.5° field of view.
    pub fn reference() -> Self {
        Self::from_degrees(
            T::lit(0.0367),
            T::lit(58.3095),
            T::lit(35.9020),
            T::lit(39.3),
            T::lit(70.5),
        )
        .expect("reference camera is valid")
    }

    pub fn focal_length(&self) -> T {
        self.focal_length
    }
    pub fn height(&self) -> T {
        self.height
    }
    pub fn pitch(&self) -> T {
        self.pitch
    }
    pub fn vertical_fov(&self) -> T {
        self.vertical_fov
    }
    pub fn horizontal_fov(&self) -> T {
        self.horizontal_fov
    }

    fn sec_pitch(&self) -> T {
        self.pitch.cos().recip()
    }

    /// `f²·h·secθ`, the constant shared by the Jacobian determinant and the
    /// projected area.
    fn area_scale(&self) -> T {
        self.focal_length * self.focal_length * self.height * self.sec_pitch()
    }

    /// `f·tanθ`: the horizon row on the focal plane.
    pub fn horizon_ytilde(&self) -> T {
        self.focal_length * self.pitch.tan()
    }

    /// Half extents `(f·tan(hfov/2), f·tan(vfov/2))` of the sensor rectangle.
    pub fn sensor_half_extent(&self) -> (T, T) {
        let two = T::lit(2.0);
        (
            self.focal_length * (self.horizontal_fov / two).tan(),
            self.focal_length * (self.vertical_fov / two).tan(),
        )
    }

    /// Optical depths `(z_near, z_far)` where the road leaves the bottom and
    /// top of the frame.
    pub fn visible_depth_range(&self) -> (T, T) {
        let (_, half_v) = self.sensor_half_extent();
        let near = self
            .depth_from_ytilde(-half_v)
            .expect("bottom of frame is below the horizon");
        let far = self
            .depth_from_ytilde(half_v)
            .expect("top of frame is below the horizon");
        (near, far)
    }

    /// Optical depth of the road point at horizontal distance `ground`
    /// ahead of the point directly beneath the camera.
    pub fn depth_of_ground(&self, ground: T) -> T {
        ground * self.pitch.cos() + self.height * self.pitch.sin()
    }

    /// Inverse of [`Self::depth_of_ground`].
    pub fn ground_of_depth(&self, z: T) -> T {
        (z - self.height * self.pitch.sin()) / self.pitch.cos()
    }

    /// Camera-frame height `y = z·tanθ − h·secθ` of the road at depth `z`.
    pub fn road_y(&self, z: T) -> T {
        z * self.pitch.tan() - self.height * self.sec_pitch()
    }

    /// Perspective projection `x̃ = f·x/z`, `ỹ = f·tanθ − (f·h/z)·secθ`.
    pub fn project_point(&self, p: RoadPoint<T>) -> Result<FocalPoint<T>> {
        check_depth(p.z)?;
        let f = self.focal_length;
        Ok(FocalPoint {
            x: f * p.x / p.z,
            y: self.horizon_ytilde() - f * self.height / p.z * self.sec_pitch(),
        })
    }

    /// Optical depth `z = f·h / (f·sinθ − ỹ·cosθ)` of the road point that
    /// images onto row `ỹ`.
    pub fn depth_from_ytilde(&self, ytilde: T) -> Result<T> {
        let denom = self.focal_length * self.pitch.sin() - ytilde * self.pitch.cos();
        if !(denom > T::zero()) {
            return Err(Error::AboveHorizon {
                ytilde: ytilde.to_f64_lossy(),
                limit: self.horizon_ytilde().to_f64_lossy(),
            });
        }
        Ok(self.focal_length * self.height / denom)
    }

    /// Inverse of [`Self::project_point`] on the road plane.
    pub fn unproject(&self, q: FocalPoint<T>) -> Result<RoadPoint<T>> {
        let z = self.depth_from_ytilde(q.y)?;
        Ok(RoadPoint::new(q.x * z / self.focal_length, z))
    }

    pub fn jacobian(&self, p: RoadPoint<T>) -> Result<Jacobian<T>> {
        check_depth(p.z)?;
        let f = self.focal_length;
        let z2 = p.z * p.z;
        Ok(Jacobian([
            [f / p.z, T::zero()],
            [-f * p.x / z2, f * self.height / z2 * self.sec_pitch()],
        ]))
    }

    /// Closed form of the Jacobian determinant, `f²·h·secθ / z³`.
    ///
    /// Rows are `∂/∂x` and `∂/∂z`. Since `ỹ` rises toward the horizon as `z`
    /// grows, `∂ỹ/∂z` and the determinant are positive.
    pub fn jacobian_det(&self, z: T) -> Result<T> {
        check_depth(z)?;
        Ok(self.area_scale() / (z * z * z))
    }

    /// Focal-plane area `Ã = f²h·secθ·(x_u − x_l)/2·(1/z_l² − 1/z_u²)` of a
    /// road rectangle.
    pub fn projected_area(&self, r: &RoadRegion<T>) -> Result<T> {
        r.validate()?;
        let inv_sq = |z: T| (z * z).recip();
        Ok(self.area_scale() * r.width() / T::lit(2.0) * (inv_sq(r.z_lower) - inv_sq(r.z_upper)))
    }
}

fn check_depth<T: Scalar>(z: T) -> Result<()> {
    if z > T::zero() && z.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "depth must be positive, got z = {z}"
        )))
    }
}
