//! Independent oracles shared by the acceptance checks.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Reference rig: focal length, height, pitch, vertical and horizontal FOV.
pub const F: f64 = 0.0367;
pub const H: f64 = 58.3095;
pub const PITCH_DEG: f64 = 35.9020;
pub const VFOV_DEG: f64 = 39.3;
pub const HFOV_DEG: f64 = 70.5;

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite tensor Gauss-Legendre quadrature over a rectangle.
pub fn integrate_2d(
    f: impl Fn(f64, f64) -> f64,
    (x0, x1): (f64, f64),
    (z0, z1): (f64, f64),
    panels: usize,
) -> f64 {
    let rule = gauss_legendre(10);
    let (hx, hz) = ((x1 - x0) / panels as f64, (z1 - z0) / panels as f64);
    let mut total = 0.0;
    for pi in 0..panels {
        for pj in 0..panels {
            let (cx, cz) = (x0 + (pi as f64 + 0.5) * hx, z0 + (pj as f64 + 0.5) * hz);
            for &(u, wu) in &rule {
                for &(v, wv) in &rule {
                    total += wu * wv * f(cx + 0.5 * hx * u, cz + 0.5 * hz * v);
                }
            }
        }
    }
    total * 0.25 * hx * hz
}

/// Central difference with step `h`.
pub fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Angles of the ray from the camera to ground point `(x, d)` (lateral
/// offset, ground distance ahead), in the camera frame: `(vertical, lateral)`.
/// Vertical is measured from the optical axis, positive above it; lateral is
/// the angle off the camera's vertical center plane.
pub fn ray_angles(x: f64, d: f64) -> (f64, f64) {
    let t = PITCH_DEG.to_radians();
    // Camera at height H looking forward and down by `t`.
    let (cx, cy, cz) = (x, d * t.sin() - H * t.cos(), d * t.cos() + H * t.sin());
    (cy.atan2(cz), cx.abs().atan2(cy.hypot(cz)))
}

/// A ground square seen by the oracle: row, signed column, lateral bounds and
/// camera depths of the near and far edges.
#[derive(Debug, Clone, Copy)]
pub struct OracleTile {
    pub row: usize,
    pub col: i32,
    pub x: (f64, f64),
    pub z: (f64, f64),
}

/// Brute-force frustum count. Ground rows of side `s` start at the near edge
/// of the view; columns sit on a lattice centered on the optical axis. A
/// square is kept when all four corners, pulled `margin` cm toward the
/// center line, are inside both fields of view.
pub fn frustum_tiles(s: f64, margin: f64) -> Vec<OracleTile> {
    let t = PITCH_DEG.to_radians();
    let half_v = VFOV_DEG.to_radians() / 2.0;
    let half_h = HFOV_DEG.to_radians() / 2.0;
    let d_near = H / (t + half_v).tan();
    let visible = |x: f64, d: f64| {
        let (v, l) = ray_angles((x.abs() - margin).max(0.0), d);
        v.abs() <= half_v * (1.0 + 1e-9) && l <= half_h
    };
    let mut out = Vec::new();
    let mut row = 0;
    for k in 0..40 {
        let (d0, d1) = (d_near + k as f64 * s, d_near + (k + 1) as f64 * s);
        let mut any = false;
        for col in -40i32..=40 {
            let (x0, x1) = ((col as f64 - 0.5) * s, (col as f64 + 0.5) * s);
            if [(x0, d0), (x1, d0), (x0, d1), (x1, d1)]
                .iter()
                .all(|&(x, d)| visible(x, d))
            {
                any = true;
                out.push(OracleTile {
                    row,
                    col,
                    x: (x0, x1),
                    z: (d0 * t.cos() + H * t.sin(), d1 * t.cos() + H * t.sin()),
                });
            }
        }
        if any {
            row += 1;
        }
    }
    out
}

pub fn row_widths(tiles: &[OracleTile]) -> Vec<usize> {
    let rows = tiles.iter().map(|t| t.row + 1).max().unwrap_or(0);
    (0..rows)
        .map(|r| tiles.iter().filter(|t| t.row == r).count())
        .collect()
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
