//! Error-rate curves as CSV and SVG.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::atomic_write;
use crate::montecarlo::{SweepResult, SweepRow};

pub const CSV_HEADER: &str = "n0,trials,nmi_errors,enmi_errors,nmi_error_rate,enmi_error_rate";

/// Serializes the rows. Floats use the shortest exact representation, so
/// reading the CSV back yields identical values.
pub fn sweep_csv(result: &SweepResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &result.rows {
        w.serialize(row)?;
    }
    w.into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

pub fn parse_sweep_csv(bytes: &[u8]) -> Result<SweepResult> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(Error::Parse(format!("unexpected curve header {header:?}")));
    }
    let rows = r.deserialize().collect::<Result<Vec<SweepRow>, _>>()?;
    Ok(SweepResult { rows })
}

pub fn write_sweep_csv(result: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    atomic_write(path.as_ref(), &sweep_csv(result)?)
}

pub fn read_sweep_csv(path: impl AsRef<Path>) -> Result<SweepResult> {
    parse_sweep_csv(&std::fs::read(path)?)
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 55.0;

/// Plots both error rates against `N0` on a log axis.
pub fn render_svg(result: &SweepResult) -> Result<String> {
    let mut rows: Vec<&SweepRow> = result.rows.iter().filter(|r| r.n0 > 0.0).collect();
    if rows.is_empty() {
        return Err(Error::EmptyResult);
    }
    rows.sort_by(|a, b| a.n0.total_cmp(&b.n0));

    let lx_min = rows[0].n0.log10().floor();
    let mut lx_max = rows[rows.len() - 1].n0.log10().ceil();
    if lx_max <= lx_min {
        lx_max = lx_min + 1.0;
    }
    let y_min = -0.05;
    let y_max = rows
        .iter()
        .map(|r| r.nmi_error_rate.max(r.enmi_error_rate))
        .fold(0.6f64, f64::max);
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let sx = |n0: f64| LEFT + (n0.log10() - lx_min) / (lx_max - lx_min) * pw;
    let sy = |p: f64| TOP + (y_max - p) / (y_max - y_min) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );

    let mut e = lx_min;
    while e <= lx_max + 1e-9 {
        let x = sx(10f64.powf(e));
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{}</text>"##,
            TOP + ph,
            TOP + ph + 16.0,
            e as i32
        );
        e += 1.0;
    }
    let mut p = 0.0;
    while p <= y_max + 1e-9 {
        let y = sy(p);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{p:.1}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            y + 4.0
        );
        p += 0.1;
    }

    let path = |rate: fn(&SweepRow) -> f64| {
        rows.iter()
            .map(|r| format!("{:.2},{:.2}", sx(r.n0), sy(rate(r))))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let _ = writeln!(
        s,
        r#"<polyline class="nmi" points="{}" fill="none" stroke="blue" stroke-width="2" stroke-dasharray="6,4"/>"#,
        path(|r| r.nmi_error_rate)
    );
    let _ = writeln!(
        s,
        r#"<polyline class="enmi" points="{}" fill="none" stroke="black" stroke-width="2"/>"#,
        path(|r| r.enmi_error_rate)
    );

    let lx = LEFT + 15.0;
    let ly = TOP + 15.0;
    let _ = writeln!(
        s,
        r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="blue" stroke-width="2" stroke-dasharray="6,4"/><text x="{}" y="{}">NMI</text>"#,
        lx + 30.0,
        lx + 36.0,
        ly + 4.0
    );
    let _ = writeln!(
        s,
        r#"<line x1="{lx}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="2"/><text x="{}" y="{}">ENMI</text>"#,
        ly + 18.0,
        lx + 30.0,
        ly + 18.0,
        lx + 36.0,
        ly + 22.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">noise PSD N0</text>"#,
        LEFT + pw / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">localization error rate</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );
    s.push_str("</svg>\n");
    Ok(s)
}

/// Writes the CSV and, if requested, the SVG plot.
pub fn emit_curves(
    result: &SweepResult,
    csv_path: impl AsRef<Path>,
    svg_path: Option<&Path>,
) -> Result<()> {
    if result.rows.is_empty() {
        return Err(Error::EmptyResult);
    }
    let svg = svg_path.map(|_| render_svg(result)).transpose()?;
    write_sweep_csv(result, csv_path)?;
    if let (Some(p), Some(svg)) = (svg_path, svg) {
        atomic_write(p, svg.as_bytes())?;
    }
    Ok(())
}
