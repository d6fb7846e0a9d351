//! Argument parsing and dispatch for the `enmi-loc` binary.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use enmi_core::camera::CameraConfig;
use enmi_core::io::atomic_write;
use enmi_core::matcher::{best_match, CandidateSection, ScoreMode};
use enmi_core::montecarlo::{sweep_with_workers, SimConfig};
use enmi_core::noise::NoiseSpec;
use enmi_core::pgm::GrayImage;
use enmi_core::report::emit_curves;
use enmi_core::variance::{accumulate_mask_with_validity, mask_preview, read_pair_manifest};
use enmi_core::{build_grid, BinningScheme};

/// Road-texture localization with likelihood-weighted mutual information.
#[derive(Debug, Clone, PartialEq, Parser)]
#[command(name = "enmi-loc", version)]
pub struct RunConfig {
    /// Maximum worker threads (default: all cores).
    #[arg(long, global = true, env = "ENMI_LOC_WORKERS", value_parser = clap::value_parser!(u32).range(1..))]
    pub workers: Option<u32>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Print the road tiles and their focal-plane areas as CSV.
    Project(ProjectArgs),
    /// Pick the candidate map section that best matches a capture.
    Match(MatchArgs),
    /// Run the NMI/ENMI error-rate sweep and write the curves.
    Simulate(SimulateArgs),
    /// Estimate the per-pixel variance mask from image pairs.
    Mask(MaskArgs),
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct ProjectArgs {
    /// Camera JSON (focal_length_cm, height_cm, pitch_deg, vfov_deg, hfov_deg).
    /// Defaults to the reference camera.
    #[arg(long)]
    pub camera: Option<PathBuf>,
    /// Tile side in cm.
    #[arg(long, default_value_t = 20.0)]
    pub side: f64,
    /// Noise PSD; adds a per-tile sigma column.
    #[arg(long)]
    pub n0: Option<f64>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Nmi,
    Enmi,
}

impl From<Mode> for ScoreMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Nmi => ScoreMode::Nmi,
            Mode::Enmi => ScoreMode::Enmi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct MatchArgs {
    /// Capture tile values as a JSON array, in grid order.
    #[arg(long)]
    pub capture: PathBuf,
    /// JSON array of {id, meta, values}, or a directory of such objects
    /// (one per *.json file, read in file-name order).
    #[arg(long)]
    pub candidates: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Enmi)]
    pub mode: Mode,
    #[arg(long)]
    pub camera: Option<PathBuf>,
    #[arg(long, default_value_t = 20.0)]
    pub side: f64,
    /// Noise PSD used for the per-tile sigmas (required for enmi).
    #[arg(long)]
    pub n0: Option<f64>,
    /// Number of amplitude bins over [0, 256).
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u32).range(1..))]
    pub bins: u32,
    /// Write the score table here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct SimulateArgs {
    /// Simulation config JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional SVG plot of both curves.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Override the number of trials per noise level.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: Option<u64>,
    /// Override the seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the noise levels (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub n0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct MaskArgs {
    /// CSV manifest with columns local_path, prior_path.
    #[arg(long)]
    pub pairs: PathBuf,
    /// Output CSV (i, j, variance).
    #[arg(long)]
    pub out: PathBuf,
    /// Optional PGM preview of the mask.
    #[arg(long)]
    pub preview: Option<PathBuf>,
    /// Optional validity mask PGM; zero pixels are excluded.
    #[arg(long)]
    pub valid: Option<PathBuf>,
}

/// Parses `argv` (including the program name). Also rejects flag
/// combinations clap cannot express.
pub fn parse_args<I, S>(argv: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cfg = RunConfig::try_parse_from(argv)?;
    if let Command::Simulate(s) = &cfg.command {
        if s.svg.as_deref() == Some(s.out.as_path()) {
            return Err(usage_error("--out and --svg must be different files"));
        }
    }
    if let Command::Mask(m) = &cfg.command {
        if m.preview.as_deref() == Some(m.out.as_path()) {
            return Err(usage_error("--out and --preview must be different files"));
        }
    }
    Ok(cfg)
}

fn usage_error(msg: &str) -> clap::Error {
    use clap::CommandFactory;
    RunConfig::command().error(clap::error::ErrorKind::ArgumentConflict, msg)
}

/// Parses, runs, and maps the outcome to an exit status: 0 success,
/// 1 runtime error, 2 usage error.
pub fn main_with<I, S>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cfg = match parse_args(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("enmi-loc: error: {msg}");
            ExitCode::from(1)
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    let workers = cfg.workers.map(|w| w as usize);
    match &cfg.command {
        Command::Project(a) => project(a),
        Command::Match(a) => with_workers(workers, || run_match(a)),
        Command::Simulate(a) => simulate(a, workers),
        Command::Mask(a) => with_workers(workers, || mask(a)),
    }
}

fn with_workers<R: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> Result<R> + Send,
) -> Result<R> {
    match workers {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building worker pool")?
            .install(f),
    }
}

fn require_file(path: &Path, what: &str) -> Result<()> {
    ensure!(path.exists(), "{what} {} does not exist", path.display());
    Ok(())
}

fn require_parent(path: &Path) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    ensure!(
        dir.is_dir(),
        "output directory {} does not exist",
        dir.display()
    );
    Ok(())
}

fn load_camera(path: Option<&Path>) -> Result<CameraConfig<f64>> {
    match path {
        None => Ok(CameraConfig::reference()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing camera {}", p.display()))
        }
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => atomic_write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn project(a: &ProjectArgs) -> Result<()> {
    if let Some(c) = &a.camera {
        require_file(c, "camera file")?;
    }
    if let Some(o) = &a.out {
        require_parent(o)?;
    }
    let camera = load_camera(a.camera.as_deref())?;
    let grid = build_grid(&camera, a.side)?;
    let sigmas =
        a.n0.map(|n0| NoiseSpec::new(n0).map(|s| grid.tile_sigmas(s)))
            .transpose()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "row", "col", "x_l", "x_u", "z_l", "z_u", "area_cm2", "sigma",
    ])?;
    for (k, t) in grid.tiles().iter().enumerate() {
        let r = &t.region;
        let sigma = sigmas
            .as_ref()
            .map(|s| s[k].to_string())
            .unwrap_or_default();
        w.write_record([
            t.row.to_string(),
            t.col.to_string(),
            r.x_lower().to_string(),
            r.x_upper().to_string(),
            r.z_lower().to_string(),
            r.z_upper().to_string(),
            t.area.to_string(),
            sigma,
        ])?;
    }
    emit(a.out.as_deref(), &w.into_inner()?)
}

fn load_candidates(path: &Path) -> Result<Vec<CandidateSection<f64>>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()?;
        files.retain(|p| p.extension().is_some_and(|e| e == "json"));
        files.sort();
        files
            .iter()
            .map(|p| {
                let text = fs::read_to_string(p)?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing candidate {}", p.display()))
            })
            .collect()
    } else {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("parsing candidates {}", path.display()))
    }
}

fn run_match(a: &MatchArgs) -> Result<()> {
    require_file(&a.capture, "capture file")?;
    require_file(&a.candidates, "candidates")?;
    if let Some(c) = &a.camera {
        require_file(c, "camera file")?;
    }
    if let Some(o) = &a.out {
        require_parent(o)?;
    }
    let n0 = match (a.mode, a.n0) {
        (_, Some(n0)) => n0,
        (Mode::Nmi, None) => 1.0,
        (Mode::Enmi, None) => bail!("--n0 is required with --mode enmi"),
    };

    let camera = load_camera(a.camera.as_deref())?;
    let grid = build_grid(&camera, a.side)?;
    let capture: Vec<f64> = serde_json::from_str(&fs::read_to_string(&a.capture)?)
        .with_context(|| format!("parsing capture {}", a.capture.display()))?;
    let candidates = load_candidates(&a.candidates)?;
    let binning = BinningScheme::eight_bit(a.bins as usize)?;
    let result = best_match(
        &capture,
        &candidates,
        a.mode.into(),
        &grid,
        NoiseSpec::new(n0)?,
        &binning,
    )?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "score", "best"])?;
    for (i, (id, score)) in result.scores.iter().enumerate() {
        let best = if i == result.best_index { "1" } else { "0" };
        w.write_record([id.as_str(), &score.to_string(), best])?;
    }
    emit(a.out.as_deref(), &w.into_inner()?)?;
    eprintln!("best match: {}", result.best_id);
    Ok(())
}

fn simulate(a: &SimulateArgs, workers: Option<usize>) -> Result<()> {
    require_file(&a.config, "config file")?;
    require_parent(&a.out)?;
    if let Some(s) = &a.svg {
        require_parent(s)?;
    }
    let text = fs::read_to_string(&a.config)?;
    let mut cfg: SimConfig = serde_json::from_str(&text)
        .with_context(|| format!("parsing simulation config {}", a.config.display()))?;
    if let Some(t) = a.trials {
        cfg.trials = usize::try_from(t).context("--trials too large")?;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(n0) = &a.n0 {
        cfg.n0_values = n0.clone();
    }
    cfg.validate()?;
    let result = sweep_with_workers(&cfg, workers)?;
    emit_curves(&result, &a.out, a.svg.as_deref())?;
    Ok(())
}

fn mask(a: &MaskArgs) -> Result<()> {
    require_file(&a.pairs, "pair manifest")?;
    if let Some(v) = &a.valid {
        require_file(v, "validity mask")?;
    }
    require_parent(&a.out)?;
    if let Some(p) = &a.preview {
        require_parent(p)?;
    }
    let manifest = read_pair_manifest(&a.pairs)?;
    let pairs = manifest
        .iter()
        .map(|(l, p)| Ok((GrayImage::read(l)?, GrayImage::read(p)?)))
        .collect::<Result<Vec<_>>>()?;
    let valid = a.valid.as_deref().map(GrayImage::read).transpose()?;
    let mask = accumulate_mask_with_validity(&pairs, valid.as_ref())?;
    let preview = a.preview.as_ref().map(|_| mask_preview(&mask));
    mask.write_csv(&a.out)?;
    if let (Some(path), Some(img)) = (&a.preview, preview) {
        img.write(path)?;
    }
    Ok(())
}
