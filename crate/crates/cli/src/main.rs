//! `fmd` command-line front end.
//!
//! Exit codes: 0 on success, 2 for invalid input (arguments, files,
//! configs), 1 for runtime failures.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use fmd_core::embed::{
    export_features, fit_pca, import_features, load_model, save_model, Embedder, FeatureVector,
};
use fmd_core::frechet::{
    fit_gaussian_with, load_stats, save_stats, CovarianceEstimator, FrechetReference, GaussianStats,
};
use fmd_core::harness::SkeletonChoice;
use fmd_core::harness::{
    embed_clips, emit_report, run_experiment, ExperimentConfig, ExperimentReport, ReportFormat,
};
use fmd_core::imaging::to_image;
use fmd_core::motion::{load_motion, save_motion, synth_dataset, to_directional, window, MotionClip};
use fmd_core::perturb::{NoiseKind, NoiseSpec};

#[derive(Parser)]
#[command(name = "fmd", version, about = "Fréchet Motion Distance toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic MOT1 dataset.
    Synth(SynthArgs),
    /// Fit a PCA embedder on windows of MOT1 clips.
    TrainEmbedder(TrainArgs),
    /// Embed MOT1 clips into a FEAT1 file.
    Embed(EmbedArgs),
    /// Fit Gaussian moments of a FEAT1 file into a STATS1 file.
    Stats(StatsArgs),
    /// Fréchet distance between two STATS1 or two FEAT1 files.
    Score(ScoreArgs),
    /// Apply one noise model to a MOT1 clip.
    Perturb(PerturbArgs),
    /// Run a degradation sweep.
    Experiment(ExperimentArgs),
    /// Re-render a CSV report as SVG, CSV or JSON.
    Plot(PlotArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 500)]
    clips: usize,
    #[arg(long, default_value_t = 64)]
    frames: usize,
    /// `humanoid17` or `chain:<joints>`
    #[arg(long, default_value = "humanoid17")]
    skeleton: String,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct WindowArgs {
    /// A MOT1 file or a directory of `.mot` files.
    #[arg(long)]
    input: PathBuf,
    /// Window stride in frames; defaults to the window length.
    #[arg(long)]
    stride: Option<usize>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    windows: WindowArgs,
    /// Motion length (frames) of the windows the model accepts.
    #[arg(long)]
    length: usize,
    #[arg(long, default_value_t = 64)]
    dim: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EmbedArgs {
    #[command(flatten)]
    windows: WindowArgs,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Also write every window as an 8-bit PNG (lossy, inspection only).
    #[arg(long)]
    png_dir: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// `unbiased` (n−1) or `ml` (n)
    #[arg(long, default_value = "unbiased")]
    estimator: String,
}

#[derive(Args)]
struct ScoreArgs {
    reference: PathBuf,
    candidate: PathBuf,
    /// Estimator used when the inputs are FEAT1 files.
    #[arg(long, default_value = "unbiased")]
    estimator: String,
}

#[derive(Args)]
struct PerturbArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    kind: String,
    #[arg(long)]
    zeta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Flat key = value config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Comma-separated list of csv, json, svg.
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    threads: Option<usize>,
    /// Extra `key=value` overrides applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct PlotArgs {
    /// CSV report written by `experiment`.
    #[arg(long)]
    report: PathBuf,
    #[arg(long, default_value = "svg")]
    format: String,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let validation = match err.chain().find_map(|e| e.downcast_ref::<fmd_core::Error>()) {
                Some(e) => e.is_validation(),
                None => !err.chain().any(|e| e.is::<std::io::Error>()),
            };
            ExitCode::from(if validation { 2 } else { 1 })
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Synth(a) => synth(a),
        Command::TrainEmbedder(a) => train(a),
        Command::Embed(a) => embed(a),
        Command::Stats(a) => stats(a),
        Command::Score(a) => score(a),
        Command::Perturb(a) => perturb(a),
        Command::Experiment(a) => experiment(a),
        Command::Plot(a) => plot(a),
    }
}

fn parse_skeleton(s: &str) -> Result<SkeletonChoice> {
    let mut cfg = ExperimentConfig::default();
    cfg.set("skeleton", s)?;
    match cfg.dataset {
        fmd_core::harness::DatasetSource::Synthetic { skeleton, .. } => Ok(skeleton),
        _ => unreachable!("default dataset is synthetic"),
    }
}

fn synth(a: SynthArgs) -> Result<()> {
    let skeleton = Arc::new(parse_skeleton(&a.skeleton)?.build()?);
    let clips = synth_dataset(a.seed, a.clips, &skeleton, a.frames)?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let width = (clips.len().max(2) - 1).to_string().len();
    for (i, clip) in clips.iter().enumerate() {
        save_motion(clip, a.out_dir.join(format!("clip_{i:0width$}.mot")))?;
    }
    println!("wrote {} clips to {}", clips.len(), a.out_dir.display());
    Ok(())
}

/// Clips from a file or every `.mot` in a directory, in file-name order.
fn load_clips(path: &Path) -> Result<Vec<MotionClip>> {
    if path.is_dir() {
        let mut paths: Vec<PathBuf> = fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "mot"))
            .collect();
        paths.sort();
        if paths.is_empty() {
            bail!(fmd_core::Error::InsufficientData(format!(
                "no .mot files in {}",
                path.display()
            )));
        }
        paths
            .iter()
            .map(|p| load_motion(p).with_context(|| format!("reading {}", p.display())))
            .collect()
    } else {
        Ok(vec![
            load_motion(path).with_context(|| format!("reading {}", path.display()))?
        ])
    }
}

fn load_windows(args: &WindowArgs, length: usize) -> Result<Vec<MotionClip>> {
    let stride = args.stride.unwrap_or(length);
    let mut out = Vec::new();
    for clip in load_clips(&args.input)? {
        out.extend(window(&clip, length, stride)?);
    }
    Ok(out)
}

fn train(a: TrainArgs) -> Result<()> {
    let windows = load_windows(&a.windows, a.length)?;
    let images = windows
        .iter()
        .map(|w| to_directional(w).map(|d| to_image(&d)))
        .collect::<fmd_core::Result<Vec<_>>>()?;
    let model = fit_pca(&images, a.dim)?;
    save_model(&model, &a.out)?;
    println!(
        "fitted {}-dim embedder on {} windows of {} frames -> {}",
        a.dim,
        images.len(),
        a.length,
        a.out.display()
    );
    Ok(())
}

fn embed(a: EmbedArgs) -> Result<()> {
    let model = load_model(&a.model).with_context(|| format!("reading {}", a.model.display()))?;
    let (_, length) = model.input_shape();
    let windows = load_windows(&a.windows, length)?;
    let features = embed_clips(&model, &windows)?;
    export_features(model.latent_dim(), &features, &a.out)?;
    if let Some(dir) = &a.png_dir {
        fs::create_dir_all(dir)?;
        for (i, w) in windows.iter().enumerate() {
            let img = to_image(&to_directional(w)?);
            let buf = image::RgbImage::from_raw(img.width() as u32, img.height() as u32, img.to_rgb8())
                .context("image buffer size")?;
            buf.save(dir.join(format!("window_{i:05}.png")))?;
        }
    }
    println!("embedded {} windows -> {}", features.len(), a.out.display());
    Ok(())
}

fn stats(a: StatsArgs) -> Result<()> {
    let estimator: CovarianceEstimator = a.estimator.parse()?;
    let features = import_features(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let stats = fit_gaussian_with(&features, estimator)?;
    save_stats(&stats, &a.out)?;
    println!(
        "fitted d={} from n={} features ({} covariance) -> {}",
        stats.dim(),
        stats.sample_count(),
        estimator.as_str(),
        a.out.display()
    );
    Ok(())
}

/// `%g`-style rendering with 6 significant digits.
fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let s = format!("{:.*}", (5 - exp).max(0) as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{x:.5e}");
        let (mantissa, exponent) = s.split_once('e').expect("exponent form");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exponent}")
    }
}

fn load_stats_or_features(path: &Path, estimator: CovarianceEstimator) -> Result<GaussianStats> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let magic = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .and_then(|l| l.split_whitespace().next())
        .unwrap_or("");
    match magic {
        "STATS1" => Ok(load_stats(path)?),
        "FEAT1" => {
            let features: Vec<FeatureVector> = import_features(path)?;
            Ok(fit_gaussian_with(&features, estimator)?)
        }
        _ => bail!(fmd_core::Error::Parse {
            line: 1,
            reason: format!("{}: expected a STATS1 or FEAT1 file", path.display()),
        }),
    }
}

fn score(a: ScoreArgs) -> Result<()> {
    let estimator: CovarianceEstimator = a.estimator.parse()?;
    let r = load_stats_or_features(&a.reference, estimator)?;
    let g = load_stats_or_features(&a.candidate, estimator)?;
    let terms = FrechetReference::new(r.clone())?.terms(&g)?;
    println!("FMD {}", sig6(terms.value()));
    println!("exact {:e}", terms.value());
    println!("mean_term {}", sig6(terms.mean_term));
    println!("covariance_term {}", sig6(terms.covariance_term));
    println!(
        "estimator reference={} candidate={}",
        r.estimator().as_str(),
        g.estimator().as_str()
    );
    println!(
        "samples reference={} candidate={}",
        r.sample_count(),
        g.sample_count()
    );
    println!("dim {}", r.dim());
    if terms.stabilized {
        println!("stabilized yes");
    }
    Ok(())
}

fn perturb(a: PerturbArgs) -> Result<()> {
    let kind: NoiseKind = a.kind.parse()?;
    let spec = NoiseSpec::new(kind, a.zeta, a.seed)?;
    let clip = load_motion(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    save_motion(&spec.apply(&clip)?, &a.out)?;
    println!("{kind} ζ={} seed={} -> {}", a.zeta, a.seed, a.out.display());
    Ok(())
}

fn parse_formats(s: &str) -> Result<Vec<ReportFormat>> {
    s.split(',')
        .map(|f| Ok(f.trim().parse::<ReportFormat>()?))
        .collect()
}

fn experiment(a: ExperimentArgs) -> Result<()> {
    let mut config = match &a.config {
        Some(path) => ExperimentConfig::parse(
            &fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        )?,
        None => ExperimentConfig::default(),
    };
    for kv in &a.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| fmd_core::Error::InvalidParameter(format!("`--set {kv}` is not KEY=VALUE")))?;
        config.set(k.trim(), v.trim())?;
    }
    if let Some(seed) = a.seed {
        config.master_seed = seed;
    }
    if let Some(t) = a.threads {
        config.threads = t;
    }
    config.validate()?;
    let formats = parse_formats(&a.format)?;

    info!("config hash {}", config.hash());
    let report = run_experiment(&config)?;
    fs::create_dir_all(&a.out_dir)?;
    for f in formats {
        let path = a.out_dir.join(format!("report.{}", f.extension()));
        emit_report(&report, f, &path)?;
        println!("wrote {}", path.display());
    }
    print_summary(&report);
    Ok(())
}

fn print_summary(report: &ExperimentReport) {
    println!(
        "{:<12} {:>6} {:>10} {:>14} {:>14}",
        "kind", "length", "zeta", "mean_fmd", "std_fmd"
    );
    for c in report.cells() {
        println!(
            "{:<12} {:>6} {:>10} {:>14} {:>14}",
            c.kind.as_str(),
            c.length,
            sig6(c.zeta),
            sig6(c.mean_fmd),
            sig6(c.std_fmd)
        );
    }
    for l in report.lengths() {
        if let Some(r) = report.temporal_to_gaussian_ratio(l) {
            println!("temporal/gaussian FMD ratio at top ζ, L={l}: {}", sig6(r));
        }
    }
}

fn plot(a: PlotArgs) -> Result<()> {
    let text = fs::read_to_string(&a.report).with_context(|| format!("reading {}", a.report.display()))?;
    let report = ExperimentReport::from_csv(&text)?;
    let format: ReportFormat = a.format.parse()?;
    emit_report(&report, format, &a.out)?;
    println!("wrote {}", a.out.display());
    Ok(())
}
