use std::path::Path;
use std::sync::Arc;

use log::{debug, warn};
use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::config::{DatasetSource, ExperimentConfig};
use super::report::{ExperimentReport, ReportCell};
use super::VERSION;
use crate::embed::{fit_pca, Embedder, EmbedderModel, FeatureVector};
use crate::frechet::{fit_gaussian_with, CovarianceEstimator, FrechetReference};
use crate::imaging::{to_image, MotionImage};
use crate::motion::{load_motion, synth_dataset, to_directional, window, MotionClip};
use crate::perturb::{NoiseKind, NoiseSpec};
use crate::seeding::{stream, Purpose, StreamKey};
use crate::{Error, Result};

/// Directional vectors → images → one batched embedding call.
pub fn embed_clips<E: Embedder + ?Sized>(embedder: &E, clips: &[MotionClip]) -> Result<Vec<FeatureVector>> {
    let images = clips_to_images(clips)?;
    embedder.embed_batch(&images)
}

fn clips_to_images(clips: &[MotionClip]) -> Result<Vec<MotionImage>> {
    clips
        .iter()
        .map(|c| to_directional(c).map(|d| to_image(&d)))
        .collect()
}

/// Synthesizes or loads the configured clips.
pub fn load_dataset(config: &ExperimentConfig) -> Result<Vec<MotionClip>> {
    match &config.dataset {
        DatasetSource::Synthetic {
            clips,
            frames,
            skeleton,
        } => synth_dataset(config.master_seed, *clips, &Arc::new(skeleton.build()?), *frames),
        DatasetSource::Directory(dir) => load_directory(dir),
    }
}

fn load_directory(dir: &Path) -> Result<Vec<MotionClip>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "mot"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no .mot files in {}",
            dir.display()
        )));
    }
    paths.iter().map(load_motion).collect()
}

/// Seeded clip-level train/test split.
pub fn split_dataset(
    clips: Vec<MotionClip>,
    train_fraction: f64,
    master_seed: u64,
) -> Result<(Vec<MotionClip>, Vec<MotionClip>)> {
    let n = clips.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "{n} clips cannot be split into train and test sets"
        )));
    }
    let n_train = ((train_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream(master_seed, StreamKey::new(Purpose::DataSplit)));
    let mut slots: Vec<Option<MotionClip>> = clips.into_iter().map(Some).collect();
    let mut take = |idx: &[usize]| -> Vec<MotionClip> {
        let mut sorted = idx.to_vec();
        sorted.sort_unstable();
        sorted
            .iter()
            .map(|&i| slots[i].take().expect("each index once"))
            .collect()
    };
    let train = take(&order[..n_train]);
    let test = take(&order[n_train..]);
    Ok((train, test))
}

fn windows_of(clips: &[MotionClip], length: usize) -> Result<Vec<MotionClip>> {
    let mut out = Vec::new();
    let mut skipped = 0;
    for clip in clips {
        match window(clip, length, length) {
            Ok(w) => out.extend(w),
            Err(Error::TooShort { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    if skipped > 0 {
        warn!("{skipped} clips shorter than {length} frames were skipped");
    }
    Ok(out)
}

/// Everything fixed for one motion length: the embedder fitted on training
/// windows and the clean test reference.
pub struct LengthPipeline {
    pub length: usize,
    pub embedder: EmbedderModel,
    pub test_windows: Vec<MotionClip>,
    reference: FrechetReference,
    estimator: CovarianceEstimator,
}

impl LengthPipeline {
    pub fn new(
        train: &[MotionClip],
        test: &[MotionClip],
        length: usize,
        latent_dim: usize,
        estimator: CovarianceEstimator,
    ) -> Result<Self> {
        let train_windows = windows_of(train, length)?;
        let embedder = fit_pca(&clips_to_images(&train_windows)?, latent_dim)?;
        let test_windows = windows_of(test, length)?;
        let features = embed_clips(&embedder, &test_windows)?;
        let reference = FrechetReference::new(fit_gaussian_with(&features, estimator)?)?;
        debug!(
            "length {length}: {} train windows, {} test windows",
            train_windows.len(),
            test_windows.len()
        );
        Ok(LengthPipeline {
            length,
            embedder,
            test_windows,
            reference,
            estimator,
        })
    }

    pub fn reference(&self) -> &FrechetReference {
        &self.reference
    }

    /// FMD between the clean test reference and `clips`.
    pub fn score(&self, clips: &[MotionClip]) -> Result<f64> {
        let features = embed_clips(&self.embedder, clips)?;
        self.reference
            .distance(&fit_gaussian_with(&features, self.estimator)?)
    }

    /// Perturbs every test window with one stream, in window order.
    pub fn score_noise(
        &self,
        kind: NoiseKind,
        zeta: f64,
        rng_key: StreamKey,
        master_seed: u64,
    ) -> Result<f64> {
        let spec = NoiseSpec::new(kind, zeta, master_seed)?;
        let mut rng = stream(master_seed, rng_key);
        let noisy = self
            .test_windows
            .iter()
            .map(|w| spec.apply_with(w, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        self.score(&noisy)
    }
}

fn kind_code(kind: NoiseKind) -> u8 {
    match kind {
        NoiseKind::Gaussian => 0,
        NoiseKind::SaltPepper => 1,
        NoiseKind::Temporal => 2,
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs the full sweep. The report depends only on the config and the input
/// data: every (length, kind, ζ, repetition) draws from its own stream and
/// results are aggregated in grid order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let run = || -> Result<ExperimentReport> {
        let clips = load_dataset(config)?;
        let (train, test) = split_dataset(clips, config.train_fraction, config.master_seed)?;
        let mut cells = Vec::new();
        for &length in &config.lengths {
            let pipeline = LengthPipeline::new(&train, &test, length, config.latent_dim, config.estimator)?;
            let grid = config.cells_for_length(length);
            let tasks: Vec<(usize, usize)> = (0..grid.len())
                .flat_map(|c| (0..config.repetitions).map(move |r| (c, r)))
                .collect();
            let scores = tasks
                .par_iter()
                .map(|&(c, rep)| {
                    let (kind, zeta_index, zeta) = grid[c];
                    let key = StreamKey {
                        purpose: Purpose::NoiseCell,
                        length: length as u16,
                        kind: kind_code(kind),
                        zeta_index: zeta_index as u16,
                        index: rep as u32,
                    };
                    pipeline.score_noise(kind, zeta, key, config.master_seed)
                })
                .collect::<Result<Vec<f64>>>()?;
            for (c, &(kind, _, zeta)) in grid.iter().enumerate() {
                let reps = &scores[c * config.repetitions..(c + 1) * config.repetitions];
                let (mean, std) = mean_std(reps);
                cells.push(ReportCell {
                    kind,
                    length,
                    zeta,
                    mean_fmd: mean,
                    std_fmd: std,
                    reps: reps.len(),
                });
            }
        }
        Ok(ExperimentReport::new(
            cells,
            config.hash(),
            VERSION.to_string(),
            config.estimator,
        ))
    };
    if config.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(run)
    } else {
        run()
    }
}
