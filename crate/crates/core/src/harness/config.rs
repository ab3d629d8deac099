//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # comments and blank lines are ignored
//! master_seed     = 20240521
//! dataset         = synthetic          # or a directory of .mot files
//! synthetic_clips = 500
//! synthetic_frames = 64
//! skeleton        = humanoid17         # or chain:<joints>
//! lengths         = 18,34,64
//! latent_dim      = 64
//! gaussian        = 0,0.005,0.01,0.02,0.05,0.1
//! salt_pepper     = 0,0.01,0.05,0.1,0.2,0.4
//! temporal        = 0,2,4,8,16,32
//! repetitions     = 20
//! train_fraction  = 0.7
//! covariance      = unbiased           # or ml
//! threads         = 0                  # 0 = all cores; never affects results
//! ```
//!
//! A temporal ζ larger than the shortest configured length is evaluated
//! only at the longest length; every other (kind, ζ) runs at every length.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::PathBuf;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::frechet::CovarianceEstimator;
use crate::motion::Skeleton;
use crate::perturb::NoiseKind;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkeletonChoice {
    Humanoid17,
    Chain(usize),
}

impl SkeletonChoice {
    pub fn build(self) -> Result<Skeleton> {
        match self {
            SkeletonChoice::Humanoid17 => Ok(Skeleton::humanoid17()),
            SkeletonChoice::Chain(n) => Skeleton::chain(n),
        }
    }
}

impl std::fmt::Display for SkeletonChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SkeletonChoice::Humanoid17 => f.write_str("humanoid17"),
            SkeletonChoice::Chain(n) => write!(f, "chain:{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Synthetic {
        clips: usize,
        frames: usize,
        skeleton: SkeletonChoice,
    },
    /// Every `*.mot` file in the directory, in file-name order.
    Directory(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub dataset: DatasetSource,
    pub lengths: Vec<usize>,
    pub latent_dim: usize,
    pub grids: BTreeMap<NoiseKind, Vec<f64>>,
    pub repetitions: usize,
    pub train_fraction: f64,
    pub estimator: CovarianceEstimator,
    /// Worker threads, 0 for the rayon default.
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let grids = BTreeMap::from([
            (NoiseKind::Gaussian, vec![0.0, 0.005, 0.01, 0.02, 0.05, 0.1]),
            (NoiseKind::SaltPepper, vec![0.0, 0.01, 0.05, 0.1, 0.2, 0.4]),
            (NoiseKind::Temporal, vec![0.0, 2.0, 4.0, 8.0, 16.0, 32.0]),
        ]);
        ExperimentConfig {
            master_seed: 20240521,
            dataset: DatasetSource::Synthetic {
                clips: 500,
                frames: 64,
                skeleton: SkeletonChoice::Humanoid17,
            },
            lengths: vec![18, 34, 64],
            latent_dim: 64,
            grids,
            repetitions: 20,
            train_fraction: 0.7,
            estimator: CovarianceEstimator::Unbiased,
            threads: 0,
        }
    }
}

fn parse_list<T: FromStr>(field: &str, value: &str) -> Result<Vec<T>> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::config(field, format!("`{}` is not a valid entry", t.trim())))
        })
        .collect()
}

fn parse_one<T: FromStr>(field: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(field, format!("`{}` is not a valid value", value.trim())))
}

impl ExperimentConfig {
    /// Defaults overridden by the keys in `text`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, format!("expected `key = value`, got `{line}`")))?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key = value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "master_seed" | "seed" => self.master_seed = parse_one("master_seed", value)?,
            "dataset" => {
                self.dataset = match value {
                    "synthetic" => match &self.dataset {
                        s @ DatasetSource::Synthetic { .. } => s.clone(),
                        DatasetSource::Directory(_) => DatasetSource::Synthetic {
                            clips: 500,
                            frames: 64,
                            skeleton: SkeletonChoice::Humanoid17,
                        },
                    },
                    "" => return Err(Error::config("dataset", "empty value")),
                    dir => DatasetSource::Directory(PathBuf::from(dir)),
                }
            }
            "synthetic_clips" | "synthetic_frames" | "skeleton" => {
                let DatasetSource::Synthetic {
                    clips,
                    frames,
                    skeleton,
                } = &mut self.dataset
                else {
                    return Err(Error::config(key, "only valid with `dataset = synthetic`"));
                };
                match key {
                    "synthetic_clips" => *clips = parse_one(key, value)?,
                    "synthetic_frames" => *frames = parse_one(key, value)?,
                    _ => {
                        *skeleton = match value {
                            "humanoid17" => SkeletonChoice::Humanoid17,
                            v => match v.strip_prefix("chain:").map(str::parse) {
                                Some(Ok(n)) => SkeletonChoice::Chain(n),
                                _ => {
                                    return Err(Error::config(
                                        key,
                                        format!("`{v}` is neither `humanoid17` nor `chain:<joints>`"),
                                    ))
                                }
                            },
                        }
                    }
                }
            }
            "lengths" => self.lengths = parse_list(key, value)?,
            "latent_dim" => self.latent_dim = parse_one(key, value)?,
            "gaussian" | "salt_pepper" | "temporal" => {
                let kind: NoiseKind = key.parse()?;
                self.grids.insert(kind, parse_list(key, value)?);
            }
            "repetitions" => self.repetitions = parse_one(key, value)?,
            "train_fraction" => self.train_fraction = parse_one(key, value)?,
            "covariance" => {
                self.estimator = value
                    .parse()
                    .map_err(|_| Error::config(key, format!("`{value}` is neither `unbiased` nor `ml`")))?
            }
            "threads" => self.threads = parse_one(key, value)?,
            other => return Err(Error::config(other, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.lengths.is_empty() {
            return Err(Error::config("lengths", "at least one motion length is required"));
        }
        if let Some(l) = self.lengths.iter().find(|&&l| l < 2 || l > u16::MAX as usize) {
            return Err(Error::config("lengths", format!("length {l} outside 2..=65535")));
        }
        let mut sorted = self.lengths.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.lengths.len() {
            return Err(Error::config("lengths", "duplicate length"));
        }
        if self.latent_dim == 0 {
            return Err(Error::config("latent_dim", "must be ≥ 1"));
        }
        if self.repetitions == 0 || self.repetitions >= 1 << 24 {
            return Err(Error::config("repetitions", "must be in 1..16777216"));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::config(
                "train_fraction",
                "must lie strictly between 0 and 1",
            ));
        }
        let max_len = *sorted.last().expect("non-empty");
        for (kind, grid) in &self.grids {
            let field = kind.as_str();
            if grid.len() >= 4096 {
                return Err(Error::config(field, "grid has more than 4095 entries"));
            }
            for &z in grid {
                kind.validate_zeta(z)
                    .map_err(|e| Error::config(field, e.to_string()))?;
                if *kind == NoiseKind::Temporal && z > max_len as f64 {
                    return Err(Error::config(
                        field,
                        format!("ζ = {z} frames exceeds the longest motion length {max_len}"),
                    ));
                }
            }
            let mut g = grid.clone();
            g.sort_by(f64::total_cmp);
            g.dedup();
            if g.len() != grid.len() {
                return Err(Error::config(field, "duplicate ζ value"));
            }
        }
        if self.grids.values().all(Vec::is_empty) {
            return Err(Error::config("gaussian", "every noise grid is empty"));
        }
        if let DatasetSource::Synthetic {
            clips,
            frames,
            skeleton,
        } = &self.dataset
        {
            if *clips < 2 {
                return Err(Error::config("synthetic_clips", "need at least 2 clips"));
            }
            if *frames < max_len {
                return Err(Error::config(
                    "synthetic_frames",
                    format!("{frames} frames cannot hold a window of {max_len}"),
                ));
            }
            skeleton
                .build()
                .map_err(|e| Error::config("skeleton", e.to_string()))?;
        }
        Ok(())
    }

    /// `(kind, ζ index, ζ)` cells evaluated at motion length `length`.
    pub fn cells_for_length(&self, length: usize) -> Vec<(NoiseKind, usize, f64)> {
        let min_len = self.lengths.iter().copied().min().unwrap_or(length);
        let max_len = self.lengths.iter().copied().max().unwrap_or(length);
        let mut out = Vec::new();
        for (kind, grid) in &self.grids {
            for (i, &z) in grid.iter().enumerate() {
                if *kind == NoiseKind::Temporal {
                    let runs = if z > min_len as f64 {
                        length == max_len
                    } else {
                        z <= length as f64
                    };
                    if !runs {
                        continue;
                    }
                }
                out.push((*kind, i, z));
            }
        }
        out
    }

    /// Canonical text of every setting that influences results.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",");
        writeln!(s, "master_seed={}", self.master_seed).unwrap();
        match &self.dataset {
            DatasetSource::Synthetic {
                clips,
                frames,
                skeleton,
            } => writeln!(
                s,
                "dataset=synthetic clips={clips} frames={frames} skeleton={skeleton}"
            )
            .unwrap(),
            DatasetSource::Directory(p) => writeln!(s, "dataset={}", p.display()).unwrap(),
        }
        let lengths: Vec<String> = self.lengths.iter().map(usize::to_string).collect();
        writeln!(s, "lengths={}", lengths.join(",")).unwrap();
        writeln!(s, "latent_dim={}", self.latent_dim).unwrap();
        for (kind, grid) in &self.grids {
            writeln!(s, "{kind}={}", join(grid)).unwrap();
        }
        writeln!(s, "repetitions={}", self.repetitions).unwrap();
        writeln!(s, "train_fraction={:e}", self.train_fraction).unwrap();
        writeln!(s, "covariance={}", self.estimator.as_str()).unwrap();
        s
    }

    /// First 16 hex digits of the SHA-256 of [`Self::canonical`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}
