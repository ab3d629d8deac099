//! Synthetic degradations applied to joint positions.
//!
//! * gaussian: every coordinate gets `N(0, ζ²)`, ζ in meters.
//! * salt-and-pepper: each coordinate independently gets −0.2 m with
//!   probability ζ/2 and +0.2 m with probability ζ/2.
//! * temporal: one run of ζ consecutive frames, starting uniformly at random,
//!   gets `N(0, 0.003²)` on every coordinate; other frames are untouched.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::motion::MotionClip;
use crate::seeding::{stream, Purpose, StreamKey};
use crate::{Error, Result};

pub const IMPULSE_AMPLITUDE: f64 = 0.2;
pub const TEMPORAL_SIGMA: f64 = 0.003;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Gaussian,
    SaltPepper,
    Temporal,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 3] = [NoiseKind::Gaussian, NoiseKind::SaltPepper, NoiseKind::Temporal];

    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::SaltPepper => "salt_pepper",
            NoiseKind::Temporal => "temporal",
        }
    }

    /// Checks `zeta` against this kind's domain.
    pub fn validate_zeta(self, zeta: f64) -> Result<()> {
        let ok = match self {
            NoiseKind::Gaussian => zeta.is_finite() && zeta >= 0.0,
            NoiseKind::SaltPepper => (0.0..=1.0).contains(&zeta),
            NoiseKind::Temporal => zeta >= 0.0 && zeta.fract() == 0.0 && zeta < 1e9,
        };
        if ok {
            Ok(())
        } else {
            let domain = match self {
                NoiseKind::Gaussian => "a finite standard deviation ≥ 0",
                NoiseKind::SaltPepper => "a probability in [0, 1]",
                NoiseKind::Temporal => "a whole number of frames ≥ 0",
            };
            Err(Error::InvalidParameter(format!(
                "{} zeta {zeta} must be {domain}",
                self.as_str()
            )))
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(NoiseKind::Gaussian),
            "salt_pepper" | "salt-pepper" => Ok(NoiseKind::SaltPepper),
            "temporal" => Ok(NoiseKind::Temporal),
            other => Err(Error::InvalidParameter(format!(
                "unknown noise kind `{other}` (expected gaussian, salt_pepper or temporal)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    kind: NoiseKind,
    zeta: f64,
    seed: u64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, zeta: f64, seed: u64) -> Result<Self> {
        kind.validate_zeta(zeta)?;
        Ok(NoiseSpec { kind, zeta, seed })
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Applies the noise with a stream derived from `seed`.
    pub fn apply(&self, clip: &MotionClip) -> Result<MotionClip> {
        let mut rng = stream(self.seed, StreamKey::new(Purpose::NoiseSpec));
        self.apply_with(clip, &mut rng)
    }

    pub fn apply_with<R: Rng + ?Sized>(&self, clip: &MotionClip, rng: &mut R) -> Result<MotionClip> {
        match self.kind {
            NoiseKind::Gaussian => add_gaussian(clip, self.zeta, rng),
            NoiseKind::SaltPepper => add_salt_pepper(clip, self.zeta, rng),
            NoiseKind::Temporal => add_temporal(clip, self.zeta as usize, rng),
        }
    }
}

pub fn add_gaussian<R: Rng + ?Sized>(clip: &MotionClip, zeta: f64, rng: &mut R) -> Result<MotionClip> {
    NoiseKind::Gaussian.validate_zeta(zeta)?;
    if zeta == 0.0 {
        return Ok(clip.clone());
    }
    let normal = Normal::new(0.0, zeta).expect("validated standard deviation");
    let positions = clip
        .positions()
        .iter()
        .map(|p| {
            [
                p[0] + normal.sample(rng),
                p[1] + normal.sample(rng),
                p[2] + normal.sample(rng),
            ]
        })
        .collect();
    Ok(clip.with_positions(positions))
}

pub fn add_salt_pepper<R: Rng + ?Sized>(clip: &MotionClip, zeta: f64, rng: &mut R) -> Result<MotionClip> {
    NoiseKind::SaltPepper.validate_zeta(zeta)?;
    if zeta == 0.0 {
        return Ok(clip.clone());
    }
    let half = zeta / 2.0;
    let mut impulse = |v: f64| {
        let u: f64 = rng.random();
        if u <= half {
            v - IMPULSE_AMPLITUDE
        } else if u <= zeta {
            v + IMPULSE_AMPLITUDE
        } else {
            v
        }
    };
    let positions = clip
        .positions()
        .iter()
        .map(|p| [impulse(p[0]), impulse(p[1]), impulse(p[2])])
        .collect();
    Ok(clip.with_positions(positions))
}

pub fn add_temporal<R: Rng + ?Sized>(clip: &MotionClip, zeta: usize, rng: &mut R) -> Result<MotionClip> {
    let frames = clip.frames();
    if zeta > frames {
        return Err(Error::InvalidParameter(format!(
            "temporal zeta {zeta} exceeds clip length {frames}"
        )));
    }
    if zeta == 0 {
        return Ok(clip.clone());
    }
    let start = rng.random_range(0..=frames - zeta);
    let normal = Normal::new(0.0, TEMPORAL_SIGMA).expect("positive constant");
    let joints = clip.joints();
    let mut positions = clip.positions().to_vec();
    for p in &mut positions[start * joints..(start + zeta) * joints] {
        for v in p.iter_mut() {
            *v += normal.sample(rng);
        }
    }
    Ok(clip.with_positions(positions))
}
