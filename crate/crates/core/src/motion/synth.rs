//! Procedural rigid-bone motion used as a stand-in for captured data.
//!
//! A dataset shares one rest pose (bone directions plus lengths drawn from
//! `[0.1, 0.5]` m). Each clip moves the root along a sum of sinusoids and
//! swings every bone towards `rest + offset(t)`, where `offset` is a
//! per-joint superposition of 2–4 sinusoids. The swung target is
//! renormalized to the bone length, so bones stay rigid. Offsets are
//! bounded by half the bone length, which keeps the target away from zero.

use std::f64::consts::TAU;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, UnitSphere};
use rayon::prelude::*;

use super::{norm3, MotionClip, Skeleton};
use crate::seeding::{stream, Purpose, StreamKey, StreamRng};
use crate::{Error, Result};

pub const SYNTH_FRAME_RATE: f64 = 25.0;

const BONE_LENGTH_RANGE: (f64, f64) = (0.1, 0.5);
const MAX_AMPLITUDE: f64 = 0.3;
const FREQUENCY_RANGE: (f64, f64) = (0.1, 2.0);
const ROOT_HEIGHT: f64 = 0.9;

#[derive(Debug, Clone, Copy)]
struct Sinusoid {
    amplitude: [f64; 3],
    frequency: f64,
    phase: f64,
}

impl Sinusoid {
    fn at(&self, t: f64) -> [f64; 3] {
        let s = (TAU * self.frequency * t + self.phase).sin();
        [
            self.amplitude[0] * s,
            self.amplitude[1] * s,
            self.amplitude[2] * s,
        ]
    }
}

fn random_sinusoids(rng: &mut StreamRng, max_total_amplitude: f64) -> Vec<Sinusoid> {
    let count = rng.random_range(2..=4);
    let per = (max_total_amplitude / count as f64).min(MAX_AMPLITUDE);
    (0..count)
        .map(|_| {
            let dir: [f64; 3] = UnitSphere.sample(rng);
            let a = per * rng.random::<f64>();
            Sinusoid {
                amplitude: [dir[0] * a, dir[1] * a, dir[2] * a],
                frequency: rng.random_range(FREQUENCY_RANGE.0..=FREQUENCY_RANGE.1),
                phase: rng.random_range(0.0..TAU),
            }
        })
        .collect()
}

fn superpose(waves: &[Sinusoid], t: f64) -> [f64; 3] {
    waves.iter().fold([0.0; 3], |acc, w| {
        let v = w.at(t);
        [acc[0] + v[0], acc[1] + v[1], acc[2] + v[2]]
    })
}

/// Generates `n_clips` clips of `frames` frames each. Output depends only on
/// the arguments, not on thread count.
pub fn synth_dataset(
    seed: u64,
    n_clips: usize,
    skeleton: &Arc<Skeleton>,
    frames: usize,
) -> Result<Vec<MotionClip>> {
    if n_clips == 0 || frames == 0 {
        return Err(Error::InvalidParameter(format!(
            "synthetic dataset needs ≥ 1 clip and ≥ 1 frame (got {n_clips}, {frames})"
        )));
    }
    if n_clips >= 1 << 24 {
        return Err(Error::InvalidParameter(format!("too many clips: {n_clips}")));
    }
    let joints = skeleton.joint_count();
    let mut rest_rng = stream(seed, StreamKey::new(Purpose::SynthRestPose));
    let mut rest = vec![[0.0; 3]; joints];
    for &(child, _) in skeleton.bones() {
        let dir: [f64; 3] = UnitSphere.sample(&mut rest_rng);
        let len = rest_rng.random_range(BONE_LENGTH_RANGE.0..=BONE_LENGTH_RANGE.1);
        rest[child] = [dir[0] * len, dir[1] * len, dir[2] * len];
    }
    let order = skeleton.topological_order();

    (0..n_clips)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, StreamKey::new(Purpose::SynthClip).with_index(c as u32));
            let root_waves = random_sinusoids(&mut rng, MAX_AMPLITUDE);
            let bone_waves: Vec<Vec<Sinusoid>> = (0..joints)
                .map(|j| match skeleton.parent(j) {
                    Some(_) => random_sinusoids(&mut rng, 0.5 * norm3(&rest[j])),
                    None => Vec::new(),
                })
                .collect();

            let mut positions = vec![[0.0; 3]; frames * joints];
            for f in 0..frames {
                let t = f as f64 / SYNTH_FRAME_RATE;
                let frame = &mut positions[f * joints..(f + 1) * joints];
                for &j in &order {
                    match skeleton.parent(j) {
                        None => {
                            let o = superpose(&root_waves, t);
                            frame[j] = [o[0], o[1], ROOT_HEIGHT + o[2]];
                        }
                        Some(p) => {
                            let len = norm3(&rest[j]);
                            let o = superpose(&bone_waves[j], t);
                            let target = [rest[j][0] + o[0], rest[j][1] + o[1], rest[j][2] + o[2]];
                            let s = len / norm3(&target);
                            let base = frame[p];
                            frame[j] = [
                                base[0] + target[0] * s,
                                base[1] + target[1] * s,
                                base[2] + target[2] * s,
                            ];
                        }
                    }
                }
            }
            MotionClip::new(Arc::clone(skeleton), positions, SYNTH_FRAME_RATE)
        })
        .collect()
}
