//! Skeleton topology, joint-position clips and their bone-direction signal.

mod io;
mod synth;

use std::sync::Arc;

pub use io::{load_motion, read_mot1, save_motion, write_mot1};
pub use synth::{synth_dataset, SYNTH_FRAME_RATE};

use crate::{Error, Result};

/// Bones shorter than this are treated as coincident joints.
pub const MIN_BONE_NORM: f64 = 1e-8;

/// Joint tree. Bone `b` connects the `b`-th non-root joint (ascending joint
/// index) to its parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton {
    joint_names: Vec<String>,
    parents: Vec<Option<usize>>,
    root: usize,
    /// `(child, parent)` per bone.
    bones: Vec<(usize, usize)>,
}

impl Skeleton {
    /// Builds a skeleton from names and parent indices, `-1` marking the root.
    pub fn new(joint_names: Vec<String>, parents: &[i64]) -> Result<Self> {
        let n = parents.len();
        if joint_names.len() != n {
            return Err(Error::Topology(format!(
                "{} joint names for {n} parent entries",
                joint_names.len()
            )));
        }
        if n < 2 {
            return Err(Error::Topology(format!("need at least 2 joints, got {n}")));
        }
        let mut resolved = Vec::with_capacity(n);
        let mut roots = Vec::new();
        for (j, &p) in parents.iter().enumerate() {
            match p {
                -1 => {
                    roots.push(j);
                    resolved.push(None);
                }
                p if p >= 0 && (p as usize) < n && p as usize != j => resolved.push(Some(p as usize)),
                p => return Err(Error::Topology(format!("joint {j} has invalid parent index {p}"))),
            }
        }
        if roots.len() != 1 {
            return Err(Error::Topology(format!(
                "expected exactly one root, found {}",
                roots.len()
            )));
        }
        // With a single root, the parent graph is a tree iff every joint
        // reaches the root in fewer than n steps.
        for start in 0..n {
            let mut j = start;
            let mut steps = 0;
            while let Some(p) = resolved[j] {
                j = p;
                steps += 1;
                if steps >= n {
                    return Err(Error::Topology(format!("cycle through joint {start}")));
                }
            }
        }
        let bones = resolved
            .iter()
            .enumerate()
            .filter_map(|(j, p)| p.map(|p| (j, p)))
            .collect();
        Ok(Skeleton {
            joint_names,
            parents: resolved,
            root: roots[0],
            bones,
        })
    }

    /// Builds a skeleton with generated names `joint_0 … joint_{J-1}`.
    pub fn from_parents(parents: &[i64]) -> Result<Self> {
        let names = (0..parents.len()).map(|j| format!("joint_{j}")).collect();
        Self::new(names, parents)
    }

    /// The 17-joint humanoid layout commonly used with Human3.6M exports.
    pub fn humanoid17() -> Self {
        const JOINTS: [(&str, i64); 17] = [
            ("hip", -1),
            ("right_hip", 0),
            ("right_knee", 1),
            ("right_foot", 2),
            ("left_hip", 0),
            ("left_knee", 4),
            ("left_foot", 5),
            ("spine", 0),
            ("thorax", 7),
            ("neck", 8),
            ("head", 9),
            ("left_shoulder", 8),
            ("left_elbow", 11),
            ("left_wrist", 12),
            ("right_shoulder", 8),
            ("right_elbow", 14),
            ("right_wrist", 15),
        ];
        let names = JOINTS.iter().map(|(n, _)| n.to_string()).collect();
        let parents: Vec<i64> = JOINTS.iter().map(|&(_, p)| p).collect();
        Self::new(names, &parents).expect("built-in humanoid topology is valid")
    }

    /// A simple kinematic chain `0 ← 1 ← … ← n-1`.
    pub fn chain(joints: usize) -> Result<Self> {
        let parents: Vec<i64> = (0..joints as i64).map(|j| j - 1).collect();
        Self::from_parents(&parents)
    }

    pub fn joint_count(&self) -> usize {
        self.parents.len()
    }

    pub fn bone_count(&self) -> usize {
        self.bones.len()
    }

    pub fn joint_names(&self) -> &[String] {
        &self.joint_names
    }

    pub fn parent(&self, joint: usize) -> Option<usize> {
        self.parents[joint]
    }

    /// Parent indices with `-1` for the root.
    pub fn parent_indices(&self) -> Vec<i64> {
        self.parents.iter().map(|p| p.map_or(-1, |p| p as i64)).collect()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// `(child, parent)` pairs in bone order.
    pub fn bones(&self) -> &[(usize, usize)] {
        &self.bones
    }

    /// Joints ordered so every parent precedes its children.
    pub fn topological_order(&self) -> Vec<usize> {
        let n = self.joint_count();
        let mut children = vec![Vec::new(); n];
        for &(c, p) in &self.bones {
            children[p].push(c);
        }
        let mut order = Vec::with_capacity(n);
        let mut stack = vec![self.root];
        while let Some(j) = stack.pop() {
            order.push(j);
            stack.extend(children[j].iter().rev());
        }
        order
    }
}

/// `F × J` joint positions in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionClip {
    skeleton: Arc<Skeleton>,
    positions: Vec<[f64; 3]>,
    frames: usize,
    frame_rate: f64,
}

impl MotionClip {
    /// `positions` is frame-major: joint `j` of frame `f` lives at `f * J + j`.
    pub fn new(skeleton: Arc<Skeleton>, positions: Vec<[f64; 3]>, frame_rate: f64) -> Result<Self> {
        let joints = skeleton.joint_count();
        if positions.is_empty() || !positions.len().is_multiple_of(joints) {
            return Err(Error::DimensionMismatch(format!(
                "{} joint positions is not a positive multiple of {joints} joints",
                positions.len()
            )));
        }
        if !(frame_rate.is_finite() && frame_rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "frame rate must be positive, got {frame_rate}"
            )));
        }
        if let Some(i) = positions.iter().position(|p| p.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "non-finite position at frame {}, joint {}",
                i / joints,
                i % joints
            )));
        }
        let frames = positions.len() / joints;
        Ok(MotionClip {
            skeleton,
            positions,
            frames,
            frame_rate,
        })
    }

    pub fn skeleton(&self) -> &Arc<Skeleton> {
        &self.skeleton
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn joints(&self) -> usize {
        self.skeleton.joint_count()
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn frame(&self, f: usize) -> &[[f64; 3]] {
        let j = self.joints();
        &self.positions[f * j..(f + 1) * j]
    }

    pub fn position(&self, frame: usize, joint: usize) -> [f64; 3] {
        self.positions[frame * self.joints() + joint]
    }

    /// Same skeleton and frame rate, new positions of identical shape.
    pub(crate) fn with_positions(&self, positions: Vec<[f64; 3]>) -> MotionClip {
        debug_assert_eq!(positions.len(), self.positions.len());
        MotionClip {
            skeleton: Arc::clone(&self.skeleton),
            positions,
            frames: self.frames,
            frame_rate: self.frame_rate,
        }
    }

    /// Every joint in every frame shifted by `offset`.
    pub fn translated(&self, offset: [f64; 3]) -> MotionClip {
        let positions = self
            .positions
            .iter()
            .map(|p| [p[0] + offset[0], p[1] + offset[1], p[2] + offset[2]])
            .collect();
        self.with_positions(positions)
    }
}

/// `F × (J−1)` unit bone-direction vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalMotion {
    frames: usize,
    bones: usize,
    vectors: Vec<[f64; 3]>,
}

impl DirectionalMotion {
    /// Frame-major layout: bone `b` of frame `f` at `f * bones + b`. No
    /// normalization is applied or checked; see [`Self::max_norm_deviation`].
    pub fn new(frames: usize, bones: usize, vectors: Vec<[f64; 3]>) -> Result<Self> {
        if frames == 0 || bones == 0 || vectors.len() != frames * bones {
            return Err(Error::DimensionMismatch(format!(
                "{} vectors for {frames} frames × {bones} bones",
                vectors.len()
            )));
        }
        Ok(DirectionalMotion {
            frames,
            bones,
            vectors,
        })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn bones(&self) -> usize {
        self.bones
    }

    pub fn vectors(&self) -> &[[f64; 3]] {
        &self.vectors
    }

    pub fn vector(&self, frame: usize, bone: usize) -> [f64; 3] {
        self.vectors[frame * self.bones + bone]
    }

    /// Largest `|‖v‖ − 1|` over all vectors.
    pub fn max_norm_deviation(&self) -> f64 {
        self.vectors
            .iter()
            .map(|v| (norm3(v) - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Unit parent→child direction of every bone in every frame.
pub fn to_directional(clip: &MotionClip) -> Result<DirectionalMotion> {
    let bones = clip.skeleton.bones();
    let mut vectors = Vec::with_capacity(clip.frames * bones.len());
    for f in 0..clip.frames {
        let frame = clip.frame(f);
        for (b, &(child, parent)) in bones.iter().enumerate() {
            let c = frame[child];
            let p = frame[parent];
            let d = [c[0] - p[0], c[1] - p[1], c[2] - p[2]];
            let n = norm3(&d);
            if n < MIN_BONE_NORM {
                return Err(Error::DegenerateBone { frame: f, bone: b });
            }
            vectors.push([d[0] / n, d[1] / n, d[2] / n]);
        }
    }
    DirectionalMotion::new(clip.frames, bones.len(), vectors)
}

/// Cuts `clip` into windows of exactly `length` frames starting every
/// `stride` frames; a trailing partial window is dropped.
pub fn window(clip: &MotionClip, length: usize, stride: usize) -> Result<Vec<MotionClip>> {
    if length == 0 || stride == 0 {
        return Err(Error::InvalidParameter(format!(
            "window length and stride must be ≥ 1 (got {length}, {stride})"
        )));
    }
    if clip.frames < length {
        return Err(Error::TooShort {
            frames: clip.frames,
            length,
        });
    }
    let j = clip.joints();
    Ok((0..=clip.frames - length)
        .step_by(stride)
        .map(|start| MotionClip {
            skeleton: Arc::clone(&clip.skeleton),
            positions: clip.positions[start * j..(start + length) * j].to_vec(),
            frames: length,
            frame_rate: clip.frame_rate,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clip(parents: &[i64], frames: Vec<Vec<[f64; 3]>>) -> MotionClip {
        let sk = Arc::new(Skeleton::from_parents(parents).unwrap());
        MotionClip::new(sk, frames.into_iter().flatten().collect(), 30.0).unwrap()
    }

    #[test]
    fn axis_bone_normalizes() {
        let c = clip(&[-1, 0], vec![vec![[0.0, 0.0, 0.0], [0.0, 0.0, 2.0]]]);
        let d = to_directional(&c).unwrap();
        assert_eq!(d.vectors(), &[[0.0, 0.0, 1.0]]);
        let t = to_directional(&c.translated([5.0, -3.0, 1.0])).unwrap();
        assert_eq!(t.vectors(), d.vectors());
    }

    #[test]
    fn diagonal_bone_matches_hand_normalization() {
        // 3-joint chain; every child sits at (1,1,0) from its parent.
        let frames: Vec<Vec<[f64; 3]>> = (0..4)
            .map(|f| {
                let o = f as f64 * 0.25;
                vec![[o, 0.0, 0.0], [o + 1.0, 1.0, 0.0], [o + 2.0, 2.0, 0.0]]
            })
            .collect();
        let d = to_directional(&clip(&[-1, 0, 1], frames.clone())).unwrap();
        for (f, joints) in frames.iter().enumerate() {
            for b in 0..2 {
                let (c, p) = (joints[b + 1], joints[b]);
                let diff = [c[0] - p[0], c[1] - p[1], c[2] - p[2]];
                let len = (diff[0].powi(2) + diff[1].powi(2) + diff[2].powi(2)).sqrt();
                let v = d.vector(f, b);
                for k in 0..3 {
                    assert!((v[k] - diff[k] / len).abs() < 1e-15);
                }
                assert!((v[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn bone_order_follows_child_index() {
        // Root is joint 2; bones are children 0, 1, 3 in that order.
        let sk = Skeleton::from_parents(&[2, 0, -1, 2]).unwrap();
        assert_eq!(sk.bones(), &[(0, 2), (1, 0), (3, 2)]);
        assert_eq!(sk.root(), 2);
        let order = sk.topological_order();
        assert_eq!(order[0], 2);
        let pos = |j| order.iter().position(|&x| x == j).unwrap();
        assert!(pos(0) < pos(1));
    }

    #[test]
    fn coincident_joints_are_rejected() {
        let c = clip(
            &[-1, 0],
            vec![vec![[0.0; 3], [1.0, 0.0, 0.0]], vec![[0.5; 3], [0.5; 3]]],
        );
        match to_directional(&c) {
            Err(Error::DegenerateBone { frame: 1, bone: 0 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn topology_errors() {
        assert!(matches!(Skeleton::from_parents(&[1, 0]), Err(Error::Topology(_))));
        assert!(matches!(
            Skeleton::from_parents(&[-1, 2, 1]),
            Err(Error::Topology(_))
        ));
        assert!(matches!(
            Skeleton::from_parents(&[-1, -1]),
            Err(Error::Topology(_))
        ));
        assert!(matches!(Skeleton::from_parents(&[-1]), Err(Error::Topology(_))));
        assert!(matches!(
            Skeleton::from_parents(&[-1, 5]),
            Err(Error::Topology(_))
        ));
        assert!(matches!(
            Skeleton::from_parents(&[-1, 1]),
            Err(Error::Topology(_))
        ));
        assert_eq!(Skeleton::humanoid17().bone_count(), 16);
    }

    fn frames_clip(f: usize) -> MotionClip {
        let frames = (0..f)
            .map(|i| vec![[i as f64, 0.0, 0.0], [i as f64, 1.0, 0.0]])
            .collect();
        clip(&[-1, 0], frames)
    }

    #[test]
    fn window_counts() {
        let c = frames_clip(64);
        assert_eq!(window(&c, 64, 1).unwrap().len(), 1);
        let w = window(&c, 18, 18).unwrap();
        assert_eq!(w.len(), 3);
        for (i, start) in [0usize, 18, 36].iter().enumerate() {
            assert_eq!(w[i].frames(), 18);
            assert_eq!(w[i].position(0, 0)[0], *start as f64);
        }
        assert!(matches!(
            window(&frames_clip(10), 18, 18),
            Err(Error::TooShort {
                frames: 10,
                length: 18
            })
        ));
        assert!(window(&c, 0, 1).is_err());
        assert!(window(&c, 4, 0).is_err());
    }

    #[test]
    fn windows_with_stride_length_partition_the_prefix() {
        for f in 1..40 {
            for l in 1..=f {
                let c = frames_clip(f);
                let w = window(&c, l, l).unwrap();
                assert_eq!(w.len(), f / l);
                let starts: Vec<f64> = w
                    .iter()
                    .flat_map(|c| (0..c.frames()).map(|i| c.position(i, 0)[0]).collect::<Vec<_>>())
                    .collect();
                let expected: Vec<f64> = (0..(f / l) * l).map(|i| i as f64).collect();
                assert_eq!(starts, expected);
            }
        }
    }

    #[test]
    fn clip_validation() {
        let sk = Arc::new(Skeleton::chain(2).unwrap());
        assert!(MotionClip::new(Arc::clone(&sk), vec![[0.0; 3]; 3], 30.0).is_err());
        assert!(MotionClip::new(Arc::clone(&sk), vec![], 30.0).is_err());
        assert!(MotionClip::new(Arc::clone(&sk), vec![[0.0; 3]; 2], 0.0).is_err());
        assert!(MotionClip::new(sk, vec![[f64::NAN, 0.0, 0.0], [0.0; 3]], 30.0).is_err());
    }
}
