//! MOT1 text format.
//!
//! ```text
//! # optional comment lines
//! MOT1 <J> <F> <fps>
//! <J parent indices, root = -1>
//! <3·J reals: x y z per joint>   × F lines
//! ```
//!
//! Joint names are not part of the format; they travel in a
//! `# joints <name>…` comment when present.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use super::{MotionClip, Skeleton};
use crate::textfmt::{fmt_real, parse_real, parse_row, parse_usize, push_reals, Lines};
use crate::{Error, Result};

const MAGIC: &str = "MOT1";

pub fn write_mot1(clip: &MotionClip) -> String {
    let sk = clip.skeleton();
    let mut out = String::new();
    out.push_str("# joints ");
    out.push_str(&sk.joint_names().join(" "));
    out.push('\n');
    out.push_str(&format!(
        "{MAGIC} {} {} {}\n",
        clip.joints(),
        clip.frames(),
        fmt_real(clip.frame_rate())
    ));
    let parents: Vec<String> = sk.parent_indices().iter().map(|p| p.to_string()).collect();
    out.push_str(&parents.join(" "));
    out.push('\n');
    let mut row = Vec::with_capacity(3 * clip.joints());
    for f in 0..clip.frames() {
        row.clear();
        row.extend(clip.frame(f).iter().flatten());
        push_reals(&mut out, &row);
    }
    out
}

pub fn read_mot1(text: &str) -> Result<MotionClip> {
    let mut lines = Lines::new(text);
    let mut comments = Vec::new();
    let (ln, header) = lines.header(&mut comments)?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.first() != Some(&MAGIC) {
        return Err(Error::parse(ln, format!("expected `{MAGIC}` header")));
    }
    if fields.len() != 4 {
        return Err(Error::parse(ln, "header must be `MOT1 <J> <F> <fps>`"));
    }
    let joints = parse_usize(fields[1], ln, "joint count")?;
    let frames = parse_usize(fields[2], ln, "frame count")?;
    let fps = parse_real(fields[3], ln)?;
    if frames == 0 {
        return Err(Error::parse(ln, "frame count must be ≥ 1"));
    }

    let (ln, parent_line) = lines.expect_line("parent indices")?;
    let parents = parent_line
        .split_whitespace()
        .map(|t| {
            t.parse::<i64>()
                .map_err(|_| Error::parse(ln, format!("parent index `{t}` is not an integer")))
        })
        .collect::<Result<Vec<_>>>()?;
    if parents.len() != joints {
        return Err(Error::parse(
            ln,
            format!("expected {joints} parent indices, found {}", parents.len()),
        ));
    }
    let names = comments
        .iter()
        .find_map(|c| c.strip_prefix("joints "))
        .map(|n| n.split_whitespace().map(str::to_owned).collect::<Vec<_>>())
        .filter(|n| n.len() == joints);
    let skeleton = match names {
        Some(names) => Skeleton::new(names, &parents)?,
        None => Skeleton::from_parents(&parents)?,
    };

    let mut positions = Vec::with_capacity(frames * joints);
    for _ in 0..frames {
        let (ln, row) = lines.expect_line("a frame row")?;
        let values = parse_row(row, ln, Some(3 * joints))?;
        positions.extend(values.chunks_exact(3).map(|c| [c[0], c[1], c[2]]));
    }
    lines.finish()?;
    if !(fps.is_finite() && fps > 0.0) {
        return Err(Error::parse(
            ln,
            format!("frame rate must be positive, got {fps}"),
        ));
    }
    MotionClip::new(Arc::new(skeleton), positions, fps)
}

pub fn load_motion(path: impl AsRef<Path>) -> Result<MotionClip> {
    read_mot1(&fs::read_to_string(path)?)
}

pub fn save_motion(clip: &MotionClip, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_mot1(clip))?;
    Ok(())
}
