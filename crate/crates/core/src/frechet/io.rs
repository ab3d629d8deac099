//! STATS1 text format.
//!
//! ```text
//! # estimator unbiased          (optional)
//! STATS1 <d> <n>
//! <mean: d reals>
//! <covariance row>  × d lines
//! ```

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use super::GaussianStats;
use crate::textfmt::{parse_row, parse_usize, push_reals, Lines};
use crate::{Error, Result};

const MAGIC: &str = "STATS1";

pub fn write_stats1(stats: &GaussianStats) -> String {
    let d = stats.dim();
    let mut out = format!(
        "# estimator {}\n{MAGIC} {d} {}\n",
        stats.estimator().as_str(),
        stats.sample_count()
    );
    push_reals(&mut out, stats.mean().as_slice());
    let sigma = stats.covariance();
    let mut row = vec![0.0; d];
    for i in 0..d {
        for (j, v) in row.iter_mut().enumerate() {
            *v = sigma[(i, j)];
        }
        push_reals(&mut out, &row);
    }
    out
}

pub fn read_stats1(text: &str) -> Result<GaussianStats> {
    let mut lines = Lines::new(text);
    let mut comments = Vec::new();
    let (ln, header) = lines.header(&mut comments)?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.first() != Some(&MAGIC) || fields.len() != 3 {
        return Err(Error::parse(ln, "header must be `STATS1 <d> <n>`"));
    }
    let d = parse_usize(fields[1], ln, "dimension")?;
    let n = parse_usize(fields[2], ln, "sample count")?;
    if d == 0 {
        return Err(Error::parse(ln, "dimension must be ≥ 1"));
    }
    let estimator = comments
        .iter()
        .find_map(|c| c.strip_prefix("estimator "))
        .map(|e| e.trim().parse())
        .transpose()?
        .unwrap_or_default();

    let (ln, mean_line) = lines.expect_line("mean vector")?;
    let mu = parse_row(mean_line, ln, Some(d))?;
    let mut data = Vec::with_capacity(d * d);
    for _ in 0..d {
        let (ln, row) = lines.expect_line("covariance row")?;
        data.extend(parse_row(row, ln, Some(d))?);
    }
    lines.finish()?;
    GaussianStats::new(mu, DMatrix::from_row_slice(d, d, &data), n, estimator)
}

pub fn load_stats(path: impl AsRef<Path>) -> Result<GaussianStats> {
    read_stats1(&fs::read_to_string(path)?)
}

pub fn save_stats(stats: &GaussianStats, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_stats1(stats))?;
    Ok(())
}
