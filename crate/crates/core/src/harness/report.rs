//! Sweep results and their CSV / JSON / SVG renderings.
//!
//! CSV layout:
//!
//! ```text
//! # FMDREPORT1 config_hash=<hex> version=<semver> estimator=<unbiased|ml>
//! kind,length,zeta,mean_fmd,std_fmd,reps
//! gaussian,18,5e-3,1.2345e-2,3.1e-4,20
//! ```

use std::fmt::Write;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::frechet::CovarianceEstimator;
use crate::perturb::NoiseKind;
use crate::textfmt::{fmt_real, parse_real, parse_usize};
use crate::{Error, Result};

const MAGIC: &str = "FMDREPORT1";
const HEADER: &str = "kind,length,zeta,mean_fmd,std_fmd,reps";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCell {
    pub kind: NoiseKind,
    pub length: usize,
    pub zeta: f64,
    pub mean_fmd: f64,
    pub std_fmd: f64,
    pub reps: usize,
}

impl ReportCell {
    /// `std / √reps`
    pub fn standard_error(&self) -> f64 {
        self.std_fmd / (self.reps as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    config_hash: String,
    version: String,
    estimator: CovarianceEstimator,
    cells: Vec<ReportCell>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Svg,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "svg" => Ok(ReportFormat::Svg),
            other => Err(Error::InvalidParameter(format!(
                "unknown report format `{other}` (expected csv, json or svg)"
            ))),
        }
    }
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Svg => "svg",
        }
    }
}

#[derive(Serialize)]
struct JsonReport<'a> {
    #[serde(flatten)]
    report: &'a ExperimentReport,
    /// Per length: temporal / gaussian mean FMD at each grid's largest ζ.
    temporal_to_gaussian_ratio: Vec<(usize, Option<f64>)>,
}

impl ExperimentReport {
    pub fn new(
        cells: Vec<ReportCell>,
        config_hash: String,
        version: String,
        estimator: CovarianceEstimator,
    ) -> Self {
        ExperimentReport {
            config_hash,
            version,
            estimator,
            cells,
        }
    }

    pub fn cells(&self) -> &[ReportCell] {
        &self.cells
    }

    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn estimator(&self) -> CovarianceEstimator {
        self.estimator
    }

    /// Distinct lengths in first-appearance order.
    pub fn lengths(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for c in &self.cells {
            if !out.contains(&c.length) {
                out.push(c.length);
            }
        }
        out
    }

    /// Distinct kinds in canonical order.
    pub fn kinds(&self) -> Vec<NoiseKind> {
        NoiseKind::ALL
            .into_iter()
            .filter(|k| self.cells.iter().any(|c| c.kind == *k))
            .collect()
    }

    /// Cells of one (kind, length) series, in ascending ζ.
    pub fn series(&self, kind: NoiseKind, length: usize) -> Vec<&ReportCell> {
        let mut s: Vec<&ReportCell> = self
            .cells
            .iter()
            .filter(|c| c.kind == kind && c.length == length)
            .collect();
        s.sort_by(|a, b| a.zeta.total_cmp(&b.zeta));
        s
    }

    pub fn cell(&self, kind: NoiseKind, length: usize, zeta: f64) -> Option<&ReportCell> {
        self.cells
            .iter()
            .find(|c| c.kind == kind && c.length == length && c.zeta == zeta)
    }

    /// Mean temporal FMD at its largest ζ over mean gaussian FMD at its
    /// largest ζ, for one length.
    pub fn temporal_to_gaussian_ratio(&self, length: usize) -> Option<f64> {
        let t = self.series(NoiseKind::Temporal, length).last().copied()?;
        let g = self.series(NoiseKind::Gaussian, length).last().copied()?;
        (g.mean_fmd > 0.0).then(|| t.mean_fmd / g.mean_fmd)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# {MAGIC} config_hash={} version={} estimator={}\n{HEADER}\n",
            self.config_hash,
            self.version,
            self.estimator.as_str()
        );
        for c in &self.cells {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                c.kind,
                c.length,
                fmt_real(c.zeta),
                fmt_real(c.mean_fmd),
                fmt_real(c.std_fmd),
                c.reps
            )
            .expect("writing to a String cannot fail");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, first) = lines.next().ok_or_else(|| Error::parse(1, "empty report"))?;
        let meta = first
            .strip_prefix('#')
            .map(str::trim)
            .and_then(|m| m.strip_prefix(MAGIC))
            .ok_or_else(|| Error::parse(1, format!("expected `# {MAGIC} …` provenance line")))?;
        let mut config_hash = String::new();
        let mut version = String::new();
        let mut estimator = CovarianceEstimator::default();
        for kv in meta.split_whitespace() {
            match kv.split_once('=') {
                Some(("config_hash", v)) => config_hash = v.to_string(),
                Some(("version", v)) => version = v.to_string(),
                Some(("estimator", v)) => estimator = v.parse()?,
                _ => return Err(Error::parse(1, format!("unknown provenance field `{kv}`"))),
            }
        }
        match lines.next() {
            Some((_, h)) if h.trim() == HEADER => {}
            _ => return Err(Error::parse(2, format!("expected header `{HEADER}`"))),
        }
        let mut cells = Vec::new();
        for (i, line) in lines {
            let ln = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 6 {
                return Err(Error::parse(ln, format!("expected 6 columns, found {}", f.len())));
            }
            cells.push(ReportCell {
                kind: f[0].parse().map_err(|e: Error| Error::parse(ln, e.to_string()))?,
                length: parse_usize(f[1], ln, "length")?,
                zeta: parse_real(f[2], ln)?,
                mean_fmd: parse_real(f[3], ln)?,
                std_fmd: parse_real(f[4], ln)?,
                reps: parse_usize(f[5], ln, "repetition count")?,
            });
        }
        Ok(ExperimentReport::new(cells, config_hash, version, estimator))
    }

    pub fn to_json(&self) -> String {
        let ratios = self
            .lengths()
            .into_iter()
            .map(|l| (l, self.temporal_to_gaussian_ratio(l)))
            .collect();
        serde_json::to_string_pretty(&JsonReport {
            report: self,
            temporal_to_gaussian_ratio: ratios,
        })
        .expect("report serializes")
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Json => self.to_json(),
            ReportFormat::Svg => super::svg::render_svg(self),
        }
    }
}

pub fn emit_report(report: &ExperimentReport, format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    if report.cells.is_empty() {
        return Err(Error::InvalidParameter("refusing to emit an empty report".into()));
    }
    fs::write(path, report.render(format))?;
    Ok(())
}
