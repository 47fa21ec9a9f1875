//! Reports and their JSON and CSV serializations.
//!
//! Files are written to a temporary sibling and renamed into place, so a
//! reader never observes a partially written report. A parameter sweep also
//! produces a plot-data companion `<stem>.plot.csv` with one `(x, y)` row
//! per sweep point and series.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ReportFormat};
use super::lemmas::{LemmaCheckResult, Params};
use crate::adversary::AttackReport;
use crate::error::{QsepError, Result};
use crate::oracle::FamilyManifest;

/// Version of the report layout; bumped on any field change.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub schema: u32,
    pub qsep_core: String,
}

impl Default for Versions {
    fn default() -> Self {
        Versions { schema: SCHEMA_VERSION, qsep_core: env!("CARGO_PKG_VERSION").to_string() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "kebab-case")]
pub enum ResultRecord {
    Lemma(LemmaCheckResult),
    Attack(Box<AttackReport>),
}

impl ResultRecord {
    /// Lemma id, or the attack kind prefixed by `attack-`.
    pub fn id(&self) -> String {
        match self {
            ResultRecord::Lemma(r) => r.lemma_id.clone(),
            ResultRecord::Attack(a) => format!("attack-{}", serde_json::to_value(a.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()),
        }
    }

    /// Lemma checks pass on their own criterion; attacks pass when the
    /// hybrid bound and the composition bound both hold.
    pub fn pass(&self) -> bool {
        match self {
            ResultRecord::Lemma(r) => r.pass,
            ResultRecord::Attack(a) => a.hybrid.holds && a.composition_holds,
        }
    }

    /// `(lhs, bound)`: for attacks the measured Choi distance and the hybrid
    /// bound.
    pub fn lhs_bound(&self) -> (f64, f64) {
        match self {
            ResultRecord::Lemma(r) => (r.lhs, r.bound),
            ResultRecord::Attack(a) => (a.hybrid.measured_distance, a.hybrid.bound),
        }
    }

    pub fn ratio(&self) -> f64 {
        match self {
            ResultRecord::Lemma(r) => r.ratio,
            ResultRecord::Attack(a) => super::lemmas::ratio(a.hybrid.measured_distance, a.hybrid.bound),
        }
    }

    pub fn params(&self) -> Params {
        match self {
            ResultRecord::Lemma(r) => r.params.clone(),
            ResultRecord::Attack(a) => {
                let p = &a.params;
                [
                    ("lambda", p.lambda as f64),
                    ("ell", p.ell as f64),
                    ("queries", p.queries as f64),
                    ("keys", p.keys as f64),
                    ("stretch", p.stretch as f64),
                    ("ancillas", p.ancillas as f64),
                    ("p", p.p as f64),
                    ("d_cutoff", p.d_cutoff as f64),
                    ("advantage", a.advantage),
                ]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect()
            }
        }
    }

    pub fn seed_label(&self) -> String {
        match self {
            ResultRecord::Lemma(r) => r.seed.label(),
            ResultRecord::Attack(a) => a.seed.to_string(),
        }
    }

    pub fn runtime_ms(&self) -> u64 {
        match self {
            ResultRecord::Lemma(r) => r.runtime_ms,
            ResultRecord::Attack(a) => a.wall_time_ms.unwrap_or(0),
        }
    }
}

/// One point of a sweep: `y` is the ratio of a lemma check or the advantage
/// of an attack.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub series: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub results: Vec<ResultRecord>,
    pub versions: Versions,
    pub total_runtime_ms: u64,
    /// Oracle families used by attack runs, enough to rebuild them.
    pub manifests: Vec<FamilyManifest>,
    pub sweep: Option<Vec<SweepPoint>>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(ResultRecord::pass)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// One row per result, parameters flattened into `param_<name>` columns.
    pub fn to_csv(&self) -> Result<String> {
        let keys: BTreeSet<String> = self.results.iter().flat_map(|r| r.params().into_keys()).collect();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["kind".to_string(), "id".to_string()];
        header.extend(keys.iter().map(|k| format!("param_{k}")));
        header.extend(["lhs", "bound", "ratio", "pass", "seed", "runtime_ms"].map(String::from));
        w.write_record(&header)?;
        for r in &self.results {
            let params = r.params();
            let (lhs, bound) = r.lhs_bound();
            let kind = match r {
                ResultRecord::Lemma(_) => "lemma",
                ResultRecord::Attack(_) => "attack",
            };
            let mut row = vec![kind.to_string(), r.id()];
            row.extend(keys.iter().map(|k| params.get(k).map(|v| v.to_string()).unwrap_or_default()));
            row.extend([lhs.to_string(), bound.to_string(), r.ratio().to_string(), r.pass().to_string(), r.seed_label(), r.runtime_ms().to_string()]);
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| QsepError::Serde(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| QsepError::Serde(e.to_string()))
    }

    pub fn plot_csv(&self) -> Option<String> {
        let points = self.sweep.as_ref()?;
        let mut out = String::from("series,x,y\n");
        for p in points {
            out.push_str(&format!("{},{},{}\n", p.series, p.x, p.y));
        }
        Some(out)
    }
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| QsepError::Io(e.error))?;
    Ok(())
}

/// Path of the plot-data companion of a report at `path`.
pub fn plot_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
    path.with_file_name(format!("{stem}.plot.csv"))
}

/// Serializes `r` in `format` to `path`, plus the plot companion for sweeps.
pub fn emit_report(r: &Report, format: ReportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ReportFormat::Json => r.to_json()?,
        ReportFormat::Csv => r.to_csv()?,
    };
    write_atomic(path, &text)?;
    if let Some(plot) = r.plot_csv() {
        write_atomic(&plot_path(path), &plot)?;
    }
    Ok(())
}
