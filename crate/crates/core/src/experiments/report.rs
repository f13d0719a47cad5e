use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::loops::Measure;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Shared experiment settings. `None` selects each experiment's default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: Option<String>,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    #[serde(rename = "P")]
    pub p: Option<usize>,
    pub n: Option<usize>,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub seed: u64,
    pub measure: Measure,
    pub trials: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: None,
            m: None,
            p: None,
            n: None,
            big_n: 16,
            seed: 0,
            measure: Measure::Normalized,
            trials: None,
        }
    }
}

/// Parameters recorded with a report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<usize>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none", default)]
    pub m: Option<usize>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none", default)]
    pub big_n: Option<usize>,
    #[serde(rename = "P", skip_serializing_if = "Option::is_none", default)]
    pub p: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trials: Option<usize>,
    pub seed: u64,
    pub measure: Measure,
}

/// Rows of numbers written as one CSV file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub params: Params,
    pub scalars: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
    /// Values reported for comparison only; they never decide pass/fail.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub informational: BTreeMap<String, f64>,
    /// `[lhs, rhs, abs_err]` per trial, for the identity experiments.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_trial: Vec<[f64; 3]>,
    pub runtime_s: f64,
    pub version: String,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl ExperimentReport {
    pub fn new(name: impl Into<String>, params: Params) -> Self {
        Self {
            name: name.into(),
            params,
            scalars: BTreeMap::new(),
            flags: BTreeMap::new(),
            informational: BTreeMap::new(),
            per_trial: Vec::new(),
            runtime_s: 0.0,
            version: VERSION.to_string(),
            tables: Vec::new(),
        }
    }

    pub fn scalar(&mut self, key: impl Into<String>, value: f64) {
        self.scalars.insert(key.into(), value);
    }

    pub fn flag(&mut self, key: impl Into<String>, value: bool) {
        self.flags.insert(key.into(), value);
    }

    pub fn passed(&self) -> bool {
        self.flags.values().all(|&f| f)
    }

    /// Equality of everything except the runtime, with scalars compared bit
    /// for bit.
    pub fn same_results(&self, other: &Self) -> bool {
        let bits = |m: &BTreeMap<String, f64>| -> Vec<(String, u64)> {
            m.iter().map(|(k, v)| (k.clone(), v.to_bits())).collect()
        };
        let table_bits = |t: &[Table]| -> Vec<(String, Vec<String>, Vec<Vec<u64>>)> {
            t.iter()
                .map(|t| {
                    let rows = t
                        .rows
                        .iter()
                        .map(|r| r.iter().map(|x| x.to_bits()).collect())
                        .collect();
                    (t.name.clone(), t.columns.clone(), rows)
                })
                .collect()
        };
        self.name == other.name
            && self.params == other.params
            && bits(&self.scalars) == bits(&other.scalars)
            && bits(&self.informational) == bits(&other.informational)
            && self.flags == other.flags
            && self.version == other.version
            && table_bits(&self.tables) == table_bits(&other.tables)
            && self
                .per_trial
                .iter()
                .flatten()
                .map(|x| x.to_bits())
                .eq(other.per_trial.iter().flatten().map(|x| x.to_bits()))
    }

    /// Write every table as `<dir>/<report>-<table>.csv`.
    pub fn write_tables(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for t in &self.tables {
            let path = dir.join(format!("{}-{}.csv", self.name, t.name));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(&t.columns)?;
            for row in &t.rows {
                w.write_record(row.iter().map(|&x| format_cell(x)))?;
            }
            w.flush()?;
            written.push(path);
        }
        Ok(written)
    }
}

fn format_cell(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:e}")
    }
}

/// A full run: reports in a fixed order, plus the first error if the run
/// stopped early.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Suite {
    pub version: String,
    pub config: ExperimentConfig,
    pub reports: Vec<ExperimentReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Suite {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        Self {
            version: VERSION.to_string(),
            config: cfg.clone(),
            reports: Vec::new(),
            error: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && self.reports.iter().all(ExperimentReport::passed)
    }

    pub fn same_results(&self, other: &Self) -> bool {
        self.config == other.config
            && self.error == other.error
            && self.reports.len() == other.reports.len()
            && self
                .reports
                .iter()
                .zip(&other.reports)
                .all(|(a, b)| a.same_results(b))
    }
}

/// Independent stream per experiment name under one seed.
pub fn experiment_rng(seed: u64, name: &str) -> ChaCha8Rng {
    // FNV-1a keeps the stream id stable across toolchains.
    let stream = name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
