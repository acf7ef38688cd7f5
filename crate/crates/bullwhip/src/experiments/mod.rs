//! Experiment harness: configuration, tolerance knobs, machine-readable
//! validation reports, and the proposition validators plus table and figure
//! reproductions built on top of the simulator and the analytical forms.

mod pipeline;
mod props;
mod reproduce;
mod trends;

pub use pipeline::{run_plain_cell, run_structure_cell, LayerCurves};
pub use props::{validate_prop1, validate_prop2, validate_prop3};
pub use reproduce::{
    reproduce_fig2, reproduce_fig3, reproduce_fig4, reproduce_fig5, reproduce_table1,
};
pub use trends::{eta_mc_curve, validate_prop4, validate_prop5, TrendForm};

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::demand::{DemandModel, Seasonal};
use crate::error::{Error, Result};
use crate::topology::{StructureKind, StructureSpec};

/// Tolerance knobs used by the validators. Every field can be overridden
/// from the CLI; defaults follow the replication and precision scales the
/// checks were calibrated at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Layer-curve RMSE gate for noisy demand patterns.
    pub rmse_noisy: f64,
    /// Layer-curve RMSE gate for noise-free demand patterns.
    pub rmse_deterministic: f64,
    /// Relative spread of mean layer curves across structures.
    pub structure_spread: f64,
    /// Relative gap between mean empirical curves and the serial analytical
    /// curve.
    pub serial_agreement: f64,
    /// Relative gap between the deep-layer BWE and the peak amplification.
    pub limit_gap: f64,
    /// Per-layer gap between noise-free empirical and analytical BWE.
    pub noise_free_layer_gap: f64,
    /// Node-to-node agreement between the Markov and spectral routes.
    pub markov_equivalence: f64,
    /// Residual bound for the absorbing-chain linear solve.
    pub residual: f64,
    /// Superposition defect bound for the linear dynamics.
    pub superposition: f64,
    /// Relative variance defect for pure-trend pass-through.
    pub trend_passthrough: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rmse_noisy: 1e-5,
            rmse_deterministic: 1e-9,
            structure_spread: 0.02,
            serial_agreement: 0.02,
            limit_gap: 0.01,
            noise_free_layer_gap: 1e-6,
            markov_equivalence: 1e-8,
            residual: 1e-10,
            superposition: 1e-12,
            trend_passthrough: 1e-9,
        }
    }
}

impl Tolerances {
    /// Applies name -> value overrides; unknown names are configuration
    /// errors so typos fail loudly.
    pub fn apply_overrides(&mut self, overrides: &BTreeMap<String, f64>) -> Result<()> {
        for (name, &value) in overrides {
            if value <= 0.0 || value.is_nan() {
                return Err(Error::Config(format!(
                    "tolerance {name} must be positive, got {value}"
                )));
            }
            match name.as_str() {
                "rmse_noisy" => self.rmse_noisy = value,
                "rmse_deterministic" => self.rmse_deterministic = value,
                "structure_spread" => self.structure_spread = value,
                "serial_agreement" => self.serial_agreement = value,
                "limit_gap" => self.limit_gap = value,
                "noise_free_layer_gap" => self.noise_free_layer_gap = value,
                "markov_equivalence" => self.markov_equivalence = value,
                "residual" => self.residual = value,
                "superposition" => self.superposition = value,
                "trend_passthrough" => self.trend_passthrough = value,
                _ => {
                    return Err(Error::Config(format!("unknown tolerance {name}")));
                }
            }
        }
        Ok(())
    }
}

/// One experiment's inputs. The validators pin whatever the experiment
/// design fixes (policies, demand shapes) and read everything else, chiefly
/// horizon, warm-up, replications, seed, and tolerances, from here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub structure: StructureSpec,
    pub demand: DemandModel,
    pub lead_time: u32,
    pub window: u32,
    pub horizon: usize,
    pub warmup: usize,
    pub replications: usize,
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            structure: StructureSpec::new(
                StructureKind::Paral,
                table1_widths(StructureKind::Paral),
                0.25,
                42,
            ),
            demand: table1_pattern(1, 1000, 42),
            lead_time: 4,
            window: 19,
            horizon: 1000,
            warmup: 400,
            replications: 50,
            seed: 42,
            out_dir: None,
            tolerances: Tolerances::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.warmup >= self.horizon {
            return Err(Error::Config(format!(
                "warmup {} must be below the horizon {}",
                self.warmup, self.horizon
            )));
        }
        self.structure.validate()?;
        self.demand.validate()
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Demand patterns from the four-row validation table. Patterns 3 and 4
/// keep their printed seasonal frequencies (4, 2, and 0.5 cycles per
/// period), all of which vanish at integer sampling; see ALIASING_NOTE.
pub fn table1_pattern(no: usize, horizon: usize, seed: u64) -> DemandModel {
    let seasonal = |pairs: &[(f64, f64)]| {
        pairs
            .iter()
            .map(|&(amplitude, frequency)| Seasonal {
                amplitude,
                frequency,
            })
            .collect::<Vec<_>>()
    };
    match no {
        1 => DemandModel::parametric(100.0, 0.0, vec![], 20.0, horizon, seed),
        2 => DemandModel::parametric(
            100.0,
            0.0,
            seasonal(&[(10.0, 0.1), (30.0, 0.05)]),
            20.0,
            horizon,
            seed,
        ),
        3 => DemandModel::parametric(
            100.0,
            0.2,
            seasonal(&[(10.0, 4.0), (20.0, 0.5)]),
            20.0,
            horizon,
            seed,
        ),
        4 => DemandModel::parametric(
            100.0,
            0.4,
            seasonal(&[(10.0, 4.0), (10.0, 2.0)]),
            20.0,
            horizon,
            seed,
        ),
        _ => panic!("table patterns are numbered 1 to 4, got {no}"),
    }
}

/// Nine-layer width profiles for the four benchmark structures (and the
/// serial reference), listed market side first.
pub fn table1_widths(kind: StructureKind) -> Vec<usize> {
    match kind {
        StructureKind::Paral => vec![4; 9],
        StructureKind::Div => (1..=9).rev().collect(),
        StructureKind::Conv => (1..=9).collect(),
        StructureKind::Div2Conv => vec![1, 2, 3, 4, 5, 4, 3, 2, 1],
        StructureKind::Serial | StructureKind::Custom => vec![1; 9],
    }
}

/// Benchmark structure kinds in table row order.
pub const TABLE1_KINDS: [StructureKind; 4] = [
    StructureKind::Paral,
    StructureKind::Conv,
    StructureKind::Div,
    StructureKind::Div2Conv,
];

pub const ALIASING_NOTE: &str = "demand patterns 3 and 4 print seasonal frequencies 4, 2, and \
     0.5 cycles per period; sampled at integer periods these equal their v mod 1 bins and every \
     sine term is identically zero, so the effective patterns are trend plus noise";

pub const NYQUIST_NOTE: &str = "empirical layer variances in the periodic pipeline exclude the \
     Nyquist bin, matching the analytical sums over interior frequency bins";

pub const RMSE_DIGITS_NOTE: &str = "RMSE digits at the 1e-7 scale depend on the exact noise \
     realizations behind them and are not reproducible from seeds alone; the deterministic and \
     periodic-noise gates substitute magnitude-scale checks";

/// One pass/fail line of a validation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

impl CheckResult {
    /// Check that a measured magnitude stays at or below a threshold.
    pub fn le(name: &str, measured: f64, threshold: f64, detail: String) -> Self {
        CheckResult {
            name: name.into(),
            passed: measured.is_finite() && measured <= threshold,
            measured,
            threshold,
            detail,
        }
    }

    /// Check with an externally decided outcome (orderings, sign gates).
    /// `measured` is the signed margin of the claim — positive exactly when
    /// the claim holds — and the threshold slot is unused.
    pub fn flag(name: &str, passed: bool, measured: f64, detail: String) -> Self {
        CheckResult {
            name: name.into(),
            passed,
            measured,
            threshold: 0.0,
            detail,
        }
    }
}

/// Tidy export table: a header plus stringified rows, written as CSV or
/// embedded in the JSON report.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|&c| c.into()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Values of one column parsed as numbers; non-numeric cells are
    /// skipped. Used by the chart emitters.
    pub fn numeric_column(&self, name: &str) -> Vec<f64> {
        let Some(idx) = self.columns.iter().position(|c| c == name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .filter_map(|row| row.get(idx).and_then(|cell| cell.parse().ok()))
            .collect()
    }
}

/// Machine-readable validator output: named checks with measured values,
/// plus the tidy tables behind them and any caveats worth surfacing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub experiment: String,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    #[serde(default)]
    pub tables: BTreeMap<String, Table>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn new(experiment: &str, seed: u64) -> Self {
        ValidationReport {
            experiment: experiment.into(),
            seed,
            checks: Vec::new(),
            tables: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Writes every table as `<experiment>_<table>.csv` under `dir`.
    pub fn write_tables_csv(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (name, table) in &self.tables {
            let path = dir.join(format!("{}_{}.csv", self.experiment, name));
            table.write_csv(fs::File::create(&path)?)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Formats a float for table cells: full round-trip precision without
/// trailing noise on short values.
pub(crate) fn cell(x: f64) -> String {
    format!("{x}")
}
