//! Experiment harness.
//!
//! An experiment is named by an id from [`EXPERIMENTS`]. [`execute`] runs it
//! in memory; [`run`] also writes `manifest.json`, `data.csv` and
//! `report.json` under `<out_root>/<id>/<tag>/`. Ensembles are evaluated on a
//! rayon pool sized by `HSLE_THREADS`; results are collected in replica order
//! so the output does not depend on the thread count.

pub mod experiments;
pub mod stats;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
pub use stats::{Check, Rule};

/// Environment variable holding the worker count.
pub const THREADS_VAR: &str = "HSLE_THREADS";

/// Default tolerance profile.
pub const DEFAULT_TOLERANCES: &str = include_str!("../../tolerances.json");

/// Registered experiments: id and one-line description.
pub const EXPERIMENTS: &[(&str, &str)] = &[
    ("hypergeom-identities", "₂F₁ ODE residual and the Gauss value at z = 1"),
    ("loewner-analytics", "vertical slit and zipper round trip under refinement"),
    ("martingale-flatness", "E[M at the guard time] against M₀ under SLE_κ"),
    ("pair-normalization", "E[J_∞^b] under SLE_κ against M₀/F(1)"),
    ("hsle-avoidance", "probability that hSLE reaches [x, y]"),
    ("degenerations", "hSLE limits ρ = −2, κ = 4 and y → ∞"),
    ("reversibility", "hSLE against its Möbius-reversed image"),
    ("lattice-exactness", "samplers against exact enumeration"),
    ("ising-sle3", "critical Ising Dobrushin interface against SLE₃"),
    ("fk-sle163", "critical FK-Ising exploration against SLE₁₆/₃"),
    ("conditioned-law", "weighted SLE₁₆/₃ against SLE₁₆/₃(4/3)"),
    ("pair-chain", "Gibbs pair chain against direct conditioned sampling"),
    ("bc-monotonicity", "⊕ crossing probability under free and ⊕ boundary"),
    ("zero-capacity", "capacity of the trace of W ≡ 0"),
    ("sle-variance", "variance slope of the SLE_κ driving function"),
];

/// Tolerances keyed by experiment id, then by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances(pub BTreeMap<String, BTreeMap<String, f64>>);

impl Tolerances {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn get(&self, id: &str, name: &str) -> Result<f64> {
        self.0
            .get(id)
            .and_then(|m| m.get(name))
            .copied()
            .ok_or_else(|| Error::Domain(format!("no tolerance {id}.{name}")))
    }

    /// Entries of `other` replace the matching entries of `self`.
    pub fn overlay(mut self, other: &Tolerances) -> Self {
        for (id, m) in &other.0 {
            let slot = self.0.entry(id.clone()).or_default();
            for (k, v) in m {
                slot.insert(k.clone(), *v);
            }
        }
        self
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::from_json(DEFAULT_TOLERANCES).expect("bundled tolerance profile parses")
    }
}

/// What to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub id: String,
    /// Experiment-specific parameters; missing fields take their defaults.
    #[serde(default)]
    pub params: Value,
    /// Overrides the experiment's main ensemble size.
    #[serde(default)]
    pub ensemble: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Where to write the output; nothing is written when absent.
    #[serde(default)]
    pub out_root: Option<PathBuf>,
    /// Output subdirectory name; the UNIX time by default.
    #[serde(default)]
    pub tag: Option<String>,
    /// Partial overrides of the tolerance profile.
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
}

impl ExperimentSpec {
    pub fn new(id: &str) -> Self {
        Self {
            id: id.into(),
            params: Value::Null,
            ensemble: None,
            seed: 0,
            out_root: None,
            tag: None,
            tolerances: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_ensemble(mut self, n: usize) -> Self {
        self.ensemble = Some(n);
        self
    }

    pub fn with_params(mut self, params: Value) -> Self {
        self.params = params;
        self
    }

    fn tolerances(&self) -> Tolerances {
        let base = Tolerances::default();
        match &self.tolerances {
            Some(t) => base.overlay(t),
            None => base,
        }
    }
}

/// Summary of an experiment. The headline numbers are those of the first
/// check; `pass` holds when every check passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub id: String,
    pub estimate: f64,
    pub std_error: Option<f64>,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub pass: bool,
    pub runtime_secs: f64,
    pub ensemble: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl StatReport {
    /// Re-derives every pass flag from the recorded numbers.
    pub fn reevaluate(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(Check::evaluate)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Rows of the experiment's data table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Everything an experiment produces.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub report: StatReport,
    pub data: Table,
    /// Resolved parameters, recorded in the manifest.
    pub params: Value,
}

/// What an experiment body hands back to the harness.
pub(crate) struct Outcome {
    pub checks: Vec<Check>,
    pub data: Table,
    pub params: Value,
    pub ensemble: usize,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub id: String,
    pub tag: String,
    pub seed: u64,
    pub ensemble: usize,
    pub threads: usize,
    pub params: Value,
    pub tolerances: BTreeMap<String, f64>,
    pub version: String,
    pub started_unix: u64,
}

/// Worker count from `HSLE_THREADS`, or rayon's default when unset.
pub fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_VAR) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::Domain(format!("{THREADS_VAR} = {s:?} is not a positive integer"))),
        },
        Err(_) => Ok(rayon::current_num_threads()),
    }
}

pub fn thread_pool() -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))
}

/// Runs the experiment without touching the file system.
pub fn execute(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    if !EXPERIMENTS.iter().any(|(id, _)| *id == spec.id) {
        let known: Vec<&str> = EXPERIMENTS.iter().map(|e| e.0).collect();
        return Err(Error::Domain(format!("unknown experiment {:?}; known: {}", spec.id, known.join(", "))));
    }
    let tol = spec.tolerances();
    let started = Instant::now();
    let pool = thread_pool()?;
    let outcome = pool
        .install(|| experiments::dispatch(spec, &tol))
        .map_err(|e| Error::Experiment { id: spec.id.clone(), source: Box::new(e) })?;
    let first = outcome.checks.first().cloned();
    let report = StatReport {
        id: spec.id.clone(),
        estimate: first.as_ref().map_or(f64::NAN, |c| c.estimate),
        std_error: first.as_ref().and_then(|c| c.std_error),
        statistic: first.as_ref().and_then(|c| c.statistic),
        p_value: first.as_ref().and_then(|c| c.p_value),
        pass: !outcome.checks.is_empty() && outcome.checks.iter().all(|c| c.pass),
        runtime_secs: started.elapsed().as_secs_f64(),
        ensemble: outcome.ensemble,
        seed: spec.seed,
        checks: outcome.checks,
        notes: outcome.notes,
    };
    Ok(ExperimentOutput { report, data: outcome.data, params: outcome.params })
}

/// Runs the experiment and writes its output directory when `out_root` is set.
pub fn run(spec: &ExperimentSpec) -> Result<StatReport> {
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let out = execute(spec)?;
    if let Some(root) = &spec.out_root {
        let tag = spec.tag.clone().unwrap_or_else(|| started_unix.to_string());
        let dir = root.join(&spec.id).join(&tag);
        fs::create_dir_all(&dir)?;
        let manifest = Manifest {
            id: spec.id.clone(),
            tag,
            seed: spec.seed,
            ensemble: out.report.ensemble,
            threads: thread_count()?,
            params: out.params.clone(),
            tolerances: spec.tolerances().0.get(&spec.id).cloned().unwrap_or_default(),
            version: env!("CARGO_PKG_VERSION").into(),
            started_unix,
        };
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        out.data.write_csv(fs::File::create(dir.join("data.csv"))?)?;
        fs::write(dir.join("report.json"), serde_json::to_string_pretty(&out.report)?)?;
    }
    Ok(out.report)
}
