//! Seeded, desk-scale experiments that emit plot-ready CSV tables.
//!
//! Every experiment is a pure function of its configuration and seed. Trial
//! `t` of a run with seed `s` draws from its own stream seeded with `s + t`,
//! and rows are emitted in trial order, so re-running a configuration
//! reproduces every CSV byte for byte. The manifest additionally records the
//! wall time and is therefore the only output allowed to differ.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};

pub mod extrapolation;
pub mod invariance;
pub mod l2;
pub mod lipschitz_depth;
pub mod mod3;
pub mod stats;

pub use extrapolation::ExtrapolationConfig;
pub use invariance::InvarianceConfig;
pub use l2::L2Config;
pub use lipschitz_depth::LipschitzDepthConfig;
pub use mod3::Mod3Config;

/// Names accepted by [`run`].
pub const EXPERIMENTS: [&str; 5] = [
    "extrapolation",
    "mod3",
    "lipschitz-depth",
    "l2",
    "invariance",
];

/// Formats a float with the shortest representation that round-trips.
pub(crate) fn num(v: f64) -> String {
    format!("{v}")
}

/// One CSV file: a `#` schema line, a header row and data rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub schema: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, schema: &str, header: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            schema: schema.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Values of a numeric column; unparsable cells become NaN.
    pub fn numbers(&self, name: &str) -> Vec<f64> {
        match self.column(name) {
            Some(c) => self
                .rows
                .iter()
                .map(|r| r[c].parse().unwrap_or(f64::NAN))
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        let mut out = format!("# {}\n", self.schema);
        out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
        Ok(out)
    }
}

/// A pass/fail claim evaluated on the experiment's own output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: &'static str,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.to_string(),
            value,
            relation: "<=",
            threshold,
            passed: value <= threshold,
        }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.to_string(),
            value,
            relation: ">=",
            threshold,
            passed: value >= threshold,
        }
    }

    pub fn below(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.to_string(),
            value,
            relation: "<",
            threshold,
            passed: value < threshold,
        }
    }

    pub fn above(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.to_string(),
            value,
            relation: ">",
            threshold,
            passed: value > threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub experiment: String,
    pub seed: u64,
    /// Effective configuration, defaults included.
    pub config: Vec<(String, String)>,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub wall_time_secs: f64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: &'a str,
    seed: u64,
    version: &'static str,
    config: std::collections::BTreeMap<&'a str, &'a str>,
    files: Vec<String>,
    checks: &'a [Check],
    wall_time_secs: f64,
}

impl ExperimentReport {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn checks_table(&self) -> Table {
        let mut t = Table::new(
            "checks",
            "check: name of the claim; value: measured; relation/threshold: the claim; passed: 0 or 1",
            &["check", "value", "relation", "threshold", "passed"],
        );
        for c in &self.checks {
            t.push(vec![
                c.name.clone(),
                num(c.value),
                c.relation.to_string(),
                num(c.threshold),
                u8::from(c.passed).to_string(),
            ]);
        }
        t
    }

    /// Writes every table, `checks.csv` and `manifest.json` into `dir`
    /// (created if missing) and returns the written paths.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut files = Vec::new();
        for t in self
            .tables
            .iter()
            .chain(std::iter::once(&self.checks_table()))
        {
            let path = dir.join(t.file_name());
            fs::write(&path, t.to_csv()?)?;
            files.push(t.file_name());
            written.push(path);
        }
        let manifest = Manifest {
            experiment: &self.experiment,
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION"),
            config: self
                .config
                .iter()
                .map(|(k, v)| (k.as_str(), v.as_str()))
                .collect(),
            files,
            checks: &self.checks,
            wall_time_secs: self.wall_time_secs,
        };
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text)?;
        written.push(path);
        Ok(written)
    }
}

/// Reads `namespace.key` into `slot` when present and records the
/// effective value.
pub(crate) struct Keys<'a> {
    cfg: &'a Config,
    namespace: &'static str,
    known: Vec<&'static str>,
    echo: Vec<(String, String)>,
}

impl<'a> Keys<'a> {
    pub(crate) fn new(cfg: &'a Config, namespace: &'static str) -> Self {
        Keys {
            cfg,
            namespace,
            known: Vec::new(),
            echo: Vec::new(),
        }
    }

    fn key(&mut self, key: &'static str) -> String {
        self.known.push(key);
        format!("{}.{key}", self.namespace)
    }

    pub(crate) fn scalar<T>(&mut self, key: &'static str, slot: &mut T) -> Result<()>
    where
        T: std::str::FromStr + Display,
        T::Err: Display,
    {
        let full = self.key(key);
        if let Some(v) = self.cfg.get::<T>(&full)? {
            *slot = v;
        }
        self.echo.push((full, slot.to_string()));
        Ok(())
    }

    pub(crate) fn list<T>(&mut self, key: &'static str, slot: &mut Vec<T>) -> Result<()>
    where
        T: std::str::FromStr + Display,
        T::Err: Display,
    {
        let full = self.key(key);
        if let Some(v) = self.cfg.get_list::<T>(&full)? {
            *slot = v;
        }
        let shown: Vec<String> = slot.iter().map(T::to_string).collect();
        self.echo.push((full, shown.join(",")));
        Ok(())
    }

    /// Rejects unknown keys in the namespace and returns the echo.
    pub(crate) fn finish(self) -> Result<Vec<(String, String)>> {
        self.cfg.check_namespace(self.namespace, &self.known)?;
        Ok(self.echo)
    }
}

pub(crate) fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::invalid(msg()))
    }
}

/// Seed of trial `t`.
pub(crate) fn trial_seed(seed: u64, t: usize) -> u64 {
    seed.wrapping_add(t as u64)
}

pub(crate) fn finish(
    experiment: &str,
    seed: u64,
    config: Vec<(String, String)>,
    tables: Vec<Table>,
    checks: Vec<Check>,
    started: Instant,
) -> ExperimentReport {
    ExperimentReport {
        experiment: experiment.to_string(),
        seed,
        config,
        tables,
        checks,
        wall_time_secs: started.elapsed().as_secs_f64(),
    }
}

/// Runs the named experiment with keys from `cfg` (missing keys take their
/// defaults).
pub fn run(name: &str, cfg: &Config, seed: u64) -> Result<ExperimentReport> {
    match name {
        "extrapolation" => extrapolation::run(&ExtrapolationConfig::from_config(cfg)?, seed),
        "mod3" => mod3::run(&Mod3Config::from_config(cfg)?, seed),
        "lipschitz-depth" => lipschitz_depth::run(&LipschitzDepthConfig::from_config(cfg)?, seed),
        "l2" => l2::run(&L2Config::from_config(cfg)?, seed),
        "invariance" => invariance::run(&InvarianceConfig::from_config(cfg)?, seed),
        other => Err(Error::invalid(format!(
            "unknown experiment `{other}` (expected one of {})",
            EXPERIMENTS.join(", ")
        ))),
    }
}

/// The center/corner task: `f(0,0) = center`, `f(+-4,+-4) = corner`.
pub(crate) fn center_corner_task(center: f64, corner: f64) -> crate::training::Dataset<Vec<f64>> {
    let mut pairs = vec![(vec![0.0, 0.0], vec![center])];
    for (x, y) in [(4.0, 4.0), (4.0, -4.0), (-4.0, 4.0), (-4.0, -4.0)] {
        pairs.push((vec![x, y], vec![corner]));
    }
    crate::training::Dataset::regression(pairs).expect("fixed task is well formed")
}

pub(crate) fn layer_dims(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    std::iter::once(input)
        .chain(hidden.iter().copied())
        .chain(std::iter::once(output))
        .collect()
}
