//! Invariance checks for Deep Sets and GNNs with random parameters, plus a
//! Monte Carlo comparison of empirical-risk variance with and without
//! orbit averaging.
//!
//! The variance demo uses the cyclic group `C4` acting on `R^4`. Inputs are
//! standard normal, the target `mean(x_i^2) + noise` is invariant, and `f` is
//! an MLP fitted briefly to a small sample. Its symmetrization `f°` averages
//! `f` over the four shifts. Both are scored on the same `datasets` draws of
//! `samples_per_dataset` points each, and the spread of the empirical risks
//! is compared.

use std::time::Instant;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use super::stats::{bootstrap_variance_le, mean, variance};
use super::{finish, num, require, trial_seed, Check, ExperimentReport, Keys, Table};
use crate::config::Config;
use crate::deepsets::DeepSet;
use crate::error::Result;
use crate::gnn::Gnn;
use crate::graph::{permute_graph, random_graph, random_permutation, LabeledGraph};
use crate::groups::{check_invariance, symmetrize, GroupAction};
use crate::nn::{Activation, Mlp};
use crate::rng;
use crate::training::{train, Dataset, TrainConfig};

/// Tolerance for invariance and per-round equivariance deviations.
pub const INVARIANCE_TOL: f64 = 1e-9;
/// Required bootstrap share of resamples with `Var[R(f°)] <= Var[R(f)]`.
pub const BOOTSTRAP_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceConfig {
    pub deepset_cases: usize,
    pub max_set_size: usize,
    pub gnn_cases: usize,
    pub max_nodes: usize,
    pub max_rounds: usize,
    pub color_dim: usize,
    pub datasets: usize,
    pub samples_per_dataset: usize,
    pub noise: f64,
    pub fit_samples: usize,
    pub fit_epochs: usize,
    pub resamples: usize,
}

impl Default for InvarianceConfig {
    fn default() -> Self {
        InvarianceConfig {
            deepset_cases: 1000,
            max_set_size: 5,
            gnn_cases: 500,
            max_nodes: 8,
            max_rounds: 3,
            color_dim: 3,
            datasets: 1000,
            samples_per_dataset: 32,
            noise: 0.1,
            fit_samples: 64,
            fit_epochs: 300,
            resamples: 1000,
        }
    }
}

impl InvarianceConfig {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let mut c = InvarianceConfig::default();
        c.read(cfg)?;
        Ok(c)
    }

    fn read(&mut self, cfg: &Config) -> Result<Vec<(String, String)>> {
        let mut k = Keys::new(cfg, "invariance");
        k.scalar("deepset_cases", &mut self.deepset_cases)?;
        k.scalar("max_set_size", &mut self.max_set_size)?;
        k.scalar("gnn_cases", &mut self.gnn_cases)?;
        k.scalar("max_nodes", &mut self.max_nodes)?;
        k.scalar("max_rounds", &mut self.max_rounds)?;
        k.scalar("color_dim", &mut self.color_dim)?;
        k.scalar("datasets", &mut self.datasets)?;
        k.scalar("samples_per_dataset", &mut self.samples_per_dataset)?;
        k.scalar("noise", &mut self.noise)?;
        k.scalar("fit_samples", &mut self.fit_samples)?;
        k.scalar("fit_epochs", &mut self.fit_epochs)?;
        k.scalar("resamples", &mut self.resamples)?;
        let echo = k.finish()?;
        self.validate()?;
        Ok(echo)
    }

    fn echo(&self) -> Vec<(String, String)> {
        self.clone()
            .read(&Config::default())
            .expect("validated config")
    }

    pub fn validate(&self) -> Result<()> {
        require((1..=8).contains(&self.max_set_size), || {
            "invariance.max_set_size must be in 1..=8".into()
        })?;
        require(
            self.max_nodes >= 1 && self.max_rounds >= 1 && self.color_dim >= 2,
            || "invariance needs max_nodes >= 1, max_rounds >= 1 and color_dim >= 2".into(),
        )?;
        require(
            self.datasets >= 2 && self.samples_per_dataset >= 1 && self.fit_samples >= 1,
            || "invariance needs at least two datasets and one sample per dataset".into(),
        )?;
        require(self.noise >= 0.0 && self.noise.is_finite(), || {
            "invariance.noise must be finite and non-negative".into()
        })
    }
}

/// Worst deviation of a Deep Set over all reorderings of one random set.
fn deepset_case(cfg: &InvarianceConfig, seed: u64) -> Result<(usize, f64)> {
    let mut r = rng::seeded(seed);
    let size = r.random_range(1..=cfg.max_set_size);
    let ds = DeepSet::init(1, 4, &[6], 1, Activation::Tanh, seed)?;
    let x: Vec<f64> = (0..size).map(|_| r.random_range(-3.0..3.0)).collect();
    let f = |v: &[f64]| ds.eval(&v.iter().map(|&e| vec![e]).collect::<Vec<_>>());
    let report = check_invariance(
        f,
        &GroupAction::full_permutation(size)?,
        &[x],
        INVARIANCE_TOL,
    )?;
    Ok((size, report.max_deviation))
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

/// Output deviation and worst per-round equivariance deviation for a random
/// labeled graph and a random relabeling.
fn gnn_case(cfg: &InvarianceConfig, seed: u64) -> Result<(LabeledGraph, usize, f64, f64)> {
    let mut r = rng::seeded(seed);
    let n = r.random_range(1..=cfg.max_nodes);
    let p = r.random_range(0.1..0.9);
    let labels: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..cfg.color_dim - 1)
                .map(|_| r.random_range(-1.0..1.0))
                .collect()
        })
        .collect();
    let g = random_graph(n, p, r.random())?.with_labels(labels)?;
    let perm = random_permutation(n, &mut r);
    let pg = permute_graph(&g, &perm)?;
    let rounds = r.random_range(1..=cfg.max_rounds);
    let gnn = Gnn::init(cfg.color_dim, 3, 1, &[5], rounds, Activation::Tanh, seed)?;

    let out_dev = euclid(&gnn.eval(&g)?, &gnn.eval(&pg)?);
    let mut ca = gnn.initial_colors(&g)?;
    let mut cb = gnn.initial_colors(&pg)?;
    let mut round_dev: f64 = 0.0;
    for _ in 0..rounds {
        ca = gnn.message_pass(&g, &ca)?;
        cb = gnn.message_pass(&pg, &cb)?;
        for (i, row) in ca.iter().enumerate() {
            round_dev = round_dev.max(euclid(row, &cb[perm[i]]));
        }
    }
    Ok((g, rounds, out_dev, round_dev))
}

fn standard_normal<R: rand::Rng>(r: &mut R) -> f64 {
    StandardNormal.sample(r)
}

fn invariant_sample<R: rand::Rng>(r: &mut R, noise: f64) -> (Vec<f64>, f64) {
    let x: Vec<f64> = (0..4).map(|_| standard_normal(r)).collect();
    let y = x.iter().map(|v| v * v).sum::<f64>() / 4.0 + noise * standard_normal(r);
    (x, y)
}

/// Empirical squared-error risks of the plain and symmetrized model on each
/// Monte Carlo dataset.
pub fn risk_samples(cfg: &InvarianceConfig, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut r = rng::seeded(seed);
    let fit: Vec<_> = (0..cfg.fit_samples)
        .map(|_| {
            let (x, y) = invariant_sample(&mut r, cfg.noise);
            (x, vec![y])
        })
        .collect();
    let tc = TrainConfig {
        learning_rate: 0.05,
        epochs: cfg.fit_epochs,
        seed,
        ..TrainConfig::default()
    };
    let (f, _) = train(
        &Mlp::init(&[4, 16, 1], Activation::Tanh, seed)?,
        &Dataset::regression(fit)?,
        &tc,
    )?;
    let plain = |x: &[f64]| f.eval(x);
    let sym = symmetrize(plain, &GroupAction::cyclic_shift(4)?);

    let mut rp = Vec::with_capacity(cfg.datasets);
    let mut rs = Vec::with_capacity(cfg.datasets);
    for d in 0..cfg.datasets {
        let mut dr = rng::seeded(trial_seed(seed, d + 1));
        let (mut a, mut b) = (0.0, 0.0);
        for _ in 0..cfg.samples_per_dataset {
            let (x, y) = invariant_sample(&mut dr, cfg.noise);
            a += (plain(&x)?[0] - y).powi(2);
            b += (sym.eval(&x)?[0] - y).powi(2);
        }
        let n = cfg.samples_per_dataset as f64;
        rp.push(a / n);
        rs.push(b / n);
    }
    Ok((rp, rs))
}

pub fn run(cfg: &InvarianceConfig, seed: u64) -> Result<ExperimentReport> {
    let started = Instant::now();

    let mut ds_rows = Table::new(
        "deepset_cases",
        "case/seed: case index and parameter seed; set_size: elements; max_deviation: max |f(x) - f(gx)| over all reorderings",
        &["case", "seed", "set_size", "max_deviation"],
    );
    let mut ds_worst: f64 = 0.0;
    for c in 0..cfg.deepset_cases {
        let s = trial_seed(seed, c);
        let (size, dev) = deepset_case(cfg, s)?;
        ds_worst = ds_worst.max(dev);
        ds_rows.push(vec![
            c.to_string(),
            s.to_string(),
            size.to_string(),
            num(dev),
        ]);
    }

    let mut gnn_rows = Table::new(
        "gnn_cases",
        "case/seed: case index and seed; nodes/edges: graph size; rounds: message passing rounds; output_deviation: |f(G) - f(pi G)|; round_deviation: max per-round |pi h(G) - h(pi G)|",
        &["case", "seed", "nodes", "edges", "rounds", "output_deviation", "round_deviation"],
    );
    let (mut out_worst, mut round_worst): (f64, f64) = (0.0, 0.0);
    for c in 0..cfg.gnn_cases {
        let s = trial_seed(seed, c);
        let (g, rounds, od, rd) = gnn_case(cfg, s)?;
        out_worst = out_worst.max(od);
        round_worst = round_worst.max(rd);
        gnn_rows.push(vec![
            c.to_string(),
            s.to_string(),
            g.n().to_string(),
            g.num_edges().to_string(),
            rounds.to_string(),
            num(od),
            num(rd),
        ]);
    }

    let (rp, rs) = risk_samples(cfg, seed)?;
    let mut risks = Table::new(
        "risk_samples",
        "dataset: Monte Carlo draw; plain_risk: empirical MSE of f; symmetrized_risk: empirical MSE of the C4 orbit average",
        &["dataset", "plain_risk", "symmetrized_risk"],
    );
    for (d, (a, b)) in rp.iter().zip(&rs).enumerate() {
        risks.push(vec![d.to_string(), num(*a), num(*b)]);
    }
    let level = bootstrap_variance_le(&rs, &rp, cfg.resamples, seed);
    let mut summary = Table::new(
        "summary",
        "quantity: name; value: measured",
        &["quantity", "value"],
    );
    for (q, v) in [
        ("deepset_max_deviation", ds_worst),
        ("gnn_max_output_deviation", out_worst),
        ("gnn_max_round_deviation", round_worst),
        ("plain_risk_mean", mean(&rp)),
        ("symmetrized_risk_mean", mean(&rs)),
        ("plain_risk_variance", variance(&rp)),
        ("symmetrized_risk_variance", variance(&rs)),
        ("bootstrap_variance_le_share", level),
    ] {
        summary.push(vec![q.to_string(), num(v)]);
    }

    let checks = vec![
        Check::at_most("deepset_max_deviation", ds_worst, INVARIANCE_TOL),
        Check::at_most("gnn_max_output_deviation", out_worst, INVARIANCE_TOL),
        Check::at_most("gnn_max_round_deviation", round_worst, INVARIANCE_TOL),
        Check::at_least("bootstrap_variance_le_share", level, BOOTSTRAP_LEVEL),
    ];
    Ok(finish(
        "invariance",
        seed,
        cfg.echo(),
        vec![ds_rows, gnn_rows, risks, summary],
        checks,
        started,
    ))
}
