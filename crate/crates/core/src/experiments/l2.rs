//! Effect of the L2 penalty weight on weights and Lipschitz bounds.
//!
//! Every lambda is trained from the same initializations (trial `t` uses
//! seed `s + t` for all lambdas), so differences between lambdas are paired.
//! A very large lambda is run separately as a control: the penalty dominates
//! and drives every weight to zero.

use std::time::Instant;

use super::stats::mean;
use super::{
    center_corner_task, finish, layer_dims, num, require, trial_seed, Check, ExperimentReport,
    Keys, Table,
};
use crate::config::Config;
use crate::error::Result;
use crate::nn::{Activation, Mlp};
use crate::training::{mean_loss, train, LossKind, TrainConfig};

/// Bound the large-lambda control must stay below.
pub const LARGE_LAMBDA_MAX_BOUND: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct L2Config {
    pub lambdas: Vec<f64>,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub trials: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub large_lambda: f64,
}

impl Default for L2Config {
    fn default() -> Self {
        L2Config {
            lambdas: vec![0.0, 0.001, 0.002],
            hidden: vec![16, 16, 16],
            activation: Activation::Tanh,
            trials: 20,
            epochs: 2000,
            learning_rate: 0.05,
            large_lambda: 10.0,
        }
    }
}

impl L2Config {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let mut c = L2Config::default();
        c.read(cfg)?;
        Ok(c)
    }

    fn read(&mut self, cfg: &Config) -> Result<Vec<(String, String)>> {
        let mut k = Keys::new(cfg, "l2");
        k.list("lambdas", &mut self.lambdas)?;
        k.list("hidden", &mut self.hidden)?;
        k.scalar("activation", &mut self.activation)?;
        k.scalar("trials", &mut self.trials)?;
        k.scalar("epochs", &mut self.epochs)?;
        k.scalar("learning_rate", &mut self.learning_rate)?;
        k.scalar("large_lambda", &mut self.large_lambda)?;
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
        require(!self.lambdas.is_empty(), || {
            "l2.lambdas must not be empty".into()
        })?;
        require(
            self.lambdas
                .iter()
                .chain([&self.large_lambda])
                .all(|l| *l >= 0.0 && l.is_finite()),
            || "l2 lambdas must be finite and non-negative".into(),
        )?;
        require(self.trials >= 1, || "l2.trials must be at least 1".into())?;
        require(!self.hidden.contains(&0), || {
            "l2.hidden widths must be positive".into()
        })
    }

    pub fn train_model(&self, lambda: f64, seed: u64) -> Result<(Mlp, f64)> {
        let data = center_corner_task(1.0, 0.0);
        let cfg = TrainConfig {
            learning_rate: self.learning_rate,
            l2_lambda: lambda,
            epochs: self.epochs,
            seed,
            loss: LossKind::Mse,
        };
        let init = Mlp::init(&layer_dims(2, &self.hidden, 1), self.activation, seed)?;
        let (m, _) = train(&init, &data, &cfg)?;
        let loss = mean_loss(&m, &data, LossKind::Mse)?;
        Ok((m, loss))
    }
}

pub fn max_abs_weight(m: &Mlp) -> f64 {
    m.layers()
        .iter()
        .flat_map(|l| l.weights())
        .fold(0.0, |a: f64, w| a.max(w.abs()))
}

/// Mean bound for `lambda` in a summary table, if present.
fn mean_bound_for(means: &[(f64, f64)], lambda: f64) -> Option<f64> {
    means.iter().find(|(l, _)| *l == lambda).map(|(_, b)| *b)
}

pub fn run(cfg: &L2Config, seed: u64) -> Result<ExperimentReport> {
    let started = Instant::now();
    let mut rows = Table::new(
        "trials",
        "lambda: L2 weight; trial/seed: run index and seed; data_loss: final MSE without penalty; max_abs_weight: largest |w|; upper_bound: Lipschitz recursion bound",
        &["lambda", "trial", "seed", "data_loss", "max_abs_weight", "upper_bound"],
    );
    let mut summary = Table::new(
        "by_lambda",
        "lambda; mean_max_abs_weight and mean_upper_bound: means over trials",
        &["lambda", "mean_max_abs_weight", "mean_upper_bound"],
    );
    let mut means = Vec::new();
    for &lambda in &cfg.lambdas {
        let mut ws = Vec::with_capacity(cfg.trials);
        let mut bs = Vec::with_capacity(cfg.trials);
        for t in 0..cfg.trials {
            let s = trial_seed(seed, t);
            let (m, loss) = cfg.train_model(lambda, s)?;
            let (w, b) = (max_abs_weight(&m), m.lipschitz_upper_bound());
            rows.push(vec![
                num(lambda),
                t.to_string(),
                s.to_string(),
                num(loss),
                num(w),
                num(b),
            ]);
            ws.push(w);
            bs.push(b);
        }
        summary.push(vec![num(lambda), num(mean(&ws)), num(mean(&bs))]);
        means.push((lambda, mean(&bs)));
    }

    let (large, _) = cfg.train_model(cfg.large_lambda, seed)?;
    let large_bound = large.lipschitz_upper_bound();
    let mut control = Table::new(
        "large_lambda_control",
        "lambda: penalty weight; max_abs_weight: largest |w|; upper_bound: Lipschitz recursion bound",
        &["lambda", "max_abs_weight", "upper_bound"],
    );
    control.push(vec![
        num(cfg.large_lambda),
        num(max_abs_weight(&large)),
        num(large_bound),
    ]);

    let mut checks = Vec::new();
    if let (Some(a), Some(b)) = (mean_bound_for(&means, 0.001), mean_bound_for(&means, 0.002)) {
        checks.push(Check::below(
            "mean_bound_lambda_0.002_minus_0.001",
            b - a,
            0.0,
        ));
    }
    if let Some(zero) = mean_bound_for(&means, 0.0) {
        let others = means
            .iter()
            .filter(|(l, _)| *l != 0.0)
            .map(|(_, b)| *b)
            .fold(f64::NEG_INFINITY, f64::max);
        if others.is_finite() {
            checks.push(Check::above(
                "mean_bound_lambda_0_minus_largest_other",
                zero - others,
                0.0,
            ));
        }
    }
    checks.push(Check::below(
        "large_lambda_bound",
        large_bound,
        LARGE_LAMBDA_MAX_BOUND,
    ));
    Ok(finish(
        "l2",
        seed,
        cfg.echo(),
        vec![rows, summary, control],
        checks,
        started,
    ))
}
