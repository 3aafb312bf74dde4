//! Lipschitz constants of networks of growing depth that fit the same
//! center/corner task.
//!
//! For each depth and trial the network is trained to zero loss, then the
//! layer recursion bound and the empirical constant (largest input-gradient
//! norm over uniform samples of the box) are recorded. A one-layer linear
//! network serves as a control whose bound has a closed form: the largest
//! absolute row sum of its weight matrix.

use std::time::Instant;

use super::stats::{mean, spearman};
use super::{
    center_corner_task, finish, num, require, trial_seed, Check, ExperimentReport, Keys, Table,
};
use crate::config::Config;
use crate::error::Result;
use crate::nn::{Activation, Mlp};
use crate::training::{train, TrainConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzDepthConfig {
    pub depths: Vec<usize>,
    pub width: usize,
    pub activation: Activation,
    pub trials: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub samples: usize,
    pub box_half_width: f64,
}

impl Default for LipschitzDepthConfig {
    fn default() -> Self {
        LipschitzDepthConfig {
            depths: vec![2, 3, 5, 8, 10, 15],
            width: 10,
            activation: Activation::Tanh,
            trials: 5,
            epochs: 2000,
            learning_rate: 0.05,
            samples: 1000,
            box_half_width: 5.0,
        }
    }
}

impl LipschitzDepthConfig {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let mut c = LipschitzDepthConfig::default();
        c.read(cfg)?;
        Ok(c)
    }

    fn read(&mut self, cfg: &Config) -> Result<Vec<(String, String)>> {
        let mut k = Keys::new(cfg, "lipschitz-depth");
        k.list("depths", &mut self.depths)?;
        k.scalar("width", &mut self.width)?;
        k.scalar("activation", &mut self.activation)?;
        k.scalar("trials", &mut self.trials)?;
        k.scalar("epochs", &mut self.epochs)?;
        k.scalar("learning_rate", &mut self.learning_rate)?;
        k.scalar("samples", &mut self.samples)?;
        k.scalar("box_half_width", &mut self.box_half_width)?;
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
        require(self.depths.len() >= 2 && !self.depths.contains(&0), || {
            "lipschitz-depth.depths needs at least two positive depths".into()
        })?;
        require(
            self.width >= 1 && self.trials >= 1 && self.samples >= 1,
            || "lipschitz-depth width, trials and samples must be positive".into(),
        )?;
        require(self.box_half_width > 0.0, || {
            "lipschitz-depth.box_half_width must be positive".into()
        })
    }

    pub fn model(&self, depth: usize, seed: u64) -> Result<Mlp> {
        let mut dims = vec![2];
        dims.extend(std::iter::repeat_n(self.width, depth - 1));
        dims.push(1);
        Mlp::init(&dims, self.activation, seed)
    }
}

/// Largest absolute row sum of a single linear layer.
pub fn row_sum_bound(m: &Mlp) -> f64 {
    let l = &m.layers()[0];
    l.weights()
        .chunks_exact(l.in_dim())
        .map(|r| r.iter().map(|w| w.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn run(cfg: &LipschitzDepthConfig, seed: u64) -> Result<ExperimentReport> {
    let started = Instant::now();
    let data = center_corner_task(1.0, 0.0);
    let b = cfg.box_half_width;
    let bounds = [(-b, b), (-b, b)];
    let mut rows = Table::new(
        "trials",
        "depth: dense layers; trial/seed: run index and seed; final_loss: training MSE; upper_bound: layer recursion bound; empirical: max input-gradient norm over the sample box",
        &["depth", "trial", "seed", "final_loss", "upper_bound", "empirical"],
    );
    let mut summary = Table::new(
        "by_depth",
        "depth; mean_upper_bound and mean_empirical: means over trials",
        &["depth", "mean_upper_bound", "mean_empirical"],
    );
    let mut worst_gap = f64::NEG_INFINITY;
    let mut mean_emp = Vec::with_capacity(cfg.depths.len());
    for &depth in &cfg.depths {
        let mut ub = Vec::with_capacity(cfg.trials);
        let mut emp = Vec::with_capacity(cfg.trials);
        for t in 0..cfg.trials {
            let s = trial_seed(seed, t);
            let tc = TrainConfig {
                learning_rate: cfg.learning_rate,
                epochs: cfg.epochs,
                seed: s,
                ..TrainConfig::default()
            };
            let (model, _) = train(&cfg.model(depth, s)?, &data, &tc)?;
            let final_loss = crate::training::mean_loss(&model, &data, tc.loss)?;
            let u = model.lipschitz_upper_bound();
            let e = model.empirical_lipschitz(&bounds, cfg.samples, s)?;
            worst_gap = worst_gap.max(e - u);
            rows.push(vec![
                depth.to_string(),
                t.to_string(),
                s.to_string(),
                num(final_loss),
                num(u),
                num(e),
            ]);
            ub.push(u);
            emp.push(e);
        }
        summary.push(vec![depth.to_string(), num(mean(&ub)), num(mean(&emp))]);
        mean_emp.push(mean(&emp));
    }
    let depths: Vec<f64> = cfg.depths.iter().map(|&d| d as f64).collect();
    let rho = spearman(&depths, &mean_emp);

    let control = Mlp::init(&[2, 1], Activation::Identity, seed)?;
    let control_err = (control.lipschitz_upper_bound() - row_sum_bound(&control)).abs();
    let mut ctl = Table::new(
        "linear_control",
        "recursion_bound: bound of a one-layer linear network; row_sum: its largest absolute row sum",
        &["recursion_bound", "row_sum"],
    );
    ctl.push(vec![
        num(control.lipschitz_upper_bound()),
        num(row_sum_bound(&control)),
    ]);

    let checks = vec![
        Check::above("spearman_depth_empirical", rho, 0.0),
        Check::at_most("max_empirical_minus_bound", worst_gap, 0.0),
        Check::at_most("linear_control_error", control_err, 0.0),
    ];
    Ok(finish(
        "lipschitz-depth",
        seed,
        cfg.echo(),
        vec![rows, summary, ctl],
        checks,
        started,
    ))
}
