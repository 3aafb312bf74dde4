//! Far-field behavior of a ReLU network trained on five points.
//!
//! The network learns `f(0,0) = 1` and `f(+-4,+-4) = 0`, then is evaluated
//! along rays `h * v` from the origin for `h` in `[h_min, h_max]`. A ReLU
//! network is piecewise linear, so once `h` passes the last kink on a ray
//! the values lie on a line; each ray gets a least-squares fit and its R².
//! Repeating the training over many seeds gives the distribution of the
//! far-away query `f(50, 50)`, which is tested for unimodality with
//! Silverman's critical-bandwidth bootstrap and for concentration around
//! its median.

use std::f64::consts::TAU;
use std::time::Instant;

use super::stats::{histogram, kde_mode_count, linear_fit, median, unimodality_p_value};
use super::{
    center_corner_task, finish, layer_dims, num, require, trial_seed, Check, ExperimentReport,
    Keys, Table,
};
use crate::config::Config;
use crate::error::Result;
use crate::nn::{Activation, Mlp};
use crate::training::{train, TrainConfig};

/// Minimum R² of every ray fit.
pub const MIN_RAY_R2: f64 = 0.99;
/// Share of `f(50,50)` samples that must lie within a factor of ten of the
/// median (same sign).
pub const CONCENTRATION_SHARE: f64 = 0.9;
/// Density maxima below this share of the highest one are not counted in
/// the reported mode count.
pub const MODE_MIN_HEIGHT: f64 = 0.1;
/// Unimodality of the query distribution is rejected below this p-value.
pub const UNIMODALITY_LEVEL: f64 = 0.05;
/// Smoothed bootstrap resamples of the unimodality test.
pub const UNIMODALITY_RESAMPLES: usize = 500;
/// Bound on `|f(50,50)|` for the all-zero control task.
pub const ZERO_TASK_TOL: f64 = 0.1;
/// Weight scale of the control network's initialization.
pub const ZERO_TASK_INIT_SCALE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolationConfig {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub rays: usize,
    pub h_min: f64,
    pub h_max: f64,
    pub h_steps: usize,
    pub query_x: f64,
    pub query_y: f64,
    pub trials: usize,
    pub bins: usize,
}

impl Default for ExtrapolationConfig {
    fn default() -> Self {
        ExtrapolationConfig {
            hidden: vec![16, 16],
            epochs: 2000,
            learning_rate: 0.01,
            rays: 8,
            h_min: 10.0,
            h_max: 100.0,
            h_steps: 19,
            query_x: 50.0,
            query_y: 50.0,
            trials: 200,
            bins: 20,
        }
    }
}

impl ExtrapolationConfig {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let mut c = ExtrapolationConfig::default();
        c.read(cfg)?;
        Ok(c)
    }

    fn read(&mut self, cfg: &Config) -> Result<Vec<(String, String)>> {
        let mut k = Keys::new(cfg, "extrapolation");
        k.list("hidden", &mut self.hidden)?;
        k.scalar("epochs", &mut self.epochs)?;
        k.scalar("learning_rate", &mut self.learning_rate)?;
        k.scalar("rays", &mut self.rays)?;
        k.scalar("h_min", &mut self.h_min)?;
        k.scalar("h_max", &mut self.h_max)?;
        k.scalar("h_steps", &mut self.h_steps)?;
        k.scalar("query_x", &mut self.query_x)?;
        k.scalar("query_y", &mut self.query_y)?;
        k.scalar("trials", &mut self.trials)?;
        k.scalar("bins", &mut self.bins)?;
        let echo = k.finish()?;
        self.validate()?;
        Ok(echo)
    }

    fn echo(&self) -> Vec<(String, String)> {
        let mut c = self.clone();
        c.read(&Config::default()).expect("validated config")
    }

    pub fn validate(&self) -> Result<()> {
        require(self.rays >= 1, || {
            "extrapolation.rays must be at least 1".into()
        })?;
        require(self.h_steps >= 2, || {
            "extrapolation.h_steps must be at least 2".into()
        })?;
        require(self.h_min.is_finite() && self.h_max > self.h_min, || {
            "extrapolation needs h_min < h_max".into()
        })?;
        require(self.trials >= 1, || {
            "extrapolation.trials must be at least 1".into()
        })?;
        require(self.bins >= 1, || {
            "extrapolation.bins must be at least 1".into()
        })?;
        require(!self.hidden.contains(&0), || {
            "extrapolation.hidden widths must be positive".into()
        })
    }

    fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            seed,
            ..TrainConfig::default()
        }
    }

    /// Trains the ReLU network on the five-point task with center value
    /// `center`, starting from Glorot weights multiplied by `init_scale`.
    pub fn train_model(&self, center: f64, init_scale: f64, seed: u64) -> Result<Mlp> {
        let mut model = Mlp::init(&layer_dims(2, &self.hidden, 1), Activation::Relu, seed)?;
        model.scale_weights(init_scale);
        let (trained, _) = train(
            &model,
            &center_corner_task(center, 0.0),
            &self.train_config(seed),
        )?;
        Ok(trained)
    }

    pub fn ray_steps(&self) -> Vec<f64> {
        let n = self.h_steps - 1;
        (0..=n)
            .map(|i| self.h_min + (self.h_max - self.h_min) * i as f64 / n as f64)
            .collect()
    }
}

/// Per-ray samples and linear fits for one model.
pub fn ray_fits(model: &Mlp, cfg: &ExtrapolationConfig) -> Result<(Table, Table)> {
    let mut samples = Table::new(
        "ray_samples",
        "ray: index; angle: direction in radians; h: distance from the origin; f: network output at h*(cos, sin)",
        &["ray", "angle", "h", "f"],
    );
    let mut fits = Table::new(
        "ray_fits",
        "ray: index; angle: radians; slope/intercept: least-squares line f ~ slope*h + intercept; r2: coefficient of determination",
        &["ray", "angle", "slope", "intercept", "r2"],
    );
    let hs = cfg.ray_steps();
    for r in 0..cfg.rays {
        let angle = TAU * r as f64 / cfg.rays as f64;
        let (s, c) = angle.sin_cos();
        let mut fs = Vec::with_capacity(hs.len());
        for &h in &hs {
            let f = model.eval(&[h * c, h * s])?[0];
            samples.push(vec![r.to_string(), num(angle), num(h), num(f)]);
            fs.push(f);
        }
        let fit = linear_fit(&hs, &fs);
        fits.push(vec![
            r.to_string(),
            num(angle),
            num(fit.slope),
            num(fit.intercept),
            num(fit.r2),
        ]);
    }
    Ok((samples, fits))
}

/// Share of values with the median's sign and within a factor of ten of it.
pub fn concentration(values: &[f64]) -> f64 {
    let m = median(values);
    if values.is_empty() || m == 0.0 {
        return 0.0;
    }
    let inside = values
        .iter()
        .filter(|v| {
            v.signum() == m.signum() && v.abs() >= m.abs() / 10.0 && v.abs() <= m.abs() * 10.0
        })
        .count();
    inside as f64 / values.len() as f64
}

pub fn run(cfg: &ExtrapolationConfig, seed: u64) -> Result<ExperimentReport> {
    let started = Instant::now();
    let query = [cfg.query_x, cfg.query_y];

    let mut queries = Table::new(
        "query_samples",
        "trial: index; seed: training seed; f: network output at the query point",
        &["trial", "seed", "f"],
    );
    let mut values = Vec::with_capacity(cfg.trials);
    let mut reference = None;
    for t in 0..cfg.trials {
        let s = trial_seed(seed, t);
        let model = cfg.train_model(1.0, 1.0, s)?;
        let f = model.eval(&query)?[0];
        queries.push(vec![t.to_string(), s.to_string(), num(f)]);
        values.push(f);
        if t == 0 {
            reference = Some(model);
        }
    }
    let reference = reference.expect("at least one trial");
    let (samples, fits) = ray_fits(&reference, cfg)?;

    let mut hist = Table::new(
        "query_histogram",
        "bin_lo/bin_hi: bin edges; count: trials whose query output falls in the bin",
        &["bin_lo", "bin_hi", "count"],
    );
    for (lo, hi, c) in histogram(&values, cfg.bins) {
        hist.push(vec![num(lo), num(hi), c.to_string()]);
    }

    let control = cfg
        .train_model(0.0, ZERO_TASK_INIT_SCALE, seed)?
        .eval(&query)?[0];
    let mut summary = Table::new(
        "summary",
        "quantity: name; value: measured",
        &["quantity", "value"],
    );
    let min_r2 = fits.numbers("r2").into_iter().fold(f64::INFINITY, f64::min);
    let modes = kde_mode_count(&values, MODE_MIN_HEIGHT);
    let p_unimodal = unimodality_p_value(&values, UNIMODALITY_RESAMPLES, seed);
    let share = concentration(&values);
    for (q, v) in [
        ("min_ray_r2", min_r2),
        ("query_median", median(&values)),
        ("query_kde_modes", modes as f64),
        ("query_unimodality_p", p_unimodal),
        ("query_concentration", share),
        ("zero_task_query", control),
    ] {
        summary.push(vec![q.to_string(), num(v)]);
    }

    let checks = vec![
        Check::at_least("min_ray_r2", min_r2, MIN_RAY_R2),
        Check::at_least("query_unimodality_p", p_unimodal, UNIMODALITY_LEVEL),
        Check::at_least("query_concentration", share, CONCENTRATION_SHARE),
        Check::at_most("zero_task_abs_query", control.abs(), ZERO_TASK_TOL),
    ];
    Ok(finish(
        "extrapolation",
        seed,
        cfg.echo(),
        vec![samples, fits, queries, hist, summary],
        checks,
        started,
    ))
}
