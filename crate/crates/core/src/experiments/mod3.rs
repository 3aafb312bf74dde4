//! Learning `f*(x) = [x mod 3 > 1]` with and without the shift symmetry.
//!
//! The plain model sees `x / train_max` for `x` in `[0, train_max)`. The
//! symmetrized model sees the orbit representative of `x` under translations
//! by the period (`x mod 3`, divided by the period), i.e. it works on the
//! quotient space. Both are the same MLP with a sigmoid output trained by
//! full-batch gradient descent on MSE, and both are scored with threshold
//! 0.5 on the training range and on `[eval_min, eval_max)`.

use std::time::Instant;

use super::stats::mean;
use super::{finish, num, require, trial_seed, Check, ExperimentReport, Keys, Table};
use crate::config::Config;
use crate::error::Result;
use crate::groups::GroupAction;
use crate::nn::{Activation, Mlp};
use crate::training::{train, Dataset, TrainConfig};

/// Mean symmetrized extrapolation accuracy required at every depth.
pub const MIN_SYMMETRIZED_ACCURACY: f64 = 0.95;
/// Mean plain extrapolation accuracy allowed at every depth.
pub const MAX_PLAIN_ACCURACY: f64 = 0.70;

#[derive(Debug, Clone, PartialEq)]
pub struct Mod3Config {
    pub depths: Vec<usize>,
    pub width: usize,
    pub activation: Activation,
    pub trials: usize,
    pub train_points: usize,
    pub train_max: f64,
    pub eval_min: f64,
    pub eval_max: f64,
    pub eval_step: f64,
    pub period: f64,
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for Mod3Config {
    fn default() -> Self {
        Mod3Config {
            depths: vec![1, 2, 4, 8],
            width: 8,
            activation: Activation::Tanh,
            trials: 10,
            train_points: 300,
            train_max: 30.0,
            eval_min: 30.0,
            eval_max: 300.0,
            eval_step: 0.1,
            period: 3.0,
            epochs: 1000,
            learning_rate: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Plain,
    Symmetrized,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Plain => "plain",
            Variant::Symmetrized => "symmetrized",
        }
    }
}

impl Mod3Config {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let mut c = Mod3Config::default();
        c.read(cfg)?;
        Ok(c)
    }

    fn read(&mut self, cfg: &Config) -> Result<Vec<(String, String)>> {
        let mut k = Keys::new(cfg, "mod3");
        k.list("depths", &mut self.depths)?;
        k.scalar("width", &mut self.width)?;
        k.scalar("activation", &mut self.activation)?;
        k.scalar("trials", &mut self.trials)?;
        k.scalar("train_points", &mut self.train_points)?;
        k.scalar("train_max", &mut self.train_max)?;
        k.scalar("eval_min", &mut self.eval_min)?;
        k.scalar("eval_max", &mut self.eval_max)?;
        k.scalar("eval_step", &mut self.eval_step)?;
        k.scalar("period", &mut self.period)?;
        k.scalar("epochs", &mut self.epochs)?;
        k.scalar("learning_rate", &mut self.learning_rate)?;
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
        require(!self.depths.is_empty() && !self.depths.contains(&0), || {
            "mod3.depths must be a non-empty list of positive depths".into()
        })?;
        require(
            self.width >= 1 && self.trials >= 1 && self.train_points >= 1,
            || "mod3 width, trials and train_points must be positive".into(),
        )?;
        require(
            self.train_max > 0.0 && self.period > 0.0 && self.eval_step > 0.0,
            || "mod3 train_max, period and eval_step must be positive".into(),
        )?;
        require(self.eval_max > self.eval_min, || {
            "mod3 needs eval_min < eval_max".into()
        })?;
        require(
            (self.eval_max - self.eval_min) / self.eval_step <= 1e7,
            || "mod3 evaluation grid is too fine".into(),
        )
    }

    pub fn target(&self, x: f64) -> f64 {
        if x.rem_euclid(self.period) > 1.0 {
            1.0
        } else {
            0.0
        }
    }

    /// Training inputs `i * train_max / train_points`.
    pub fn train_inputs(&self) -> Vec<f64> {
        (0..self.train_points)
            .map(|i| i as f64 * self.train_max / self.train_points as f64)
            .collect()
    }

    /// Evaluation grid at cell midpoints, away from the class boundaries.
    pub fn eval_inputs(&self) -> Vec<f64> {
        let n = ((self.eval_max - self.eval_min) / self.eval_step).round() as usize;
        (0..n)
            .map(|i| self.eval_min + (i as f64 + 0.5) * self.eval_step)
            .filter(|&x| x < self.eval_max)
            .collect()
    }

    /// Network input for `x` under each variant.
    pub fn features(&self, variant: Variant, x: f64) -> Result<Vec<f64>> {
        Ok(match variant {
            Variant::Plain => vec![x / self.train_max],
            Variant::Symmetrized => {
                let group = GroupAction::periodic_translation(self.period, 0)?;
                vec![group.canonical_form(&[x])?[0] / self.period]
            }
        })
    }

    pub fn model(&self, depth: usize, seed: u64) -> Result<Mlp> {
        let mut dims = vec![1];
        dims.extend(std::iter::repeat_n(self.width, depth - 1));
        dims.push(1);
        Ok(Mlp::init(&dims, self.activation, seed)?.with_output_activation(Activation::Sigmoid))
    }

    pub fn train_model(&self, variant: Variant, depth: usize, seed: u64) -> Result<Mlp> {
        let data = Dataset::regression(
            self.train_inputs()
                .into_iter()
                .map(|x| Ok((self.features(variant, x)?, vec![self.target(x)])))
                .collect::<Result<Vec<_>>>()?,
        )?;
        let cfg = TrainConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            seed,
            ..TrainConfig::default()
        };
        Ok(train(&self.model(depth, seed)?, &data, &cfg)?.0)
    }

    pub fn accuracy(&self, model: &Mlp, variant: Variant, xs: &[f64]) -> Result<f64> {
        let mut hits = 0;
        for &x in xs {
            let p = model.eval(&self.features(variant, x)?)?[0];
            if (p > 0.5) == (self.target(x) > 0.5) {
                hits += 1;
            }
        }
        Ok(hits as f64 / xs.len() as f64)
    }
}

pub fn run(cfg: &Mod3Config, seed: u64) -> Result<ExperimentReport> {
    let started = Instant::now();
    let train_x = cfg.train_inputs();
    let eval_x = cfg.eval_inputs();
    let mut trials = Table::new(
        "trials",
        "variant: plain or symmetrized input; depth: dense layers; trial/seed: run index and seed; train_acc: accuracy on the training range; extrap_acc: accuracy on the extrapolation range",
        &["variant", "depth", "trial", "seed", "train_acc", "extrap_acc"],
    );
    let mut summary = Table::new(
        "accuracy",
        "variant; depth; mean_train_acc and mean_extrap_acc: means over trials",
        &["variant", "depth", "mean_train_acc", "mean_extrap_acc"],
    );
    let mut checks = Vec::new();
    for variant in [Variant::Plain, Variant::Symmetrized] {
        for &depth in &cfg.depths {
            let mut tr = Vec::with_capacity(cfg.trials);
            let mut ex = Vec::with_capacity(cfg.trials);
            for t in 0..cfg.trials {
                let s = trial_seed(seed, t);
                let model = cfg.train_model(variant, depth, s)?;
                let a = cfg.accuracy(&model, variant, &train_x)?;
                let b = cfg.accuracy(&model, variant, &eval_x)?;
                trials.push(vec![
                    variant.name().into(),
                    depth.to_string(),
                    t.to_string(),
                    s.to_string(),
                    num(a),
                    num(b),
                ]);
                tr.push(a);
                ex.push(b);
            }
            let (mt, me) = (mean(&tr), mean(&ex));
            summary.push(vec![
                variant.name().into(),
                depth.to_string(),
                num(mt),
                num(me),
            ]);
            let name = format!("{}_depth{depth}_extrap_acc", variant.name());
            checks.push(match variant {
                Variant::Plain => Check::at_most(&name, me, MAX_PLAIN_ACCURACY),
                Variant::Symmetrized => Check::at_least(&name, me, MIN_SYMMETRIZED_ACCURACY),
            });
        }
    }
    Ok(finish(
        "mod3",
        seed,
        cfg.echo(),
        vec![trials, summary],
        checks,
        started,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targets_and_grids() {
        let c = Mod3Config::default();
        assert_eq!(c.target(1.5), 1.0);
        assert_eq!(c.target(1.0), 0.0);
        assert_eq!(c.target(3.2), 0.0);
        assert_eq!(c.train_inputs().len(), 300);
        let e = c.eval_inputs();
        assert_eq!(e.len(), 2700);
        assert!(e.iter().all(|&x| (30.0..300.0).contains(&x)));
    }

    #[test]
    fn symmetrized_features_are_shift_invariant() {
        let c = Mod3Config::default();
        let a = c.features(Variant::Symmetrized, 1.25).unwrap()[0];
        let b = c.features(Variant::Symmetrized, 1.25 + 3.0 * 40.0).unwrap()[0];
        assert!((a - b).abs() < 1e-12);
        assert!((0.0..1.0).contains(&a));
    }

    #[test]
    fn models_have_requested_depth() {
        let c = Mod3Config::default();
        assert_eq!(c.model(1, 0).unwrap().depth(), 1);
        assert_eq!(c.model(4, 0).unwrap().dims(), vec![1, 8, 8, 8, 1]);
    }
}
