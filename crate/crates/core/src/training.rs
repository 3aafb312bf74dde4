//! Losses, L2 regularization and full-batch gradient descent.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::autodiff::{NodeId, Tape};
use crate::error::{check_dim, Error, Result};

/// Anything with a flat parameter vector and a recorded forward pass.
pub trait Model: Clone {
    type Input;

    fn parameters(&self) -> Vec<f64>;

    fn set_parameters(&mut self, params: &[f64]) -> Result<()>;

    /// Records the forward pass with `params` standing in for
    /// [`Model::parameters`].
    fn forward(
        &self,
        tape: &mut Tape,
        params: &[NodeId],
        input: &Self::Input,
    ) -> Result<Vec<NodeId>>;

    fn predict(&self, input: &Self::Input) -> Result<Vec<f64>> {
        let mut tape = Tape::new();
        let params = tape.constants(&self.parameters());
        let out = self.forward(&mut tape, &params, input)?;
        Ok(tape.values(&out))
    }
}

impl Model for crate::nn::Mlp {
    type Input = Vec<f64>;

    fn parameters(&self) -> Vec<f64> {
        crate::nn::Mlp::parameters(self)
    }

    fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        crate::nn::Mlp::set_parameters(self, params)
    }

    fn forward(&self, tape: &mut Tape, params: &[NodeId], input: &Vec<f64>) -> Result<Vec<NodeId>> {
        let x = tape.constants(input);
        crate::nn::Mlp::forward(self, tape, params, &x)
    }

    fn predict(&self, input: &Vec<f64>) -> Result<Vec<f64>> {
        self.eval(input)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Mse,
    SoftmaxCrossEntropy,
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mse" => Ok(LossKind::Mse),
            "ce" | "cross_entropy" | "softmax_cross_entropy" => Ok(LossKind::SoftmaxCrossEntropy),
            other => Err(Error::invalid(format!("unknown loss `{other}`"))),
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Mse => "mse",
            LossKind::SoftmaxCrossEntropy => "softmax_cross_entropy",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Vector(Vec<f64>),
    Class(usize),
}

#[derive(Debug, Clone)]
pub struct Dataset<I> {
    samples: Vec<(I, Target)>,
}

impl<I> Dataset<I> {
    /// Rejects empty datasets and mixed target kinds or lengths.
    pub fn new(samples: Vec<(I, Target)>) -> Result<Self> {
        let first = match samples.first() {
            Some((_, t)) => t,
            None => return Err(Error::invalid("dataset is empty")),
        };
        for (_, t) in &samples[1..] {
            match (first, t) {
                (Target::Vector(a), Target::Vector(b)) => check_dim("target", a.len(), b.len())?,
                (Target::Class(_), Target::Class(_)) => {}
                _ => return Err(Error::invalid("dataset mixes regression and class targets")),
            }
        }
        Ok(Dataset { samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[(I, Target)] {
        &self.samples
    }

    /// Target length for regression data, `max label + 1` for class data.
    pub fn output_width(&self) -> usize {
        self.samples
            .iter()
            .map(|(_, t)| match t {
                Target::Vector(v) => v.len(),
                Target::Class(c) => c + 1,
            })
            .max()
            .unwrap_or(0)
    }
}

impl Dataset<Vec<f64>> {
    /// Regression dataset from `(x, y)` vectors of uniform dimensions.
    pub fn regression(pairs: Vec<(Vec<f64>, Vec<f64>)>) -> Result<Self> {
        if let Some((x0, _)) = pairs.first() {
            for (x, _) in &pairs {
                check_dim("sample input", x0.len(), x.len())?;
            }
        }
        Dataset::new(
            pairs
                .into_iter()
                .map(|(x, y)| (x, Target::Vector(y)))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub l2_lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    pub loss: LossKind,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            l2_lambda: 0.0,
            epochs: 1000,
            seed: 0,
            loss: LossKind::Mse,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.l2_lambda >= 0.0 && self.l2_lambda.is_finite()) {
            return Err(Error::invalid(format!(
                "l2 lambda must be non-negative, got {}",
                self.l2_lambda
            )));
        }
        Ok(())
    }
}

pub fn mse_loss(pred: &[f64], target: &[f64]) -> Result<f64> {
    check_dim("mse target", pred.len(), target.len())?;
    if pred.is_empty() {
        return Err(Error::invalid("mse of empty vectors"));
    }
    let ss: f64 = pred
        .iter()
        .zip(target)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(ss / pred.len() as f64)
}

/// Softmax with max-subtraction.
pub fn softmax(a: &[f64]) -> Vec<f64> {
    let m = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = a.iter().map(|v| (v - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|v| v / z).collect()
}

/// `-log softmax(logits)[label]`, evaluated as `logsumexp(logits) - logits[label]`.
pub fn cross_entropy(logits: &[f64], label: usize) -> Result<f64> {
    if label >= logits.len() {
        return Err(Error::LabelOutOfRange {
            label,
            classes: logits.len(),
        });
    }
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
    Ok(lse - logits[label])
}

/// `lambda * ||params||^2`.
pub fn l2_penalty(params: &[f64], lambda: f64) -> Result<f64> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::invalid(format!(
            "l2 lambda must be non-negative, got {lambda}"
        )));
    }
    Ok(lambda * params.iter().map(|p| p * p).sum::<f64>())
}

/// One update `theta <- theta - alpha * grad`.
pub fn gd_step(params: &mut [f64], grads: &[f64], learning_rate: f64) -> Result<()> {
    check_dim("gradient", params.len(), grads.len())?;
    for (p, g) in params.iter_mut().zip(grads) {
        *p -= learning_rate * g;
    }
    Ok(())
}

pub fn mse_node(tape: &mut Tape, pred: &[NodeId], target: &[f64]) -> Result<NodeId> {
    check_dim("mse target", target.len(), pred.len())?;
    if pred.is_empty() {
        return Err(Error::invalid("mse of empty vectors"));
    }
    let mut sq = Vec::with_capacity(pred.len());
    for (&p, &t) in pred.iter().zip(target) {
        let nt = tape.constant(-t);
        let d = tape.add(p, nt);
        sq.push(tape.square(d));
    }
    let s = tape.sum(&sq);
    Ok(tape.scale(s, 1.0 / pred.len() as f64))
}

pub fn cross_entropy_node(tape: &mut Tape, logits: &[NodeId], label: usize) -> Result<NodeId> {
    if label >= logits.len() {
        return Err(Error::LabelOutOfRange {
            label,
            classes: logits.len(),
        });
    }
    // the shift is a constant: it cancels analytically, so it need not carry gradient
    let m = logits
        .iter()
        .map(|&l| tape.value(l))
        .fold(f64::NEG_INFINITY, f64::max);
    let neg_m = tape.constant(-m);
    let mut exps = Vec::with_capacity(logits.len());
    for &l in logits {
        let shifted = tape.add(l, neg_m);
        exps.push(tape.exp(shifted));
    }
    let z = tape.sum(&exps);
    let log_z = tape.log(z)?;
    let neg_target = tape.neg(logits[label]);
    let mc = tape.constant(m);
    Ok(tape.sum(&[mc, log_z, neg_target]))
}

pub fn loss_node(
    tape: &mut Tape,
    kind: LossKind,
    pred: &[NodeId],
    target: &Target,
) -> Result<NodeId> {
    match (kind, target) {
        (LossKind::Mse, Target::Vector(y)) => mse_node(tape, pred, y),
        (LossKind::SoftmaxCrossEntropy, Target::Class(c)) => cross_entropy_node(tape, pred, *c),
        (LossKind::Mse, Target::Class(_)) => Err(Error::invalid("mse loss needs vector targets")),
        (LossKind::SoftmaxCrossEntropy, Target::Vector(_)) => {
            Err(Error::invalid("cross-entropy loss needs class targets"))
        }
    }
}

pub fn sample_loss(pred: &[f64], kind: LossKind, target: &Target) -> Result<f64> {
    match (kind, target) {
        (LossKind::Mse, Target::Vector(y)) => mse_loss(pred, y),
        (LossKind::SoftmaxCrossEntropy, Target::Class(c)) => cross_entropy(pred, *c),
        _ => Err(Error::invalid("loss kind does not match target kind")),
    }
}

/// Mean loss over `data`, without the penalty.
pub fn mean_loss<M: Model>(model: &M, data: &Dataset<M::Input>, kind: LossKind) -> Result<f64> {
    let mut total = 0.0;
    for (x, y) in data.samples() {
        total += sample_loss(&model.predict(x)?, kind, y)?;
    }
    Ok(total / data.len() as f64)
}

/// Records the regularized empirical risk and returns `(objective, params)`.
pub fn record_objective<M: Model>(
    model: &M,
    tape: &mut Tape,
    theta: &[f64],
    data: &Dataset<M::Input>,
    kind: LossKind,
    l2_lambda: f64,
) -> Result<NodeId> {
    let params = tape.param_slice(theta);
    let mut losses = Vec::with_capacity(data.len());
    for (x, y) in data.samples() {
        let pred = model.forward(tape, &params, x)?;
        losses.push(loss_node(tape, kind, &pred, y)?);
    }
    let total = tape.sum(&losses);
    let mut objective = tape.scale(total, 1.0 / data.len() as f64);
    if l2_lambda > 0.0 {
        let squares: Vec<NodeId> = params.iter().map(|&p| tape.square(p)).collect();
        let ss = tape.sum(&squares);
        let pen = tape.scale(ss, l2_lambda);
        objective = tape.add(objective, pen);
    }
    Ok(objective)
}

const DIVERGENCE_LIMIT: f64 = 1e12;

/// Full-batch gradient descent on mean loss plus `lambda * ||theta||^2`.
///
/// Returns the trained model and the objective recorded at the start of
/// every epoch. Aborts with [`Error::Divergence`] once the objective is
/// non-finite or above `1e12`.
pub fn train<M: Model>(
    model: &M,
    data: &Dataset<M::Input>,
    cfg: &TrainConfig,
) -> Result<(M, Vec<f64>)> {
    cfg.validate()?;
    let mut theta = model.parameters();
    let mut trace = Vec::with_capacity(cfg.epochs);
    let mut tape = Tape::new();
    for epoch in 0..cfg.epochs {
        tape.clear();
        let objective = record_objective(model, &mut tape, &theta, data, cfg.loss, cfg.l2_lambda)?;
        let loss = tape.value(objective);
        if !loss.is_finite() || loss > DIVERGENCE_LIMIT {
            return Err(Error::Divergence { epoch, loss });
        }
        trace.push(loss);
        let grad = tape.backward(objective)?;
        gd_step(&mut theta, grad.as_slice(), cfg.learning_rate)?;
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::Divergence {
                epoch,
                loss: f64::NAN,
            });
        }
    }
    let mut trained = model.clone();
    trained.set_parameters(&theta)?;
    Ok((trained, trace))
}

/// Writes a loss trace as CSV with header `epoch,loss`.
pub fn write_loss_trace<W: Write>(out: W, trace: &[f64]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["epoch", "loss"])?;
    for (i, l) in trace.iter().enumerate() {
        w.write_record([i.to_string(), l.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
