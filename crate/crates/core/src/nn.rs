//! Fully connected networks and their Lipschitz analysis.
//!
//! A layer computes `phi(W x + b)`; an [`Mlp`] chains layers. Parameters are
//! flattened layer by layer, weights (row-major, `out x in`) before biases.
//! That flat order is the parameter registry used by training and
//! checkpoints.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::autodiff::{NodeId, Tape};
use crate::error::{check_dim, Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
    Tanh,
    Identity,
}

impl Activation {
    /// Global Lipschitz constant of the scalar activation.
    pub fn lipschitz_constant(self) -> f64 {
        match self {
            Activation::Relu | Activation::Tanh | Activation::Identity => 1.0,
            Activation::Sigmoid => 0.25,
        }
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => {
                if x >= 0.0 {
                    1.0 / (1.0 + (-x).exp())
                } else {
                    let e = x.exp();
                    e / (1.0 + e)
                }
            }
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    pub fn apply_node(self, tape: &mut Tape, x: NodeId) -> NodeId {
        match self {
            Activation::Relu => tape.relu(x),
            Activation::Sigmoid => tape.sigmoid(x),
            Activation::Tanh => tape.tanh(x),
            Activation::Identity => x,
        }
    }

    /// Whether the activation has a kink at zero (finite differences are
    /// unreliable close to it).
    pub fn has_kink(self) -> bool {
        self == Activation::Relu
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "relu" => Ok(Activation::Relu),
            "sigmoid" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            "identity" | "linear" => Ok(Activation::Identity),
            other => Err(Error::invalid(format!("unknown activation `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    in_dim: usize,
    out_dim: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
    activation: Activation,
}

impl DenseLayer {
    /// `weights` is row-major with one row per output neuron.
    pub fn new(
        in_dim: usize,
        out_dim: usize,
        weights: Vec<f64>,
        biases: Vec<f64>,
        activation: Activation,
    ) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::invalid("layer dimensions must be positive"));
        }
        let expected = in_dim
            .checked_mul(out_dim)
            .ok_or_else(|| Error::invalid("layer dimensions overflow"))?;
        check_dim("layer weights", expected, weights.len())?;
        check_dim("layer biases", out_dim, biases.len())?;
        if weights.iter().chain(&biases).any(|w| !w.is_finite()) {
            return Err(Error::invalid("layer parameters must be finite"));
        }
        Ok(DenseLayer {
            in_dim,
            out_dim,
            weights,
            biases,
            activation,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weight(&self, out: usize, inp: usize) -> f64 {
        self.weights[out * self.in_dim + inp]
    }

    pub fn num_params(&self) -> usize {
        self.weights.len() + self.biases.len()
    }

    fn pre_activation(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for (row, b) in self.weights.chunks_exact(self.in_dim).zip(&self.biases) {
            let mut acc = row[0] * x[0];
            for (w, xi) in row[1..].iter().zip(&x[1..]) {
                acc += w * xi;
            }
            out.push(acc + b);
        }
    }
}

/// Layered dense network.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<DenseLayer>,
}

impl Mlp {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::invalid("an MLP needs at least one layer"));
        }
        for pair in layers.windows(2) {
            check_dim("layer chain", pair[0].out_dim, pair[1].in_dim)?;
        }
        Ok(Mlp { layers })
    }

    /// Glorot-uniform weights, zero biases. Hidden layers use `activation`,
    /// the output layer is linear.
    pub fn init(dims: &[usize], activation: Activation, seed: u64) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::invalid(format!(
                "need at least input and output dims, got {dims:?}"
            )));
        }
        if dims.contains(&0) {
            return Err(Error::invalid(format!(
                "dims must be positive, got {dims:?}"
            )));
        }
        let mut rng = rng::seeded(seed);
        let last = dims.len() - 2;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let weights = (0..fan_in * fan_out)
                    .map(|_| rng.random_range(-limit..=limit))
                    .collect();
                let act = if i == last {
                    Activation::Identity
                } else {
                    activation
                };
                DenseLayer::new(fan_in, fan_out, weights, vec![0.0; fan_out], act)
            })
            .collect::<Result<Vec<_>>>()?;
        Mlp::new(layers)
    }

    pub fn with_output_activation(mut self, activation: Activation) -> Self {
        if let Some(last) = self.layers.last_mut() {
            last.activation = activation;
        }
        self
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.in_dim())
            .chain(self.layers.iter().map(|l| l.out_dim))
            .collect()
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(DenseLayer::num_params).sum()
    }

    pub fn parameters(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            p.extend_from_slice(&l.weights);
            p.extend_from_slice(&l.biases);
        }
        p
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        check_dim("mlp parameters", self.num_params(), params.len())?;
        let mut rest = params;
        for l in &mut self.layers {
            let (w, r) = rest.split_at(l.weights.len());
            let (b, r) = r.split_at(l.biases.len());
            l.weights.copy_from_slice(w);
            l.biases.copy_from_slice(b);
            rest = r;
        }
        Ok(())
    }

    /// Scales every weight (not the biases) by `s`.
    pub fn scale_weights(&mut self, s: f64) {
        for l in &mut self.layers {
            l.weights.iter_mut().for_each(|w| *w *= s);
        }
    }

    /// Plain evaluation without a tape.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("mlp input", self.in_dim(), x.len())?;
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        for l in &self.layers {
            l.pre_activation(&cur, &mut next);
            next.iter_mut().for_each(|v| *v = l.activation.apply(*v));
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Pre-activation values of every layer at `x`.
    pub fn pre_activations(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        check_dim("mlp input", self.in_dim(), x.len())?;
        let mut cur = x.to_vec();
        let mut all = Vec::with_capacity(self.layers.len());
        for l in &self.layers {
            let mut pre = Vec::new();
            l.pre_activation(&cur, &mut pre);
            cur = pre.iter().map(|&v| l.activation.apply(v)).collect();
            all.push(pre);
        }
        Ok(all)
    }

    /// Smallest pre-activation magnitude over ReLU units at `x`; `None` when
    /// the network has no kinked units.
    pub fn min_kink_distance(&self, x: &[f64]) -> Result<Option<f64>> {
        let pres = self.pre_activations(x)?;
        Ok(self
            .layers
            .iter()
            .zip(&pres)
            .filter(|(l, _)| l.activation.has_kink())
            .flat_map(|(_, p)| p.iter().map(|v| v.abs()))
            .reduce(f64::min))
    }

    /// Records the forward pass. `params` are nodes holding this network's
    /// flat parameter vector (either registered parameters or constants).
    pub fn forward(&self, tape: &mut Tape, params: &[NodeId], x: &[NodeId]) -> Result<Vec<NodeId>> {
        check_dim("mlp parameters", self.num_params(), params.len())?;
        check_dim("mlp input", self.in_dim(), x.len())?;
        let mut cur = x.to_vec();
        let mut offset = 0;
        let mut terms = Vec::new();
        for l in &self.layers {
            let w = &params[offset..offset + l.weights.len()];
            let b = &params[offset + l.weights.len()..offset + l.num_params()];
            offset += l.num_params();
            let mut next = Vec::with_capacity(l.out_dim);
            for (j, row) in w.chunks_exact(l.in_dim).enumerate() {
                terms.clear();
                for (&wi, &xi) in row.iter().zip(&cur) {
                    terms.push(tape.mul(wi, xi));
                }
                terms.push(b[j]);
                let pre = tape.sum(&terms);
                next.push(l.activation.apply_node(tape, pre));
            }
            cur = next;
        }
        Ok(cur)
    }

    /// Registers the parameters on `tape` and records the forward pass on
    /// constant inputs.
    pub fn forward_values(&self, tape: &mut Tape, x: &[f64]) -> Result<(Vec<NodeId>, Vec<NodeId>)> {
        let params = tape.param_slice(&self.parameters());
        let xs = tape.constants(x);
        let out = self.forward(tape, &params, &xs)?;
        Ok((params, out))
    }

    /// Upper bound on the Lipschitz constant via the per-neuron recursion
    /// `L(v') <= L(phi) * sum_i |w_i| L(v_i)`, with input neurons at `L = 1`.
    /// The result is the largest bound among the output neurons.
    pub fn lipschitz_upper_bound(&self) -> f64 {
        let mut bounds = vec![1.0; self.in_dim()];
        for l in &self.layers {
            let lphi = l.activation.lipschitz_constant();
            bounds = l
                .weights
                .chunks_exact(l.in_dim)
                .map(|row| {
                    lphi * row
                        .iter()
                        .zip(&bounds)
                        .map(|(w, lv)| w.abs() * lv)
                        .sum::<f64>()
                })
                .collect();
        }
        bounds.into_iter().fold(0.0, f64::max)
    }

    /// Largest Euclidean norm of an input gradient row `grad_x f_k(x)`.
    pub fn input_gradient_norm(&self, x: &[f64], tape: &mut Tape) -> Result<f64> {
        tape.clear();
        let xs = tape.param_slice(x);
        let params = tape.constants(&self.parameters());
        let out = self.forward(tape, &params, &xs)?;
        let mut best = 0.0_f64;
        for o in out {
            let g = tape.backward(o)?;
            let norm = g.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt();
            best = best.max(norm);
        }
        Ok(best)
    }

    /// Maximum input-gradient norm over `n_samples` points drawn uniformly
    /// from the box `bounds` (one interval per input dimension).
    pub fn empirical_lipschitz(
        &self,
        bounds: &[(f64, f64)],
        n_samples: usize,
        seed: u64,
    ) -> Result<f64> {
        check_dim("sample box", self.in_dim(), bounds.len())?;
        if n_samples == 0 {
            return Err(Error::invalid("n_samples must be at least 1"));
        }
        let mut rng = rng::seeded(seed);
        let mut tape = Tape::new();
        let mut x = vec![0.0; bounds.len()];
        let mut best = 0.0_f64;
        for _ in 0..n_samples {
            for (xi, &(lo, hi)) in x.iter_mut().zip(bounds) {
                *xi = if hi > lo {
                    rng.random_range(lo..hi)
                } else {
                    lo
                };
            }
            best = best.max(self.input_gradient_norm(&x, &mut tape)?);
        }
        Ok(best)
    }
}
