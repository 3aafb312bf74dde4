#![allow(dead_code)]

use gdl_core::autodiff::{analytic_gradient, finite_diff_check, numeric_gradient, NodeId, Tape};
use gdl_core::deepsets::DeepSet;
use gdl_core::gnn::Gnn;
use gdl_core::graph::{cycle, disjoint_union, random_graph, LabeledGraph};
use gdl_core::nn::{Activation, Mlp};
use gdl_core::rng::{self, Rng};
use gdl_core::training::Model;
use gdl_core::Error;
use rand::Rng as _;

pub const FD_STEP: f64 = 1e-5;
/// Pre-activations closer than this to a kink are resampled.
pub const KINK_MARGIN: f64 = 1e-3;

/// Gradient magnitude below which central differences are dominated by
/// rounding, so relative errors are measured against this floor instead.
pub const GRAD_FLOOR: f64 = 1e-6;

pub const ACTIVATIONS: [Activation; 4] = [
    Activation::Relu,
    Activation::Sigmoid,
    Activation::Tanh,
    Activation::Identity,
];
pub const SMOOTH: [Activation; 3] = [Activation::Sigmoid, Activation::Tanh, Activation::Identity];

pub fn pick<T: Copy>(r: &mut Rng, xs: &[T]) -> T {
    xs[r.random_range(0..xs.len())]
}

pub fn vector(r: &mut Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| r.random_range(-scale..scale)).collect()
}

/// `1..=max_depth` dense layers of width at most `max_width` with an
/// activation drawn from `acts`. Biases are randomized too.
pub fn random_mlp(r: &mut Rng, max_depth: usize, max_width: usize, acts: &[Activation]) -> Mlp {
    let depth = r.random_range(1..=max_depth);
    let act = pick(r, acts);
    let mut dims = vec![r.random_range(1..=max_width)];
    for _ in 0..depth {
        dims.push(r.random_range(1..=max_width));
    }
    let mut m = Mlp::init(&dims, act, r.random()).unwrap();
    let p: Vec<f64> = m
        .parameters()
        .iter()
        .map(|w| w + r.random_range(-0.3..0.3))
        .collect();
    m.set_parameters(&p).unwrap();
    m
}

fn scalarized<'a, M: Model>(
    model: &'a M,
    input: &'a M::Input,
    coeffs: &'a [f64],
) -> impl FnMut(&mut Tape, &[NodeId]) -> Result<NodeId, Error> + 'a {
    move |tape, params| {
        let out = model.forward(tape, params, input)?;
        let terms: Vec<_> = out
            .iter()
            .zip(coeffs)
            .map(|(&o, &c)| tape.scale(o, c))
            .collect();
        Ok(tape.sum(&terms))
    }
}

/// Max relative error between reverse-mode and central differences of
/// `sum_k c_k f_k(input)` with respect to all parameters.
pub fn model_gradient_error<M: Model>(model: &M, input: &M::Input, coeffs: &[f64]) -> f64 {
    finite_diff_check(
        scalarized(model, input, coeffs),
        &model.parameters(),
        FD_STEP,
    )
    .unwrap()
}

/// Like [`model_gradient_error`] but relative to `max(|g|, GRAD_FLOOR)`.
pub fn model_gradient_mismatch<M: Model>(model: &M, input: &M::Input, coeffs: &[f64]) -> f64 {
    let mut f = scalarized(model, input, coeffs);
    let p = model.parameters();
    let numeric = numeric_gradient(&mut f, &p, FD_STEP).unwrap();
    let analytic = analytic_gradient(&mut f, &p).unwrap();
    analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(GRAD_FLOOR))
        .fold(0.0, f64::max)
}

pub fn random_deepset(r: &mut Rng, acts: &[Activation]) -> DeepSet {
    let act = pick(r, acts);
    let hidden: Vec<usize> = (0..r.random_range(0..=1))
        .map(|_| r.random_range(1..=6))
        .collect();
    DeepSet::init(
        r.random_range(1..=3),
        r.random_range(1..=4),
        &hidden,
        r.random_range(1..=2),
        act,
        r.random(),
    )
    .unwrap()
}

pub fn random_set(r: &mut Rng, elem_dim: usize, max_len: usize) -> Vec<Vec<f64>> {
    (0..r.random_range(1..=max_len))
        .map(|_| vector(r, elem_dim, 2.0))
        .collect()
}

pub fn random_gnn(r: &mut Rng, color_dim: usize, max_rounds: usize, acts: &[Activation]) -> Gnn {
    let act = pick(r, acts);
    let hidden: Vec<usize> = (0..r.random_range(0..=1))
        .map(|_| r.random_range(1..=5))
        .collect();
    Gnn::init(
        color_dim,
        r.random_range(1..=3),
        r.random_range(1..=2),
        &hidden,
        r.random_range(1..=max_rounds),
        act,
        r.random(),
    )
    .unwrap()
}

/// Random graph on `1..=max_n` nodes with labels of width
/// `0..=max_label_dim` (unlabeled when zero).
pub fn random_labeled_graph(r: &mut Rng, max_n: usize, max_label_dim: usize) -> LabeledGraph {
    let label_dim = r.random_range(0..=max_label_dim);
    let n = r.random_range(1..=max_n);
    let p = r.random_range(0.0..1.0);
    let g = random_graph(n, p, r.random()).unwrap();
    if label_dim == 0 {
        return g;
    }
    let labels = (0..n).map(|_| vector(r, label_dim, 1.0)).collect();
    g.with_labels(labels).unwrap()
}

/// The six-cycle and two disjoint triangles.
pub fn c6_and_two_triangles() -> (LabeledGraph, LabeledGraph) {
    let c3 = cycle(3).unwrap();
    (cycle(6).unwrap(), disjoint_union(&c3, &c3).unwrap())
}

pub fn seeded(seed: u64) -> Rng {
    rng::seeded(seed)
}
