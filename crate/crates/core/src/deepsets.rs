//! Deep Sets: `f({x_1..x_n}) = rho(sum_p phi(x_p))`.
//!
//! The element encoder `phi` and the aggregate network `rho` are plain
//! [`Mlp`]s. Aggregation is a sum in input order, so outputs are invariant
//! under reordering up to floating-point reassociation.

use crate::autodiff::{NodeId, Tape};
use crate::error::{check_dim, Error, Result};
use crate::nn::{Activation, Mlp};
use crate::training::{self, Dataset, Model, TrainConfig};

pub const DEFAULT_LATENT_DIM: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct DeepSet {
    phi: Mlp,
    rho: Mlp,
}

impl DeepSet {
    pub fn new(phi: Mlp, rho: Mlp) -> Result<Self> {
        check_dim("deep set latent", phi.out_dim(), rho.in_dim())?;
        Ok(DeepSet { phi, rho })
    }

    /// `phi: elem_dim -> hidden.. -> latent`, `rho: latent -> hidden.. -> out_dim`.
    pub fn init(
        elem_dim: usize,
        latent_dim: usize,
        hidden: &[usize],
        out_dim: usize,
        activation: Activation,
        seed: u64,
    ) -> Result<Self> {
        let phi_dims: Vec<usize> = std::iter::once(elem_dim)
            .chain(hidden.iter().copied())
            .chain(std::iter::once(latent_dim))
            .collect();
        let rho_dims: Vec<usize> = std::iter::once(latent_dim)
            .chain(hidden.iter().copied())
            .chain(std::iter::once(out_dim))
            .collect();
        let phi = Mlp::init(&phi_dims, activation, seed)?;
        let rho = Mlp::init(&rho_dims, activation, seed ^ 0x9e37_79b9_7f4a_7c15)?;
        DeepSet::new(phi, rho)
    }

    pub fn phi(&self) -> &Mlp {
        &self.phi
    }

    pub fn rho(&self) -> &Mlp {
        &self.rho
    }

    pub fn latent_dim(&self) -> usize {
        self.phi.out_dim()
    }

    pub fn elem_dim(&self) -> usize {
        self.phi.in_dim()
    }

    pub fn num_params(&self) -> usize {
        self.phi.num_params() + self.rho.num_params()
    }

    fn check_set(&self, elements: &[Vec<f64>]) -> Result<()> {
        if elements.is_empty() {
            return Err(Error::invalid("deep sets are undefined on the empty set"));
        }
        for e in elements {
            check_dim("set element", self.elem_dim(), e.len())?;
        }
        Ok(())
    }

    /// Sum of `phi` over the elements.
    pub fn embed(&self, elements: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.check_set(elements)?;
        let mut acc = self.phi.eval(&elements[0])?;
        for e in &elements[1..] {
            for (a, v) in acc.iter_mut().zip(self.phi.eval(e)?) {
                *a += v;
            }
        }
        Ok(acc)
    }

    pub fn eval(&self, elements: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.rho.eval(&self.embed(elements)?)
    }

    pub fn train(
        &self,
        data: &Dataset<Vec<Vec<f64>>>,
        cfg: &TrainConfig,
    ) -> Result<(DeepSet, Vec<f64>)> {
        training::train(self, data, cfg)
    }
}

impl Model for DeepSet {
    type Input = Vec<Vec<f64>>;

    fn parameters(&self) -> Vec<f64> {
        let mut p = self.phi.parameters();
        p.extend(self.rho.parameters());
        p
    }

    fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        check_dim("deep set parameters", self.num_params(), params.len())?;
        let (a, b) = params.split_at(self.phi.num_params());
        self.phi.set_parameters(a)?;
        self.rho.set_parameters(b)
    }

    fn forward(
        &self,
        tape: &mut Tape,
        params: &[NodeId],
        elements: &Vec<Vec<f64>>,
    ) -> Result<Vec<NodeId>> {
        check_dim("deep set parameters", self.num_params(), params.len())?;
        self.check_set(elements)?;
        let (phi_p, rho_p) = params.split_at(self.phi.num_params());
        let mut per_dim: Vec<Vec<NodeId>> =
            vec![Vec::with_capacity(elements.len()); self.latent_dim()];
        for e in elements {
            let x = tape.constants(e);
            let z = self.phi.forward(tape, phi_p, &x)?;
            for (slot, node) in per_dim.iter_mut().zip(z) {
                slot.push(node);
            }
        }
        let pooled: Vec<NodeId> = per_dim.iter().map(|terms| tape.sum(terms)).collect();
        self.rho.forward(tape, rho_p, &pooled)
    }

    fn predict(&self, input: &Vec<Vec<f64>>) -> Result<Vec<f64>> {
        self.eval(input)
    }
}
