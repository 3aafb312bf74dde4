//! Message-passing graph network: WL refinement with a learned, continuous
//! hash, followed by a Deep Set readout.
//!
//! One round computes, for every node,
//! `c'(v) = update(sum_{u in N(v)} encode(c(u)))` over neighbors only (no
//! self loop); an isolated node aggregates the zero vector. The same
//! `encode`/`update` pair is reused for every round. The readout is
//! `readout(sum_v vote(c(v)))`.

use crate::autodiff::{NodeId, Tape};
use crate::error::{check_dim, Error, Result};
use crate::graph::LabeledGraph;
use crate::nn::{Activation, Mlp};
use crate::training::{self, Dataset, Model, TrainConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Gnn {
    encode: Mlp,
    update: Mlp,
    vote: Mlp,
    readout: Mlp,
    rounds: usize,
}

fn dims(first: usize, hidden: &[usize], last: usize) -> Vec<usize> {
    std::iter::once(first)
        .chain(hidden.iter().copied())
        .chain(std::iter::once(last))
        .collect()
}

impl Gnn {
    pub fn new(encode: Mlp, update: Mlp, vote: Mlp, readout: Mlp, rounds: usize) -> Result<Self> {
        let d = encode.in_dim();
        check_dim("gnn encode output", d, encode.out_dim())?;
        check_dim("gnn update input", d, update.in_dim())?;
        check_dim("gnn update output", d, update.out_dim())?;
        check_dim("gnn vote input", d, vote.in_dim())?;
        check_dim("gnn readout input", vote.out_dim(), readout.in_dim())?;
        Ok(Gnn {
            encode,
            update,
            vote,
            readout,
            rounds,
        })
    }

    pub fn init(
        color_dim: usize,
        vote_dim: usize,
        out_dim: usize,
        hidden: &[usize],
        rounds: usize,
        activation: Activation,
        seed: u64,
    ) -> Result<Self> {
        let seeds = [0u64, 1, 2, 3].map(|i| seed.wrapping_mul(4).wrapping_add(i));
        Gnn::new(
            Mlp::init(&dims(color_dim, hidden, color_dim), activation, seeds[0])?,
            Mlp::init(&dims(color_dim, hidden, color_dim), activation, seeds[1])?,
            Mlp::init(&dims(color_dim, hidden, vote_dim), activation, seeds[2])?,
            Mlp::init(&dims(vote_dim, hidden, out_dim), activation, seeds[3])?,
            rounds,
        )
    }

    pub fn color_dim(&self) -> usize {
        self.encode.in_dim()
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn with_rounds(mut self, rounds: usize) -> Self {
        self.rounds = rounds;
        self
    }

    pub fn encode(&self) -> &Mlp {
        &self.encode
    }

    pub fn update(&self) -> &Mlp {
        &self.update
    }

    pub fn vote(&self) -> &Mlp {
        &self.vote
    }

    pub fn readout(&self) -> &Mlp {
        &self.readout
    }

    pub fn out_dim(&self) -> usize {
        self.readout.out_dim()
    }

    pub fn num_params(&self) -> usize {
        self.parts().iter().map(|m| m.num_params()).sum()
    }

    fn parts(&self) -> [&Mlp; 4] {
        [&self.encode, &self.update, &self.vote, &self.readout]
    }

    /// Node labels zero-padded to the color dimension. Unlabeled graphs start
    /// from the uniform color `(1, 0, .., 0)`.
    pub fn initial_colors(&self, g: &LabeledGraph) -> Result<Vec<Vec<f64>>> {
        let d = self.color_dim();
        match g.labels() {
            None => {
                let mut c = vec![0.0; d];
                c[0] = 1.0;
                Ok(vec![c; g.n()])
            }
            Some(labels) => {
                if g.label_dim() > d {
                    return Err(Error::Dimension {
                        context: "node labels (at most the color dimension)",
                        expected: d,
                        got: g.label_dim(),
                    });
                }
                Ok(labels
                    .iter()
                    .map(|row| {
                        let mut c = row.clone();
                        c.resize(d, 0.0);
                        c
                    })
                    .collect())
            }
        }
    }

    fn check_colors(
        &self,
        g: &LabeledGraph,
        n_rows: usize,
        row_lens: impl Iterator<Item = usize>,
    ) -> Result<()> {
        check_dim("color rows", g.n(), n_rows)?;
        for len in row_lens {
            check_dim("color width", self.color_dim(), len)?;
        }
        Ok(())
    }

    /// One round of message passing on plain values.
    pub fn message_pass(&self, g: &LabeledGraph, colors: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        self.check_colors(g, colors.len(), colors.iter().map(Vec::len))?;
        let encoded = colors
            .iter()
            .map(|c| self.encode.eval(c))
            .collect::<Result<Vec<_>>>()?;
        (0..g.n())
            .map(|v| {
                let nb = g.neighbors(v);
                let agg = match nb.split_first() {
                    None => vec![0.0; self.color_dim()],
                    Some((&first, rest)) => {
                        let mut acc = encoded[first].clone();
                        for &u in rest {
                            acc.iter_mut().zip(&encoded[u]).for_each(|(a, e)| *a += e);
                        }
                        acc
                    }
                };
                self.update.eval(&agg)
            })
            .collect()
    }

    /// Node colors after all rounds.
    pub fn node_colors(&self, g: &LabeledGraph) -> Result<Vec<Vec<f64>>> {
        let mut colors = self.initial_colors(g)?;
        for _ in 0..self.rounds {
            colors = self.message_pass(g, &colors)?;
        }
        Ok(colors)
    }

    pub fn eval(&self, g: &LabeledGraph) -> Result<Vec<f64>> {
        let colors = self.node_colors(g)?;
        let mut pooled: Option<Vec<f64>> = None;
        for c in &colors {
            let v = self.vote.eval(c)?;
            match &mut pooled {
                None => pooled = Some(v),
                Some(acc) => acc.iter_mut().zip(&v).for_each(|(a, x)| *a += x),
            }
        }
        let pooled = pooled.unwrap_or_else(|| vec![0.0; self.vote.out_dim()]);
        self.readout.eval(&pooled)
    }

    fn split_params<'a>(&self, params: &'a [NodeId]) -> Result<[&'a [NodeId]; 4]> {
        check_dim("gnn parameters", self.num_params(), params.len())?;
        let mut rest = params;
        let mut out: [&[NodeId]; 4] = [&[]; 4];
        for (slot, m) in out.iter_mut().zip(self.parts()) {
            let (a, b) = rest.split_at(m.num_params());
            *slot = a;
            rest = b;
        }
        Ok(out)
    }

    /// One recorded round; `params` covers the whole network.
    pub fn message_pass_nodes(
        &self,
        tape: &mut Tape,
        params: &[NodeId],
        g: &LabeledGraph,
        colors: &[Vec<NodeId>],
    ) -> Result<Vec<Vec<NodeId>>> {
        let [enc_p, upd_p, _, _] = self.split_params(params)?;
        self.check_colors(g, colors.len(), colors.iter().map(Vec::len))?;
        let encoded = colors
            .iter()
            .map(|c| self.encode.forward(tape, enc_p, c))
            .collect::<Result<Vec<_>>>()?;
        let d = self.color_dim();
        let mut terms = Vec::new();
        let mut out = Vec::with_capacity(g.n());
        for v in 0..g.n() {
            let nb = g.neighbors(v);
            let agg: Vec<NodeId> = if nb.is_empty() {
                (0..d).map(|_| tape.constant(0.0)).collect()
            } else {
                (0..d)
                    .map(|k| {
                        terms.clear();
                        terms.extend(nb.iter().map(|&u| encoded[u][k]));
                        tape.sum(&terms)
                    })
                    .collect()
            };
            out.push(self.update.forward(tape, upd_p, &agg)?);
        }
        Ok(out)
    }

    pub fn train(
        &self,
        data: &Dataset<LabeledGraph>,
        cfg: &TrainConfig,
    ) -> Result<(Gnn, Vec<f64>)> {
        training::train(self, data, cfg)
    }
}

impl Model for Gnn {
    type Input = LabeledGraph;

    fn parameters(&self) -> Vec<f64> {
        self.parts().iter().flat_map(|m| m.parameters()).collect()
    }

    fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        check_dim("gnn parameters", self.num_params(), params.len())?;
        let mut rest = params;
        for m in [
            &mut self.encode,
            &mut self.update,
            &mut self.vote,
            &mut self.readout,
        ] {
            let (a, b) = rest.split_at(m.num_params());
            m.set_parameters(a)?;
            rest = b;
        }
        Ok(())
    }

    fn forward(&self, tape: &mut Tape, params: &[NodeId], g: &LabeledGraph) -> Result<Vec<NodeId>> {
        let [_, _, vote_p, read_p] = self.split_params(params)?;
        let mut colors: Vec<Vec<NodeId>> = self
            .initial_colors(g)?
            .iter()
            .map(|c| tape.constants(c))
            .collect();
        for _ in 0..self.rounds {
            colors = self.message_pass_nodes(tape, params, g, &colors)?;
        }
        let votes = colors
            .iter()
            .map(|c| self.vote.forward(tape, vote_p, c))
            .collect::<Result<Vec<_>>>()?;
        let pooled: Vec<NodeId> = (0..self.vote.out_dim())
            .map(|k| {
                if votes.is_empty() {
                    tape.constant(0.0)
                } else {
                    let terms: Vec<NodeId> = votes.iter().map(|v| v[k]).collect();
                    tape.sum(&terms)
                }
            })
            .collect();
        self.readout.forward(tape, read_p, &pooled)
    }

    fn predict(&self, g: &LabeledGraph) -> Result<Vec<f64>> {
        self.eval(g)
    }
}
