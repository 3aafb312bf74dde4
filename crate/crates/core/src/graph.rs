//! Undirected, optionally node-labeled simple graphs, generators and the
//! plain-text graph file format.
//!
//! File format:
//!
//! ```text
//! n m
//! u v        # m lines, 0-based undirected edges
//! labels     # optional section
//! l_00 l_01 .. l_0d
//! ..         # n rows of d reals
//! ```
//!
//! Blank lines and `#` comments are ignored. Self loops, duplicate edges and
//! out-of-range endpoints are rejected.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng;

/// Largest node count accepted by the parser and generators.
pub const MAX_NODES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledGraph {
    neighbors: Vec<Vec<usize>>,
    labels: Option<Vec<Vec<f64>>>,
}

fn check_labels(n: usize, labels: &[Vec<f64>]) -> Result<()> {
    if labels.len() != n {
        return Err(Error::Dimension {
            context: "label rows",
            expected: n,
            got: labels.len(),
        });
    }
    let d = labels.first().map_or(0, Vec::len);
    if n > 0 && d == 0 {
        return Err(Error::invalid("label rows must be non-empty"));
    }
    for row in labels {
        if row.len() != d {
            return Err(Error::Dimension {
                context: "label row",
                expected: d,
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("labels must be finite"));
        }
    }
    Ok(())
}

impl LabeledGraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n > MAX_NODES {
            return Err(Error::SizeLimit {
                what: "node count",
                limit: MAX_NODES,
                got: n,
            });
        }
        let mut neighbors = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) out of range for {n} nodes"
                )));
            }
            if u == v {
                return Err(Error::invalid(format!("self loop at node {u}")));
            }
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        for (v, list) in neighbors.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::invalid(format!("duplicate edge at node {v}")));
            }
        }
        Ok(LabeledGraph {
            neighbors,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<Vec<f64>>) -> Result<Self> {
        check_labels(self.n(), &labels)?;
        self.labels = Some(labels);
        Ok(self)
    }

    /// Every node labeled with the same one-dimensional value.
    pub fn with_uniform_labels(self, value: f64) -> Result<Self> {
        let n = self.n();
        self.with_labels(vec![vec![value]; n])
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }

    pub fn n(&self) -> usize {
        self.neighbors.len()
    }

    pub fn num_edges(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.neighbors[u].binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
            .collect()
    }

    pub fn labels(&self) -> Option<&[Vec<f64>]> {
        self.labels.as_deref()
    }

    pub fn label_dim(&self) -> usize {
        self.labels
            .as_ref()
            .and_then(|l| l.first())
            .map_or(0, Vec::len)
    }

    /// Symmetric boolean adjacency matrix, row-major.
    pub fn adjacency(&self) -> Vec<bool> {
        let n = self.n();
        let mut a = vec![false; n * n];
        for (u, list) in self.neighbors.iter().enumerate() {
            for &v in list {
                a[u * n + v] = true;
            }
        }
        a
    }

    pub fn to_text(&self) -> String {
        let edges = self.edges();
        let mut s = format!("{} {}\n", self.n(), edges.len());
        for (u, v) in edges {
            let _ = writeln!(s, "{u} {v}");
        }
        if let Some(labels) = &self.labels {
            s.push_str("labels\n");
            for row in labels {
                let cells: Vec<String> = row.iter().map(f64::to_string).collect();
                s.push_str(&cells.join(" "));
                s.push('\n');
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (hl, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing `n m` header"))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 2 {
            return Err(Error::parse(hl, "header must be `n m`"));
        }
        let n = parse_count(hl, head[0])?;
        let m = parse_count(hl, head[1])?;
        if n > MAX_NODES {
            return Err(Error::parse(
                hl,
                format!("node count {n} exceeds {MAX_NODES}"),
            ));
        }
        if n < 2 && m > 0 || n >= 2 && m > n * (n - 1) / 2 {
            return Err(Error::parse(
                hl,
                format!("{m} edges cannot fit in a simple graph on {n} nodes"),
            ));
        }

        let mut edges = Vec::with_capacity(m);
        let mut seen = std::collections::HashSet::with_capacity(m);
        for _ in 0..m {
            let (ln, line) = lines.next().ok_or_else(|| {
                Error::parse(hl, format!("expected {m} edges, found {}", edges.len()))
            })?;
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(Error::parse(ln, "edge line must be `u v`"));
            }
            let u = parse_count(ln, parts[0])?;
            let v = parse_count(ln, parts[1])?;
            if u >= n || v >= n {
                return Err(Error::parse(
                    ln,
                    format!("node index out of range for n = {n}"),
                ));
            }
            if u == v {
                return Err(Error::parse(ln, format!("self loop at node {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::parse(ln, format!("duplicate edge ({u}, {v})")));
            }
            edges.push((u, v));
        }
        let graph =
            LabeledGraph::from_edges(n, &edges).map_err(|e| Error::parse(hl, e.to_string()))?;

        let Some((ll, marker)) = lines.next() else {
            return Ok(graph);
        };
        if marker != "labels" {
            return Err(Error::parse(
                ll,
                format!("expected `labels` or end of file, got `{marker}`"),
            ));
        }
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let (ln, line) = lines.next().ok_or_else(|| {
                Error::parse(ll, format!("expected {n} label rows, found {}", rows.len()))
            })?;
            let row = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::parse(ln, format!("invalid label value `{t}`")))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(Error::parse(ln, "trailing content after label rows"));
        }
        graph
            .with_labels(rows)
            .map_err(|e| Error::parse(ll, e.to_string()))
    }
}

impl FromStr for LabeledGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LabeledGraph::parse(s)
    }
}

fn parse_count(line: usize, tok: &str) -> Result<usize> {
    tok.parse::<usize>().map_err(|_| {
        Error::parse(
            line,
            format!("expected a non-negative integer, got `{tok}`"),
        )
    })
}

pub fn cycle(n: usize) -> Result<LabeledGraph> {
    if n < 3 {
        return Err(Error::invalid("a simple cycle needs at least 3 nodes"));
    }
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    LabeledGraph::from_edges(n, &edges)
}

pub fn path(n: usize) -> Result<LabeledGraph> {
    if n == 0 {
        return Err(Error::invalid("a path needs at least 1 node"));
    }
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    LabeledGraph::from_edges(n, &edges)
}

/// Star with node 0 as the center and `leaves` leaves (`leaves + 1` nodes).
pub fn star(leaves: usize) -> Result<LabeledGraph> {
    if leaves == 0 {
        return Err(Error::invalid("a star needs at least 1 leaf"));
    }
    let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
    LabeledGraph::from_edges(leaves + 1, &edges)
}

/// Nodes of `b` are numbered after those of `a`. Both graphs must be
/// labeled with the same dimension, or both unlabeled.
pub fn disjoint_union(a: &LabeledGraph, b: &LabeledGraph) -> Result<LabeledGraph> {
    let off = a.n();
    let edges: Vec<_> = a
        .edges()
        .into_iter()
        .chain(b.edges().into_iter().map(|(u, v)| (u + off, v + off)))
        .collect();
    let g = LabeledGraph::from_edges(a.n() + b.n(), &edges)?;
    match (a.labels(), b.labels()) {
        (None, None) => Ok(g),
        (Some(la), Some(lb)) => g.with_labels(la.iter().chain(lb).cloned().collect()),
        _ => Err(Error::invalid(
            "cannot union a labeled with an unlabeled graph",
        )),
    }
}

/// Erdős–Rényi `G(n, p)`.
pub fn random_graph(n: usize, edge_prob: f64, seed: u64) -> Result<LabeledGraph> {
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::invalid(format!(
            "edge probability {edge_prob} outside [0, 1]"
        )));
    }
    let mut rng = rng::seeded(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < edge_prob {
                edges.push((u, v));
            }
        }
    }
    LabeledGraph::from_edges(n, &edges)
}

/// Relabels node `i` as `perm[i]`: adjacency is conjugated and label rows
/// move with their nodes.
pub fn permute_graph(g: &LabeledGraph, perm: &[usize]) -> Result<LabeledGraph> {
    let n = g.n();
    if perm.len() != n {
        return Err(Error::Dimension {
            context: "permutation",
            expected: n,
            got: perm.len(),
        });
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::invalid(format!(
                "{perm:?} is not a permutation of 0..{n}"
            )));
        }
    }
    let edges: Vec<_> = g
        .edges()
        .into_iter()
        .map(|(u, v)| (perm[u], perm[v]))
        .collect();
    let out = LabeledGraph::from_edges(n, &edges)?;
    match g.labels() {
        None => Ok(out),
        Some(labels) => {
            let mut moved = vec![Vec::new(); n];
            for (i, row) in labels.iter().enumerate() {
                moved[perm[i]] = row.clone();
            }
            out.with_labels(moved)
        }
    }
}

pub fn random_permutation(n: usize, rng: &mut rng::Rng) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}
