//! Weisfeiler-Lehman color refinement and a brute-force isomorphism oracle.
//!
//! Colors are canonical: every round keys each node by
//! `(own color, sorted neighbor colors)`, sorts the distinct keys and numbers
//! them `0..k` in that order. Because the numbering depends only on the set
//! of keys, two graphs whose key multisets agree round by round receive the
//! same colors, and the per-round key multisets form a signature that can be
//! compared across graphs and processes.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::LabeledGraph;

/// Largest graph the brute-force oracle accepts.
pub const MAX_ORACLE_NODES: usize = 9;

/// Real labels are rounded to this many decimals to form initial colors.
pub const LABEL_DECIMALS: i32 = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WlColoring {
    pub colors: Vec<usize>,
    pub round: usize,
}

impl WlColoring {
    pub fn num_colors(&self) -> usize {
        self.colors.iter().collect::<BTreeSet<_>>().len()
    }

    /// Sorted class sizes of the partition.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut counts = vec![0; self.colors.iter().max().map_or(0, |m| m + 1)];
        for &c in &self.colors {
            counts[c] += 1;
        }
        counts.retain(|&c| c > 0);
        counts.sort_unstable();
        counts
    }
}

type RefineKey = (usize, Vec<usize>);

/// Canonical fingerprint of a graph's refinement history.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WlSignature {
    pub n: usize,
    /// Sorted initial color keys (bucketed labels).
    pub initial: Vec<Vec<i128>>,
    /// Sorted refinement keys of every round until the partition is stable.
    pub rounds: Vec<Vec<RefineKey>>,
    /// Sorted multiset of stable colors.
    pub colors: Vec<usize>,
}

impl WlSignature {
    pub fn stable_round(&self) -> usize {
        self.rounds.len()
    }
}

fn label_key(row: &[f64]) -> Vec<i128> {
    let scale = 10f64.powi(LABEL_DECIMALS);
    row.iter().map(|v| (v * scale).round() as i128).collect()
}

fn canonical_colors<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let distinct: Vec<&K> = keys.iter().collect::<BTreeSet<_>>().into_iter().collect();
    keys.iter()
        .map(|k| distinct.binary_search(&k).expect("key present"))
        .collect()
}

fn sorted<K: Ord + Clone>(keys: &[K]) -> Vec<K> {
    let mut v = keys.to_vec();
    v.sort();
    v
}

fn initial_keys(g: &LabeledGraph) -> Vec<Vec<i128>> {
    match g.labels() {
        Some(labels) => labels.iter().map(|row| label_key(row)).collect(),
        None => vec![Vec::new(); g.n()],
    }
}

/// Round-0 coloring: uniform for unlabeled graphs, bucketed labels otherwise.
pub fn initial_coloring(g: &LabeledGraph) -> WlColoring {
    WlColoring {
        colors: canonical_colors(&initial_keys(g)),
        round: 0,
    }
}

fn refine_keys(g: &LabeledGraph, coloring: &WlColoring) -> Vec<RefineKey> {
    (0..g.n())
        .map(|v| {
            let mut nb: Vec<usize> = g.neighbors(v).iter().map(|&u| coloring.colors[u]).collect();
            nb.sort_unstable();
            (coloring.colors[v], nb)
        })
        .collect()
}

/// One refinement round.
pub fn refine_step(g: &LabeledGraph, coloring: &WlColoring) -> Result<WlColoring> {
    if coloring.colors.len() != g.n() {
        return Err(Error::Dimension {
            context: "coloring",
            expected: g.n(),
            got: coloring.colors.len(),
        });
    }
    Ok(WlColoring {
        colors: canonical_colors(&refine_keys(g, coloring)),
        round: coloring.round + 1,
    })
}

/// Colorings of every round from the initial one up to the first stable
/// round (at most `n` refinements).
pub fn refinement_history(g: &LabeledGraph) -> Vec<WlColoring> {
    let mut history = vec![initial_coloring(g)];
    for _ in 0..g.n() {
        let cur = history.last().expect("non-empty");
        let next = WlColoring {
            colors: canonical_colors(&refine_keys(g, cur)),
            round: cur.round + 1,
        };
        let stable = next.num_colors() == cur.num_colors();
        history.push(next);
        if stable {
            break;
        }
    }
    history
}

pub fn wl_signature(g: &LabeledGraph) -> WlSignature {
    let init = initial_keys(g);
    let mut coloring = WlColoring {
        colors: canonical_colors(&init),
        round: 0,
    };
    let mut rounds = Vec::new();
    for _ in 0..g.n() {
        let keys = refine_keys(g, &coloring);
        let next = WlColoring {
            colors: canonical_colors(&keys),
            round: coloring.round + 1,
        };
        rounds.push(sorted(&keys));
        let stable = next.num_colors() == coloring.num_colors();
        coloring = next;
        if stable {
            break;
        }
    }
    WlSignature {
        n: g.n(),
        initial: sorted(&init),
        rounds,
        colors: sorted(&coloring.colors),
    }
}

/// Equal WL signatures: necessary for isomorphism, not sufficient.
pub fn wl_equivalent(a: &LabeledGraph, b: &LabeledGraph) -> bool {
    a.n() == b.n() && wl_signature(a) == wl_signature(b)
}

/// Exact isomorphism by backtracking over node bijections. Labels must match
/// bit for bit.
pub fn brute_force_isomorphic(a: &LabeledGraph, b: &LabeledGraph) -> Result<bool> {
    for g in [a, b] {
        if g.n() > MAX_ORACLE_NODES {
            return Err(Error::SizeLimit {
                what: "brute-force isomorphism node count",
                limit: MAX_ORACLE_NODES,
                got: g.n(),
            });
        }
    }
    let n = a.n();
    if n != b.n() || a.num_edges() != b.num_edges() || a.labels().is_some() != b.labels().is_some()
    {
        return Ok(false);
    }
    let mut da: Vec<usize> = (0..n).map(|v| a.degree(v)).collect();
    let mut db: Vec<usize> = (0..n).map(|v| b.degree(v)).collect();
    da.sort_unstable();
    db.sort_unstable();
    if da != db {
        return Ok(false);
    }
    let compatible = |u: usize, v: usize| -> bool {
        a.degree(u) == b.degree(v)
            && match (a.labels(), b.labels()) {
                (Some(la), Some(lb)) => {
                    la[u].len() == lb[v].len()
                        && la[u]
                            .iter()
                            .zip(&lb[v])
                            .all(|(x, y)| x.to_bits() == y.to_bits())
                }
                _ => true,
            }
    };
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    Ok(extend(a, b, 0, &mut map, &mut used, &compatible))
}

fn extend(
    a: &LabeledGraph,
    b: &LabeledGraph,
    u: usize,
    map: &mut [usize],
    used: &mut [bool],
    compatible: &dyn Fn(usize, usize) -> bool,
) -> bool {
    if u == a.n() {
        return true;
    }
    for v in 0..b.n() {
        if used[v] || !compatible(u, v) {
            continue;
        }
        if (0..u).any(|w| a.has_edge(u, w) != b.has_edge(v, map[w])) {
            continue;
        }
        map[u] = v;
        used[v] = true;
        if extend(a, b, u + 1, map, used, compatible) {
            return true;
        }
        used[v] = false;
    }
    map[u] = usize::MAX;
    false
}
