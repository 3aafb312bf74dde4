//! Finite group actions on real vectors: orbits, orbit sums, symmetrization
//! by orbit averaging, quotient distances and invariance/equivariance checks.
//!
//! Three actions are provided. `FullPermutation(n)` and `CyclicShift(n)`
//! permute coordinates; `PeriodicTranslation` shifts every coordinate by a
//! multiple `k * period` and is truncated to `k` in `[-window, window]`.
//! Elements are enumerated in a fixed canonical order so that every sum over
//! the group is reproducible bit for bit.

use std::io::Write;

use itertools::Itertools;

use crate::error::{check_dim, Error, Result};

/// Largest `n` for which `FullPermutation(n)` may be enumerated.
pub const MAX_ENUMERATED_PERMUTATION: usize = 8;

/// Members closer than this (max-abs) are the same orbit point.
pub const ORBIT_DEDUP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum GroupAction {
    FullPermutation(usize),
    CyclicShift(usize),
    PeriodicTranslation { period: f64, window: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum GroupElement {
    /// Moves coordinate `i` to position `perm[i]`.
    Permutation(Vec<usize>),
    /// Adds `steps * period` to every coordinate.
    Translation { steps: i64, period: f64 },
}

impl GroupElement {
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            GroupElement::Permutation(p) => {
                check_dim("group element", p.len(), x.len())?;
                let mut out = vec![0.0; x.len()];
                for (i, &v) in x.iter().enumerate() {
                    out[p[i]] = v;
                }
                Ok(out)
            }
            GroupElement::Translation { steps, period } => {
                let shift = *steps as f64 * period;
                Ok(x.iter().map(|v| v + shift).collect())
            }
        }
    }

    pub fn inverse(&self) -> GroupElement {
        match self {
            GroupElement::Permutation(p) => {
                let mut inv = vec![0; p.len()];
                for (i, &j) in p.iter().enumerate() {
                    inv[j] = i;
                }
                GroupElement::Permutation(inv)
            }
            GroupElement::Translation { steps, period } => GroupElement::Translation {
                steps: -steps,
                period: *period,
            },
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        match (self, other) {
            (GroupElement::Permutation(a), GroupElement::Permutation(b)) => {
                check_dim("composition", a.len(), b.len())?;
                Ok(GroupElement::Permutation(b.iter().map(|&i| a[i]).collect()))
            }
            (
                GroupElement::Translation {
                    steps: a,
                    period: p,
                },
                GroupElement::Translation {
                    steps: b,
                    period: q,
                },
            ) if p == q => Ok(GroupElement::Translation {
                steps: a + b,
                period: *p,
            }),
            _ => Err(Error::invalid(
                "cannot compose elements of different actions",
            )),
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            GroupElement::Permutation(p) => p.iter().enumerate().all(|(i, &j)| i == j),
            GroupElement::Translation { steps, .. } => *steps == 0,
        }
    }
}

impl GroupAction {
    pub fn full_permutation(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("permutation group needs n >= 1"));
        }
        if n > MAX_ENUMERATED_PERMUTATION {
            return Err(Error::SizeLimit {
                what: "enumerated permutation group size n",
                limit: MAX_ENUMERATED_PERMUTATION,
                got: n,
            });
        }
        Ok(GroupAction::FullPermutation(n))
    }

    pub fn cyclic_shift(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("cyclic group needs n >= 1"));
        }
        Ok(GroupAction::CyclicShift(n))
    }

    pub fn periodic_translation(period: f64, window: usize) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::invalid(format!(
                "period must be positive, got {period}"
            )));
        }
        Ok(GroupAction::PeriodicTranslation { period, window })
    }

    /// Input dimension the action is defined on; translations act on any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            GroupAction::FullPermutation(n) | GroupAction::CyclicShift(n) => Some(*n),
            GroupAction::PeriodicTranslation { .. } => None,
        }
    }

    pub fn order(&self) -> usize {
        match self {
            GroupAction::FullPermutation(n) => (1..=*n).product(),
            GroupAction::CyclicShift(n) => *n,
            GroupAction::PeriodicTranslation { window, .. } => 2 * window + 1,
        }
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            GroupAction::FullPermutation(n) | GroupAction::CyclicShift(n) => {
                GroupElement::Permutation((0..*n).collect())
            }
            GroupAction::PeriodicTranslation { period, .. } => GroupElement::Translation {
                steps: 0,
                period: *period,
            },
        }
    }

    /// All elements in canonical order: lexicographic permutations, shifts
    /// `0..n`, or translation steps `-window..=window`.
    pub fn elements(&self) -> Vec<GroupElement> {
        match self {
            GroupAction::FullPermutation(n) => (0..*n)
                .permutations(*n)
                .map(GroupElement::Permutation)
                .collect(),
            GroupAction::CyclicShift(n) => (0..*n)
                .map(|s| GroupElement::Permutation((0..*n).map(|i| (i + s) % n).collect()))
                .collect(),
            GroupAction::PeriodicTranslation { period, window } => {
                let w = *window as i64;
                (-w..=w)
                    .map(|steps| GroupElement::Translation {
                        steps,
                        period: *period,
                    })
                    .collect()
            }
        }
    }

    /// Whether the enumerated set contains `g`.
    pub fn contains(&self, g: &GroupElement) -> bool {
        match (self, g) {
            (GroupAction::FullPermutation(n), GroupElement::Permutation(p)) => {
                p.len() == *n && p.iter().all(|&i| i < *n) && p.iter().all_unique()
            }
            (GroupAction::CyclicShift(n), GroupElement::Permutation(p)) => {
                p.len() == *n && p.iter().enumerate().all(|(i, &j)| j == (i + p[0]) % n)
            }
            (
                GroupAction::PeriodicTranslation { period, window },
                GroupElement::Translation { steps, period: q },
            ) => period == q && steps.unsigned_abs() as usize <= *window,
            _ => false,
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if let Some(n) = self.dim() {
            check_dim("group action input", n, x.len())?;
        }
        Ok(())
    }

    /// A canonical point of the orbit of `x`: sorted coordinates for full
    /// permutations, the lexicographically smallest rotation for cyclic
    /// shifts, and for translations the shift (ignoring the window) that
    /// moves the first coordinate into `[0, period)`.
    pub fn canonical_form(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        match self {
            GroupAction::FullPermutation(_) => {
                let mut v = x.to_vec();
                v.sort_by(f64::total_cmp);
                Ok(v)
            }
            GroupAction::CyclicShift(_) => Ok(self
                .elements()
                .iter()
                .map(|g| g.apply(x))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .min_by(|a, b| {
                    a.iter()
                        .zip(b)
                        .map(|(p, q)| p.total_cmp(q))
                        .find(|o| o.is_ne())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or_default()),
            GroupAction::PeriodicTranslation { period, .. } => {
                let Some(&first) = x.first() else {
                    return Ok(Vec::new());
                };
                let shift = first - first.rem_euclid(*period);
                Ok(x.iter().map(|v| v - shift).collect())
            }
        }
    }
}

pub fn apply(g: &GroupElement, x: &[f64]) -> Result<Vec<f64>> {
    g.apply(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub representative: Vec<f64>,
    pub members: Vec<Vec<f64>>,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        self.members.iter().any(|m| close(m, y))
    }
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(p, q)| (p - q).abs() <= ORBIT_DEDUP_TOL)
}

/// Deduplicated `{gx}` in element order.
pub fn orbit(x: &[f64], group: &GroupAction) -> Result<Orbit> {
    group.check_input(x)?;
    let mut members: Vec<Vec<f64>> = Vec::new();
    for g in group.elements() {
        let y = g.apply(x)?;
        if !members.iter().any(|m| close(m, &y)) {
            members.push(y);
        }
    }
    Ok(Orbit {
        representative: x.to_vec(),
        members,
    })
}

/// `sum_g gx` over group elements (not deduplicated orbit members).
pub fn orbit_sum(x: &[f64], group: &GroupAction) -> Result<Vec<f64>> {
    group.check_input(x)?;
    let mut acc = vec![0.0; x.len()];
    for g in group.elements() {
        for (a, v) in acc.iter_mut().zip(g.apply(x)?) {
            *a += v;
        }
    }
    Ok(acc)
}

/// Orbit-averaged function `f°(x) = (1/|G|) sum_g f(gx)`.
#[derive(Debug, Clone)]
pub struct Symmetrized<F> {
    f: F,
    elements: Vec<GroupElement>,
    group: GroupAction,
}

pub fn symmetrize<F>(f: F, group: &GroupAction) -> Symmetrized<F>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    Symmetrized {
        f,
        elements: group.elements(),
        group: group.clone(),
    }
}

impl<F> Symmetrized<F>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.group.check_input(x)?;
        let mut acc: Option<Vec<f64>> = None;
        for g in &self.elements {
            let y = (self.f)(&g.apply(x)?)?;
            match &mut acc {
                None => acc = Some(y),
                Some(a) => {
                    check_dim("symmetrized output", a.len(), y.len())?;
                    a.iter_mut().zip(&y).for_each(|(s, v)| *s += v);
                }
            }
        }
        let n = self.elements.len() as f64;
        Ok(acc.unwrap_or_default().into_iter().map(|s| s / n).collect())
    }

    pub fn group(&self) -> &GroupAction {
        &self.group
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

/// `min_g ||y - gx||` over the enumerated elements.
pub fn quotient_distance(x: &[f64], y: &[f64], group: &GroupAction) -> Result<f64> {
    group.check_input(x)?;
    check_dim("quotient distance", x.len(), y.len())?;
    let mut best = f64::INFINITY;
    for g in group.elements() {
        best = best.min(euclid(y, &g.apply(x)?));
    }
    Ok(best)
}

/// Per-(sample, element) deviations of an invariance or equivariance check.
#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub deviations: Vec<(usize, usize, f64)>,
    pub max_deviation: f64,
    pub worst_sample: Option<usize>,
    pub worst_element: Option<usize>,
    pub tol: f64,
}

impl InvarianceReport {
    fn new(tol: f64) -> Self {
        InvarianceReport {
            deviations: Vec::new(),
            max_deviation: 0.0,
            worst_sample: None,
            worst_element: None,
            tol,
        }
    }

    fn push(&mut self, sample: usize, element: usize, dev: f64) {
        if self.worst_sample.is_none() || dev > self.max_deviation || dev.is_nan() {
            self.max_deviation = dev;
            self.worst_sample = Some(sample);
            self.worst_element = Some(element);
        }
        self.deviations.push((sample, element, dev));
    }

    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tol
    }

    /// Combines reports from disjoint sample partitions; `offset` is added to
    /// the sample indices of `other`.
    pub fn merge(mut self, other: InvarianceReport, offset: usize) -> Self {
        for (s, e, d) in other.deviations {
            self.push(s + offset, e, d);
        }
        self.tol = self.tol.min(other.tol);
        self
    }

    /// CSV with header `sample_index,element_index,deviation`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(["sample_index", "element_index", "deviation"])?;
        for (s, e, d) in &self.deviations {
            w.write_record([s.to_string(), e.to_string(), d.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Max over samples and elements of `||f(gx) - f(x)||`.
pub fn check_invariance<F>(
    f: F,
    group: &GroupAction,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<InvarianceReport>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let elements = group.elements();
    let mut report = InvarianceReport::new(tol);
    for (si, x) in samples.iter().enumerate() {
        group.check_input(x)?;
        let fx = f(x)?;
        for (gi, g) in elements.iter().enumerate() {
            let fgx = f(&g.apply(x)?)?;
            check_dim("invariance output", fx.len(), fgx.len())?;
            report.push(si, gi, euclid(&fgx, &fx));
        }
    }
    Ok(report)
}

/// Max over samples and elements of `||phi(gx) - g phi(x)||`.
pub fn check_equivariance<F>(
    phi: F,
    group: &GroupAction,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<InvarianceReport>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let elements = group.elements();
    let mut report = InvarianceReport::new(tol);
    for (si, x) in samples.iter().enumerate() {
        group.check_input(x)?;
        let px = phi(x)?;
        check_dim("equivariant map output", x.len(), px.len())?;
        for (gi, g) in elements.iter().enumerate() {
            let lhs = phi(&g.apply(x)?)?;
            check_dim("equivariant map output", x.len(), lhs.len())?;
            report.push(si, gi, euclid(&lhs, &g.apply(&px)?));
        }
    }
    Ok(report)
}
