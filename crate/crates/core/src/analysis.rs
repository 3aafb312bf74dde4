//! KL divergence, the Catoni PAC-Bayes bound and symmetrization of
//! distributions over finite estimator families.
//!
//! Natural logarithms throughout.

use crate::error::{check_dim, Error, Result};

/// Weights summing to one must do so within this tolerance.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Distribution over a finite, indexed family of estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    weights: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("distribution over an empty family"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("weights must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::invalid(format!("weights sum to {total}, not 1")));
        }
        Ok(DiscreteDistribution { weights })
    }

    /// Normalizes non-negative masses.
    pub fn from_masses(masses: &[f64]) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::invalid("masses must have a positive finite total"));
        }
        let w: Vec<f64> = masses.iter().map(|m| m / total).collect();
        let sum: f64 = w.iter().sum();
        // absorb rounding so the normalization check holds
        DiscreteDistribution::new(w.iter().map(|v| v / sum).collect())
    }

    pub fn uniform(n: usize) -> Result<Self> {
        DiscreteDistribution::from_masses(&vec![1.0; n])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// `KL(Q || P) = sum_i Q_i ln(Q_i / P_i)` with `0 ln 0 = 0`.
///
/// Returns `f64::INFINITY` when `Q` puts mass where `P` has none.
pub fn kl_divergence(q: &DiscreteDistribution, p: &DiscreteDistribution) -> Result<f64> {
    check_dim("KL support", q.len(), p.len())?;
    let mut kl = 0.0;
    for (&qi, &pi) in q.weights.iter().zip(&p.weights) {
        if qi == 0.0 {
            continue;
        }
        if pi == 0.0 {
            return Ok(f64::INFINITY);
        }
        kl += qi * (qi / pi).ln();
    }
    // Gibbs' inequality; clamp float noise on identical inputs
    Ok(kl.max(0.0))
}

/// Catoni's bound on the true risk of a Gibbs posterior:
/// `(1 - exp(-beta * risk - (kl + ln(1/delta)) / n)) / (1 - exp(-beta))`.
///
/// `delta = 1` is accepted as the boundary case `ln(1/delta) = 0`.
pub fn catoni_bound(empirical_risk: f64, kl: f64, n: usize, beta: f64, delta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&empirical_risk) {
        return Err(Error::invalid(format!(
            "empirical risk {empirical_risk} outside [0, 1]"
        )));
    }
    if kl.is_nan() || kl < 0.0 {
        return Err(Error::invalid(format!("KL must be non-negative, got {kl}")));
    }
    if n == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("beta must be positive, got {beta}")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::invalid(format!(
            "delta must lie in (0, 1], got {delta}"
        )));
    }
    let exponent = -beta * empirical_risk - (kl - delta.ln()) / n as f64;
    Ok(-exponent.exp_m1() / -(-beta).exp_m1())
}

/// Maps every estimator to the representative of its symmetrized class.
///
/// Representatives are members of their own class, so the map is
/// idempotent: `class[class[i]] == class[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetrizationMap {
    class: Vec<usize>,
}

impl SymmetrizationMap {
    pub fn new(class: Vec<usize>) -> Result<Self> {
        for (i, &c) in class.iter().enumerate() {
            if c >= class.len() {
                return Err(Error::invalid(format!(
                    "class {c} of estimator {i} is not an estimator index"
                )));
            }
            if class[c] != c {
                return Err(Error::invalid(format!(
                    "class map is not idempotent: {i} -> {c} -> {}",
                    class[c]
                )));
            }
        }
        Ok(SymmetrizationMap { class })
    }

    /// Builds the map from arbitrary class labels; the first member of each
    /// class becomes its representative.
    pub fn from_labels<T: PartialEq>(labels: &[T]) -> Self {
        let class = labels
            .iter()
            .map(|l| labels.iter().position(|m| m == l).expect("label present"))
            .collect();
        SymmetrizationMap { class }
    }

    pub fn identity(n: usize) -> Self {
        SymmetrizationMap {
            class: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.class.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class.is_empty()
    }

    pub fn class_of(&self, i: usize) -> usize {
        self.class[i]
    }

    /// Representatives in increasing index order.
    pub fn representatives(&self) -> Vec<usize> {
        self.class
            .iter()
            .enumerate()
            .filter(|(i, c)| i == *c)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Pushes `Q` forward onto the classes: each class gets the summed weight of
/// its members. Classes are ordered by representative index.
pub fn symmetrize_distribution(
    q: &DiscreteDistribution,
    map: &SymmetrizationMap,
) -> Result<DiscreteDistribution> {
    check_dim("symmetrization map", q.len(), map.len())?;
    let reps = map.representatives();
    let mut masses = vec![0.0; reps.len()];
    for (i, &w) in q.weights.iter().enumerate() {
        let slot = reps
            .binary_search(&map.class_of(i))
            .expect("representative listed");
        masses[slot] += w;
    }
    Ok(DiscreteDistribution { weights: masses })
}

/// `KL(Q || P) - KL(Q° || P°)`.
pub fn symmetrization_gap(
    q: &DiscreteDistribution,
    p: &DiscreteDistribution,
    map: &SymmetrizationMap,
) -> Result<f64> {
    let full = kl_divergence(q, p)?;
    let reduced = kl_divergence(
        &symmetrize_distribution(q, map)?,
        &symmetrize_distribution(p, map)?,
    )?;
    if full.is_infinite() || reduced.is_infinite() {
        return Err(Error::InfiniteKl);
    }
    Ok(full - reduced)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(w: &[f64]) -> DiscreteDistribution {
        DiscreteDistribution::new(w.to_vec()).unwrap()
    }

    #[test]
    fn kl_examples() {
        let p = d(&[0.2, 0.3, 0.5]);
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        let v = kl_divergence(&d(&[1.0, 0.0]), &d(&[0.5, 0.5])).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(
            kl_divergence(&d(&[0.5, 0.5]), &d(&[1.0, 0.0])).unwrap(),
            f64::INFINITY
        );
        assert!(kl_divergence(&d(&[1.0]), &d(&[0.5, 0.5])).is_err());
    }

    #[test]
    fn catoni_examples() {
        assert_eq!(catoni_bound(0.0, 0.0, 10, 1.0, 1.0).unwrap(), 0.0);
        // 40-digit evaluation (rounded to f64) of (1 - e^{-(1 + ln 10)/10}) / (1 - e^{-1})
        let want = 0.444_950_076_517_449_2;
        let got = catoni_bound(0.0, 1.0, 10, 1.0, 0.1).unwrap();
        assert!((got - want).abs() < 1e-15, "{got}");
        let lo = catoni_bound(0.1, 0.5, 20, 2.0, 0.05).unwrap();
        let hi = catoni_bound(0.1, 0.6, 20, 2.0, 0.05).unwrap();
        assert!(hi > lo);
    }

    #[test]
    fn catoni_rejects_out_of_range() {
        assert!(catoni_bound(-0.1, 0.0, 1, 1.0, 0.5).is_err());
        assert!(catoni_bound(1.1, 0.0, 1, 1.0, 0.5).is_err());
        assert!(catoni_bound(0.1, -1.0, 1, 1.0, 0.5).is_err());
        assert!(catoni_bound(0.1, 0.0, 0, 1.0, 0.5).is_err());
        assert!(catoni_bound(0.1, 0.0, 1, 0.0, 0.5).is_err());
        assert!(catoni_bound(0.1, 0.0, 1, 1.0, 0.0).is_err());
        assert!(catoni_bound(0.1, 0.0, 1, 1.0, 1.5).is_err());
        assert!(catoni_bound(0.1, f64::NAN, 1, 1.0, 0.5).is_err());
    }

    #[test]
    fn symmetrize_examples() {
        let q = d(&[0.3, 0.7]);
        assert_eq!(
            symmetrize_distribution(&q, &SymmetrizationMap::identity(2)).unwrap(),
            q
        );
        let one = SymmetrizationMap::new(vec![0, 0]).unwrap();
        assert_eq!(symmetrize_distribution(&q, &one).unwrap().weights(), &[1.0]);
        let m = SymmetrizationMap::new(vec![0, 0, 2]).unwrap();
        let s = symmetrize_distribution(&d(&[0.25, 0.25, 0.5]), &m).unwrap();
        assert_eq!(s.weights(), &[0.5, 0.5]);
        assert!(symmetrize_distribution(&q, &m).is_err());
    }

    #[test]
    fn gap_examples() {
        let p = d(&[0.5, 0.5]);
        let both = SymmetrizationMap::new(vec![0, 0]).unwrap();
        assert_eq!(symmetrization_gap(&p, &p, &both).unwrap(), 0.0);
        let g = symmetrization_gap(&d(&[1.0, 0.0]), &p, &both).unwrap();
        assert!((g - std::f64::consts::LN_2).abs() < 1e-15);
        let q = d(&[0.1, 0.6, 0.3]);
        let p3 = d(&[0.3, 0.3, 0.4]);
        assert_eq!(
            symmetrization_gap(&q, &p3, &SymmetrizationMap::identity(3)).unwrap(),
            0.0
        );
        assert!(matches!(
            symmetrization_gap(
                &d(&[0.5, 0.5]),
                &d(&[1.0, 0.0]),
                &SymmetrizationMap::identity(2)
            ),
            Err(Error::InfiniteKl)
        ));
    }

    #[test]
    fn class_map_validation() {
        assert!(SymmetrizationMap::new(vec![1, 2, 2]).is_err());
        assert!(SymmetrizationMap::new(vec![0, 5]).is_err());
        let m = SymmetrizationMap::from_labels(&["a", "b", "a", "c"]);
        assert_eq!(m, SymmetrizationMap::new(vec![0, 1, 0, 3]).unwrap());
        assert_eq!(m.representatives(), vec![0, 1, 3]);
    }

    #[test]
    fn distribution_validation() {
        assert!(DiscreteDistribution::new(vec![]).is_err());
        assert!(DiscreteDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(DiscreteDistribution::new(vec![1.5, -0.5]).is_err());
        let u = DiscreteDistribution::uniform(3).unwrap();
        assert!((u.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
