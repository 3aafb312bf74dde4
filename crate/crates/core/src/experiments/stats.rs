//! Small statistics helpers shared by the experiments.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::rng;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; zero for fewer than two values.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Least-squares line `y = slope * x + intercept` and its R².
///
/// A response with (numerically) zero spread is fit exactly by a constant,
/// so R² is reported as 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (slope * a + intercept);
            r * r
        })
        .sum();
    let scale = y.iter().fold(1.0_f64, |m, b| m.max(b.abs()));
    let r2 = if ss_tot <= 1e-24 * scale * scale * y.len() as f64 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    LinearFit {
        slope,
        intercept,
        r2,
    }
}

/// Average ranks, ties sharing the mean rank.
fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    r
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma) * (x - ma)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb) * (y - mb)).sum();
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    cov / (va * vb).sqrt()
}

/// Spearman rank correlation (Pearson correlation of average ranks).
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    pearson(&ranks(a), &ranks(b))
}

/// Equal-width histogram over `[min, max]`; returns `(lo, hi, count)` rows.
pub fn histogram(xs: &[f64], bins: usize) -> Vec<(f64, f64, usize)> {
    if xs.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo {
        (hi - lo) / bins as f64
    } else {
        1.0
    };
    let mut counts = vec![0usize; bins];
    for &x in xs {
        let k = (((x - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| (lo + k as f64 * width, lo + (k + 1) as f64 * width, c))
        .collect()
}

const KDE_GRID: usize = 512;

/// Gaussian kernel density (unnormalized) on a 512-point grid spanning the
/// data plus three bandwidths on each side.
fn kde_grid(xs: &[f64], bw: f64) -> Vec<f64> {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * bw;
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * bw;
    (0..KDE_GRID)
        .map(|i| {
            let t = lo + (hi - lo) * i as f64 / (KDE_GRID - 1) as f64;
            xs.iter()
                .map(|x| {
                    let z = (t - x) / bw;
                    (-0.5 * z * z).exp()
                })
                .sum()
        })
        .collect()
}

fn local_maxima(dens: &[f64], min_height: f64) -> usize {
    let top = dens.iter().copied().fold(0.0, f64::max);
    (1..dens.len() - 1)
        .filter(|&i| dens[i] > dens[i - 1] && dens[i] >= dens[i + 1] && dens[i] >= min_height * top)
        .count()
}

fn silverman_bandwidth(xs: &[f64]) -> f64 {
    let sd = variance(xs).sqrt();
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| sorted[((sorted.len() - 1) as f64 * p).round() as usize];
    let iqr = q(0.75) - q(0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * (xs.len() as f64).powf(-0.2)
}

/// Number of local maxima of a Gaussian kernel density estimate with
/// Silverman's bandwidth. Maxima below `min_height` times the global
/// maximum are ignored.
pub fn kde_mode_count(xs: &[f64], min_height: f64) -> usize {
    if xs.len() < 2 {
        return xs.len();
    }
    let bw = silverman_bandwidth(xs);
    if bw == 0.0 {
        return 1;
    }
    local_maxima(&kde_grid(xs, bw), min_height)
}

/// Smallest bandwidth at which the kernel density estimate has one mode.
pub fn critical_bandwidth(xs: &[f64]) -> f64 {
    let sd = variance(xs).sqrt();
    if xs.len() < 2 || sd == 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (sd * 1e-6, sd * 4.0);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if local_maxima(&kde_grid(xs, mid), 0.0) <= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Silverman's bootstrap test of unimodality: the share of smoothed
/// bootstrap samples whose density at the critical bandwidth still has more
/// than one mode. Small values reject unimodality.
pub fn unimodality_p_value(xs: &[f64], resamples: usize, seed: u64) -> f64 {
    let h = critical_bandwidth(xs);
    if h == 0.0 || resamples == 0 {
        return 1.0;
    }
    let n = xs.len();
    let m = mean(xs);
    let shrink = (1.0 + h * h / variance(xs)).sqrt();
    let mut r = rng::seeded(seed);
    let mut sample = vec![0.0; n];
    let mut multi = 0;
    for _ in 0..resamples {
        for s in sample.iter_mut() {
            let y = xs[r.random_range(0..n)];
            let e: f64 = StandardNormal.sample(&mut r);
            *s = m + (y - m + h * e) / shrink;
        }
        if local_maxima(&kde_grid(&sample, h), 0.0) > 1 {
            multi += 1;
        }
    }
    multi as f64 / resamples as f64
}

/// Fraction of bootstrap resamples (paired by index) in which
/// `variance(a*) <= variance(b*)`.
pub fn bootstrap_variance_le(a: &[f64], b: &[f64], resamples: usize, seed: u64) -> f64 {
    let n = a.len().min(b.len());
    if n == 0 || resamples == 0 {
        return f64::NAN;
    }
    let mut rng = rng::seeded(seed);
    let mut ra = vec![0.0; n];
    let mut rb = vec![0.0; n];
    let mut hits = 0;
    for _ in 0..resamples {
        for k in 0..n {
            let i = rng.random_range(0..n);
            ra[k] = a[i];
            rb[k] = b[i];
        }
        if variance(&ra) <= variance(&rb) {
            hits += 1;
        }
    }
    hits as f64 / resamples as f64
}
