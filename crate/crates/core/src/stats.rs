//! Goodness-of-fit and two-sample tests used by the Monte Carlo checks.

use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

fn chi_square_tail(statistic: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    ChiSquared::new(df as f64).map(|d| d.sf(statistic)).unwrap_or(f64::NAN)
}

/// Pearson goodness-of-fit. `probs` are the model cell probabilities; any missing mass
/// `1 - sum(probs)` is compared against `other`. Adjacent cells are pooled until each
/// pooled cell expects at least five counts.
pub fn chi_square_gof(observed: &[u64], probs: &[f64], other: u64) -> ChiSquare {
    assert_eq!(observed.len(), probs.len());
    let total: u64 = observed.iter().sum::<u64>() + other;
    let n = total as f64;
    let rest = (1.0 - probs.iter().sum::<f64>()).max(0.0);
    let mut cells: Vec<(f64, f64)> = observed
        .iter()
        .zip(probs)
        .map(|(&o, &p)| (o as f64, p * n))
        .collect();
    cells.push((other as f64, rest * n));
    let pooled = pool_cells(cells, 5.0);
    let statistic = pooled
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|(o, e)| (o - e).powi(2) / e)
        .sum();
    let df = pooled.len().saturating_sub(1);
    ChiSquare { statistic, df, p_value: chi_square_tail(statistic, df) }
}

fn pool_cells(cells: Vec<(f64, f64)>, min_expected: f64) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (o, e) in cells {
        acc.0 += o;
        acc.1 += e;
        if acc.1 >= min_expected {
            out.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 > 0.0 || acc.1 > 0.0 {
        match out.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => out.push(acc),
        }
    }
    out
}

/// Chi-square test of independence on an `r x c` contingency table.
pub fn chi_square_independence(table: &[Vec<u64>]) -> ChiSquare {
    let rows = table.len();
    let cols = table.first().map_or(0, Vec::len);
    let total: f64 = table.iter().flatten().map(|&v| v as f64).sum();
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().map(|&v| v as f64).sum()).collect();
    let col_sums: Vec<f64> =
        (0..cols).map(|j| table.iter().map(|r| r[j] as f64).sum()).collect();
    let mut statistic = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            let e = row_sums[i] * col_sums[j] / total;
            if e > 0.0 {
                statistic += (table[i][j] as f64 - e).powi(2) / e;
            }
        }
    }
    let df = rows.saturating_sub(1) * cols.saturating_sub(1);
    ChiSquare { statistic, df, p_value: chi_square_tail(statistic, df) }
}

/// Two-sample homogeneity test on category counts (same category order in both samples).
/// Categories with fewer than ten combined counts are pooled.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> ChiSquare {
    let width = a.len().max(b.len());
    let get = |v: &[u64], i: usize| v.get(i).copied().unwrap_or(0);
    let mut cols: Vec<(u64, u64)> = Vec::new();
    let mut acc = (0, 0);
    for i in 0..width {
        acc.0 += get(a, i);
        acc.1 += get(b, i);
        if acc.0 + acc.1 >= 10 {
            cols.push(acc);
            acc = (0, 0);
        }
    }
    if acc.0 + acc.1 > 0 {
        match cols.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => cols.push(acc),
        }
    }
    let table = vec![
        cols.iter().map(|c| c.0).collect::<Vec<_>>(),
        cols.iter().map(|c| c.1).collect::<Vec<_>>(),
    ];
    chi_square_independence(&table)
}

/// Two-sample Kolmogorov–Smirnov test; returns `(D, p)` using the asymptotic
/// Kolmogorov distribution with the Stephens small-sample correction.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let en = ((n * m) as f64 / (n + m) as f64).sqrt();
    (d, kolmogorov_sf((en + 0.12 + 0.11 / en) * d))
}

/// One-sample Kolmogorov–Smirnov test against a continuous CDF; returns `(D, p)`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(a: &[f64], cdf: F) -> (f64, f64) {
    let mut x = a.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let d = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    let en = n.sqrt();
    (d, kolmogorov_sf((en + 0.12 + 0.11 / en) * d))
}

fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Streaming mean and variance (Welford); merging is associative.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        Moments { n, mean, m2 }
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        (self.variance() / self.n.max(1) as f64).sqrt()
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        for x in iter {
            m.push(x);
        }
        m
    }
}

/// z-score of the difference between two independent sample means.
pub fn two_sample_z(a: &Moments, b: &Moments) -> f64 {
    let se = (a.std_error().powi(2) + b.std_error().powi(2)).sqrt();
    if se == 0.0 {
        if a.mean == b.mean {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (a.mean - b.mean) / se
    }
}

/// z-score of a sample mean against an exact value.
pub fn one_sample_z(a: &Moments, exact: f64) -> f64 {
    let se = a.std_error();
    if se == 0.0 {
        if a.mean == exact {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (a.mean - exact) / se
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gof_accepts_fair_die_and_rejects_loaded() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0u64; 6];
        for _ in 0..60_000 {
            counts[rng.random_range(0..6)] += 1;
        }
        let fair = chi_square_gof(&counts, &[1.0 / 6.0; 6], 0);
        assert!(fair.p_value > 0.001, "{fair:?}");
        let loaded = chi_square_gof(&counts, &[0.2, 0.2, 0.15, 0.15, 0.15, 0.15], 0);
        assert!(loaded.p_value < 1e-6);
    }

    #[test]
    fn pooling_keeps_total_counts() {
        let pooled = pool_cells(vec![(1.0, 1.0), (2.0, 2.0), (10.0, 9.0), (0.0, 0.5)], 5.0);
        let o: f64 = pooled.iter().map(|c| c.0).sum();
        let e: f64 = pooled.iter().map(|c| c.1).sum();
        assert_eq!(o, 13.0);
        assert!((e - 12.5).abs() < 1e-12);
        assert!(pooled.iter().all(|c| c.1 >= 5.0));
    }

    #[test]
    fn ks_same_and_shifted() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a: Vec<f64> = (0..4000).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..4000).map(|_| rng.random::<f64>()).collect();
        let c: Vec<f64> = b.iter().map(|v| v + 0.1).collect();
        assert!(ks_two_sample(&a, &b).1 > 0.001);
        assert!(ks_two_sample(&a, &c).1 < 1e-6);
    }

    #[test]
    fn ks_against_uniform_cdf() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: Vec<f64> = (0..5000).map(|_| rng.random::<f64>()).collect();
        assert!(ks_one_sample(&a, |v| v.clamp(0.0, 1.0)).1 > 0.001);
        assert!(ks_one_sample(&a, |v| v.clamp(0.0, 1.0).powi(2)).1 < 1e-6);
    }

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        let all: Moments = xs.iter().copied().collect();
        let left: Moments = xs[..37].iter().copied().collect();
        let right: Moments = xs[37..].iter().copied().collect();
        let merged = left.merge(&right);
        assert!((merged.mean - all.mean).abs() < 1e-14);
        assert!((merged.variance() - all.variance()).abs() < 1e-13);
    }

    #[test]
    fn independence_detects_dependence() {
        let dependent = vec![vec![500, 10], vec![10, 500]];
        assert!(chi_square_independence(&dependent).p_value < 1e-10);
        let indep = vec![vec![100, 200], vec![50, 100]];
        assert!(chi_square_independence(&indep).p_value > 0.99);
    }
}
