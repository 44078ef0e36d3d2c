//! Gauss–Laguerre rules and periodic trapezoid grids.

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

/// Nodes and weights of the `n`-point rule for `∫_0^∞ f(t) t^a e^{−t} dt`, `a > −1`,
/// from the Jacobi matrix eigenproblem.
pub fn gauss_laguerre(n: usize, a: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1 && a > -1.0);
    let mut j = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        j[(i, i)] = 2.0 * i as f64 + 1.0 + a;
        if i + 1 < n {
            let b = ((i as f64 + 1.0) * (i as f64 + 1.0 + a)).sqrt();
            j[(i, i + 1)] = b;
            j[(i + 1, i)] = b;
        }
    }
    let eig = SymmetricEigen::new(j);
    let mu0 = ln_gamma(a + 1.0).exp();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], mu0 * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    pairs.into_iter().unzip()
}

/// Integrates `f` over `(0, ∞)^d` against `Π_x ρ_x^{a_x} e^{−r_x ρ_x}` times the part of
/// the integrand that `f` supplies. `f` is the full integrand; it is divided by the
/// weight at each node, so the rule is exact when `f / weight` is a polynomial of
/// degree < 2n per coordinate.
pub fn laguerre_product<F: Fn(&[f64]) -> f64>(f: F, rates: &[f64], powers: &[f64], n: usize) -> f64 {
    let d = rates.len();
    assert_eq!(powers.len(), d);
    let rules: Vec<(Vec<f64>, Vec<f64>)> = powers.iter().map(|&a| gauss_laguerre(n, a)).collect();
    let mut idx = vec![0usize; d];
    let mut rho = vec![0.0; d];
    let mut total = crate::linalg::CompensatedSum::default();
    loop {
        let mut w = 1.0;
        let mut log_weight = 0.0;
        for k in 0..d {
            let t = rules[k].0[idx[k]];
            rho[k] = t / rates[k];
            // dρ = dt / r, weight ρ^a e^{−rρ} = t^a e^{−t} r^{−a}
            w *= rules[k].1[idx[k]] / rates[k].powf(powers[k] + 1.0);
            log_weight += powers[k] * rho[k].ln() - rates[k] * rho[k];
        }
        if w > 0.0 {
            total.add(w * f(&rho) * (-log_weight).exp());
        }
        let mut k = 0;
        loop {
            if k == d {
                return total.value();
            }
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Midpoint-free uniform grid `{0, 1/m, …, (m−1)/m}`: the trapezoid rule on the circle,
/// spectrally accurate for smooth periodic integrands.
pub fn periodic_grid(m: usize) -> Vec<f64> {
    (0..m).map(|i| i as f64 / m as f64).collect()
}

/// Averages `f` over the uniform `m^d` grid on the unit torus.
pub fn torus_average<T, F>(d: usize, m: usize, f: F) -> T
where
    T: std::ops::Add<Output = T> + std::ops::Div<f64, Output = T> + Default,
    F: Fn(&[f64]) -> T,
{
    let mut idx = vec![0usize; d];
    let mut theta = vec![0.0; d];
    let mut acc = T::default();
    let total = (m as f64).powi(d as i32);
    loop {
        for k in 0..d {
            theta[k] = idx[k] as f64 / m as f64;
        }
        acc = acc + f(&theta);
        let mut k = 0;
        loop {
            if k == d {
                return acc / total;
            }
            idx[k] += 1;
            if idx[k] < m {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laguerre_moments() {
        let (x, w) = gauss_laguerre(20, 0.0);
        for k in 0..10 {
            let q: f64 = x.iter().zip(&w).map(|(t, w)| w * t.powi(k)).sum();
            let exact: f64 = (1..=k as u64).map(|i| i as f64).product();
            assert_close!(q / exact, 1.0, 1e-11);
        }
        let (x, w) = gauss_laguerre(20, -0.5);
        let q: f64 = x.iter().zip(&w).map(|(t, w)| w * t).sum();
        assert_close!(q, 0.5 * std::f64::consts::PI.sqrt(), 1e-12);
    }

    #[test]
    fn product_rule_integrates_gamma_densities() {
        // ∫∫ ρ1 ρ2^{1/2} e^{−2ρ1 − ρ2} = (1/4)·Γ(3/2)
        let v = laguerre_product(
            |r| r[0] * r[1].sqrt() * (-2.0 * r[0] - r[1]).exp(),
            &[2.0, 1.0],
            &[0.0, -0.5],
            16,
        );
        assert_close!(v, 0.25 * 0.5 * std::f64::consts::PI.sqrt(), 1e-12);
    }

    #[test]
    fn torus_average_of_trig_polynomial() {
        let v: f64 = torus_average(2, 8, |t| (2.0 * std::f64::consts::PI * (t[0] + 2.0 * t[1])).cos() + 1.0);
        assert_close!(v, 1.0, 1e-14);
    }
}
