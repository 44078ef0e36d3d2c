//! Homology coordinates of Eulerian networks, harmonic one-forms, U(1) twists indexed by
//! holonomies on the fundamental cycles, the Fourier law of the random homology class,
//! and the discrete-circle closed forms with their Brownian limit.

use nalgebra::DMatrix;
use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::graph::{CycleBasis, Kernel, WeightedGraph};
use crate::linalg::{log_det_hpd, log_det_spd, CMatrix, CompensatedSum};
use crate::networks::Network;
use crate::quadrature::torus_average;

/// Integer coordinates `j_i = ǩ` on the cotree edges, `ǩ = N − Nᵀ`.
pub fn homology_coords(net: &Network, basis: &CycleBasis) -> Result<Vec<i64>> {
    if let Some(x) = net.eulerian_defect() {
        return Err(Error::NotEulerian(x));
    }
    Ok(basis
        .cotree
        .iter()
        .map(|&(u, v)| net.get(u, v) as i64 - net.get(v, u) as i64)
        .collect())
}

/// `Σ_i j_i · (cycle i)` as an antisymmetric integer edge function (row-major `n × n`).
pub fn reconstruct_antisymmetric(n: usize, basis: &CycleBasis, j: &[i64]) -> Vec<i64> {
    let mut out = vec![0i64; n * n];
    for (cycle, &c) in basis.cycles.iter().zip(j) {
        for (x, y) in crate::loops::cyclic_steps(cycle) {
            out[x * n + y] += c;
            out[y * n + x] -= c;
        }
    }
    out
}

/// A one-form on oriented edges, `ω_{y,x} = −ω_{x,y}`, stored as an antisymmetric matrix.
pub type OneForm = DMatrix<f64>;

/// Holonomy of `ω` along a cyclic vertex sequence.
pub fn holonomy(omega: &OneForm, cycle: &[usize]) -> f64 {
    crate::loops::cyclic_steps(cycle).map(|(x, y)| omega[(x, y)]).sum()
}

/// Form supported on cotree edges with holonomy `θ_i` along fundamental cycle `i`.
pub fn cotree_form(n: usize, basis: &CycleBasis, theta: &[f64]) -> OneForm {
    let mut w = OneForm::zeros(n, n);
    for (&(u, v), &t) in basis.cotree.iter().zip(theta) {
        w[(u, v)] = t;
        w[(v, u)] = -t;
    }
    w
}

/// The harmonic form (`Σ_y C_{x,y} ω_{x,y} = 0`) with holonomy `θ_i` along cycle `i`:
/// the cotree form minus the exact part `df` solving `L f = div ω₀`.
pub fn harmonic_form(g: &WeightedGraph, basis: &CycleBasis, theta: &[f64]) -> OneForm {
    let n = g.n();
    let w0 = cotree_form(n, basis, theta);
    if n == 1 {
        return w0;
    }
    // Laplacian without killing, grounded at the root so the system is nonsingular
    let root = basis.root;
    let idx: Vec<usize> = (0..n).filter(|&x| x != root).collect();
    let m = idx.len();
    let mut lap = DMatrix::<f64>::zeros(m, m);
    let mut rhs = nalgebra::DVector::<f64>::zeros(m);
    for (a, &x) in idx.iter().enumerate() {
        for &y in g.neighbors(x) {
            lap[(a, a)] += g.c(x, y);
            if let Some(b) = idx.iter().position(|&z| z == y) {
                lap[(a, b)] -= g.c(x, y);
            }
            rhs[a] += g.c(x, y) * w0[(x, y)];
        }
    }
    let sol = lap.lu().solve(&rhs).expect("grounded Laplacian is invertible");
    let mut f = vec![0.0; n];
    for (a, &x) in idx.iter().enumerate() {
        f[x] = sol[a];
    }
    // ω = ω₀ + df with (df)_{x,y} = f(y) − f(x): divergence Σ_y C(ω₀ + f(y) − f(x)) = 0
    OneForm::from_fn(n, n, |x, y| if g.is_edge(x, y) { w0[(x, y)] + f[y] - f[x] } else { 0.0 })
}

/// Harmonic representatives of the integer lattice basis (holonomy `e_i`) and their Gram
/// matrix under `‖ω‖² = Σ_{x,y} C_{x,y} ω_{x,y}²` (ordered pairs).
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    pub forms: Vec<OneForm>,
    pub gram: DMatrix<f64>,
}

impl HarmonicBasis {
    pub fn dim(&self) -> usize {
        self.forms.len()
    }

    /// Covolume of the integer lattice, `√det(Gram)`; reported, never used in integrals.
    pub fn covolume(&self) -> f64 {
        if self.forms.is_empty() {
            1.0
        } else {
            self.gram.determinant().sqrt()
        }
    }
}

pub fn harmonic_basis(g: &WeightedGraph, basis: &CycleBasis) -> HarmonicBasis {
    let r = basis.rank();
    let forms: Vec<OneForm> = (0..r)
        .map(|i| {
            let mut e = vec![0.0; r];
            e[i] = 1.0;
            harmonic_form(g, basis, &e)
        })
        .collect();
    let gram = DMatrix::from_fn(r, r, |a, b| {
        g.edges()
            .iter()
            .map(|&(u, v)| 2.0 * g.c(u, v) * forms[a][(u, v)] * forms[b][(u, v)])
            .sum()
    });
    HarmonicBasis { forms, gram }
}

/// Largest `|Σ_y C_{x,y} ω_{x,y}|` over vertices.
pub fn divergence_defect(g: &WeightedGraph, omega: &OneForm) -> f64 {
    (0..g.n())
        .map(|x| g.neighbors(x).iter().map(|&y| g.c(x, y) * omega[(x, y)]).sum::<f64>().abs())
        .fold(0.0, f64::max)
}

/// `P^{e^{2πiω}}_{x,y} = P_{x,y} e^{2πi ω_{x,y}}`.
pub fn u1_twisted_kernel(kernel: &Kernel, omega: &OneForm) -> CMatrix {
    let n = kernel.n();
    CMatrix::from_fn(n, n, |x, y| {
        let p = kernel.p()[(x, y)];
        if p == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::from_polar(p, std::f64::consts::TAU * omega[(x, y)])
        }
    })
}

/// Which one-form represents a torus point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Representative {
    #[default]
    Cotree,
    Harmonic,
}

/// `log det(I − P^{e^{2πiω}}) − log det(I − P)`, real since `Λ − C∘e^{2πiω}` is Hermitian
/// positive definite.
pub fn twisted_log_det_ratio(g: &WeightedGraph, omega: &OneForm) -> f64 {
    let n = g.n();
    let lambda = g.lambda();
    let form = CMatrix::from_fn(n, n, |x, y| {
        if x == y {
            Complex64::new(lambda[x], 0.0)
        } else if g.is_edge(x, y) {
            Complex64::from_polar(-g.c(x, y), std::f64::consts::TAU * omega[(x, y)])
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let twisted = log_det_hpd(&form).expect("twisted energy form of a transient graph is positive definite");
    let plain = log_det_spd(&g.energy_matrix()).expect("graph is transient");
    twisted - plain
}

/// `[det G^{(2πiω)}/det G]^α` for a form with holonomies `θ` on the fundamental cycles.
pub fn twisted_det_ratio(g: &WeightedGraph, basis: &CycleBasis, theta: &[f64], alpha: f64, rep: Representative) -> f64 {
    let omega = match rep {
        Representative::Cotree => cotree_form(g.n(), basis, theta),
        Representative::Harmonic => harmonic_form(g, basis, theta),
    };
    (-alpha * twisted_log_det_ratio(g, &omega)).exp()
}

/// Quadrature value with the imaginary residue kept as a diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomologyProb {
    pub value: f64,
    pub imag_residue: f64,
}

/// Largest number of grid points accepted for torus quadrature.
pub const GRID_BUDGET: usize = 1 << 24;

fn check_grid(dim: usize, grid: usize) -> Result<()> {
    if grid < 8 {
        return Err(Error::InvalidArgument("grid must have at least 8 points per dimension".into()));
    }
    if dim > 4 || (grid as f64).powi(dim as i32) > GRID_BUDGET as f64 {
        return Err(Error::InvalidArgument(format!("torus of dimension {dim} with grid {grid} exceeds the quadrature budget")));
    }
    Ok(())
}

/// `P(j) = ∫_{[0,1)^n} [det G^{(2πiω_θ)}/det G]^α e^{−2πi⟨j,θ⟩} dθ` on the uniform grid.
pub fn prob_homology(g: &WeightedGraph, basis: &CycleBasis, j: &[i64], alpha: f64, grid: usize) -> Result<HomologyProb> {
    let r = basis.rank();
    if j.len() != r {
        return Err(Error::InvalidArgument("one coordinate per fundamental cycle".into()));
    }
    if r == 0 {
        return Ok(HomologyProb { value: 1.0, imag_residue: 0.0 });
    }
    check_grid(r, grid)?;
    let v: Complex64 = torus_average(r, grid, |theta| {
        let f = twisted_det_ratio(g, basis, theta, alpha, Representative::Cotree);
        let phase: f64 = j.iter().zip(theta).map(|(&a, &t)| a as f64 * t).sum();
        Complex64::from_polar(f, -std::f64::consts::TAU * phase)
    });
    Ok(HomologyProb { value: v.re, imag_residue: v.im })
}

/// Law of `j` over the box `|j_i| ≤ jmax`, from one evaluation of the integrand per grid
/// point. Rows are in lexicographic order of `j`.
pub fn homology_law(g: &WeightedGraph, basis: &CycleBasis, alpha: f64, grid: usize, jmax: i64) -> Result<Vec<(Vec<i64>, HomologyProb)>> {
    let r = basis.rank();
    if r == 0 {
        return Ok(vec![(vec![], HomologyProb { value: 1.0, imag_residue: 0.0 })]);
    }
    check_grid(r, grid)?;
    let total = grid.pow(r as u32);
    let mut values = Vec::with_capacity(total);
    let mut points = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let theta: Vec<f64> = (0..r)
            .map(|_| {
                let t = (rem % grid) as f64 / grid as f64;
                rem /= grid;
                t
            })
            .collect();
        values.push(twisted_det_ratio(g, basis, &theta, alpha, Representative::Cotree));
        points.push(theta);
    }
    let width = (2 * jmax + 1) as usize;
    let mut rows = Vec::new();
    for flat in 0..width.pow(r as u32) {
        let mut rem = flat;
        let mut j: Vec<i64> = (0..r)
            .map(|_| {
                let a = (rem % width) as i64 - jmax;
                rem /= width;
                a
            })
            .collect();
        j.reverse();
        let mut re = CompensatedSum::default();
        let mut im = CompensatedSum::default();
        for (f, theta) in values.iter().zip(&points) {
            let phase: f64 = j.iter().zip(theta).map(|(&a, &t)| a as f64 * t).sum();
            let (s, c) = (std::f64::consts::TAU * phase).sin_cos();
            re.add(f * c);
            im.add(-f * s);
        }
        rows.push((j, HomologyProb { value: re.value() / total as f64, imag_residue: im.value() / total as f64 }));
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(rows)
}

/// `C_N(κ) = Π_j (2 + κ − 2cos(2πj/N)) = 2cosh(N·arccosh(1 + κ/2)) − 2`.
pub fn circle_cn(n: usize, kappa: f64) -> f64 {
    2.0 * (n as f64 * (1.0 + kappa / 2.0).acosh()).cosh() - 2.0
}

/// `det(I − P^θ)` on the circle with total holonomy `θ`, from the circulant eigenvalues.
pub fn circle_twisted_det(n: usize, kappa: f64, theta: f64) -> f64 {
    (0..n)
        .map(|j| 1.0 - 2.0 * (std::f64::consts::TAU * (j as f64 + theta) / n as f64).cos() / (2.0 + kappa))
        .product()
}

/// `u_±^N` sums as displayed for the circle: `u_+^N + u_-^N + (−1)^{N+1} 2cos(2πθ)/(2+κ)^N`
/// with `u_± = ½(−1 ± √(1 − 4/(2+κ)²))`. Equals `(−1)^N det(I − P^θ)`.
pub fn circle_det_displayed(n: usize, kappa: f64, theta: f64) -> f64 {
    let s = (1.0 - 4.0 / (2.0 + kappa).powi(2)).sqrt();
    let (up, um) = (0.5 * (-1.0 + s), 0.5 * (-1.0 - s));
    let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
    up.powi(n as i32) + um.powi(n as i32) + sign * 2.0 * (std::f64::consts::TAU * theta).cos() / (2.0 + kappa).powi(n as i32)
}

/// `C_N` from the displayed `u_±` expression: `(−1)^N (2+κ)^N (u_+^N + u_-^N) − 2`.
pub fn circle_cn_displayed(n: usize, kappa: f64) -> f64 {
    let s = (1.0 - 4.0 / (2.0 + kappa).powi(2)).sqrt();
    let (up, um) = (0.5 * (-1.0 + s), 0.5 * (-1.0 - s));
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    sign * (2.0 + kappa).powi(n as i32) * (up.powi(n as i32) + um.powi(n as i32)) - 2.0
}

/// Fourier coefficient `∫_0^1 f(ω) e^{−2πijω} dω` of an even periodic `f` on a uniform grid.
fn even_fourier<F: Fn(f64) -> f64>(f: F, j: i64, grid: usize) -> f64 {
    let s: CompensatedSum = (0..grid)
        .map(|i| {
            let w = i as f64 / grid as f64;
            f(w) * (std::f64::consts::TAU * j as f64 * w).cos()
        })
        .collect();
    s.value() / grid as f64
}

/// `∫_0^1 [C_N/(C_N + 2(1 − cos 2πω))]^α e^{−2πijω} dω`.
pub fn circle_law_closed_form(n: usize, kappa: f64, alpha: f64, j: i64, grid: usize) -> f64 {
    let cn = circle_cn(n, kappa);
    even_fourier(|w| (cn / (cn + 2.0 * (1.0 - (std::f64::consts::TAU * w).cos()))).powf(alpha), j, grid)
}

/// `∫_0^1 [(cosh√k − 1)/(cosh√k − cos 2πω)]^α e^{−2πijω} dω`.
pub fn brownian_circle_limit(k: f64, alpha: f64, j: i64, grid: usize) -> f64 {
    let ch = k.sqrt().cosh();
    even_fourier(|w| ((ch - 1.0) / (ch - (std::f64::consts::TAU * w).cos())).powf(alpha), j, grid)
}

/// Negative binomial pmf `Γ(n+α)/(Γ(α) n!) (1−q)^α q^n`.
pub fn negative_binomial_pmf(alpha: f64, q: f64, n: u64) -> f64 {
    (ln_gamma(n as f64 + alpha) - ln_gamma(alpha) - crate::linalg::ln_factorial(n)
        + alpha * (1.0 - q).ln()
        + n as f64 * q.ln())
    .exp()
}

/// `P(X − Y = j)` for independent `X, Y ~ NB(α, q)`, by direct convolution.
pub fn nb_difference_pmf(alpha: f64, q: f64, j: i64) -> f64 {
    let shift = j.unsigned_abs();
    let mut s = CompensatedSum::default();
    let mut n = 0u64;
    loop {
        let t = negative_binomial_pmf(alpha, q, n + shift) * negative_binomial_pmf(alpha, q, n);
        s.add(t);
        if (t < 1e-20 && n as f64 > alpha / (1.0 - q)) || n > 1_000_000 {
            return s.value();
        }
        n += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_kernel, cycle_basis};

    #[test]
    fn coords_examples() {
        let t3 = WeightedGraph::builtin("t3").unwrap();
        let basis = cycle_basis(&t3, 0);
        let back = Network::from_entries(3, &[(0, 1, 2), (1, 0, 2)]);
        assert_eq!(homology_coords(&back, &basis).unwrap(), vec![0]);
        let tri = Network::from_entries(3, &[(0, 1, 1), (1, 2, 1), (2, 0, 1)]);
        let j = homology_coords(&tri, &basis).unwrap();
        assert_eq!(j[0].abs(), 1);
        let mut both = tri.clone();
        both.merge(&back);
        assert_eq!(homology_coords(&both, &basis).unwrap(), j);
        let rec = reconstruct_antisymmetric(3, &basis, &j);
        for x in 0..3 {
            for y in 0..3 {
                assert_eq!(rec[x * 3 + y], tri.get(x, y) as i64 - tri.get(y, x) as i64);
            }
        }
        assert!(homology_coords(&Network::from_entries(3, &[(0, 1, 1)]), &basis).is_err());
    }

    #[test]
    fn harmonic_examples() {
        let c = WeightedGraph::circle(6, 1.0).unwrap();
        let basis = cycle_basis(&c, 0);
        let hb = harmonic_basis(&c, &basis);
        assert_eq!(hb.dim(), 1);
        for &(u, v) in c.edges() {
            let w = hb.forms[0][(u, v)].abs();
            assert_close!(w, 1.0 / 6.0, 1e-12);
        }
        assert_close!(holonomy(&hb.forms[0], &basis.cycles[0]), 1.0, 1e-12);
        let tree = WeightedGraph::path(4, 1.0).unwrap();
        assert_eq!(harmonic_basis(&tree, &cycle_basis(&tree, 0)).dim(), 0);
        for seed in 0..20 {
            let g = WeightedGraph::random_connected(6, 0.4, seed).unwrap();
            let b = cycle_basis(&g, seed);
            let hb = harmonic_basis(&g, &b);
            assert_eq!(hb.dim(), g.edges().len() + 1 - g.n());
            for f in &hb.forms {
                assert!(divergence_defect(&g, f) < 1e-12);
            }
        }
    }

    #[test]
    fn twisted_ratio_examples() {
        let g = WeightedGraph::random_connected(6, 0.5, 3).unwrap();
        let basis = cycle_basis(&g, 0);
        let zero = vec![0.0; basis.rank()];
        assert_close!(twisted_det_ratio(&g, &basis, &zero, 1.0, Representative::Cotree), 1.0, 1e-14);
        let theta: Vec<f64> = (0..basis.rank()).map(|i| 0.17 * (i + 1) as f64).collect();
        let a = twisted_det_ratio(&g, &basis, &theta, 0.7, Representative::Cotree);
        let b = twisted_det_ratio(&g, &basis, &theta, 0.7, Representative::Harmonic);
        assert_close!(a, b, 1e-12);
        let c3 = WeightedGraph::builtin("t3").unwrap();
        let k = build_kernel(&c3);
        let basis = cycle_basis(&c3, 0);
        for theta in [0.0, 0.13, 0.5] {
            let w = cotree_form(3, &basis, &[theta]);
            let pt = u1_twisted_kernel(&k, &w);
            let d = crate::linalg::det_c(&(CMatrix::identity(3, 3) - pt)).re;
            let closed = circle_cn(3, 1.0) + 2.0 * (1.0 - (std::f64::consts::TAU * theta).cos());
            assert_close!(27.0 * d, closed, 1e-12);
            assert_close!(circle_twisted_det(3, 1.0, theta), d, 1e-14);
        }
    }

    #[test]
    fn circle_constants() {
        assert_close!(circle_cn(3, 1.0), 16.0, 1e-12);
        assert_close!(circle_cn(4, 1.0), 45.0, 1e-12);
        assert_close!(circle_cn(5, 1.0), 121.0, 1e-11);
        for n in 3..=5 {
            assert_close!(circle_cn_displayed(n, 1.0), circle_cn(n, 1.0), 1e-10);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            for theta in [0.0, 0.3] {
                assert_close!(circle_det_displayed(n, 1.0, theta), sign * circle_twisted_det(n, 1.0, theta), 1e-14);
            }
        }
    }

    #[test]
    fn homology_law_circle() {
        let g = WeightedGraph::builtin("cycle4").unwrap();
        let basis = cycle_basis(&g, 0);
        let law = homology_law(&g, &basis, 1.0, 64, 12).unwrap();
        let total: f64 = law.iter().map(|(_, p)| p.value).sum();
        assert_close!(total, 1.0, 1e-6);
        for (j, p) in &law {
            let mirror = law.iter().find(|(k, _)| k[0] == -j[0]).unwrap();
            assert_close!(p.value, mirror.1.value, 1e-10);
            let closed = circle_law_closed_form(4, 1.0, 1.0, j[0].abs(), 64);
            assert_close!(p.value, closed, 1e-8);
        }
        let single = prob_homology(&g, &basis, &[2], 1.0, 64).unwrap();
        let row = law.iter().find(|(k, _)| k[0] == 2).unwrap();
        assert_close!(single.value, row.1.value, 1e-13);
    }

    #[test]
    fn brownian_limit_is_nb_difference() {
        for alpha in [0.5, 1.0, 2.0] {
            let q = (-1.0f64).exp();
            let mut total = 0.0;
            for j in -10..=10i64 {
                let a = brownian_circle_limit(1.0, alpha, j, 256);
                let b = nb_difference_pmf(alpha, q, j);
                assert_close!(a, b, 1e-8);
                total += a;
            }
            assert!(total > 0.999 && total <= 1.0 + 1e-12);
        }
        let n = 200;
        let k = 1.0;
        let gap = (0..=10i64)
            .map(|j| (circle_law_closed_form(n, k / (n * n) as f64, 1.0, j, 256) - brownian_circle_limit(k, 1.0, j, 256)).abs())
            .fold(0.0, f64::max);
        assert!(gap < 1e-3, "{gap}");
    }
}
