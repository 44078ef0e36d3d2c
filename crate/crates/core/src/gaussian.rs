//! Free fields with covariance `G`, exact evaluators of the loop and Gaussian generating
//! functions, and moment comparisons between occupation fields and squared fields.

use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::{build_kernel, green, Kernel, WeightedGraph};
use crate::linalg::{continued_log_det, det_c, CMatrix};
use crate::loops::enumerate_loops;
use crate::rng::{replica_seed, substream, Stream};
use crate::sampler::{occupation_field, sample_soup, sample_soup_wilson};
use crate::stats::{one_sample_z, two_sample_z, Moments};

/// Real field (`α = ½`) or complex field (`α = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Real,
    Complex,
}

impl FieldKind {
    pub fn alpha(self) -> f64 {
        match self {
            FieldKind::Real => 0.5,
            FieldKind::Complex => 1.0,
        }
    }
}

/// A Hermitian edge multiplier `Z` and a nonnegative vertex potential `χ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctional {
    pub z: CMatrix,
    pub chi: Vec<f64>,
}

impl TestFunctional {
    /// `Z ≡ 1` on edges, `χ ≡ 0`.
    pub fn trivial(g: &WeightedGraph) -> Self {
        let mut z = CMatrix::zeros(g.n(), g.n());
        for &(u, v) in g.edges() {
            z[(u, v)] = Complex64::new(1.0, 0.0);
            z[(v, u)] = Complex64::new(1.0, 0.0);
        }
        TestFunctional { z, chi: vec![0.0; g.n()] }
    }

    /// Random instance with `|Z_{x,y}| ≤ radius` on edges and `χ ∈ (0, chi_max)`; `real`
    /// makes `Z` real symmetric.
    pub fn random(g: &WeightedGraph, seed: u64, radius: f64, chi_max: f64, real: bool) -> Self {
        let mut rng = substream(seed, Stream::Experiment, 0x7e57);
        let mut tf = Self::trivial(g);
        for &(u, v) in g.edges() {
            let r = radius * rng.random::<f64>();
            let w = if real {
                Complex64::new(if rng.random_bool(0.5) { r } else { -r }, 0.0)
            } else {
                Complex64::from_polar(r, std::f64::consts::TAU * rng.random::<f64>())
            };
            tf.z[(u, v)] = w;
            tf.z[(v, u)] = w.conj();
        }
        tf.chi = (0..g.n()).map(|_| chi_max * rng.random::<f64>()).collect();
        tf
    }

    /// Hermitian, supported on edges, and `χ ≥ 0`.
    pub fn validate(&self, g: &WeightedGraph) -> Result<()> {
        let n = g.n();
        if self.z.nrows() != n || self.z.ncols() != n || self.chi.len() != n {
            return Err(Error::InvalidArgument("test functional size does not match graph".into()));
        }
        if self.chi.iter().any(|&c| !(c >= 0.0)) {
            return Err(Error::InvalidArgument("chi must be nonnegative".into()));
        }
        for x in 0..n {
            for y in 0..n {
                let zxy = self.z[(x, y)];
                if !g.is_edge(x, y) && zxy != Complex64::new(0.0, 0.0) {
                    return Err(Error::OffSupport(x, y));
                }
                if (zxy - self.z[(y, x)].conj()).norm() > 1e-14 {
                    return Err(Error::InvalidArgument("Z must be Hermitian".into()));
                }
            }
        }
        Ok(())
    }

    pub fn is_real(&self) -> bool {
        self.z.iter().all(|v| v.im == 0.0)
    }
}

/// `D · P^Z` with `D = diag(λ/(λ+χ))` and `P^Z_{x,y} = P_{x,y} Z_{x,y}`.
fn scaled_twisted(kernel: &Kernel, z: &CMatrix, chi: &[f64]) -> CMatrix {
    let n = kernel.n();
    CMatrix::from_fn(n, n, |x, y| {
        let d = kernel.lambda()[x] / (kernel.lambda()[x] + chi[x]);
        z[(x, y)] * (d * kernel.p()[(x, y)])
    })
}

/// `log det(I − D P^Z) − log det(I − P)`, continued along `Z_t = 1 + t(Z − 1)`, `χ_t = tχ`.
pub fn log_det_ratio(g: &WeightedGraph, tf: &TestFunctional) -> Result<Complex64> {
    tf.validate(g)?;
    let kernel = build_kernel(g);
    let one = TestFunctional::trivial(g);
    let n = g.n();
    let eye = CMatrix::identity(n, n);
    let path = |t: f64| {
        let z = one.z.map(|v| v * (1.0 - t)) + tf.z.map(|v| v * t);
        let chi: Vec<f64> = tf.chi.iter().map(|c| c * t).collect();
        &eye - scaled_twisted(&kernel, &z, &chi)
    };
    Ok(continued_log_det(path)? - kernel.log_det_i_minus_p())
}

/// `E[Π_x e^{−χ_x L̂^x} Π_{x,y} Z_{x,y}^{N_{x,y}}]` for the ensemble of non-trivial loops:
/// `[det(I − D P^Z)/det(I − P)]^{−α}`, principal branch fixed by continuation from `Z ≡ 1`.
pub fn gen_fn_loops_nontrivial(g: &WeightedGraph, tf: &TestFunctional, alpha: f64) -> Result<Complex64> {
    Ok((-alpha * log_det_ratio(g, tf)?).exp())
}

/// The same generating function for the full ensemble including one-point loops, which
/// contribute `Π_x (λ_x/(λ_x+χ_x))^α`.
pub fn gen_fn_loops(g: &WeightedGraph, tf: &TestFunctional, alpha: f64) -> Result<Complex64> {
    let log_trivial: f64 = g
        .lambda()
        .iter()
        .zip(&tf.chi)
        .map(|(l, c)| (l / (l + c)).ln())
        .sum();
    Ok((-alpha * log_det_ratio(g, tf)? + alpha * log_trivial).exp())
}

/// `(Λ + χ) − C∘Z`.
fn modified_form(g: &WeightedGraph, tf: &TestFunctional) -> CMatrix {
    let n = g.n();
    let lambda = g.lambda();
    CMatrix::from_fn(n, n, |x, y| {
        if x == y {
            Complex64::new(lambda[x] + tf.chi[x], 0.0)
        } else {
            tf.z[(x, y)] * (-g.c(x, y))
        }
    })
}

/// Gaussian side: `det(Λ − C)/det((Λ+χ) − C∘Z)` for the complex field and its square root
/// for the real field. The modified form must be positive definite.
pub fn gen_fn_gaussian(g: &WeightedGraph, tf: &TestFunctional, kind: FieldKind) -> Result<f64> {
    tf.validate(g)?;
    if kind == FieldKind::Real && !tf.is_real() {
        return Err(Error::InvalidArgument("the real field needs a real symmetric Z".into()));
    }
    let q = modified_form(g, tf);
    let log_q = crate::linalg::log_det_hpd(&q).ok_or(Error::IndefiniteForm)?;
    let log_q0 = crate::linalg::log_det_spd(&g.energy_matrix()).ok_or(Error::NotTransient)?;
    Ok((kind.alpha() * (log_q0 - log_q)).exp())
}

/// Draws free fields from a Cholesky factor of `G`.
#[derive(Debug, Clone)]
pub struct FieldSampler {
    factor: DMatrix<f64>,
}

/// A field realization; real fields have zero imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub kind: FieldKind,
    pub values: Vec<Complex64>,
}

impl FieldSample {
    /// `½|φ_x|²`.
    pub fn half_square(&self) -> Vec<f64> {
        self.values.iter().map(|v| 0.5 * v.norm_sqr()).collect()
    }
}

impl FieldSampler {
    pub fn new(g: &WeightedGraph) -> Result<Self> {
        Self::from_covariance(green(g).g)
    }

    pub fn from_covariance(cov: DMatrix<f64>) -> Result<Self> {
        let chol = Cholesky::new(cov.clone()).ok_or(Error::IndefiniteForm)?;
        let factor = chol.l();
        debug_assert!(crate::linalg::max_abs_diff(&(&factor * factor.transpose()), &cov) < 1e-10);
        Ok(FieldSampler { factor })
    }

    pub fn n(&self) -> usize {
        self.factor.nrows()
    }

    fn real_draw<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let xi: Vec<f64> = (0..self.n()).map(|_| rng.sample(StandardNormal)).collect();
        (0..self.n())
            .map(|i| (0..=i).map(|j| self.factor[(i, j)] * xi[j]).sum())
            .collect()
    }

    /// Real field with covariance `G`, or `φ_1 + iφ_2` with independent real copies.
    pub fn sample<R: Rng>(&self, kind: FieldKind, rng: &mut R) -> FieldSample {
        let re = self.real_draw(rng);
        let values = match kind {
            FieldKind::Real => re.into_iter().map(|r| Complex64::new(r, 0.0)).collect(),
            FieldKind::Complex => {
                let im = self.real_draw(rng);
                re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect()
            }
        };
        FieldSample { kind, values }
    }
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

/// Monte Carlo version of [`gen_fn_gaussian`]: the mean of
/// `exp(−½ [Σ χ_x |φ_x|² − Σ_{x,y} C_{x,y}(Z_{x,y} − 1) φ̄_x φ_y])`.
pub fn gen_fn_gaussian_mc(
    g: &WeightedGraph,
    tf: &TestFunctional,
    kind: FieldKind,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    tf.validate(g)?;
    let sampler = FieldSampler::new(g)?;
    let mut rng = substream(seed, Stream::Field, 0);
    let mut m = Moments::default();
    for _ in 0..samples {
        let phi = sampler.sample(kind, &mut rng).values;
        let mut q = 0.0;
        for x in 0..g.n() {
            q += tf.chi[x] * phi[x].norm_sqr();
        }
        for &(u, v) in g.edges() {
            for (x, y) in [(u, v), (v, u)] {
                q -= g.c(x, y) * ((tf.z[(x, y)] - 1.0) * phi[x].conj() * phi[y]).re;
            }
        }
        m.push((-0.5 * q).exp());
    }
    Ok(Estimate { mean: m.mean, std_error: m.std_error() })
}

/// Whether the Monte Carlo estimator of [`gen_fn_gaussian_mc`] has finite variance:
/// `(Λ − C) + 2χ − 2 C∘(Z − 1)` positive definite.
pub fn mc_variance_finite(g: &WeightedGraph, tf: &TestFunctional) -> bool {
    let n = g.n();
    let base = crate::linalg::to_complex(&g.energy_matrix());
    let m = CMatrix::from_fn(n, n, |x, y| {
        let extra = if x == y {
            Complex64::new(2.0 * tf.chi[x], 0.0)
        } else if g.is_edge(x, y) {
            (tf.z[(x, y)] - 1.0) * (-2.0 * g.c(x, y))
        } else {
            Complex64::new(0.0, 0.0)
        };
        base[(x, y)] + extra
    });
    crate::linalg::log_det_hpd(&m).is_some()
}

/// `det(I − D P^Z)` and `det(I − P^Z D)` (equal by similarity).
pub fn scaling_sides(g: &WeightedGraph, tf: &TestFunctional) -> (Complex64, Complex64) {
    let kernel = build_kernel(g);
    let n = g.n();
    let eye = CMatrix::identity(n, n);
    let left = det_c(&(&eye - scaled_twisted(&kernel, &tf.z, &tf.chi)));
    let pz = CMatrix::from_fn(n, n, |x, y| tf.z[(x, y)] * kernel.p()[(x, y)]);
    let d = CMatrix::from_fn(n, n, |x, y| {
        if x == y {
            Complex64::new(kernel.lambda()[x] / (kernel.lambda()[x] + tf.chi[x]), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let right = det_c(&(&eye - pz * d));
    (left, right)
}

/// One compared statistic of the isomorphism test.
#[derive(Debug, Clone, PartialEq)]
pub struct IsoRow {
    pub statistic: String,
    pub soup: Estimate,
    pub field: Estimate,
    pub exact: f64,
    /// Soup versus field, in joint standard errors.
    pub z_field: f64,
    /// Soup versus the exact Gaussian moment.
    pub z_exact: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsoReport {
    pub kind: FieldKind,
    pub samples: usize,
    pub rows: Vec<IsoRow>,
    pub threshold: f64,
}

impl IsoReport {
    pub fn worst_z(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.z_field.abs().max(r.z_exact.abs()))
            .fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.worst_z() <= self.threshold
    }
}

/// Exact moments of `½|φ|²` (complex) or `½φ²` (real): `E[(½|φ_x|²)^k]`, `k = 1..3`.
fn exact_moment(kind: FieldKind, gxx: f64, k: i32) -> f64 {
    match (kind, k) {
        (FieldKind::Complex, 1) => gxx,
        (FieldKind::Complex, 2) => 2.0 * gxx.powi(2),
        (FieldKind::Complex, 3) => 6.0 * gxx.powi(3),
        (FieldKind::Real, 1) => 0.5 * gxx,
        (FieldKind::Real, 2) => 0.75 * gxx.powi(2),
        (FieldKind::Real, 3) => 1.875 * gxx.powi(3),
        _ => unreachable!("moments up to order three"),
    }
}

fn exact_cross(kind: FieldKind, gxx: f64, gyy: f64, gxy: f64) -> f64 {
    match kind {
        FieldKind::Complex => gxx * gyy + gxy * gxy,
        FieldKind::Real => 0.25 * (gxx * gyy + 2.0 * gxy * gxy),
    }
}

/// Compares the first three marginal moments and pairwise products of the occupation
/// field `L̂_α` with those of the squared free field, `α ∈ {½, 1}`.
///
/// `α = 1` uses Wilson's algorithm; `α = ½` uses the truncated table with a cap chosen so
/// the expected number of missing loops is below `1e-4`.
pub fn isomorphism_test(g: &WeightedGraph, kind: FieldKind, samples: usize, seed: u64) -> Result<IsoReport> {
    let kernel = build_kernel(g);
    let n = g.n();
    let gm = green(g);
    let alpha = kind.alpha();
    let table = match kind {
        FieldKind::Real => Some(table_with_tail(&kernel, 1e-4)?),
        FieldKind::Complex => None,
    };
    let mut soup_values: Vec<Vec<f64>> = Vec::with_capacity(samples);
    for r in 0..samples as u64 {
        let s = replica_seed(seed, r);
        let sample = match &table {
            Some(t) => sample_soup(t, alpha, s),
            None => sample_soup_wilson(&kernel, s),
        };
        soup_values.push(occupation_field(&sample, &kernel, alpha, s).values);
    }
    let sampler = FieldSampler::new(g)?;
    let mut rng = substream(seed, Stream::Field, 1);
    let field_values: Vec<Vec<f64>> = (0..samples).map(|_| sampler.sample(kind, &mut rng).half_square()).collect();

    let mut rows = Vec::new();
    let collect = |vals: &[Vec<f64>], f: &dyn Fn(&[f64]) -> f64| -> Estimate {
        let m: Moments = vals.iter().map(|v| f(v)).collect();
        Estimate { mean: m.mean, std_error: m.std_error() }
    };
    let mut push = |name: String, f: &dyn Fn(&[f64]) -> f64, exact: f64| {
        let ms: Moments = soup_values.iter().map(|v| f(v)).collect();
        let mf: Moments = field_values.iter().map(|v| f(v)).collect();
        rows.push(IsoRow {
            statistic: name,
            soup: collect(&soup_values, f),
            field: collect(&field_values, f),
            exact,
            z_field: two_sample_z(&ms, &mf),
            z_exact: one_sample_z(&ms, exact),
        });
    };
    for x in 0..n {
        for k in 1..=3 {
            push(format!("E[L^{}_{}]", k, g.names()[x]), &|v: &[f64]| v[x].powi(k), exact_moment(kind, gm.get(x, x), k));
        }
    }
    for x in 0..n {
        for y in x + 1..n {
            push(
                format!("E[L_{} L_{}]", g.names()[x], g.names()[y]),
                &|v: &[f64]| v[x] * v[y],
                exact_cross(kind, gm.get(x, x), gm.get(y, y), gm.get(x, y)),
            );
        }
    }
    Ok(IsoReport { kind, samples, rows, threshold: 4.0 })
}

/// Smallest cap `≥ 4` whose tail bound is below `tol` (up to a cap of 40).
pub fn table_with_tail(kernel: &Kernel, tol: f64) -> Result<crate::loops::LoopMeasureTable> {
    let rho = kernel.spectral_radius();
    let mut cap = 4usize;
    // the tail decays like ρ^{cap}; skip caps that cannot reach the target
    if rho > 0.0 && rho < 1.0 {
        cap = cap.max(((tol * (1.0 - rho)).ln() / rho.ln()).floor() as usize / 2);
    }
    loop {
        let t = enumerate_loops(kernel, cap.min(40))?;
        if t.tail_bound <= tol || cap >= 40 {
            return Ok(t);
        }
        cap += 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t2() -> WeightedGraph {
        WeightedGraph::builtin("t2").unwrap()
    }

    fn edge_z(g: &WeightedGraph, s: Complex64) -> TestFunctional {
        let mut tf = TestFunctional::trivial(g);
        for &(u, v) in g.edges() {
            tf.z[(u, v)] = s;
            tf.z[(v, u)] = s.conj();
        }
        tf
    }

    #[test]
    fn loop_side_examples() {
        let g = t2();
        let one = TestFunctional::trivial(&g);
        assert_close!(gen_fn_loops(&g, &one, 1.0).unwrap().re, 1.0, 1e-14);
        let zero = edge_z(&g, Complex64::new(0.0, 0.0));
        let v = gen_fn_loops_nontrivial(&g, &zero, 1.0).unwrap();
        assert_close!(v.re, 0.75, 1e-14);
        assert_close!(v.im, 0.0, 1e-14);
        for s in [0.3, -0.7, 1.5] {
            let v = gen_fn_loops_nontrivial(&g, &edge_z(&g, Complex64::new(s, 0.0)), 1.0).unwrap();
            assert_close!(v.re, 0.75 / (1.0 - s * s / 4.0), 1e-13);
        }
    }

    #[test]
    fn loop_and_gaussian_sides_agree() {
        for name in ["t2", "t3", "cycle4"] {
            let g = WeightedGraph::builtin(name).unwrap();
            for seed in 0..10 {
                let tf = TestFunctional::random(&g, seed, 1.0, 1.0, false);
                let a = gen_fn_loops(&g, &tf, 1.0).unwrap();
                let b = gen_fn_gaussian(&g, &tf, FieldKind::Complex).unwrap();
                assert!((a.re / b - 1.0).abs() < 1e-10 && a.im.abs() < 1e-10 * b);
                let tf = TestFunctional::random(&g, seed, 1.0, 1.0, true);
                let a = gen_fn_loops(&g, &tf, 0.5).unwrap();
                let b = gen_fn_gaussian(&g, &tf, FieldKind::Real).unwrap();
                assert!((a.re / b - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn indefinite_form_is_rejected() {
        let g = t2();
        let tf = edge_z(&g, Complex64::new(3.0, 0.0));
        assert!(matches!(gen_fn_gaussian(&g, &tf, FieldKind::Complex), Err(Error::IndefiniteForm)));
    }

    #[test]
    fn scaling_side_is_irrelevant() {
        let g = WeightedGraph::builtin("t3").unwrap();
        let tf = TestFunctional::random(&g, 4, 1.0, 1.0, false);
        let (l, r) = scaling_sides(&g, &tf);
        assert!((l - r).norm() < 1e-12);
    }

    #[test]
    fn monte_carlo_estimator_converges() {
        let g = t2();
        let mut tf = edge_z(&g, Complex64::from_polar(0.9, 0.4));
        tf.chi = vec![0.3, 0.8];
        assert!(mc_variance_finite(&g, &tf));
        let exact = gen_fn_gaussian(&g, &tf, FieldKind::Complex).unwrap();
        let est = gen_fn_gaussian_mc(&g, &tf, FieldKind::Complex, 20_000, 1).unwrap();
        assert!((est.mean - exact).abs() < 4.0 * est.std_error);
    }

    #[test]
    fn field_sampler_has_covariance_g() {
        let g = t2();
        let s = FieldSampler::new(&g).unwrap();
        let mut rng = substream(2, Stream::Field, 0);
        let draws: Vec<FieldSample> = (0..20_000).map(|_| s.sample(FieldKind::Complex, &mut rng)).collect();
        let m: Moments = draws.iter().map(|d| (d.values[0] * d.values[1].conj()).re).collect();
        // E[φ_a φ̄_b] = 2 G_ab = 2/3
        assert!(one_sample_z(&m, 2.0 / 3.0).abs() < 4.0);
    }

    #[test]
    fn isomorphism_moments_t2() {
        let report = isomorphism_test(&t2(), FieldKind::Complex, 20_000, 5).unwrap();
        assert!(report.passed(), "{:?}", report.rows);
        let first = &report.rows[0];
        assert_close!(first.exact, 2.0 / 3.0, 1e-14);
        assert_close!(report.rows[1].exact, 2.0 * 4.0 / 9.0, 1e-14);
    }
}
