//! Soup-induced weights on gauge assignments, plaquettes, the Yang–Mills limit weight and
//! the scaling experiment that connects them.

use num_complex::Complex64;

use crate::covering::{twisted_kernel, MAssignment};
use crate::error::{Error, Result};
use crate::graph::{build_kernel, Kernel, WeightedGraph};
use crate::group::{FiniteGroup, Irrep};
use crate::homology::{holonomy, u1_twisted_kernel, OneForm};
use crate::linalg::{log_det_hpd, CMatrix};
use crate::loops::{reduce_loop, LoopClass, LoopMeasureTable};

/// A unitary connection seen through one representation: its transfer operator `P^{U,π}`
/// and the character of its holonomy along a loop.
pub trait Connection {
    fn dim(&self) -> usize;
    fn transfer(&self, kernel: &Kernel) -> CMatrix;
    fn loop_character(&self, class: &LoopClass) -> Complex64;

    /// `log det(I − P^{U,π})` through the Hermitian form `Λ ⊗ I − C π(U)`.
    fn log_det(&self, kernel: &Kernel) -> Result<f64> {
        let d = self.dim();
        let lambda = kernel.lambda();
        let pt = self.transfer(kernel);
        let n = pt.nrows();
        let h = CMatrix::from_fn(n, n, |i, j| {
            let l = lambda[i / d];
            let delta = if i == j { 1.0 } else { 0.0 };
            (Complex64::new(delta, 0.0) - pt[(i, j)]) * l
        });
        let log_h = log_det_hpd(&h).ok_or(Error::BranchFailure)?;
        Ok(log_h - d as f64 * lambda.iter().map(|l| l.ln()).sum::<f64>())
    }
}

/// A finite-group assignment read through an irreducible representation.
#[derive(Debug, Clone, Copy)]
pub struct FiniteConnection<'a> {
    pub group: &'a FiniteGroup,
    pub u: &'a MAssignment,
    pub irrep: &'a Irrep,
}

impl Connection for FiniteConnection<'_> {
    fn dim(&self) -> usize {
        self.irrep.dim
    }

    fn transfer(&self, kernel: &Kernel) -> CMatrix {
        twisted_kernel(kernel, self.u, self.irrep)
    }

    fn loop_character(&self, class: &LoopClass) -> Complex64 {
        self.irrep.character(self.u.loop_element(self.group, class.vertices()))
    }
}

/// A `U(1)` connection `e^{2πiω}` in its defining representation.
#[derive(Debug, Clone)]
pub struct U1Connection {
    pub omega: OneForm,
}

impl Connection for U1Connection {
    fn dim(&self) -> usize {
        1
    }

    fn transfer(&self, kernel: &Kernel) -> CMatrix {
        u1_twisted_kernel(kernel, &self.omega)
    }

    fn loop_character(&self, class: &LoopClass) -> Complex64 {
        Complex64::from_polar(1.0, std::f64::consts::TAU * holonomy(&self.omega, class.vertices()))
    }
}

/// A log-weight under both normalizations of the character exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogWeight {
    /// Exponent `Σ μ(l)(χ_π(l) − d_π)`, which gives the trivial connection weight 1.
    pub primary: f64,
    /// Exponent `Σ μ(l)(χ_π(l) − 1)`; equal to `primary` when `d_π = 1`.
    pub literal: f64,
}

impl LogWeight {
    pub fn value(&self) -> f64 {
        self.primary.exp()
    }
}

/// `log Λ_π^α = −α [log det(I − P^{U,π}) − d_π log det(I − P)]`, with the literal variant
/// `−α [log det(I − P^{U,π}) − log det(I − P)]`.
pub fn lambda_alpha(kernel: &Kernel, conn: &dyn Connection, alpha: f64) -> Result<LogWeight> {
    let twisted = conn.log_det(kernel)?;
    let base = kernel.log_det_i_minus_p();
    Ok(LogWeight {
        primary: -alpha * (twisted - conn.dim() as f64 * base),
        literal: -alpha * (twisted - base),
    })
}

/// `α Σ_{table} μ(l)(Re χ_π(l) − d_π)` and the bound `2 d_π α · tail` on what the
/// truncation leaves out.
pub fn lambda_alpha_by_table(table: &LoopMeasureTable, conn: &dyn Connection, alpha: f64) -> (f64, f64) {
    let d = conn.dim() as f64;
    let s: f64 = table.entries().iter().map(|(l, mu)| mu * (conn.loop_character(l).re - d)).sum();
    (alpha * s, 2.0 * d * alpha * table.tail_bound)
}

/// Loop classes of minimal length among those with non-trivial homotopy.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaquetteSet {
    pub d: usize,
    pub plaquettes: Vec<(LoopClass, f64)>,
}

/// Minimal-length classes whose backtrack reduction is non-empty.
pub fn find_plaquettes(table: &LoopMeasureTable) -> Result<PlaquetteSet> {
    let essential = table.entries().iter().filter(|(l, _)| !reduce_loop(l.vertices()).is_empty());
    let d = essential.clone().map(|(l, _)| l.len()).min().ok_or(Error::NoPlaquette(table.l_max))?;
    let plaquettes = essential.filter(|(l, _)| l.len() == d).cloned().collect();
    Ok(PlaquetteSet { d, plaquettes })
}

/// `log Λ_{π,c} = c Σ_{plaquettes} μ(l)(Re χ_π(l) − d_π)`, plus the literal `(Re χ_π − 1)`.
pub fn lambda_ym(plaquettes: &PlaquetteSet, conn: &dyn Connection, c: f64) -> LogWeight {
    let d = conn.dim() as f64;
    let (mut primary, mut literal) = (0.0, 0.0);
    for (l, mu) in &plaquettes.plaquettes {
        let chi = conn.loop_character(l).re;
        primary += mu * (chi - d);
        literal += mu * (chi - 1.0);
    }
    LogWeight { primary: c * primary, literal: c * literal }
}

/// `Λ_ι^α(ω) = [det G^{(2πiω)}/det G]^α` for holonomies `θ` on the fundamental cycles.
pub fn u1_weight(g: &WeightedGraph, basis: &crate::graph::CycleBasis, theta: &[f64], alpha: f64) -> f64 {
    crate::homology::twisted_det_ratio(g, basis, theta, alpha, crate::homology::Representative::Cotree)
}

/// `Λ_{ι,c}(ω)` for the same torus point.
pub fn u1_ym_weight(g: &WeightedGraph, basis: &crate::graph::CycleBasis, plaquettes: &PlaquetteSet, theta: &[f64], c: f64) -> f64 {
    let conn = U1Connection { omega: crate::homology::cotree_form(g.n(), basis, theta) };
    lambda_ym(plaquettes, &conn, c).value()
}

/// `ε`-scaling: `λ_ε = λ/ε` (killing raised by `λ(1 − ε)/ε`), `P_ε = εP`, `α_ε = c ε^{−d}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSchedule {
    pub c: f64,
    pub d: usize,
    pub epsilons: Vec<f64>,
}

impl ScalingSchedule {
    pub fn new(c: f64, d: usize, epsilons: Vec<f64>) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidArgument("c must be positive".into()));
        }
        if epsilons.is_empty() || epsilons.iter().any(|&e| !(e > 0.0 && e <= 1.0)) || epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument("epsilons must be a decreasing list in (0, 1]".into()));
        }
        Ok(ScalingSchedule { c, d, epsilons })
    }

    pub fn alpha(&self, eps: f64) -> f64 {
        self.c * eps.powi(-(self.d as i32))
    }
}

/// Per-length coefficients `(Re tr (P^{U,π})^k − d tr P^k)/k` and the literal
/// `(Re tr (P^{U,π})^k − tr P^k)/k`, for `k = 1..=k_max`.
pub fn trace_coefficients(kernel: &Kernel, conn: &dyn Connection, k_max: usize) -> Vec<(f64, f64)> {
    let d = conn.dim() as f64;
    let pt = conn.transfer(kernel);
    let p = kernel.p();
    let mut pt_k = pt.clone();
    let mut p_k = p.clone();
    let mut out = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let a = pt_k.trace().re;
        let b = p_k.trace();
        out.push(((a - d * b) / k as f64, (a - b) / k as f64));
        pt_k = &pt_k * &pt;
        p_k = &p_k * p;
    }
    out
}

/// `log Λ_π^{α_ε}` under the scaling, summed as `c Σ_k ε^{k−d} a_k` so no cancellation
/// between nearly equal determinants occurs.
fn scaled_log_weight(coeffs: &[(f64, f64)], c: f64, d: usize, eps: f64) -> LogWeight {
    let (mut primary, mut literal) = (0.0, 0.0);
    for (i, (a, b)) in coeffs.iter().enumerate() {
        let f = eps.powi(i as i32 + 1 - d as i32);
        primary += f * a;
        literal += f * b;
    }
    LogWeight { primary: c * primary, literal: c * literal }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub alpha: f64,
    pub log_lambda_alpha: LogWeight,
    pub log_lambda_ym: LogWeight,
    /// `|log Λ_π^{α_ε} − log Λ_{π,c}|` for the primary exponent.
    pub gap: f64,
    pub gap_literal: f64,
    /// Same quantity from two determinants, as a check on the series.
    pub log_lambda_alpha_det: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub d: usize,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares `K` in `gap ≈ K ε`.
    pub fitted_k: f64,
    /// Slope of `log gap` against `log ε`.
    pub fitted_order: f64,
    /// `gap(ε_i)/gap(ε_{i+1})` for consecutive schedule entries.
    pub halving_ratios: Vec<f64>,
}

/// Sweeps the schedule; `d` comes from the plaquettes found in `table` and overrides the
/// schedule's own `d`.
pub fn convergence_experiment(
    g: &WeightedGraph,
    table: &LoopMeasureTable,
    conn: &dyn Connection,
    c: f64,
    epsilons: &[f64],
) -> Result<ConvergenceReport> {
    let plaquettes = find_plaquettes(table)?;
    let schedule = ScalingSchedule::new(c, plaquettes.d, epsilons.to_vec())?;
    let kernel = build_kernel(g);
    let ym = lambda_ym(&plaquettes, conn, c);
    let rho = kernel.spectral_radius();
    let eps_max = schedule.epsilons[0];
    // terms decay like (ε ρ)^k; stop well below double precision of the leading term
    let k_max = if eps_max * rho < 1.0 {
        ((1e-20f64).ln() / (eps_max * rho).ln()).ceil() as usize + schedule.d + 2
    } else {
        return Err(Error::InvalidArgument("ε ρ(P) must be below 1".into()));
    };
    let coeffs = trace_coefficients(&kernel, conn, k_max.min(2000));
    let mut rows = Vec::new();
    for &eps in &schedule.epsilons {
        let alpha = schedule.alpha(eps);
        let series = scaled_log_weight(&coeffs, c, schedule.d, eps);
        let det = lambda_alpha(&kernel.scaled(eps), conn, alpha)?;
        rows.push(ConvergenceRow {
            eps,
            alpha,
            log_lambda_alpha: series,
            log_lambda_ym: ym,
            gap: (series.primary - ym.primary).abs(),
            gap_literal: (series.literal - ym.literal).abs(),
            log_lambda_alpha_det: det.primary,
        });
    }
    let fitted_k = rows.iter().map(|r| r.gap * r.eps).sum::<f64>() / rows.iter().map(|r| r.eps * r.eps).sum::<f64>();
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.gap > 0.0).map(|r| (r.eps.ln(), r.gap.ln())).collect();
    let fitted_order = if pts.len() >= 2 {
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / m, sy / m);
        let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
        num / den
    } else {
        f64::NAN
    };
    let halving_ratios = rows.windows(2).map(|w| w[0].gap / w[1].gap).collect();
    Ok(ConvergenceReport { d: schedule.d, rows, fitted_k, fitted_order, halving_ratios })
}

/// `log` of the circle closed form `[C_N(κ)/(C_N(κ) + 2(1 − cos 2πθ))]^α`.
pub fn circle_log_weight(n: usize, kappa: f64, theta: f64, alpha: f64) -> f64 {
    let cn = crate::homology::circle_cn(n, kappa);
    -alpha * (2.0 * (1.0 - (std::f64::consts::TAU * theta).cos()) / cn).ln_1p()
}

/// `log Λ_{ι,c}` on the circle: `−2c(1 − cos 2πθ)/(2+κ)^N`.
pub fn circle_log_ym(n: usize, kappa: f64, theta: f64, c: f64) -> f64 {
    -2.0 * c * (1.0 - (std::f64::consts::TAU * theta).cos()) / (2.0 + kappa).powi(n as i32)
}
