//! Eulerian and even networks: exact laws and joint densities with the occupation field,
//! exhaustive enumeration for small totals, the exact law of the total jump count, and the
//! conditional independence test across a vertex bipartition.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{Kernel, WeightedGraph};
use crate::linalg::ln_factorial;
use crate::stats::{chi_square_independence, ChiSquare};

/// Jump counts `k_{x,y}` on ordered vertex pairs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Network {
    n: usize,
    k: Vec<u64>,
}

impl Network {
    pub fn zeros(n: usize) -> Self {
        Network { n, k: vec![0; n * n] }
    }

    pub fn from_entries(n: usize, entries: &[(usize, usize, u64)]) -> Self {
        let mut net = Self::zeros(n);
        for &(x, y, c) in entries {
            net.add_to(x, y, c);
        }
        net
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, x: usize, y: usize) -> u64 {
        self.k[x * self.n + y]
    }

    pub fn set(&mut self, x: usize, y: usize, c: u64) {
        self.k[x * self.n + y] = c;
    }

    pub fn add_to(&mut self, x: usize, y: usize, c: u64) {
        self.k[x * self.n + y] += c;
    }

    /// Outgoing throughput `k_x = Σ_y k_{x,y}`.
    pub fn throughput(&self, x: usize) -> u64 {
        (0..self.n).map(|y| self.get(x, y)).sum()
    }

    pub fn in_flow(&self, x: usize) -> u64 {
        (0..self.n).map(|y| self.get(y, x)).sum()
    }

    pub fn total(&self) -> u64 {
        self.k.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.k.iter().all(|&c| c == 0)
    }

    /// First vertex where in- and out-throughput differ.
    pub fn eulerian_defect(&self) -> Option<usize> {
        (0..self.n).find(|&x| self.throughput(x) != self.in_flow(x))
    }

    pub fn is_eulerian(&self) -> bool {
        self.eulerian_defect().is_none()
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        let n = self.n;
        self.k
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(move |(i, &c)| (i / n, i % n, c))
    }

    pub fn merge(&mut self, other: &Network) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.k.iter_mut().zip(&other.k) {
            *a += b;
        }
    }

    /// Checks support on graph edges and the Eulerian property.
    pub fn validate(&self, g: &WeightedGraph) -> Result<()> {
        if self.n != g.n() {
            return Err(Error::InvalidArgument("network size does not match graph".into()));
        }
        if let Some((x, y, _)) = self.nonzero().find(|&(x, y, _)| !g.is_edge(x, y)) {
            return Err(Error::OffSupport(x, y));
        }
        match self.eulerian_defect() {
            Some(x) => Err(Error::NotEulerian(x)),
            None => Ok(()),
        }
    }

    /// Unoriented counts `k_{x,y} + k_{y,x}` in the graph's edge order.
    pub fn symmetrized(&self, g: &WeightedGraph) -> EvenNetwork {
        let m = g.edges().iter().map(|&(u, v)| self.get(u, v) + self.get(v, u)).collect();
        EvenNetwork { m }
    }

    /// CSV edge list `from,to,count` over non-zero entries.
    pub fn to_csv(&self, g: &WeightedGraph) -> String {
        let mut out = String::from("from,to,count\n");
        for (x, y, c) in self.nonzero() {
            let _ = writeln!(out, "{},{},{}", g.names()[x], g.names()[y], c);
        }
        out
    }
}

/// Counts `m_e` on unoriented edges, indexed by the graph's edge order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EvenNetwork {
    pub m: Vec<u64>,
}

impl EvenNetwork {
    pub fn zeros(g: &WeightedGraph) -> Self {
        EvenNetwork { m: vec![0; g.edges().len()] }
    }

    /// Half-degrees `½ Σ_y m_{x,y}`; fails at the first vertex of odd degree.
    pub fn half_degrees(&self, g: &WeightedGraph) -> Result<Vec<u64>> {
        if self.m.len() != g.edges().len() {
            return Err(Error::InvalidArgument("even network size does not match graph".into()));
        }
        let mut deg = vec![0u64; g.n()];
        for (&(u, v), &c) in g.edges().iter().zip(&self.m) {
            deg[u] += c;
            deg[v] += c;
        }
        deg.iter()
            .enumerate()
            .map(|(x, &d)| if d % 2 == 0 { Ok(d / 2) } else { Err(Error::OddVertex(x)) })
            .collect()
    }

    pub fn total(&self) -> u64 {
        self.m.iter().sum()
    }

    pub fn to_csv(&self, g: &WeightedGraph) -> String {
        let mut out = String::from("u,v,count\n");
        for (&(u, v), &c) in g.edges().iter().zip(&self.m) {
            if c > 0 {
                let _ = writeln!(out, "{},{},{}", g.names()[u], g.names()[v], c);
            }
        }
        out
    }
}

/// Which normalization of the joint density to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DensityVariant {
    /// Factor `½C` per ordered jump; integrates to the network law.
    #[default]
    Corrected,
    /// Factor `C` per ordered jump, as the formula is commonly displayed.
    Printed,
}

/// `P(N^{(1)} = k) = det(I−P) · Π_x k_x! / Π k_{x,y}! · Π P^{k_{x,y}}`.
pub fn prob_network_1(g: &WeightedGraph, kernel: &Kernel, k: &Network) -> Result<f64> {
    k.validate(g)?;
    let mut log = kernel.log_det_i_minus_p();
    for x in 0..g.n() {
        log += ln_factorial(k.throughput(x));
    }
    for (x, y, c) in k.nonzero() {
        log += c as f64 * kernel.p()[(x, y)].ln() - ln_factorial(c);
    }
    Ok(log.exp())
}

/// Joint density of `(N^{(1)}, ρ)` at `ρ = 2 L̂_1` (the squared-field scale):
/// `(1/det G) Π_{x≠y} (½ C_{x,y} √(ρ_x ρ_y))^{k_{x,y}} / k_{x,y}! · Π_x ½ e^{−½ λ_x ρ_x}`.
pub fn joint_density_1(
    g: &WeightedGraph,
    kernel: &Kernel,
    k: &Network,
    rho: &[f64],
    variant: DensityVariant,
) -> Result<f64> {
    k.validate(g)?;
    check_rho(g, rho)?;
    let edge_scale = match variant {
        DensityVariant::Corrected => 0.5,
        DensityVariant::Printed => 1.0,
    };
    // 1/det G = det(Λ − C) = det(I − P) Π λ
    let mut log = kernel.log_det_i_minus_p() + kernel.lambda().iter().map(|l| l.ln()).sum::<f64>();
    for (x, y, c) in k.nonzero() {
        let base = edge_scale * g.c(x, y) * (rho[x] * rho[y]).sqrt();
        log += c as f64 * base.ln() - ln_factorial(c);
    }
    for (x, &l) in kernel.lambda().iter().enumerate() {
        log += 0.5f64.ln() - 0.5 * l * rho[x];
    }
    Ok(log.exp())
}

fn check_rho(g: &WeightedGraph, rho: &[f64]) -> Result<()> {
    if rho.len() != g.n() || rho.iter().any(|&r| !(r >= 0.0)) {
        return Err(Error::InvalidArgument("rho must be a nonnegative vertex vector".into()));
    }
    Ok(())
}

/// `P(N^{(½)}_{unoriented} = m) = √det(I−P) · Π_x (2k_x)!/(2^{k_x} k_x!) · Π_e (√(P_{xy}P_{yx}))^{m_e} / m_e!`.
pub fn prob_even_half(g: &WeightedGraph, kernel: &Kernel, m: &EvenNetwork) -> Result<f64> {
    let half = m.half_degrees(g)?;
    let mut log = 0.5 * kernel.log_det_i_minus_p();
    for &k in &half {
        log += ln_factorial(2 * k) - k as f64 * 2f64.ln() - ln_factorial(k);
    }
    for (&(u, v), &c) in g.edges().iter().zip(&m.m) {
        if c > 0 {
            let p = kernel.p();
            log += c as f64 * 0.5 * (p[(u, v)] * p[(v, u)]).ln() - ln_factorial(c);
        }
    }
    Ok(log.exp())
}

/// Joint density of `(N^{(½)}_{unoriented}, ρ)` at `ρ = 2 L̂_{½} = φ²`:
/// `(1/√det G) Π_e (√ρ_x C_e √ρ_y)^{m_e} / m_e! · Π_x e^{−½ λ_x ρ_x} / √(2π ρ_x)`.
pub fn joint_density_half(g: &WeightedGraph, kernel: &Kernel, m: &EvenNetwork, rho: &[f64]) -> Result<f64> {
    m.half_degrees(g)?;
    check_rho(g, rho)?;
    let mut log = 0.5 * (kernel.log_det_i_minus_p() + kernel.lambda().iter().map(|l| l.ln()).sum::<f64>());
    for (&(u, v), &c) in g.edges().iter().zip(&m.m) {
        if c > 0 {
            log += c as f64 * (g.c(u, v) * (rho[u] * rho[v]).sqrt()).ln() - ln_factorial(c);
        }
    }
    for (x, &l) in kernel.lambda().iter().enumerate() {
        log += -0.5 * l * rho[x] - 0.5 * (2.0 * std::f64::consts::PI * rho[x]).ln();
    }
    Ok(log.exp())
}

/// Integrates a joint density over `ρ ∈ (0,∞)^n` by a tensor Gauss–Laguerre rule matched to
/// the `ρ_x^{a_x} e^{−½λ_x ρ_x}` profile. Exact up to rounding for monomial profiles.
pub fn marginalize_density<F: Fn(&[f64]) -> f64>(kernel: &Kernel, powers: &[f64], nodes: usize, density: F) -> f64 {
    let rates: Vec<f64> = kernel.lambda().iter().map(|l| 0.5 * l).collect();
    crate::quadrature::laguerre_product(density, &rates, powers, nodes)
}

/// Power profile of `ρ` in the α=1 density: `ρ_x^{k_x}`.
pub fn density_powers_1(k: &Network) -> Vec<f64> {
    (0..k.n()).map(|x| k.throughput(x) as f64).collect()
}

/// Power profile of `ρ` in the α=½ density: `ρ_x^{k_x − ½}`.
pub fn density_powers_half(g: &WeightedGraph, m: &EvenNetwork) -> Result<Vec<f64>> {
    Ok(m.half_degrees(g)?.into_iter().map(|k| k as f64 - 0.5).collect())
}

const ENUM_BUDGET: usize = 5_000_000;

/// All Eulerian networks supported on the edges with total jump count `≤ cap`, in
/// lexicographic order of the ordered-edge counts.
pub fn enumerate_eulerian(g: &WeightedGraph, cap: u64) -> Result<Vec<Network>> {
    let slots: Vec<(usize, usize)> = g.edges().iter().flat_map(|&(u, v)| [(u, v), (v, u)]).collect();
    let mut out = Vec::new();
    let mut current = Network::zeros(g.n());
    let mut visited = 0usize;
    enumerate_slots(&slots, 0, cap, &mut current, &mut visited, &mut |net| {
        if net.is_eulerian() {
            out.push(net.clone());
        }
    })?;
    out.sort();
    Ok(out)
}

fn enumerate_slots<F: FnMut(&Network)>(
    slots: &[(usize, usize)],
    i: usize,
    remaining: u64,
    current: &mut Network,
    visited: &mut usize,
    emit: &mut F,
) -> Result<()> {
    *visited += 1;
    if *visited > ENUM_BUDGET {
        return Err(Error::BudgetExceeded(ENUM_BUDGET));
    }
    if i == slots.len() {
        emit(current);
        return Ok(());
    }
    let (x, y) = slots[i];
    for c in 0..=remaining {
        current.set(x, y, c);
        enumerate_slots(slots, i + 1, remaining - c, current, visited, emit)?;
    }
    current.set(x, y, 0);
    Ok(())
}

/// All even networks with total edge count `≤ cap`.
pub fn enumerate_even(g: &WeightedGraph, cap: u64) -> Result<Vec<EvenNetwork>> {
    let e = g.edges().len();
    let mut out = Vec::new();
    let mut m = vec![0u64; e];
    let mut visited = 0usize;
    fn rec(
        g: &WeightedGraph,
        m: &mut Vec<u64>,
        i: usize,
        remaining: u64,
        visited: &mut usize,
        out: &mut Vec<EvenNetwork>,
    ) -> Result<()> {
        *visited += 1;
        if *visited > ENUM_BUDGET {
            return Err(Error::BudgetExceeded(ENUM_BUDGET));
        }
        if i == m.len() {
            let net = EvenNetwork { m: m.clone() };
            if net.half_degrees(g).is_ok() {
                out.push(net);
            }
            return Ok(());
        }
        for c in 0..=remaining {
            m[i] = c;
            rec(g, m, i + 1, remaining - c, visited, out)?;
        }
        m[i] = 0;
        Ok(())
    }
    rec(g, &mut m, 0, cap, &mut visited, &mut out)?;
    out.sort();
    Ok(out)
}

/// Exact law of the total jump count `T = Σ N^{(α)}_{x,y}` for `t = 0..=t_max`, from the
/// power series `det(I−P)^α exp(α Σ_p s^p tr(P^p)/p)`.
pub fn total_jump_law(kernel: &Kernel, alpha: f64, t_max: usize) -> Vec<f64> {
    let p = kernel.p();
    let mut power = p.clone();
    let mut a = vec![0.0; t_max + 1];
    for (q, slot) in a.iter_mut().enumerate().skip(1) {
        if q > 1 {
            power = &power * p;
        }
        *slot = alpha * power.trace() / q as f64;
    }
    let mut b = vec![0.0; t_max + 1];
    b[0] = 1.0;
    for n in 1..=t_max {
        b[n] = (1..=n).map(|k| k as f64 * a[k] * b[n - k]).sum::<f64>() / n as f64;
    }
    let scale = (alpha * kernel.log_det_i_minus_p()).exp();
    b.into_iter().map(|v| v * scale).collect()
}

/// Outcome of the conditional independence test.
#[derive(Debug, Clone, PartialEq)]
pub enum MarkovTest {
    Tested { chi: ChiSquare, hits: usize },
    /// One side carries a single observed configuration: independence holds trivially.
    Degenerate { hits: usize },
    /// Too few conditioning hits, or neither side has interior edges.
    Inconclusive { hits: usize },
}

/// Minimum number of samples meeting the conditioning event.
pub const MARKOV_MIN_HITS: usize = 500;

/// Ordered edges with one endpoint on each side of `side`.
pub fn cross_pairs(g: &WeightedGraph, side: &[bool]) -> Vec<(usize, usize)> {
    g.edges()
        .iter()
        .filter(|&&(u, v)| side[u] != side[v])
        .flat_map(|&(u, v)| [(u, v), (v, u)])
        .collect()
}

fn interior_pairs(g: &WeightedGraph, side: &[bool], which: bool) -> Vec<(usize, usize)> {
    g.edges()
        .iter()
        .filter(|&&(u, v)| side[u] == which && side[v] == which)
        .flat_map(|&(u, v)| [(u, v), (v, u)])
        .collect()
}

/// Tests independence of the restrictions of `N` to `X_1 × X_1` and `X_2 × X_2` given the
/// cross-edge counts equal `condition` (ordered as [`cross_pairs`]).
pub fn markov_independence_test(
    g: &WeightedGraph,
    samples: &[Network],
    side: &[bool],
    condition: &[u64],
) -> MarkovTest {
    let cross = cross_pairs(g, side);
    assert_eq!(cross.len(), condition.len(), "one condition per cross pair");
    let hits: Vec<&Network> = samples
        .iter()
        .filter(|s| cross.iter().zip(condition).all(|(&(x, y), &c)| s.get(x, y) == c))
        .collect();
    let n_hits = hits.len();
    let left = interior_pairs(g, side, false);
    let right = interior_pairs(g, side, true);
    if left.is_empty() && right.is_empty() {
        return MarkovTest::Inconclusive { hits: n_hits };
    }
    if left.is_empty() || right.is_empty() {
        return MarkovTest::Degenerate { hits: n_hits };
    }
    if n_hits < MARKOV_MIN_HITS {
        return MarkovTest::Inconclusive { hits: n_hits };
    }
    let key = |s: &Network, pairs: &[(usize, usize)]| pairs.iter().map(|&(x, y)| s.get(x, y)).collect::<Vec<_>>();
    let categories = |pairs: &[(usize, usize)]| -> HashMap<Vec<u64>, usize> {
        let mut freq: HashMap<Vec<u64>, usize> = HashMap::new();
        for s in &hits {
            *freq.entry(key(s, pairs)).or_default() += 1;
        }
        // frequent configurations get their own category; the rest share one
        let mut ranked: Vec<(Vec<u64>, usize)> = freq.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked
            .into_iter()
            .enumerate()
            .map(|(i, (cfg, count))| (cfg, if count >= 25 { i } else { usize::MAX }))
            .collect()
    };
    let lc = categories(&left);
    let rc = categories(&right);
    let compact = |m: &HashMap<Vec<u64>, usize>| {
        let mut ids: Vec<usize> = m.values().copied().collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    };
    let (lids, rids) = (compact(&lc), compact(&rc));
    if lids.len() < 2 || rids.len() < 2 {
        return MarkovTest::Degenerate { hits: n_hits };
    }
    let mut table = vec![vec![0u64; rids.len()]; lids.len()];
    for s in &hits {
        let i = lids.binary_search(&lc[&key(s, &left)]).expect("category present");
        let j = rids.binary_search(&rc[&key(s, &right)]).expect("category present");
        table[i][j] += 1;
    }
    MarkovTest::Tested { chi: chi_square_independence(&table), hits: n_hits }
}
