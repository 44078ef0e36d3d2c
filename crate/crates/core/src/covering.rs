//! Group-valued edge assignments, gauge transformations, Galois coverings `X × M`, twisted
//! transfer matrices and Green functions, the regular-representation decomposition, and
//! lifting of trivial-monodromy loops.

use std::collections::VecDeque;

use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::graph::{build_kernel, cycle_basis, green, CycleBasis, Kernel, WeightedGraph};
use crate::group::{FiniteGroup, Irrep, RepresentedGroup};
use crate::linalg::{det_c, CMatrix};
use crate::loops::{cyclic_steps, LoopClass};
use crate::rng::{substream, Stream};
use crate::sampler::LoopSoupSample;

/// A group element per oriented edge with `U_{y,x} = U_{x,y}^{−1}`; stored on the graph's
/// edges oriented `u → v`, `u < v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MAssignment {
    forward: Vec<usize>,
    inverse: Vec<usize>,
    edge_index: std::collections::HashMap<(usize, usize), usize>,
}

impl MAssignment {
    pub fn identity(g: &WeightedGraph, group: &FiniteGroup) -> Self {
        Self::from_fn(g, group, |_, _| group.identity())
    }

    /// `f(u, v)` gives the element on `u → v` for each edge with `u < v`.
    pub fn from_fn<F: FnMut(usize, usize) -> usize>(g: &WeightedGraph, group: &FiniteGroup, mut f: F) -> Self {
        let forward: Vec<usize> = g.edges().iter().map(|&(u, v)| f(u, v)).collect();
        let inverse = forward.iter().map(|&m| group.inv(m)).collect();
        let edge_index = g.edges().iter().enumerate().map(|(i, &e)| (e, i)).collect();
        MAssignment { forward, inverse, edge_index }
    }

    /// Uniformly random elements on every edge.
    pub fn random(g: &WeightedGraph, group: &FiniteGroup, seed: u64) -> Self {
        let mut rng = substream(seed, Stream::Gauge, 1);
        Self::from_fn(g, group, |_, _| rng.random_range(0..group.order()))
    }

    /// `U_{x,y}`; panics off the edge set.
    pub fn get(&self, x: usize, y: usize) -> usize {
        if x < y {
            self.forward[self.edge_index[&(x, y)]]
        } else {
            self.inverse[self.edge_index[&(y, x)]]
        }
    }

    pub fn set(&mut self, group: &FiniteGroup, x: usize, y: usize, m: usize) {
        let (key, val) = if x < y { ((x, y), m) } else { ((y, x), group.inv(m)) };
        let i = self.edge_index[&key];
        self.forward[i] = val;
        self.inverse[i] = group.inv(val);
    }

    /// Product of the elements along a cyclic vertex sequence, left to right.
    pub fn loop_element(&self, group: &FiniteGroup, seq: &[usize]) -> usize {
        group.product(cyclic_steps(seq).map(|(x, y)| self.get(x, y)))
    }

    /// Loads `{"assignment": [{"from": "a", "to": "b", "element": "1"}, ...]}`. Edges not
    /// listed carry the identity; listing both orientations requires inverse elements.
    pub fn from_json(text: &str, g: &WeightedGraph, group: &FiniteGroup) -> Result<Self> {
        #[derive(Deserialize)]
        struct File {
            assignment: Vec<Entry>,
        }
        #[derive(Deserialize)]
        struct Entry {
            from: String,
            to: String,
            element: String,
        }
        let file: File = serde_json::from_str(text)?;
        let mut u = Self::identity(g, group);
        let mut seen: std::collections::HashMap<(usize, usize), usize> = Default::default();
        for e in &file.assignment {
            let lookup = |s: &str| {
                g.index_of(s).ok_or_else(|| Error::InvalidAssignment(format!("unknown vertex {s:?}")))
            };
            let (x, y) = (lookup(&e.from)?, lookup(&e.to)?);
            if !g.is_edge(x, y) {
                return Err(Error::InvalidAssignment(format!("{} -> {} is not an edge", e.from, e.to)));
            }
            let m = group
                .index_of(&e.element)
                .ok_or_else(|| Error::InvalidAssignment(format!("unknown group element {:?}", e.element)))?;
            if seen.insert((x, y), m).is_some() {
                return Err(Error::InvalidAssignment(format!("duplicate entry for {} -> {}", e.from, e.to)));
            }
            if let Some(&back) = seen.get(&(y, x)) {
                if back != group.inv(m) {
                    return Err(Error::InvalidAssignment(format!(
                        "elements on {} -> {} and its reverse are not inverse",
                        e.from, e.to
                    )));
                }
            }
            u.set(group, x, y, m);
        }
        Ok(u)
    }
}

/// `U_{x,y} ↦ m_x U_{x,y} m_y^{−1}`.
pub fn apply_gauge(g: &WeightedGraph, group: &FiniteGroup, u: &MAssignment, m: &[usize]) -> MAssignment {
    MAssignment::from_fn(g, group, |x, y| group.mul(group.mul(m[x], u.get(x, y)), group.inv(m[y])))
}

/// Random gauge `m: X → M`.
pub fn random_gauge(n: usize, group: &FiniteGroup, seed: u64) -> Vec<usize> {
    let mut rng = substream(seed, Stream::Gauge, 0);
    (0..n).map(|_| rng.random_range(0..group.order())).collect()
}

/// Gauge making `U` the identity on every tree edge; returns the gauge and the result.
pub fn tree_gauge(g: &WeightedGraph, group: &FiniteGroup, u: &MAssignment, basis: &CycleBasis) -> (Vec<usize>, MAssignment) {
    let mut m = vec![group.identity(); g.n()];
    for &(x, y) in &basis.tree {
        m[y] = group.mul(m[x], u.get(x, y));
    }
    let normalized = apply_gauge(g, group, u, &m);
    (m, normalized)
}

/// Conjugacy class of the monodromy of a loop.
pub fn loop_monodromy_class(group: &FiniteGroup, u: &MAssignment, class: &LoopClass) -> usize {
    group.class_of(u.loop_element(group, class.vertices()))
}

/// Subgroup generated by the cotree monodromies after tree normalization.
pub fn monodromy_subgroup(g: &WeightedGraph, group: &FiniteGroup, u: &MAssignment) -> Vec<usize> {
    let basis = cycle_basis(g, 0);
    let (_, normalized) = tree_gauge(g, group, u, &basis);
    let gens: Vec<usize> = basis.cotree.iter().map(|&(x, y)| normalized.get(x, y)).collect();
    group.generated_subgroup(&gens)
}

/// Index `[M : M']` of the monodromy subgroup: the number of covering components.
pub fn predicted_components(g: &WeightedGraph, group: &FiniteGroup, u: &MAssignment) -> usize {
    group.order() / monodromy_subgroup(g, group, u).len()
}

/// The covering graph on `X × M`; vertex `(x, m)` has index `x·|M| + m`.
#[derive(Debug, Clone)]
pub struct CoveringGraph {
    pub graph: WeightedGraph,
    pub base_n: usize,
    pub sheets: usize,
}

impl CoveringGraph {
    pub fn index(&self, x: usize, m: usize) -> usize {
        x * self.sheets + m
    }

    pub fn project(&self, v: usize) -> (usize, usize) {
        (v / self.sheets, v % self.sheets)
    }

    /// Deck transformation `(x, m) ↦ (x, g·m)`.
    pub fn deck(&self, group: &FiniteGroup, g: usize, v: usize) -> usize {
        let (x, m) = self.project(v);
        self.index(x, group.mul(g, m))
    }
}

/// Edges `(x, m) ~ (y, m·U_{x,y})`, conductances and killing copied fiberwise.
pub fn build_covering(g: &WeightedGraph, group: &FiniteGroup, u: &MAssignment) -> Result<CoveringGraph> {
    let s = group.order();
    let n = g.n();
    let mut names = Vec::with_capacity(n * s);
    let mut killing = Vec::with_capacity(n * s);
    for x in 0..n {
        for m in 0..s {
            names.push(format!("{}.{}", g.names()[x], group.names()[m]));
            killing.push(g.killing()[x]);
        }
    }
    let mut edges = Vec::with_capacity(g.edges().len() * s);
    for &(x, y) in g.edges() {
        for m in 0..s {
            edges.push((x * s + m, y * s + group.mul(m, u.get(x, y)), g.c(x, y)));
        }
    }
    let graph = WeightedGraph::build(names, &edges, killing, false)?;
    Ok(CoveringGraph { graph, base_n: n, sheets: s })
}

/// Girth of a simple graph (`usize::MAX` for forests).
pub fn girth(g: &WeightedGraph) -> usize {
    let n = g.n();
    let mut best = usize::MAX;
    for s in 0..n {
        let mut dist = vec![usize::MAX; n];
        let mut parent = vec![usize::MAX; n];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &y in g.neighbors(x) {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    parent[y] = x;
                    queue.push_back(y);
                } else if parent[x] != y {
                    best = best.min(dist[x] + dist[y] + 1);
                }
            }
        }
    }
    best
}

/// Isomorphism of the underlying simple graphs by backtracking over degree-compatible
/// vertex maps.
pub fn isomorphic(a: &WeightedGraph, b: &WeightedGraph) -> bool {
    let n = a.n();
    if n != b.n() || a.edges().len() != b.edges().len() {
        return false;
    }
    let deg = |g: &WeightedGraph| (0..g.n()).map(|x| g.neighbors(x).len()).collect::<Vec<_>>();
    let (da, db) = (deg(a), deg(b));
    let mut sa = da.clone();
    let mut sb = db.clone();
    sa.sort_unstable();
    sb.sort_unstable();
    if sa != sb {
        return false;
    }
    fn extend(a: &WeightedGraph, b: &WeightedGraph, da: &[usize], db: &[usize], map: &mut Vec<usize>, used: &mut [bool]) -> bool {
        let x = map.len();
        if x == a.n() {
            return true;
        }
        for y in 0..b.n() {
            if used[y] || da[x] != db[y] {
                continue;
            }
            if (0..x).any(|w| a.is_edge(w, x) != b.is_edge(map[w], y)) {
                continue;
            }
            map.push(y);
            used[y] = true;
            if extend(a, b, da, db, map, used) {
                return true;
            }
            map.pop();
            used[y] = false;
        }
        false
    }
    extend(a, b, &da, &db, &mut Vec::with_capacity(n), &mut vec![false; n])
}

/// The 3-cube graph `Q_3`.
pub fn cube_graph() -> WeightedGraph {
    let edges: Vec<(usize, usize, f64)> = (0..8usize)
        .flat_map(|i| (0..3).map(move |b| (i, i ^ (1 << b))))
        .filter(|&(i, j)| i < j)
        .map(|(i, j)| (i, j, 1.0))
        .collect();
    WeightedGraph::new((0..8).map(|i| format!("q{i}")).collect(), &edges, vec![1.0; 8]).expect("cube")
}

/// Green function of the covering, `G̃ = (Λ̃ − C̃)^{−1}`.
pub fn lifted_green(cov: &CoveringGraph) -> DMatrix<f64> {
    green(&cov.graph).g
}

/// `max |G(x, y) − Σ_m G̃((x, e), (y, m))|` over all `x, y`; by deck invariance this covers
/// every pair of lifts.
pub fn green_sum_defect(g: &WeightedGraph, group: &FiniteGroup, cov: &CoveringGraph, gt: &DMatrix<f64>) -> f64 {
    let base = green(g);
    let mut worst: f64 = 0.0;
    for x in 0..g.n() {
        for mu in 0..group.order() {
            let u = cov.index(x, mu);
            for y in 0..g.n() {
                let s: f64 = (0..group.order()).map(|m| gt[(u, cov.index(y, m))]).sum();
                worst = worst.max((s - base.get(x, y)).abs());
            }
        }
    }
    worst
}

/// `P^{U,π}`: block `(x, y)` equals `P_{x,y} π(U_{x,y})`; index `(x, i) ↦ x·d + i`.
pub fn twisted_kernel(kernel: &Kernel, u: &MAssignment, irrep: &Irrep) -> CMatrix {
    let d = irrep.dim;
    let n = kernel.n();
    let mut m = CMatrix::zeros(n * d, n * d);
    for x in 0..n {
        for &y in kernel.neighbors(x) {
            let block = irrep.matrix(u.get(x, y)) * Complex64::new(kernel.p()[(x, y)], 0.0);
            m.view_mut((x * d, y * d), (d, d)).copy_from(&block);
        }
    }
    m
}

/// `G^{U,π} = (I − P^{U,π})^{−1} Λ^{−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistedGreen {
    pub dim: usize,
    pub g: CMatrix,
}

impl TwistedGreen {
    pub fn block(&self, x: usize, y: usize) -> CMatrix {
        self.g.view((x * self.dim, y * self.dim), (self.dim, self.dim)).into_owned()
    }
}

pub fn twisted_green(kernel: &Kernel, u: &MAssignment, irrep: &Irrep) -> Result<TwistedGreen> {
    let d = irrep.dim;
    let n = kernel.n();
    let pt = twisted_kernel(kernel, u, irrep);
    let a = CMatrix::identity(n * d, n * d) - pt;
    let inv = a.try_inverse().ok_or(Error::NotTransient)?;
    let g = CMatrix::from_fn(n * d, n * d, |i, j| inv[(i, j)] / kernel.lambda()[j / d]);
    Ok(TwistedGreen { dim: d, g })
}

/// `max |G̃((x,m),(y,n)) − Σ_π (d_π/|M|) tr(G^{U,π}_{x,y} π(n^{−1} m))|`.
pub fn decomposition_defect(g: &WeightedGraph, rg: &RepresentedGroup, u: &MAssignment) -> Result<f64> {
    let group = &rg.group;
    let cov = build_covering(g, group, u)?;
    let gt = lifted_green(&cov);
    let kernel = build_kernel(g);
    let twisted: Vec<TwistedGreen> = rg.irreps.iter().map(|r| twisted_green(&kernel, u, r)).collect::<Result<_>>()?;
    let order = group.order() as f64;
    let mut worst: f64 = 0.0;
    for x in 0..g.n() {
        for y in 0..g.n() {
            let blocks: Vec<CMatrix> = twisted.iter().map(|t| t.block(x, y)).collect();
            for m in 0..group.order() {
                for nn in 0..group.order() {
                    let h = group.mul(group.inv(nn), m);
                    let s: Complex64 = rg
                        .irreps
                        .iter()
                        .zip(&blocks)
                        .map(|(r, b)| (b * r.matrix(h)).trace() * (r.dim as f64 / order))
                        .sum();
                    let exact = gt[(cov.index(x, m), cov.index(y, nn))];
                    worst = worst.max((s - exact).norm());
                }
            }
        }
    }
    Ok(worst)
}

/// `(Π_π det(I − P^{U,π})^{d_π}, det(I − P̃))`.
pub fn det_factorization(g: &WeightedGraph, rg: &RepresentedGroup, u: &MAssignment) -> Result<(Complex64, f64)> {
    let kernel = build_kernel(g);
    let lhs = rg
        .irreps
        .iter()
        .map(|r| {
            let pt = twisted_kernel(&kernel, u, r);
            det_c(&(CMatrix::identity(pt.nrows(), pt.ncols()) - pt)).powu(r.dim as u32)
        })
        .product();
    let cov = build_covering(g, &rg.group, u)?;
    let rhs = build_kernel(&cov.graph).det_i_minus_p();
    Ok((lhs, rhs))
}

/// Fundamental-domain section over the spanning tree: `s(root) = e`,
/// `s(child) = s(parent)·U_{parent,child}`.
pub fn tree_section(group: &FiniteGroup, u: &MAssignment, basis: &CycleBasis) -> Vec<usize> {
    let mut s = vec![group.identity(); basis.parent.len()];
    for &(x, y) in &basis.tree {
        s[y] = group.mul(s[x], u.get(x, y));
    }
    s
}

/// Lifts the loops of `copies[m]` (samples of the trivial-monodromy sub-ensemble) to the
/// covering, starting copy `m` on the sheet `m·s(ξ_1)` of the fundamental domain
/// translated by `m`. Loops with non-trivial monodromy are rejected.
pub fn lift_soup(
    g: &WeightedGraph,
    group: &FiniteGroup,
    u: &MAssignment,
    cov: &CoveringGraph,
    copies: &[LoopSoupSample],
) -> Result<LoopSoupSample> {
    if copies.len() != group.order() {
        return Err(Error::InvalidArgument("one base sample per group element is required".into()));
    }
    let basis = cycle_basis(g, 0);
    let section = tree_section(group, u, &basis);
    let mut out = LoopSoupSample::empty(copies[0].alpha, copies[0].seed);
    for (m, sample) in copies.iter().enumerate() {
        for (class, &count) in &sample.counts {
            let seq = class.vertices();
            if u.loop_element(group, seq) != group.identity() {
                return Err(Error::InvalidArgument("lifted loops must have trivial monodromy".into()));
            }
            let mut sheet = group.mul(m, section[seq[0]]);
            let mut lifted = Vec::with_capacity(seq.len());
            for (x, y) in cyclic_steps(seq) {
                lifted.push(cov.index(x, sheet));
                sheet = group.mul(sheet, u.get(x, y));
            }
            out.insert(LoopClass::from_based(&lifted), count);
        }
        out.truncation_mass += sample.truncation_mass;
    }
    Ok(out)
}

/// Restriction of a base sample to loops of trivial monodromy.
pub fn trivial_monodromy_part(group: &FiniteGroup, u: &MAssignment, sample: &LoopSoupSample) -> LoopSoupSample {
    let mut out = LoopSoupSample::empty(sample.alpha, sample.seed);
    out.truncation_mass = sample.truncation_mass;
    for (c, &k) in &sample.counts {
        if u.loop_element(group, c.vertices()) == group.identity() {
            out.insert(c.clone(), k);
        }
    }
    out
}

/// Samples the complex fields `ψ^{π,j}` (`j < d_π`, `E[ψψ*] = 2G^{U,π}`) and synthesizes
/// `φ̃(x, m) = Σ_π √(d_π/|M|) Σ_{i,j} π(m)_{j,i} ψ^{π,j}_i(x)`, a complex field on the
/// covering with `E[φ̃ φ̃*] = 2G̃`.
#[derive(Debug, Clone)]
pub struct TwistedFieldSampler {
    factors: Vec<DMatrix<Complex64>>,
    rg: RepresentedGroup,
    n: usize,
}

impl TwistedFieldSampler {
    pub fn new(g: &WeightedGraph, rg: &RepresentedGroup, u: &MAssignment) -> Result<Self> {
        let kernel = build_kernel(g);
        let factors = rg
            .irreps
            .iter()
            .map(|r| {
                let tg = twisted_green(&kernel, u, r)?;
                let herm = (&tg.g + tg.g.adjoint()) * Complex64::new(0.5, 0.0);
                Cholesky::new(herm).map(|c| c.l()).ok_or(Error::IndefiniteForm)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TwistedFieldSampler { factors, rg: rg.clone(), n: g.n() })
    }

    /// Independent draws `ψ^{π,j}`, one vector of length `n·d_π` per `j`.
    pub fn sample_components<R: Rng>(&self, rng: &mut R) -> Vec<Vec<Vec<Complex64>>> {
        self.factors
            .iter()
            .zip(&self.rg.irreps)
            .map(|(l, r)| {
                (0..r.dim)
                    .map(|_| {
                        let xi: Vec<Complex64> = (0..l.nrows())
                            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                            .collect();
                        (0..l.nrows()).map(|i| (0..=i).map(|k| l[(i, k)] * xi[k]).sum()).collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// The synthesized covering field, indexed like [`CoveringGraph::index`].
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<Complex64> {
        let psi = self.sample_components(rng);
        let order = self.rg.group.order();
        let mut out = vec![Complex64::new(0.0, 0.0); self.n * order];
        for (p, r) in self.rg.irreps.iter().enumerate() {
            let d = r.dim;
            let scale = (d as f64 / order as f64).sqrt();
            for x in 0..self.n {
                for m in 0..order {
                    let pm = r.matrix(m);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in 0..d {
                        for i in 0..d {
                            acc += pm[(j, i)] * psi[p][j][x * d + i];
                        }
                    }
                    out[x * order + m] += acc * scale;
                }
            }
        }
        out
    }
}

/// Empirical `E[φ̃(u) conj φ̃(v)]` against `2 G̃`: the largest deviation in standard errors.
pub fn synthesized_covariance_z(
    g: &WeightedGraph,
    rg: &RepresentedGroup,
    u: &MAssignment,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let cov = build_covering(g, &rg.group, u)?;
    let gt = lifted_green(&cov);
    let sampler = TwistedFieldSampler::new(g, rg, u)?;
    let mut rng = substream(seed, Stream::Field, 7);
    let n = gt.nrows();
    let mut stats = vec![crate::stats::Moments::default(); n * n];
    for _ in 0..samples {
        let phi = sampler.sample(&mut rng);
        for a in 0..n {
            for b in 0..n {
                stats[a * n + b].push((phi[a] * phi[b].conj()).re);
            }
        }
    }
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            worst = worst.max(crate::stats::one_sample_z(&stats[a * n + b], 2.0 * gt[(a, b)]).abs());
        }
    }
    Ok(worst)
}

/// Pullback check: `(1/√|M|) Σ_{m'} φ̃(m'·u)` has covariance `2 G(p(u), p(v))`; returns the
/// largest deviation in standard errors.
pub fn pullback_covariance_z(
    g: &WeightedGraph,
    rg: &RepresentedGroup,
    u: &MAssignment,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let cov = build_covering(g, &rg.group, u)?;
    let base = green(g);
    let sampler = TwistedFieldSampler::new(g, rg, u)?;
    let mut rng = substream(seed, Stream::Field, 8);
    let group = &rg.group;
    let total = cov.graph.n();
    let scale = 1.0 / (group.order() as f64).sqrt();
    let mut stats = vec![crate::stats::Moments::default(); total * total];
    for _ in 0..samples {
        let phi = sampler.sample(&mut rng);
        let sym: Vec<Complex64> = (0..total)
            .map(|v| (0..group.order()).map(|h| phi[cov.deck(group, h, v)]).sum::<Complex64>() * scale)
            .collect();
        for a in 0..total {
            for b in 0..total {
                stats[a * total + b].push((sym[a] * sym[b].conj()).re);
            }
        }
    }
    let mut worst: f64 = 0.0;
    for a in 0..total {
        for b in 0..total {
            let exact = 2.0 * base.get(cov.project(a).0, cov.project(b).0);
            worst = worst.max(crate::stats::one_sample_z(&stats[a * total + b], exact).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flip_one_edge(g: &WeightedGraph, group: &FiniteGroup, flip: usize) -> MAssignment {
        let (a, b) = g.edges()[0];
        MAssignment::from_fn(g, group, |x, y| if (x, y) == (a, b) { flip } else { group.identity() })
    }

    #[test]
    fn gauge_examples() {
        let g = WeightedGraph::builtin("k4").unwrap();
        let s3 = RepresentedGroup::s3().group;
        let u = MAssignment::random(&g, &s3, 3);
        assert_eq!(apply_gauge(&g, &s3, &u, &vec![s3.identity(); 4]), u);
        let basis = cycle_basis(&g, 0);
        let (_, normalized) = tree_gauge(&g, &s3, &u, &basis);
        for &(x, y) in &basis.tree {
            assert_eq!(normalized.get(x, y), s3.identity());
        }
        let m1 = random_gauge(4, &s3, 1);
        let m2 = random_gauge(4, &s3, 2);
        let composed: Vec<usize> = m1.iter().zip(&m2).map(|(&a, &b)| s3.mul(b, a)).collect();
        assert_eq!(apply_gauge(&g, &s3, &apply_gauge(&g, &s3, &u, &m1), &m2), apply_gauge(&g, &s3, &u, &composed));
    }

    #[test]
    fn monodromy_classes() {
        let z2 = FiniteGroup::cyclic(2);
        let t2 = WeightedGraph::builtin("t2").unwrap();
        let u = flip_one_edge(&t2, &z2, 1);
        assert_eq!(loop_monodromy_class(&z2, &u, &LoopClass::from_based(&[0, 1])), 0);
        let c5 = WeightedGraph::circle(5, 1.0).unwrap();
        let u = flip_one_edge(&c5, &z2, 1);
        assert_eq!(loop_monodromy_class(&z2, &u, &LoopClass::from_based(&[0, 1, 2, 3, 4])), 1);
        let s3 = RepresentedGroup::s3().group;
        let k4 = WeightedGraph::builtin("k4").unwrap();
        let u = MAssignment::random(&k4, &s3, 8);
        let l = LoopClass::from_based(&[0, 1, 2, 3, 1, 2]);
        for seed in 0..100 {
            let v = apply_gauge(&k4, &s3, &u, &random_gauge(4, &s3, seed));
            assert_eq!(loop_monodromy_class(&s3, &v, &l), loop_monodromy_class(&s3, &u, &l));
        }
    }

    #[test]
    fn covering_examples() {
        let z2 = FiniteGroup::cyclic(2);
        let t3 = WeightedGraph::builtin("t3").unwrap();
        let trivial = build_covering(&t3, &z2, &MAssignment::identity(&t3, &z2)).unwrap();
        assert_eq!(trivial.graph.component_count(), 2);
        let c5 = WeightedGraph::circle(5, 1.0).unwrap();
        let cov = build_covering(&c5, &z2, &flip_one_edge(&c5, &z2, 1)).unwrap();
        assert!(isomorphic(&cov.graph, &WeightedGraph::circle(10, 1.0).unwrap()));
    }

    #[test]
    fn tetrahedron_double_cover_is_the_cube() {
        let k4 = WeightedGraph::builtin("k4").unwrap();
        let z2 = FiniteGroup::cyclic(2);
        let basis = cycle_basis(&k4, 0);
        let u = MAssignment::from_fn(&k4, &z2, |x, y| usize::from(!basis.is_tree_edge(x, y)));
        let cov = build_covering(&k4, &z2, &u).unwrap();
        assert_eq!(cov.graph.n(), 8);
        assert_eq!(cov.graph.component_count(), 1);
        assert!((0..8).all(|v| cov.graph.neighbors(v).len() == 3));
        assert_eq!(girth(&cov.graph), 4);
        assert!(isomorphic(&cov.graph, &cube_graph()));
        assert!(!isomorphic(&cov.graph, &WeightedGraph::circle(8, 1.0).unwrap()));
    }

    #[test]
    fn green_identities() {
        let t2 = WeightedGraph::builtin("t2").unwrap();
        let z2 = RepresentedGroup::cyclic(2);
        let u = flip_one_edge(&t2, &z2.group, 1);
        let cov = build_covering(&t2, &z2.group, &u).unwrap();
        assert!(green_sum_defect(&t2, &z2.group, &cov, &lifted_green(&cov)) < 1e-12);
        let kernel = build_kernel(&t2);
        let sign = &z2.irreps[1];
        let pt = twisted_kernel(&kernel, &u, sign);
        assert_close!(pt[(0, 1)].re, -0.5, 1e-15);
        assert_close!(pt[(1, 0)].re, -0.5, 1e-15);
        let triv = twisted_green(&kernel, &u, &z2.irreps[0]).unwrap();
        assert!(triv.g.iter().zip(green(&t2).g.iter()).all(|(a, b)| (a.re - b).abs() < 1e-14));
        for (name, rg) in [("t3", RepresentedGroup::cyclic(3)), ("k4", RepresentedGroup::s3()), ("cycle4", RepresentedGroup::d4())] {
            let g = WeightedGraph::builtin(name).unwrap();
            let u = MAssignment::random(&g, &rg.group, 11);
            assert!(decomposition_defect(&g, &rg, &u).unwrap() < 1e-12);
            let (lhs, rhs) = det_factorization(&g, &rg, &u).unwrap();
            assert!((lhs.re / rhs - 1.0).abs() < 1e-10 && lhs.im.abs() < 1e-10);
        }
    }

    #[test]
    fn components_follow_monodromy_subgroup() {
        let z4 = FiniteGroup::cyclic(4);
        let s3 = RepresentedGroup::s3().group;
        let g = WeightedGraph::builtin("cycle4").unwrap();
        for seed in 0..20 {
            for group in [&z4, &s3] {
                let u = MAssignment::random(&g, group, seed);
                let cov = build_covering(&g, group, &u).unwrap();
                assert_eq!(cov.graph.component_count(), predicted_components(&g, group, &u));
            }
        }
    }

    #[test]
    fn lifting_trivial_assignment_gives_disjoint_copies() {
        let g = WeightedGraph::builtin("t3").unwrap();
        let z2 = FiniteGroup::cyclic(2);
        let u = MAssignment::identity(&g, &z2);
        let cov = build_covering(&g, &z2, &u).unwrap();
        let k = build_kernel(&g);
        let copies: Vec<_> = (0..2).map(|s| crate::sampler::sample_soup_wilson(&k, s)).collect();
        let lifted = lift_soup(&g, &z2, &u, &cov, &copies).unwrap();
        assert_eq!(lifted.loop_count(), copies.iter().map(|c| c.loop_count()).sum::<u64>());
        for c in lifted.counts.keys() {
            let sheets: Vec<usize> = c.vertices().iter().map(|&v| cov.project(v).1).collect();
            assert!(sheets.iter().all(|&s| s == sheets[0]));
        }
    }

    #[test]
    fn assignment_file() {
        let g = WeightedGraph::builtin("t3").unwrap();
        let z3 = FiniteGroup::cyclic(3);
        let text = r#"{"assignment":[{"from":"a","to":"b","element":"1"},{"from":"b","to":"a","element":"2"}]}"#;
        let u = MAssignment::from_json(text, &g, &z3).unwrap();
        assert_eq!(u.get(0, 1), 1);
        assert_eq!(u.get(1, 0), 2);
        let bad = text.replace("\"2\"", "\"1\"");
        assert!(matches!(MAssignment::from_json(&bad, &g, &z3), Err(Error::InvalidAssignment(_))));
    }

    #[test]
    fn synthesized_field_covariance() {
        let g = WeightedGraph::builtin("t2").unwrap();
        let z2 = RepresentedGroup::cyclic(2);
        let u = flip_one_edge(&g, &z2.group, 1);
        assert!(synthesized_covariance_z(&g, &z2, &u, 20_000, 3).unwrap() < 4.5);
        let s3 = RepresentedGroup::s3();
        let t3 = WeightedGraph::builtin("t3").unwrap();
        let u = MAssignment::random(&t3, &s3.group, 2);
        assert!(pullback_covariance_z(&t3, &s3, &u, 5_000, 4).unwrap() < 5.0);
    }
}
