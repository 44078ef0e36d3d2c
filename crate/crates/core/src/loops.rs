//! Discrete loops, rotation classes, the loop measure `μ`, truncated enumeration with a
//! certified tail, and geodesic reduction.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{Kernel, WeightedGraph};
use crate::linalg::CompensatedSum;

/// Default cap on the number of enumerated classes.
pub const DEFAULT_BUDGET: usize = 4_000_000;

/// A based loop `(ξ_1, …, ξ_p)`; the closing step `ξ_p → ξ_1` is implicit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasedLoop(pub Vec<usize>);

impl BasedLoop {
    pub fn validate(&self, g: &WeightedGraph) -> Result<()> {
        if self.0.len() < 2 {
            return Err(Error::InvalidArgument("a discrete loop needs at least two vertices".into()));
        }
        for (x, y) in cyclic_steps(&self.0) {
            if !g.is_edge(x, y) {
                return Err(Error::NotAnEdge { from: x, to: y });
            }
        }
        Ok(())
    }
}

/// Steps `(ξ_i, ξ_{i+1})` of a cyclic sequence, including the closing step.
pub fn cyclic_steps(seq: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    let p = seq.len();
    (0..p).map(move |i| (seq[i], seq[(i + 1) % p]))
}

/// Rotation class of a based loop: the lexicographically minimal rotation, and the number
/// of rotations that leave it unchanged.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LoopClass {
    vertices: Vec<usize>,
    multiplicity: usize,
}

impl LoopClass {
    pub fn from_based(seq: &[usize]) -> LoopClass {
        assert!(!seq.is_empty(), "empty loop has no class");
        let p = seq.len();
        let start = (0..p)
            .min_by(|&a, &b| rotation_cmp(seq, a, b))
            .expect("non-empty");
        let vertices: Vec<usize> = (0..p).map(|i| seq[(start + i) % p]).collect();
        let period = (1..=p)
            .find(|&q| p % q == 0 && (0..p).all(|i| vertices[i] == vertices[(i + q) % p]))
            .expect("p is always a period");
        LoopClass { vertices, multiplicity: p / period }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    pub fn steps(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        cyclic_steps(&self.vertices)
    }

    /// Number of visits to `x` over the full cyclic word.
    pub fn visits(&self, x: usize) -> usize {
        self.vertices.iter().filter(|&&v| v == x).count()
    }

    pub fn label(&self, g: &WeightedGraph) -> String {
        let names: Vec<&str> = self.vertices.iter().map(|&v| g.names()[v].as_str()).collect();
        names.join(",")
    }
}

fn rotation_cmp(seq: &[usize], a: usize, b: usize) -> std::cmp::Ordering {
    let p = seq.len();
    (0..p)
        .map(|i| seq[(a + i) % p].cmp(&seq[(b + i) % p]))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

fn is_minimal_rotation(seq: &[usize]) -> bool {
    let first = seq[0];
    (1..seq.len())
        .filter(|&r| seq[r] == first)
        .all(|r| rotation_cmp(seq, 0, r).is_le())
}

/// `μ(l) = Π_steps P / multiplicity`.
pub fn mu_weight(k: &Kernel, class: &LoopClass) -> Result<f64> {
    let mut w = 1.0;
    for (x, y) in class.steps() {
        let p = k.p()[(x, y)];
        if !(p > 0.0) {
            return Err(Error::NotAnEdge { from: x, to: y });
        }
        w *= p;
    }
    Ok(w / class.multiplicity() as f64)
}

/// All loop classes up to a length cap with their `μ`-weights.
#[derive(Debug, Clone)]
pub struct LoopMeasureTable {
    entries: Vec<(LoopClass, f64)>,
    cumulative: Vec<f64>,
    index: HashMap<LoopClass, usize>,
    pub l_max: usize,
    /// Σ of the tabulated weights.
    pub total_mass: f64,
    /// `−log det(I − P)`, the total `μ`-mass of non-trivial loops.
    pub full_mass: f64,
    /// Residual mass of loops longer than `l_max`, from the spectrum of `P`.
    pub tail_exact: f64,
    /// Upper bound on the residual: `tail_exact` plus a rounding allowance.
    pub tail_bound: f64,
}

/// Enumerates every loop class of length `2..=l_max`.
pub fn enumerate_loops(k: &Kernel, l_max: usize) -> Result<LoopMeasureTable> {
    enumerate_loops_with_budget(k, l_max, DEFAULT_BUDGET)
}

pub fn enumerate_loops_with_budget(k: &Kernel, l_max: usize, budget: usize) -> Result<LoopMeasureTable> {
    if l_max < 2 {
        return Err(Error::InvalidArgument("l_max must be at least 2".into()));
    }
    let mut entries = Vec::new();
    let mut path = Vec::with_capacity(l_max);
    for s in 0..k.n() {
        path.clear();
        path.push(s);
        extend_walks(k, s, &mut path, 1.0, l_max, budget, &mut entries)?;
    }
    entries.sort_by(|a: &(LoopClass, f64), b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
    Ok(LoopMeasureTable::from_entries(k, entries, l_max))
}

fn extend_walks(
    k: &Kernel,
    start: usize,
    path: &mut Vec<usize>,
    weight: f64,
    l_max: usize,
    budget: usize,
    out: &mut Vec<(LoopClass, f64)>,
) -> Result<()> {
    let x = *path.last().expect("path starts non-empty");
    for &y in k.neighbors(x) {
        let w = weight * k.p()[(x, y)];
        if y == start && is_minimal_rotation(path) {
            if out.len() >= budget {
                return Err(Error::BudgetExceeded(budget));
            }
            let class = LoopClass::from_based(path);
            let m = class.multiplicity() as f64;
            out.push((class, w / m));
        }
        if y >= start && path.len() < l_max {
            path.push(y);
            extend_walks(k, start, path, w, l_max, budget, out)?;
            path.pop();
        }
    }
    Ok(())
}

/// `Σ_{p > l_max} ν^p / p` for one eigenvalue.
fn eigen_tail(nu: f64, l_max: usize) -> f64 {
    let a = nu.abs();
    if a < 1e-300 {
        return 0.0;
    }
    let mut sum = CompensatedSum::default();
    let mut term = nu.powi(l_max as i32 + 1);
    let mut p = l_max + 1;
    while p < l_max + 2_000_000 {
        let t = term / p as f64;
        sum.add(t);
        if t.abs() < 1e-22 {
            return sum.value();
        }
        term *= nu;
        p += 1;
    }
    let partial: f64 = (1..=l_max).map(|q| nu.powi(q as i32) / q as f64).sum();
    -(1.0 - nu).ln() - partial
}

impl LoopMeasureTable {
    fn from_entries(k: &Kernel, entries: Vec<(LoopClass, f64)>, l_max: usize) -> Self {
        let eig = k.eigenvalues();
        let full_mass = -eig.iter().map(|v| (1.0 - v).ln()).sum::<f64>();
        let tail_exact = eig.iter().map(|&v| eigen_tail(v, l_max)).sum::<f64>().max(0.0);
        let slack = 1e-12 * (1.0 + full_mass.abs());
        Self::assemble(entries, l_max, full_mass, tail_exact, tail_exact + slack)
    }

    fn assemble(
        entries: Vec<(LoopClass, f64)>,
        l_max: usize,
        full_mass: f64,
        tail_exact: f64,
        tail_bound: f64,
    ) -> Self {
        let mut acc = CompensatedSum::default();
        let cumulative = entries
            .iter()
            .map(|(_, w)| {
                acc.add(*w);
                acc.value()
            })
            .collect();
        let index = entries.iter().enumerate().map(|(i, (c, _))| (c.clone(), i)).collect();
        LoopMeasureTable { entries, cumulative, index, l_max, total_mass: acc.value(), full_mass, tail_exact, tail_bound }
    }

    /// Sub-table of the classes satisfying `keep`; the tail bound of the full table still
    /// bounds the residual of the restriction.
    pub fn filter<F: Fn(&LoopClass) -> bool>(&self, keep: F) -> LoopMeasureTable {
        let entries: Vec<_> = self.entries.iter().filter(|(c, _)| keep(c)).cloned().collect();
        Self::assemble(entries, self.l_max, self.full_mass, self.tail_exact, self.tail_bound)
    }

    pub fn entries(&self) -> &[(LoopClass, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weight(&self, class: &LoopClass) -> Option<f64> {
        self.index.get(class).map(|&i| self.entries[i].1)
    }

    pub fn position(&self, class: &LoopClass) -> Option<usize> {
        self.index.get(class).copied()
    }

    /// Index of the class whose cumulative-weight interval contains `u · total_mass`.
    pub fn pick(&self, u: f64) -> usize {
        let target = u * self.total_mass;
        self.cumulative
            .partition_point(|&c| c <= target)
            .min(self.entries.len() - 1)
    }

    /// Rows `representative;length;multiplicity;weight`.
    pub fn export(&self, g: &WeightedGraph) -> String {
        let mut out = String::from("representative;length;multiplicity;weight\n");
        for (c, w) in &self.entries {
            let _ = writeln!(out, "{};{};{};{}", c.label(g), c.len(), c.multiplicity(), crate::output::fmt_f64(*w));
        }
        out
    }
}

/// Geodesic reduction: removes backtracking pairs recursively, including across the
/// closing step. Returns the empty vector for tree-contour-like loops.
pub fn reduce_loop(seq: &[usize]) -> Vec<usize> {
    if seq.is_empty() {
        return Vec::new();
    }
    let mut stack: Vec<usize> = Vec::with_capacity(seq.len() + 1);
    for &v in seq.iter().chain(std::iter::once(&seq[0])) {
        if stack.len() >= 2 && stack[stack.len() - 2] == v {
            stack.pop();
        } else {
            stack.push(v);
        }
    }
    // stack is a reduced path from seq[0] back to seq[0]; now strip cyclic tails
    let (mut lo, mut hi) = (0, stack.len() - 1);
    while hi - lo >= 2 && stack[lo + 1] == stack[hi - 1] {
        lo += 1;
        hi -= 1;
    }
    if hi - lo < 2 {
        return Vec::new();
    }
    stack[lo..hi].to_vec()
}
