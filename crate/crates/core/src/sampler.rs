//! Poissonian loop ensembles: the truncated-table sampler for any intensity, Wilson's
//! algorithm as an exact sampler at intensity one, the occupation field and the edge
//! network.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use crate::graph::{Kernel, WeightedGraph};
use crate::loops::{LoopClass, LoopMeasureTable};
use crate::networks::Network;
use crate::rng::{substream, Stream};

/// One realization of the loop ensemble: a multiset of loop classes.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopSoupSample {
    pub alpha: f64,
    pub counts: BTreeMap<LoopClass, u64>,
    /// Expected number of loops lost to the length cap, `α · tail_bound`.
    pub truncation_mass: f64,
    pub seed: u64,
}

impl LoopSoupSample {
    pub fn empty(alpha: f64, seed: u64) -> Self {
        LoopSoupSample { alpha, counts: BTreeMap::new(), truncation_mass: 0.0, seed }
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn loop_count(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Total number of jumps over all loops.
    pub fn total_length(&self) -> u64 {
        self.counts.iter().map(|(c, &m)| c.len() as u64 * m).sum()
    }

    /// Each loop listed once per copy.
    pub fn loops(&self) -> impl Iterator<Item = &LoopClass> {
        self.counts.iter().flat_map(|(c, &m)| std::iter::repeat_n(c, m as usize))
    }

    pub fn insert(&mut self, class: LoopClass, count: u64) {
        if count > 0 {
            *self.counts.entry(class).or_default() += count;
        }
    }

    /// Visits per vertex over the full cyclic words.
    pub fn visit_counts(&self, n: usize) -> Vec<u64> {
        let mut v = vec![0u64; n];
        for (c, &m) in &self.counts {
            for &x in c.vertices() {
                v[x] += m;
            }
        }
        v
    }

    /// One line per class: `representative;count`.
    pub fn dump(&self, g: &WeightedGraph) -> String {
        let mut out = String::from("representative;count\n");
        for (c, m) in &self.counts {
            let _ = writeln!(out, "{};{}", c.label(g), m);
        }
        out
    }
}

/// `L̂^x`, the occupation time at `x` normalized by `λ_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationField {
    pub values: Vec<f64>,
}

impl OccupationField {
    pub fn to_csv(&self, g: &WeightedGraph) -> String {
        let mut out = String::from("vertex,occupation\n");
        for (name, v) in g.names().iter().zip(&self.values) {
            let _ = writeln!(out, "{},{}", name, crate::output::fmt_f64(*v));
        }
        out
    }
}

/// Samples `L_α` restricted to the tabulated classes: class counts are independent
/// Poisson(α μ(class)).
pub fn sample_soup(table: &LoopMeasureTable, alpha: f64, seed: u64) -> LoopSoupSample {
    sample_soup_coupled(table, &[alpha], seed).pop().expect("one intensity")
}

/// Samples the ensembles for an increasing intensity grid on one probability space: the
/// sample at `α_i` is the superposition of independent increments of intensity
/// `α_j − α_{j−1}`, `j ≤ i`, so counts are entrywise nondecreasing along the grid.
pub fn sample_soup_coupled(table: &LoopMeasureTable, alphas: &[f64], seed: u64) -> Vec<LoopSoupSample> {
    assert!(alphas.windows(2).all(|w| w[0] <= w[1]), "intensities must be nondecreasing");
    let mut out = Vec::with_capacity(alphas.len());
    let mut current = LoopSoupSample::empty(0.0, seed);
    let mut prev = 0.0;
    for (i, &alpha) in alphas.iter().enumerate() {
        assert!(alpha >= 0.0, "intensity must be nonnegative");
        let mean = (alpha - prev) * table.total_mass;
        if mean > 0.0 && !table.is_empty() {
            let mut count_rng = substream(seed, Stream::SoupCounts, i as u64);
            let mut choice_rng = substream(seed, Stream::LoopChoice, i as u64);
            let total = Poisson::new(mean).expect("positive mean").sample(&mut count_rng) as u64;
            for _ in 0..total {
                let idx = table.pick(choice_rng.random::<f64>());
                current.insert(table.entries()[idx].0.clone(), 1);
            }
        }
        prev = alpha;
        current.alpha = alpha;
        current.truncation_mass = alpha * table.tail_bound;
        out.push(current.clone());
    }
    out
}

/// The loops erased by Wilson's algorithm (roots visited in vertex order, killing as
/// absorption into the tree) form a sample of `L_1` without truncation.
///
/// The portion of the walk erased at a stack vertex `v` splits into excursions from `v`;
/// these are grouped into loops by the cycles of a uniform random permutation.
pub fn sample_soup_wilson(kernel: &Kernel, seed: u64) -> LoopSoupSample {
    let n = kernel.n();
    let mut walk_rng = substream(seed, Stream::Wilson, 0);
    let mut perm_rng = substream(seed, Stream::Permutation, 0);
    let mut sample = LoopSoupSample::empty(1.0, seed);
    let mut in_tree = vec![false; n];
    let mut on_stack: Vec<Option<usize>> = vec![None; n];
    let mut walk: Vec<usize> = Vec::new();
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if in_tree[root] {
            continue;
        }
        walk.clear();
        stack.clear();
        walk.push(root);
        stack.push((root, 0));
        on_stack[root] = Some(0);
        let end = loop {
            let x = *walk.last().expect("walk is non-empty");
            let Some(y) = step(kernel, x, &mut walk_rng) else {
                break walk.len();
            };
            walk.push(y);
            if in_tree[y] {
                break walk.len() - 1;
            }
            match on_stack[y] {
                Some(j) => {
                    for &(v, _) in &stack[j + 1..] {
                        on_stack[v] = None;
                    }
                    stack.truncate(j + 1);
                }
                None => {
                    on_stack[y] = Some(stack.len());
                    stack.push((y, walk.len() - 1));
                }
            }
        };
        for j in 0..stack.len() {
            let (v, start) = stack[j];
            let stop = stack.get(j + 1).map_or(end, |&(_, s)| s);
            emit_erased_loops(&walk[start..stop], v, &mut perm_rng, &mut sample);
            in_tree[v] = true;
            on_stack[v] = None;
        }
    }
    sample
}

/// Next vertex of the walk, or `None` when killed.
fn step<R: Rng>(kernel: &Kernel, x: usize, rng: &mut R) -> Option<usize> {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &y in kernel.neighbors(x) {
        acc += kernel.p()[(x, y)];
        if u < acc {
            return Some(y);
        }
    }
    None
}

fn emit_erased_loops<R: Rng>(segment: &[usize], base: usize, rng: &mut R, sample: &mut LoopSoupSample) {
    let visits: Vec<usize> = segment
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == base)
        .map(|(i, _)| i)
        .collect();
    let excursions: Vec<&[usize]> = visits.windows(2).map(|w| &segment[w[0]..w[1]]).collect();
    let m = excursions.len();
    if m == 0 {
        return;
    }
    // uniform permutation by Fisher–Yates; each cycle becomes one loop
    let mut sigma: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        let j = rng.random_range(0..=i);
        sigma.swap(i, j);
    }
    let mut seen = vec![false; m];
    for s in 0..m {
        if seen[s] {
            continue;
        }
        let mut word = Vec::new();
        let mut i = s;
        while !seen[i] {
            seen[i] = true;
            word.extend_from_slice(excursions[i]);
            i = sigma[i];
        }
        sample.insert(LoopClass::from_based(&word), 1);
    }
}

/// `L̂^x = (Σ over visits of Exp(1) holding times + T_x) / λ_x` with `T_x ~ Gamma(α, 1)`
/// the one-point-loop aggregate; drawn directly as `Gamma(n_x + α, 1) / λ_x`.
pub fn occupation_field(sample: &LoopSoupSample, kernel: &Kernel, alpha: f64, seed: u64) -> OccupationField {
    assert!(alpha > 0.0, "intensity must be positive");
    let mut rng = substream(seed, Stream::HoldingTimes, 0);
    let visits = sample.visit_counts(kernel.n());
    let values = visits
        .iter()
        .zip(kernel.lambda())
        .map(|(&v, &l)| Gamma::new(v as f64 + alpha, 1.0).expect("positive shape").sample(&mut rng) / l)
        .collect();
    OccupationField { values }
}

/// Occupation field without the one-point loops: `Gamma(n_x, 1)/λ_x`, zero where unvisited.
pub fn occupation_field_nontrivial(sample: &LoopSoupSample, kernel: &Kernel, seed: u64) -> OccupationField {
    let mut rng = substream(seed, Stream::HoldingTimes, 1);
    let visits = sample.visit_counts(kernel.n());
    let values = visits
        .iter()
        .zip(kernel.lambda())
        .map(|(&v, &l)| if v == 0 { 0.0 } else { Gamma::new(v as f64, 1.0).expect("positive shape").sample(&mut rng) / l })
        .collect();
    OccupationField { values }
}

/// `N_{x,y}`: number of jumps `x → y` over all loops (full cyclic words).
pub fn edge_network(sample: &LoopSoupSample, n: usize) -> Network {
    let mut net = Network::zeros(n);
    for (c, &m) in &sample.counts {
        for (x, y) in c.steps() {
            net.add_to(x, y, m);
        }
    }
    net
}
