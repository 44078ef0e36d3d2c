//! Holonomy class distribution of the loop soup under an `M`-assignment: exact evaluation
//! per sample, its expectation through twisted determinants, and the cyclic-group law.

use num_complex::Complex64;

use crate::covering::{loop_monodromy_class, MAssignment};
use crate::error::{Error, Result};
use crate::graph::{build_kernel, Kernel, WeightedGraph};
use crate::group::{class_product_by_characters, class_product_distribution, ClassDistribution, FiniteGroup, Irrep, RepresentedGroup};
use crate::homology::{twisted_log_det_ratio, OneForm};
use crate::linalg::{log_det_hpd, CMatrix};
use crate::sampler::{sample_soup_wilson, LoopSoupSample};
use crate::stats::Moments;

/// Monodromy classes of the loops of one soup and the class law of their product.
#[derive(Debug, Clone, PartialEq)]
pub struct HolonomySample {
    /// One conjugacy class index per loop, with multiplicity.
    pub classes: Vec<usize>,
    pub h: ClassDistribution,
}

/// `H_U` for one soup by exact convolution. Loops with trivial monodromy are kept in
/// `classes` but do not change `h`.
pub fn holonomy_distribution(group: &FiniteGroup, u: &MAssignment, sample: &LoopSoupSample) -> HolonomySample {
    let mut classes = Vec::new();
    for (class, &count) in &sample.counts {
        let c = loop_monodromy_class(group, u, class);
        classes.extend(std::iter::repeat_n(c, count as usize));
    }
    let nontrivial: Vec<usize> = classes.iter().copied().filter(|&c| c != 0).collect();
    let h = class_product_distribution(group, &nontrivial);
    HolonomySample { classes, h }
}

/// The same law from characters; agrees with [`holonomy_distribution`].
pub fn holonomy_by_characters(rg: &RepresentedGroup, classes: &[usize]) -> ClassDistribution {
    let nontrivial: Vec<usize> = classes.iter().copied().filter(|&c| c != 0).collect();
    class_product_by_characters(rg, &nontrivial)
}

/// `log det(I − P^{U,π})`, real because `Λ ⊗ I − C π(U)` is Hermitian positive definite
/// for a unitary `π`.
pub fn log_det_twisted(kernel: &Kernel, u: &MAssignment, irrep: &Irrep) -> Result<f64> {
    let d = irrep.dim;
    let n = kernel.n();
    let lambda = kernel.lambda();
    let mut h = CMatrix::zeros(n * d, n * d);
    for x in 0..n {
        for i in 0..d {
            h[(x * d + i, x * d + i)] = Complex64::new(lambda[x], 0.0);
        }
        for &y in kernel.neighbors(x) {
            let c = kernel.p()[(x, y)] * lambda[x];
            let block = irrep.matrix(u.get(x, y)) * Complex64::new(-c, 0.0);
            h.view_mut((x * d, y * d), (d, d)).copy_from(&block);
        }
    }
    let log_h = log_det_hpd(&h).ok_or(Error::BranchFailure)?;
    Ok(log_h - d as f64 * lambda.iter().map(|l| l.ln()).sum::<f64>())
}

/// Which closed form evaluates `E[H_U(C_0)]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HolonomyFormula {
    /// `(|C_0|/|M|) Σ_π d_π conj χ_π(C_0) [det(I − P^{U,π})^{1/d_π} / det(I − P)]^{−α}`,
    /// the expectation of the convolution law.
    #[default]
    Primary,
    /// `Σ_π d_π² conj χ_π(C_0) [det(I − P^{U,π}) / det(I − P)]^{−α} / |M|`, kept for
    /// comparison; it coincides with the primary form for abelian groups only.
    Literal,
}

/// `E[H_U(C_0)]` for the soup of intensity `α`.
pub fn expected_holonomy(
    g: &WeightedGraph,
    rg: &RepresentedGroup,
    u: &MAssignment,
    alpha: f64,
    c0: usize,
    formula: HolonomyFormula,
) -> Result<f64> {
    let kernel = build_kernel(g);
    let base = kernel.log_det_i_minus_p();
    let group = &rg.group;
    let order = group.order() as f64;
    let mut s = Complex64::new(0.0, 0.0);
    for (pi, r) in rg.irreps.iter().enumerate() {
        let d = r.dim as f64;
        let l = log_det_twisted(&kernel, u, r)?;
        let term = match formula {
            HolonomyFormula::Primary => d * (-alpha * (l / d - base)).exp() * group.class_size(c0) as f64,
            HolonomyFormula::Literal => d * d * (-alpha * (l - base)).exp(),
        };
        s += rg.class_character(pi, c0).conj() * term;
    }
    Ok((s / order).re)
}

/// Antisymmetric real form `ω_{x,y} = U_{x,y}/n` representing a `Z/n` assignment mod 1.
pub fn cyclic_form(g: &WeightedGraph, u: &MAssignment, n: usize) -> OneForm {
    let mut w = OneForm::zeros(g.n(), g.n());
    for &(x, y) in g.edges() {
        let v = u.get(x, y) as f64 / n as f64;
        w[(x, y)] = v;
        w[(y, x)] = -v;
    }
    w
}

/// `P(Σ N_{x,y} U_{x,y} ≡ m_0 mod n) = (1/n) Σ_k e^{−2πi k m_0/n} [det G^{(2πikω)}/det G]^α`.
pub fn cyclic_holonomy_law(g: &WeightedGraph, u: &MAssignment, n: usize, alpha: f64, m0: usize) -> f64 {
    cyclic_holonomy_laws(g, u, n, alpha)[m0 % n]
}

/// All `n` probabilities of [`cyclic_holonomy_law`] from one pass over the twists.
pub fn cyclic_holonomy_laws(g: &WeightedGraph, u: &MAssignment, n: usize, alpha: f64) -> Vec<f64> {
    let w = cyclic_form(g, u, n);
    let weights: Vec<f64> = (0..n)
        .map(|k| (-alpha * twisted_log_det_ratio(g, &w.map(|v| v * k as f64))).exp())
        .collect();
    (0..n)
        .map(|m0| {
            let s: Complex64 = weights
                .iter()
                .enumerate()
                .map(|(k, &f)| Complex64::from_polar(f, -std::f64::consts::TAU * (k * m0) as f64 / n as f64))
                .sum();
            s.re / n as f64
        })
        .collect()
}

/// Monte Carlo mean of `H_U(C)` for every class over Wilson-sampled soups (`α = 1`).
pub fn mc_expected_holonomy(
    g: &WeightedGraph,
    group: &FiniteGroup,
    u: &MAssignment,
    samples: usize,
    seed: u64,
) -> Vec<Moments> {
    let kernel = build_kernel(g);
    let mut acc = vec![Moments::default(); group.conjugacy_classes().len()];
    for s in 0..samples {
        let soup = sample_soup_wilson(&kernel, crate::rng::replica_seed(seed, s as u64));
        let h = holonomy_distribution(group, u, &soup).h;
        for (m, p) in acc.iter_mut().zip(h.probs) {
            m.push(p);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::{apply_gauge, random_gauge};
    use crate::graph::cycle_basis;
    use crate::homology::homology_law;
    use crate::loops::LoopClass;

    fn soup_of(classes: &[(&[usize], u64)]) -> LoopSoupSample {
        let mut s = LoopSoupSample::empty(1.0, 0);
        for (seq, c) in classes {
            s.insert(LoopClass::from_based(seq), *c);
        }
        s
    }

    #[test]
    fn distribution_examples() {
        let g = WeightedGraph::builtin("t3").unwrap();
        let z2 = FiniteGroup::cyclic(2);
        let u = MAssignment::from_fn(&g, &z2, |x, y| usize::from((x, y) == (0, 1) || (x, y) == (1, 0)));
        let empty = holonomy_distribution(&z2, &u, &LoopSoupSample::empty(1.0, 0));
        assert_eq!(empty.h.probs, vec![1.0, 0.0]);
        let one = holonomy_distribution(&z2, &u, &soup_of(&[(&[0, 1, 2], 1)]));
        assert_eq!(one.h.probs, vec![0.0, 1.0]);
        let rg = RepresentedGroup::s3();
        let t = rg.group.class_of(rg.group.index_of("(12)").unwrap());
        let h = holonomy_by_characters(&rg, &[t, t]);
        let three = rg.group.class_of(rg.group.index_of("(123)").unwrap());
        assert_close!(h.probs[0], 1.0 / 3.0, 1e-12);
        assert_close!(h.probs[three], 2.0 / 3.0, 1e-12);
    }

    #[test]
    fn character_form_matches_convolution_and_gauge() {
        let g = WeightedGraph::builtin("k4").unwrap();
        let kernel = build_kernel(&g);
        let table = crate::loops::enumerate_loops(&kernel, 6).unwrap();
        for rg in [RepresentedGroup::cyclic(3), RepresentedGroup::s3(), RepresentedGroup::d4()] {
            let u = MAssignment::random(&g, &rg.group, 5);
            let gauge = random_gauge(g.n(), &rg.group, 9);
            let v = apply_gauge(&g, &rg.group, &u, &gauge);
            for seed in 0..10 {
                let soup = crate::sampler::sample_soup(&table, 0.3, seed);
                let a = holonomy_distribution(&rg.group, &u, &soup);
                let b = holonomy_by_characters(&rg, &a.classes);
                assert!(a.h.max_abs_diff(&b) < 1e-12);
                assert_close!(a.h.total(), 1.0, 1e-12);
                assert_eq!(holonomy_distribution(&rg.group, &v, &soup).h, a.h);
            }
        }
    }

    #[test]
    fn expectation_formulas() {
        let g = WeightedGraph::builtin("t3").unwrap();
        let z2 = RepresentedGroup::cyclic(2);
        let id = MAssignment::identity(&g, &z2.group);
        assert_close!(expected_holonomy(&g, &z2, &id, 1.0, 0, HolonomyFormula::Primary).unwrap(), 1.0, 1e-12);
        let z3 = RepresentedGroup::cyclic(3);
        let u = MAssignment::random(&g, &z3.group, 2);
        for c0 in 0..3 {
            let a = expected_holonomy(&g, &z3, &u, 1.0, c0, HolonomyFormula::Primary).unwrap();
            let b = expected_holonomy(&g, &z3, &u, 1.0, c0, HolonomyFormula::Literal).unwrap();
            assert_close!(a, b, 1e-12);
            let c = cyclic_holonomy_law(&g, &u, 3, 1.0, z3.group.conjugacy_classes()[c0][0]);
            assert_close!(a, c, 1e-12);
        }
        let s3 = RepresentedGroup::s3();
        let u = MAssignment::random(&g, &s3.group, 4);
        let total: f64 = (0..s3.group.conjugacy_classes().len())
            .map(|c| expected_holonomy(&g, &s3, &u, 0.7, c, HolonomyFormula::Primary).unwrap())
            .sum();
        assert_close!(total, 1.0, 1e-12);
    }

    #[test]
    fn cyclic_law_agrees_with_homology() {
        let g = WeightedGraph::builtin("cycle4").unwrap();
        let basis = cycle_basis(&g, 0);
        let (a, b) = basis.cotree[0];
        let n = 5;
        let mut u = MAssignment::identity(&g, &FiniteGroup::cyclic(n));
        u.set(&FiniteGroup::cyclic(n), a, b, 2);
        let law = cyclic_holonomy_laws(&g, &u, n, 0.5);
        assert_close!(law.iter().sum::<f64>(), 1.0, 1e-12);
        let hom = homology_law(&g, &basis, 0.5, 128, 20).unwrap();
        let mut folded = vec![0.0; n];
        for (j, p) in hom {
            folded[(j[0] * 2).rem_euclid(n as i64) as usize] += p.value;
        }
        for m in 0..n {
            assert_close!(law[m], folded[m], 1e-10);
        }
        let none = cyclic_holonomy_laws(&g, &MAssignment::identity(&g, &FiniteGroup::cyclic(n)), n, 1.0);
        assert_close!(none[0], 1.0, 1e-12);
    }

    #[test]
    fn half_twist_parity() {
        let g = WeightedGraph::builtin("t2").unwrap();
        let z2 = FiniteGroup::cyclic(2);
        let u = MAssignment::from_fn(&g, &z2, |_, _| 1);
        let w = cyclic_form(&g, &u, 2);
        let ratio = (-twisted_log_det_ratio(&g, &w)).exp();
        assert_close!(cyclic_holonomy_law(&g, &u, 2, 1.0, 0), 0.5 * (1.0 + ratio), 1e-12);
    }
}
