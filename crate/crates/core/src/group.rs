//! Finite groups given by multiplication tables, explicit unitary irreducible
//! representations, class-product laws and Frobenius counts.

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// A finite group as a multiplication table over indices `0..order`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGroup {
    names: Vec<String>,
    table: Vec<Vec<usize>>,
    inv: Vec<usize>,
    id: usize,
    classes: Vec<Vec<usize>>,
    class_of: Vec<usize>,
}

impl FiniteGroup {
    /// Validates closure, identity, inverses and associativity.
    pub fn new(names: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty element list".into()));
        }
        if table.len() != n || table.iter().any(|r| r.len() != n || r.iter().any(|&v| v >= n)) {
            return Err(Error::InvalidGroup("multiplication table must be n x n over the elements".into()));
        }
        let id = (0..n)
            .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or_else(|| Error::InvalidGroup("no identity element".into()))?;
        let mut inv = vec![0; n];
        for g in 0..n {
            inv[g] = (0..n)
                .find(|&h| table[g][h] == id && table[h][g] == id)
                .ok_or_else(|| Error::InvalidGroup(format!("element {} has no inverse", names[g])))?;
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::InvalidGroup("multiplication is not associative".into()));
                    }
                }
            }
        }
        let mut class_of = vec![usize::MAX; n];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        // identity first so its class has index 0
        let order: Vec<usize> = std::iter::once(id).chain((0..n).filter(|&g| g != id)).collect();
        for &g in &order {
            if class_of[g] != usize::MAX {
                continue;
            }
            let mut members: Vec<usize> = (0..n).map(|h| table[table[h][g]][inv[h]]).collect();
            members.sort_unstable();
            members.dedup();
            for &m in &members {
                class_of[m] = classes.len();
            }
            classes.push(members);
        }
        Ok(FiniteGroup { names, table, inv, id, classes, class_of })
    }

    /// Closure of a list of matrices under products (the list must already be a group).
    pub fn from_matrices(names: Vec<String>, mats: &[CMatrix]) -> Result<Self> {
        let find = |m: &CMatrix| mats.iter().position(|x| crate::linalg::max_abs_diff_c(x, m) < 1e-9);
        let mut table = vec![vec![0; mats.len()]; mats.len()];
        for (a, ma) in mats.iter().enumerate() {
            for (b, mb) in mats.iter().enumerate() {
                table[a][b] = find(&(ma * mb)).ok_or_else(|| Error::InvalidGroup("matrices are not closed".into()))?;
            }
        }
        Self::new(names, table)
    }

    /// `Z/n` with elements `0..n` under addition.
    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::new((0..n).map(|i| i.to_string()).collect(), table).expect("cyclic group is valid")
    }

    pub fn order(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn identity(&self) -> usize {
        self.id
    }

    pub fn product<I: IntoIterator<Item = usize>>(&self, it: I) -> usize {
        it.into_iter().fold(self.id, |acc, g| self.mul(acc, g))
    }

    /// Conjugacy classes; class 0 is `{e}`.
    pub fn conjugacy_classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_of(&self, g: usize) -> usize {
        self.class_of[g]
    }

    pub fn class_size(&self, c: usize) -> usize {
        self.classes[c].len()
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order()).all(|a| (0..self.order()).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Subgroup generated by `gens`, as a sorted element list.
    pub fn generated_subgroup(&self, gens: &[usize]) -> Vec<usize> {
        let mut members = vec![false; self.order()];
        members[self.id] = true;
        let mut frontier = vec![self.id];
        while let Some(h) = frontier.pop() {
            for &g in gens {
                let p = self.mul(h, g);
                if !members[p] {
                    members[p] = true;
                    frontier.push(p);
                }
            }
        }
        (0..self.order()).filter(|&g| members[g]).collect()
    }
}

/// A unitary representation given by one matrix per group element.
#[derive(Debug, Clone, PartialEq)]
pub struct Irrep {
    pub dim: usize,
    pub matrices: Vec<CMatrix>,
}

impl Irrep {
    pub fn trivial(group: &FiniteGroup) -> Self {
        Irrep { dim: 1, matrices: vec![CMatrix::identity(1, 1); group.order()] }
    }

    /// One-dimensional representation from a character.
    pub fn from_character(values: &[Complex64]) -> Self {
        Irrep { dim: 1, matrices: values.iter().map(|&v| CMatrix::from_element(1, 1, v)).collect() }
    }

    pub fn matrix(&self, g: usize) -> &CMatrix {
        &self.matrices[g]
    }

    pub fn character(&self, g: usize) -> Complex64 {
        self.matrices[g].trace()
    }

    /// Homomorphism and unitarity to `tol`.
    pub fn validate(&self, group: &FiniteGroup, tol: f64) -> Result<()> {
        if self.matrices.len() != group.order() {
            return Err(Error::InvalidRepresentation("one matrix per element is required".into()));
        }
        if self.matrices.iter().any(|m| m.nrows() != self.dim || m.ncols() != self.dim) {
            return Err(Error::InvalidRepresentation("matrix size differs from dimension".into()));
        }
        let eye = CMatrix::identity(self.dim, self.dim);
        for a in 0..group.order() {
            let ma = &self.matrices[a];
            if crate::linalg::max_abs_diff_c(&(ma * ma.adjoint()), &eye) > tol {
                return Err(Error::InvalidRepresentation(format!("matrix of {} is not unitary", group.names[a])));
            }
            for b in 0..group.order() {
                let lhs = ma * &self.matrices[b];
                if crate::linalg::max_abs_diff_c(&lhs, &self.matrices[group.mul(a, b)]) > tol {
                    return Err(Error::InvalidRepresentation("matrices do not respect the product".into()));
                }
            }
        }
        Ok(())
    }
}

/// A group with a complete list of irreducible unitary representations.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentedGroup {
    pub group: FiniteGroup,
    pub irreps: Vec<Irrep>,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn real_matrix(rows: &[&[f64]]) -> CMatrix {
    CMatrix::from_fn(rows.len(), rows[0].len(), |i, j| c(rows[i][j], 0.0))
}

impl RepresentedGroup {
    /// Checks every irrep, `Σ dim² = |G|` and character orthogonality.
    pub fn new(group: FiniteGroup, irreps: Vec<Irrep>) -> Result<Self> {
        for r in &irreps {
            r.validate(&group, 1e-12)?;
        }
        let sum_sq: usize = irreps.iter().map(|r| r.dim * r.dim).sum();
        if sum_sq != group.order() {
            return Err(Error::InvalidRepresentation(format!(
                "sum of squared dimensions {} differs from the group order {}",
                sum_sq,
                group.order()
            )));
        }
        let rg = RepresentedGroup { group, irreps };
        if rg.orthogonality_defect() > 1e-10 {
            return Err(Error::InvalidRepresentation("characters are not orthonormal".into()));
        }
        Ok(rg)
    }

    /// `Z/n` with characters `m ↦ e^{2πikm/n}`.
    pub fn cyclic(n: usize) -> Self {
        let group = FiniteGroup::cyclic(n);
        let irreps = (0..n)
            .map(|k| {
                let chi: Vec<Complex64> = (0..n)
                    .map(|m| Complex64::from_polar(1.0, std::f64::consts::TAU * ((k * m) % n) as f64 / n as f64))
                    .collect();
                Irrep::from_character(&chi)
            })
            .collect();
        Self::new(group, irreps).expect("cyclic characters are valid")
    }

    /// `S_3` as permutations of three points: trivial, sign and the two-dimensional
    /// standard representation.
    pub fn s3() -> Self {
        let perms: [[usize; 3]; 6] = [[0, 1, 2], [1, 0, 2], [2, 1, 0], [0, 2, 1], [1, 2, 0], [2, 0, 1]];
        let names = ["e", "(12)", "(13)", "(23)", "(123)", "(132)"];
        let perm_matrix = |p: &[usize; 3]| CMatrix::from_fn(3, 3, |i, j| c(if p[j] == i { 1.0 } else { 0.0 }, 0.0));
        let mats: Vec<CMatrix> = perms.iter().map(perm_matrix).collect();
        let group = FiniteGroup::from_matrices(names.iter().map(|s| s.to_string()).collect(), &mats).expect("S3");
        let sign: Vec<Complex64> = [1.0, -1.0, -1.0, -1.0, 1.0, 1.0].iter().map(|&s| c(s, 0.0)).collect();
        let s2 = std::f64::consts::SQRT_2;
        let s6 = 6f64.sqrt();
        let basis = real_matrix(&[&[1.0 / s2, 1.0 / s6], &[-1.0 / s2, 1.0 / s6], &[0.0, -2.0 / s6]]);
        let standard = Irrep { dim: 2, matrices: mats.iter().map(|m| basis.adjoint() * m * &basis).collect() };
        Self::new(group.clone(), vec![Irrep::trivial(&group), Irrep::from_character(&sign), standard])
            .expect("S3 irreps are valid")
    }

    /// Dihedral group of the square, `r^a s^b`: four characters and the defining
    /// two-dimensional representation.
    pub fn d4() -> Self {
        let r = real_matrix(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let s = real_matrix(&[&[1.0, 0.0], &[0.0, -1.0]]);
        let mut mats = Vec::new();
        let mut names = Vec::new();
        let mut labels = Vec::new();
        for b in 0..2 {
            for a in 0..4 {
                let mut m = CMatrix::identity(2, 2);
                for _ in 0..a {
                    m = &r * m;
                }
                if b == 1 {
                    m = m * &s;
                }
                mats.push(m);
                names.push(match (a, b) {
                    (0, 0) => "e".to_string(),
                    (1, 0) => "r".to_string(),
                    (a, 0) => format!("r{a}"),
                    (0, 1) => "s".to_string(),
                    (1, 1) => "rs".to_string(),
                    (a, _) => format!("r{a}s"),
                });
                labels.push((a, b));
            }
        }
        let group = FiniteGroup::from_matrices(names, &mats).expect("D4");
        let mut irreps = Vec::new();
        for e1 in [1.0, -1.0] {
            for e2 in [1.0, -1.0] {
                let chi: Vec<Complex64> =
                    labels.iter().map(|&(a, b)| c(f64::powi(e1, a as i32) * f64::powi(e2, b), 0.0)).collect();
                irreps.push(Irrep::from_character(&chi));
            }
        }
        irreps.push(Irrep { dim: 2, matrices: mats });
        Self::new(group, irreps).expect("D4 irreps are valid")
    }

    /// `z2`, `zN` (`N ≤ 12`), `s3`, `d4`.
    pub fn builtin(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "s3" => Ok(Self::s3()),
            "d4" => Ok(Self::d4()),
            other => match other.strip_prefix('z').and_then(|s| s.parse::<usize>().ok()) {
                Some(n) if (1..=12).contains(&n) => Ok(Self::cyclic(n)),
                _ => Err(Error::InvalidArgument(format!("unknown builtin group {name:?}"))),
            },
        }
    }

    /// Loads `{"elements": [...], "table": [[name, ...], ...], "irreps": [{"dim": d,
    /// "matrices": [[[re, im], ...], ...]}]}` with row-major matrices in element order.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct File {
            elements: Vec<String>,
            table: Vec<Vec<String>>,
            irreps: Vec<IrrepFile>,
        }
        #[derive(Deserialize)]
        struct IrrepFile {
            dim: usize,
            matrices: Vec<Vec<[f64; 2]>>,
        }
        let file: File = serde_json::from_str(text)?;
        let index = |s: &str| {
            file.elements
                .iter()
                .position(|e| e == s)
                .ok_or_else(|| Error::InvalidGroup(format!("unknown element {s:?} in table")))
        };
        let table = file
            .table
            .iter()
            .map(|row| row.iter().map(|s| index(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let group = FiniteGroup::new(file.elements.clone(), table)?;
        let irreps = file
            .irreps
            .iter()
            .map(|r| {
                let matrices = r
                    .matrices
                    .iter()
                    .map(|entries| {
                        if entries.len() != r.dim * r.dim {
                            return Err(Error::InvalidRepresentation("matrix entry count differs from dim²".into()));
                        }
                        Ok(CMatrix::from_fn(r.dim, r.dim, |i, j| {
                            let [re, im] = entries[i * r.dim + j];
                            c(re, im)
                        }))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Irrep { dim: r.dim, matrices })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(group, irreps)
    }

    /// Character of irrep `pi` on class `c`.
    pub fn class_character(&self, pi: usize, class: usize) -> Complex64 {
        self.irreps[pi].character(self.group.conjugacy_classes()[class][0])
    }

    /// `max |Σ_g χ_π(g) conj χ_π'(g) / |G| − δ_{ππ'}|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.group.order() as f64;
        let mut worst: f64 = 0.0;
        for (i, a) in self.irreps.iter().enumerate() {
            for (j, b) in self.irreps.iter().enumerate() {
                let s: Complex64 = (0..self.group.order()).map(|g| a.character(g) * b.character(g).conj()).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s / n - target).norm());
            }
        }
        worst
    }
}

/// A probability vector over conjugacy classes.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassDistribution {
    pub probs: Vec<f64>,
}

impl ClassDistribution {
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &ClassDistribution) -> f64 {
        self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Element-level law of `γ_1 ⋯ γ_k`, `γ_i` uniform on class `classes[i]`.
fn element_law(group: &FiniteGroup, classes: &[usize]) -> Vec<f64> {
    let n = group.order();
    let mut law = vec![0.0; n];
    law[group.identity()] = 1.0;
    for &cl in classes {
        let members = &group.conjugacy_classes()[cl];
        let w = 1.0 / members.len() as f64;
        let mut next = vec![0.0; n];
        for (g, &p) in law.iter().enumerate() {
            if p != 0.0 {
                for &h in members {
                    next[group.mul(g, h)] += p * w;
                }
            }
        }
        law = next;
    }
    law
}

/// Law of the class of `γ_1 ⋯ γ_k` by exact convolution over elements.
pub fn class_product_distribution(group: &FiniteGroup, classes: &[usize]) -> ClassDistribution {
    let law = element_law(group, classes);
    let mut probs = vec![0.0; group.conjugacy_classes().len()];
    for (g, p) in law.into_iter().enumerate() {
        probs[group.class_of(g)] += p;
    }
    ClassDistribution { probs }
}

/// The same law from characters:
/// `(|C_0|/|M|) Σ_π d_π conj χ_π(C_0) Π_i χ_π(C_i)/d_π`.
pub fn class_product_by_characters(rg: &RepresentedGroup, classes: &[usize]) -> ClassDistribution {
    let group = &rg.group;
    let order = group.order() as f64;
    let probs = (0..group.conjugacy_classes().len())
        .map(|c0| {
            let s: Complex64 = rg
                .irreps
                .iter()
                .enumerate()
                .map(|(pi, r)| {
                    let d = r.dim as f64;
                    let prod: Complex64 = classes.iter().map(|&ci| rg.class_character(pi, ci) / d).product();
                    rg.class_character(pi, c0).conj() * d * prod
                })
                .sum();
            (s * group.class_size(c0) as f64 / order).re
        })
        .collect();
    ClassDistribution { probs }
}

/// Number of tuples `(γ_1, …, γ_k) ∈ C_1 × ⋯ × C_k` whose product lies in `C_0`.
pub fn frobenius_count(group: &FiniteGroup, classes: &[usize], c0: usize) -> u128 {
    let n = group.order();
    let mut counts = vec![0u128; n];
    counts[group.identity()] = 1;
    for &cl in classes {
        let mut next = vec![0u128; n];
        for (g, &m) in counts.iter().enumerate() {
            if m != 0 {
                for &h in &group.conjugacy_classes()[cl] {
                    next[group.mul(g, h)] += m;
                }
            }
        }
        counts = next;
    }
    group.conjugacy_classes()[c0].iter().map(|&g| counts[g]).sum()
}

/// Character-sum evaluation of [`frobenius_count`].
pub fn frobenius_count_by_characters(rg: &RepresentedGroup, classes: &[usize], c0: usize) -> f64 {
    let sizes: f64 = classes.iter().map(|&c| rg.group.class_size(c) as f64).product();
    sizes * class_product_by_characters(rg, classes).probs[c0]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn builtins() -> Vec<RepresentedGroup> {
        let mut v: Vec<RepresentedGroup> = (1..=12).map(RepresentedGroup::cyclic).collect();
        v.push(RepresentedGroup::s3());
        v.push(RepresentedGroup::d4());
        v
    }

    #[test]
    fn class_examples() {
        let z2 = FiniteGroup::cyclic(2);
        assert_eq!(z2.conjugacy_classes(), &[vec![0], vec![1]]);
        let s3 = RepresentedGroup::s3().group;
        let mut sizes: Vec<usize> = s3.conjugacy_classes().iter().map(Vec::len).collect();
        assert_eq!(sizes[0], 1);
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 2, 3]);
        assert_eq!(FiniteGroup::cyclic(7).conjugacy_classes().len(), 7);
        let d4 = RepresentedGroup::d4().group;
        assert_eq!(d4.conjugacy_classes().len(), 5);
    }

    #[test]
    fn orthogonality_of_builtins() {
        for rg in builtins() {
            assert!(rg.orthogonality_defect() < 1e-10);
        }
    }

    #[test]
    fn class_products() {
        let z2 = FiniteGroup::cyclic(2);
        assert_eq!(class_product_distribution(&z2, &[]).probs, vec![1.0, 0.0]);
        assert_eq!(class_product_distribution(&z2, &[1, 1]).probs, vec![1.0, 0.0]);
        let s3 = RepresentedGroup::s3();
        let g = &s3.group;
        let tr = g.class_of(g.index_of("(12)").unwrap());
        let cyc = g.class_of(g.index_of("(123)").unwrap());
        let d = class_product_distribution(g, &[tr, tr]);
        assert_close!(d.probs[0], 1.0 / 3.0, 1e-15);
        assert_close!(d.probs[cyc], 2.0 / 3.0, 1e-15);
        assert_eq!(frobenius_count(g, &[tr, tr], cyc), 6);
        assert_eq!(frobenius_count(&z2, &[1, 1], 0), 1);
        assert_close!(frobenius_count_by_characters(&s3, &[tr, tr], cyc), 6.0, 1e-12);
    }

    #[test]
    fn character_formula_matches_convolution() {
        for rg in builtins() {
            let k = rg.group.conjugacy_classes().len();
            for len in 0..=4usize {
                let list: Vec<usize> = (0..len).map(|i| (i * 7 + len) % k).collect();
                let a = class_product_distribution(&rg.group, &list);
                let b = class_product_by_characters(&rg, &list);
                assert!(a.max_abs_diff(&b) < 1e-12);
                assert_close!(a.total(), 1.0, 1e-12);
            }
        }
    }

    #[test]
    fn bad_tables_are_rejected() {
        let names = vec!["a".to_string(), "b".to_string()];
        assert!(FiniteGroup::new(names.clone(), vec![vec![0, 0], vec![0, 0]]).is_err());
        assert!(FiniteGroup::new(names, vec![vec![0, 1]]).is_err());
        let g = FiniteGroup::cyclic(3);
        assert!(RepresentedGroup::new(g.clone(), vec![Irrep::trivial(&g)]).is_err());
    }

    #[test]
    fn json_round_trip_of_z2() {
        let text = r#"{"elements":["e","f"],"table":[["e","f"],["f","e"]],
            "irreps":[{"dim":1,"matrices":[[[1,0]],[[1,0]]]},{"dim":1,"matrices":[[[1,0]],[[-1,0]]]}]}"#;
        let rg = RepresentedGroup::from_json(text).unwrap();
        assert_eq!(rg.group.order(), 2);
        let bad = text.replace("[[-1,0]]", "[[2,0]]");
        assert!(matches!(RepresentedGroup::from_json(&bad), Err(Error::InvalidRepresentation(_))));
    }
}
