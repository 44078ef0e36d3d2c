//! Weighted graphs with killing, the transition kernel, Green function, energy form and
//! fundamental cycle bases.

use std::collections::{BTreeMap, HashMap, VecDeque};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::{substream, Stream};

/// Finite connected graph with symmetric conductances and a killing measure.
///
/// Vertices are indexed `0..n` in the order they were given; every matrix produced from the
/// graph uses that order.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    names: Vec<String>,
    conductance: DMatrix<f64>,
    killing: Vec<f64>,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphFile {
    vertices: Vec<String>,
    edges: Vec<EdgeEntry>,
    #[serde(default)]
    killing: BTreeMap<String, f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeEntry {
    u: String,
    v: String,
    c: f64,
}

impl WeightedGraph {
    /// Builds a graph from `(u, v, conductance)` triples. Fails on self-loops, duplicate
    /// edges, non-positive conductances, negative killing, disconnected graphs, and when
    /// `Λ − C` is not positive definite.
    pub fn new(names: Vec<String>, edges: &[(usize, usize, f64)], killing: Vec<f64>) -> Result<Self> {
        Self::build(names, edges, killing, true)
    }

    pub(crate) fn build(
        names: Vec<String>,
        edges: &[(usize, usize, f64)],
        killing: Vec<f64>,
        require_connected: bool,
    ) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::InvalidGraph("no vertices".into()));
        }
        if killing.len() != n {
            return Err(Error::InvalidGraph(format!(
                "killing has {} entries for {n} vertices",
                killing.len()
            )));
        }
        let mut seen = HashMap::new();
        for (i, name) in names.iter().enumerate() {
            if seen.insert(name.as_str(), i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate vertex {name:?}")));
            }
        }
        if let Some((x, k)) = killing.iter().enumerate().find(|(_, k)| !(**k >= 0.0) || !k.is_finite()) {
            return Err(Error::InvalidGraph(format!("killing at {} is {k}", names[x])));
        }
        let mut conductance = DMatrix::zeros(n, n);
        let mut edge_list = Vec::with_capacity(edges.len());
        for &(u, v, c) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!("edge ({u},{v}) references an unknown vertex")));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {}", names[u])));
            }
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::InvalidGraph(format!(
                    "conductance {c} on edge {}-{} must be positive",
                    names[u], names[v]
                )));
            }
            if conductance[(u, v)] != 0.0 {
                return Err(Error::InvalidGraph(format!("duplicate edge {}-{}", names[u], names[v])));
            }
            conductance[(u, v)] = c;
            conductance[(v, u)] = c;
            edge_list.push((u.min(v), u.max(v)));
        }
        edge_list.sort_unstable();
        let neighbors = (0..n)
            .map(|x| (0..n).filter(|&y| conductance[(x, y)] > 0.0).collect())
            .collect();
        let g = WeightedGraph { names, conductance, killing, edges: edge_list, neighbors };
        if require_connected && g.component_count() != 1 {
            return Err(Error::Disconnected);
        }
        if linalg::log_det_spd(&g.energy_matrix()).is_none() {
            return Err(Error::NotTransient);
        }
        Ok(g)
    }

    /// Parses the JSON graph document `{"vertices":[..],"edges":[{"u","v","c"}],"killing":{..}}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text)?;
        let index: HashMap<&str, usize> =
            file.vertices.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::InvalidGraph(format!("unknown vertex {name:?}")))
        };
        let mut edges = Vec::with_capacity(file.edges.len());
        for e in &file.edges {
            edges.push((lookup(&e.u)?, lookup(&e.v)?, e.c));
        }
        let mut killing = vec![0.0; file.vertices.len()];
        for (name, k) in &file.killing {
            killing[lookup(name)?] = *k;
        }
        Self::new(file.vertices.clone(), &edges, killing)
    }

    pub fn to_json(&self) -> String {
        let file = GraphFile {
            vertices: self.names.clone(),
            edges: self
                .edges
                .iter()
                .map(|&(u, v)| EdgeEntry {
                    u: self.names[u].clone(),
                    v: self.names[v].clone(),
                    c: self.conductance[(u, v)],
                })
                .collect(),
            killing: self
                .names
                .iter()
                .cloned()
                .zip(self.killing.iter().copied())
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("graph serializes")
    }

    /// Named instances: `single`, `t2`, `t3`, `cycle4`, `k4`, `circleN`, `pathN`; unit
    /// conductances and unit killing throughout.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "single" => Self::single(1.0),
            "t2" => Self::path(2, 1.0),
            "t3" => Self::circle(3, 1.0),
            "cycle4" => Self::circle(4, 1.0),
            "k4" => Self::complete(4, 1.0),
            _ => {
                if let Some(n) = name.strip_prefix("circle").and_then(|s| s.parse().ok()) {
                    Self::circle(n, 1.0)
                } else if let Some(n) = name.strip_prefix("path").and_then(|s| s.parse().ok()) {
                    Self::path(n, 1.0)
                } else {
                    Err(Error::InvalidArgument(format!("unknown builtin graph {name:?}")))
                }
            }
        }
    }

    pub fn single(kappa: f64) -> Result<Self> {
        Self::new(vec!["a".into()], &[], vec![kappa])
    }

    /// Discrete circle with `n >= 3` vertices, unit conductances and uniform killing.
    pub fn circle(n: usize, kappa: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument("a circle needs at least 3 vertices".into()));
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        Self::new(default_names(n), &edges, vec![kappa; n])
    }

    pub fn path(n: usize, kappa: f64) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i, 1.0)).collect();
        Self::new(default_names(n), &edges, vec![kappa; n])
    }

    pub fn complete(n: usize, kappa: f64) -> Result<Self> {
        let edges: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j, 1.0)))
            .collect();
        Self::new(default_names(n), &edges, vec![kappa; n])
    }

    /// Random connected graph: a random recursive tree plus each remaining pair with
    /// probability `extra_edge_prob`; conductances uniform in (0, 2), killing in (0.1, 1).
    pub fn random_connected(n: usize, extra_edge_prob: f64, seed: u64) -> Result<Self> {
        use rand::Rng;
        let mut rng = substream(seed, Stream::Experiment, n as u64);
        let mut edges = Vec::new();
        let mut present = vec![vec![false; n]; n];
        for v in 1..n {
            let u = rng.random_range(0..v);
            present[u][v] = true;
            edges.push((u, v, rng.random_range(1e-3..2.0)));
        }
        for u in 0..n {
            for v in u + 1..n {
                if !present[u][v] && rng.random_bool(extra_edge_prob) {
                    edges.push((u, v, rng.random_range(1e-3..2.0)));
                }
            }
        }
        let killing = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
        Self::new(default_names(n), &edges, killing)
    }

    /// Same graph with a different killing measure.
    pub fn with_killing(&self, killing: Vec<f64>) -> Result<Self> {
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|&(u, v)| (u, v, self.conductance[(u, v)]))
            .collect();
        Self::build(self.names.clone(), &edges, killing, self.component_count() == 1)
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn conductance(&self) -> &DMatrix<f64> {
        &self.conductance
    }

    pub fn c(&self, x: usize, y: usize) -> f64 {
        self.conductance[(x, y)]
    }

    pub fn killing(&self) -> &[f64] {
        &self.killing
    }

    /// Unoriented edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, x: usize) -> &[usize] {
        &self.neighbors[x]
    }

    pub fn is_edge(&self, x: usize, y: usize) -> bool {
        x < self.n() && y < self.n() && self.conductance[(x, y)] > 0.0
    }

    pub fn edge_index(&self, x: usize, y: usize) -> Option<usize> {
        self.edges.binary_search(&(x.min(y), x.max(y))).ok()
    }

    /// `λ_x = Σ_y C_{x,y} + κ_x`.
    pub fn lambda(&self) -> Vec<f64> {
        (0..self.n())
            .map(|x| self.conductance.row(x).sum() + self.killing[x])
            .collect()
    }

    /// The matrix `Λ − C` of the energy form.
    pub fn energy_matrix(&self) -> DMatrix<f64> {
        let mut m = -self.conductance.clone();
        for (x, l) in self.lambda().into_iter().enumerate() {
            m[(x, x)] += l;
        }
        m
    }

    /// Cycle rank `|E| − |X| + c` (c = number of components).
    pub fn cycle_rank(&self) -> usize {
        self.edges.len() + self.component_count() - self.n()
    }

    pub fn component_count(&self) -> usize {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut count = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            let mut queue = VecDeque::from([s]);
            seen[s] = true;
            while let Some(x) = queue.pop_front() {
                for &y in &self.neighbors[x] {
                    if !seen[y] {
                        seen[y] = true;
                        queue.push_back(y);
                    }
                }
            }
        }
        count
    }
}

fn default_names(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            if n <= 26 {
                ((b'a' + i as u8) as char).to_string()
            } else {
                format!("v{i}")
            }
        })
        .collect()
}

/// Duality measure `λ` and row-normalized transition matrix `P_{x,y} = C_{x,y}/λ_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    lambda: Vec<f64>,
    p: DMatrix<f64>,
    neighbors: Vec<Vec<usize>>,
}

pub fn build_kernel(g: &WeightedGraph) -> Kernel {
    Kernel::new(g)
}

impl Kernel {
    pub fn new(g: &WeightedGraph) -> Self {
        let lambda = g.lambda();
        let n = g.n();
        let p = DMatrix::from_fn(n, n, |x, y| g.c(x, y) / lambda[x]);
        Kernel { lambda, p, neighbors: g.neighbors.clone() }
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn neighbors(&self, x: usize) -> &[usize] {
        &self.neighbors[x]
    }

    /// Probability of being killed when jumping from `x`.
    pub fn killing_probability(&self, x: usize) -> f64 {
        (1.0 - self.p.row(x).sum()).max(0.0)
    }

    pub fn det_i_minus_p(&self) -> f64 {
        linalg::det(&(DMatrix::identity(self.n(), self.n()) - &self.p))
    }

    /// `log det(I − P)`, evaluated through the symmetric form `Λ − C`.
    pub fn log_det_i_minus_p(&self) -> f64 {
        self.eigenvalues().iter().map(|v| (1.0 - v).ln()).sum()
    }

    /// `Λ^{1/2} P Λ^{-1/2}`, symmetric and similar to `P`.
    pub fn symmetrized(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |x, y| self.p[(x, y)] * (self.lambda[x] / self.lambda[y]).sqrt())
    }

    /// Eigenvalues of `P` (real since `P` is similar to a symmetric matrix), ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.symmetrized()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Kernel with `λ` divided by `eps` (killing raised by `λ(1−ε)/ε`), so that `P ↦ εP`.
    pub fn scaled(&self, eps: f64) -> Kernel {
        Kernel {
            lambda: self.lambda.iter().map(|l| l / eps).collect(),
            p: &self.p * eps,
            neighbors: self.neighbors.clone(),
        }
    }
}

/// Symmetric Green function `G = (Λ − C)^{-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenMatrix {
    pub g: DMatrix<f64>,
}

pub fn green(g: &WeightedGraph) -> GreenMatrix {
    let chol = g
        .energy_matrix()
        .cholesky()
        .expect("transience is checked at construction");
    let inv = chol.inverse();
    // symmetrize away rounding
    let sym = (&inv + inv.transpose()) * 0.5;
    GreenMatrix { g: sym }
}

impl GreenMatrix {
    pub fn n(&self) -> usize {
        self.g.nrows()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.g[(x, y)]
    }

    pub fn det(&self) -> f64 {
        linalg::det(&self.g)
    }
}

/// `E(f,f) = ½ Σ_{x,y} C_{x,y}(f(x) − f(y))² + Σ_x κ_x f(x)²`.
pub fn energy(g: &WeightedGraph, f: &[f64]) -> f64 {
    assert_eq!(f.len(), g.n(), "function must be indexed by vertices");
    let mut grad = 0.0;
    for &(u, v) in g.edges() {
        // each unordered edge appears twice in the ordered-pair sum
        grad += g.c(u, v) * (f[u] - f[v]).powi(2);
    }
    let kill: f64 = g.killing().iter().zip(f).map(|(k, v)| k * v * v).sum();
    grad + kill
}

/// Spanning tree, cotree and one fundamental oriented cycle per cotree edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleBasis {
    pub root: usize,
    /// Tree parent of each vertex (`None` at the root).
    pub parent: Vec<Option<usize>>,
    pub depth: Vec<usize>,
    /// Tree edges oriented parent → child, in discovery order.
    pub tree: Vec<(usize, usize)>,
    /// Cotree edges oriented `u → v` with `u < v`, sorted.
    pub cotree: Vec<(usize, usize)>,
    /// Cycle `i` starts with the step `cotree[i]` and closes through the tree.
    pub cycles: Vec<Vec<usize>>,
}

/// Breadth-first spanning tree of a connected graph; `seed` picks the root and the
/// neighbor exploration order.
pub fn cycle_basis(g: &WeightedGraph, seed: u64) -> CycleBasis {
    let n = g.n();
    let mut rng = substream(seed, Stream::Spanning, 0);
    let root = if seed == 0 { 0 } else { rand::Rng::random_range(&mut rng, 0..n) };
    let mut parent = vec![None; n];
    let mut depth = vec![0; n];
    let mut seen = vec![false; n];
    let mut tree = Vec::with_capacity(n.saturating_sub(1));
    let mut queue = VecDeque::from([root]);
    seen[root] = true;
    while let Some(x) = queue.pop_front() {
        let mut nb = g.neighbors(x).to_vec();
        if seed != 0 {
            nb.shuffle(&mut rng);
        }
        for y in nb {
            if !seen[y] {
                seen[y] = true;
                parent[y] = Some(x);
                depth[y] = depth[x] + 1;
                tree.push((x, y));
                queue.push_back(y);
            }
        }
    }
    let is_tree = |u: usize, v: usize| parent[v] == Some(u) || parent[u] == Some(v);
    let cotree: Vec<(usize, usize)> =
        g.edges().iter().copied().filter(|&(u, v)| !is_tree(u, v)).collect();
    let mut basis = CycleBasis { root, parent, depth, tree, cotree, cycles: Vec::new() };
    basis.cycles = basis
        .cotree
        .iter()
        .map(|&(u, v)| {
            let mut cycle = vec![u];
            let path = basis.tree_path(v, u);
            cycle.extend_from_slice(&path[..path.len() - 1]);
            cycle
        })
        .collect();
    basis
}

impl CycleBasis {
    pub fn rank(&self) -> usize {
        self.cotree.len()
    }

    /// Vertices of the tree path from `a` to `b`, both ends included.
    pub fn tree_path(&self, a: usize, b: usize) -> Vec<usize> {
        let (mut x, mut y) = (a, b);
        let mut up = vec![];
        let mut down = vec![];
        while self.depth[x] > self.depth[y] {
            up.push(x);
            x = self.parent[x].expect("non-root has a parent");
        }
        while self.depth[y] > self.depth[x] {
            down.push(y);
            y = self.parent[y].expect("non-root has a parent");
        }
        while x != y {
            up.push(x);
            down.push(y);
            x = self.parent[x].expect("non-root has a parent");
            y = self.parent[y].expect("non-root has a parent");
        }
        up.push(x);
        up.extend(down.into_iter().rev());
        up
    }

    pub fn is_tree_edge(&self, u: usize, v: usize) -> bool {
        self.parent[v] == Some(u) || self.parent[u] == Some(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t2_kernel() {
        let g = WeightedGraph::builtin("t2").unwrap();
        let k = build_kernel(&g);
        assert_eq!(k.lambda(), &[2.0, 2.0]);
        assert_eq!(k.p()[(0, 1)], 0.5);
        assert_eq!(k.p()[(1, 0)], 0.5);
        assert_eq!(k.p()[(0, 0)], 0.0);
        assert_close!(k.det_i_minus_p(), 0.75, 1e-15);
        assert_close!(k.log_det_i_minus_p(), 0.75f64.ln(), 1e-14);
    }

    #[test]
    fn t3_kernel() {
        let k = build_kernel(&WeightedGraph::builtin("t3").unwrap());
        assert!(k.lambda().iter().all(|&l| l == 3.0));
        for x in 0..3 {
            for y in 0..3 {
                if x != y {
                    assert_close!(k.p()[(x, y)], 1.0 / 3.0, 1e-16);
                }
            }
        }
    }

    #[test]
    fn zero_killing_is_not_transient() {
        let e = WeightedGraph::new(vec!["a".into(), "b".into()], &[(0, 1, 1.0)], vec![0.0, 0.0]);
        assert!(matches!(e, Err(Error::NotTransient)));
        assert!(matches!(WeightedGraph::single(0.0), Err(Error::NotTransient)));
    }

    #[test]
    fn rejects_bad_input() {
        let names = || vec!["a".to_string(), "b".to_string(), "c".to_string()];
        assert!(matches!(
            WeightedGraph::new(names(), &[(0, 1, 1.0)], vec![1.0; 3]),
            Err(Error::Disconnected)
        ));
        assert!(WeightedGraph::new(names(), &[(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0)], vec![1.0; 3]).is_err());
        assert!(WeightedGraph::new(names(), &[(0, 0, 1.0)], vec![1.0; 3]).is_err());
        assert!(WeightedGraph::new(names(), &[(0, 1, -1.0), (1, 2, 1.0)], vec![1.0; 3]).is_err());
        assert!(WeightedGraph::new(names(), &[(0, 1, 1.0), (1, 2, 1.0)], vec![1.0, -1.0, 1.0]).is_err());
    }

    #[test]
    fn json_round_trip_and_diagnostics() {
        let text = r#"{"vertices":["a","b"],"edges":[{"u":"a","v":"b","c":1.0}],"killing":{"a":1.0,"b":1.0}}"#;
        let g = WeightedGraph::from_json(text).unwrap();
        assert_eq!(g, WeightedGraph::builtin("t2").unwrap());
        assert_eq!(WeightedGraph::from_json(&g.to_json()).unwrap(), g);
        let unknown = r#"{"vertices":["a","b"],"edges":[{"u":"a","v":"z","c":1.0}],"killing":{"a":1.0}}"#;
        assert!(matches!(WeightedGraph::from_json(unknown), Err(Error::InvalidGraph(_))));
        let dup = r#"{"vertices":["a","b"],"edges":[{"u":"a","v":"b","c":1.0},{"u":"b","v":"a","c":2.0}],"killing":{"a":1.0}}"#;
        assert!(WeightedGraph::from_json(dup).is_err());
        let broken = "{\n\"vertices\": [\"a\",\n}";
        match WeightedGraph::from_json(broken) {
            Err(Error::Parse(e)) => assert_eq!(e.line(), 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn green_examples() {
        let g = green(&WeightedGraph::builtin("t2").unwrap());
        assert_close!(g.get(0, 0), 2.0 / 3.0, 1e-15);
        assert_close!(g.get(0, 1), 1.0 / 3.0, 1e-15);
        let single = green(&WeightedGraph::single(1.0).unwrap());
        assert_close!(single.get(0, 0), 1.0, 1e-15);
        let t3 = green(&WeightedGraph::builtin("t3").unwrap());
        assert_close!(t3.get(0, 0), t3.get(1, 1), 1e-15);
        assert_close!(t3.get(1, 1), t3.get(2, 2), 1e-15);
    }

    #[test]
    fn energy_examples() {
        let g = WeightedGraph::builtin("t2").unwrap();
        assert_close!(energy(&g, &[1.0, 1.0]), 2.0, 1e-15);
        assert_close!(energy(&g, &[1.0, 0.0]), 2.0, 1e-15);
        assert_eq!(energy(&g, &[0.0, 0.0]), 0.0);
    }

    #[test]
    fn cycle_basis_examples() {
        let t3 = cycle_basis(&WeightedGraph::builtin("t3").unwrap(), 0);
        assert_eq!(t3.cycles.len(), 1);
        assert_eq!(t3.cycles[0].len(), 3);
        let tree = cycle_basis(&WeightedGraph::path(5, 1.0).unwrap(), 3);
        assert!(tree.cycles.is_empty());
        assert_eq!(tree.tree.len(), 4);
        let circle = cycle_basis(&WeightedGraph::circle(5, 1.0).unwrap(), 9);
        assert_eq!(circle.cycles.len(), 1);
        assert_eq!(circle.cycles[0].len(), 5);
    }

    #[test]
    fn fundamental_cycles_are_closed_and_use_one_cotree_edge() {
        let g = WeightedGraph::complete(5, 0.5).unwrap();
        for seed in 0..5 {
            let b = cycle_basis(&g, seed);
            assert_eq!(b.tree.len(), 4);
            assert_eq!(b.cotree.len(), 10 - 5 + 1);
            for (i, cyc) in b.cycles.iter().enumerate() {
                let steps: Vec<(usize, usize)> =
                    (0..cyc.len()).map(|s| (cyc[s], cyc[(s + 1) % cyc.len()])).collect();
                assert!(steps.iter().all(|&(x, y)| g.is_edge(x, y)));
                let cotree_steps = steps
                    .iter()
                    .filter(|&&(x, y)| !b.is_tree_edge(x, y))
                    .collect::<Vec<_>>();
                assert_eq!(cotree_steps, vec![&b.cotree[i]]);
            }
            assert_eq!(cycle_basis(&g, seed), b);
        }
    }

    #[test]
    fn scaled_kernel_multiplies_p() {
        let g = WeightedGraph::builtin("t3").unwrap();
        let k = build_kernel(&g);
        let eps = 0.1;
        let scaled_graph = g
            .with_killing(g.killing().iter().zip(k.lambda()).map(|(kap, l)| kap + l * (1.0 - eps) / eps).collect())
            .unwrap();
        let direct = build_kernel(&scaled_graph);
        let s = k.scaled(eps);
        assert!(linalg::max_abs_diff(direct.p(), s.p()) < 1e-15);
        for (a, b) in direct.lambda().iter().zip(s.lambda()) {
            assert_close!(*a, *b, 1e-12);
        }
    }
}
