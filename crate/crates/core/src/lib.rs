//! Markov loop ensembles on finite weighted graphs.
//!
//! The crate builds the Poissonian loop ensemble of a weighted graph with killing, its
//! occupation field and edge network, and checks every simulated quantity against an exact
//! determinant, character or quadrature formula: free-field identities, Eulerian network
//! laws, Galois coverings with finite monodromy groups, random homology on the Jacobian
//! torus, holonomy class distributions and soup-induced Yang–Mills weights.

#[cfg(test)]
macro_rules! assert_close {
    ($a:expr, $b:expr, $tol:expr) => {{
        let (a, b): (f64, f64) = ($a, $b);
        assert!((a - b).abs() <= $tol, "{} vs {} (tol {:e})", a, b, $tol);
    }};
}

pub mod covering;
pub mod error;
pub mod gaussian;
pub mod graph;
pub mod group;
pub mod holonomy;
pub mod homology;
pub mod linalg;
pub mod loops;
pub mod networks;
pub mod output;
pub mod quadrature;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod yang_mills;

pub use error::{Error, Result};
pub use graph::{build_kernel, cycle_basis, energy, green, CycleBasis, GreenMatrix, Kernel, WeightedGraph};
pub use group::{FiniteGroup, Irrep, RepresentedGroup};
pub use loops::{enumerate_loops, mu_weight, reduce_loop, LoopClass, LoopMeasureTable};
pub use networks::{EvenNetwork, Network};
pub use sampler::{LoopSoupSample, OccupationField};

pub use nalgebra::DMatrix;
pub use num_complex::Complex64;
