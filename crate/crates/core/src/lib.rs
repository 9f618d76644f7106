//! Convex-rigid-cover numerics for pure states of N continuous variables.
//!
//! Continuous modes are discretized on midpoint-rule quadrature grids; a
//! pure state is a normalized complex coefficient tensor over the product
//! grid. For every bipartition of the modes the state induces a pair of
//! covers — conditional pure-state families with a weight density — whose
//! geometry in Hilbert-Schmidt space decides separability (a cover that
//! shrinks to a point), classifies states under local unitaries (motion
//! equivalence of covers), and yields the area-pair invariant (surface
//! measure of the cover image).
//!
//! Modules:
//! - [`grid`]: quadrature grids and weighted inner products
//! - [`state`]: coefficient tensors, Gaussian generator, overlaps
//! - [`partition`]: bipartitions and matricization
//! - [`cover`]: cover construction, distances, centroids
//! - [`separability`]: shrink-to-point criterion + Schmidt oracle
//! - [`motion`]: local unitaries, cover identity, motion equivalence
//! - [`area`]: area-pair invariant over truncated regions
//! - [`io`]: state and local-unitary file formats
//!
//! ```
//! use crcover::{enumerate_bipartitions, is_partially_separable, tol};
//! use crcover::{GaussianSpec, ModeGrid, PureState};
//!
//! // A correlated two-mode Gaussian: c ∝ exp(−½(μ1² + μ2²) + 0.8 μ1 μ2).
//! let spec = GaussianSpec::from_real(&[vec![1.0, -0.8], vec![-0.8, 1.0]]);
//! let grids = vec![
//!     ModeGrid::uniform(-5.0, 5.0, 32).unwrap(),
//!     ModeGrid::uniform(-5.0, 5.0, 32).unwrap(),
//! ];
//! let (state, _warnings) = PureState::gaussian(&spec, grids).unwrap();
//!
//! let partition = &enumerate_bipartitions(2).unwrap()[0];
//! let analysis = is_partially_separable(&state, partition, tol::SHRINK_TOL).unwrap();
//! assert!(!analysis.verdict.separable);
//! assert!(analysis.verdict.agreement); // shrink criterion matches the SVD oracle
//! ```

pub mod area;
pub mod cover;
pub mod error;
pub mod grid;
pub mod io;
pub mod motion;
pub mod partition;
pub mod separability;
pub mod state;
pub mod tol;

pub use cover::{
    build_crc_pair, build_crc_pair_default, conditional_state, distance_matrix, hs_distance,
    marginal_weight, ConvexRigidCover, CrcPair, DistanceMatrix, Side,
};
pub use error::{Error, Result};
pub use grid::{weighted_inner_product, ModeGrid};
pub use partition::{dematricize, enumerate_bipartitions, matricize, Bipartition};
pub use separability::{
    factor_state, is_fully_separable, is_partially_separable, schmidt_oracle, shrink_to_point,
    tensor_product, SeparabilityAnalysis, SeparabilityVerdict,
};
pub use state::{BuildWarning, GaussianSpec, PureState};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
