//! Discrete spectral geometry toolkit.
//!
//! The crate measures the quantities that appear in the two-sided relation
//! between the first Laplace eigenvalue and the Cheeger isoperimetric
//! constant, `λ₁ ≥ h²/4` and `λ₁ ≤ C(n)(√K·h + h²)`, on triangle meshes and
//! weighted graphs:
//!
//! * [`riccati`]: closed-form and RK4 solutions of the Riccati comparison
//!   equation that bounds the mean curvature of level sets of a signed
//!   distance function, together with the envelopes derived from it.
//! * [`manifold`]: the discrete spaces themselves (intrinsic triangle meshes,
//!   weighted graphs), their measures, Laplacians, geodesic distances, balls
//!   and model-geometry generators.
//! * [`spectral`]: the first nonzero eigenvalue (dense and shift-invert
//!   Lanczos paths) and Rayleigh quotients.
//! * [`cheeger`]: exact and sweep Cheeger constants, the local isoperimetric
//!   ratio, tilde-set decomposition, r-separated covers and the test
//!   function used to bound `λ₁` from above.
//! * [`tube`]: signed distance fields, tubes, level-set volume profiles and
//!   the boundary-ratio bound for manifolds with boundary.
//! * [`harness`]: configuration, experiment orchestration and reports.

// `!(x > 0.0)` deliberately rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cheeger;
pub mod error;
pub mod harness;
pub mod manifold;
pub mod riccati;
pub mod spectral;
pub mod tube;

pub use error::{Error, Result};
pub use manifold::{Domain, Partition, PartitionMeasures, RegionMeasures, Side, SurfaceMesh, UnitKind, WeightedGraph};
pub use riccati::{ComparisonParams, RhoSide};
pub use spectral::SpectralResult;
