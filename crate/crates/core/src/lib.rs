//! Convex analysis in finite-dimensional normed spaces with smooth,
//! strictly convex norms.
//!
//! The crate provides:
//!
//! - norm oracles (Euclidean, weighted p, ellipsoidal, custom callbacks)
//!   with analytic or finite-difference gradients;
//! - the Legendre transform `L(x) = rho(x) * d(rho)_x`, the dual norm it
//!   induces, and its inverse;
//! - Birkhoff orthogonality tests between vectors and against hyperplanes;
//! - convex bodies (polytopes, norm balls, parallel bodies) with
//!   support/argmax oracles and normal cones;
//! - metric projection onto convex bodies by conditional gradient with a
//!   duality-gap certificate, distance functions and their gradients;
//! - one-sided directional derivatives, subgradient certificates and
//!   constructions, cyclic monotonicity checks, and potentials
//!   reconstructed from monotone data;
//! - seeded verification suites behind [`verify`].
//!
//! Everything is deterministic: sampling flows from explicit seeds through
//! a counter-based generator, so identical inputs give identical outputs.

pub mod birkhoff;
pub mod bodies;
pub mod geom;
pub mod legendre;
pub mod norms;
pub mod numeric;
pub mod projection;
pub mod sampling;
pub mod subdifferential;
pub mod verify;

pub use geom::{canonical_embed, Bidual, Functional, Hyperplane, Tolerances, Vector};
pub use norms::Norm;

/// Errors reported by the oracles in this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("norm gradient is undefined at the origin")]
    SingularPoint,

    #[error("Birkhoff orthogonality is undefined for a zero left argument")]
    UndefinedRelation,

    #[error("failed to certify within {iterations} iterations (best bound {best:.3e})")]
    NonConvergence { best: f64, iterations: usize },

    #[error("degenerate body: {0}")]
    DegenerateBody(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point is not on the boundary of the body")]
    NotOnBoundary,

    #[error("not differentiable at this point; use subgradient_member or subgradient_construct")]
    NotDifferentiable,

    #[error("distance gradient is undefined on the boundary band (|d| <= {band:.3e})")]
    BoundaryBand { band: f64 },

    #[error("direction is not in the normal cone at the given boundary point")]
    NotInNormalCone,

    #[error("pairs are not cyclically monotone: cycle {cycle:?} has weight {weight:.6e}")]
    NotCyclicallyMonotone { cycle: Vec<usize>, weight: f64 },

    #[error("subgradient construction failed verification: {0}")]
    ConstructionFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
