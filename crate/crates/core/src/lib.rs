//! Numerical certification of weak symmetry for compact spherical pairs.
//!
//! Every pair `(G, H)` in the catalog is realized by matrices. For a tangent
//! vector `X` in the reductive complement `q` the verifier searches for
//! `h` in `H` with `Ad(h) dθ(X) = -X`, using constructive reversers where the
//! structure theory provides one and a Gauss–Newton optimizer on `H`
//! everywhere else.

pub mod catalog;
pub mod error;
pub mod group;
pub mod harness;
pub mod hermitian;
pub mod lie;
pub mod numerics;
pub mod octonion;
mod orbit;
pub mod reversal;
pub mod rng;

pub use catalog::{
    build_hermitian_control, build_pair, d_theta, list_pairs, CatalogEntry, Family, HermitianData, InvolutionDescriptor,
    Params, SphericalPair, Status,
};
pub use error::{Error, Result};
pub use group::GroupElement;
pub use harness::{
    invariant_suite, isotropy_decomposition, sample_tangent, verify_pair, Aggregate, InvariantCheck, SampleRecord,
    VerificationReport, VerifyConfig,
};
pub use hermitian::HermitianStructure;
pub use lie::{LieAlgebraBasis, Subspace};
pub use numerics::{Matrix, C64};
pub use reversal::{Method, ReversalCertificate};
