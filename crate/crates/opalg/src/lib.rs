//! opalg: a numerical laboratory for projections on finite-dimensional
//! operator algebras.
//!
//! The crate represents operator subspaces and subalgebras of `M_n` by
//! explicit bases, estimates completely bounded norms from below by seeded
//! nonconvex search, proves cb-norm upper bounds by compositional
//! factorization certificates, and classifies idempotent maps (contractive,
//! bicontractive, symmetric, hermitian) together with the structural facts
//! that hold for each class. A built-in gallery constructs the concrete
//! algebras and projections the library is designed to probe, each bundled
//! with machine-checkable certificates and expected assertions.
//!
//! Entry points:
//! * [`mat::CMat`] — dense complex matrices, the universal carrier.
//! * [`space::OpSpace`] — operator subspaces of `M_n` given by bases.
//! * [`map::OpMap`] — linear maps between operator spaces.
//! * [`norms::norm_lower`] — lower bounds on amplified norms.
//! * [`cert::Certificate`] — sound upper bounds by factorization.
//! * [`projlab::classify_projection`] — the projection laboratory.
//! * [`gallery::build_example`] — named example bundles.

pub mod cert;
pub mod cp;
pub mod error;
pub mod gallery;
pub mod map;
pub mod mat;
pub mod norms;
pub mod projlab;
pub mod space;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use mat::{CMat, Tolerances};
pub use space::{OpSpace, StructureFlags};
