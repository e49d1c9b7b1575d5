//! Exact integral lattices and the lattice-theoretic side of the question
//! which cubic fourfolds have a transcendental lattice that does not come
//! from a K3 surface.
//!
//! * [`lattice`]: Gram matrices, signature, determinant, discriminant groups.
//! * [`discform`]: finite quadratic forms, Gauss sums, isometry searches.
//! * [`embeddings`]: overlattices, complements, primitivity.
//! * [`nikulin`]: 2-elementary existence, K3 embedding verdicts, `kappa`.
//! * [`definite`]: short vectors and small isometry tests.
//! * [`catalog`]: named lattices and the `3*D4 + 2*U` expression language.

pub mod catalog;
pub mod definite;
pub mod discform;
pub mod embeddings;
pub mod error;
pub mod intmat;
pub mod lattice;
pub mod nikulin;

pub use catalog::{build, named, parse, LatticeExpr};
pub use discform::{discriminant_form, FiniteQuadraticForm, GroupElement};
pub use error::{Error, Result};
pub use intmat::{IntMatrix, SnfResult};
pub use lattice::{FiniteAbelianGroup, IntegerLattice, Signature};
pub use nikulin::{classify, ClassificationReport, TwoElemInvariants, Verdict};
