//! Exact symbolic engine for graded homological computations.
//!
//! The crate is organized as a small tower of layers, each usable on its own:
//!
//! * [`linalg`] — arbitrary-precision rational scalars and sparse exact
//!   linear algebra (rank, kernel, cokernel, solving) via fraction-free
//!   elimination. Every dimension reported anywhere in this crate comes out
//!   of this module, so everything is exact: there are no tolerances.
//! * [`superpoly`] — free supercommutative polynomial algebras with
//!   multi-gradings (parity, cohomological bidegree, inner degree),
//!   derivations, substitutions, and an expression parser.
//! * [`koszul`] — Koszul complexes of graded sequences, minimal generating
//!   sets with block-triangular transformation matrices, and reduction of a
//!   Koszul complex to a minimal one by an exact graded coordinate change.
//! * [`weyl`] — normal-ordered algebras of differential operators on super
//!   polynomial rings, their dg structure `[∂, ·]`, the fat-point quotient
//!   computation, and the degenerate spectral complex of a Koszul algebra.
//! * [`vertex`] — a free-field vertex algebra engine: Fock states in modes
//!   of conjugate generator pairs, mode actions, n-th products by normally
//!   ordered reconstruction, translation, and tri-graded basis enumeration.
//! * [`chiral`] — the chiral structures living on top of the vertex engine:
//!   the two anticommuting differentials on a chiral Koszul complex, the
//!   superconformal homotopy operators, tri-graded cohomology tables,
//!   coordinate-change lifts, singular vectors, and character checks.
//!
//! All values are immutable after construction and all operations are pure
//! functions, so concurrent use on distinct inputs is safe.

pub mod chiral;
pub mod koszul;
pub mod linalg;
pub mod superpoly;
pub mod vertex;
pub mod weyl;

pub use linalg::{Q, SparseMatrix};
pub use superpoly::{Parity, RingSpec, SuperPolynomial, VariableSpec};
