//! Concrete polar spaces of type D_n over GF(2) and the graphs built on them.
//!
//! The crate realises the hyperbolic quadric `x1 x2 + x3 x4 + ... + x(2n-1) x(2n)`
//! as an explicit point set, enumerates its singular subspaces, and builds the
//! dual polar graph, the two half-spin Grassmann graphs, frames and apartments.
//! On top of that it searches for (isometric) embeddings of hypercube and
//! half-cube graphs and checks the structural statements about them:
//! the star/special-subspace clique dichotomy, the extension of type (A)
//! embeddings to hypercube embeddings, frame recovery and apartment recognition.
//!
//! Everything is deterministic: enumeration orders are canonical and every
//! random choice flows from an explicit 64-bit seed.

pub mod error;
pub mod apartments;
pub mod graphcore;
pub mod grassmann;
pub mod quadric;
pub mod embeddings;
pub mod report;
pub mod suites;

pub use error::{Error, Result};
