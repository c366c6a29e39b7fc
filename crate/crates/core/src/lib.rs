//! Exact first-order statistics for finite relational structures.
//!
//! The crate computes Stone pairings (the probability that a random
//! assignment satisfies a formula), Gaifman-locality diagnostics, ball-cover
//! decompositions of graphs, basic interpretation schemes with their formula
//! rewriting, and recursive skeleton decompositions of rooted trees.

pub mod analysis;
pub mod error;
pub mod eval;
pub mod forest;
pub mod fraction;
pub mod generators;
pub mod interpret;
pub mod structure;
pub mod syntax;

pub use error::{Error, Result};
pub use eval::{stone_pairing, Evaluator, EvalOptions, Pairing};
pub use fraction::Fraction;
pub use structure::{Signature, Structure, Vertex, VertexSet};
pub use syntax::{parse, Formula};
