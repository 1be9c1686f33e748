//! Comparison-type optimal-value functions on sampled domains.
//!
//! For `f, g: R^d -> R` the sup-envelope `s -> sup { f(x) : g(x) <= s }` and
//! the inf-envelope `s -> inf { f(x) : s <= g(x) }` are computed exactly on a
//! finite lattice, and their monotonicity, positive definiteness,
//! semicontinuity and growth properties are checked with witnesses.

pub mod certify;
pub mod envelope;
pub mod extreal;
pub mod funcspec;
pub mod grid;
pub mod oracle;

pub use envelope::{Envelope, EnvelopeKind, EnvelopeTable, Optimum};
pub use extreal::ExtReal;
pub use funcspec::{builtin, FuncExpr};
pub use grid::{LevelSet, SampleGrid};
