//! Davenport-Schinzel sequence laboratory.
//!
//! Sequences and blocked sequences, the order-4 and order-5 lower-bound
//! constructions, derivation trees with their feather anatomy, closed-form
//! upper bounds, exhaustive search for small extremal values, and lower
//! envelopes of segments.

pub mod ackermann;
pub mod bounds;
pub mod cli;
pub mod constructions;
pub mod envelope;
pub mod error;
pub mod oracle;
pub mod random;
pub mod selftest;
pub mod sequence;
pub mod tree;

pub use error::{Error, Result};
pub use sequence::{BlockedSequence, Sequence, Sym};
