//! Executable Turing progressions.
//!
//! * [`lang`]: a small object language with a fuel-bounded interpreter.
//! * [`proof`]: termination certificates and the base checker.
//! * [`ordinal`]: Cantor-normal-form notations below ε₀.
//! * [`tower`]: verifier descriptors, diagonal programs, strengthening and search.
//! * [`belief`]: belief bases closed under modus ponens and the verifier axioms.
//! * [`cli`]: the `omega-tower` command line.

pub mod belief;
pub mod cli;
pub mod corpus;
pub mod generate;
pub mod lang;
pub mod ordinal;
pub mod proof;
pub mod sexp;
pub mod tower;
