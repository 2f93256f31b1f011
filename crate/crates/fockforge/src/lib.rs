//! Compact Fock-state encoding and sparse-Hamiltonian oracles for
//! second-quantized models.

pub mod error;
pub mod fock;
pub mod cli;
pub mod enumerator;
pub mod matrix;
pub mod model;
pub mod resources;
pub mod walk;

pub use error::{Error, ParseError, ParseErrorKind, Pos, Result};
