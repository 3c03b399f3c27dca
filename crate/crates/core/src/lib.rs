//! Spectral representation of unary sets on a truncated bosonic Fock space, and
//! measurement-based extraction of (theorem, proof) pairs.

pub mod lexer;
pub mod unary;
pub mod poly;
pub mod fock;
pub mod measure;
pub mod prover;
pub mod cli;
