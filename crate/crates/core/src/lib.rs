//! Flag-qubit repetition-code memory experiments: circuits, noise, sampling and decoding.

pub mod analysis;
pub mod bits;
pub mod blossom;
pub mod chain;
pub mod circuit;
pub mod decoder;
pub mod error;
pub mod experiment;
pub mod frame;
pub mod graph;
pub mod layout;
pub mod noise;
pub mod pauli;
pub mod syndrome;

pub use error::{Error, Result};
