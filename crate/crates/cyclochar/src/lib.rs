//! Graded-trace cycles, their (b,B)-characters, and index pairings.

pub mod cycles;
pub mod cyclic;
pub mod equivariant;
pub mod fredholm;
pub mod graded;
pub mod matrix;
pub mod scalar;
pub mod suite;
