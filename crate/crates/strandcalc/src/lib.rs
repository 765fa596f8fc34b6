//! Exact stranded-graph calculus for rank-5 tensor models with an irreducible
//! O(N) propagator and a sextic simplex interaction.

pub mod amplitude;
pub mod boundary;
pub mod diagrams;
pub mod exactpoly;
pub mod maps;
pub mod melonic;
pub mod projectors;
pub mod stranded;
pub mod verify;
