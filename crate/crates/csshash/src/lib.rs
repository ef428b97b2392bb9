//! Hashing-style distillation of multipartite CSS states at desk scale.
//!
//! The crate is organized around the binary symplectic picture of stabilizer
//! states: everything is GF(2) linear algebra. The modules build on each
//! other in this order:
//!
//! - [`gf2`] — bit-packed matrices and vectors over GF(2): rank, kernels,
//!   solving, subspace enumeration, random invertible and symplectic matrices.
//! - [`stabilizer`] — stabilizer and CSS states, Clifford action, tensor
//!   products, separability, measurement-reveal semantics.
//! - [`permcliff`] — the subgroup of local Clifford operations that permute
//!   tensor-product bases of a fixed CSS state: constraint systems, uniform
//!   sampling, verification and candidate elimination degrees.
//! - [`yieldlp`] — coset-entropy tables and the two-variable linear program
//!   that gives the asymptotic yield of the hashing protocol.
//! - [`channels`] — Pauli channels and the built-in example states/mixtures.
//! - [`simulator`] — strongly typical sets, protocol runs with planted
//!   candidates, survival statistics and drift checks.
//! - [`formats`] — the plain-text file formats used by the CLI.
//!
//! See the `examples/` directory for one runnable walkthrough per
//! capability, and the `csshash` binary for the file-driven CLI.

pub mod channels;
pub mod formats;
pub mod gf2;
pub mod permcliff;
pub mod simulator;
pub mod stabilizer;
pub mod yieldlp;
