//! Binary matrix factorization (BMF) toolkit.
//!
//! Approximates a binary matrix `A ∈ {0,1}^{n×d}` by a product `U·V` of binary
//! factors with inner dimension `k`, under a choice of matrix semiring
//! (integer, boolean or GF(2)) and entrywise loss (squared Frobenius, `L_p`,
//! `L_0`). The crate provides:
//!
//! * bit-packed binary matrices and the three semiring products ([`binmat`]),
//! * exact conditional solvers, a brute-force oracle, the `kBMF`/`kBMF+`
//!   pipeline, and bicriteria solvers for Frobenius, GF(2) and `L_p` losses
//!   ([`solvers`]),
//! * k-means machinery and weighted coreset constructions ([`clustering`]),
//! * leverage-score and `L_0` sampling sketches ([`sketch`]),
//! * synthetic dataset generators and CSV loaders ([`datagen`]),
//! * two-pass streaming and two-round distributed drivers ([`bigdata`]),
//! * a benchmark/CLI front end ([`cli`], exposed through the `bmf` binary).
//!
//! Every randomized operation takes an explicit RNG (or seed) and is
//! deterministic given it. See the `examples/` directory for one runnable
//! example per capability.

pub mod bigdata;
pub mod binmat;
pub mod cli;
pub mod clustering;
pub mod datagen;
pub mod sketch;
pub mod solvers;

mod error;
mod seed;

pub use error::{Error, Result};
pub use seed::derive_seed;
