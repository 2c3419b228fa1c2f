//! Adversarial rate-distortion for an arbitrarily varying remote source.
//!
//! A source `X` is observed through a two-output channel `W(y, z | x, j)`
//! whose state `J` is picked by a jammer that sees the whole source block.
//! The encoder sees `Y`, the decoder sees `Z` plus a message. This crate
//! computes the single-letter quantities that bracket the rate-distortion
//! function of that setup (`D0`, `D1`, the minimax upper bound and the
//! maximin lower bound), simulates the binned joint-typicality coding scheme
//! at small blocklengths, derandomizes it by sampling a polynomial code
//! ensemble, and provides Monte Carlo harnesses for the typicality lemmas the
//! scheme relies on.
//!
//! The crate is `no_std` and only needs `alloc`. All floating point math goes
//! through `libm`, so results are reproducible bit-for-bit across platforms.
//! Work that benefits from parallelism takes an [`Executor`]; the
//! [`Serial`] executor is always available and the `avrs` companion crate
//! provides a thread-pool backed one.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

mod error;
pub mod exec;
pub(crate) mod math;
pub(crate) mod search;
pub mod seed;

pub mod adversary;
pub mod coding;
pub mod derandomize;
pub mod game;
pub mod lemmas;
pub mod prob;
pub mod problem;
pub mod singleletter;
pub mod typeclass;

pub use error::{Error, Result};
pub use exec::{Executor, Serial};
pub use prob::{
    compose_joint, conditional_mutual_information, entropy, expected_distortion, Channel,
    CondDistribution, DistortionMatrix, Distribution, JointDistribution, Var,
};
pub use problem::{AuxiliaryPolicy, ProblemSpec};
pub use typeclass::{SymbolVector, TypeTable};

/// Tolerance used when validating probability vectors.
pub const PROB_TOL: f64 = 1e-9;
