//! Synthesis of stochastic finite-state controllers (sFSCs) for labeled POMDPs
//! under LTL objectives given as deterministic Rabin automata.
//!
//! The crate is `no_std` (with `alloc`). Everything here is pure computation:
//!
//! * [`model`]: labeled POMDPs and Bayesian belief updates.
//! * [`rabin`]: Rabin automata, lasso acceptance and the builtin case-study automata.
//! * [`product`]: POMDP x automaton products, sink-modified transitions and LTL rewards.
//! * [`controller`]: partitioned sFSCs and discounted value vectors.
//! * [`chain`]: global chains, class decomposition, limiting matrices and the Poisson equation.
//! * [`optimize`]: a dense simplex LP solver and McCormick relaxation of bilinear programs.
//! * [`bpi`]: bounded policy iteration under the conservative safety criterion.
//! * [`gridworld`]: the robot-navigation benchmark model.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bpi;
pub mod chain;
pub mod controller;
mod error;
pub mod gridworld;
pub mod linalg;
pub mod model;
pub mod optimize;
#[cfg(any(test, feature = "oracles"))]
pub mod oracles;
pub mod product;
pub mod rabin;

pub use error::Error;

/// Tolerance for row-stochasticity of model inputs.
pub const STOCHASTIC_TOL: f64 = 1e-12;
