//! Core numerics for studying learning with zero training error.
//!
//! The crate is `no_std` (it needs `alloc`) and contains no IO. It covers
//!
//! * [`geometry`]: the separable disk problem with two excluded sectors,
//!   polynomial feature maps and exact or sampled true error,
//! * [`perceptron`]: empirical risk minimization by the perceptron rule,
//! * [`montecarlo`]: seeded train/test trials and their quantile summaries,
//! * [`finitehyp`]: exact enumeration over finite hypothesis tables,
//! * [`docmodel`]: the density-of-classifiers model and its learning curve,
//! * [`bounds`]: closed-form generalization bounds and sample-size solvers,
//! * [`fitting`]: least-squares fitting of the two-parameter learning curve.
//!
//! File formats, plotting and the command-line front end live in the
//! `zeroloss` crate.
#![no_std]
#![warn(missing_debug_implementations)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod docmodel;
mod error;
pub mod finitehyp;
pub mod fitting;
pub mod geometry;
pub mod montecarlo;
pub mod perceptron;
pub mod quadrature;
pub mod seed;
mod sum;

pub use error::{Error, Result};
pub use sum::NeumaierSum;
