//! Featuremetric benchmarking core.
//!
//! Everything needed to design, execute (on the built-in noisy stabilizer
//! simulator), and analyze featuremetric benchmarks of quantum computers:
//!
//! - [`circuit`]: the Clifford circuit representation and circuit features;
//! - [`design`]: feature spaces and grid / Sobol experiment designs;
//! - [`sampler`]: randomized mirror circuits and fixed-density Clifford circuits;
//! - [`sim`]: stabilizer (tableau) simulation, Pauli-frame noisy sampling,
//!   and the backend abstraction;
//! - [`estimate`]: success-probability and SR-DFE capability estimators;
//! - [`gp`] and [`monotonic`]: regular and monotonicity-constrained
//!   Gaussian-process capability models;
//! - [`analysis`]: dataset assembly, train/test evaluation, and the
//!   monotonicity metric;
//! - [`bench`]: the benchmark execution pipeline gluing the above together.
//!
//! The crate is `no_std` (with `alloc`); file formats and the command-line
//! surface live in the companion `fmb-cli` crate.

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod bench;
pub mod circuit;
pub mod clifford;
pub mod design;
pub mod estimate;
pub mod gp;
pub mod linalg;
pub mod monotonic;
pub mod oracles;
pub mod sampler;
pub mod sim;
pub mod sobol;
pub mod stream;

pub use circuit::{Circuit, ConnectivityGraph, FeatureValues, Gate, Layer};
pub use clifford::{Cliff1, Pauli1};
pub use design::{DesignPlan, FeatureAxis, FeatureSpace, Scale};
