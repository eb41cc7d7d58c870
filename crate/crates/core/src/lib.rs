//! Exact and Monte Carlo analysis of coin-flipping automata.
//!
//! A coin automaton is a pair of quantum channels (tails, heads) acting on an
//! `S`-dimensional state space with an absorbing accept state. Feeding it a
//! coin with bias `p` gives the channel `p·E1 + (1-p)·E0`; this crate computes
//! finite-horizon and limiting acceptance probabilities of such machines, fits
//! the limiting acceptance as a rational function of `p`, isolates the biases
//! where it crosses the 2/5 and 3/5 thresholds, and builds the "counting
//! advice" that lets a rounded dyadic bias stand in for an arbitrary real one.

pub mod advice;
pub mod automaton;
pub mod constructions;
pub mod error;
pub mod fixed_point;
pub mod linalg;
pub mod ratio;
pub mod rational;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Exact, Mp, Scalar};
