//! Coin-flipping automata: the model, exact evolution, Monte Carlo runs and
//! the JSON format.

pub mod evolve;
pub mod io;
pub mod model;
pub mod sample;

pub use evolve::{accept_after_flips, accept_curve, accept_prob_at, evolve_distribution, evolve_vec, observe_curve};
pub use io::{automaton_from_json, automaton_to_json, machine_from_json, machine_to_json, Machine};
pub use model::{check_bias, CoinAutomaton, CoinMachine, Mode, TimeDependentAutomaton, TransferMatrix};
pub use sample::{monte_carlo, sample_run, McSummary, Outcome, RunTrace, Sampler, DEFAULT_T_MAX};
