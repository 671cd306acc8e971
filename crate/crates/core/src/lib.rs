//! Bayesian CHSH-type games played on two-qubit states: state families,
//! quantum discord, expected payoffs and the search for pure-strategy Nash
//! equilibria over the four measurement angles.

pub mod cli;
pub mod config;
pub mod discord;
pub mod equilibrium;
pub mod game;
pub mod linalg;
pub mod output;
pub mod states;

pub use discord::{discord, discord_with, DiscordOptions, DiscordResult};
pub use equilibrium::{find_nash_equilibria, find_stationary_points, CriticalPoint, EquilibriumReport, NashClass, Verdict};
pub use game::{expected_payoff, f_function, GameInstance, PayoffTensor, Player, Priors, StrategyProfile};
pub use linalg::{DensityMatrix, MeasurementAngle, Outcome, Subsystem};
pub use states::{Regime, StateFamily, StateSpec};
