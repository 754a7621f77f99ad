// Validation guards are written `!(x > 0.0)` so a NaN fails closed; the
// partial_cmp form clippy suggests buries that intent.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Simulator and analytics for bandit problems with an unlimited supply of
//! arms, where rewards are costs and the best arms cost nearly nothing.
//!
//! Arm mean costs are drawn independently from a prior on a bounded interval.
//! A player who can always open another arm faces a trade-off between paying
//! the sampling price of fresh arms and settling on one that is merely cheap
//! instead of nearly free. The central strategy here plays an arm while a
//! lower confidence bound on its mean stays below a target threshold, and
//! abandons it the moment the bound climbs above. The empirical variant
//! re-derives the threshold from the spend so far, so it needs no knowledge
//! of the prior or the horizon.
//!
//! The crate has three layers:
//!
//! - model: priors over arm means ([`prior`]), reward families and dataset
//!   replay ([`reward`]), and per-arm statistics ([`arm`], [`game`]);
//! - play: decision rules ([`policy`]) and the replicated simulation driver
//!   ([`engine`]);
//! - checks: closed-form regret quantities and idealized strategies that
//!   validate the simulator from the outside ([`oracle`]).

pub mod arm;
pub mod engine;
pub mod error;
pub mod game;
pub mod oracle;
pub mod policy;
pub mod prior;
mod quad;
pub mod reward;

pub use arm::ArmState;
pub use engine::{monte_carlo, simulate_run, ArmSource, ExperimentConfig, MonteCarloSummary};
pub use error::Error;
pub use game::{Action, GameState, RunRecord};
pub use policy::{Policy, PolicySpec};
pub use prior::PriorModel;
pub use reward::{DatasetPool, Orientation, RewardModel};
