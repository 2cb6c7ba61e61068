//! Secure-key model and split-ratio optimizer for quantum key distribution
//! over passive splitter trees.
//!
//! One transmitter serves `n_users` receivers through two splitting stages:
//! a 1 x n1 split at the central office, whose branches each run `l1_km` of
//! feeder fiber, and a 1 x n2 split in the field feeding `l2_km` drops. Only
//! the field split attenuates the quantum channel; the central-office split
//! is upstream of the transmitter, so it multiplies deployed fiber instead.
//! Moving capacity between the stages therefore trades optical loss (which
//! drives the error rate through dark counts) against fiber plant.
//!
//! The crate models that trade: [`key_metrics`] prices one plan,
//! [`optimizer`] finds the best ratio, [`sweep`] walks parameter families,
//! and [`mc`] checks the closed-form error rate against a pulse-level
//! simulation.

mod entropy;
mod error;
mod link;
mod metrics;
mod params;

pub mod mc;
pub mod optimizer;
pub mod sweep;

pub use entropy::{binary_entropy, optimal_mu};
pub use error::{Error, Result};
pub use link::{fiber_transmission, link_budget, splitter_loss_equivalent_km, LinkBudget};
pub use metrics::{
    dark_count_qber, key_metrics, qber, secure_fraction, visibility_qber, KeyMetrics,
};
pub use params::{SystemParams, TopologyPlan};

pub use mc::{expected_qber_full, simulate_qber, SimConfig, SimMode, SimResult};
pub use optimizer::{
    select_discrete, solve_continuous, Candidate, ContinuousSolution, OptimizationResult, Scenario,
};
pub use sweep::{
    figure_preset, records_to_csv, run_sweep, FigurePreset, LabeledSweep, PresetOptions,
    SweepRecord, SweepSpec, SweepVariable,
};
