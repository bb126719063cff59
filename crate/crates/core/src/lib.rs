//! Spiking neural network controllers evolved to imitate the proportional,
//! derivative and integral parts of a PID loop on a one-axis blimp model.
//!
//! The pipeline: [`dataset`] records PID error/command traces on a
//! double-integrator [`plant`], [`genome`] maps a flat vector onto a
//! [`network::SnnController`], [`objective`] scores its output against the
//! recorded commands, and [`trainer`] drives [`cmaes`] over that score.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cmaes;
pub mod dataset;
pub mod error;
pub mod genome;
pub mod io;
pub mod metrics;
pub mod network;
pub mod neuron;
pub mod objective;
pub mod plant;
pub mod trainer;

pub use cmaes::{Bounds, Cmaes};
pub use dataset::{derive_seed, Dataset, DatasetConfig, StepSchedule};
pub use error::{Error, Result};
pub use genome::{Genome, GenomeLayout, Role};
pub use metrics::{step_metrics, EvalReport, StepResponseMetrics};
pub use network::{
    ControllerKind, ControllerParams, HiddenVariant, SnnController, ThresholdWiring,
};
pub use neuron::{LifParams, NeuronLayerState};
pub use objective::{cost, CostBreakdown};
pub use plant::{
    closed_loop_run, ActuatorModel, BiasSchedule, ClosedLoopConfig, ClosedLoopTrace, CommandSource,
    PidController, PidGains, SummedController,
};
pub use trainer::{TrainConfig, TrainOutcome, Trainer};
