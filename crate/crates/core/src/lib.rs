//! Molecular spin-valve synapse model and the actor-critic XOR benchmark
//! comparing a thresholded power-law weight update with a linear one.
//!
//! The numerical core is generic over [`num::Float`]; the aliases below fix
//! the scalar to `f64` (used by the CLI) or `f32`.

pub mod actor;
pub mod cli;
pub mod config;
pub mod critic;
pub mod device;
pub mod env;
pub mod error;
pub mod harness;
pub mod num;
pub mod output;
pub mod stats;

pub use error::{Error, Result};
pub use num::Float;

pub type SpinValveParamsF64 = device::SpinValveParams<f64>;
pub type DeviceStateF64 = device::DeviceState<f64>;
pub type PulseSpecF64 = device::PulseSpec<f64>;
pub type ActorConfigF64 = actor::ActorConfig<f64>;
pub type ActorNetworkF64 = actor::ActorNetwork<f64>;
pub type CriticConfigF64 = critic::CriticConfig<f64>;
pub type CriticNetworkF64 = critic::CriticNetwork<f64>;
pub type ExperimentConfigF64 = harness::ExperimentConfig<f64>;
pub type TrialResultF64 = harness::TrialResult<f64>;
pub type ComparisonReportF64 = harness::ComparisonReport<f64>;

pub type SpinValveParamsF32 = device::SpinValveParams<f32>;
pub type DeviceStateF32 = device::DeviceState<f32>;
pub type PulseSpecF32 = device::PulseSpec<f32>;
pub type ActorConfigF32 = actor::ActorConfig<f32>;
pub type ActorNetworkF32 = actor::ActorNetwork<f32>;
pub type CriticConfigF32 = critic::CriticConfig<f32>;
pub type CriticNetworkF32 = critic::CriticNetwork<f32>;
pub type ExperimentConfigF32 = harness::ExperimentConfig<f32>;
pub type TrialResultF32 = harness::TrialResult<f32>;
pub type ComparisonReportF32 = harness::ComparisonReport<f32>;
