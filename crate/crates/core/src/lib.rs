//! Link-level simulation and closed-form error analysis for molecular
//! communication over a diffusion channel with a linear array of
//! transmitter/receiver pairs.
//!
//! Four schemes are covered: spatial modulation (one active transmitter
//! plus a CSK level), space shift keying, per-link on-off keyed MIMO, and
//! single-link CSK. The numerical core is generic over [`Real`] (`f32` and
//! `f64`); the aliases below fix it to `f64`, which is what the simulation
//! engine and CLI use.

pub mod analysis;
pub mod channel;
pub mod cli;
pub mod detection;
pub mod engine;
pub mod error;
pub mod link;
pub mod modulation;
pub mod scalar;

pub use detection::{Combining, Detector, ThresholdPolicy};
pub use engine::{run_point, run_sweep, RunConfig, SerCurve, SerPoint};
pub use error::{Error, Result};
pub use link::Impairments;
pub use modulation::{Scheme, SchemeKind, Symbol};
pub use scalar::Real;

pub type SystemGeometry = channel::SystemGeometry<f64>;
pub type ChannelSnapshot = channel::ChannelSnapshot<f64>;
pub type CskAlphabet = modulation::CskAlphabet<f64>;
pub type ReceivedVector = link::ReceivedVector<f64>;
pub type ConditionalGaussian = analysis::ConditionalGaussian<f64>;
pub type SerEstimate = analysis::SerEstimate<f64>;

pub type SystemGeometryF32 = channel::SystemGeometry<f32>;
pub type ChannelSnapshotF32 = channel::ChannelSnapshot<f32>;
