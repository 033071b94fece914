//! Spin-qubit coherence anisotropy from charge noise and evanescent-wave
//! Johnson noise, for a single electron in a gate-defined quantum dot with a
//! micromagnet gradient.

pub mod census;
pub mod coherence;
pub mod commands;
pub mod device;
pub mod error;
pub mod geometry;
pub mod map;
pub mod noise;
pub mod reproduce;
pub mod scenarios;
pub mod units;

pub use device::{case_study, DeviceParams, GradientMatrix};
pub use error::{Error, Result};
pub use geometry::{longitudinal_weight, transverse_weight, FieldDirection, WeightKind, WeightMatrix};
pub use noise::{CorrelationTensor, FieldKind, Lorentzian, ModelSpec, NoiseModel, SpectralShape};
