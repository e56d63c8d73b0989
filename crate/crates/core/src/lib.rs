//! Spike-timing-dependent plasticity read as a zero-order optimizer.
//!
//! The plasticity rule `θ ← θ + α(L(θ + U) - L̄)(e^{-U} - e^{U})` with
//! uniform spike-timing noise `U` is, in expectation, a smoothed gradient
//! step. This crate provides the update rules and baselines, the timing-noise
//! distributions, a small spiking-network simulator, and Monte Carlo and
//! quadrature checks of the expectation identities.

pub mod error;
pub mod losses;
pub mod optimizers;
pub mod perturbation;
pub mod quadrature;
pub mod rng;
pub mod schedule;
pub mod spiking;
pub mod vector;
pub mod verification;

pub use error::{Error, Result};
pub use losses::{LossFunction, SupervisedSample};
pub use rng::RngStream;
pub use schedule::LearningRateSchedule;
pub use vector::RealVector;
