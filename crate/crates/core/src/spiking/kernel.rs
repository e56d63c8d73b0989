//! Exponential-kernel potentials and the spike-timing plasticity rule.

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};

/// Constants of the neuron model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpikeKernelParams {
    /// Decay rate `c` of the kernel `e^{-c(t-τ)}`.
    pub decay: f64,
    /// Plasticity amplitude `C`, in `(0, 1]`.
    pub amplitude: f64,
    /// Firing threshold `S`.
    pub threshold: f64,
    /// Half-width `A` of the arrival window around its midpoint.
    pub half_interval: f64,
}

impl Default for SpikeKernelParams {
    fn default() -> Self {
        Self {
            decay: 1.0,
            amplitude: 1.0,
            threshold: 1.0,
            half_interval: 1.0,
        }
    }
}

impl SpikeKernelParams {
    pub fn validated(self) -> Result<Self> {
        positive("decay", self.decay)?;
        positive("threshold", self.threshold)?;
        positive("half_interval", self.half_interval)?;
        if !(self.amplitude > 0.0 && self.amplitude <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "amplitude",
                reason: "must lie in (0, 1]",
            });
        }
        Ok(self)
    }
}

/// A weighted spike arriving at a neuron.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spike {
    pub weight: f64,
    pub arrival: f64,
}

impl Spike {
    pub fn new(weight: f64, arrival: f64) -> Self {
        Self { weight, arrival }
    }
}

/// `Σ_i w_i e^{c(τ_i - t)} 1(t >= τ_i)`
pub fn potential(incoming: &[Spike], t: f64, decay: f64) -> f64 {
    incoming
        .iter()
        .filter(|s| t >= s.arrival)
        .map(|s| s.weight * (decay * (s.arrival - t)).exp())
        .sum()
}

/// First arrival instant at which the running potential reaches `threshold`.
///
/// Between arrivals the potential only decays, so an upward crossing can
/// only happen at an arrival. `incoming` must be sorted by arrival time.
pub fn next_spike_time(incoming: &[Spike], threshold: f64, decay: f64) -> Option<f64> {
    debug_assert!(incoming.windows(2).all(|p| p[0].arrival <= p[1].arrival));
    let mut level = 0.0;
    let mut last = f64::NEG_INFINITY;
    for s in incoming {
        if last.is_finite() {
            level *= (decay * (last - s.arrival)).exp();
        }
        level += s.weight;
        last = s.arrival;
        if level >= threshold {
            return Some(s.arrival);
        }
    }
    None
}

/// Interarrival time `T₊ - T₋ = 2 ln(Σ_i w_i e^{U_i} / S)` from the
/// threshold relation `S = Σ_i w_i e^{U_i - (T₊ - T₋)/2}`.
///
/// Depends on `(w, U)` only through the products `w_i e^{U_i}`.
pub fn interarrival_time(weights: &[f64], offsets: &[f64], threshold: f64) -> Result<f64> {
    crate::vector::check_dims(weights.len(), offsets.len())?;
    let total: f64 = weights.iter().zip(offsets).map(|(w, u)| w * u.exp()).sum();
    interarrival_from_drive(total, threshold)
}

pub(crate) fn interarrival_from_drive(total: f64, threshold: f64) -> Result<f64> {
    if total < threshold {
        return Err(Error::BelowThreshold { total, threshold });
    }
    Ok(2.0 * (total / threshold).ln())
}

/// One plasticity update for a spike arriving at `tau` between the
/// postsynaptic spikes `t_minus` and `t_plus`.
///
/// Without `loss_delta` this is the unsupervised rule
/// `w + wC(-e^{-c(τ-T₋)} + e^{-c(T₊-τ)})`. With `loss_delta = L - L̄` it is
/// the loss-modulated rule `w + α(L - L̄) wC(e^{-c(τ-T₋)} - e^{-c(T₊-τ)})`;
/// the kernel difference flips sign relative to the reward form because
/// `L = -R`.
pub fn stdp_update(
    weight: f64,
    tau: f64,
    t_minus: f64,
    t_plus: f64,
    params: &SpikeKernelParams,
    loss_delta: Option<f64>,
    alpha: f64,
) -> Result<f64> {
    positive("weight", weight)?;
    if !(t_minus <= tau && tau <= t_plus) {
        return Err(Error::TimingOrder);
    }
    let depression = (-params.decay * (tau - t_minus)).exp();
    let potentiation = (-params.decay * (t_plus - tau)).exp();
    Ok(match loss_delta {
        _ if potentiation == depression => weight,
        // grouped so that C = 1 with τ = T₋ cannot cancel to zero
        None => weight * ((1.0 - params.amplitude * depression) + params.amplitude * potentiation),
        Some(delta) => weight + alpha * delta * weight * params.amplitude * (depression - potentiation),
    })
}
