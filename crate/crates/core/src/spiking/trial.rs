//! One forward pass of a spiking network: one spike per edge, processed in
//! topological order.
//!
//! A spike sent along edge `(i, j)` arrives at `T_i + U_ij`, where `T_i` is the
//! firing time of `i` and the offset `U_ij` lies in `[-A, A]`. The plasticity
//! window of that edge is `[T_i - A, T_i + A]`, so `U_ij` is the arrival
//! relative to the window midpoint.

use serde::{Deserialize, Serialize};

use super::kernel::{next_spike_time, stdp_update, Spike, SpikeKernelParams};
use super::topology::Topology;
use crate::error::{positive, Error, Result};
use crate::perturbation::fill_uniform;
use crate::rng::RngStream;
use crate::vector::check_dims;

/// How a non-input neuron turns its incoming spikes into a firing time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FiringRule {
    /// The neuron fires once the decaying superposition has come back down to
    /// `S`: `T_j = c^{-1} ln(Σ_i w_ij e^{c(T_i + U_ij)} / S)`, provided
    /// `Σ_i w_ij e^{c U_ij} >= S`. Depends on weights and offsets only through
    /// `w e^{cU}`.
    #[default]
    Idealized,
    /// First arrival at which the jump-and-decay potential reaches `S`.
    ThresholdCrossing,
}

/// Input neuron `i` fires at `offset + scale·x_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputEncoding {
    pub offset: f64,
    pub scale: f64,
}

impl Default for InputEncoding {
    fn default() -> Self {
        Self {
            offset: 0.0,
            scale: 1.0,
        }
    }
}

pub const NO_FIRE_READOUT: f64 = 1e6;

/// `Ŷ = offset + scale·I` with `I` the output neuron's interarrival time;
/// `no_fire` when the output neuron stays silent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Readout {
    #[serde(default)]
    pub offset: f64,
    #[serde(default = "unit")]
    pub scale: f64,
    #[serde(default = "no_fire")]
    pub no_fire: f64,
}

fn unit() -> f64 {
    1.0
}

fn no_fire() -> f64 {
    NO_FIRE_READOUT
}

impl Default for Readout {
    fn default() -> Self {
        Self {
            offset: 0.0,
            scale: 1.0,
            no_fire: NO_FIRE_READOUT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrialConfig {
    pub params: SpikeKernelParams,
    pub rule: FiringRule,
    pub encoding: InputEncoding,
    pub readout: Readout,
}

/// Source of the per-edge offsets `U`.
#[derive(Debug)]
pub enum EdgeOffsets<'a> {
    Draw(&'a mut RngStream),
    Given(&'a [f64]),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    /// Offset `U` per edge.
    pub offsets: Vec<f64>,
    /// Arrival time per edge; `None` when the sender stayed silent.
    pub arrivals: Vec<Option<f64>>,
    /// Firing time per neuron.
    pub firing: Vec<Option<f64>>,
    /// `2 (T_j - mean parent firing time)` per fired non-input neuron.
    pub interarrival: Vec<Option<f64>>,
    pub readout: f64,
    pub output_fired: bool,
}

/// `n` offsets uniform on `[-A, A]`, in edge order.
pub fn draw_offsets(n: usize, half_interval: f64, rng: &mut RngStream) -> Vec<f64> {
    let mut u = vec![0.0; n];
    fill_uniform(half_interval, &mut u, rng);
    u
}

/// Simulates one trial. `inputs[s]` is the covariate of the `s`-th input
/// neuron, `None` for a silent input.
pub fn run_trial(
    topology: &Topology,
    weights: &[f64],
    inputs: &[Option<f64>],
    cfg: &TrialConfig,
    offsets: EdgeOffsets<'_>,
) -> Result<TrialRecord> {
    let params = cfg.params.validated()?;
    let edges = topology.edges();
    check_dims(edges.len(), weights.len())?;
    check_dims(topology.inputs().len(), inputs.len())?;
    for w in weights {
        positive("weight", *w)?;
    }
    let offsets = match offsets {
        EdgeOffsets::Draw(rng) => draw_offsets(edges.len(), params.half_interval, rng),
        EdgeOffsets::Given(u) => {
            check_dims(edges.len(), u.len())?;
            u.to_vec()
        }
    };

    let n = topology.neurons();
    let c = params.decay;
    let mut firing: Vec<Option<f64>> = vec![None; n];
    let mut interarrival: Vec<Option<f64>> = vec![None; n];
    let mut arrivals: Vec<Option<f64>> = vec![None; edges.len()];

    for &j in topology.order() {
        if let Some(slot) = topology.input_slot(j) {
            firing[j] = inputs[slot].map(|x| cfg.encoding.offset + cfg.encoding.scale * x);
            continue;
        }
        let live: Vec<usize> = topology
            .incoming(j)
            .iter()
            .copied()
            .filter(|&e| firing[edges[e][0]].is_some())
            .collect();
        if live.is_empty() {
            continue;
        }
        for &e in &live {
            arrivals[e] = firing[edges[e][0]].map(|t| t + offsets[e]);
        }
        let fired_at = match cfg.rule {
            FiringRule::Idealized => {
                let drive: f64 = live.iter().map(|&e| weights[e] * (c * offsets[e]).exp()).sum();
                if drive < params.threshold {
                    None
                } else {
                    // log-sum-exp around the latest arrival
                    let shift = live
                        .iter()
                        .map(|&e| arrivals[e].unwrap_or(f64::NEG_INFINITY))
                        .fold(f64::NEG_INFINITY, f64::max);
                    let sum: f64 = live
                        .iter()
                        .map(|&e| weights[e] * (c * (arrivals[e].unwrap_or(shift) - shift)).exp())
                        .sum();
                    Some(shift + (sum / params.threshold).ln() / c)
                }
            }
            FiringRule::ThresholdCrossing => {
                let mut spikes: Vec<Spike> = live
                    .iter()
                    .map(|&e| Spike::new(weights[e], arrivals[e].unwrap_or(f64::INFINITY)))
                    .collect();
                spikes.sort_by(|a, b| a.arrival.total_cmp(&b.arrival));
                next_spike_time(&spikes, params.threshold, c)
            }
        };
        if let Some(t) = fired_at {
            let reference =
                live.iter().map(|&e| firing[edges[e][0]].unwrap_or(0.0)).sum::<f64>() / live.len() as f64;
            firing[j] = Some(t);
            interarrival[j] = Some(2.0 * (t - reference));
        }
    }

    let out = topology.outputs()[0];
    let (readout, output_fired) = match interarrival[out] {
        Some(i) => (cfg.readout.offset + cfg.readout.scale * i, true),
        None => (cfg.readout.no_fire, false),
    };
    Ok(TrialRecord {
        offsets,
        arrivals,
        firing,
        interarrival,
        readout,
        output_fired,
    })
}

/// Applies the plasticity rule to every edge that carried a spike in
/// `record`, using the window `[T_i - A, T_i + A]` of its sender. Silent
/// edges keep their weight.
pub fn apply_stdp(
    topology: &Topology,
    weights: &[f64],
    record: &TrialRecord,
    params: &SpikeKernelParams,
    loss_delta: Option<f64>,
    alpha: f64,
) -> Result<Vec<f64>> {
    check_dims(topology.edges().len(), weights.len())?;
    topology
        .edges()
        .iter()
        .enumerate()
        // times relative to the presynaptic firing, so a zero offset sits
        // exactly at the window midpoint
        .map(|(e, &[i, _])| match (record.arrivals[e], record.firing[i]) {
            (Some(_), Some(_)) => stdp_update(
                weights[e],
                record.offsets[e],
                -params.half_interval,
                params.half_interval,
                params,
                loss_delta,
                alpha,
            ),
            _ => Ok(weights[e]),
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| match e {
            Error::TimingOrder => Error::InvalidParameter {
                name: "offsets",
                reason: "must lie within [-half_interval, half_interval]",
            },
            other => other,
        })
}
