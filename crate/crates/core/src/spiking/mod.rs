//! Feedforward spiking-network simulator with exponential postsynaptic
//! kernels, threshold firing and spike-timing-dependent plasticity.

mod kernel;
mod topology;
mod trial;

pub use kernel::{interarrival_time, next_spike_time, potential, stdp_update, Spike, SpikeKernelParams};
pub use topology::{Topology, TopologySpec};
pub use trial::{
    apply_stdp, draw_offsets, run_trial, EdgeOffsets, FiringRule, InputEncoding, Readout,
    TrialConfig, TrialRecord, NO_FIRE_READOUT,
};
