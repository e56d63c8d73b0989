use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spikezo::spiking::{
    apply_stdp, draw_offsets, run_trial, EdgeOffsets, FiringRule, InputEncoding, Readout,
    SpikeKernelParams, Topology, TopologySpec, TrialConfig, TrialRecord,
};
use spikezo::{Error, RngStream};

use crate::config::{invalid, load};
use crate::{CliError, CommonArgs};

const DEFAULT_OUT: &str = "spike_demo.csv";
pub const SPIKE_HEADER: [&str; 4] = ["trial", "edge_or_neuron", "kind", "value"];

/// A topology file path (relative to the config file) or an inline spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TopologySource {
    Path(PathBuf),
    Inline(TopologySpec),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OffsetSpec {
    /// Uniform on `[-A, A]`, one substream per trial.
    #[default]
    Draw,
    Zero,
    /// The same offsets every trial.
    Given { values: Vec<f64> },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Plasticity {
    #[default]
    None,
    /// The timing-only rule after every trial.
    Unsupervised,
    /// The loss-modulated rule with squared error `(Ŷ - target)²` and the
    /// previous trial's loss as baseline (zero delta on the first trial).
    /// `loss_delta` pins the delta instead; `hebbian` adds the timing-only
    /// change on top.
    LossModulated {
        alpha: f64,
        target: f64,
        #[serde(default)]
        loss_delta: Option<f64>,
        #[serde(default)]
        hebbian: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpikeDemoConfig {
    pub topology: TopologySource,
    pub weights: Vec<f64>,
    /// One row per trial, one entry per input neuron; `null` is a silent input.
    pub inputs: Vec<Vec<Option<f64>>>,
    #[serde(default)]
    pub params: SpikeKernelParams,
    #[serde(default)]
    pub rule: FiringRule,
    #[serde(default)]
    pub encoding: InputEncoding,
    #[serde(default)]
    pub readout: Readout,
    #[serde(default)]
    pub offsets: OffsetSpec,
    /// Per-edge `λ`: runs with `(λw, U - ln(λ)/c)` in place of `(w, U)`.
    #[serde(default)]
    pub rescale: Option<Vec<f64>>,
    #[serde(default)]
    pub plasticity: Plasticity,
    #[serde(default)]
    pub seed: u64,
}

/// Three inputs, two hidden neurons, one output.
pub fn demo_topology() -> TopologySpec {
    TopologySpec {
        neurons: 6,
        edges: vec![[0, 3], [1, 3], [1, 4], [2, 4], [3, 5], [4, 5]],
        inputs: vec![0, 1, 2],
        outputs: vec![5],
    }
}

impl SpikeDemoConfig {
    pub fn pinned() -> Self {
        Self {
            topology: TopologySource::Inline(demo_topology()),
            weights: vec![1.5; 6],
            inputs: vec![
                vec![Some(0.0), Some(0.2), Some(0.4)],
                vec![Some(0.5), Some(0.1), Some(0.0)],
                vec![Some(0.3), None, Some(0.3)],
                vec![Some(0.0), Some(0.0), Some(0.0)],
            ],
            params: SpikeKernelParams {
                amplitude: 0.5,
                ..SpikeKernelParams::default()
            },
            rule: FiringRule::Idealized,
            encoding: InputEncoding::default(),
            readout: Readout::default(),
            offsets: OffsetSpec::Draw,
            rescale: None,
            plasticity: Plasticity::Unsupervised,
            seed: 0,
        }
    }

    fn topology(&self, base: Option<&Path>) -> Result<Topology, CliError> {
        let spec = match &self.topology {
            TopologySource::Inline(spec) => spec.clone(),
            TopologySource::Path(p) => {
                let path = match base {
                    Some(dir) if p.is_relative() => dir.join(p),
                    _ => p.clone(),
                };
                load::<TopologySpec>(&path)?
            }
        };
        Topology::new(spec).map_err(|e| invalid("topology", e))
    }

    pub fn validate(&self, topology: &Topology) -> Result<(), CliError> {
        let edges = topology.edges().len();
        let params = self.params.validated().map_err(|e| invalid("params", e))?;
        let dims = |what: &str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(invalid(what, Error::DimensionMismatch { left: want, right: got }))
            }
        };
        dims("weights", self.weights.len(), edges)?;
        for w in &self.weights {
            spikezo::error::positive("weight", *w).map_err(|e| invalid("weights", e))?;
        }
        if self.inputs.is_empty() {
            return Err(CliError::Config("inputs: at least one trial required".into()));
        }
        for (k, row) in self.inputs.iter().enumerate() {
            dims(&format!("inputs[{k}]"), row.len(), topology.inputs().len())?;
            if row.iter().flatten().any(|x| !x.is_finite()) {
                return Err(invalid(format!("inputs[{k}]"), Error::NonFinite { index: k }));
            }
        }
        if let OffsetSpec::Given { values } = &self.offsets {
            dims("offsets", values.len(), edges)?;
            if values.iter().any(|u| u.is_nan() || u.abs() > params.half_interval) {
                return Err(CliError::Config(
                    "offsets: values must lie within [-half_interval, half_interval]".into(),
                ));
            }
        }
        if let Some(lambda) = &self.rescale {
            dims("rescale", lambda.len(), edges)?;
            for l in lambda {
                spikezo::error::positive("lambda", *l).map_err(|e| invalid("rescale", e))?;
            }
            if self.plasticity != Plasticity::None {
                return Err(CliError::Config(
                    "rescale: only supported with plasticity rule \"none\"".into(),
                ));
            }
        }
        if let Plasticity::LossModulated {
            alpha,
            target,
            loss_delta,
            ..
        } = &self.plasticity
        {
            spikezo::error::nonnegative("alpha", *alpha).map_err(|e| invalid("plasticity", e))?;
            if !target.is_finite() || loss_delta.is_some_and(|d| !d.is_finite()) {
                return Err(invalid("plasticity", Error::NonFinite { index: 0 }));
            }
        }
        Ok(())
    }
}

fn write_trial(
    writer: &mut csv::Writer<File>,
    trial: usize,
    record: &TrialRecord,
    topology: &Topology,
    weights: &[f64],
    loss: Option<f64>,
) -> Result<(), CliError> {
    let mut row = |who: String, kind: &str, value: f64| {
        writer.write_record(&[trial.to_string(), who, kind.to_string(), value.to_string()])
    };
    for (j, t) in record.firing.iter().enumerate() {
        if let Some(t) = t {
            row(format!("n{j}"), "firing", *t)?;
        }
        if let Some(i) = record.interarrival[j] {
            row(format!("n{j}"), "interarrival", i)?;
        }
    }
    for (e, w) in weights.iter().enumerate() {
        row(format!("e{e}"), "offset", record.offsets[e])?;
        if let Some(a) = record.arrivals[e] {
            row(format!("e{e}"), "arrival", a)?;
        }
        row(format!("e{e}"), "weight", *w)?;
    }
    let out = format!("n{}", topology.outputs()[0]);
    row(out.clone(), "readout", record.readout)?;
    if let Some(l) = loss {
        row(out, "loss", l)?;
    }
    Ok(())
}

pub fn run(args: &CommonArgs) -> Result<(), CliError> {
    let (mut config, base) = match &args.config {
        Some(path) => (load::<SpikeDemoConfig>(path)?, path.parent().map(Path::to_path_buf)),
        None => (SpikeDemoConfig::pinned(), None),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let topology = config.topology(base.as_deref())?;
    config.validate(&topology)?;
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));

    let trial_cfg = TrialConfig {
        params: config.params,
        rule: config.rule,
        encoding: config.encoding,
        readout: config.readout,
    };
    let edges = topology.edges().len();
    let a = config.params.half_interval;
    let mut writer = csv::Writer::from_path(&out)?;
    writer.write_record(SPIKE_HEADER)?;
    let mut weights = config.weights.clone();
    let mut previous_loss: Option<f64> = None;

    for (k, inputs) in config.inputs.iter().enumerate() {
        let mut offsets = match &config.offsets {
            OffsetSpec::Draw => draw_offsets(edges, a, &mut RngStream::new(config.seed, k as u64)),
            OffsetSpec::Zero => vec![0.0; edges],
            OffsetSpec::Given { values } => values.clone(),
        };
        let mut effective = weights.clone();
        if let Some(lambda) = &config.rescale {
            for ((w, u), l) in effective.iter_mut().zip(&mut offsets).zip(lambda) {
                *w *= l;
                *u -= l.ln() / config.params.decay;
            }
        }
        let fail = |e: Error| CliError::Runtime(format!("trial {k}: {e}"));
        let record = run_trial(&topology, &effective, inputs, &trial_cfg, EdgeOffsets::Given(&offsets))
            .map_err(fail)?;

        let mut loss = None;
        weights = match &config.plasticity {
            Plasticity::None => weights,
            Plasticity::Unsupervised => {
                apply_stdp(&topology, &weights, &record, &config.params, None, 0.0).map_err(fail)?
            }
            Plasticity::LossModulated {
                alpha,
                target,
                loss_delta,
                hebbian,
            } => {
                let l = (record.readout - target).powi(2);
                let delta = loss_delta.unwrap_or(l - previous_loss.unwrap_or(l));
                previous_loss = Some(l);
                loss = Some(l);
                let mut next = apply_stdp(&topology, &weights, &record, &config.params, Some(delta), *alpha)
                    .map_err(fail)?;
                if *hebbian {
                    let timing = apply_stdp(&topology, &weights, &record, &config.params, None, 0.0)
                        .map_err(fail)?;
                    for ((n, t), w) in next.iter_mut().zip(&timing).zip(&weights) {
                        *n += t - w;
                    }
                }
                next
            }
        };
        write_trial(&mut writer, k, &record, &topology, &weights, loss)?;
    }
    writer.flush()?;
    Ok(())
}
