use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// On-disk form: `{neurons, edges: [[i, j], ...], inputs, outputs}`, 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    pub neurons: usize,
    pub edges: Vec<[usize; 2]>,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

/// A validated feedforward network: a DAG with a fixed edge set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    spec: TopologySpec,
    order: Vec<usize>,
    incoming: Vec<Vec<usize>>,
    input_slot: Vec<Option<usize>>,
}

impl Topology {
    pub fn new(spec: TopologySpec) -> Result<Self> {
        let n = spec.neurons;
        if n == 0 {
            return Err(Error::Topology("no neurons".into()));
        }
        let in_range = |id: usize, what: &str| {
            if id < n {
                Ok(())
            } else {
                Err(Error::Topology(format!("{what} id {id} out of range 0..{n}")))
            }
        };
        let mut incoming = vec![Vec::new(); n];
        let mut outgoing = vec![Vec::new(); n];
        for (e, &[i, j]) in spec.edges.iter().enumerate() {
            in_range(i, "edge source")?;
            in_range(j, "edge target")?;
            if spec.edges[..e].contains(&[i, j]) {
                return Err(Error::Topology(format!("duplicate edge [{i}, {j}]")));
            }
            incoming[j].push(e);
            outgoing[i].push(j);
        }
        if spec.outputs.is_empty() {
            return Err(Error::Topology("at least one output neuron required".into()));
        }
        let mut input_slot = vec![None; n];
        for (slot, &id) in spec.inputs.iter().enumerate() {
            in_range(id, "input")?;
            if input_slot[id].replace(slot).is_some() {
                return Err(Error::Topology(format!("input {id} listed twice")));
            }
            if !incoming[id].is_empty() {
                return Err(Error::Topology(format!("input {id} has incoming edges")));
            }
        }
        for &id in &spec.outputs {
            in_range(id, "output")?;
        }

        // Kahn's algorithm, smallest ready id first for a stable order
        let mut indegree: Vec<usize> = incoming.iter().map(Vec::len).collect();
        let mut ready: std::collections::BTreeSet<usize> =
            (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &w in &outgoing[v] {
                indegree[w] -= 1;
                if indegree[w] == 0 {
                    ready.insert(w);
                }
            }
        }
        if order.len() != n {
            return Err(Error::Topology("edges contain a directed cycle".into()));
        }
        Ok(Self {
            spec,
            order,
            incoming,
            input_slot,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: TopologySpec =
            serde_json::from_str(text).map_err(|e| Error::Topology(e.to_string()))?;
        Self::new(spec)
    }

    pub fn spec(&self) -> &TopologySpec {
        &self.spec
    }

    pub fn neurons(&self) -> usize {
        self.spec.neurons
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.spec.edges
    }

    pub fn inputs(&self) -> &[usize] {
        &self.spec.inputs
    }

    pub fn outputs(&self) -> &[usize] {
        &self.spec.outputs
    }

    /// Neurons in topological order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Indices into [`Self::edges`] of the edges ending at `neuron`.
    pub fn incoming(&self, neuron: usize) -> &[usize] {
        &self.incoming[neuron]
    }

    /// Position of `neuron` in the input list.
    pub fn input_slot(&self, neuron: usize) -> Option<usize> {
        self.input_slot[neuron]
    }
}
