//! Feed-forward compositional pattern producing network.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::GenotypeError;

pub const INPUTS: usize = 3;
pub const OUTPUTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationKind {
    Sinusoid,
    Absolute,
    Negative,
    Square,
    SqrtAbs,
    Sigmoid,
    Identity,
}

impl ActivationKind {
    /// Functions available to hidden nodes.
    pub const HIDDEN: [ActivationKind; 5] = [
        ActivationKind::Sinusoid,
        ActivationKind::Absolute,
        ActivationKind::Negative,
        ActivationKind::Square,
        ActivationKind::SqrtAbs,
    ];

    pub fn apply(self, x: f64) -> f64 {
        match self {
            ActivationKind::Sinusoid => x.sin(),
            ActivationKind::Absolute => x.abs(),
            ActivationKind::Negative => -x,
            ActivationKind::Square => x * x,
            ActivationKind::SqrtAbs => x.abs().sqrt(),
            ActivationKind::Sigmoid => sigmoid(x),
            ActivationKind::Identity => x,
        }
    }
}

/// Logistic function, kept strictly inside (0, 1) even where f64 would
/// round to an endpoint. A NaN pre-activation maps to 0.5.
pub fn sigmoid(x: f64) -> f64 {
    if x.is_nan() {
        return 0.5;
    }
    (1.0 / (1.0 + (-x).exp())).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    Input,
    Hidden,
    Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: u32,
    pub role: NodeRole,
    pub activation: ActivationKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: u32,
    pub target: u32,
    pub weight: f64,
}

#[derive(Serialize, Deserialize)]
struct RawCppn {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

/// Validated acyclic network. Nodes `0..3` are inputs (station, similarity,
/// bias) and the next three are the chord, twist and bend outputs, but the
/// roles are read from the node list rather than assumed from ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCppn", into = "RawCppn")]
pub struct Cppn {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    // evaluation order over node indices, derived
    order: Vec<usize>,
}

impl From<Cppn> for RawCppn {
    fn from(c: Cppn) -> Self {
        RawCppn { nodes: c.nodes, edges: c.edges }
    }
}

impl TryFrom<RawCppn> for Cppn {
    type Error = GenotypeError;
    fn try_from(raw: RawCppn) -> Result<Self, Self::Error> {
        Cppn::new(raw.nodes, raw.edges)
    }
}

impl Cppn {
    pub fn new(nodes: Vec<Node>, edges: Vec<Edge>) -> Result<Self, GenotypeError> {
        let index = index_of(&nodes)?;
        let count = |role| nodes.iter().filter(|n| n.role == role).count();
        if count(NodeRole::Input) != INPUTS || count(NodeRole::Output) != OUTPUTS {
            return Err(GenotypeError::Invalid(format!(
                "network needs {INPUTS} inputs and {OUTPUTS} outputs"
            )));
        }
        for n in &nodes {
            let ok = match n.role {
                NodeRole::Input => n.activation == ActivationKind::Identity,
                NodeRole::Output => n.activation == ActivationKind::Sigmoid,
                NodeRole::Hidden => ActivationKind::HIDDEN.contains(&n.activation),
            };
            if !ok {
                return Err(GenotypeError::Invalid(format!(
                    "node {} has activation {:?} not allowed for role {:?}",
                    n.id, n.activation, n.role
                )));
            }
        }
        for e in &edges {
            let (Some(&s), Some(&t)) = (index.get(&e.source), index.get(&e.target)) else {
                return Err(GenotypeError::Invalid(format!(
                    "edge {}->{} references a missing node",
                    e.source, e.target
                )));
            };
            if nodes[t].role == NodeRole::Input || nodes[s].role == NodeRole::Output {
                return Err(GenotypeError::Invalid(format!(
                    "edge {}->{} enters an input or leaves an output",
                    e.source, e.target
                )));
            }
            if !e.weight.is_finite() {
                return Err(GenotypeError::Invalid(format!("edge {}->{} has non-finite weight", e.source, e.target)));
            }
        }
        let order = topological_order(&nodes, &edges, &index)
            .ok_or_else(|| GenotypeError::Invalid("network contains a cycle".into()))?;
        Ok(Self { nodes, edges, order })
    }

    /// Three inputs fully connected to three sigmoid outputs.
    pub fn minimal(weights: [[f64; INPUTS]; OUTPUTS]) -> Self {
        let mut nodes = Vec::new();
        for id in 0..INPUTS as u32 {
            nodes.push(Node { id, role: NodeRole::Input, activation: ActivationKind::Identity });
        }
        for id in 0..OUTPUTS as u32 {
            nodes.push(Node { id: INPUTS as u32 + id, role: NodeRole::Output, activation: ActivationKind::Sigmoid });
        }
        let mut edges = Vec::new();
        for (o, row) in weights.iter().enumerate() {
            for (i, w) in row.iter().enumerate() {
                edges.push(Edge { source: i as u32, target: (INPUTS + o) as u32, weight: *w });
            }
        }
        Self::new(nodes, edges).expect("minimal network is valid")
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn next_node_id(&self) -> u32 {
        self.nodes.iter().map(|n| n.id).max().map_or(0, |m| m + 1)
    }

    /// True when `to` is reachable from `from` along edges.
    pub fn reaches(&self, from: u32, to: u32) -> bool {
        let mut stack = vec![from];
        let mut seen = std::collections::BTreeSet::new();
        while let Some(n) = stack.pop() {
            if n == to {
                return true;
            }
            if seen.insert(n) {
                stack.extend(self.edges.iter().filter(|e| e.source == n).map(|e| e.target));
            }
        }
        false
    }

    /// Evaluate the network. Returns the output node values in node-list order.
    pub fn eval(&self, inputs: [f64; INPUTS]) -> [f64; OUTPUTS] {
        let index = index_of(&self.nodes).expect("validated ids");
        let mut sums = vec![0.0; self.nodes.len()];
        let mut values = vec![0.0; self.nodes.len()];
        let mut next_input = 0;
        for (i, n) in self.nodes.iter().enumerate() {
            if n.role == NodeRole::Input {
                sums[i] = inputs[next_input];
                next_input += 1;
            }
        }
        for &i in &self.order {
            values[i] = self.nodes[i].activation.apply(sums[i]);
            for e in self.edges.iter().filter(|e| e.source == self.nodes[i].id) {
                sums[index[&e.target]] += e.weight * values[i];
            }
        }
        let mut out = [0.0; OUTPUTS];
        let outputs = self.nodes.iter().enumerate().filter(|(_, n)| n.role == NodeRole::Output);
        for (slot, (i, _)) in out.iter_mut().zip(outputs) {
            *slot = values[i];
        }
        out
    }

    pub(crate) fn edges_mut(&mut self) -> &mut Vec<Edge> {
        &mut self.edges
    }

    pub(crate) fn nodes_mut(&mut self) -> &mut Vec<Node> {
        &mut self.nodes
    }

    /// Re-validate after an in-place structural edit.
    pub(crate) fn revalidated(self) -> Result<Self, GenotypeError> {
        Cppn::new(self.nodes, self.edges)
    }
}

fn index_of(nodes: &[Node]) -> Result<BTreeMap<u32, usize>, GenotypeError> {
    let mut index = BTreeMap::new();
    for (i, n) in nodes.iter().enumerate() {
        if index.insert(n.id, i).is_some() {
            return Err(GenotypeError::Invalid(format!("duplicate node id {}", n.id)));
        }
    }
    Ok(index)
}

// Kahn's algorithm; None on a cycle.
fn topological_order(nodes: &[Node], edges: &[Edge], index: &BTreeMap<u32, usize>) -> Option<Vec<usize>> {
    let mut indegree = vec![0usize; nodes.len()];
    for e in edges {
        indegree[index[&e.target]] += 1;
    }
    let mut ready: Vec<usize> = (0..nodes.len()).filter(|i| indegree[*i] == 0).rev().collect();
    let mut order = Vec::with_capacity(nodes.len());
    while let Some(i) = ready.pop() {
        order.push(i);
        for e in edges.iter().filter(|e| e.source == nodes[i].id) {
            let t = index[&e.target];
            indegree[t] -= 1;
            if indegree[t] == 0 {
                ready.push(t);
            }
        }
    }
    (order.len() == nodes.len()).then_some(order)
}
