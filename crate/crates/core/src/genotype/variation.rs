//! Mutation, crossover and random initialization.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::cppn::{ActivationKind, Cppn, Edge, Node, NodeRole, INPUTS, OUTPUTS};
use super::{ExpressionEntry, Genotype};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationKind {
    InsertEntry,
    RemoveEntry,
    PerturbEntry,
    PerturbWeight,
    AddEdge,
    AddNode,
    ChangeActivation,
}

impl MutationKind {
    pub const ALL: [MutationKind; 7] = [
        MutationKind::InsertEntry,
        MutationKind::RemoveEntry,
        MutationKind::PerturbEntry,
        MutationKind::PerturbWeight,
        MutationKind::AddEdge,
        MutationKind::AddNode,
        MutationKind::ChangeActivation,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MutationParams {
    /// Roulette weights in `MutationKind::ALL` order.
    pub weights: [f64; 7],
    /// Range for inserted entry positions (mm).
    pub insert_position: (f64, f64),
    pub sigma_position: f64,
    pub sigma_similarity: f64,
    pub sigma_weight: f64,
}

impl Default for MutationParams {
    fn default() -> Self {
        Self {
            weights: [0.1, 0.1, 0.3, 0.3, 0.1, 0.05, 0.05],
            insert_position: (30.0, 150.0),
            sigma_position: 10.0,
            sigma_similarity: 0.1,
            sigma_weight: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InitParams {
    pub min_entries: usize,
    pub max_entries: usize,
    pub position: (f64, f64),
    pub weight_range: (f64, f64),
}

impl Default for InitParams {
    fn default() -> Self {
        Self { min_entries: 1, max_entries: 6, position: (30.0, 150.0), weight_range: (-1.0, 1.0) }
    }
}

pub fn random_genotype<R: Rng>(rng: &mut R, init: &InitParams) -> Genotype {
    let n = rng.random_range(init.min_entries.max(1)..=init.max_entries.max(init.min_entries.max(1)));
    let entries = (0..n)
        .map(|_| {
            let p = rng.random_range(init.position.0..=init.position.1);
            let s = rng.random_range(0.0..=1.0);
            ExpressionEntry::new(p, s).expect("in-domain entry")
        })
        .collect();
    let mut weights = [[0.0; INPUTS]; OUTPUTS];
    for row in weights.iter_mut() {
        for w in row.iter_mut() {
            *w = rng.random_range(init.weight_range.0..=init.weight_range.1);
        }
    }
    Genotype::new(Cppn::minimal(weights), entries, 0, rng.random()).expect("non-empty")
}

/// Apply exactly one mutation primitive. Primitives that cannot apply to
/// this genotype (removing the only entry, adding an edge to a saturated
/// network, ...) are re-rolled. The child keeps the parent's age.
pub fn mutate<R: Rng>(g: &Genotype, rng: &mut R, p: &MutationParams) -> (Genotype, MutationKind) {
    let total: f64 = p.weights.iter().sum();
    loop {
        let mut pick = rng.random_range(0.0..total);
        let mut kind = MutationKind::ALL[MutationKind::ALL.len() - 1];
        for (k, w) in MutationKind::ALL.iter().zip(p.weights) {
            if pick < w {
                kind = *k;
                break;
            }
            pick -= w;
        }
        if let Some(mut child) = apply(g, kind, rng, p) {
            child.lineage = rng.random();
            return (child, kind);
        }
    }
}

fn apply<R: Rng>(g: &Genotype, kind: MutationKind, rng: &mut R, p: &MutationParams) -> Option<Genotype> {
    let mut child = g.clone();
    match kind {
        MutationKind::InsertEntry => {
            let at = rng.random_range(0..=child.entries.len());
            let pos = rng.random_range(p.insert_position.0..=p.insert_position.1);
            let sim = rng.random_range(0.0..=1.0);
            child.entries.insert(at, ExpressionEntry::new(pos, sim).ok()?);
        }
        MutationKind::RemoveEntry => {
            if child.entries.len() <= 1 {
                return None;
            }
            let at = rng.random_range(0..child.entries.len());
            child.entries.remove(at);
        }
        MutationKind::PerturbEntry => {
            let at = rng.random_range(0..child.entries.len());
            let e = child.entries[at];
            let pos = e.position + gaussian(rng, p.sigma_position);
            let sim = (e.similarity + gaussian(rng, p.sigma_similarity)).clamp(0.0, 1.0);
            child.entries[at] = ExpressionEntry::new(pos, sim).ok()?;
        }
        MutationKind::PerturbWeight => {
            let edges = child.cppn.edges_mut();
            if edges.is_empty() {
                return None;
            }
            let at = rng.random_range(0..edges.len());
            edges[at].weight += gaussian(rng, p.sigma_weight);
        }
        MutationKind::AddEdge => {
            let nodes = child.cppn.nodes().to_vec();
            let sources: Vec<u32> = nodes.iter().filter(|n| n.role != NodeRole::Output).map(|n| n.id).collect();
            let targets: Vec<u32> = nodes.iter().filter(|n| n.role != NodeRole::Input).map(|n| n.id).collect();
            let candidates: Vec<(u32, u32)> = sources
                .iter()
                .flat_map(|s| targets.iter().map(move |t| (*s, *t)))
                .filter(|(s, t)| {
                    s != t
                        && !child.cppn.edges().iter().any(|e| e.source == *s && e.target == *t)
                        && !child.cppn.reaches(*t, *s)
                })
                .collect();
            if candidates.is_empty() {
                return None;
            }
            let (source, target) = candidates[rng.random_range(0..candidates.len())];
            let weight = rng.random_range(-1.0..=1.0);
            child.cppn.edges_mut().push(Edge { source, target, weight });
        }
        MutationKind::AddNode => {
            if child.cppn.edges().is_empty() {
                return None;
            }
            let at = rng.random_range(0..child.cppn.edges().len());
            let activation = ActivationKind::HIDDEN[rng.random_range(0..ActivationKind::HIDDEN.len())];
            split_edge(&mut child.cppn, at, activation);
        }
        MutationKind::ChangeActivation => {
            let hidden: Vec<usize> = child
                .cppn
                .nodes()
                .iter()
                .enumerate()
                .filter(|(_, n)| n.role == NodeRole::Hidden)
                .map(|(i, _)| i)
                .collect();
            if hidden.is_empty() {
                return None;
            }
            let i = hidden[rng.random_range(0..hidden.len())];
            let activation = ActivationKind::HIDDEN[rng.random_range(0..ActivationKind::HIDDEN.len())];
            child.cppn.nodes_mut()[i].activation = activation;
        }
    }
    child.cppn = child.cppn.revalidated().ok()?;
    Some(child)
}

/// Replace edge `a -> b (w)` by `a -> h (1.0)` and `h -> b (w)`.
pub(crate) fn split_edge(cppn: &mut Cppn, at: usize, activation: ActivationKind) -> u32 {
    let id = cppn.next_node_id();
    let old = cppn.edges_mut().remove(at);
    cppn.nodes_mut().push(Node { id, role: NodeRole::Hidden, activation });
    cppn.edges_mut().push(Edge { source: old.source, target: id, weight: 1.0 });
    cppn.edges_mut().push(Edge { source: id, target: old.target, weight: old.weight });
    id
}

fn gaussian<R: Rng>(rng: &mut R, sigma: f64) -> f64 {
    Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
}

/// One-point splice: `a[..cut_a] ++ b[cut_b..]`, with the CPPN copied from
/// `cppn_from_a ? a : b`. Returns `None` when the splice would be empty.
pub fn crossover_at(a: &Genotype, b: &Genotype, cut_a: usize, cut_b: usize, cppn_from_a: bool) -> Option<Genotype> {
    let mut entries: Vec<ExpressionEntry> = a.entries[..cut_a.min(a.entries.len())].to_vec();
    entries.extend_from_slice(&b.entries[cut_b.min(b.entries.len())..]);
    if entries.is_empty() {
        return None;
    }
    let cppn = if cppn_from_a { a.cppn.clone() } else { b.cppn.clone() };
    Some(Genotype::new(cppn, entries, a.age.max(b.age), a.lineage).expect("non-empty"))
}

/// Crossover keeping the CPPN of the parent with the higher lift (coin flip
/// on ties). Cut points are re-drawn until the child has at least one entry.
pub fn crossover<R: Rng>(a: &Genotype, lift_a: f64, b: &Genotype, lift_b: f64, rng: &mut R) -> Genotype {
    let from_a = if lift_a == lift_b { rng.random_bool(0.5) } else { lift_a > lift_b };
    loop {
        let cut_a = rng.random_range(0..=a.entries.len());
        let cut_b = rng.random_range(0..=b.entries.len());
        if let Some(mut child) = crossover_at(a, b, cut_a, cut_b, from_a) {
            child.lineage = rng.random();
            return child;
        }
    }
}
