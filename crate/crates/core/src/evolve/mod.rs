//! NSGA-II search over genotypes with age-fitness Pareto bookkeeping.
//!
//! Objectives: lift (maximized, clamped), drive cost, feasibility distance
//! and genotype age (all minimized). Every random draw comes from a ChaCha
//! stream keyed by (seed, purpose, generation, index), so evaluating
//! offspring in parallel cannot change the outcome.

mod nsga;
mod persist;

pub use nsga::{crowding, dominates_min, sort_fronts};
pub use persist::write_run;

use std::cmp::Ordering;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::aero::{simulate, FlapProfile, SimConfig};
use crate::genotype::{crossover, express, mutate, random_genotype, ExpressionRanges, Genotype, InitParams, MutationParams};
use crate::wing::{validate_phenotype, FeasibleBounds, MaterialConfig, WingPhenotype};

/// Drive cost and feasibility assigned to designs whose simulation aborted.
pub const SENTINEL: f64 = 1e12;

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("evolution config: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DriveCostMode {
    /// Mean positive drive power (W).
    #[default]
    Power,
    /// RMS drive torque (N·m).
    Torque,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    /// N, maximized
    pub lift: f64,
    pub drive_cost: f64,
    pub feasibility: f64,
    /// generations
    pub age: u32,
}

impl ObjectiveVector {
    /// All four objectives oriented for minimization.
    pub fn minimized(&self) -> [f64; 4] {
        [-self.lift, self.drive_cost, self.feasibility, f64::from(self.age)]
    }
}

/// Pareto dominance with lift maximized and the rest minimized.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    dominates_min(&a.minimized(), &b.minimized())
}

/// Unclamped simulation output behind the objectives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimMetrics {
    /// N
    pub lift: f64,
    /// W
    pub power: f64,
    /// N·m
    pub torque: f64,
    pub aborted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Individual {
    pub genotype: Genotype,
    /// Expressed (unclamped) phenotype.
    pub phenotype: WingPhenotype,
    pub objectives: ObjectiveVector,
    pub metrics: SimMetrics,
    pub rank: usize,
    #[serde(serialize_with = "infinite_as_null")]
    pub crowding: f64,
}

fn infinite_as_null<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    pub population: usize,
    pub generations: usize,
    pub p_crossover: f64,
    pub p_mutation: f64,
    pub drive_cost_mode: DriveCostMode,
    pub rng_seed: u64,
    /// Lift objective bounds (N).
    pub lift_clamp: (f64, f64),
    /// Write `population_gen{N}.jsonl` every this many generations.
    pub snapshot_interval: usize,
    pub sim: SimConfig,
    pub flap: FlapProfile,
    pub materials: MaterialConfig,
    /// Defaults to the ranges derived from `materials`.
    pub bounds: Option<FeasibleBounds>,
    pub init: InitParams,
    pub mutation: MutationParams,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            population: 100,
            generations: 200,
            p_crossover: 0.2,
            p_mutation: 0.8,
            drive_cost_mode: DriveCostMode::Power,
            rng_seed: 0,
            lift_clamp: (0.01, 0.2),
            snapshot_interval: 10,
            sim: SimConfig::default(),
            flap: FlapProfile::default(),
            materials: MaterialConfig::default(),
            bounds: None,
            init: InitParams::default(),
            mutation: MutationParams::default(),
        }
    }
}

impl EvolutionConfig {
    pub fn bounds(&self) -> FeasibleBounds {
        self.bounds.unwrap_or_else(|| FeasibleBounds::from_materials(&self.materials))
    }

    pub fn ranges(&self) -> ExpressionRanges {
        ExpressionRanges::from_bounds(&self.bounds())
    }

    pub fn validate(&self) -> Result<(), EvolveError> {
        let bad = |m: String| Err(EvolveError::Config(m));
        if self.population < 4 || self.population % 2 != 0 {
            return bad(format!("population must be even and at least 4, got {}", self.population));
        }
        for (name, p) in [("p_crossover", self.p_crossover), ("p_mutation", self.p_mutation)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        let (lo, hi) = self.lift_clamp;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return bad(format!("lift_clamp must be an increasing pair, got ({lo}, {hi})"));
        }
        if self.snapshot_interval == 0 {
            return bad("snapshot_interval must be at least 1".into());
        }
        if self.init.min_entries == 0 || self.init.min_entries > self.init.max_entries {
            return bad("init entry counts must satisfy 1 <= min_entries <= max_entries".into());
        }
        if self.mutation.weights.iter().any(|w| !(*w >= 0.0)) || self.mutation.weights.iter().sum::<f64>() <= 0.0 {
            return bad("mutation weights must be non-negative with a positive sum".into());
        }
        self.sim.validate(&self.flap).map_err(|e| EvolveError::Config(e.to_string()))?;
        self.materials.validate().map_err(|e| EvolveError::Config(e.to_string()))?;
        self.ranges().validate().map_err(|e| EvolveError::Config(e.to_string()))
    }
}

/// Express, check feasibility and simulate one genotype. Infeasible wings
/// are simulated after clamping to the feasible bounds.
pub fn evaluate(g: &Genotype, cfg: &EvolutionConfig) -> Individual {
    let bounds = cfg.bounds();
    let phenotype = express(g, &cfg.ranges());
    let feasibility = validate_phenotype(&phenotype, &bounds).distance;
    let simulated = if feasibility > 0.0 { bounds.clamp(&phenotype) } else { phenotype.clone() };
    let (lo, hi) = cfg.lift_clamp;
    let (objectives, metrics) = match simulate(&simulated, &cfg.materials, &cfg.flap, &cfg.sim) {
        Ok(r) => {
            let cost = match cfg.drive_cost_mode {
                DriveCostMode::Power => r.drive_power_mean,
                DriveCostMode::Torque => r.drive_torque_rms,
            };
            let lift = if r.lift_mean.is_nan() { lo } else { r.lift_mean.clamp(lo, hi) };
            (
                ObjectiveVector { lift, drive_cost: cost, feasibility, age: g.age },
                SimMetrics { lift: r.lift_mean, power: r.drive_power_mean, torque: r.drive_torque_rms, aborted: false },
            )
        }
        Err(e) => {
            log::warn!("{}: {e}; assigning sentinel objectives", phenotype.label);
            (
                ObjectiveVector { lift: lo, drive_cost: SENTINEL, feasibility: SENTINEL, age: g.age },
                SimMetrics { lift: f64::NAN, power: f64::NAN, torque: f64::NAN, aborted: true },
            )
        }
    };
    Individual { genotype: g.clone(), phenotype, objectives, metrics, rank: 0, crowding: 0.0 }
}

const STREAM_INIT: u64 = 1;
const STREAM_SELECT: u64 = 2;
const STREAM_OFFSPRING: u64 = 3;
const STREAM_INJECT: u64 = 4;

fn stream(seed: u64, purpose: u64, generation: usize, index: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    for (k, v) in [seed, purpose, generation as u64, index as u64].into_iter().enumerate() {
        key[8 * k..8 * k + 8].copy_from_slice(&v.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Sort into fronts and set `rank` and `crowding` on every member.
pub fn rank_population(pop: &mut [Individual]) -> Vec<Vec<usize>> {
    let points: Vec<Vec<f64>> = pop.iter().map(|i| i.objectives.minimized().to_vec()).collect();
    let fronts = sort_fronts(&points);
    for (r, front) in fronts.iter().enumerate() {
        let members: Vec<Vec<f64>> = front.iter().map(|i| points[*i].clone()).collect();
        for (i, d) in front.iter().zip(crowding(&members)) {
            pop[*i].rank = r;
            pop[*i].crowding = d;
        }
    }
    fronts
}

/// Front indices for a population, the public face of the sorter.
pub fn nondominated_sort(objectives: &[ObjectiveVector]) -> Vec<Vec<usize>> {
    let points: Vec<Vec<f64>> = objectives.iter().map(|o| o.minimized().to_vec()).collect();
    sort_fronts(&points)
}

pub fn crowding_distance(front: &[ObjectiveVector]) -> Vec<f64> {
    let points: Vec<Vec<f64>> = front.iter().map(|o| o.minimized().to_vec()).collect();
    crowding(&points)
}

/// Crowding descending; ties (typically several +inf boundary members) go to
/// the higher lift so the best design is never truncated away.
fn truncation_order(pop: &[Individual], a: usize, b: usize) -> Ordering {
    let (x, y) = (&pop[a], &pop[b]);
    y.crowding
        .partial_cmp(&x.crowding)
        .unwrap_or(Ordering::Equal)
        .then(y.objectives.lift.partial_cmp(&x.objectives.lift).unwrap_or(Ordering::Equal))
        .then(a.cmp(&b))
}

/// NSGA-II truncation of `combined` to `mu` members.
fn environmental_selection(mut combined: Vec<Individual>, mu: usize) -> Vec<Individual> {
    let fronts = rank_population(&mut combined);
    let mut keep = Vec::with_capacity(mu);
    for front in fronts {
        if keep.len() + front.len() <= mu {
            keep.extend(front);
        } else {
            let mut order = front.clone();
            order.sort_by(|a, b| truncation_order(&combined, *a, *b));
            keep.extend(order.into_iter().take(mu - keep.len()));
        }
        if keep.len() == mu {
            break;
        }
    }
    let mut slots: Vec<Option<Individual>> = combined.into_iter().map(Some).collect();
    keep.into_iter().map(|i| slots[i].take().expect("selected once")).collect()
}

fn tournament<R: Rng>(pop: &[Individual], rng: &mut R) -> usize {
    let a = rng.random_range(0..pop.len());
    let b = rng.random_range(0..pop.len());
    let (x, y) = (&pop[a], &pop[b]);
    match x.rank.cmp(&y.rank).then(y.crowding.partial_cmp(&x.crowding).unwrap_or(Ordering::Equal)) {
        Ordering::Less => a,
        Ordering::Greater => b,
        Ordering::Equal => {
            if rng.random_bool(0.5) {
                a
            } else {
                b
            }
        }
    }
}

/// One generation: tournament selection, variation, parallel evaluation,
/// elitist truncation, ageing and one age-0 injection. `generation` counts
/// from 1 and keys the random streams.
pub fn next_generation(pop: Vec<Individual>, generation: usize, cfg: &EvolutionConfig) -> Vec<Individual> {
    let mu = pop.len();
    let mut select = stream(cfg.rng_seed, STREAM_SELECT, generation, 0);
    let parents: Vec<(usize, usize)> = (0..mu).map(|_| (tournament(&pop, &mut select), tournament(&pop, &mut select))).collect();
    let offspring: Vec<Individual> = parents
        .par_iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            let mut rng = stream(cfg.rng_seed, STREAM_OFFSPRING, generation, i);
            let (pa, pb) = (&pop[a], &pop[b]);
            let mut child = if rng.random_bool(cfg.p_crossover) {
                crossover(&pa.genotype, pa.objectives.lift, &pb.genotype, pb.objectives.lift, &mut rng)
            } else {
                pa.genotype.clone()
            };
            if rng.random_bool(cfg.p_mutation) {
                child = mutate(&child, &mut rng, &cfg.mutation).0;
            }
            evaluate(&child, cfg)
        })
        .collect();

    let mut combined = pop;
    combined.extend(offspring);
    let mut survivors = environmental_selection(combined, mu);
    for s in &mut survivors {
        s.genotype.age += 1;
        s.objectives.age += 1;
    }

    let fronts = rank_population(&mut survivors);
    let last = fronts.last().expect("non-empty population");
    let worst = *last
        .iter()
        .min_by(|a, b| {
            let (x, y) = (&survivors[**a], &survivors[**b]);
            x.crowding
                .partial_cmp(&y.crowding)
                .unwrap_or(Ordering::Equal)
                .then(x.objectives.lift.partial_cmp(&y.objectives.lift).unwrap_or(Ordering::Equal))
                .then(a.cmp(b))
        })
        .expect("non-empty front");
    let mut rng = stream(cfg.rng_seed, STREAM_INJECT, generation, 0);
    let mut fresh = random_genotype(&mut rng, &cfg.init);
    fresh.age = 0;
    survivors[worst] = evaluate(&fresh, cfg);
    rank_population(&mut survivors);
    survivors
}

/// Feasible members only, ages reset, non-dominated on (lift, drive cost),
/// sorted by lift descending. Clones (same phenotype blades) appear once.
pub fn final_ndf(pop: &[Individual]) -> Vec<Individual> {
    let mut feasible: Vec<Individual> = Vec::new();
    for i in pop.iter().filter(|i| i.objectives.feasibility == 0.0) {
        if !feasible.iter().any(|f| f.phenotype.blades() == i.phenotype.blades()) {
            feasible.push(i.clone());
        }
    }
    if feasible.is_empty() {
        log::warn!("final population has no feasible member; the non-dominated front is empty");
        return feasible;
    }
    for i in &mut feasible {
        i.genotype.age = 0;
        i.objectives.age = 0;
    }
    let points: Vec<Vec<f64>> = feasible.iter().map(|i| vec![-i.objectives.lift, i.objectives.drive_cost]).collect();
    let front = sort_fronts(&points).swap_remove(0);
    let members: Vec<Vec<f64>> = front.iter().map(|i| points[*i].clone()).collect();
    let dist = crowding(&members);
    let mut ndf: Vec<Individual> = front
        .iter()
        .zip(dist)
        .map(|(i, d)| Individual { rank: 0, crowding: d, ..feasible[*i].clone() })
        .collect();
    ndf.sort_by(|a, b| {
        b.objectives
            .lift
            .partial_cmp(&a.objectives.lift)
            .unwrap_or(Ordering::Equal)
            .then(a.objectives.drive_cost.partial_cmp(&b.objectives.drive_cost).unwrap_or(Ordering::Equal))
    });
    ndf
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSummary {
    pub generation: usize,
    /// Objective (clamped) lift, N.
    pub best_lift: f64,
    pub median_lift: f64,
    pub front0_size: usize,
    pub feasible_count: usize,
    /// Objective lift of the best feasible member, N.
    pub best_feasible_lift: Option<f64>,
    /// Unclamped simulated lift of the best feasible member, N.
    pub best_feasible_sim_lift: Option<f64>,
}

pub fn summarize(generation: usize, pop: &[Individual]) -> GenerationSummary {
    let mut lifts: Vec<f64> = pop.iter().map(|i| i.objectives.lift).collect();
    lifts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let n = lifts.len();
    let median_lift = if n % 2 == 1 { lifts[n / 2] } else { 0.5 * (lifts[n / 2 - 1] + lifts[n / 2]) };
    let feasible: Vec<&Individual> = pop.iter().filter(|i| i.objectives.feasibility == 0.0).collect();
    let best = feasible.iter().max_by(|a, b| {
        a.objectives
            .lift
            .partial_cmp(&b.objectives.lift)
            .unwrap_or(Ordering::Equal)
            .then(a.metrics.lift.partial_cmp(&b.metrics.lift).unwrap_or(Ordering::Equal))
    });
    GenerationSummary {
        generation,
        best_lift: lifts[n - 1],
        median_lift,
        front0_size: pop.iter().filter(|i| i.rank == 0).count(),
        feasible_count: feasible.len(),
        best_feasible_lift: best.map(|i| i.objectives.lift),
        best_feasible_sim_lift: best.map(|i| i.metrics.lift),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub config: EvolutionConfig,
    /// Summary of the random initial population.
    pub initial: GenerationSummary,
    /// One entry per generation, 1-based.
    pub generations: Vec<GenerationSummary>,
    pub population: Vec<Individual>,
    pub ndf: Vec<Individual>,
    /// Populations kept for `population_gen{N}.jsonl`, keyed by generation.
    #[serde(skip)]
    pub snapshots: Vec<(usize, Vec<Individual>)>,
}

pub fn initial_population(cfg: &EvolutionConfig) -> Vec<Individual> {
    let genotypes: Vec<Genotype> =
        (0..cfg.population).map(|i| random_genotype(&mut stream(cfg.rng_seed, STREAM_INIT, 0, i), &cfg.init)).collect();
    let mut pop: Vec<Individual> = genotypes.par_iter().map(|g| evaluate(g, cfg)).collect();
    rank_population(&mut pop);
    pop
}

/// Run the full search. With `out`, the run directory is written at the end.
pub fn run_evolution(cfg: &EvolutionConfig, out: Option<&Path>) -> Result<RunRecord, EvolveError> {
    cfg.validate()?;
    let mut pop = initial_population(cfg);
    let initial = summarize(0, &pop);
    log::info!("generation 0: best lift {:.4e} N, {} feasible", initial.best_lift, initial.feasible_count);
    let mut snapshots = vec![(0, pop.clone())];
    let mut generations = Vec::with_capacity(cfg.generations);
    for g in 1..=cfg.generations {
        pop = next_generation(pop, g, cfg);
        let s = summarize(g, &pop);
        log::info!(
            "generation {g}: best lift {:.4e} N, median {:.4e} N, front 0 size {}, {} feasible",
            s.best_lift,
            s.median_lift,
            s.front0_size,
            s.feasible_count
        );
        generations.push(s);
        if g % cfg.snapshot_interval == 0 || g == cfg.generations {
            snapshots.push((g, pop.clone()));
        }
    }
    let ndf = final_ndf(&pop);
    let record = RunRecord { config: cfg.clone(), initial, generations, population: pop, ndf, snapshots };
    if let Some(dir) = out {
        write_run(&record, dir)?;
    }
    Ok(record)
}
