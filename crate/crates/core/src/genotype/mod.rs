//! Evolvable wing description: a CPPN that paints chord and stiffness along
//! the span, plus a variable-length morphology expression array.

mod cppn;
mod variation;

pub use cppn::{sigmoid, ActivationKind, Cppn, Edge, Node, NodeRole, INPUTS, OUTPUTS};
pub use variation::{crossover, crossover_at, mutate, random_genotype, InitParams, MutationKind, MutationParams};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::wing::{BladeSpec, FeasibleBounds, MaterialConfig, WingPhenotype};

pub const GENOTYPE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum GenotypeError {
    #[error("invalid genotype: {0}")]
    Invalid(String),
    #[error("genotype parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unsupported genotype format_version {0}")]
    Version(u32),
}

/// One blade request: offset from the inboard neighbour (mm) and a
/// similarity value fed to the CPPN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpressionEntry {
    pub position: f64,
    similarity: f64,
}

#[derive(Deserialize)]
struct RawEntry {
    position: f64,
    similarity: f64,
}

impl<'de> Deserialize<'de> for ExpressionEntry {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawEntry::deserialize(d)?;
        ExpressionEntry::new(raw.position, raw.similarity).map_err(serde::de::Error::custom)
    }
}

impl ExpressionEntry {
    pub fn new(position: f64, similarity: f64) -> Result<Self, GenotypeError> {
        if !position.is_finite() || !(0.0..=1.0).contains(&similarity) {
            return Err(GenotypeError::Invalid(format!(
                "entry (position {position}, similarity {similarity}) out of domain"
            )));
        }
        Ok(Self { position, similarity })
    }

    pub fn similarity(&self) -> f64 {
        self.similarity
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Genotype {
    pub cppn: Cppn,
    entries: Vec<ExpressionEntry>,
    pub age: u32,
    pub lineage: u64,
}

#[derive(Serialize, Deserialize)]
struct GenotypeFile {
    format_version: u32,
    cppn: Cppn,
    entries: Vec<ExpressionEntry>,
    age: u32,
    #[serde(default)]
    lineage: u64,
}

impl Genotype {
    pub fn new(cppn: Cppn, entries: Vec<ExpressionEntry>, age: u32, lineage: u64) -> Result<Self, GenotypeError> {
        if entries.is_empty() {
            return Err(GenotypeError::Invalid("expression array must not be empty".into()));
        }
        Ok(Self { cppn, entries, age, lineage })
    }

    pub fn entries(&self) -> &[ExpressionEntry] {
        &self.entries
    }

    pub fn serialize(&self) -> String {
        let file = GenotypeFile {
            format_version: GENOTYPE_FORMAT_VERSION,
            cppn: self.cppn.clone(),
            entries: self.entries.clone(),
            age: self.age,
            lineage: self.lineage,
        };
        serde_json::to_string_pretty(&file).expect("genotype serializes")
    }

    pub fn deserialize(text: &str) -> Result<Self, GenotypeError> {
        let file: GenotypeFile = serde_json::from_str(text).map_err(|e| GenotypeError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if file.format_version != GENOTYPE_FORMAT_VERSION {
            return Err(GenotypeError::Version(file.format_version));
        }
        Genotype::new(file.cppn, file.entries, file.age, file.lineage)
    }
}

/// Scaling of the CPPN outputs into physical blade parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpressionRanges {
    /// mm
    pub chord: (f64, f64),
    /// N·m/rad
    pub k_twist: (f64, f64),
    /// N·m/rad
    pub k_bend: (f64, f64),
}

impl ExpressionRanges {
    pub fn from_bounds(b: &FeasibleBounds) -> Self {
        Self { chord: b.chord, k_twist: b.k_twist, k_bend: b.k_bend }
    }

    pub fn validate(&self) -> Result<(), GenotypeError> {
        for (name, (lo, hi)) in [("chord", self.chord), ("k_twist", self.k_twist), ("k_bend", self.k_bend)] {
            if !(lo > 0.0 && lo < hi && hi.is_finite()) {
                return Err(GenotypeError::Invalid(format!("expression range {name} = ({lo}, {hi})")));
            }
        }
        Ok(())
    }
}

impl Default for ExpressionRanges {
    fn default() -> Self {
        Self::from_bounds(&FeasibleBounds::from_materials(&MaterialConfig::default()))
    }
}

fn lerp((lo, hi): (f64, f64), t: f64) -> f64 {
    lo + (hi - lo) * t
}

fn log_lerp((lo, hi): (f64, f64), t: f64) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * t).exp()
}

/// Express a genotype into a wing, one blade per expression entry.
pub fn express(g: &Genotype, r: &ExpressionRanges) -> WingPhenotype {
    let total: f64 = g.entries.iter().map(|e| e.position).sum();
    let mut station = 0.0;
    let blades = g
        .entries
        .iter()
        .map(|e| {
            station += e.position;
            let x_norm = if total != 0.0 { station / total } else { 0.0 };
            let [o_chord, o_twist, o_bend] = g.cppn.eval([x_norm, e.similarity, 1.0]);
            BladeSpec {
                span_offset: e.position,
                chord: lerp(r.chord, o_chord),
                k_twist: log_lerp(r.k_twist, o_twist),
                k_bend: log_lerp(r.k_bend, o_bend),
            }
        })
        .collect::<Vec<_>>();
    // Positions are stored unclamped and may be non-positive after mutation;
    // feasibility handles those, so build without the positivity check.
    WingPhenotype::new(blades.clone(), format!("g{:016x}", g.lineage)).unwrap_or_else(|_| {
        let fixed = blades
            .into_iter()
            .map(|b| BladeSpec { span_offset: b.span_offset.max(f64::MIN_POSITIVE), ..b })
            .collect();
        WingPhenotype::new(fixed, format!("g{:016x}", g.lineage)).expect("positive blades")
    })
}
