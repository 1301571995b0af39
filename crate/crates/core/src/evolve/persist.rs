//! Run directory layout.
//!
//! ```text
//! config.json               the EvolutionConfig used
//! generations.csv           one summary row per generation, 0 = initial
//! population_gen{N}.jsonl   one Individual per line
//! ndf.json / ndf.csv        final non-dominated front
//! ```

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::wing::{compute_cms, wing_span};

use super::{EvolveError, GenerationSummary, Individual, RunRecord};

fn io<E: std::fmt::Display>(path: &Path) -> impl Fn(E) -> EvolveError + '_ {
    move |e| EvolveError::Io(format!("{}: {e}", path.display()))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.8e}")).unwrap_or_default()
}

pub fn write_run(record: &RunRecord, dir: &Path) -> Result<(), EvolveError> {
    fs::create_dir_all(dir).map_err(io(dir))?;

    let path = dir.join("config.json");
    let text = serde_json::to_string_pretty(&record.config).map_err(io(&path))?;
    fs::write(&path, text).map_err(io(&path))?;

    let path = dir.join("generations.csv");
    let mut w = csv::Writer::from_path(&path).map_err(io(&path))?;
    w.write_record(["gen", "best_lift", "median_lift", "front0_size", "feasible_count", "best_feasible_lift"])
        .map_err(io(&path))?;
    let rows: Vec<&GenerationSummary> = std::iter::once(&record.initial).chain(&record.generations).collect();
    for s in rows {
        w.write_record([
            s.generation.to_string(),
            format!("{:.8e}", s.best_lift),
            format!("{:.8e}", s.median_lift),
            s.front0_size.to_string(),
            s.feasible_count.to_string(),
            opt(s.best_feasible_lift),
        ])
        .map_err(io(&path))?;
    }
    w.flush().map_err(io(&path))?;

    for (g, pop) in &record.snapshots {
        write_population(&dir.join(format!("population_gen{g}.jsonl")), pop)?;
    }

    let path = dir.join("ndf.json");
    let text = serde_json::to_string_pretty(&record.ndf).map_err(io(&path))?;
    fs::write(&path, text).map_err(io(&path))?;

    write_ndf_csv(&dir.join("ndf.csv"), &record.ndf, &record.population)
}

pub fn write_population(path: &Path, pop: &[Individual]) -> Result<(), EvolveError> {
    let mut w = BufWriter::new(fs::File::create(path).map_err(io(path))?);
    for i in pop {
        let line = serde_json::to_string(i).map_err(io(path))?;
        writeln!(w, "{line}").map_err(io(path))?;
    }
    w.flush().map_err(io(path))
}

/// Front members in SI-derived display units. C_MS is normalized by the
/// largest blade count and span in `population`.
pub fn write_ndf_csv(path: &Path, ndf: &[Individual], population: &[Individual]) -> Result<(), EvolveError> {
    let b_max = population.iter().map(|i| i.phenotype.blade_count()).max().unwrap_or(1);
    let s_max = population.iter().map(|i| wing_span(&i.phenotype)).fold(0.0, f64::max);
    let mut w = csv::Writer::from_path(path).map_err(io(path))?;
    w.write_record(["label", "B", "S_mm", "lift_mN", "power_mW", "torque_mNm", "C_MS"]).map_err(io(path))?;
    for i in ndf {
        let b = i.phenotype.blade_count();
        let s = wing_span(&i.phenotype);
        let cms = compute_cms(b, s, b_max, s_max).map(|c| format!("{c:.6}")).unwrap_or_default();
        w.write_record([
            i.phenotype.label.clone(),
            b.to_string(),
            format!("{s:.3}"),
            format!("{:.6}", i.metrics.lift * 1e3),
            format!("{:.6}", i.metrics.power * 1e3),
            format!("{:.6}", i.metrics.torque * 1e3),
            cms,
        ])
        .map_err(io(path))?;
    }
    w.flush().map_err(io(path))
}
