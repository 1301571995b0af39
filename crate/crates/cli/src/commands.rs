use std::path::{Path, PathBuf};

use clap::ArgMatches;
use flapwing::aero::{export_timeseries, simulate, SimError, GRAM_FORCE};
use flapwing::evolve::{run_evolution, DriveCostMode, EvolutionConfig, EvolveError, Individual};
use flapwing::genotype::{express, Genotype, GenotypeError};
use flapwing::transfer::{
    annotate, export_gap_plot, gap_envelope, ingest_transfers, polyfit_str, threshold_estimate, TransferError,
};
use flapwing::wing::{compute_cms, export_manufacture_spec, wing_span, WingError, WingPhenotype};

use crate::config::{load, output_dir};
use crate::{given, Command, ConfigArgs, CostArg, FlapArgs, Failure};

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(_) | SimError::Table(_) => Failure::Usage(e.to_string()),
            SimError::Io(_) => Failure::Io(e.to_string()),
            SimError::Abort { .. } => Failure::Internal(e.to_string()),
        }
    }
}

impl From<EvolveError> for Failure {
    fn from(e: EvolveError) -> Self {
        match e {
            EvolveError::Config(_) => Failure::Usage(e.to_string()),
            EvolveError::Io(_) => Failure::Io(e.to_string()),
        }
    }
}

impl From<TransferError> for Failure {
    fn from(e: TransferError) -> Self {
        match e {
            TransferError::Io(_) => Failure::Io(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn beside(input: &Path, suffix: &str) -> PathBuf {
    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "design".into());
    input.with_file_name(format!("{stem}{suffix}"))
}

fn genotype_error(path: &Path, e: GenotypeError) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

/// A design file holds either a genotype (has `format_version` and `cppn`)
/// or a phenotype (has `blades`).
fn load_design(path: &Path, cfg: &EvolutionConfig) -> Result<WingPhenotype, Failure> {
    let text = read(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    if value.get("cppn").is_some() {
        let g = Genotype::deserialize(&text).map_err(|e| genotype_error(path, e))?;
        Ok(express(&g, &cfg.ranges()))
    } else {
        WingPhenotype::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
    }
}

fn apply_flap(cfg: &mut EvolutionConfig, flap: &FlapArgs, m: &ArgMatches) {
    if given(m, "frequency") {
        cfg.flap.frequency = flap.frequency;
    }
    if given(m, "amplitude") {
        cfg.flap.amplitude = flap.amplitude.to_radians();
    }
    if given(m, "duration") {
        cfg.sim.duration = flap.duration;
    }
    if given(m, "dt") {
        cfg.sim.dt = flap.dt;
    }
}

fn base(cfg: &ConfigArgs) -> Result<EvolutionConfig, Failure> {
    load(cfg.config.as_deref(), &cfg.sets)
}

pub fn run(cmd: Command, m: &ArgMatches) -> Result<(), Failure> {
    match cmd {
        Command::Evolve {
            cfg,
            pop,
            gens,
            seed,
            p_crossover,
            p_mutation,
            drive_cost,
            lift_min_mn,
            lift_max_mn,
            snapshot_interval,
            flap,
            out,
            print_config,
        } => {
            let mut c = base(&cfg)?;
            if given(m, "pop") {
                c.population = pop;
            }
            if given(m, "gens") {
                c.generations = gens;
            }
            if given(m, "seed") {
                c.rng_seed = seed;
            }
            if given(m, "p_crossover") {
                c.p_crossover = p_crossover;
            }
            if given(m, "p_mutation") {
                c.p_mutation = p_mutation;
            }
            if given(m, "drive_cost") {
                c.drive_cost_mode = match drive_cost {
                    CostArg::Power => DriveCostMode::Power,
                    CostArg::Torque => DriveCostMode::Torque,
                };
            }
            if given(m, "lift_min_mn") {
                c.lift_clamp.0 = lift_min_mn / 1e3;
            }
            if given(m, "lift_max_mn") {
                c.lift_clamp.1 = lift_max_mn / 1e3;
            }
            if given(m, "snapshot_interval") {
                c.snapshot_interval = snapshot_interval;
            }
            apply_flap(&mut c, &flap, m);
            if print_config {
                c.validate()?;
                println!("{}", serde_json::to_string_pretty(&c).map_err(|e| Failure::Internal(e.to_string()))?);
                return Ok(());
            }
            let dir = output_dir(out.as_deref(), &format!("run-seed{}", c.rng_seed));
            cmd_evolve(&c, &dir)
        }
        Command::Simulate { design, cfg, flap, export } => {
            let mut c = base(&cfg)?;
            apply_flap(&mut c, &flap, m);
            cmd_simulate(&design, &c, export.as_deref())
        }
        Command::Express { genotype, cfg, out, bmax, smax } => {
            let c = base(&cfg)?;
            let out = out.unwrap_or_else(|| beside(&genotype, ".wing.json"));
            cmd_express(&genotype, &c, &out, bmax, smax)
        }
        Command::Analyze { transfers, lmax, bmax, smax, max_degree, out } => {
            let dir = output_dir(out.as_deref(), "analysis");
            cmd_analyze(&transfers, lmax, bmax, smax, max_degree, &dir)
        }
        Command::Manufacture { design, cfg, out } => {
            let c = base(&cfg)?;
            let out = out.unwrap_or_else(|| beside(&design, ".manufacture.json"));
            cmd_manufacture(&design, &c, &out)
        }
    }
}

fn cmd_evolve(c: &EvolutionConfig, dir: &Path) -> Result<(), Failure> {
    c.validate()?;
    // fail on an unwritable directory before spending the compute
    std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    println!(
        "evolving: population {}, {} generations, seed {}, output {}",
        c.population,
        c.generations,
        c.rng_seed,
        dir.display()
    );
    let record = run_evolution(c, Some(dir))?;
    print_ndf(&record.ndf, &record.population);
    Ok(())
}

fn print_ndf(ndf: &[Individual], population: &[Individual]) {
    let b_max = population.iter().map(|i| i.phenotype.blade_count()).max().unwrap_or(1);
    let s_max = population.iter().map(|i| wing_span(&i.phenotype)).fold(0.0, f64::max);
    println!("final non-dominated front ({} designs):", ndf.len());
    println!("{:<19} {:>3} {:>8} {:>10} {:>10} {:>11} {:>6}", "label", "B", "S_mm", "lift_mN", "power_mW", "torque_mNm", "C_MS");
    for i in ndf {
        let b = i.phenotype.blade_count();
        let s = wing_span(&i.phenotype);
        let cms = compute_cms(b, s, b_max, s_max).map(|v| format!("{v:.3}")).unwrap_or_else(|_| "-".into());
        println!(
            "{:<19} {:>3} {:>8.1} {:>10.4} {:>10.4} {:>11.4} {:>6}",
            i.phenotype.label,
            b,
            s,
            i.metrics.lift * 1e3,
            i.metrics.power * 1e3,
            i.metrics.torque * 1e3,
            cms
        );
    }
}

fn cmd_simulate(design: &Path, c: &EvolutionConfig, export: Option<&Path>) -> Result<(), Failure> {
    let w = load_design(design, c)?;
    let mut sim = c.sim.clone();
    sim.record_series = export.is_some();
    let r = simulate(&w, &c.materials, &c.flap, &sim)?;
    println!("design: {} ({} blades, span {:.1} mm)", w.label, w.blade_count(), wing_span(&w));
    println!("lift: {:.4} mN ({:.1} g)", r.lift_mean * 1e3, r.lift_mean / GRAM_FORCE);
    println!("mean drive power: {:.4} mW", r.drive_power_mean * 1e3);
    println!("RMS drive torque: {:.4} mN·m", r.drive_torque_rms * 1e3);
    let cycles: Vec<String> = r.cycle_lift.iter().map(|l| format!("{:.4}", l * 1e3)).collect();
    println!("per-cycle lift (mN): {}", cycles.join(" "));
    if r.diagnostics.hard_stop_hits > 0 {
        println!("joint stop contacts: {}", r.diagnostics.hard_stop_hits);
    }
    if let Some(path) = export {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
        }
        export_timeseries(&r, path)?;
        println!("time series: {}", path.display());
    }
    Ok(())
}

fn cmd_express(path: &Path, c: &EvolutionConfig, out: &Path, bmax: Option<usize>, smax: Option<f64>) -> Result<(), Failure> {
    let g = Genotype::deserialize(&read(path)?).map_err(|e| genotype_error(path, e))?;
    let w = express(&g, &c.ranges());
    let (b, s) = (w.blade_count(), wing_span(&w));
    println!("label: {}", w.label);
    println!("B = {b}");
    println!("S = {s:.3} mm");
    println!("{:>5} {:>10} {:>10} {:>12} {:>12}", "blade", "station_mm", "chord_mm", "k_twist", "k_bend");
    for (i, (blade, station)) in w.blades().iter().zip(w.stations()).enumerate() {
        println!("{:>5} {:>10.3} {:>10.3} {:>12.4e} {:>12.4e}", i + 1, station, blade.chord, blade.k_twist, blade.k_bend);
    }
    if let (Some(bm), Some(sm)) = (bmax, smax) {
        let cms = compute_cms(b, s, bm, sm).map_err(|e| Failure::Usage(e.to_string()))?;
        println!("C_MS = {cms:.4}");
    }
    write(out, &w.to_json())?;
    println!("phenotype: {}", out.display());
    Ok(())
}

fn cmd_analyze(
    path: &Path,
    lmax: Option<f64>,
    bmax: Option<usize>,
    smax: Option<f64>,
    max_degree: usize,
    dir: &Path,
) -> Result<(), Failure> {
    let mut ds = ingest_transfers(path)?;
    if lmax.is_some() {
        ds.l_max_override = lmax;
    }
    if bmax.is_some() {
        ds.b_max_override = bmax;
    }
    if smax.is_some() {
        ds.s_max_override = smax;
    }
    let ds = annotate(&ds)?;
    println!("L_max = {} gf, B_max = {}, S_max = {} mm", ds.l_max(), ds.b_max(), ds.s_max());
    println!("{:<8} {:>3} {:>7} {:>7} {:>7} {:>7} {:>6}", "label", "B", "S_mm", "L_S_g", "L_R_g", "STR", "C_MS");
    for r in &ds.records {
        println!(
            "{:<8} {:>3} {:>7.1} {:>7.2} {:>7.2} {:>7.3} {:>6.3}",
            r.label,
            r.blade_count,
            r.span,
            r.lift_sim,
            r.lift_real_mean,
            r.str.unwrap_or(f64::NAN),
            r.cms.unwrap_or(f64::NAN)
        );
    }
    let fit = polyfit_str(&ds, max_degree)?;
    let env = gap_envelope(&ds)?;
    for (d, score) in &fit.scores {
        println!("degree {d}: AICc {score:.4}");
    }
    println!("selected degree: {}", fit.degree);
    let coef: Vec<String> = fit.coefficients.iter().map(|c| format!("{c:.6}")).collect();
    println!("coefficients (ascending): {}", coef.join(" "));
    match threshold_estimate(&fit) {
        Some(t) => println!("threshold C_MS: {t:.4}"),
        None => println!("threshold C_MS: none in [0, 1]"),
    }
    let files = export_gap_plot(&ds, &fit, &env, dir)?;
    println!("plot: {}", files.svg.display());
    Ok(())
}

fn cmd_manufacture(path: &Path, c: &EvolutionConfig, out: &Path) -> Result<(), Failure> {
    let w = load_design(path, c)?;
    let doc = match export_manufacture_spec(&w, &c.materials, &c.bounds()) {
        Ok(d) => d,
        Err(WingError::Infeasible(report)) => {
            let lines: Vec<String> = report
                .violations
                .iter()
                .map(|v| format!("  {}: {} (nearest feasible {})", v.parameter, v.actual, v.nearest))
                .collect();
            return Err(Failure::Usage(format!("{} is not manufacturable:\n{}", w.label, lines.join("\n"))));
        }
        Err(e) => return Err(Failure::Usage(e.to_string())),
    };
    print!("{}", doc.to_text());
    write(out, &doc.to_json())?;
    println!("document: {}", out.display());
    Ok(())
}
