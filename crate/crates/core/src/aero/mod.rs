//! Quasi-static blade-element simulation of an elastic flapping wing.

mod blade;
mod coeffs;
mod dynamics;

pub use blade::{blade_quasistatic_wrench, rotational_coefficient, BladeKinematics, BladeWrench};
pub use coeffs::CoefficientTable;
pub use dynamics::{Energy, StepJacobians, StepSample, WingDynamics, WingState, JOINT_LIMIT};

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::wing::{MaterialConfig, WingPhenotype};

/// Standard gravity used to convert grams-force at the reporting layer.
pub const GRAM_FORCE: f64 = 9.81e-3;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("simulation config: {0}")]
    Config(String),
    #[error("simulation aborted at t = {time:.6} s near blade {blade}: non-finite state")]
    Abort { time: f64, blade: usize },
    #[error("coefficient table: {0}")]
    Table(String),
    #[error("i/o: {0}")]
    Io(String),
}

/// Sinusoidal stroke about the vertical axis at the wing root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlapProfile {
    /// Hz
    pub frequency: f64,
    /// Stroke amplitude (rad). Negative values reverse the stroke.
    pub amplitude: f64,
}

impl Default for FlapProfile {
    fn default() -> Self {
        Self { frequency: 5.0, amplitude: 40f64.to_radians() }
    }
}

impl FlapProfile {
    /// Angle, rate and acceleration at time `t`.
    pub fn kinematics(&self, t: f64) -> (f64, f64, f64) {
        let w = 2.0 * PI * self.frequency;
        let (s, c) = (w * t).sin_cos();
        (self.amplitude * s, self.amplitude * w * c, -self.amplitude * w * w * s)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.frequency.is_finite() && self.frequency > 0.0) {
            return Err(SimError::Config(format!("frequency must be positive, got {}", self.frequency)));
        }
        if !(self.amplitude.abs() <= 70f64.to_radians()) {
            return Err(SimError::Config(format!("amplitude {} rad exceeds 70 degrees", self.amplitude)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// s
    pub dt: f64,
    /// s
    pub duration: f64,
    /// kg/m³
    pub rho_air: f64,
    /// m/s², acting along −z
    pub gravity: f64,
    /// N·m·s/rad per joint axis
    pub joint_damping: f64,
    pub settle_cycles: usize,
    pub average_cycles: usize,
    /// Pitch axis position behind the leading edge as a fraction of chord.
    pub pitch_axis: f64,
    /// Steps between refreshes of the implicit-step force Jacobians.
    pub jacobian_interval: usize,
    /// Keep the full base wrench time series in the result.
    pub record_series: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            duration: 2.0,
            rho_air: 1.225,
            gravity: 9.81,
            joint_damping: 1e-5,
            settle_cycles: 5,
            average_cycles: 5,
            pitch_axis: 0.0,
            jacobian_interval: 4,
            record_series: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self, profile: &FlapProfile) -> Result<(), SimError> {
        profile.validate()?;
        let positive = [self.dt, self.duration, self.rho_air];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(SimError::Config("dt, duration and rho_air must be positive".into()));
        }
        if !(self.gravity >= 0.0 && self.joint_damping >= 0.0) {
            return Err(SimError::Config("gravity and joint_damping must be non-negative".into()));
        }
        if self.average_cycles == 0 || self.jacobian_interval == 0 {
            return Err(SimError::Config("average_cycles and jacobian_interval must be at least 1".into()));
        }
        if self.dt * profile.frequency > 1.0 / 200.0 + 1e-15 {
            return Err(SimError::Config(format!(
                "dt = {} gives fewer than 200 steps per flap cycle at {} Hz",
                self.dt, profile.frequency
            )));
        }
        let needed = (self.settle_cycles + self.average_cycles) as f64 / profile.frequency;
        if self.duration + 1e-12 < needed {
            return Err(SimError::Config(format!(
                "duration {} s is shorter than settle + average cycles ({needed} s)",
                self.duration
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    fn steps_per_cycle(&self, profile: &FlapProfile) -> usize {
        (1.0 / (profile.frequency * self.dt)).round() as usize
    }
}

/// Sampled base wrench and joint angles, one row per step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    pub time: Vec<f64>,
    pub root_angle: Vec<f64>,
    pub force: Vec<[f64; 3]>,
    pub torque: Vec<[f64; 3]>,
    /// Per-step joint coordinates `[bend_0, twist_0, ...]`.
    pub joints: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct SimDiagnostics {
    pub steps: usize,
    pub max_joint_angle: f64,
    pub hard_stop_hits: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// Mean aerodynamic vertical force over the averaging window (N).
    pub lift_mean: f64,
    /// Mean positive drive power (W).
    pub drive_power_mean: f64,
    /// RMS drive torque (N·m).
    pub drive_torque_rms: f64,
    /// Mean lift of each averaged cycle (N).
    pub cycle_lift: Vec<f64>,
    /// Static vertical base force subtracted from the reading (N).
    pub tare: f64,
    pub series: Option<TimeSeries>,
    pub diagnostics: SimDiagnostics,
}

/// Simulate with the shipped flat-plate coefficient table.
pub fn simulate(
    w: &WingPhenotype,
    m: &MaterialConfig,
    profile: &FlapProfile,
    config: &SimConfig,
) -> Result<SimResult, SimError> {
    simulate_with_table(w, m, profile, config, CoefficientTable::flat_plate())
}

pub fn simulate_with_table(
    w: &WingPhenotype,
    m: &MaterialConfig,
    profile: &FlapProfile,
    config: &SimConfig,
    table: &CoefficientTable,
) -> Result<SimResult, SimError> {
    config.validate(profile)?;
    let model = WingDynamics::new(w, m, profile, config, table);
    let steps = config.steps();
    let per_cycle = config.steps_per_cycle(profile);
    let window = per_cycle * config.average_cycles;
    if window > steps {
        return Err(SimError::Config("averaging window longer than the run".into()));
    }
    let window_start = steps - window;
    let tare = model.static_tare();

    let mut series = config.record_series.then(|| TimeSeries {
        time: Vec::with_capacity(steps),
        root_angle: Vec::with_capacity(steps),
        force: Vec::with_capacity(steps),
        torque: Vec::with_capacity(steps),
        joints: Vec::with_capacity(steps),
    });
    let mut diagnostics = SimDiagnostics { steps, ..SimDiagnostics::default() };
    let mut cycle_sums = vec![0.0; config.average_cycles];
    let (mut power_sum, mut torque_sq_sum) = (0.0, 0.0);

    let mut state = model.initial_state();
    let mut jac = model.linearize(&state);
    for k in 0..steps {
        // integer time keeps the clock free of accumulated rounding
        state.time = k as f64 * config.dt;
        if k % config.jacobian_interval == 0 {
            jac = model.linearize(&state);
        }
        let (next, sample) = model.step_with(&state, &jac)?;
        if k >= window_start {
            let cycle = (k - window_start) / per_cycle;
            cycle_sums[cycle] += sample.force.z - tare;
            power_sum += (sample.drive_torque * sample.root_rate).max(0.0);
            torque_sq_sum += sample.drive_torque * sample.drive_torque;
        }
        for (before, after) in state.q.iter().zip(&next.q) {
            diagnostics.max_joint_angle = diagnostics.max_joint_angle.max(after.abs());
            if after.abs() == JOINT_LIMIT && before.abs() != JOINT_LIMIT {
                diagnostics.hard_stop_hits += 1;
            }
        }
        if let Some(ts) = series.as_mut() {
            ts.time.push(sample.time);
            ts.root_angle.push(sample.root_angle);
            ts.force.push(sample.force.into());
            ts.torque.push(sample.torque.into());
            ts.joints.push(sample.joints);
        }
        state = next;
    }
    let cycle_lift: Vec<f64> = cycle_sums.iter().map(|s| s / per_cycle as f64).collect();
    Ok(SimResult {
        lift_mean: cycle_lift.iter().sum::<f64>() / cycle_lift.len() as f64,
        drive_power_mean: power_sum / window as f64,
        drive_torque_rms: (torque_sq_sum / window as f64).sqrt(),
        cycle_lift,
        tare,
        series,
        diagnostics,
    })
}

/// Header of the time-series CSV for a wing with `blades` blades.
pub fn timeseries_header(blades: usize) -> Vec<String> {
    let mut h: Vec<String> = ["t", "root_angle", "Fx", "Fy", "Fz", "Tx", "Ty", "Tz"].iter().map(|s| s.to_string()).collect();
    for i in 0..blades {
        h.push(format!("twist_{i}"));
        h.push(format!("bend_{i}"));
    }
    h
}

/// Write the recorded series as CSV, values at 9 significant digits.
pub fn export_timeseries(result: &SimResult, path: &Path) -> Result<(), SimError> {
    let ts = result
        .series
        .as_ref()
        .ok_or_else(|| SimError::Config("result has no recorded time series (set record_series)".into()))?;
    let blades = ts.joints.first().map_or(0, |j| j.len() / 2);
    let io = |e: std::io::Error| SimError::Io(format!("{}: {e}", path.display()));
    let file = std::fs::File::create(path).map_err(io)?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "{}", timeseries_header(blades).join(",")).map_err(io)?;
    let fmt = |v: f64| format!("{v:.8e}");
    for k in 0..ts.len() {
        let mut row = vec![fmt(ts.time[k]), fmt(ts.root_angle[k])];
        row.extend(ts.force[k].iter().chain(&ts.torque[k]).map(|v| fmt(*v)));
        for i in 0..blades {
            row.push(fmt(ts.joints[k][2 * i + 1]));
            row.push(fmt(ts.joints[k][2 * i]));
        }
        writeln!(out, "{}", row.join(",")).map_err(io)?;
    }
    out.flush().map_err(io)
}
