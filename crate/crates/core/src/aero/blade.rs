//! Quasi-static translational and rotational force on one flat-plate blade.

use std::f64::consts::PI;

use nalgebra::Vector3;

use super::coeffs::CoefficientTable;

/// Instantaneous state of a blade as seen by the aerodynamic model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BladeKinematics {
    /// Velocity of the area centroid (m/s).
    pub velocity: Vector3<f64>,
    /// Unit spanwise axis, pointing outboard.
    pub span_axis: Vector3<f64>,
    /// Unit chord axis pointing from the trailing edge to the leading edge.
    pub leading_edge: Vector3<f64>,
    /// Angular rate about the spanwise axis (rad/s).
    pub pitch_rate: f64,
}

impl BladeKinematics {
    /// Plate normal, `span × leading_edge`.
    pub fn normal(&self) -> Vector3<f64> {
        self.span_axis.cross(&self.leading_edge)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BladeWrench {
    /// Total force applied at the area centroid (N).
    pub force: Vector3<f64>,
    /// Torque about the centroid. Zero: no centre-of-pressure travel.
    pub torque: Vector3<f64>,
    /// Component of the force along the plate normal.
    pub normal: f64,
    /// Component along the chord (leading-edge direction).
    pub axial: f64,
    /// Incidence used for the coefficient lookup (rad).
    pub alpha: f64,
}

impl BladeWrench {
    fn zero() -> Self {
        Self { force: Vector3::zeros(), torque: Vector3::zeros(), normal: 0.0, axial: 0.0, alpha: 0.0 }
    }
}

/// Rotational force coefficient for a pitch axis at `x0_hat` chords behind
/// the leading edge.
pub fn rotational_coefficient(x0_hat: f64) -> f64 {
    PI * (0.75 - x0_hat)
}

/// Translational lift/drag from the coefficient table plus the rotational
/// force `C_R·rho·U·c²·dr·ω` along the plate normal. `chord` and `width`
/// are in metres.
pub fn blade_quasistatic_wrench(
    kin: &BladeKinematics,
    chord: f64,
    width: f64,
    table: &CoefficientTable,
    rho: f64,
    x0_hat: f64,
) -> BladeWrench {
    let span = kin.span_axis;
    let u_vec = kin.velocity - span * kin.velocity.dot(&span);
    let u = u_vec.norm();
    if u == 0.0 {
        return BladeWrench::zero();
    }
    let normal = kin.normal();
    let forward = kin.leading_edge;
    let alpha = u_vec.dot(&normal).atan2(u_vec.dot(&forward));
    let (cl, cd) = table.lookup(alpha);
    let area = chord * width;
    let q = 0.5 * rho * area * u * u;
    let u_hat = u_vec / u;
    let lift_dir = u_hat.cross(&span);
    let translational = lift_dir * (q * cl) - u_hat * (q * cd);
    let rotational = normal * (rotational_coefficient(x0_hat) * rho * u * chord * chord * width * kin.pitch_rate);
    let force = translational + rotational;
    BladeWrench {
        force,
        torque: Vector3::zeros(),
        normal: force.dot(&normal),
        axial: force.dot(&forward),
        alpha,
    }
}
