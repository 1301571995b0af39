//! Root-driven serial chain of thin-plate blades.
//!
//! Each blade hangs from the leading-edge spar: in its body frame x is the
//! plate normal, y points outboard along the span and the chord runs from the
//! leading edge at z = 0 down to the trailing edge at z = -c. Blade `i` is
//! attached to its inboard neighbour (or the root hub) by a bending joint about
//! the parent's chord axis followed by a twisting joint about its own span
//! axis. The hub rotates about world z with a prescribed stroke angle.
//!
//! Joint accelerations come from `M(q) q̈ = τ_joint − h(q, q̇)` where `h` is the
//! recursive Newton–Euler inverse dynamics at zero joint acceleration
//! (including the prescribed stroke acceleration, gravity and the
//! quasi-static aerodynamic loads) and `M` is assembled from the joint
//! Jacobians. Integration is semi-implicit Euler (rates, then angles) with
//! the generalized forces linearized about the start of the step.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use super::blade::{blade_quasistatic_wrench, BladeKinematics};
use super::coeffs::CoefficientTable;
use super::{FlapProfile, SimConfig, SimError};
use crate::wing::{wing_mass_model, MaterialConfig, WingPhenotype};

/// Joint hard stop (rad).
pub const JOINT_LIMIT: f64 = FRAC_PI_2;

#[derive(Debug, Clone)]
struct ChainBlade {
    span: f64,
    chord: f64,
    k_twist: f64,
    k_bend: f64,
    mass: f64,
    com: Vector3<f64>,
    inertia: Matrix3<f64>,
    centroid: Vector3<f64>,
}

/// Generalized state. Joint coordinates are ordered `[bend_0, twist_0,
/// bend_1, twist_1, ...]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WingState {
    pub time: f64,
    pub root_angle: f64,
    pub root_rate: f64,
    pub q: Vec<f64>,
    pub qd: Vec<f64>,
}

impl WingState {
    pub fn twist(&self, blade: usize) -> f64 {
        self.q[2 * blade + 1]
    }

    pub fn bend(&self, blade: usize) -> f64 {
        self.q[2 * blade]
    }

    pub fn twist_rate(&self, blade: usize) -> f64 {
        self.qd[2 * blade + 1]
    }

    pub fn bend_rate(&self, blade: usize) -> f64 {
        self.qd[2 * blade]
    }
}

/// Measurements taken at the start of a step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSample {
    pub time: f64,
    pub root_angle: f64,
    pub root_rate: f64,
    /// Force exerted by the wing on the base (N).
    pub force: Vector3<f64>,
    /// Torque exerted by the wing on the base, about the root (N·m).
    pub torque: Vector3<f64>,
    /// Actuator torque about the stroke axis (N·m).
    pub drive_torque: f64,
    /// Rate of work done by aerodynamic forces on the wing (W, usually negative).
    pub aero_power: f64,
    /// Rate of energy removed by joint damping (W, non-negative).
    pub damping_power: f64,
    pub joints: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energy {
    pub kinetic: f64,
    pub spring: f64,
    pub gravity: f64,
}

impl Energy {
    pub fn total(&self) -> f64 {
        self.kinetic + self.spring + self.gravity
    }
}

/// Sensitivities of the generalized joint forces used by the implicit step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepJacobians {
    q: DMatrix<f64>,
    qd: DMatrix<f64>,
}

#[derive(Debug, Clone)]
struct LinkKin {
    rot: Matrix3<f64>,
    origin: Vector3<f64>,
    omega: Vector3<f64>,
    alpha: Vector3<f64>,
    vel: Vector3<f64>,
    acc: Vector3<f64>,
    bend_axis: Vector3<f64>,
    twist_axis: Vector3<f64>,
}

struct Inverse {
    torques: Vec<f64>,
    root_force: Vector3<f64>,
    root_moment: Vector3<f64>,
}

/// Simulation model of one wing under one flapping profile.
#[derive(Debug, Clone)]
pub struct WingDynamics<'t> {
    blades: Vec<ChainBlade>,
    profile: FlapProfile,
    gravity: Vector3<f64>,
    damping: f64,
    rho: f64,
    x0_hat: f64,
    dt: f64,
    table: &'t CoefficientTable,
}

fn rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn rot_y(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

impl<'t> WingDynamics<'t> {
    pub fn new(
        w: &WingPhenotype,
        m: &MaterialConfig,
        profile: &FlapProfile,
        config: &SimConfig,
        table: &'t CoefficientTable,
    ) -> Self {
        let masses = wing_mass_model(w, m);
        let blades = w
            .blades()
            .iter()
            .zip(masses)
            .map(|(b, bm)| ChainBlade {
                span: b.span_offset * 1e-3,
                chord: b.chord * 1e-3,
                k_twist: b.k_twist,
                k_bend: b.k_bend,
                mass: bm.mass,
                com: bm.com,
                inertia: bm.inertia,
                centroid: Vector3::new(0.0, 0.5 * b.span_offset * 1e-3, -0.5 * b.chord * 1e-3),
            })
            .collect();
        Self {
            blades,
            profile: *profile,
            gravity: Vector3::new(0.0, 0.0, -config.gravity),
            damping: config.joint_damping,
            rho: config.rho_air,
            x0_hat: config.pitch_axis,
            dt: config.dt,
            table,
        }
    }

    pub fn dof(&self) -> usize {
        2 * self.blades.len()
    }

    pub fn initial_state(&self) -> WingState {
        let (root_angle, root_rate, _) = self.profile.kinematics(0.0);
        WingState { time: 0.0, root_angle, root_rate, q: vec![0.0; self.dof()], qd: vec![0.0; self.dof()] }
    }

    fn forward(&self, root: (f64, f64, f64), q: &[f64], qd: &[f64], qdd: &[f64]) -> Vec<LinkKin> {
        let (theta, theta_d, theta_dd) = root;
        let mut out: Vec<LinkKin> = Vec::with_capacity(self.blades.len());
        let mut parent_rot = rot_z(theta);
        let mut parent_omega = Vector3::z() * theta_d;
        let mut parent_alpha = Vector3::z() * theta_dd;
        let mut origin = Vector3::zeros();
        let mut vel = Vector3::zeros();
        let mut acc = Vector3::zeros();
        for i in 0..self.blades.len() {
            if i > 0 {
                let r = parent_rot * Vector3::new(0.0, self.blades[i - 1].span, 0.0);
                origin += r;
                acc += parent_alpha.cross(&r) + parent_omega.cross(&parent_omega.cross(&r));
                vel += parent_omega.cross(&r);
            }
            let (bend, twist) = (q[2 * i], q[2 * i + 1]);
            let (bend_d, twist_d) = (qd[2 * i], qd[2 * i + 1]);
            let (bend_dd, twist_dd) = (qdd[2 * i], qdd[2 * i + 1]);
            let bend_axis = parent_rot.column(2).into_owned();
            let mid_rot = parent_rot * rot_z(bend);
            let twist_axis = mid_rot.column(1).into_owned();
            let rot = mid_rot * rot_y(twist);
            let mid_omega = parent_omega + bend_axis * bend_d;
            let omega = mid_omega + twist_axis * twist_d;
            let alpha = parent_alpha
                + bend_axis * bend_dd
                + parent_omega.cross(&(bend_axis * bend_d))
                + twist_axis * twist_dd
                + mid_omega.cross(&(twist_axis * twist_d));
            out.push(LinkKin { rot, origin, omega, alpha, vel, acc, bend_axis, twist_axis });
            parent_rot = rot;
            parent_omega = omega;
            parent_alpha = alpha;
        }
        out
    }

    fn centroid_kinematics(&self, b: &ChainBlade, k: &LinkKin) -> (Vector3<f64>, BladeKinematics) {
        let r = k.rot * b.centroid;
        let span_axis = k.rot.column(1).into_owned();
        let kin = BladeKinematics {
            velocity: k.vel + k.omega.cross(&r),
            span_axis,
            leading_edge: k.rot.column(2).into_owned(),
            pitch_rate: k.omega.dot(&span_axis),
        };
        (k.origin + r, kin)
    }

    /// Aerodynamic force on every blade, its application point and power.
    fn aero_loads(&self, kin: &[LinkKin]) -> (Vec<(Vector3<f64>, Vector3<f64>)>, f64) {
        let mut power = 0.0;
        let loads = self
            .blades
            .iter()
            .zip(kin)
            .map(|(b, k)| {
                let (point, bk) = self.centroid_kinematics(b, k);
                let w = blade_quasistatic_wrench(&bk, b.chord, b.span, self.table, self.rho, self.x0_hat);
                power += w.force.dot(&bk.velocity);
                (point, w.force)
            })
            .collect();
        (loads, power)
    }

    fn inverse(&self, kin: &[LinkKin], loads: &[(Vector3<f64>, Vector3<f64>)]) -> Inverse {
        let n = self.blades.len();
        let mut torques = vec![0.0; 2 * n];
        let mut f_child = Vector3::zeros();
        let mut n_child = Vector3::zeros();
        let mut child_origin = Vector3::zeros();
        for i in (0..n).rev() {
            let b = &self.blades[i];
            let k = &kin[i];
            let d = k.rot * b.com;
            let a_c = k.acc + k.alpha.cross(&d) + k.omega.cross(&k.omega.cross(&d));
            let inertia = k.rot * b.inertia * k.rot.transpose();
            let (point, f_aero) = loads[i];
            let com = k.origin + d;
            let force = a_c * b.mass - self.gravity * b.mass - f_aero;
            let moment = inertia * k.alpha + k.omega.cross(&(inertia * k.omega)) - (point - com).cross(&f_aero);
            let mut n_i = moment + d.cross(&force);
            if i + 1 < n {
                n_i += n_child + (child_origin - k.origin).cross(&f_child);
            }
            let f_i = force + f_child;
            torques[2 * i] = k.bend_axis.dot(&n_i);
            torques[2 * i + 1] = k.twist_axis.dot(&n_i);
            f_child = f_i;
            n_child = n_i;
            child_origin = k.origin;
        }
        Inverse { torques, root_force: f_child, root_moment: n_child }
    }

    fn mass_matrix(&self, kin: &[LinkKin]) -> DMatrix<f64> {
        let n = self.blades.len();
        let dof = 2 * n;
        let coms: Vec<Vector3<f64>> = self.blades.iter().zip(kin).map(|(b, k)| k.origin + k.rot * b.com).collect();
        let inertias: Vec<Matrix3<f64>> =
            self.blades.iter().zip(kin).map(|(b, k)| k.rot * b.inertia * k.rot.transpose()).collect();
        let axis = |j: usize| if j % 2 == 0 { kin[j / 2].bend_axis } else { kin[j / 2].twist_axis };
        let mut m = DMatrix::zeros(dof, dof);
        for j in 0..dof {
            for l in j..dof {
                let (aj, al) = (axis(j), axis(l));
                let (pj, pl) = (kin[j / 2].origin, kin[l / 2].origin);
                let mut sum = 0.0;
                for k in (l / 2)..n {
                    let vj = aj.cross(&(coms[k] - pj));
                    let vl = al.cross(&(coms[k] - pl));
                    sum += self.blades[k].mass * vj.dot(&vl) + aj.dot(&(inertias[k] * al));
                }
                m[(j, l)] = sum;
                m[(l, j)] = sum;
            }
        }
        m
    }

    /// Generalized force `τ_joint − h` (springs, damping, gravity, aero and
    /// velocity products) at zero joint acceleration.
    fn generalized_force(&self, root: (f64, f64, f64), q: &[f64], qd: &[f64]) -> Vec<f64> {
        let zero = vec![0.0; self.dof()];
        let kin = self.forward(root, q, qd, &zero);
        let bias = self.inverse(&kin, &self.aero_loads(&kin).0);
        let tau = self.joint_torques(q, qd);
        tau.iter().zip(&bias.torques).map(|(t, h)| t - h).collect()
    }

    /// `(∂G/∂q, ∂G/∂q̇)` by central differences. Central rather than
    /// one-sided so that the mirrored stroke yields the same matrices exactly.
    fn force_jacobians(&self, root: (f64, f64, f64), q: &[f64], qd: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
        let dof = self.dof();
        let mut jq = DMatrix::zeros(dof, dof);
        let mut jv = DMatrix::zeros(dof, dof);
        let mut x = q.to_vec();
        let mut v = qd.to_vec();
        for j in 0..dof {
            let h = 1e-7 * (1.0 + q[j].abs());
            x[j] = q[j] + h;
            let plus = self.generalized_force(root, &x, qd);
            x[j] = q[j] - h;
            let minus = self.generalized_force(root, &x, qd);
            x[j] = q[j];
            for i in 0..dof {
                jq[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
            }
            let h = 1e-6 * (1.0 + qd[j].abs());
            v[j] = qd[j] + h;
            let plus = self.generalized_force(root, q, &v);
            v[j] = qd[j] - h;
            let minus = self.generalized_force(root, q, &v);
            v[j] = qd[j];
            for i in 0..dof {
                jv[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
            }
        }
        (jq, jv)
    }

    fn joint_torques(&self, q: &[f64], qd: &[f64]) -> Vec<f64> {
        self.blades
            .iter()
            .enumerate()
            .flat_map(|(i, b)| {
                [
                    -b.k_bend * q[2 * i] - self.damping * qd[2 * i],
                    -b.k_twist * q[2 * i + 1] - self.damping * qd[2 * i + 1],
                ]
            })
            .collect()
    }

    /// Solve `a·q̈ = rhs`, holding at rest every joint that sits on its stop
    /// and would otherwise accelerate into it. The stop reaction then shows up
    /// in the measured base wrench.
    fn solve_with_stops(&self, a: DMatrix<f64>, rhs: DVector<f64>, q: &[f64], qd: &[f64]) -> Option<DVector<f64>> {
        let dof = self.dof();
        let mut locked = vec![false; dof];
        loop {
            let mut m = a.clone();
            let mut b = rhs.clone();
            for j in (0..dof).filter(|j| locked[*j]) {
                m.row_mut(j).fill(0.0);
                m.column_mut(j).fill(0.0);
                m[(j, j)] = 1.0;
                b[j] = 0.0;
            }
            let x = m.lu().solve(&b)?;
            let mut changed = false;
            for j in 0..dof {
                if !locked[j] && q[j].abs() == JOINT_LIMIT && qd[j] == 0.0 && x[j] * q[j] > 0.0 {
                    locked[j] = true;
                    changed = true;
                }
            }
            if !changed {
                return Some(x);
            }
        }
    }

    /// Force Jacobians `(∂G/∂q, ∂G/∂q̇)` at state `s`, for reuse across steps.
    pub fn linearize(&self, s: &WingState) -> StepJacobians {
        let (q, qd) = self.force_jacobians(self.profile.kinematics(s.time), &s.q, &s.qd);
        StepJacobians { q, qd }
    }

    /// Joint accelerations and the start-of-step measurement.
    pub fn accelerations(&self, s: &WingState) -> Result<(Vec<f64>, StepSample), SimError> {
        self.accelerations_with(s, &self.linearize(s))
    }

    fn accelerations_with(&self, s: &WingState, jac: &StepJacobians) -> Result<(Vec<f64>, StepSample), SimError> {
        let root = self.profile.kinematics(s.time);
        let zero = vec![0.0; self.dof()];
        let kin = self.forward(root, &s.q, &s.qd, &zero);
        let (loads, aero_power) = self.aero_loads(&kin);
        let bias = self.inverse(&kin, &loads);
        let tau = self.joint_torques(&s.q, &s.qd);
        let rhs = DVector::from_iterator(self.dof(), tau.iter().zip(&bias.torques).map(|(t, h)| t - h));
        let abort = |s: &WingState, qdd: Option<&DVector<f64>>| {
            let blade = qdd
                .and_then(|v| v.iter().position(|x| !x.is_finite()))
                .or_else(|| s.q.iter().chain(&s.qd).position(|x| !x.is_finite()))
                .map_or(0, |j| (j % self.dof().max(1)) / 2);
            SimError::Abort { time: s.time, blade }
        };
        // Linearized implicit step in the generalized forces: the wrench is
        // still frozen at the start of the step, but its sensitivity to the
        // end-of-step state enters the step matrix. The very light outboard
        // blades are unstable under a fully explicit treatment.
        let qd_vec = DVector::from_column_slice(&s.qd);
        let rhs = rhs + &jac.q * &qd_vec * self.dt;
        let a = self.mass_matrix(&kin) - &jac.qd * self.dt - &jac.q * (self.dt * self.dt);
        let qdd = self.solve_with_stops(a, rhs, &s.q, &s.qd).ok_or_else(|| abort(s, None))?;
        if qdd.iter().any(|x| !x.is_finite()) {
            return Err(abort(s, Some(&qdd)));
        }
        let qdd: Vec<f64> = qdd.iter().copied().collect();
        let full = self.forward(root, &s.q, &s.qd, &qdd);
        let measured = self.inverse(&full, &loads);
        let damping_power = s.qd.iter().map(|v| self.damping * v * v).sum();
        let sample = StepSample {
            time: s.time,
            root_angle: root.0,
            root_rate: root.1,
            force: -measured.root_force,
            torque: -measured.root_moment,
            drive_torque: measured.root_moment.z,
            aero_power,
            damping_power,
            joints: s.q.clone(),
        };
        Ok((qdd, sample))
    }

    /// Advance one step: rates first, then angles, then the hard stop.
    pub fn step(&self, s: &WingState) -> Result<(WingState, StepSample), SimError> {
        self.step_with(s, &self.linearize(s))
    }

    /// `step` with force Jacobians computed at an earlier state.
    pub fn step_with(&self, s: &WingState, jac: &StepJacobians) -> Result<(WingState, StepSample), SimError> {
        let (qdd, sample) = self.accelerations_with(s, jac)?;
        let time = s.time + self.dt;
        let (root_angle, root_rate, _) = self.profile.kinematics(time);
        let mut next = WingState { time, root_angle, root_rate, q: s.q.clone(), qd: s.qd.clone() };
        for j in 0..self.dof() {
            next.qd[j] += self.dt * qdd[j];
            next.q[j] += self.dt * next.qd[j];
            if next.q[j].abs() > JOINT_LIMIT {
                next.q[j] = next.q[j].clamp(-JOINT_LIMIT, JOINT_LIMIT);
                next.qd[j] = 0.0;
            }
        }
        if next.q.iter().chain(&next.qd).any(|x| !x.is_finite()) {
            return Err(SimError::Abort { time: s.time, blade: 0 });
        }
        Ok((next, sample))
    }

    /// Static vertical base force with the wing hanging still at the t = 0 pose.
    pub fn static_tare(&self) -> f64 {
        let zero = vec![0.0; self.dof()];
        let kin = self.forward((0.0, 0.0, 0.0), &zero, &zero, &zero);
        let loads = vec![(Vector3::zeros(), Vector3::zeros()); self.blades.len()];
        -self.inverse(&kin, &loads).root_force.z
    }

    pub fn energy(&self, s: &WingState) -> Energy {
        let root = self.profile.kinematics(s.time);
        let zero = vec![0.0; self.dof()];
        let kin = self.forward(root, &s.q, &s.qd, &zero);
        let mut kinetic = 0.0;
        let mut gravity = 0.0;
        for (b, k) in self.blades.iter().zip(&kin) {
            let d = k.rot * b.com;
            let v = k.vel + k.omega.cross(&d);
            let inertia = k.rot * b.inertia * k.rot.transpose();
            kinetic += 0.5 * b.mass * v.norm_squared() + 0.5 * k.omega.dot(&(inertia * k.omega));
            gravity -= b.mass * self.gravity.dot(&(k.origin + d));
        }
        let spring = self
            .blades
            .iter()
            .enumerate()
            .map(|(i, b)| 0.5 * b.k_bend * s.q[2 * i].powi(2) + 0.5 * b.k_twist * s.q[2 * i + 1].powi(2))
            .sum();
        Energy { kinetic, spring, gravity }
    }

    /// Yaw of each blade's span axis about world z (rad).
    pub fn blade_yaw(&self, s: &WingState) -> Vec<f64> {
        let root = self.profile.kinematics(s.time);
        let zero = vec![0.0; self.dof()];
        self.forward(root, &s.q, &s.qd, &zero)
            .iter()
            .map(|k| {
                let span = k.rot.column(1);
                (-span[0]).atan2(span[1])
            })
            .collect()
    }
}
