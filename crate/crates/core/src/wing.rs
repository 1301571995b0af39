//! Wing phenotype: blade geometry and stiffness, mass properties, the
//! morphological simulation complexity measure, feasibility checking and
//! the manufacture document.
//!
//! Lengths in a phenotype are millimetres; stiffnesses are N·m/rad. Mass
//! properties are returned in SI units because the simulator consumes them.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Version tag written into every manufacture document.
pub const MANUFACTURE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum WingError {
    #[error("a wing needs at least one blade")]
    NoBlades,
    #[error("blade {index}: {field} must be positive and finite, got {value}")]
    NonPositive { index: usize, field: &'static str, value: f64 },
    #[error("complexity domain error: {0}")]
    Domain(String),
    #[error("wing is not manufacturable (feasibility distance {:.4})", .0.distance)]
    Infeasible(FeasibilityReport),
    #[error("material config: {0}")]
    Material(String),
}

/// One flat-plate blade element, described relative to its inboard neighbour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BladeSpec {
    /// Spanwise width of the blade, i.e. distance from the inboard rib (mm).
    pub span_offset: f64,
    /// Leading edge to trailing edge (mm).
    pub chord: f64,
    /// Chordwise twisting joint stiffness (N·m/rad).
    pub k_twist: f64,
    /// Spanwise bending joint stiffness (N·m/rad).
    pub k_bend: f64,
}

impl BladeSpec {
    fn check(&self, index: usize) -> Result<(), WingError> {
        let fields = [
            ("span_offset", self.span_offset),
            ("chord", self.chord),
            ("k_twist", self.k_twist),
            ("k_bend", self.k_bend),
        ];
        for (field, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(WingError::NonPositive { index, field, value });
            }
        }
        Ok(())
    }
}

/// Ordered root-to-tip list of blades.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WingPhenotype {
    blades: Vec<BladeSpec>,
    pub label: String,
}

#[derive(Deserialize)]
struct RawPhenotype {
    blades: Vec<BladeSpec>,
    #[serde(default)]
    label: String,
}

impl<'de> Deserialize<'de> for WingPhenotype {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawPhenotype::deserialize(d)?;
        WingPhenotype::new(raw.blades, raw.label).map_err(serde::de::Error::custom)
    }
}

impl WingPhenotype {
    pub fn new(blades: Vec<BladeSpec>, label: impl Into<String>) -> Result<Self, WingError> {
        if blades.is_empty() {
            return Err(WingError::NoBlades);
        }
        for (i, b) in blades.iter().enumerate() {
            b.check(i)?;
        }
        Ok(Self { blades, label: label.into() })
    }

    pub fn blades(&self) -> &[BladeSpec] {
        &self.blades
    }

    /// B(m): number of blade elements.
    pub fn blade_count(&self) -> usize {
        self.blades.len()
    }

    /// Cumulative rib stations from the root (mm), one per blade.
    pub fn stations(&self) -> Vec<f64> {
        self.blades
            .iter()
            .scan(0.0, |acc, b| {
                *acc += b.span_offset;
                Some(*acc)
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("phenotype serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// S(m): total span in mm.
pub fn wing_span(w: &WingPhenotype) -> f64 {
    w.blades.iter().map(|b| b.span_offset).sum()
}

/// Morphological simulation complexity: mean of the normalized blade count
/// and normalized span.
pub fn compute_cms(blades: usize, span: f64, blades_max: usize, span_max: f64) -> Result<f64, WingError> {
    if blades == 0 || blades > blades_max {
        return Err(WingError::Domain(format!("blade count {blades} outside 1..={blades_max}")));
    }
    if !(span > 0.0 && span_max > 0.0 && span <= span_max) {
        return Err(WingError::Domain(format!("span {span} outside (0, {span_max}]")));
    }
    Ok(0.5 * (blades as f64 / blades_max as f64 + span / span_max))
}

/// Construction materials. Densities are SI; wire gauges and section length in mm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MaterialConfig {
    /// Skin mass per area (kg/m²). 5 µm Mylar at 1.39 g/cm³.
    pub skin_areal_density: f64,
    /// Leading-edge spar mass per length (kg/m). 0.8 mm carbon rod.
    pub spar_linear_density: f64,
    /// Available music wire diameters (mm), ascending.
    pub wire_gauges: Vec<f64>,
    /// Length of the rib section formed by the spring wire (mm).
    pub wire_section_length: f64,
    /// Wire shear modulus (Pa).
    pub shear_modulus: f64,
    /// Wire elastic modulus (Pa).
    pub elastic_modulus: f64,
}

impl Default for MaterialConfig {
    fn default() -> Self {
        Self {
            skin_areal_density: 6.95e-3,
            spar_linear_density: 0.8e-3,
            wire_gauges: vec![0.1, 0.13, 0.17],
            wire_section_length: 15.0,
            shear_modulus: 79.3e9,
            elastic_modulus: 200e9,
        }
    }
}

impl MaterialConfig {
    pub fn validate(&self) -> Result<(), WingError> {
        let scalars = [
            self.skin_areal_density,
            self.spar_linear_density,
            self.wire_section_length,
            self.shear_modulus,
            self.elastic_modulus,
        ];
        if scalars.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(WingError::Material("all material constants must be positive".into()));
        }
        if self.wire_gauges.is_empty() {
            return Err(WingError::Material("wire_gauges must not be empty".into()));
        }
        if self.wire_gauges.iter().any(|d| !(d.is_finite() && *d > 0.0))
            || self.wire_gauges.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(WingError::Material("wire_gauges must be positive and strictly ascending".into()));
        }
        Ok(())
    }

    /// Joint stiffness of a wire of diameter `diameter_mm` over the spring section.
    pub fn wire_stiffness(&self, diameter_mm: f64, mode: JointAxis) -> f64 {
        let d = diameter_mm * 1e-3;
        let length = self.wire_section_length * 1e-3;
        match mode {
            JointAxis::Twist => self.shear_modulus * (PI * d.powi(4) / 32.0) / length,
            JointAxis::Bend => self.elastic_modulus * (PI * d.powi(4) / 64.0) / length,
        }
    }

    /// Continuous stiffness range the design space explores for one axis:
    /// half the thinnest wire up to twice the thickest.
    pub fn stiffness_range(&self, mode: JointAxis) -> (f64, f64) {
        let thin = self.wire_gauges[0];
        let thick = *self.wire_gauges.last().expect("non-empty gauges");
        (
            0.5 * self.wire_stiffness(thin, mode),
            2.0 * self.wire_stiffness(thick, mode),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointAxis {
    Twist,
    Bend,
}

/// Mass properties of one blade in its body frame (x plate normal, y span,
/// z chord with the trailing edge at negative z; origin at the inboard
/// leading-edge corner).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BladeMass {
    /// kg
    pub mass: f64,
    /// Centre of mass in the body frame (m).
    pub com: Vector3<f64>,
    /// Inertia tensor about the centre of mass, body axes (kg·m²).
    pub inertia: Matrix3<f64>,
}

/// Per-blade mass and inertia: a thin rectangular skin plate plus a slender
/// spar rod along the leading edge.
pub fn wing_mass_model(w: &WingPhenotype, m: &MaterialConfig) -> Vec<BladeMass> {
    w.blades.iter().map(|b| blade_mass(b, m)).collect()
}

fn blade_mass(b: &BladeSpec, m: &MaterialConfig) -> BladeMass {
    let s = b.span_offset * 1e-3;
    let c = b.chord * 1e-3;
    let skin = m.skin_areal_density * c * s;
    let spar = m.spar_linear_density * s;
    let mass = skin + spar;

    let skin_com = Vector3::new(0.0, 0.5 * s, -0.5 * c);
    let spar_com = Vector3::new(0.0, 0.5 * s, 0.0);
    let com = if mass > 0.0 { (skin_com * skin + spar_com * spar) / mass } else { skin_com };

    let skin_inertia = Matrix3::from_diagonal(&Vector3::new(
        skin * (s * s + c * c) / 12.0,
        skin * c * c / 12.0,
        skin * s * s / 12.0,
    ));
    let spar_inertia = Matrix3::from_diagonal(&Vector3::new(spar * s * s / 12.0, 0.0, spar * s * s / 12.0));
    let inertia = skin_inertia
        + parallel_axis(skin, &(skin_com - com))
        + spar_inertia
        + parallel_axis(spar, &(spar_com - com));
    BladeMass { mass, com, inertia }
}

fn parallel_axis(mass: f64, r: &Vector3<f64>) -> Matrix3<f64> {
    (Matrix3::identity() * r.norm_squared() - r * r.transpose()) * mass
}

/// Total wing mass in kg.
pub fn total_mass(w: &WingPhenotype, m: &MaterialConfig) -> f64 {
    wing_mass_model(w, m).iter().map(|b| b.mass).sum()
}

/// Inclusive feasible range of every phenotype parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibleBounds {
    pub span_offset: (f64, f64),
    pub chord: (f64, f64),
    pub k_twist: (f64, f64),
    pub k_bend: (f64, f64),
}

impl FeasibleBounds {
    pub fn from_materials(m: &MaterialConfig) -> Self {
        Self {
            span_offset: (30.0, 150.0),
            chord: (10.0, 200.0),
            k_twist: m.stiffness_range(JointAxis::Twist),
            k_bend: m.stiffness_range(JointAxis::Bend),
        }
    }

    /// Project every blade parameter onto its range.
    pub fn clamp(&self, w: &WingPhenotype) -> WingPhenotype {
        let clamp = |v: f64, (lo, hi): (f64, f64)| v.clamp(lo, hi);
        let blades = w
            .blades
            .iter()
            .map(|b| BladeSpec {
                span_offset: clamp(b.span_offset, self.span_offset),
                chord: clamp(b.chord, self.chord),
                k_twist: clamp(b.k_twist, self.k_twist),
                k_bend: clamp(b.k_bend, self.k_bend),
            })
            .collect();
        WingPhenotype { blades, label: w.label.clone() }
    }
}

impl Default for FeasibleBounds {
    fn default() -> Self {
        Self::from_materials(&MaterialConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub parameter: String,
    pub actual: f64,
    pub nearest: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
    pub distance: f64,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Range-normalized Euclidean distance to the nearest feasible design.
pub fn validate_phenotype(w: &WingPhenotype, bounds: &FeasibleBounds) -> FeasibilityReport {
    let mut violations = Vec::new();
    let mut sum_sq = 0.0;
    for (i, b) in w.blades.iter().enumerate() {
        let params = [
            ("span_offset", b.span_offset, bounds.span_offset),
            ("chord", b.chord, bounds.chord),
            ("k_twist", b.k_twist, bounds.k_twist),
            ("k_bend", b.k_bend, bounds.k_bend),
        ];
        for (name, value, (lo, hi)) in params {
            let nearest = value.clamp(lo, hi);
            if nearest != value {
                let d = (nearest - value) / (hi - lo);
                sum_sq += d * d;
                violations.push(Violation {
                    parameter: format!("blades[{i}].{name}"),
                    actual: value,
                    nearest,
                });
            }
        }
    }
    FeasibilityReport { violations, distance: sum_sq.sqrt() }
}

/// Wire gauge whose stiffness is closest to `k_required` in log space.
pub fn nearest_wire_gauge(k_required: f64, m: &MaterialConfig, mode: JointAxis) -> f64 {
    let target = k_required.ln();
    m.wire_gauges
        .iter()
        .copied()
        .min_by(|a, b| {
            let da = (m.wire_stiffness(*a, mode).ln() - target).abs();
            let db = (m.wire_stiffness(*b, mode).ln() - target).abs();
            da.total_cmp(&db)
        })
        .expect("non-empty gauges")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RibEntry {
    pub rib: usize,
    /// Cumulative distance from the root (mm).
    pub station_mm: f64,
    pub chord_mm: f64,
    pub twist_required: f64,
    pub twist_gauge_mm: f64,
    pub twist_realized: f64,
    pub bend_required: f64,
    pub bend_gauge_mm: f64,
    pub bend_realized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BillItem {
    pub material: String,
    pub component: String,
    pub detail: String,
    pub quantity: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManufactureDocument {
    pub format_version: u32,
    pub label: String,
    pub blade_count: usize,
    pub total_span_mm: f64,
    pub estimated_mass_g: f64,
    pub ribs: Vec<RibEntry>,
    pub materials: Vec<BillItem>,
}

impl ManufactureDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Wing: {}  (format v{})", self.label, self.format_version);
        let _ = writeln!(
            out,
            "Blades: {}  Span: {:.1} mm  Estimated mass: {:.3} g",
            self.blade_count, self.total_span_mm, self.estimated_mass_g
        );
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:>4} {:>10} {:>9} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
            "rib", "station", "chord", "k_tw req", "tw wire", "k_tw real", "k_bd req", "bd wire", "k_bd real"
        );
        for r in &self.ribs {
            let _ = writeln!(
                out,
                "{:>4} {:>10.1} {:>9.1} {:>10.3e} {:>10.2} {:>10.3e} {:>10.3e} {:>10.2} {:>10.3e}",
                r.rib,
                r.station_mm,
                r.chord_mm,
                r.twist_required,
                r.twist_gauge_mm,
                r.twist_realized,
                r.bend_required,
                r.bend_gauge_mm,
                r.bend_realized
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "Materials:");
        for item in &self.materials {
            let _ = writeln!(out, "  {} ({}): {}, {}", item.material, item.component, item.detail, item.quantity);
        }
        out
    }
}

/// Rib-by-rib build sheet for a feasible wing.
pub fn export_manufacture_spec(
    w: &WingPhenotype,
    m: &MaterialConfig,
    bounds: &FeasibleBounds,
) -> Result<ManufactureDocument, WingError> {
    let report = validate_phenotype(w, bounds);
    if !report.is_feasible() {
        return Err(WingError::Infeasible(report));
    }
    let ribs = w
        .blades
        .iter()
        .zip(w.stations())
        .enumerate()
        .map(|(i, (b, station))| {
            let tw = nearest_wire_gauge(b.k_twist, m, JointAxis::Twist);
            let bd = nearest_wire_gauge(b.k_bend, m, JointAxis::Bend);
            RibEntry {
                rib: i + 1,
                station_mm: station,
                chord_mm: b.chord,
                twist_required: b.k_twist,
                twist_gauge_mm: tw,
                twist_realized: m.wire_stiffness(tw, JointAxis::Twist),
                bend_required: b.k_bend,
                bend_gauge_mm: bd,
                bend_realized: m.wire_stiffness(bd, JointAxis::Bend),
            }
        })
        .collect::<Vec<_>>();
    let span = wing_span(w);
    let gauges = m.wire_gauges.iter().map(|g| format!("{g}mm")).collect::<Vec<_>>().join(", ");
    let materials = vec![
        BillItem {
            material: "Carbon rod".into(),
            component: "spar".into(),
            detail: "0.8mm diameter".into(),
            quantity: format!("{span:.0} mm"),
        },
        BillItem {
            material: "Carbon rod".into(),
            component: "rib stiffeners".into(),
            detail: "0.4mm diameter".into(),
            quantity: format!("{:.0} mm", ribs.iter().map(|r| r.chord_mm).sum::<f64>()),
        },
        BillItem {
            material: "Stainless steel wire".into(),
            component: "rib spring".into(),
            detail: gauges,
            quantity: format!("{} x {:.0} mm sections", 2 * ribs.len(), m.wire_section_length),
        },
        BillItem {
            material: "Aluminised Mylar".into(),
            component: "skin".into(),
            detail: "5um".into(),
            quantity: format!(
                "{:.0} mm2",
                w.blades.iter().map(|b| b.chord * b.span_offset).sum::<f64>()
            ),
        },
        BillItem {
            material: "ABS plastic".into(),
            component: "wing root mount".into(),
            detail: "3D printed".into(),
            quantity: "1".into(),
        },
    ];
    Ok(ManufactureDocument {
        format_version: MANUFACTURE_FORMAT_VERSION,
        label: w.label.clone(),
        blade_count: w.blade_count(),
        total_span_mm: span,
        estimated_mass_g: total_mass(w, m) * 1e3,
        ribs,
        materials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn blade(span: f64, chord: f64) -> BladeSpec {
        BladeSpec { span_offset: span, chord, k_twist: 1e-4, k_bend: 1e-4 }
    }

    fn wing(spans: &[f64]) -> WingPhenotype {
        WingPhenotype::new(spans.iter().map(|s| blade(*s, 80.0)).collect(), "t").unwrap()
    }

    #[test]
    fn span_sums_offsets() {
        assert_eq!(wing_span(&wing(&[50.0])), 50.0);
        assert_eq!(wing_span(&wing(&[100.0, 100.0, 100.0])), 300.0);
        assert!(matches!(WingPhenotype::new(vec![], "x"), Err(WingError::NoBlades)));
    }

    #[test]
    fn cms_examples() {
        assert_eq!(compute_cms(5, 626.0, 5, 626.0).unwrap(), 1.0);
        assert!((compute_cms(1, 50.0, 5, 500.0).unwrap() - 0.15).abs() < 1e-15);
        let ev_m = compute_cms(5, 526.0, 5, 626.0).unwrap();
        assert!((ev_m - 0.92).abs() < 0.001, "{ev_m}");
        assert!(compute_cms(6, 100.0, 5, 500.0).is_err());
        assert!(compute_cms(2, 501.0, 5, 500.0).is_err());
    }

    #[test]
    fn zero_chord_is_spar_only() {
        let m = MaterialConfig::default();
        let b = blade_mass(&BladeSpec { span_offset: 100.0, chord: 0.0, k_twist: 1.0, k_bend: 1.0 }, &m);
        assert!((b.mass - m.spar_linear_density * 0.1).abs() < 1e-18);
    }

    #[test]
    fn ev_b_mass_near_one_gram() {
        let m = MaterialConfig::default();
        // EV-B: two blades totalling 352 mm at a 120 mm chord.
        let w = WingPhenotype::new(vec![blade(176.0, 120.0), blade(176.0, 120.0)], "EV-B").unwrap();
        let grams = total_mass(&w, &m) * 1e3;
        // 0.352 m * 0.8 g/m + 0.352 * 0.12 m^2 * 6.95 g/m^2
        assert!((grams - (0.2816 + 0.293568)).abs() < 1e-9, "{grams}");
        assert!((0.5..=2.0).contains(&grams));
    }

    #[test]
    fn skin_term_linear_in_density() {
        let w = wing(&[60.0, 90.0]);
        let m1 = MaterialConfig::default();
        let m2 = MaterialConfig { skin_areal_density: 2.0 * m1.skin_areal_density, ..m1.clone() };
        let m0 = MaterialConfig { skin_areal_density: 1e-300, ..m1.clone() };
        let spar = total_mass(&w, &m0);
        let skin1 = total_mass(&w, &m1) - spar;
        let skin2 = total_mass(&w, &m2) - spar;
        assert!((skin2 - 2.0 * skin1).abs() < 1e-15);
    }

    #[test]
    fn plate_inertia_matches_rectangle_when_spar_is_massless() {
        let m = MaterialConfig { spar_linear_density: 1e-300, ..MaterialConfig::default() };
        let b = blade_mass(&blade(100.0, 50.0), &m);
        let (s, c) = (0.1, 0.05);
        assert!((b.inertia[(1, 1)] - b.mass * c * c / 12.0).abs() < 1e-18);
        assert!((b.inertia[(0, 0)] - b.mass * (s * s + c * c) / 12.0).abs() < 1e-18);
        assert!((b.com - Vector3::new(0.0, 0.05, -0.025)).norm() < 1e-15);
    }

    #[test]
    fn feasibility_examples() {
        let bounds = FeasibleBounds::default();
        let ok = WingPhenotype::new(vec![blade(100.0, 80.0)], "ok").unwrap();
        let r = validate_phenotype(&ok, &bounds);
        assert_eq!(r.distance, 0.0);
        assert!(r.violations.is_empty());

        let long = WingPhenotype::new(vec![blade(160.0, 80.0)], "long").unwrap();
        let r = validate_phenotype(&long, &bounds);
        assert!((r.distance - 10.0 / 120.0).abs() < 1e-15);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].nearest, 150.0);

        let both = WingPhenotype::new(vec![blade(160.0, 80.0), blade(100.0, 210.0)], "both").unwrap();
        let r = validate_phenotype(&both, &bounds);
        let d1: f64 = 10.0 / 120.0;
        let d2 = 10.0 / 190.0;
        assert!((r.distance - (d1 * d1 + d2 * d2).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn twist_wire_stiffness_hand_value() {
        let m = MaterialConfig::default();
        let k = m.wire_stiffness(0.1, JointAxis::Twist);
        // 79.3e9 * pi * (1e-4)^4 / 32 / 0.015
        assert!((k - 5.19e-5).abs() < 0.01e-5, "{k}");
        assert_eq!(nearest_wire_gauge(5e-5, &m, JointAxis::Twist), 0.1);
        assert_eq!(nearest_wire_gauge(1.0, &m, JointAxis::Twist), 0.17);
        let k13 = m.wire_stiffness(0.13, JointAxis::Bend);
        assert_eq!(nearest_wire_gauge(k13, &m, JointAxis::Bend), 0.13);
    }

    #[test]
    fn manufacture_min_and_three_blade() {
        let m = MaterialConfig::default();
        let bounds = FeasibleBounds::default();
        let min = WingPhenotype::new(vec![blade(50.0, 40.0)], "MIN").unwrap();
        let doc = export_manufacture_spec(&min, &m, &bounds).unwrap();
        assert_eq!(doc.ribs.len(), 1);
        assert_eq!(doc.ribs[0].station_mm, 50.0);

        let w3 = wing(&[40.0, 70.0, 90.0]);
        let doc = export_manufacture_spec(&w3, &m, &bounds).unwrap();
        assert_eq!(doc.ribs.len(), 3);
        assert!(doc.ribs.windows(2).all(|p| p[0].station_mm < p[1].station_mm));
        assert_eq!(doc.format_version, MANUFACTURE_FORMAT_VERSION);
        assert!(doc.to_text().contains("Stainless steel wire"));
    }

    #[test]
    fn manufacture_records_requested_and_realized() {
        let m = MaterialConfig::default();
        let k10 = m.wire_stiffness(0.1, JointAxis::Twist);
        let k13 = m.wire_stiffness(0.13, JointAxis::Twist);
        let between = (k10 * k13).sqrt() * 1.05;
        let w = WingPhenotype::new(
            vec![BladeSpec { span_offset: 80.0, chord: 60.0, k_twist: between, k_bend: 1e-4 }],
            "mid",
        )
        .unwrap();
        let doc = export_manufacture_spec(&w, &m, &FeasibleBounds::default()).unwrap();
        let rib = &doc.ribs[0];
        assert_eq!(rib.twist_required, between);
        assert_eq!(rib.twist_gauge_mm, 0.13);
        assert!((rib.twist_realized - k13).abs() <= 1e-15 * k13);
    }

    #[test]
    fn manufacture_rejects_infeasible() {
        let w = wing(&[200.0]);
        let err = export_manufacture_spec(&w, &MaterialConfig::default(), &FeasibleBounds::default()).unwrap_err();
        match err {
            WingError::Infeasible(r) => assert_eq!(r.violations[0].parameter, "blades[0].span_offset"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gauge_stiffness_ordering() {
        let m = MaterialConfig::default();
        for mode in [JointAxis::Twist, JointAxis::Bend] {
            let k: Vec<f64> = m.wire_gauges.iter().map(|d| m.wire_stiffness(*d, mode)).collect();
            assert!(k[0] < k[1] && k[1] < k[2]);
        }
    }

    proptest! {
        #[test]
        fn span_equals_fold(spans in prop::collection::vec(1.0f64..300.0, 1..12)) {
            let w = wing(&spans);
            let mut acc = 0.0;
            for s in &spans { acc += s; }
            prop_assert_eq!(wing_span(&w), acc);
            prop_assert_eq!(w.stations().last().copied().unwrap(), acc);
        }

        #[test]
        fn cms_strictly_increasing(b in 1usize..5, s in 10.0f64..400.0, ds in 1.0f64..100.0) {
            let c = compute_cms(b, s, 5, 500.0).unwrap();
            prop_assert!(compute_cms(b + 1, s, 5, 500.0).unwrap() > c);
            prop_assert!(compute_cms(b, s + ds, 5, 500.0).unwrap() > c);
        }

        #[test]
        fn distance_zero_iff_inside(spans in prop::collection::vec(0.5f64..200.0, 1..6)) {
            let w = wing(&spans);
            let bounds = FeasibleBounds::default();
            let r = validate_phenotype(&w, &bounds);
            let inside = spans.iter().all(|s| (30.0..=150.0).contains(s));
            prop_assert_eq!(r.distance == 0.0, inside);
            prop_assert_eq!(r.violations.is_empty(), inside);
            // clamping is the nearest feasible point
            prop_assert_eq!(validate_phenotype(&bounds.clamp(&w), &bounds).distance, 0.0);
        }

        #[test]
        fn mass_additive_over_blades(spans in prop::collection::vec(30.0f64..150.0, 2..6)) {
            let m = MaterialConfig::default();
            let w = wing(&spans);
            let parts: f64 = spans.iter().map(|s| total_mass(&wing(&[*s]), &m)).sum();
            prop_assert!((total_mass(&w, &m) - parts).abs() < 1e-15);
        }
    }
}
