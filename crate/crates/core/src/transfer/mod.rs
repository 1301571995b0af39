//! Sim-to-real transfer analysis: STR and C_MS per design, the polynomial
//! reality-gap fit, its envelope, and plot data.
//!
//! Lift values are kept in grams-force as measured. STR is a ratio, so the
//! unit never matters for anything computed here.

mod plot;

pub use plot::{export_gap_plot, render_svg, GapPlotFiles};

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::wing::compute_cms;

/// Half-width of the small-gap band; the threshold is where the fit leaves it.
pub const SMALL_GAP: f64 = 0.2;

#[derive(Debug, Error)]
pub enum TransferError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: {message}")]
    Validation { line: u64, message: String },
    #[error("no records")]
    NoRecords,
    #[error("fit: {0}")]
    Fit(String),
    #[error("i/o: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferRecord {
    pub label: String,
    pub blade_count: usize,
    /// mm
    pub span: f64,
    /// gf
    pub lift_sim: f64,
    /// gf; may be negative after taring
    pub lift_real_mean: f64,
    /// gf
    pub lift_real_std: f64,
    pub str: Option<f64>,
    pub cms: Option<f64>,
}

impl TransferRecord {
    pub fn new(label: impl Into<String>, b: usize, s: f64, l_s: f64, l_r: f64, l_r_std: f64) -> Self {
        Self {
            label: label.into(),
            blade_count: b,
            span: s,
            lift_sim: l_s,
            lift_real_mean: l_r,
            lift_real_std: l_r_std,
            str: None,
            cms: None,
        }
    }

    fn check(&self) -> Result<(), String> {
        if self.blade_count == 0 {
            return Err("blade count must be at least 1".into());
        }
        if !(self.span > 0.0 && self.span.is_finite()) {
            return Err(format!("span must be positive, got {}", self.span));
        }
        if !(self.lift_sim >= 0.0 && self.lift_sim.is_finite()) {
            return Err(format!("simulated lift must be non-negative, got {}", self.lift_sim));
        }
        if !self.lift_real_mean.is_finite() {
            return Err("real lift must be finite".into());
        }
        if !(self.lift_real_std >= 0.0 && self.lift_real_std.is_finite()) {
            return Err(format!("real lift std must be non-negative, got {}", self.lift_real_std));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TransferDataset {
    pub records: Vec<TransferRecord>,
    pub l_max_override: Option<f64>,
    pub b_max_override: Option<usize>,
    pub s_max_override: Option<f64>,
}

impl TransferDataset {
    pub fn new(records: Vec<TransferRecord>) -> Self {
        Self { records, ..Self::default() }
    }

    /// Largest simulated lift unless overridden (gf).
    pub fn l_max(&self) -> f64 {
        self.l_max_override.unwrap_or_else(|| self.records.iter().map(|r| r.lift_sim).fold(0.0, f64::max))
    }

    pub fn b_max(&self) -> usize {
        self.b_max_override.unwrap_or_else(|| self.records.iter().map(|r| r.blade_count).max().unwrap_or(0))
    }

    /// mm
    pub fn s_max(&self) -> f64 {
        self.s_max_override.unwrap_or_else(|| self.records.iter().map(|r| r.span).fold(0.0, f64::max))
    }

    /// `(cms, str)` of every annotated record.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.records.iter().filter_map(|r| Some((r.cms?, r.str?))).collect()
    }
}

/// (L_R − L_S) / L_max.
pub fn compute_str(l_r: f64, l_s: f64, l_max: f64) -> Result<f64, TransferError> {
    if !(l_max > 0.0) {
        return Err(TransferError::Domain(format!("L_max must be positive, got {l_max}")));
    }
    Ok((l_r - l_s) / l_max)
}

/// Fill `str` and `cms` on every record.
pub fn annotate(ds: &TransferDataset) -> Result<TransferDataset, TransferError> {
    let (l_max, b_max, s_max) = (ds.l_max(), ds.b_max(), ds.s_max());
    let mut out = ds.clone();
    for r in &mut out.records {
        r.str = Some(compute_str(r.lift_real_mean, r.lift_sim, l_max)?);
        r.cms = Some(
            compute_cms(r.blade_count, r.span, b_max, s_max)
                .map_err(|e| TransferError::Domain(format!("{}: {e}", r.label)))?,
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyFit {
    pub degree: usize,
    /// Ascending powers.
    pub coefficients: Vec<f64>,
    pub rss: f64,
    /// `(degree, AICc)` per candidate; rank-deficient degrees are absent.
    pub scores: Vec<(usize, f64)>,
}

impl PolyFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

fn vandermonde(x: &[f64], k: usize) -> DMatrix<f64> {
    DMatrix::from_fn(x.len(), k, |i, j| x[i].powi(j as i32))
}

/// Least-squares polynomial of the given degree; `None` when the design
/// matrix is rank deficient.
pub fn least_squares(x: &[f64], y: &[f64], degree: usize) -> Option<(Vec<f64>, f64)> {
    let k = degree + 1;
    let a = vandermonde(x, k);
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = smax * 1e-12 * x.len().max(k) as f64;
    if svd.rank(tol) < k {
        return None;
    }
    let c = svd.solve(&b, tol).ok()?;
    let rss = (a * &c - b).norm_squared();
    Some((c.iter().copied().collect(), rss))
}

/// OLS fits of STR on C_MS for degrees 1..=max_degree, selected by AICc.
pub fn polyfit_str(ds: &TransferDataset, max_degree: usize) -> Result<PolyFit, TransferError> {
    let (x, y): (Vec<f64>, Vec<f64>) = ds.points().into_iter().unzip();
    polyfit_points(&x, &y, max_degree)
}

pub fn polyfit_points(x: &[f64], y: &[f64], max_degree: usize) -> Result<PolyFit, TransferError> {
    let n = x.len();
    if max_degree == 0 {
        return Err(TransferError::Fit("max_degree must be at least 1".into()));
    }
    if n < max_degree + 2 {
        return Err(TransferError::Fit(format!("{n} points is too few for degree {max_degree}")));
    }
    // Exact fits would send ln(RSS) to -inf; floor RSS at round-off level.
    let scale = y.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let floor = n as f64 * (1e-12 * scale).powi(2);
    let mut scores = Vec::new();
    let mut best: Option<(f64, usize, Vec<f64>, f64)> = None;
    for degree in 1..=max_degree {
        let Some((coef, rss)) = least_squares(x, y, degree) else { continue };
        let k = (degree + 1) as f64;
        let nf = n as f64;
        let denom = nf - k - 1.0;
        let aicc = if denom > 0.0 {
            nf * (rss.max(floor) / nf).ln() + 2.0 * k + 2.0 * k * (k + 1.0) / denom
        } else {
            f64::INFINITY
        };
        scores.push((degree, aicc));
        if best.as_ref().map_or(true, |b| aicc < b.0) {
            best = Some((aicc, degree, coef, rss));
        }
    }
    let (_, degree, coefficients, rss) =
        best.ok_or_else(|| TransferError::Fit("normal equations are singular for every degree".into()))?;
    Ok(PolyFit { degree, coefficients, rss, scores })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEnvelope {
    /// `(label, cms, str)` sorted by cms.
    pub points: Vec<(String, f64, f64)>,
    /// Distinct cms values, strictly increasing.
    pub knots: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
}

impl GapEnvelope {
    fn interp(&self, ys: &[f64], x: f64) -> f64 {
        let k = &self.knots;
        if x <= k[0] {
            return ys[0];
        }
        if x >= k[k.len() - 1] {
            return ys[k.len() - 1];
        }
        let i = k.partition_point(|v| *v <= x) - 1;
        let t = (x - k[i]) / (k[i + 1] - k[i]);
        ys[i] + t * (ys[i + 1] - ys[i])
    }

    pub fn upper_at(&self, x: f64) -> f64 {
        self.interp(&self.upper, x)
    }

    pub fn lower_at(&self, x: f64) -> f64 {
        self.interp(&self.lower, x)
    }
}

/// Band joining the highest and lowest STR of neighbouring designs.
pub fn gap_envelope(ds: &TransferDataset) -> Result<GapEnvelope, TransferError> {
    let mut points: Vec<(String, f64, f64)> =
        ds.records.iter().filter_map(|r| Some((r.label.clone(), r.cms?, r.str?))).collect();
    if points.len() < 2 {
        return Err(TransferError::Domain("the envelope needs at least 2 annotated records".into()));
    }
    points.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (mut knots, mut upper, mut lower) = (Vec::new(), Vec::<f64>::new(), Vec::<f64>::new());
    for (_, c, s) in &points {
        if knots.last() == Some(c) {
            let i = knots.len() - 1;
            upper[i] = upper[i].max(*s);
            lower[i] = lower[i].min(*s);
        } else {
            knots.push(*c);
            upper.push(*s);
            lower.push(*s);
        }
    }
    Ok(GapEnvelope { points, knots, upper, lower })
}

/// Largest C_MS in [0, 1] where the fit falls to −0.2. A fit identically
/// equal to −0.2 returns 0.
pub fn threshold_estimate(fit: &PolyFit) -> Option<f64> {
    let mut c = fit.coefficients.clone();
    c[0] += SMALL_GAP;
    while c.len() > 1 && c[c.len() - 1] == 0.0 {
        c.pop();
    }
    let in_range = |x: f64| (0.0..=1.0).contains(&x).then_some(x);
    match c.len() {
        1 => (c[0] == 0.0).then_some(0.0),
        2 => in_range(-c[0] / c[1]),
        3 => {
            let disc = c[1] * c[1] - 4.0 * c[2] * c[0];
            if disc < 0.0 {
                return None;
            }
            let q = -0.5 * (c[1] + c[1].signum() * disc.sqrt());
            let mut roots = vec![q / c[2]];
            if q != 0.0 {
                roots.push(c[0] / q);
            }
            roots.into_iter().filter_map(in_range).reduce(f64::max)
        }
        _ => {
            let p = |x: f64| c.iter().rev().fold(0.0, |acc, v| acc * x + v);
            let n = 2000;
            (0..n).rev().find_map(|i| {
                let (mut a, mut b) = (i as f64 / n as f64, (i + 1) as f64 / n as f64);
                let (fa, fb) = (p(a), p(b));
                if fb == 0.0 {
                    return Some(b);
                }
                if fa.signum() == fb.signum() {
                    return None;
                }
                for _ in 0..100 {
                    let m = 0.5 * (a + b);
                    if p(m).signum() == p(a).signum() {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                Some(0.5 * (a + b))
            })
        }
    }
}

/// Line through the lowest-complexity design with the least-squares slope
/// of the rest. Illustrative only: it shows what a monotonic decay of the
/// gap with complexity would look like. Returns `(x0, y0, slope)`.
pub fn monotonic_decay_line(ds: &TransferDataset) -> Option<(f64, f64, f64)> {
    let pts = ds.points();
    let &(x0, y0) = pts.iter().min_by(|a, b| a.0.total_cmp(&b.0))?;
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(sxy, sxx), (x, y)| (sxy + (x - x0) * (y - y0), sxx + (x - x0).powi(2)));
    (sxx > 0.0).then(|| (x0, y0, sxy / sxx))
}

const HEADER: [&str; 6] = ["label", "B", "S_mm", "L_S_g", "L_R_g", "L_R_std_g"];

/// Parse a transfers CSV. `#` lines are comments; rows whose first field
/// is `@L_max`, `@B_max` or `@S_max` set the normalizing maxima.
pub fn ingest_transfers(path: &Path) -> Result<TransferDataset, TransferError> {
    let text = std::fs::read_to_string(path).map_err(|e| TransferError::Io(format!("{}: {e}", path.display())))?;
    parse_transfers(&text)
}

pub fn parse_transfers(text: &str) -> Result<TransferDataset, TransferError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| parse_err(0, e))?.clone();
    if header.is_empty() {
        return Err(TransferError::NoRecords);
    }
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(TransferError::Parse { line: 1, message: format!("expected header {}", HEADER.join(",")) });
    }
    let mut ds = TransferDataset::default();
    for row in reader.records() {
        let row = row.map_err(|e| parse_err(0, e))?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |i: usize| row.get(i).ok_or_else(|| TransferError::Parse { line, message: format!("missing column {}", i + 1) });
        let num = |i: usize| -> Result<f64, TransferError> {
            let s = field(i)?;
            s.parse::<f64>().map_err(|_| TransferError::Parse { line, message: format!("{}: not a number: {s:?}", HEADER.get(i).unwrap_or(&"value")) })
        };
        let first = field(0)?;
        if let Some(key) = first.strip_prefix('@') {
            if row.len() != 2 {
                return Err(TransferError::Parse { line, message: "override rows take exactly one value".into() });
            }
            let v = num(1)?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(TransferError::Validation { line, message: format!("{key} must be positive") });
            }
            match key {
                "L_max" => ds.l_max_override = Some(v),
                "S_max" => ds.s_max_override = Some(v),
                "B_max" if v.fract() == 0.0 => ds.b_max_override = Some(v as usize),
                "B_max" => return Err(TransferError::Validation { line, message: "B_max must be an integer".into() }),
                _ => return Err(TransferError::Parse { line, message: format!("unknown override {first}") }),
            }
            continue;
        }
        if row.len() != HEADER.len() {
            return Err(TransferError::Parse { line, message: format!("expected {} columns, got {}", HEADER.len(), row.len()) });
        }
        let b = field(1)?
            .parse::<usize>()
            .map_err(|_| TransferError::Validation { line, message: format!("B must be a positive integer, got {:?}", &row[1]) })?;
        let rec = TransferRecord::new(first, b, num(2)?, num(3)?, num(4)?, num(5)?);
        rec.check().map_err(|message| TransferError::Validation { line, message })?;
        ds.records.push(rec);
    }
    if ds.records.is_empty() {
        return Err(TransferError::NoRecords);
    }
    if let Some(b) = ds.b_max_override {
        if ds.records.iter().any(|r| r.blade_count > b) {
            return Err(TransferError::Validation { line: 0, message: format!("B_max {b} is below a record's blade count") });
        }
    }
    if let Some(s) = ds.s_max_override {
        if ds.records.iter().any(|r| r.span > s) {
            return Err(TransferError::Validation { line: 0, message: format!("S_max {s} is below a record's span") });
        }
    }
    Ok(ds)
}

fn parse_err(line: u64, e: csv::Error) -> TransferError {
    let line = e.position().map_or(line, |p| p.line());
    TransferError::Parse { line, message: e.to_string() }
}

/// Inverse of `parse_transfers` for the input columns and overrides.
pub fn transfers_to_csv(ds: &TransferDataset) -> String {
    let mut out = HEADER.join(",");
    out.push('\n');
    for r in &ds.records {
        let label = if r.label.contains([',', '"', '\n']) || r.label.trim() != r.label {
            format!("\"{}\"", r.label.replace('"', "\"\""))
        } else {
            r.label.clone()
        };
        let _ = writeln!(out, "{label},{},{},{},{},{}", r.blade_count, r.span, r.lift_sim, r.lift_real_mean, r.lift_real_std);
    }
    if let Some(v) = ds.l_max_override {
        let _ = writeln!(out, "@L_max,{v}");
    }
    if let Some(v) = ds.b_max_override {
        let _ = writeln!(out, "@B_max,{v}");
    }
    if let Some(v) = ds.s_max_override {
        let _ = writeln!(out, "@S_max,{v}");
    }
    out
}

pub fn export_transfers(ds: &TransferDataset, path: &Path) -> Result<(), TransferError> {
    std::fs::write(path, transfers_to_csv(ds)).map_err(|e| TransferError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table1() -> TransferDataset {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/table1.csv");
        ingest_transfers(&path).unwrap()
    }

    #[test]
    fn str_examples() {
        assert!((compute_str(10.1, 2.9, 13.9).unwrap() - 0.518).abs() < 5e-4);
        assert!((compute_str(2.3, 12.3, 13.9).unwrap() + 0.719).abs() < 5e-4);
        assert_eq!(compute_str(4.0, 4.0, 1.0).unwrap(), 0.0);
        assert!(compute_str(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn fixture_loads() {
        let ds = table1();
        assert_eq!(ds.records.len(), 16);
        assert_eq!(ds.l_max(), 13.9);
        assert_eq!((ds.b_max(), ds.s_max()), (5, 626.0));
    }

    #[test]
    fn single_record_self_normalizes() {
        let ds = TransferDataset::new(vec![TransferRecord::new("x", 3, 120.0, 2.0, 1.0, 0.1)]);
        assert_eq!(annotate(&ds).unwrap().records[0].cms, Some(1.0));
    }

    #[test]
    fn exact_models_are_recovered() {
        let x: Vec<f64> = (0..10).map(|i| 0.05 + 0.1 * i as f64).collect();
        let line: Vec<f64> = x.iter().map(|v| 0.3 - 0.7 * v).collect();
        let f = polyfit_points(&x, &line, 4).unwrap();
        assert_eq!(f.degree, 1);
        assert!(f.rss < 1e-20);
        let quad: Vec<f64> = x.iter().map(|v| -(v - 0.4) * (v - 0.4)).collect();
        let f = polyfit_points(&x, &quad, 4).unwrap();
        assert_eq!(f.degree, 2);
        for (c, e) in f.coefficients.iter().zip([-0.16, 0.8, -1.0]) {
            assert!((c - e).abs() < 1e-9, "{c} vs {e}");
        }
    }

    #[test]
    fn duplicate_abscissae_still_fit() {
        let x = [0.1, 0.1, 0.5, 0.5, 0.9, 0.9];
        let y = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
        let f = polyfit_points(&x, &y, 2).unwrap();
        assert!(f.coefficients.iter().all(|c| c.is_finite()));
        assert!(polyfit_points(&[0.5; 6], &y, 2).is_err());
    }

    #[test]
    fn thresholds() {
        let fit = |c: Vec<f64>| PolyFit { degree: c.len() - 1, coefficients: c, rss: 0.0, scores: vec![] };
        assert_eq!(threshold_estimate(&fit(vec![-0.2])), Some(0.0));
        assert!((threshold_estimate(&fit(vec![0.2, 0.0, -1.0])).unwrap() - 0.4_f64.sqrt()).abs() < 1e-12);
        assert_eq!(threshold_estimate(&fit(vec![1.0, 0.0, -0.1])), None);
        let cubic = threshold_estimate(&fit(vec![0.2, 0.0, -1.0, 0.0])).unwrap();
        assert!((cubic - 0.4_f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn envelope_examples() {
        let mut a = TransferRecord::new("a", 1, 10.0, 0.0, 0.0, 0.0);
        let mut b = a.clone();
        a.cms = Some(0.5);
        a.str = Some(0.1);
        b.cms = Some(0.5);
        b.str = Some(-0.2);
        let env = gap_envelope(&TransferDataset::new(vec![a, b])).unwrap();
        assert_eq!(env.knots, vec![0.5]);
        assert_eq!((env.lower[0], env.upper[0]), (-0.2, 0.1));

        let ds = annotate(&table1()).unwrap();
        let env = gap_envelope(&ds).unwrap();
        let peak = (0..env.knots.len()).max_by(|i, j| env.upper[*i].total_cmp(&env.upper[*j])).unwrap();
        let ev_c = ds.records.iter().find(|r| r.label == "EV-C").unwrap();
        assert_eq!(Some(env.knots[peak]), ev_c.cms);
        assert!(env.knots.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_transfers(""), Err(TransferError::NoRecords)));
        assert!(matches!(parse_transfers("label,B,S_mm,L_S_g,L_R_g,L_R_std_g\n"), Err(TransferError::NoRecords)));
        let bad = "label,B,S_mm,L_S_g,L_R_g,L_R_std_g\na,1,50,0,0,0.1\nb,2,abc,0,0,0\n";
        match parse_transfers(bad) {
            Err(TransferError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let neg = "# c\nlabel,B,S_mm,L_S_g,L_R_g,L_R_std_g\na,1,50,0,0,-0.1\n";
        match parse_transfers(neg) {
            Err(TransferError::Validation { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(parse_transfers("label,B,S_mm,L_S_g,L_R_g,L_R_std_g\na,1,50,0,0,0\n@S_max,40\n").is_err());
        assert!(parse_transfers("label,B,S_mm,L_S_g,L_R_g,L_R_std_g\na,1,50,0,0,0\n@Q_max,40\n").is_err());
    }

    #[test]
    fn csv_round_trip() {
        let ds = table1();
        assert_eq!(parse_transfers(&transfers_to_csv(&ds)).unwrap(), ds);
    }

    fn record() -> impl Strategy<Value = TransferRecord> {
        ("[a-zA-Z0-9 ,\"-]{1,8}", 1usize..8, 1.0..900.0f64, 0.0..20.0f64, -2.0..20.0f64, 0.0..5.0f64)
            .prop_filter("label must survive trimming", |t| t.0.trim() == t.0 && !t.0.is_empty() && !t.0.starts_with(['@', '#']))
            .prop_map(|(l, b, s, ls, lr, sd)| TransferRecord::new(l, b, s, ls, lr, sd))
    }

    proptest! {
        #[test]
        fn str_antisymmetric_and_scale_free(lr in -20.0..20.0f64, ls in -20.0..20.0f64, lm in 0.1..50.0f64, k in 0.01..100.0f64) {
            let a = compute_str(lr, ls, lm).unwrap();
            let b = compute_str(ls, lr, lm).unwrap();
            prop_assert_eq!(a, -b);
            let scaled = compute_str(lr * k, ls * k, lm * k).unwrap();
            prop_assert!((a - scaled).abs() <= 1e-12 * (1.0 + a.abs()));
        }

        #[test]
        fn annotate_is_idempotent_and_enveloped(recs in prop::collection::vec(record(), 2..20)) {
            let ds = TransferDataset::new(recs);
            prop_assume!(ds.l_max() > 0.0);
            let once = annotate(&ds).unwrap();
            prop_assert_eq!(annotate(&once).unwrap(), once.clone());
            let env = gap_envelope(&once).unwrap();
            for (_, c, s) in &env.points {
                prop_assert!(env.lower_at(*c) <= *s && *s <= env.upper_at(*c));
            }
            prop_assert!(env.lower.iter().zip(&env.upper).all(|(l, u)| l <= u));
            prop_assert_eq!(parse_transfers(&transfers_to_csv(&ds)).unwrap(), ds);
        }

        #[test]
        fn residuals_orthogonal_to_design(ys in prop::collection::vec(-1.0..1.0f64, 8..20), deg in 1usize..4) {
            let x: Vec<f64> = (0..ys.len()).map(|i| i as f64 / ys.len() as f64).collect();
            let (c, _) = least_squares(&x, &ys, deg).unwrap();
            let a = vandermonde(&x, deg + 1);
            let r = &a * DVector::from_vec(c) - DVector::from_column_slice(&ys);
            let g = a.transpose() * r;
            prop_assert!(g.amax() < 1e-9, "{}", g.amax());
        }
    }
}
