//! Flat-plate lift and drag coefficients over the full sweep of incidence.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::OnceLock;

use super::SimError;

const DEFAULT_TABLE: &str = include_str!("../../../../data/flat_plate_coeffs.csv");

/// Samples over 0..=180 degrees. Negative incidence is folded with
/// C_L(-a) = -C_L(a) and C_D(-a) = C_D(a).
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    alpha_deg: Vec<f64>,
    cl: Vec<f64>,
    cd: Vec<f64>,
}

impl CoefficientTable {
    pub fn new(alpha_deg: Vec<f64>, cl: Vec<f64>, cd: Vec<f64>) -> Result<Self, SimError> {
        let bad = |m: &str| Err(SimError::Table(m.to_string()));
        if alpha_deg.len() < 2 || alpha_deg.len() != cl.len() || alpha_deg.len() != cd.len() {
            return bad("columns must have equal length of at least 2");
        }
        if alpha_deg.windows(2).any(|w| w[0] >= w[1]) {
            return bad("alpha must be strictly increasing");
        }
        if alpha_deg[0] != 0.0 || *alpha_deg.last().unwrap() != 180.0 {
            return bad("alpha must cover exactly 0 to 180 degrees");
        }
        if cd.iter().any(|c| !(*c >= 0.0)) || cl.iter().any(|c| !c.is_finite()) {
            return bad("cd must be non-negative and all coefficients finite");
        }
        if cl[0] != 0.0 || *cl.last().unwrap() != 0.0 {
            return bad("cl must vanish at 0 and 180 degrees");
        }
        Ok(Self { alpha_deg, cl, cd })
    }

    /// Parse `alpha_deg,cl,cd` CSV; `#` lines are comments.
    pub fn from_csv_str(text: &str) -> Result<Self, SimError> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let (mut a, mut l, mut d) = (Vec::new(), Vec::new(), Vec::new());
        for (i, row) in reader.records().enumerate() {
            let row = row.map_err(|e| SimError::Table(e.to_string()))?;
            let field = |k: usize| -> Result<f64, SimError> {
                row.get(k)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| SimError::Table(format!("row {}: bad column {k}", i + 1)))
            };
            a.push(field(0)?);
            l.push(field(1)?);
            d.push(field(2)?);
        }
        Self::new(a, l, d)
    }

    pub fn from_csv_file(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
        Self::from_csv_str(&text)
    }

    /// The table shipped in `data/flat_plate_coeffs.csv`.
    pub fn flat_plate() -> &'static CoefficientTable {
        static TABLE: OnceLock<CoefficientTable> = OnceLock::new();
        TABLE.get_or_init(|| Self::from_csv_str(DEFAULT_TABLE).expect("embedded table is valid"))
    }

    /// (C_L, C_D) at incidence `alpha` in radians.
    pub fn lookup(&self, alpha: f64) -> (f64, f64) {
        let mut a = alpha % (2.0 * PI);
        if a > PI {
            a -= 2.0 * PI;
        } else if a < -PI {
            a += 2.0 * PI;
        }
        let sign = if a < 0.0 { -1.0 } else { 1.0 };
        let deg = a.abs().to_degrees().min(180.0);
        let hi = self.alpha_deg.partition_point(|x| *x < deg).clamp(1, self.alpha_deg.len() - 1);
        let lo = hi - 1;
        let t = (deg - self.alpha_deg[lo]) / (self.alpha_deg[hi] - self.alpha_deg[lo]);
        let cl = self.cl[lo] + t * (self.cl[hi] - self.cl[lo]);
        let cd = self.cd[lo] + t * (self.cd[hi] - self.cd[lo]);
        (sign * cl, cd)
    }
}
