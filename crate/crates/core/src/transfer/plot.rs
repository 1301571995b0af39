//! STR versus C_MS scatter: CSV series plus one self-contained SVG.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{monotonic_decay_line, GapEnvelope, PolyFit, TransferDataset, TransferError};

pub const FIT_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct GapPlotFiles {
    pub points: PathBuf,
    pub fit: PathBuf,
    pub envelope: PathBuf,
    pub svg: PathBuf,
}

fn fit_samples(ds: &TransferDataset, fit: &PolyFit) -> Vec<(f64, f64)> {
    let xs: Vec<f64> = ds.points().iter().map(|p| p.0).collect();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..FIT_SAMPLES)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (FIT_SAMPLES - 1) as f64;
            (x, fit.eval(x))
        })
        .collect()
}

/// Write `gap_points.csv`, `gap_fit.csv`, `gap_envelope.csv` and
/// `gap_plot.svg` into `dir`.
pub fn export_gap_plot(ds: &TransferDataset, fit: &PolyFit, env: &GapEnvelope, dir: &Path) -> Result<GapPlotFiles, TransferError> {
    let io = |p: &Path, e: std::io::Error| TransferError::Io(format!("{}: {e}", p.display()));
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let l_max = ds.l_max();
    let files = GapPlotFiles {
        points: dir.join("gap_points.csv"),
        fit: dir.join("gap_fit.csv"),
        envelope: dir.join("gap_envelope.csv"),
        svg: dir.join("gap_plot.svg"),
    };

    let mut text = String::from("label,cms,str,str_err\n");
    for r in &ds.records {
        let (Some(c), Some(s)) = (r.cms, r.str) else {
            return Err(TransferError::Domain(format!("{} is not annotated", r.label)));
        };
        let _ = writeln!(text, "{},{c},{s},{}", r.label, r.lift_real_std / l_max);
    }
    std::fs::write(&files.points, text).map_err(|e| io(&files.points, e))?;

    let mut text = String::from("cms,str_fit\n");
    for (x, y) in fit_samples(ds, fit) {
        let _ = writeln!(text, "{x},{y}");
    }
    std::fs::write(&files.fit, text).map_err(|e| io(&files.fit, e))?;

    let mut text = String::from("cms,lower,upper\n");
    for ((k, l), u) in env.knots.iter().zip(&env.lower).zip(&env.upper) {
        let _ = writeln!(text, "{k},{l},{u}");
    }
    std::fs::write(&files.envelope, text).map_err(|e| io(&files.envelope, e))?;

    std::fs::write(&files.svg, render_svg(ds, fit, env)).map_err(|e| io(&files.svg, e))?;
    Ok(files)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn render_svg(ds: &TransferDataset, fit: &PolyFit, env: &GapEnvelope) -> String {
    const W: f64 = 640.0;
    const H: f64 = 440.0;
    const M: f64 = 60.0;
    let (x0, x1) = (0.0, 1.0);
    let pts = ds.points();
    let ys = pts.iter().map(|p| p.1).chain(env.upper.iter().copied()).chain(env.lower.iter().copied());
    let (mut y0, mut y1) = ys.fold((-0.2_f64, 0.2_f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    y0 = (y0 * 10.0).floor() / 10.0;
    y1 = (y1 * 10.0).ceil() / 10.0;
    let px = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let py = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" style="fill:#ffffff"/>"#);

    // band
    let mut poly: Vec<String> = env.knots.iter().zip(&env.upper).map(|(k, u)| format!("{:.2},{:.2}", px(*k), py(*u))).collect();
    poly.extend(env.knots.iter().zip(&env.lower).rev().map(|(k, l)| format!("{:.2},{:.2}", px(*k), py(*l))));
    let _ = writeln!(s, r#"<polygon class="envelope" points="{}" style="fill:#9ecae1;fill-opacity:0.4;stroke:none"/>"#, poly.join(" "));

    // small-gap band edges and axes
    for v in [-0.2, 0.2] {
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" style="stroke:#999999;stroke-dasharray:2,3"/>"#,
            px(x0),
            py(v),
            px(x1),
            py(v)
        );
    }
    let _ = writeln!(s, r#"<line x1="{M}" y1="{:.2}" x2="{:.2}" y2="{:.2}" style="stroke:#000000"/>"#, H - M, W - M, H - M);
    let _ = writeln!(s, r#"<line x1="{M}" y1="{M}" x2="{M}" y2="{:.2}" style="stroke:#000000"/>"#, H - M);
    for i in 0..=5 {
        let x = x0 + (x1 - x0) * i as f64 / 5.0;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" style="font:11px sans-serif;text-anchor:middle">{x:.1}</text>"#, px(x), H - M + 16.0);
    }
    let n_y = ((y1 - y0) / 0.2).round() as usize;
    for i in 0..=n_y {
        let y = y0 + 0.2 * i as f64;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" style="font:11px sans-serif;text-anchor:end">{y:.1}</text>"#, M - 6.0, py(y) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" style="font:13px sans-serif;text-anchor:middle">C_MS</text>"#, W / 2.0, H - 18.0);
    let _ = writeln!(s, r#"<text x="16" y="{:.2}" style="font:13px sans-serif" transform="rotate(-90 16 {:.2})">STR</text>"#, H / 2.0, H / 2.0);

    let line: Vec<String> = fit_samples(ds, fit).iter().map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
    let _ = writeln!(s, r#"<polyline class="fit" points="{}" style="fill:none;stroke:#08519c;stroke-width:2"/>"#, line.join(" "));

    if let Some((xa, ya, slope)) = monotonic_decay_line(ds) {
        let xb = pts.iter().map(|p| p.0).fold(xa, f64::max);
        let _ = writeln!(
            s,
            r#"<line class="decay" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" style="stroke:#cb181d;stroke-dasharray:6,4"><title>illustrative monotonic decay</title></line>"#,
            px(xa),
            py(ya),
            px(xb),
            py(ya + slope * (xb - xa))
        );
    }

    let l_max = ds.l_max();
    for r in &ds.records {
        let (Some(c), Some(v)) = (r.cms, r.str) else { continue };
        let err = r.lift_real_std / l_max;
        let _ = writeln!(
            s,
            r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" style="stroke:#555555"/>"#,
            px(c),
            py(v - err),
            py(v + err)
        );
        let _ = writeln!(
            s,
            r#"<circle class="point" cx="{:.2}" cy="{:.2}" r="4" style="fill:#000000"><title>{}</title></circle>"#,
            px(c),
            py(v),
            escape(&r.label)
        );
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" style="font:11px sans-serif;fill:#cb181d;text-anchor:end">dashed: illustrative monotonic decay</text>"#, W - M, M - 10.0);
    s.push_str("</svg>\n");
    s
}
