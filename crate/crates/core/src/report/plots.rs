use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use crate::constructor::SystemBundle;
use crate::group::{Group, GroupPoint, TAU};
use crate::spectral::synthesize;

/// Samples per profile along the sweep coordinate.
pub const PLOT_POINTS: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileRow {
    pub t: f64,
    pub abs_f: f64,
    pub abs_f0: f64,
    pub in_omega: bool,
}

/// The point with sweep coordinate `t` on the plotted slice: other torus
/// angles zero, and `beta = pi/2`, `gamma = 0` on SU(2).
fn slice_point(group: Group, t: f64) -> GroupPoint {
    match group {
        Group::Circle => GroupPoint::circle(TAU * t),
        Group::Torus(d) => {
            let mut theta = vec![0.0; d];
            theta[0] = TAU * t;
            GroupPoint::torus(theta)
        }
        Group::Su2 => GroupPoint::su2(TAU * t, std::f64::consts::FRAC_PI_2, 0.0),
    }
}

/// `|f_m|`, `|f_0|` and membership in `Omega_m` at [`PLOT_POINTS`] sweep values.
pub fn sweep_profile(bundle: &SystemBundle, i: usize) -> Vec<ProfileRow> {
    let r = &bundle.records[i];
    let cores = r.cores(&bundle.tree);
    (0..PLOT_POINTS)
        .map(|n| {
            let t = n as f64 / PLOT_POINTS as f64;
            let g = slice_point(bundle.group(), t);
            ProfileRow {
                t,
                abs_f: synthesize(&r.coeffs, &g).norm(),
                abs_f0: synthesize(&bundle.f0, &g).norm(),
                in_omega: cores.contains(&g),
            }
        })
        .collect()
}

fn write_profile_csv(path: &Path, rows: &[ProfileRow]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "abs_f", "abs_f0", "in_omega"])?;
    for r in rows {
        w.write_record([
            r.t.to_string(),
            r.abs_f.to_string(),
            r.abs_f0.to_string(),
            u8::from(r.in_omega).to_string(),
        ])?;
    }
    w.flush()
}

fn write_spectrum_csv(path: &Path, bundle: &SystemBundle, i: usize) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["label", "frobenius"])?;
    for (label, m) in bundle.records[i].coeffs.iter() {
        w.write_record([label.to_string(), m.norm().to_string()])?;
    }
    w.flush()
}

fn svg(rows: &[ProfileRow], eps: f64, m: usize) -> String {
    let (w, h, pad) = (800.0, 320.0, 30.0);
    let top = rows.iter().map(|r| r.abs_f.max(r.abs_f0 + eps)).fold(0.0, f64::max) * 1.1;
    let x = |t: f64| pad + t * (w - 2.0 * pad);
    let y = |v: f64| h - pad - v / top * (h - 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let step = 1.0 / rows.len() as f64;
    let mut start: Option<f64> = None;
    for (n, r) in rows.iter().enumerate() {
        let last = n + 1 == rows.len();
        match (r.in_omega, start) {
            (true, None) => start = Some(r.t),
            (false, Some(a)) => {
                let _ = writeln!(s, r##"<rect x="{:.2}" y="{pad}" width="{:.2}" height="{:.2}" fill="#dde8f5"/>"##, x(a), x(r.t) - x(a), h - 2.0 * pad);
                start = None;
            }
            _ => {}
        }
        if last {
            if let Some(a) = start.take() {
                let _ = writeln!(s, r##"<rect x="{:.2}" y="{pad}" width="{:.2}" height="{:.2}" fill="#dde8f5"/>"##, x(a), x(r.t + step) - x(a), h - 2.0 * pad);
            }
        }
    }
    let band: Vec<String> = rows
        .iter()
        .map(|r| format!("{:.2},{:.2}", x(r.t), y(r.abs_f0 + eps)))
        .chain(rows.iter().rev().map(|r| format!("{:.2},{:.2}", x(r.t), y((r.abs_f0 - eps).max(0.0)))))
        .collect();
    let _ = writeln!(s, r##"<polygon points="{}" fill="#f3d9b1" fill-opacity="0.6"/>"##, band.join(" "));
    let line = |f: &dyn Fn(&ProfileRow) -> f64| -> String {
        rows.iter().map(|r| format!("{:.2},{:.2}", x(r.t), y(f(r)))).collect::<Vec<_>>().join(" ")
    };
    let _ = writeln!(s, r##"<polyline points="{}" fill="none" stroke="#888" stroke-dasharray="4 3"/>"##, line(&|r| r.abs_f0));
    let _ = writeln!(s, r##"<polyline points="{}" fill="none" stroke="#1f4e9c" stroke-width="1.2"/>"##, line(&|r| r.abs_f));
    let _ = writeln!(s, r#"<line x1="{pad}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="black"/>"#, h - pad, w - pad);
    let _ = writeln!(s, r#"<text x="{pad}" y="20" font-family="sans-serif" font-size="13">|f_{m}| with |f_0| +/- {eps} (shaded: Omega_{m})</text>"#);
    s.push_str("</svg>\n");
    s
}

/// Writes `f{m}.csv`, `f{m}.svg` and `spectrum{m}.csv` for every record and
/// returns the paths written; an empty bundle writes nothing.
pub fn emit_plots(bundle: &SystemBundle, dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    if bundle.records.is_empty() {
        return Ok(out);
    }
    std::fs::create_dir_all(dir)?;
    for (i, r) in bundle.records.iter().enumerate() {
        let rows = sweep_profile(bundle, i);
        let eps = bundle.epsilons[r.m - 1];
        let csv_path = dir.join(format!("f{}.csv", r.m));
        write_profile_csv(&csv_path, &rows)?;
        let svg_path = dir.join(format!("f{}.svg", r.m));
        std::fs::write(&svg_path, svg(&rows, eps, r.m))?;
        let spec_path = dir.join(format!("spectrum{}.csv", r.m));
        write_spectrum_csv(&spec_path, bundle, i)?;
        out.extend([csv_path, svg_path, spec_path]);
    }
    Ok(out)
}
