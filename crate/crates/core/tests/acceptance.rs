//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use aus_core::constructor::{construct_system, ConstructionParams, SystemBundle};
use aus_core::dyadic::{shrink_cores, DyadicTree};
use aus_core::group::{enumerate_irreps, haar_grid, irrep_matrix, Group, GroupPoint, IrrepLabel, QuadratureGrid};
use aus_core::rademacher::{delta_inner, eval_delta, eval_psi, step2_deficit, RampShape};
use aus_core::spectral::{
    analyze, kunze_sup_bound, l2_norm_sq, random_coeffs, synthesize_grid, GridFunction, SpectralCoeffs,
};
use aus_core::verifier::{
    inflate_omega, inject_support, scale_record, verify_bundle, VerificationReport, VerifyOptions,
};

const ORTHO_TOL: f64 = 1e-9;
const PARSEVAL_REL_TOL: f64 = 1e-8;
const ROUND_TRIP_TOL: f64 = 1e-9;
const NU_REL_TOL: f64 = 1e-8;
const INNER_TOL: f64 = 1e-8;
const RESIDUAL_CIRCLE: f64 = 1e-10;
const RESIDUAL_SU2: f64 = 1e-9;
const KUNZE_MARGIN: f64 = -1e-10;
const MIN_SWEEP: usize = 8192;

type Outcome = Result<String, String>;

fn one(group: Group) -> SpectralCoeffs {
    SpectralCoeffs::constant(group, Complex64::new(1.0, 0.0))
}

fn sqrt2_cos() -> SpectralCoeffs {
    let mut f = SpectralCoeffs::new(Group::Circle);
    let c = DMatrix::from_element(1, 1, Complex64::new(FRAC_1_SQRT_2, 0.0));
    f.insert(IrrepLabel::Circle(1), c.clone()).unwrap();
    f.insert(IrrepLabel::Circle(-1), c).unwrap();
    f
}

// Normalized CDF of 2 cos^2(2 pi t).
fn cos_cdf(t: f64) -> f64 {
    t + (2.0 * TAU * t).sin() / (2.0 * TAU)
}

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    check(t < limit, format!("runtime {:.1} s exceeds {} s", t.as_secs_f64(), limit.as_secs()))
}

fn c1_orthogonality() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (group, b) in [(Group::Circle, 8), (Group::Torus(2), 3), (Group::Su2, 3)] {
        let grid = haar_grid(group, b);
        let labels = enumerate_irreps(group, b);
        let mats: Vec<Vec<DMatrix<Complex64>>> = labels
            .iter()
            .map(|l| (0..grid.len()).map(|n| irrep_matrix(group, l, &grid.point(n)).unwrap()).collect())
            .collect();
        for (a, la) in labels.iter().enumerate() {
            for (c, lc) in labels.iter().enumerate() {
                let (da, dc) = (la.degree(), lc.degree());
                for i in 0..da {
                    for j in 0..da {
                        for k in 0..dc {
                            for l in 0..dc {
                                let inner: Complex64 = (0..grid.len())
                                    .map(|n| mats[a][n][(i, j)] * mats[c][n][(k, l)].conj() * grid.weight(n))
                                    .sum();
                                let kron = if a == c && i == k && j == l { 1.0 } else { 0.0 };
                                worst = worst.max((inner * da as f64 - kron).norm());
                            }
                        }
                    }
                }
            }
        }
    }
    check(worst < ORTHO_TOL, format!("max deviation {worst:.3e}"))?;
    within(Duration::from_secs(30), start)?;
    Ok(format!("max deviation {worst:.2e} (circle B<=8, torus:2 B<=3, su2 2j<=6)"))
}

fn c2_parseval() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut rel, mut round) = (0.0f64, 0.0f64);
    for (group, b) in [(Group::Circle, 8), (Group::Torus(2), 3), (Group::Su2, 3)] {
        let grid = haar_grid(group, b);
        let l2_grid = haar_grid(group, 2 * b);
        for _ in 0..50 {
            let a = random_coeffs(group, b, &mut rng);
            let hs = l2_norm_sq(&a);
            let v = synthesize_grid(&a, &l2_grid);
            let l2: f64 = v.iter().enumerate().map(|(n, z)| z.norm_sqr() * l2_grid.weight(n)).sum();
            rel = rel.max((l2 - hs).abs() / hs);
            let back = analyze(&GridFunction::new(&grid, synthesize_grid(&a, &grid)).unwrap(), &grid, b).unwrap();
            round = round.max(back.sub(&a).max_entry());
        }
    }
    check(rel < PARSEVAL_REL_TOL, format!("Parseval relative error {rel:.3e}"))?;
    check(round < ROUND_TRIP_TOL, format!("round trip error {round:.3e}"))?;
    within(Duration::from_secs(30), start)?;
    Ok(format!("Parseval {rel:.2e}, round trip {round:.2e} (50 functions per group)"))
}

fn c3_dyadic() -> Outcome {
    let start = Instant::now();
    let identity = |t: f64| t;
    let mut worst_nu = 0.0f64;
    for (name, f0, cdf) in [
        ("one", one(Group::Circle), &identity as &dyn Fn(f64) -> f64),
        ("sqrt2 cos", sqrt2_cos(), &cos_cdf),
    ] {
        let tree = DyadicTree::from_weight(&f0, 8).map_err(|e| e.to_string())?;
        for k in 1..=8u32 {
            let b = tree.boundaries(k).unwrap();
            if k > 1 {
                let coarse = tree.boundaries(k - 1).unwrap();
                let nested = coarse.iter().enumerate().all(|(j, &c)| b[2 * j].to_bits() == c.to_bits());
                check(nested, format!("{name}: level {k} not nested"))?;
            }
            let target = 2f64.powi(-(k as i32));
            for w in b.windows(2) {
                let mass = cdf(w[1]) - cdf(w[0]);
                worst_nu = worst_nu.max((mass - target).abs() / target);
            }
            let cores = shrink_cores(&tree, k).unwrap();
            for j in 0..cores.cells.len() {
                let deficit = cores.deficit(j);
                check(
                    deficit < 2f64.powi(-2 * k as i32),
                    format!("{name}: level {k} cell {j} deficit {deficit:e}"),
                )?;
            }
            let omega = cores.measure();
            check(omega >= 1.0 - target, format!("{name}: mu(Omega) {omega} at level {k}"))?;
        }
    }
    check(worst_nu < NU_REL_TOL, format!("nu-mass relative error {worst_nu:.3e}"))?;
    within(Duration::from_secs(10), start)?;
    Ok(format!("levels 1..=8 nested, nu-mass error {worst_nu:.2e}"))
}

fn c4_deficit() -> Outcome {
    let start = Instant::now();
    let mut worst_ratio = 0.0f64;
    let mut worst_inner = 0.0f64;
    let mut worst_cross = 0.0f64;
    let n = 1 << 16;
    for (f0, sup_sq) in [(one(Group::Circle), 1.0), (sqrt2_cos(), 2.0)] {
        let tree = DyadicTree::from_weight(&f0, 6).map_err(|e| e.to_string())?;
        for k in 1..=6u32 {
            let d = step2_deficit(&tree, k, &f0, RampShape::Smooth).map_err(|e| e.to_string())?;
            let bound = 2f64.powi(-(k as i32)) * sup_sq;
            worst_ratio = worst_ratio.max(d / bound);
            // Midpoint rule on a fine grid as an independent estimate.
            let brute: f64 = (0..n)
                .map(|i| {
                    let g = GroupPoint::circle(TAU * (i as f64 + 0.5) / n as f64);
                    let p = eval_psi(&tree, k, &f0, RampShape::Smooth, &g).unwrap();
                    let q = eval_delta(&tree, k, &f0, &g).unwrap();
                    (p - q).norm_sqr()
                })
                .sum::<f64>()
                / n as f64;
            worst_cross = worst_cross.max((brute - d).abs());
            for l in 1..=6u32 {
                if l != k {
                    worst_inner = worst_inner.max(delta_inner(&tree, k, l).map_err(|e| e.to_string())?.abs());
                }
            }
        }
    }
    check(worst_ratio <= 1.0, format!("deficit / bound reaches {worst_ratio:.4}"))?;
    check(worst_cross < 1e-4, format!("deficit disagrees with quadrature by {worst_cross:.3e}"))?;
    check(worst_inner < INNER_TOL, format!("|<delta_k, delta_l>| reaches {worst_inner:.3e}"))?;
    within(Duration::from_secs(30), start)?;
    Ok(format!(
        "max deficit / bound {worst_ratio:.3}, max |<delta_k, delta_l>| {worst_inner:.2e}"
    ))
}

fn run_and_verify(params: &ConstructionParams, dir: &std::path::Path, tag: &str) -> Result<(SystemBundle, VerificationReport, Vec<u8>, Vec<u8>), String> {
    let bundle = construct_system(params).map_err(|e| e.to_string())?;
    let path = dir.join(format!("{tag}.json"));
    bundle.write(&path).map_err(|e| e.to_string())?;
    let stored = SystemBundle::read(&path).map_err(|e| e.to_string())?;
    let report = verify_bundle(&stored, &VerifyOptions::default()).map_err(|e| e.to_string())?;
    let report_path = dir.join(format!("{tag}.report.json"));
    std::fs::write(&report_path, report.to_json()).map_err(|e| e.to_string())?;
    let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
    let report_bytes = std::fs::read(&report_path).map_err(|e| e.to_string())?;
    Ok((stored, report, bytes, report_bytes))
}

fn end_to_end_checks(bundle: &SystemBundle, report: &VerificationReport, residual_tol: f64) -> Result<(), String> {
    check(report.passed, format!("verifier failed: {:?}", report.failed_checks))?;
    check(!bundle.partial, "bundle is partial")?;
    let mut seen = BTreeSet::new();
    for (r, rep) in bundle.records.iter().zip(&report.records) {
        let support = r.coeffs.support();
        check(support.is_disjoint(&seen), format!("m={}: support meets earlier supports", r.m))?;
        seen.extend(support);
        check(rep.disjoint.residual < residual_tol, format!("m={}: residual {:.3e}", r.m, rep.disjoint.residual))?;
        check(rep.upper.margin > 0.0, format!("m={}: upper margin {:.3e}", r.m, rep.upper.margin))?;
        check(rep.lower.margin > 0.0, format!("m={}: lower margin {:.3e}", r.m, rep.lower.margin))?;
        let eps = bundle.epsilons[r.m - 1];
        match r.delta_m {
            Some(d) => {
                check(r.sup_err < d * d + 2.0 * d, format!("m={}: sup_err {:.3e}", r.m, r.sup_err))?;
                check(d * d + 2.0 * d <= eps, format!("m={}: delta^2 + 2 delta > eps", r.m))?;
            }
            None => check(r.sup_err < eps, format!("m=1: sup_err {:.3e}", r.sup_err))?,
        }
    }
    Ok(())
}

fn circle_params() -> ConstructionParams {
    ConstructionParams::new(one(Group::Circle), vec![0.5, 0.25, 0.125, 0.0625])
}

fn c5_circle(dir: &std::path::Path) -> Result<(String, SystemBundle), String> {
    let start = Instant::now();
    let (bundle, report, _, _) = run_and_verify(&circle_params(), dir, "c5")?;
    check(bundle.records.len() == 4, format!("{} records", bundle.records.len()))?;
    check(
        report.grid.sweep_nodes.iter().all(|&n| n >= MIN_SWEEP),
        format!("sweep grid {:?} below {MIN_SWEEP}", report.grid.sweep_nodes),
    )?;
    end_to_end_checks(&bundle, &report, RESIDUAL_CIRCLE)?;
    within(Duration::from_secs(120), start)?;
    let ks: Vec<u32> = bundle.records.iter().map(|r| r.k_m).collect();
    let bs: Vec<u32> = bundle.records.iter().map(|r| r.bandlimit).collect();
    let minimum = |f: fn(&aus_core::verifier::RecordReport) -> f64| report.records.iter().map(f).fold(f64::INFINITY, f64::min);
    Ok((
        format!(
            "k_m {ks:?}, bandlimits {bs:?}, min upper {:.3e}, min lower {:.3e} [{:.1} s]",
            minimum(|r| r.upper.margin),
            minimum(|r| r.lower.margin),
            start.elapsed().as_secs_f64()
        ),
        bundle,
    ))
}

fn c6_su2(dir: &std::path::Path) -> Outcome {
    let start = Instant::now();
    let mut params = ConstructionParams::new(one(Group::Su2), vec![0.6, 0.5, 0.4]);
    params.band_cap = 16;
    let (bundle, report, _, _) = run_and_verify(&params, dir, "c6")?;
    end_to_end_checks(&bundle, &report, RESIDUAL_SU2)?;
    within(Duration::from_secs(600), start)?;
    Ok(format!("3 records verified [{:.1} s]", start.elapsed().as_secs_f64()))
}

fn c7_kunze() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = f64::INFINITY;
    for (group, b) in [(Group::Circle, 8), (Group::Torus(2), 3), (Group::Su2, 3)] {
        let grid = QuadratureGrid::fine(group, b as f64, 8, 256);
        for _ in 0..100 {
            let a = random_coeffs(group, b, &mut rng);
            let sup = synthesize_grid(&a, &grid).iter().map(|z| z.norm()).fold(0.0, f64::max);
            worst = worst.min(kunze_sup_bound(&a) - sup);
        }
    }
    check(worst >= KUNZE_MARGIN, format!("bound minus sup reaches {worst:.3e}"))?;
    within(Duration::from_secs(60), start)?;
    Ok(format!("min(bound - sup) {worst:.3e} over 300 coefficient sets"))
}

fn c8_negative_controls(bundle: &SystemBundle) -> Outcome {
    let opts = VerifyOptions::default();
    let failed = |b: &SystemBundle| verify_bundle(b, &opts).map(|r| r.failed_checks).map_err(|e| e.to_string());
    let eps = |i: usize| bundle.epsilons[i];
    let injected = inject_support(bundle, 1, 1e-3).ok_or("m=2 has empty Lambda")?;
    let cases = [
        ("support injection", injected, "m=2:disjoint"),
        ("scale up", scale_record(bundle, 2, 1.0 + 2.0 * eps(2)), "m=3:upper"),
        ("scale down", scale_record(bundle, 0, 1.0 - 2.0 * eps(0)), "m=1:lower"),
        ("omega inflation", inflate_omega(bundle, 1), "m=2:omega"),
    ];
    for (name, b, expected) in &cases {
        let got = failed(b)?;
        check(got == [expected.to_string()], format!("{name}: failed {got:?}, expected [{expected}]"))?;
    }
    Ok("each corruption fails exactly its targeted check".into())
}

fn c9_determinism(dir: &std::path::Path) -> Outcome {
    let (_, _, b1, r1) = run_and_verify(&circle_params(), dir, "c9a")?;
    let (_, _, b2, r2) = run_and_verify(&circle_params(), dir, "c9b")?;
    check(b1 == b2, "bundles differ")?;
    check(r1 == r2, "reports differ")?;
    Ok(format!("bundle ({} bytes) and report ({} bytes) identical", b1.len(), r1.len()))
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "Peter-Weyl orthogonality", c1_orthogonality()),
        (2, "Parseval round trip", c2_parseval()),
        (3, "dyadic conditions", c3_dyadic()),
        (4, "deficit and Rademacher orthogonality", c4_deficit()),
    ];
    let circle = c5_circle(dir.path());
    let bundle = circle.as_ref().ok().map(|(_, b)| b.clone());
    results.push((5, "end-to-end circle", circle.map(|(s, _)| s)));
    results.push((6, "end-to-end SU(2)", c6_su2(dir.path())));
    results.push((7, "Kunze bound", c7_kunze()));
    results.push((
        8,
        "negative controls",
        bundle.as_ref().map_or_else(|| Err("no circle bundle".to_string()), c8_negative_controls),
    ));
    results.push((9, "determinism", c9_determinism(dir.path())));

    let mut failures = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS criterion {n} ({name}): {detail}"),
            Err(why) => {
                failures += 1;
                println!("FAIL criterion {n} ({name}): {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", results.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
