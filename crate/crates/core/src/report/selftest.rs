use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constructor::{construct_system, ConstructionParams};
use crate::dyadic::{shrink_cores, DyadicTree};
use crate::group::{enumerate_irreps, haar_grid, irrep_matrix, Group, IrrepLabel};
use crate::rademacher::{delta_inner, step2_deficit, RampShape};
use crate::spectral::{analyze, l2_norm_sq, random_coeffs, synthesize_grid, GridFunction, SpectralCoeffs};
use crate::verifier::{inject_support, scale_record, verify_bundle, VerifyOptions};

/// Outcome of one selftest case.
#[derive(Clone, Debug, PartialEq)]
pub struct SelftestCase {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn case(name: &'static str, passed: bool, detail: String) -> SelftestCase {
    SelftestCase { name, passed, detail }
}

fn orthogonality(group: Group, b: u32) -> f64 {
    let grid = haar_grid(group, b);
    let labels = enumerate_irreps(group, b);
    let mats: Vec<Vec<DMatrix<Complex64>>> = labels
        .iter()
        .map(|l| (0..grid.len()).map(|i| irrep_matrix(group, l, &grid.point(i)).unwrap()).collect())
        .collect();
    let mut worst = 0.0f64;
    for (a, la) in labels.iter().enumerate() {
        for (c, lc) in labels.iter().enumerate() {
            let (da, dc) = (la.degree(), lc.degree());
            for idx in 0..da * da * dc * dc {
                let (i, j) = (idx / (da * dc * dc), (idx / (dc * dc)) % da);
                let (k, l) = ((idx / dc) % dc, idx % dc);
                let inner: Complex64 = (0..grid.len())
                    .map(|n| mats[a][n][(i, j)] * mats[c][n][(k, l)].conj() * grid.weight(n))
                    .sum();
                let expected = if a == c && i == k && j == l { 1.0 } else { 0.0 };
                worst = worst.max((inner * da as f64 - expected).norm());
            }
        }
    }
    worst
}

fn parseval(group: Group, b: u32, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = haar_grid(group, b);
    let (mut rel, mut round) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let a = random_coeffs(group, b, &mut rng);
        let v = synthesize_grid(&a, &grid);
        let l2: f64 = v.iter().enumerate().map(|(i, z)| z.norm_sqr() * grid.weight(i)).sum();
        rel = rel.max((l2 - l2_norm_sq(&a)).abs() / l2_norm_sq(&a));
        let back = analyze(&GridFunction::new(&grid, v).unwrap(), &grid, b).unwrap();
        round = round.max(back.sub(&a).max_entry());
    }
    (rel, round)
}

fn dyadic_ok(f0: &SpectralCoeffs, k_max: u32) -> Result<(), String> {
    let tree = DyadicTree::from_weight(f0, k_max).map_err(|e| e.to_string())?;
    for k in 1..=k_max {
        let masses = tree.nu_masses(k).map_err(|e| e.to_string())?.unwrap();
        let target = 2f64.powi(-(k as i32));
        if masses.iter().any(|m| (m - target).abs() > 1e-8 * target) {
            return Err(format!("unequal masses at level {k}"));
        }
        if k > 1 {
            let fine = tree.boundaries(k).unwrap();
            let coarse = tree.boundaries(k - 1).unwrap();
            if coarse.iter().enumerate().any(|(j, &c)| fine[2 * j] != c) {
                return Err(format!("level {k} does not refine level {}", k - 1));
            }
        }
        let cores = shrink_cores(&tree, k).unwrap();
        if (0..cores.cells.len()).any(|j| cores.deficit(j) >= 2f64.powi(-2 * k as i32)) {
            return Err(format!("core deficit too large at level {k}"));
        }
        if cores.measure() < 1.0 - target {
            return Err(format!("Omega too small at level {k}"));
        }
    }
    Ok(())
}

/// Quick versions of the invariant suites of every module.
pub fn run_selftest() -> Vec<SelftestCase> {
    let mut out = Vec::new();
    let one = |g| SpectralCoeffs::constant(g, Complex64::new(1.0, 0.0));

    let dev = [(Group::Circle, 8), (Group::Torus(2), 3), (Group::Su2, 3)]
        .into_iter()
        .map(|(g, b)| orthogonality(g, b))
        .fold(0.0, f64::max);
    out.push(case("orthogonality", dev < 1e-9, format!("max deviation {dev:.2e}")));

    let (mut rel, mut round) = (0.0f64, 0.0f64);
    for (g, b) in [(Group::Circle, 8), (Group::Torus(2), 3), (Group::Su2, 3)] {
        let (r, t) = parseval(g, b, 7);
        rel = rel.max(r);
        round = round.max(t);
    }
    out.push(case(
        "parseval",
        rel < 1e-8 && round < 1e-9,
        format!("relative error {rel:.2e}, round trip {round:.2e}"),
    ));

    let mut cos = SpectralCoeffs::new(Group::Circle);
    let h = DMatrix::from_element(1, 1, Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0));
    cos.insert(IrrepLabel::Circle(1), h.clone()).unwrap();
    cos.insert(IrrepLabel::Circle(-1), h).unwrap();
    let dy = dyadic_ok(&one(Group::Circle), 8).and_then(|_| dyadic_ok(&cos, 8));
    out.push(case("dyadic", dy.is_ok(), dy.err().unwrap_or_else(|| "levels 1..=8".into())));

    let mut worst_ratio = 0.0f64;
    let mut worst_inner = 0.0f64;
    for (f0, sup_sq) in [(one(Group::Circle), 1.0), (cos.clone(), 2.0)] {
        let tree = DyadicTree::from_weight(&f0, 6).unwrap();
        for k in 1..=6 {
            let d = step2_deficit(&tree, k, &f0, RampShape::Smooth).unwrap();
            worst_ratio = worst_ratio.max(d / (2f64.powi(-(k as i32)) * sup_sq));
            for l in (k + 1)..=6 {
                worst_inner = worst_inner.max(delta_inner(&tree, k, l).unwrap().abs());
            }
        }
    }
    out.push(case(
        "rademacher",
        worst_ratio <= 1.0 && worst_inner < 1e-8,
        format!("deficit / bound <= {worst_ratio:.3}, |<delta_k, delta_l>| <= {worst_inner:.2e}"),
    ));

    let params = ConstructionParams::new(one(Group::Circle), vec![0.5, 0.25]);
    let opts = VerifyOptions {
        random_points: 1000,
        ..VerifyOptions::default()
    };
    match construct_system(&params) {
        Ok(bundle) => {
            let clean = verify_bundle(&bundle, &opts).map(|r| r.passed).unwrap_or(false);
            out.push(case("construct+verify", clean, "circle, eps = (0.5, 0.25)".into()));
            let inject = inject_support(&bundle, 1, 1e-3)
                .and_then(|b| verify_bundle(&b, &opts).ok())
                .map(|r| r.failed_checks == ["m=2:disjoint"])
                .unwrap_or(false);
            let eps = bundle.epsilons[0];
            let scaled = verify_bundle(&scale_record(&bundle, 0, 1.0 + 2.0 * eps), &opts)
                .map(|r| r.failed_checks == ["m=1:upper"])
                .unwrap_or(false);
            out.push(case(
                "negative controls",
                inject && scaled,
                format!("injected support caught: {inject}, scaled amplitude caught: {scaled}"),
            ));
        }
        Err(e) => out.push(case("construct+verify", false, e.to_string())),
    }
    out
}
