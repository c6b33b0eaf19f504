use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aus_core::constructor::{construct_system, SystemBundle};
use aus_core::rademacher::RampShape;
use aus_core::report::{emit_plots, run_selftest, summary_lines, ConfigError, EpsSpec, F0Spec, ScenarioConfig};
use aus_core::verifier::{verify_bundle, VerifyOptions, DEFAULT_GRID_FACTOR, DEFAULT_RANDOM_POINTS};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aus", version, about = "Almost unimodular systems with disjoint spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a system and write its bundle.
    Construct(ConstructArgs),
    /// Check a bundle and write a report.
    Verify(VerifyArgs),
    /// Emit CSV and SVG profiles of a bundle.
    Plot(PlotArgs),
    /// Run quick invariant checks of every module.
    Selftest,
}

#[derive(Args)]
struct ConstructArgs {
    /// JSON scenario file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// circle, torus:d or su2.
    #[arg(long)]
    group: Option<String>,
    /// Builtin `one` or a JSON file of coefficients.
    #[arg(long)]
    f0: Option<String>,
    /// `0.5,0.25,...` or `geometric:start,ratio,count`.
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    k_cap: Option<u32>,
    /// Bandlimit cap (`2j` on su2).
    #[arg(long)]
    band_cap: Option<u32>,
    #[arg(long)]
    dense_factor: Option<usize>,
    /// smooth or linear.
    #[arg(long)]
    ramp: Option<RampShape>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    bundle: PathBuf,
    #[arg(long, default_value_t = DEFAULT_GRID_FACTOR)]
    grid_factor: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_RANDOM_POINTS)]
    random_points: usize,
    /// Report path; defaults to `<bundle>.report.json`.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    bundle: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
}

fn thread_pool() {
    if let Some(n) = std::env::var("AUS_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn load_f0(s: &str) -> Result<F0Spec, ConfigError> {
    if s == "one" {
        return Ok(F0Spec::Builtin(s.into()));
    }
    let text = std::fs::read_to_string(s)?;
    let coeffs = serde_json::from_str(&text)?;
    Ok(F0Spec::Inline { coeffs })
}

fn scenario(a: &ConstructArgs) -> Result<ScenarioConfig, ConfigError> {
    let mut c = match (&a.config, &a.eps) {
        (Some(path), _) => ScenarioConfig::read(path)?,
        (None, Some(eps)) => ScenarioConfig::new("circle", EpsSpec::parse(eps)?),
        (None, None) => return Err(ConfigError::Invalid("either --config or --eps is required".into())),
    };
    if let Some(g) = &a.group {
        c.group = g.clone();
    }
    if let Some(f) = &a.f0 {
        c.f0 = load_f0(f)?;
    }
    if let Some(e) = &a.eps {
        c.eps = EpsSpec::parse(e)?;
    }
    c.count = a.count.or(c.count);
    c.k_cap = a.k_cap.or(c.k_cap);
    c.band_cap = a.band_cap.or(c.band_cap);
    c.dense_factor = a.dense_factor.or(c.dense_factor);
    if let Some(r) = a.ramp {
        c.ramp = r;
    }
    if let Some(o) = &a.out {
        c.out = Some(o.clone());
    }
    Ok(c)
}

fn construct(a: &ConstructArgs) -> ExitCode {
    let config = match scenario(a) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let params = match config.params() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out = config.out.clone().unwrap_or_else(|| PathBuf::from("bundle.json"));
    let (bundle, code) = match construct_system(&params) {
        Ok(b) => (Some(b), 0),
        Err(failure) => {
            eprintln!("error: {}", failure.error);
            (failure.bundle.map(|b| *b), 3)
        }
    };
    if let Some(b) = bundle {
        for line in summary_lines(&b) {
            println!("{line}");
        }
        if let Err(e) = b.write(&out) {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
        let tag = if b.partial { " (partial)" } else { "" };
        println!("wrote {} records to {}{tag}", b.records.len(), out.display());
    }
    ExitCode::from(code)
}

fn read_bundle(path: &Path) -> Result<SystemBundle, ExitCode> {
    SystemBundle::read(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(2)
    })
}

fn verify(a: &VerifyArgs) -> ExitCode {
    let bundle = match read_bundle(&a.bundle) {
        Ok(b) => b,
        Err(code) => return code,
    };
    let opts = VerifyOptions {
        grid_factor: a.grid_factor,
        random_points: a.random_points,
        seed: a.seed,
    };
    let report = match verify_bundle(&bundle, &opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let path = a.report.clone().unwrap_or_else(|| a.bundle.with_extension("report.json"));
    if let Err(e) = std::fs::write(&path, report.to_json()) {
        eprintln!("error: {}: {e}", path.display());
        return ExitCode::from(2);
    }
    for r in &report.records {
        println!(
            "m={} disjoint={} residual={:.2e} upper={:.4e} lower={:.4e} mu(Omega)={:.6}>={:.6} sup_err={:.3e}",
            r.m,
            r.disjoint.passed,
            r.disjoint.residual,
            r.upper.margin,
            r.lower.margin,
            r.omega.measure,
            r.omega.bound,
            r.chain.sup_err
        );
    }
    if report.passed {
        println!("PASS ({})", path.display());
        ExitCode::SUCCESS
    } else {
        println!("FAIL: {} ({})", report.failed_checks.join(", "), path.display());
        ExitCode::from(1)
    }
}

fn plot(a: &PlotArgs) -> ExitCode {
    let bundle = match read_bundle(&a.bundle) {
        Ok(b) => b,
        Err(code) => return code,
    };
    match emit_plots(&bundle, &a.out_dir) {
        Ok(files) if files.is_empty() => {
            eprintln!("warning: bundle has no records, nothing written");
            ExitCode::SUCCESS
        }
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn selftest() -> ExitCode {
    let cases = run_selftest();
    for c in &cases {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if cases.iter().all(|c| c.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    thread_pool();
    match &cli.command {
        Command::Construct(a) => construct(a),
        Command::Verify(a) => verify(a),
        Command::Plot(a) => plot(a),
        Command::Selftest => selftest(),
    }
}
