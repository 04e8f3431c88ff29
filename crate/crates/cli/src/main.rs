//! `mcs`: solver runs, stability scans and threshold checks from the command line.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage or config error,
//! 3 numerical breakdown.

// `!(x > 0.0)` style checks are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mcs_adi::analysis::{
    default_theta_grid, figure1_scan, run_checks, theta_grid, CheckOutcome, Theorem, VerifyOptions,
    DEFAULT_SAMPLES,
};
use mcs_adi::solver::{
    parse_pairs, InitialCondition, ProblemConfig, SchemeKind, SolverError, SplitOperators,
};
use mcs_adi::spectrum::{fourier_symbols, FourierMode};
use mcs_adi::stability::{eval_douglas_function, eval_stability_function};

#[derive(Debug, Parser)]
#[command(name = "mcs", version, about = "Modified Craig-Sneyd ADI solver and stability toolkit")]
struct Cli {
    /// Output file (CSV). Without it results go to stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Random seed for sampling; in `solve` it replaces the seed of a `random:` initial field.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    /// Problem description in `key = value` format.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Time-step a problem and write the final field.
    Solve(SolveArgs),
    /// Random scan of max |S| against θ.
    Figure1(Figure1Args),
    /// Run the stability threshold checks.
    Verify(VerifyArgs),
    /// Compare the measured one-step amplification of a Fourier mode with S.
    Amplification(AmplificationArgs),
}

#[derive(Debug, Args)]
struct Overrides {
    /// Override `scheme` from the config (mcs or douglas).
    #[arg(long)]
    scheme: Option<SchemeKind>,
    /// Override `theta` from the config.
    #[arg(long)]
    theta: Option<f64>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Override `steps` from the config.
    #[arg(long)]
    steps: Option<usize>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Args)]
struct Figure1Args {
    /// Samples per θ.
    #[arg(long, default_value_t = DEFAULT_SAMPLES, value_parser = parse_samples)]
    samples: usize,
    #[arg(long)]
    theta_min: Option<f64>,
    #[arg(long)]
    theta_max: Option<f64>,
    #[arg(long)]
    theta_step: Option<f64>,
    /// Extra θ values; without a range flag only these are scanned.
    #[arg(long, value_delimiter = ',')]
    theta: Vec<f64>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// 1, 2, 3, 4, 5 or all.
    #[arg(long, default_value = "all")]
    theorem: String,
    /// θ for the cubic-coefficient check (`--theorem 3`).
    #[arg(long)]
    theta: Option<f64>,
    /// Random samples per θ for `--theorem 5`.
    #[arg(long, default_value_t = 1_000_000, value_parser = parse_samples)]
    samples: usize,
}

#[derive(Debug, Args)]
struct AmplificationArgs {
    #[arg(long)]
    k1: usize,
    #[arg(long)]
    k2: usize,
    #[command(flatten)]
    overrides: Overrides,
}

fn parse_samples(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Breakdown(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Breakdown(_) => 3,
        }
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        Failure::Breakdown(e.to_string())
    }
}

fn io_failure(path: Option<&Path>, e: io::Error) -> Failure {
    match path {
        Some(p) => Failure::Usage(format!("{}: {e}", p.display())),
        None => Failure::Usage(e.to_string()),
    }
}

/// 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn with_output(
    path: Option<&Path>,
    body: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<(), Failure> {
    let result = match path {
        Some(p) => File::create(p).and_then(|f| {
            let mut w = BufWriter::new(f);
            body(&mut w)?;
            w.flush()
        }),
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            body(&mut w).and_then(|_| w.flush())
        }
    };
    result.map_err(|e| io_failure(path, e))
}

/// `dir/name.csv` → `dir/name.<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn load_config(cli: &Cli, overrides: &[(&str, Option<String>)]) -> Result<ProblemConfig, Failure> {
    let path = cli.config.as_deref().ok_or_else(|| Failure::Usage("--config is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| io_failure(Some(path), e))?;
    let bad = |e: &dyn std::fmt::Display| Failure::Usage(format!("{}: {e}", path.display()));
    let mut pairs = parse_pairs(&text).map_err(|e| bad(&e))?;
    for (key, value) in overrides {
        if let Some(v) = value {
            pairs.insert((*key).to_string(), v.clone());
        }
    }
    let mut config = ProblemConfig::from_pairs(&pairs).map_err(|e| bad(&e))?;
    if let (Some(seed), InitialCondition::Random(_)) = (cli.seed, &config.initial) {
        config.initial = InitialCondition::Random(seed);
    }
    Ok(config)
}

fn scheme_overrides(o: &Overrides) -> Vec<(&'static str, Option<String>)> {
    vec![("scheme", o.scheme.map(|s| s.to_string())), ("theta", o.theta.map(|t| t.to_string()))]
}

fn cmd_solve(cli: &Cli, args: &SolveArgs) -> Result<ExitCode, Failure> {
    let mut overrides = scheme_overrides(&args.overrides);
    overrides.push(("steps", args.steps.map(|n| n.to_string())));
    let config = load_config(cli, &overrides)?;
    let ops = SplitOperators::new(&config.coeffs, &config.grid).with_theta_dt(config.params.theta_dt())?;

    let mut u = config.initial.field(&config.grid);
    let mut norms = vec![(0, u.max_norm(), u.l2_norm())];
    for n in 1..=config.steps {
        u = ops.step(config.scheme, &config.params, &u)?;
        norms.push((n, u.max_norm(), u.l2_norm()));
    }

    let write_norms = |w: &mut dyn Write| -> io::Result<()> {
        writeln!(w, "step,max_norm,l2_norm")?;
        for (n, max, l2) in &norms {
            writeln!(w, "{n},{},{}", num(*max), num(*l2))?;
        }
        Ok(())
    };
    with_output(cli.out.as_deref(), |w| u.write_csv(w))?;
    match cli.out.as_deref() {
        Some(out) => {
            let log = sibling(out, "norms.csv");
            with_output(Some(&log), write_norms)?;
            println!(
                "{} {} steps on {}x{}: max norm {} -> {}",
                config.scheme,
                config.steps,
                config.grid.m1,
                config.grid.m2,
                num(norms[0].1),
                num(u.max_norm())
            );
            println!("field: {}", out.display());
            println!("norms: {}", log.display());
        }
        None => write_norms(&mut io::stderr().lock()).map_err(|e| io_failure(None, e))?,
    }
    Ok(ExitCode::SUCCESS)
}

fn figure1_grid(args: &Figure1Args) -> Result<Vec<f64>, Failure> {
    let ranged = args.theta_min.is_some() || args.theta_max.is_some() || args.theta_step.is_some();
    let mut grid = if ranged {
        let step = args.theta_step.unwrap_or(0.0025);
        if !(step > 0.0) {
            return Err(Failure::Usage("--theta-step must be positive".into()));
        }
        let (lo, hi) = (args.theta_min.unwrap_or(0.25), args.theta_max.unwrap_or(0.5));
        if !(lo <= hi) {
            return Err(Failure::Usage("--theta-min exceeds --theta-max".into()));
        }
        theta_grid(lo, hi, step)
    } else if args.theta.is_empty() {
        default_theta_grid()
    } else {
        Vec::new()
    };
    grid.extend(&args.theta);
    if let Some(bad) = grid.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Failure::Usage(format!("θ must be positive, got {bad}")));
    }
    Ok(grid)
}

fn cmd_figure1(cli: &Cli, args: &Figure1Args) -> Result<ExitCode, Failure> {
    let grid = figure1_grid(args)?;
    let seed = cli.seed.unwrap_or(42);
    let report = figure1_scan(seed, args.samples, &grid);
    with_output(cli.out.as_deref(), |w| report.write_csv(w))?;
    if let Some(out) = cli.out.as_deref() {
        let meta = sibling(out, "meta.txt");
        with_output(Some(&meta), |w| report.write_metadata(w))?;
        let (theta, max) = report
            .theta_grid
            .iter()
            .zip(&report.max_abs_s)
            .fold((f64::NAN, f64::NEG_INFINITY), |b, (t, m)| if *m > b.1 { (*t, *m) } else { b });
        println!("{} θ values, {} samples each, seed {seed}", grid.len(), args.samples);
        println!("largest max|S| = {} at θ = {}", num(max), num(theta));
        println!("scan: {}", out.display());
        println!("metadata: {}", meta.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> Result<ExitCode, Failure> {
    let theorems = if args.theorem.trim() == "all" {
        Theorem::ALL.to_vec()
    } else {
        vec![args.theorem.parse::<Theorem>().map_err(Failure::Usage)?]
    };
    if let Some(t) = args.theta {
        if !(t.is_finite() && t > 0.0) {
            return Err(Failure::Usage(format!("θ must be positive, got {t}")));
        }
    }
    let opts = VerifyOptions { theta: args.theta, samples: args.samples, seed: cli.seed.unwrap_or(42) };
    let outcomes: Vec<CheckOutcome> = theorems.iter().flat_map(|t| run_checks(*t, &opts)).collect();

    for c in &outcomes {
        println!(
            "[{}] theorem {}: {} = {} (required {})",
            if c.passed { "PASS" } else { "FAIL" },
            c.theorem,
            c.name,
            num(c.measured),
            c.requirement
        );
    }
    let passed = outcomes.iter().filter(|c| c.passed).count();
    println!("{passed}/{} checks passed", outcomes.len());
    if let Some(out) = cli.out.as_deref() {
        with_output(Some(out), |w| {
            writeln!(w, "theorem,check,measured,requirement,passed")?;
            for c in &outcomes {
                writeln!(
                    w,
                    "{},\"{}\",{},\"{}\",{}",
                    c.theorem,
                    c.name,
                    num(c.measured),
                    c.requirement,
                    c.passed
                )?;
            }
            Ok(())
        })?;
    }
    Ok(if passed == outcomes.len() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

/// Relative deviation above which the measured amplification counts as a mismatch.
const AMPLIFICATION_TOLERANCE: f64 = 1e-12;

fn cmd_amplification(cli: &Cli, args: &AmplificationArgs) -> Result<ExitCode, Failure> {
    let config = load_config(cli, &scheme_overrides(&args.overrides))?;
    let mode = FourierMode::new(args.k1, args.k2);
    if !mode.in_grid(&config.grid) {
        return Err(Failure::Usage(format!(
            "mode ({}, {}) outside the {} x {} grid",
            args.k1, args.k2, config.grid.m1, config.grid.m2
        )));
    }
    let theta = config.params.theta();
    let ops = SplitOperators::new(&config.coeffs, &config.grid).with_theta_dt(config.params.theta_dt())?;
    let measured = ops.measure_amplification(config.scheme, &config.params, mode)?;
    let pt = fourier_symbols(&config.coeffs, &config.grid, &config.params, mode);
    let predicted = match config.scheme {
        SchemeKind::Mcs => eval_stability_function(theta, &pt),
        SchemeKind::Douglas => eval_douglas_function(theta, &pt),
    }
    .map_err(|e| Failure::Breakdown(e.to_string()))?;
    let diff = (measured.factor - predicted).norm();
    let relative = diff / predicted.norm().max(1.0);

    println!("scheme {} θ = {} mode ({}, {})", config.scheme, num(theta), args.k1, args.k2);
    println!("z0 = ({}, {})", num(pt.z0.re), num(pt.z0.im));
    println!("z1 = ({}, {})", num(pt.z1.re), num(pt.z1.im));
    println!("z2 = ({}, {})", num(pt.z2.re), num(pt.z2.im));
    println!(
        "measured  = ({}, {})  |.| = {}",
        num(measured.factor.re),
        num(measured.factor.im),
        num(measured.factor.norm())
    );
    println!("predicted = ({}, {})  |.| = {}", num(predicted.re), num(predicted.im), num(predicted.norm()));
    println!(
        "difference = {}  relative = {}  mode residual = {}",
        num(diff),
        num(relative),
        num(measured.residual)
    );
    if let Some(out) = cli.out.as_deref() {
        with_output(Some(out), |w| {
            writeln!(
                w,
                "k1,k2,measured_re,measured_im,predicted_re,predicted_im,abs_diff,rel_diff,residual"
            )?;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                args.k1,
                args.k2,
                num(measured.factor.re),
                num(measured.factor.im),
                num(predicted.re),
                num(predicted.im),
                num(diff),
                num(relative),
                num(measured.residual)
            )
        })?;
    }
    let ok = relative <= AMPLIFICATION_TOLERANCE
        && measured.residual <= AMPLIFICATION_TOLERANCE * predicted.norm().max(1.0);
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run(cli: &Cli) -> Result<ExitCode, Failure> {
    match &cli.command {
        Command::Solve(args) => cmd_solve(cli, args),
        Command::Figure1(args) => cmd_figure1(cli, args),
        Command::Verify(args) => cmd_verify(cli, args),
        Command::Amplification(args) => cmd_amplification(cli, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n as usize).build_global() {
            eprintln!("mcs: cannot start thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(code) => code,
        Err(f) => {
            match &f {
                Failure::Usage(msg) => eprintln!("mcs: {msg}"),
                Failure::Breakdown(msg) => eprintln!("mcs: numerical breakdown: {msg}"),
            }
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sibling_paths() {
        assert_eq!(sibling(Path::new("out/u.csv"), "norms.csv"), PathBuf::from("out/u.norms.csv"));
        assert_eq!(sibling(Path::new("u"), "meta.txt"), PathBuf::from("u.meta.txt"));
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(1.0 / 3.0), "3.3333333333333331e-1");
    }
}
