//! `memwalk`: simulate, solve, and classify the memory walk from the
//! command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid parameters or
//! limits, 3 I/O failure.

mod config;
mod manifest;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use memwalk::mc::{
    geometric_schedule, run_ensemble, simulate_trajectory, trajectory_rng, EnsembleConfig,
};
use memwalk::model::Parameters;
use memwalk::moments::{msd_branch, variance_series, MsdBranch};
use memwalk::regime::{classify, fit_exponent, sweep_line, RegimeReport, SweepConstraint};
use memwalk::{exact, Error as WalkError};

use config::ConfigFile;
use manifest::RunManifest;
use output::{fmt_f64, write_csv, write_json};

/// Environment variable overriding the default output directory (`.`).
const OUT_DIR_ENV: &str = "MEMWALK_OUT_DIR";

#[derive(Parser)]
#[command(name = "memwalk", version, about = "Memory random walk toolkit")]
struct Cli {
    /// Worker threads for the Monte Carlo engine (default: machine parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo ensemble and write moment estimates.
    Simulate(SimulateArgs),
    /// Evaluate the analytic mean, mean square, and variance.
    Analytic(AnalyticArgs),
    /// Evolve the exact position distribution to a small horizon.
    Oracle(OracleArgs),
    /// Classify one parameter point.
    Classify(ClassifyArgs),
    /// Classify along a constraint line and fit growth exponents.
    Sweep(SweepArgs),
    /// Run the built-in verification gate (exit 1 on any failure).
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ParamFlags {
    /// Probability of repeating the recalled move.
    #[arg(long)]
    p: Option<f64>,
    /// Probability of reversing the recalled move.
    #[arg(long)]
    q: Option<f64>,
    /// Probability of resting instead.
    #[arg(long)]
    r: Option<f64>,
    /// Probability the first step goes right (default 0.5).
    #[arg(long)]
    s: Option<f64>,
    /// Flat key=value file supplying defaults for any flag.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ParamFlags {
    fn load(&self) -> anyhow::Result<(Parameters, ConfigFile)> {
        let file = ConfigFile::load(self.config.as_deref())?;
        let p = file.resolve_required(self.p, "p")?;
        let q = file.resolve_required(self.q, "q")?;
        let r = file.resolve_required(self.r, "r")?;
        let s = file.resolve(self.s, "s")?.unwrap_or(0.5);
        let params = Parameters::new(p, q, r, s)?;
        Ok((params, file))
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    params: ParamFlags,
    /// Horizon (number of steps).
    #[arg(long)]
    t_max: Option<u64>,
    /// Ensemble size.
    #[arg(long)]
    trajectories: Option<u64>,
    /// Master seed; trajectory i draws from stream i.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: $MEMWALK_OUT_DIR or `.`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Also dump the first N raw trajectories (debug aid, at most 100).
    #[arg(long)]
    dump_trajectories: Option<u64>,
}

#[derive(Args)]
struct AnalyticArgs {
    #[command(flatten)]
    params: ParamFlags,
    /// Evaluate on the default geometric schedule up to this horizon.
    #[arg(long, conflicts_with = "times")]
    t_max: Option<u64>,
    /// Explicit comma-separated record times.
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<u64>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    params: ParamFlags,
    /// Horizon for the exact evolution.
    #[arg(long)]
    t: Option<u64>,
    /// Resource ceiling on the horizon.
    #[arg(long, default_value_t = exact::DEFAULT_T_CEILING)]
    ceiling: u64,
    /// Compare exact moments against the analytic values and report the
    /// worst relative deviation.
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    params: ParamFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Constraint line: `p=0.625`, `r=0.6`, or `gamma=0.25`.
    #[arg(long)]
    fix: String,
    /// Number of interior grid points.
    #[arg(long, default_value_t = 50)]
    points: usize,
    /// Horizon for the per-point analytic exponent fit.
    #[arg(long, default_value_t = 1_000_000)]
    fit_t_max: u64,
    /// Optional Monte Carlo spot check: trajectories per point.
    #[arg(long)]
    mc_trajectories: Option<u64>,
    /// Horizon for the Monte Carlo spot check.
    #[arg(long, default_value_t = 10_000)]
    mc_t_max: u64,
    /// Master seed for the spot checks.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Offset applied to p inside the analytic comparison; forces the gate
    /// to fail (testing aid).
    #[arg(long, default_value_t = 0.0)]
    perturb: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

fn main() -> ExitCode {
    // Die quietly when a downstream pager closes the pipe instead of
    // panicking out of a println.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }

    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot size the thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Analytic(args) => cmd_analytic(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Verify(args) => {
            return if verify::run(args.perturb) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            exit_code_for(&err)
        }
    }
}

/// 3 for I/O failures, 2 for everything else (invalid parameters, invalid
/// schedules, resource refusals).
fn exit_code_for(err: &anyhow::Error) -> ExitCode {
    for cause in err.chain() {
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return ExitCode::from(3);
        }
        if cause.downcast_ref::<WalkError>().is_some() {
            return ExitCode::from(2);
        }
    }
    ExitCode::from(2)
}

fn out_dir(flag: Option<PathBuf>) -> anyhow::Result<PathBuf> {
    let dir = flag
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    Ok(dir)
}

fn cmd_simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let (params, file) = args.params.load()?;
    let t_max = file.resolve_required(args.t_max, "t-max")?;
    let trajectories = file.resolve_required(args.trajectories, "trajectories")?;
    let seed = file.resolve(args.seed, "seed")?.unwrap_or(0);
    let format = args.format.unwrap_or(OutputFormat::Csv);
    let dir = out_dir(args.out)?;

    let config = EnsembleConfig::new(seed, trajectories, t_max)?;
    let mut manifest = RunManifest::start("simulate");
    manifest.params = Some(params);
    manifest.seed = Some(seed);
    manifest.record_times = Some(config.record_times.clone());

    let result = run_ensemble(params, &config)?;

    match format {
        OutputFormat::Csv => {
            let path = dir.join("simulate_result.csv");
            let n = result.series.times.len();
            write_csv(
                &path,
                &["t", "mean", "mean_se", "var", "var_se", "n"],
                (0..n).map(|i| {
                    vec![
                        result.series.times[i].to_string(),
                        fmt_f64(result.series.mean[i]),
                        fmt_f64(result.mean_se[i]),
                        fmt_f64(result.series.variance[i]),
                        fmt_f64(result.var_se[i]),
                        trajectories.to_string(),
                    ]
                }),
            )?;
            manifest.add_output(&path)?;
            println!("wrote {}", path.display());
        }
        OutputFormat::Json => {
            let path = dir.join("simulate_result.json");
            write_json(&path, &result)?;
            manifest.add_output(&path)?;
            println!("wrote {}", path.display());
        }
    }

    if let Some(n_dump) = args.dump_trajectories {
        if n_dump > 100 {
            bail!("raw trajectory dumps are a debug aid, capped at 100 trajectories");
        }
        let path = dir.join("simulate_trajectories.csv");
        write_csv(
            &path,
            &["trajectory", "t", "x"],
            (0..n_dump.min(trajectories)).flat_map(|i| {
                let mut rng = trajectory_rng(seed, i);
                let positions = simulate_trajectory(params, t_max, &config.record_times, &mut rng);
                config
                    .record_times
                    .iter()
                    .zip(positions)
                    .map(|(&t, x)| vec![i.to_string(), t.to_string(), x.to_string()])
                    .collect::<Vec<_>>()
            }),
        )?;
        manifest.add_output(&path)?;
        println!("wrote {}", path.display());
    }

    let path = manifest.finish(&dir)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_analytic(args: AnalyticArgs) -> anyhow::Result<()> {
    let (params, file) = args.params.load()?;
    let times = match args.times {
        Some(times) => times,
        None => {
            let t_max = file.resolve_required(args.t_max, "t-max")?;
            geometric_schedule(t_max, memwalk::mc::DEFAULT_POINTS_PER_DECADE)
        }
    };
    let dir = out_dir(args.out)?;

    let mut manifest = RunManifest::start("analytic");
    manifest.params = Some(params);
    manifest.record_times = Some(times.clone());

    let series = variance_series(params, &times)?;
    let branch = match msd_branch(params) {
        MsdBranch::ClosedForm => "closed-form",
        MsdBranch::Recursion => "recursion",
    };
    let path = dir.join("analytic_moments.csv");
    write_csv(
        &path,
        &["t", "mean", "mean_sq", "var", "branch"],
        (0..series.times.len()).map(|i| {
            vec![
                series.times[i].to_string(),
                fmt_f64(series.mean[i]),
                fmt_f64(series.mean_sq[i]),
                fmt_f64(series.variance[i]),
                branch.to_string(),
            ]
        }),
    )?;
    manifest.add_output(&path)?;
    println!(
        "wrote {} ({} rows, {branch} branch)",
        path.display(),
        series.times.len()
    );

    let path = manifest.finish(&dir)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> anyhow::Result<()> {
    let (params, file) = args.params.load()?;
    let t = file.resolve_required(args.t, "t")?;
    let dir = out_dir(args.out)?;

    let mut manifest = RunManifest::start("oracle");
    manifest.params = Some(params);

    let levels = exact::evolve_with_ceiling(params, t, args.ceiling)?;
    let last = levels.last().expect("t >= 1");

    let dist_path = dir.join("oracle_distribution.csv");
    write_csv(
        &dist_path,
        &["x", "probability"],
        last.position_distribution()
            .into_iter()
            .map(|(x, mass)| vec![x.to_string(), fmt_f64(mass)]),
    )?;
    manifest.add_output(&dist_path)?;
    println!("wrote {}", dist_path.display());

    let moments_path = dir.join("oracle_moments.csv");
    write_csv(
        &moments_path,
        &["t", "mean", "mean_sq"],
        levels.iter().map(|level| {
            let (mean, mean_sq) = level.moments();
            vec![level.t().to_string(), fmt_f64(mean), fmt_f64(mean_sq)]
        }),
    )?;
    manifest.add_output(&moments_path)?;
    println!("wrote {}", moments_path.display());

    if args.verify {
        let mut worst = 0.0f64;
        for level in &levels {
            let (dp_mean, dp_mean_sq) = level.moments();
            let mean = memwalk::moments::mean_displacement(params, level.t());
            let mean_sq = memwalk::moments::mean_square_displacement(params, level.t());
            let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1.0);
            worst = worst.max(rel(dp_mean, mean)).max(rel(dp_mean_sq, mean_sq));
        }
        println!("max relative deviation from analytic moments over t <= {t}: {worst:.3e}");
    }

    let path = manifest.finish(&dir)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn regime_row(params: Parameters, report: &RegimeReport) -> Vec<String> {
    vec![
        fmt_f64(params.p()),
        fmt_f64(params.q()),
        fmt_f64(params.r()),
        fmt_f64(params.gamma()),
        report.regime.label().to_string(),
        fmt_f64(report.exponent),
        report.log_correction.label().to_string(),
    ]
}

const REGIME_HEADER: [&str; 7] = [
    "p",
    "q",
    "r",
    "gamma",
    "regime",
    "exponent",
    "log_correction",
];

fn cmd_classify(args: ClassifyArgs) -> anyhow::Result<()> {
    let (params, _) = args.params.load()?;
    let dir = out_dir(args.out)?;

    let report = classify(params);
    println!(
        "regime = {}, exponent = {}, log correction = {}",
        report.regime.label(),
        report.exponent,
        report.log_correction.label()
    );

    let mut manifest = RunManifest::start("classify");
    manifest.params = Some(params);
    let path = dir.join("classify_regime.csv");
    write_csv(
        &path,
        &REGIME_HEADER,
        std::iter::once(regime_row(params, &report)),
    )?;
    manifest.add_output(&path)?;
    println!("wrote {}", path.display());

    let path = manifest.finish(&dir)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn parse_constraint(raw: &str) -> anyhow::Result<SweepConstraint> {
    let Some((key, value)) = raw.split_once('=') else {
        bail!("--fix expects `p=..`, `r=..`, or `gamma=..`, got `{raw}`");
    };
    let value: f64 = value
        .trim()
        .parse()
        .with_context(|| format!("parsing constraint value in `{raw}`"))?;
    match key.trim() {
        "p" => Ok(SweepConstraint::FixedP(value)),
        "r" => Ok(SweepConstraint::FixedR(value)),
        "gamma" | "g" => Ok(SweepConstraint::FixedGamma(value)),
        other => bail!("unknown constraint `{other}` (expected p, r, or gamma)"),
    }
}

fn cmd_sweep(args: SweepArgs) -> anyhow::Result<()> {
    let constraint = parse_constraint(&args.fix)?;
    let dir = out_dir(args.out)?;
    let sweep = sweep_line(constraint, args.points)?;

    let fit_times = geometric_schedule(args.fit_t_max, memwalk::mc::DEFAULT_POINTS_PER_DECADE);
    let mc_config = match args.mc_trajectories {
        Some(n) => Some(EnsembleConfig::new(args.seed, n, args.mc_t_max)?),
        None => None,
    };

    let mut manifest = RunManifest::start("sweep");
    manifest.seed = args.mc_trajectories.map(|_| args.seed);

    let mut rows = Vec::with_capacity(sweep.points.len());
    for point in &sweep.points {
        let mut row = regime_row(point.params, &point.report);
        // Trailing-decade fit on the analytic variance series.
        let series = variance_series(point.params, &fit_times)?;
        let decades = (args.fit_t_max as f64).log10();
        match fit_exponent(&series, 1.0 / decades) {
            Ok(fit) => {
                row.push(fmt_f64(fit.exponent));
                row.push(fmt_f64(fit.goodness));
            }
            Err(_) => {
                row.push("nan".into());
                row.push("nan".into());
            }
        }
        if let Some(config) = &mc_config {
            let result = run_ensemble(point.params, config)?;
            match fit_exponent(&result.series, 1.0 / (args.mc_t_max as f64).log10()) {
                Ok(fit) => row.push(fmt_f64(fit.exponent)),
                Err(_) => row.push("nan".into()),
            }
        }
        rows.push(row);
    }

    let mut header: Vec<&str> = REGIME_HEADER.to_vec();
    header.push("fit_exponent");
    header.push("fit_goodness");
    if mc_config.is_some() {
        header.push("mc_exponent");
    }

    let path = dir.join("sweep_regimes.csv");
    write_csv(&path, &header, rows)?;
    manifest.add_output(&path)?;
    println!("wrote {} ({} points)", path.display(), sweep.points.len());

    for interval in &sweep.intervals {
        println!(
            "  [{:+.6}, {:+.6}] {}{}",
            interval.coord_lo,
            interval.coord_hi,
            interval.regime.label(),
            if interval.degenerate {
                " (boundary point)"
            } else {
                ""
            }
        );
    }

    let path = manifest.finish(&dir)?;
    println!("wrote {}", path.display());
    Ok(())
}
