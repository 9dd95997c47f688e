use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use bettiscan_cli::{experiment, table};
use bettiscan_core::hodge::ZeroTolerance;
use bettiscan_core::metric::{diameter, pairwise_distances, sample, DistanceMatrix, SamplerConfig, Shape};
use bettiscan_core::selection::{estimate_betti, scan, GridSpec, ScanConfig, DEFAULT_UPPER_SIMPLEX_CAP};
use bettiscan_core::semigroup::{CriterionKind, CriterionParams};
use bettiscan_core::{io, Error};

/// Betti number estimation from point samples via heat semigroups of
/// weighted Hodge Laplacians.
#[derive(Parser)]
#[command(name = "bettiscan", version, about)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic point cloud and write it as CSV.
    Generate(GenerateArgs),
    /// Estimate a Betti number from a point cloud or distance matrix.
    Estimate(EstimateArgs),
    /// Export the full criterion curve D(r) over the scale grid.
    Scan(ScanArgs),
    /// Run a seeded multi-trial experiment described by a spec file.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Shape: circle | two-circles | nonuniform-circle | nonuniform-two-circles.
    #[arg(long)]
    shape: String,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Distance between the two circle planes (two-circle shapes).
    #[arg(long, default_value_t = 2.0)]
    separation: f64,
    /// Tilt of the non-uniform angle density, in [0, 1).
    #[arg(long, default_value_t = 0.9)]
    density_param: f64,
    /// Number of points.
    #[arg(long, short)]
    n: usize,
    /// Gaussian noise standard deviation per coordinate.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args)]
struct InputArgs {
    /// Input CSV file (point cloud by default).
    #[arg(long, short)]
    input: PathBuf,
    /// Treat the input as a square distance matrix.
    #[arg(long)]
    distance_matrix: bool,
    /// Cohomology dimension to estimate.
    #[arg(long, short)]
    q: usize,
    /// Criterion: entropy | hs | trace.
    #[arg(long, default_value = "entropy")]
    criterion: String,
    /// Short diffusion time.
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    /// Long diffusion time.
    #[arg(long, default_value_t = 250.0)]
    t0: f64,
    /// Relative kernel tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol_rel: f64,
    /// Scale grid: "breakpoints" or a path to a file of scales, one per line.
    #[arg(long, default_value = "breakpoints")]
    grid: String,
    /// Evaluate the scale equal to the diameter as well.
    #[arg(long)]
    include_diameter: bool,
    /// Per-scale cap on the number of (q+1)-simplices.
    #[arg(long, default_value_t = DEFAULT_UPPER_SIMPLEX_CAP)]
    max_upper_simplices: usize,
    /// Cross-check the estimate against the rank-nullity oracle.
    #[arg(long)]
    verify_oracle: bool,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output path; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Output format: csv | json.
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment spec file (TOML or JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Write the machine-readable JSON report here.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().is_err() {
            eprintln!("warning: thread pool already initialized, --jobs ignored");
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}

/// 2 for validation problems, 3 for runtime/numerical failures.
fn classify(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::InvalidInput(_) | Error::InvalidParameter(_) | Error::Io { .. } | Error::Csv { .. },
        ) => 2,
        Some(Error::Eigensolver { .. } | Error::NoQStructure { .. } | Error::Json(_)) => 3,
        None => 3,
    }
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Generate(args) => generate(args),
        Command::Estimate(args) => estimate(args),
        Command::Scan(args) => scan_cmd(args),
        Command::Experiment(args) => experiment_cmd(args),
    }
}

fn parse_shape(args: &GenerateArgs) -> anyhow::Result<Shape> {
    Ok(match args.shape.as_str() {
        "circle" => Shape::Circle { radius: args.radius },
        "two-circles" => {
            Shape::TwoCircles { radius: args.radius, separation: args.separation }
        }
        "nonuniform-circle" => {
            Shape::NonuniformCircle { radius: args.radius, density_param: args.density_param }
        }
        "nonuniform-two-circles" => Shape::NonuniformTwoCircles {
            radius: args.radius,
            separation: args.separation,
            density_param: args.density_param,
        },
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown shape {other:?}, expected circle | two-circles | \
                 nonuniform-circle | nonuniform-two-circles"
            ))
            .into())
        }
    })
}

fn generate(args: GenerateArgs) -> anyhow::Result<()> {
    let cfg = SamplerConfig {
        shape: parse_shape(&args)?,
        n_points: args.n,
        noise_sigma: args.sigma,
        seed: args.seed,
    };
    let cloud = sample(&cfg)?;
    io::write_point_cloud(&args.output, &cloud)?;
    let dm = pairwise_distances(&cloud);
    println!(
        "wrote {} points of dimension {} to {} (diameter {})",
        cloud.len(),
        cloud.ambient_dim(),
        args.output.display(),
        diameter(&dm)
    );
    Ok(())
}

fn load_distance_matrix(args: &InputArgs) -> anyhow::Result<DistanceMatrix> {
    let dm = if args.distance_matrix {
        io::read_distance_matrix(&args.input)?
    } else {
        pairwise_distances(&io::read_point_cloud(&args.input)?)
    };
    if dm.triangle_violations() > 0 {
        eprintln!(
            "warning: {} triangle-inequality violations in the input metric",
            dm.triangle_violations()
        );
    }
    Ok(dm)
}

fn scan_config(args: &InputArgs) -> anyhow::Result<ScanConfig> {
    let kind = CriterionKind::from_str(&args.criterion)?;
    let grid = match args.grid.as_str() {
        "breakpoints" => GridSpec::Breakpoints,
        path => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading grid file {path}"))?;
            let scales: Result<Vec<f64>, _> = text
                .split_whitespace()
                .map(|t| t.trim_end_matches(',').parse::<f64>())
                .collect();
            GridSpec::Explicit(
                scales.map_err(|e| Error::InvalidInput(format!("grid file {path}: {e}")))?,
            )
        }
    };
    Ok(ScanConfig {
        q: args.q,
        kind,
        params: CriterionParams::new(args.s, args.t0)?,
        tol: ZeroTolerance { rel: args.tol_rel, ..ZeroTolerance::default() },
        grid,
        include_diameter: args.include_diameter,
        max_upper_simplices: args.max_upper_simplices,
        verify_with_oracle: args.verify_oracle,
        ..ScanConfig::new(args.q, kind)
    })
}

fn estimate(args: EstimateArgs) -> anyhow::Result<()> {
    let dm = load_distance_matrix(&args.input)?;
    let cfg = scan_config(&args.input)?;
    let est = estimate_betti(&dm, &cfg)?;
    println!("{}", serde_json::to_string_pretty(&est.scan)?);
    Ok(())
}

fn scan_cmd(args: ScanArgs) -> anyhow::Result<()> {
    let dm = load_distance_matrix(&args.input)?;
    let cfg = scan_config(&args.input)?;
    let result = scan(&dm, &cfg)?;
    let body = match args.format.as_str() {
        "csv" => io::scan_curve_csv(&result),
        "json" => serde_json::to_string_pretty(&result)? + "\n",
        other => {
            return Err(
                Error::InvalidParameter(format!("unknown format {other:?}, expected csv | json"))
                    .into(),
            )
        }
    };
    match &args.output {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| Error::Io { path: path.display().to_string(), source: e })?,
        None => print!("{body}"),
    }
    eprintln!(
        "selected r = {} with estimated beta_{} = {}",
        result.r_hat, result.q, result.betti_hat
    );
    Ok(())
}

fn experiment_cmd(args: ExperimentArgs) -> anyhow::Result<()> {
    let spec = experiment::ExperimentSpec::from_path(&args.spec)?;
    let started = std::time::Instant::now();
    let report = experiment::run_experiment(&spec)?;
    let elapsed = started.elapsed();
    print!("{}", table::render(&report));
    eprintln!("{} trials in {:.1?}", spec.trials, elapsed);
    let json = experiment::report_json(&report)?;
    match &args.output {
        Some(path) => std::fs::write(path, json)
            .map_err(|e| Error::Io { path: path.display().to_string(), source: e })?,
        None => println!("{json}"),
    }
    Ok(())
}
