mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Failure;
use crate::config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "siegel", version, about = "Checks and experiments on the Siegel upper half-space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Iwasawa coordinates of a point, or the decomposition of a symplectic matrix.
    Decompose,
    /// Coordinate roundtrips, determinant, density and covariance battery.
    MeasureCheck,
    /// Truncated corank-1 Eisenstein series with its tail estimate.
    Eisenstein,
    /// Unipotent cell average and its modular invariance.
    Average,
    /// Eigenvalue residuals of the invariant Laplacian.
    LaplacianCheck,
    /// Volumes 2·∏ζ*(2k) and the genus-1 domain quadrature.
    Volume,
    /// Horocycle equidistribution in genus 1.
    Zagier,
    /// Domain pairing against the unfolded Dirichlet series.
    UnfoldCheck,
    /// Invariance of genus-2 cell averages under the genus-1 modular group.
    #[command(name = "theorem1-g2")]
    Theorem1G2,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Decompose => "decompose",
            Command::MeasureCheck => "measure-check",
            Command::Eisenstein => "eisenstein",
            Command::Average => "average",
            Command::LaplacianCheck => "laplacian-check",
            Command::Volume => "volume",
            Command::Zagier => "zagier",
            Command::UnfoldCheck => "unfold-check",
            Command::Theorem1G2 => "theorem1-g2",
        }
    }
}

#[derive(Args, Debug, Default, Clone)]
pub struct Flags {
    /// Genus.
    #[arg(long, global = true)]
    pub g: Option<usize>,
    /// Eisenstein parameter s.
    #[arg(long, global = true)]
    pub s: Option<f64>,
    /// Truncation radius of Eisenstein sums.
    #[arg(long, global = true)]
    pub radius: Option<f64>,
    /// Smallest horocycle height.
    #[arg(long = "y-min", global = true)]
    pub y_min: Option<f64>,
    /// Largest horocycle height.
    #[arg(long = "y-max", global = true)]
    pub y_max: Option<f64>,
    /// Number of log-spaced heights.
    #[arg(long = "y-points", global = true)]
    pub y_points: Option<usize>,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for sampled points, matrices and lattice shifts.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON report path; a CSV with the same stem is written beside it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let mut cfg = match &cli.flags.config {
        Some(path) => RunConfig::load(path).map_err(Failure::Config)?,
        None => RunConfig::default(),
    };
    cfg.apply(cli.command.name(), &cli.flags);
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("cannot start {n} threads: {e}")))?;
    }
    let report = match cli.command {
        Command::Decompose => commands::decompose(&cfg),
        Command::MeasureCheck => commands::measure_check(&cfg),
        Command::Eisenstein => commands::eisenstein(&cfg),
        Command::Average => commands::average(&cfg),
        Command::LaplacianCheck => commands::laplacian_check(&cfg),
        Command::Volume => commands::volume(&cfg),
        Command::Zagier => commands::zagier(&cfg),
        Command::UnfoldCheck => commands::unfold_check(&cfg),
        Command::Theorem1G2 => commands::theorem1_g2(&cfg),
    }?;

    let json = output::report_json(&report);
    match &cfg.out {
        Some(path) => {
            let write = |p: &std::path::Path, text: &str| {
                output::write_atomic(p, text.as_bytes())
                    .map_err(|e| Failure::Config(format!("cannot write {}: {e}", p.display())))
            };
            write(path, &json)?;
            write(&output::csv_path(path), &output::report_csv(&report))?;
        }
        None => print!("{json}"),
    }
    if matches!(cli.command, Command::Volume) {
        for p in &report.series {
            eprintln!("g={}: {:.10}", p.x, p.value);
        }
    }
    for c in &report.checks {
        let status = match (c.passed, c.informational) {
            (true, _) => "pass",
            (false, true) => "info",
            (false, false) => "FAIL",
        };
        eprintln!("{status:4} {} = {:e} ({})", c.name, c.value, c.bound);
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ Failure::Config(_)) => {
            eprintln!("siegel: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("siegel: {e}");
            ExitCode::from(1)
        }
    }
}
