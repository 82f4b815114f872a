//! Thin command-line wrapper around the `bifurcade` library pipeline.
//!
//! Logging level comes from the `BIFURCADE_LOG` environment variable
//! (error, warn, info, debug). Exit codes: 0 success, 2 validation error,
//! 3 numerical failure (diagnostics land in report.json).

use bifurcade::cli::{self, Format, ModelSource, RunConfig, Subcommand};
use clap::{Args, Parser, Subcommand as ClapSubcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "bifurcade",
    about = "Dynamic bifurcation analysis of spectral Galerkin evolution equations",
    version
)]
struct CliArgs {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Custom model file (JSON); omit to use the built-in Cahn-Hilliard model
    #[arg(long)]
    model: Option<PathBuf>,

    /// Config file with a full RunConfig (JSON); flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,

    /// Domain length for the built-in model
    #[arg(long, default_value_t = std::f64::consts::PI)]
    length: f64,

    /// Quadratic coefficient b2 of the built-in model
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    b2: f64,

    /// Cubic coefficient b3 > 0 of the built-in model
    #[arg(long, default_value_t = 1.0)]
    b3: f64,

    /// Galerkin truncation (modes) for the built-in model
    #[arg(long, default_value_t = 16)]
    modes: usize,

    #[arg(long, allow_negative_numbers = true)]
    lambda_lo: Option<f64>,

    #[arg(long, allow_negative_numbers = true)]
    lambda_hi: Option<f64>,

    /// Weighted-norm bound of the continuation window
    #[arg(long)]
    norm_max: Option<f64>,

    /// Center-manifold reduction order (2..=5)
    #[arg(long)]
    order: Option<u32>,

    /// Grid cells per axis for isolating blocks
    #[arg(long)]
    grid: Option<usize>,

    /// Half-width of the reduced-coordinate search box
    #[arg(long)]
    box_half: Option<f64>,

    /// Branch-switching amplitude
    #[arg(long)]
    amplitude: Option<f64>,

    /// Crossing selector for crossing-local commands
    #[arg(long, allow_negative_numbers = true)]
    lambda0: Option<f64>,

    /// Evaluation parameter value
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,

    /// Integration horizon
    #[arg(long)]
    t_end: Option<f64>,

    /// Integrator error tolerance
    #[arg(long)]
    tolerance: Option<f64>,

    /// Initial mode coefficients for simulate, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    initial: Option<Vec<f64>>,

    /// Eigendirections per stability class for probe
    #[arg(long)]
    directions: Option<usize>,

    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Output formats, comma separated (json, csv)
    #[arg(long, value_delimiter = ',', default_values_t = vec![String::from("json"), String::from("csv")])]
    format: Vec<String>,

    /// Seed for stochastic sampling
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(ClapSubcommand, Clone)]
enum Command {
    /// Per-mode linear eigenvalues at a parameter value
    Spectrum(CommonArgs),
    /// Bifurcation values with crossing data in the window
    Detect(CommonArgs),
    /// Center-manifold reduction at a crossing
    Reduce(CommonArgs),
    /// Attractor/repeller classification of the trivial solution
    Classify(CommonArgs),
    /// Bifurcating invariant set at a parameter value near a crossing
    Localbif(CommonArgs),
    /// Conley index of the bifurcating set
    Index(CommonArgs),
    /// Switch and continue one branch from a crossing
    Branch(CommonArgs),
    /// Full global report: every crossing, branch and verdict
    Global(CommonArgs),
    /// Heteroclinic probe of connections leaving the trivial solution
    Probe(CommonArgs),
    /// Time integration of the Galerkin system
    Simulate(CommonArgs),
}

fn to_run_config(args: &CommonArgs) -> Result<RunConfig, bifurcade::Error> {
    let mut config: RunConfig = match &args.config {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    if args.config.is_none() {
        config.model = match &args.model {
            Some(path) => ModelSource::File { path: path.clone() },
            None => ModelSource::CahnHilliard1d {
                length: args.length,
                b2: args.b2,
                b3: args.b3,
                n_modes: args.modes,
            },
        };
    } else if let Some(path) = &args.model {
        config.model = ModelSource::File { path: path.clone() };
    }
    if let Some(v) = args.lambda_lo {
        config.lambda_lo = v;
    }
    if let Some(v) = args.lambda_hi {
        config.lambda_hi = v;
    }
    if let Some(v) = args.norm_max {
        config.v_norm_max = v;
    }
    if let Some(v) = args.order {
        config.order = v;
    }
    if let Some(v) = args.grid {
        config.grid = v;
    }
    if let Some(v) = args.box_half {
        config.box_half = v;
    }
    if let Some(v) = args.amplitude {
        config.amplitude = v;
    }
    if let Some(v) = args.lambda0 {
        config.lambda0 = Some(v);
    }
    if let Some(v) = args.lambda {
        config.lambda = Some(v);
    }
    if let Some(v) = args.t_end {
        config.t_end = v;
    }
    if let Some(v) = args.tolerance {
        config.tolerance = v;
    }
    if let Some(v) = &args.initial {
        config.initial = Some(v.clone());
    }
    if let Some(v) = args.directions {
        config.directions = v;
    }
    config.out_dir = args.out.clone();
    if let Some(v) = args.seed {
        config.seed = v;
    }
    config.formats = args
        .format
        .iter()
        .map(|f| match f.as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(bifurcade::Error::Validation(format!(
                "unknown format '{other}'"
            ))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BIFURCADE_LOG", "warn")).init();

    let cli = CliArgs::parse();
    let (subcommand, args) = match &cli.command {
        Command::Spectrum(a) => (Subcommand::Spectrum, a),
        Command::Detect(a) => (Subcommand::Detect, a),
        Command::Reduce(a) => (Subcommand::Reduce, a),
        Command::Classify(a) => (Subcommand::Classify, a),
        Command::Localbif(a) => (Subcommand::Localbif, a),
        Command::Index(a) => (Subcommand::Index, a),
        Command::Branch(a) => (Subcommand::Branch, a),
        Command::Global(a) => (Subcommand::Global, a),
        Command::Probe(a) => (Subcommand::Probe, a),
        Command::Simulate(a) => (Subcommand::Simulate, a),
    };

    let config = match to_run_config(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    match cli::run(subcommand, &config) {
        Ok(written) => {
            for path in written {
                println!("{}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code_for(&e) as u8)
        }
    }
}
