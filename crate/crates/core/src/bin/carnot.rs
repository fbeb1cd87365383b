//! Command-line front end: computes flags, restricted flags, nu, transverse
//! order exponents, integrability verdicts, and the numerical cross-checks
//! for a model given as JSON or one of the built-in structures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use carnot_core::cli::{self, builtin, Command, RunOptions};
use carnot_core::error::Error;
use carnot_core::flags::StructureModel;

#[derive(Parser)]
#[command(
    name = "carnot",
    about = "Algebraic invariants and Hausdorff-volume integrability analysis for sub-Riemannian structures",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Built-in model name (heisenberg, grushin, martinet, ar3, ar4, r5,
    /// ordergap) or a path to a JSON model file.
    #[arg(long)]
    model: Option<String>,
    /// Named point or comma-separated rational coordinates, e.g. "1/2,0,0".
    #[arg(long)]
    point: Option<String>,
    /// Stratum label from the model file.
    #[arg(long)]
    stratum: Option<String>,
    /// Seed for all randomized sampling; reports embed it.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Bracket depth cap override.
    #[arg(long)]
    depth: Option<usize>,
    /// Tuple budget override.
    #[arg(long)]
    budget: Option<usize>,
    /// Number of quadrature shells.
    #[arg(long, default_value_t = 8)]
    shells: usize,
    /// Sample count for Monte-Carlo commands.
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    /// Family parameter for the five-dimensional built-in structure.
    #[arg(long, default_value_t = 2)]
    k: u32,
    /// Grid spec "i,j,lo,hi,steps" for nu grids.
    #[arg(long)]
    grid: Option<String>,
    /// Comma-separated radii for the Ball-Box check.
    #[arg(long, default_value = "0.5,0.25,0.125")]
    eps: String,
    /// Control segments per sampled trajectory.
    #[arg(long, default_value_t = 8)]
    segments: usize,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand)]
enum Cmd {
    /// Growth vector, weights, Q, and regular/singular classification.
    Flags(CommonArgs),
    /// Equisingularity check and dimension summary of declared strata.
    Strata(CommonArgs),
    /// The determinant family and nu / nu_bar values.
    Nu(CommonArgs),
    /// Transverse order exponents rho_min, e_min, rho_max at (point, stratum).
    Rho(CommonArgs),
    /// Integrability verdict at (point, stratum), or the full decomposition.
    Verdict(CommonArgs),
    /// Shell quadrature diagnosis of 1/nu.
    Quad(CommonArgs),
    /// Empirical Ball-Box constants across radii.
    Ballbox(CommonArgs),
    /// Run the built-in example suite against stored expectations.
    Examples(CommonArgs),
}

impl Cmd {
    fn split(self) -> (Command, CommonArgs) {
        match self {
            Cmd::Flags(a) => (Command::Flags, a),
            Cmd::Strata(a) => (Command::Strata, a),
            Cmd::Nu(a) => (Command::Nu, a),
            Cmd::Rho(a) => (Command::Rho, a),
            Cmd::Verdict(a) => (Command::Verdict, a),
            Cmd::Quad(a) => (Command::Quad, a),
            Cmd::Ballbox(a) => (Command::Ballbox, a),
            Cmd::Examples(a) => (Command::Examples, a),
        }
    }
}

fn load_model(args: &CommonArgs) -> Result<Option<StructureModel>, Error> {
    let Some(spec) = &args.model else {
        return Ok(None);
    };
    let mut model = match builtin::builtin(spec, args.k) {
        Some(m) => m,
        None => {
            let text = std::fs::read_to_string(spec)?;
            cli::parse_model(&text)?
        }
    };
    if let Some(depth) = args.depth {
        model.bracket_depth_cap = depth.max(1);
    }
    if let Some(budget) = args.budget {
        model.tuple_budget = budget.max(1);
    }
    Ok(Some(model))
}

fn parse_eps(list: &str) -> Result<Vec<f64>, Error> {
    list.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::MissingInput(format!("bad radius `{s}` in --eps")))
        })
        .collect()
}

fn execute(command: Command, args: CommonArgs) -> Result<ExitCode, Error> {
    let model = load_model(&args)?;
    if model.is_none() && command != Command::Examples {
        return Err(Error::MissingInput("--model is required".into()));
    }
    let opts = RunOptions {
        point: args.point.clone(),
        stratum: args.stratum.clone(),
        seed: args.seed,
        depth: args.depth,
        budget: args.budget,
        shells: args.shells,
        samples: args.samples,
        k: args.k,
        grid: args.grid.clone(),
        eps_list: parse_eps(&args.eps)?,
        segments: args.segments,
    };
    let report = cli::run(command, model.as_ref(), &opts)?;
    let payload = match args.format {
        Format::Json => report.to_json_pretty(),
        Format::Csv => cli::to_csv(&report).ok_or_else(|| {
            Error::MissingInput(
                "csv output is only available for quad shells and nu grids".into(),
            )
        })?,
    };
    match &args.out {
        Some(path) => std::fs::write(path, payload.as_bytes())?,
        None => println!("{payload}"),
    }
    if command == Command::Examples {
        let all_pass = report.results["all_pass"].as_bool().unwrap_or(false);
        if !all_pass {
            return Ok(ExitCode::from(1));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = cli.command.split();
    match execute(command, args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
