//! Batch experiment runner for the collective-spin steady-state library:
//! parameter sweeps, optimal-squeezing scans, scaling fits, Husimi snapshots
//! and the closed-form-vs-Liouvillian verification suite.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use steadyspin::analytic::AnalyticVariant;
use steadyspin::dicke::HusimiGridSpec;
use steadyspin::steady::{self, Model, ModelParams};
use steadyspin::sweep::{
    self, FitFamily, GridScale, GridSpec, OutputFormat, SweepConfig, SCHEMA_VERSION,
};

#[derive(Parser)]
#[command(
    name = "steadyspin",
    version,
    about = "Steady states, spectra and squeezing of driven-dissipative collective spin models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Sdm,
    Crf,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Sdm => Model::Sdm,
            ModelArg::Crf => Model::DrivenSuperradiance,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Power,
    LogCorrected,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep with numeric and analytic records per point
    Sweep(SweepArgs),
    /// Locate the squeezing minimum by golden-section search
    ScanOptimum(ScanArgs),
    /// Fit a scaling family to (N, xi2_min) data
    Fit(FitArgs),
    /// Emit a Husimi distribution snapshot of the steady state
    Husimi(HusimiArgs),
    /// Cross-validate closed-form steady states against the Liouvillian
    /// null space
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// JSON config file; flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// comma-separated particle numbers, e.g. 1000,1001
    #[arg(long)]
    n: Option<String>,
    /// grid as scale:start:stop:points, e.g. log:1e-4:1:61 or lin:0:2:41
    #[arg(long)]
    param_grid: Option<String>,
    /// comma-separated analytic variant names (empty string = none)
    #[arg(long)]
    analytics: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// quadrature relative tolerance for analytic variants
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long)]
    n: u32,
    /// bracket as lo,hi in the model's control parameter
    #[arg(long)]
    bracket: String,
    /// relative parameter tolerance of the golden-section refinement
    #[arg(long, default_value_t = 1e-4)]
    rel_tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// CSV with header and columns n,xi2_min
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "power")]
    family: FamilyArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HusimiArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long)]
    n: u32,
    /// control parameter (zeta or Upsilon)
    #[arg(long)]
    param: f64,
    #[arg(long, default_value_t = 200)]
    theta_points: usize,
    #[arg(long, default_value_t = 400)]
    phi_points: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 12)]
    max_n: u32,
    /// random parameter points per model and N
    #[arg(long, default_value_t = 20)]
    points: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn parse_n_list(s: &str) -> Result<Vec<u32>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|e| format!("bad N '{t}': {e}"))
        })
        .collect()
}

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 4 {
        return Err(format!(
            "grid '{s}' must be scale:start:stop:points (e.g. log:1e-4:1:61)"
        ));
    }
    let scale = match parts[0] {
        "log" => GridScale::Log,
        "lin" | "linear" => GridScale::Linear,
        other => return Err(format!("unknown grid scale '{other}'")),
    };
    let parse = |t: &str| {
        t.parse::<f64>()
            .map_err(|e| format!("bad grid bound '{t}': {e}"))
    };
    Ok(GridSpec {
        scale,
        start: parse(parts[1])?,
        stop: parse(parts[2])?,
        points: parts[3]
            .parse()
            .map_err(|e| format!("bad point count '{}': {e}", parts[3]))?,
    })
}

fn run_sweep_command(args: SweepArgs) -> Result<bool, String> {
    let mut config = match &args.config {
        Some(path) => SweepConfig::from_json_file(path).map_err(|e| e.to_string())?,
        None => SweepConfig {
            schema_version: SCHEMA_VERSION,
            model: Model::Sdm,
            n_values: vec![],
            grid: GridSpec {
                scale: GridScale::Log,
                start: 1e-3,
                stop: 1.0,
                points: 21,
            },
            analytics: None,
            output: None,
            format: OutputFormat::Csv,
            tolerance: None,
        },
    };
    if let Some(model) = args.model {
        config.model = model.into();
    }
    if let Some(n) = &args.n {
        config.n_values = parse_n_list(n)?;
    }
    if let Some(grid) = &args.param_grid {
        config.grid = parse_grid(grid)?;
    }
    if let Some(analytics) = &args.analytics {
        let names: Vec<String> = analytics
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        for name in &names {
            if AnalyticVariant::parse(name).is_none() {
                return Err(format!("unknown analytic variant '{name}'"));
            }
        }
        config.analytics = Some(names);
    }
    if let Some(out) = args.out {
        config.output = Some(out);
    }
    if let Some(format) = args.format {
        config.format = format.into();
    }
    if let Some(tol) = args.tolerance {
        config.tolerance = Some(tol);
    }
    config.validate().map_err(|e| e.to_string())?;

    let result = sweep::run_sweep(&config).map_err(|e| e.to_string())?;
    match &config.output {
        Some(path) => {
            sweep::emit(&result, config.format, path).map_err(|e| e.to_string())?;
            eprintln!("wrote {} points to {}", result.points.len(), path.display());
        }
        None => {
            let mut buf = Vec::new();
            match config.format {
                OutputFormat::Csv => result.write_csv(&mut buf).map_err(|e| e.to_string())?,
                OutputFormat::Json => {
                    buf = serde_json::to_vec_pretty(&result).map_err(|e| e.to_string())?
                }
            }
            std::io::Write::write_all(&mut std::io::stdout(), &buf).map_err(|e| e.to_string())?;
        }
    }
    for p in result.points.iter().filter(|p| p.error.is_some()) {
        eprintln!(
            "point N={} param={} failed: {}",
            p.n,
            p.parameter,
            p.error.as_deref().unwrap_or("")
        );
    }
    Ok(result.all_succeeded())
}

fn run_scan_command(args: ScanArgs) -> Result<bool, String> {
    let parts: Vec<&str> = args.bracket.split(',').collect();
    if parts.len() != 2 {
        return Err("bracket must be lo,hi".into());
    }
    let lo: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|e| format!("bad bracket: {e}"))?;
    let hi: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|e| format!("bad bracket: {e}"))?;
    let scan = sweep::scan_optimum(args.model.into(), args.n, (lo, hi), args.rel_tol)
        .map_err(|e| e.to_string())?;
    let json = serde_json::to_string_pretty(&scan).map_err(|e| e.to_string())?;
    match args.out {
        Some(path) => std::fs::write(&path, json + "\n").map_err(|e| e.to_string())?,
        None => println!("{json}"),
    }
    Ok(true)
}

fn run_fit_command(args: FitArgs) -> Result<bool, String> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| format!("{}: {e}", args.input.display()))?;
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 && line.chars().any(|c| c.is_alphabetic()) {
            continue; // header
        }
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 2 {
            return Err(format!("line {} needs n,xi2_min", i + 1));
        }
        let n: f64 = cols[0]
            .trim()
            .parse()
            .map_err(|e| format!("line {}: {e}", i + 1))?;
        let y: f64 = cols[1]
            .trim()
            .parse()
            .map_err(|e| format!("line {}: {e}", i + 1))?;
        points.push((n, y));
    }
    let family = match args.family {
        FamilyArg::Power => FitFamily::PowerLaw,
        FamilyArg::LogCorrected => FitFamily::LogCorrectedSdm,
    };
    let fit = sweep::fit_scaling(&points, family).map_err(|e| e.to_string())?;
    let json = serde_json::to_string_pretty(&fit).map_err(|e| e.to_string())?;
    match args.out {
        Some(path) => std::fs::write(&path, json + "\n").map_err(|e| e.to_string())?,
        None => println!("{json}"),
    }
    Ok(true)
}

fn run_husimi_command(args: HusimiArgs) -> Result<bool, String> {
    let params = match args.model {
        ModelArg::Sdm => ModelParams::sdm(args.n, args.param),
        ModelArg::Crf => ModelParams::crf(args.n, args.param),
    }
    .map_err(|e| e.to_string())?;
    let state = steady::steady_state(&params).map_err(|e| e.to_string())?;
    let grid = state
        .husimi(&HusimiGridSpec {
            n_theta: args.theta_points,
            n_phi: args.phi_points,
        })
        .map_err(|e| e.to_string())?;
    let file =
        std::fs::File::create(&args.out).map_err(|e| format!("{}: {e}", args.out.display()))?;
    grid.write_csv(std::io::BufWriter::new(file))
        .map_err(|e| e.to_string())?;
    eprintln!(
        "wrote {}x{} Husimi grid to {}",
        args.theta_points,
        args.phi_points,
        args.out.display()
    );
    Ok(true)
}

fn run_verify_command(args: VerifyArgs) -> Result<bool, String> {
    let report = sweep::verify_oracles(args.max_n, args.points, args.seed);
    println!(
        "oracle equivalence: {} cases, max entrywise deviation {:.3e}",
        report.cases, report.max_deviation
    );
    for f in &report.failures {
        println!("FAIL {f}");
    }
    if report.passed() {
        println!("all closed-form steady states match the Liouvillian null space to 1e-8");
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Sweep(args) => run_sweep_command(args),
        Command::ScanOptimum(args) => run_scan_command(args),
        Command::Fit(args) => run_fit_command(args),
        Command::Husimi(args) => run_husimi_command(args),
        Command::Verify(args) => run_verify_command(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
