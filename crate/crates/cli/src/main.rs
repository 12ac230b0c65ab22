//! `spinboson` command-line front end.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use spinboson::nevanlinna::{alpha_grid, Spacing};
use spinboson::{preset_model, Error, ErrorClass, Model, ModelSpec, Tolerances, PRESET_NAMES};

use crate::output::Report;

#[derive(Debug, Parser)]
#[command(name = "spinboson", version, about = "Spectral analysis of the two-photon spin-boson model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: RunArgs,
}

#[derive(Debug, Clone, clap::Args)]
struct RunArgs {
    /// Preset name (M1, M3, MF, relativistic-massive) or path to a JSON model file.
    #[arg(long, global = true, default_value = "M1")]
    model: String,
    /// Coupling constant.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Coupling grid as start:stop:steps followed by log or lin, e.g. 0.1:10:20log.
    #[arg(long = "alpha-grid", global = true)]
    alpha_grid: Option<String>,
    /// Panels of the composite rule.
    #[arg(long, global = true, default_value_t = 10)]
    panels: usize,
    /// Gauss–Legendre order per panel.
    #[arg(long, global = true, default_value_t = 16)]
    order: usize,
    /// Relative tolerance of integrals and absolute tolerance of roots.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    /// Output file; standard output if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Random seed of the inequality fuzzer.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of fuzzed triples.
    #[arg(long, global = true, default_value_t = 100_000)]
    count: usize,
    /// Distance below the essential spectrum up to which eigenvalues are resolved.
    #[arg(long, global = true, default_value_t = 1e-6)]
    gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Coupling regime and critical coupling.
    Classify,
    /// Sector roots, E(α) and the bottom of the essential spectrum.
    Bottom,
    /// Sweep of the sector roots over an α grid.
    Scan,
    /// Discrete eigenvalues below the essential spectrum.
    Eigs,
    /// Schur-complement eigenvalues next to those of the finite truncation.
    Oracle,
    /// Small-coupling behaviour of E_ε(α).
    Asymptotics,
    /// Spectrum of the one-boson Hamiltonian.
    Oneboson,
    /// Random check of the elementary kernel inequality.
    FuzzInequality,
    /// Regenerate the regression fixtures.
    GenFixtures,
}

/// Validated run configuration.
pub struct RunConfig {
    pub model: Model,
    pub alphas: Option<Vec<f64>>,
    pub panels: usize,
    pub order: usize,
    pub seed: u64,
    pub count: usize,
    pub gap: f64,
    pub format: Format,
}

impl RunConfig {
    /// The α values of the run; a single `--alpha` or the grid.
    pub fn alphas(&self) -> Result<&[f64], Error> {
        self.alphas
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("this command needs --alpha or --alpha-grid".into()))
    }

    pub fn rule(&self) -> spinboson::QuadratureRule {
        self.model.rule(self.panels, self.order)
    }
}

fn parse_grid(s: &str) -> Result<Vec<f64>, Error> {
    let bad = || Error::InvalidArgument(format!("cannot parse alpha grid {s:?}; expected start:stop:steps(log|lin)"));
    let parts: Vec<&str> = s.split(':').collect();
    let (start, stop, steps, spacing) = match parts.as_slice() {
        [a, b, c] => {
            let (n, sp) = match c.strip_suffix("log") {
                Some(n) => (n, "log"),
                None => (c.strip_suffix("lin").unwrap_or(c), "lin"),
            };
            (*a, *b, n, sp)
        }
        [a, b, c, d] => (*a, *b, *c, *d),
        _ => return Err(bad()),
    };
    let spacing = match spacing {
        "log" => Spacing::Log,
        "lin" => Spacing::Lin,
        _ => return Err(bad()),
    };
    let start: f64 = start.trim().parse().map_err(|_| bad())?;
    let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
    let steps: usize = steps.trim().parse().map_err(|_| bad())?;
    alpha_grid(start, stop, steps, spacing)
}

fn load_model(name: &str, tol: Tolerances) -> Result<Model, Error> {
    let is_preset = PRESET_NAMES.iter().any(|p| p.eq_ignore_ascii_case(name)) || name.eq_ignore_ascii_case("rel");
    if is_preset {
        preset_model(name)?.with_tolerances(tol)
    } else {
        Model::new(ModelSpec::from_path(name)?, tol)
    }
}

fn build_config(args: &RunArgs) -> Result<RunConfig, Error> {
    let tol = Tolerances { integral_rel: args.tol, root_abs: args.tol, ..Tolerances::default() };
    tol.validate()?;
    if args.panels == 0 || args.order == 0 {
        return Err(Error::InvalidArgument("--panels and --order must be positive".into()));
    }
    if !(args.gap.is_finite() && args.gap > 0.0) {
        return Err(Error::InvalidArgument(format!("--gap must be positive, got {}", args.gap)));
    }
    let alphas = match (&args.alpha, &args.alpha_grid) {
        (Some(_), Some(_)) => return Err(Error::InvalidArgument("give either --alpha or --alpha-grid".into())),
        (Some(a), None) => {
            if !(a.is_finite() && *a > 0.0) {
                return Err(Error::InvalidArgument(format!("--alpha must be positive, got {a}")));
            }
            Some(vec![*a])
        }
        (None, Some(g)) => Some(parse_grid(g)?),
        (None, None) => None,
    };
    Ok(RunConfig {
        model: load_model(&args.model, tol)?,
        alphas,
        panels: args.panels,
        order: args.order,
        seed: args.seed,
        count: args.count,
        gap: args.gap,
        format: args.format,
    })
}

fn run(cli: &Cli) -> Result<(), Error> {
    if let Command::GenFixtures = cli.command {
        let fixtures = spinboson::fixtures::generate()?;
        return output::write(&cli.config.out, spinboson::fixtures::to_json(&fixtures).as_bytes());
    }
    let config = build_config(&cli.config)?;
    let report: Report = match cli.command {
        Command::Classify => commands::classify(&config)?,
        Command::Bottom => commands::bottom(&config)?,
        Command::Scan => commands::scan(&config)?,
        Command::Eigs => commands::eigs(&config)?,
        Command::Oracle => commands::oracle(&config)?,
        Command::Asymptotics => commands::asymptotics(&config)?,
        Command::Oneboson => commands::oneboson(&config)?,
        Command::FuzzInequality => commands::fuzz_inequality(&config)?,
        Command::GenFixtures => unreachable!(),
    };
    output::write(&cli.config.out, &report.render(config.format)?)
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Validation | ErrorClass::Io => 2,
        ErrorClass::Numerical => 3,
    }
}

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    let line = serde_json::json!({ "error": kind, "message": message });
    eprintln!("{line}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            return fail("UsageError", first, 2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), &e.to_string(), exit_code(e.class())),
    }
}
