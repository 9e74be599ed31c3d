use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, VariationArgs};
use crate::config::{load_config, ConfigSources};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "sfh", version, about = "Sub-Finsler surfaces in the Heisenberg group")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Body spec JSON, replacing the config's `body`.
    #[arg(long, global = true)]
    pub body: Option<String>,
    /// Graph spec JSON, replacing the config's `graph`.
    #[arg(long, global = true)]
    pub graph: Option<String>,
    /// Output directory for reports and CSV data.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sub-Finsler and sub-Riemannian area of the graph.
    Area,
    /// Oscillation of p along characteristics and line checks.
    Stationarity(FoliationArgs),
    /// Characteristic curves as CSV plus the ruling data as JSON.
    Foliate(FoliationArgs),
    /// Difference quotient of the area against the variation formula.
    Variation {
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        order: u8,
        /// Field spec JSON; drawn from the seed when absent.
        #[arg(long)]
        field: Option<String>,
        /// Report path, default `<out>/variation.json`.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Closed form against RK4 for y'' = 6yy' - 4y^3, y(0) = a, y'(0) = b.
    Codazzi {
        #[arg(long = "a", allow_negative_numbers = true)]
        a: Option<f64>,
        #[arg(long = "b", allow_negative_numbers = true)]
        b: Option<f64>,
        /// `lo:hi`, containing 0.
        #[arg(long, allow_hyphen_values = true)]
        range: Option<String>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Eigenvalue search for a destabilising direction and the verdict.
    Stability(StabilityArgs),
    /// Area plus the full stability pipeline.
    Report(StabilityArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct FoliationArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub base_x: Option<f64>,
    /// Number of ε levels across the t range.
    #[arg(long)]
    pub eps_count: Option<usize>,
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct StabilityArgs {
    /// Basis functions per axis before refinement.
    #[arg(long)]
    pub basis: Option<usize>,
    #[arg(long)]
    pub refinements: Option<usize>,
}

fn parse_range(text: &str) -> CliResult<[f64; 2]> {
    let bad = || CliError::config("--range", format!("expected `lo:hi`, got `{text}`"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    Ok([lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?])
}

/// Loads the configuration, applies per-command flags, runs the command and
/// returns the JSON report text.
pub fn run(cli: &Cli) -> CliResult<String> {
    let field = match &cli.command {
        Command::Variation { field, .. } => field.clone(),
        _ => None,
    };
    let sources = ConfigSources {
        config: cli.global.config.clone(),
        body: cli.global.body.clone(),
        graph: cli.global.graph.clone(),
        field,
        out: cli.global.out.clone(),
        seed: cli.global.seed,
    };
    let mut loaded = load_config(&sources)?;
    let cfg = &mut loaded.config;
    match &cli.command {
        Command::Stationarity(f) | Command::Foliate(f) => {
            if let Some(x) = f.base_x {
                cfg.foliation.base_x = Some(x);
            }
            if let Some(n) = f.eps_count {
                cfg.foliation.eps_count = n;
                cfg.foliation.eps = None;
            }
            if let Some(h) = f.step {
                cfg.steps.ode = h;
            }
        }
        Command::Codazzi { a, b, range, step } => {
            cfg.codazzi.a = a.unwrap_or(cfg.codazzi.a);
            cfg.codazzi.b = b.unwrap_or(cfg.codazzi.b);
            if let Some(r) = range {
                cfg.codazzi.range = parse_range(r)?;
            }
            cfg.codazzi.step = step.unwrap_or(cfg.codazzi.step);
        }
        Command::Stability(s) | Command::Report(s) => {
            if let Some(n) = s.basis {
                cfg.stability.basis_nx = n;
                cfg.stability.basis_nt = n;
            }
            cfg.stability.max_refinements = s.refinements.unwrap_or(cfg.stability.max_refinements);
        }
        Command::Area | Command::Variation { .. } => {}
    }
    cfg.validate()?;
    commands::write_effective_config(&loaded)?;
    match &cli.command {
        Command::Area => commands::area(&loaded),
        Command::Stationarity(_) => commands::stationarity(&loaded),
        Command::Foliate(_) => commands::foliate(&loaded),
        Command::Variation { order, report, .. } => {
            commands::variation(&loaded, &VariationArgs { second: *order == 2, report: report.clone() })
        }
        Command::Codazzi { .. } => commands::codazzi(&loaded),
        Command::Stability(_) => commands::stability(&loaded),
        Command::Report(_) => commands::report(&loaded),
    }
}
