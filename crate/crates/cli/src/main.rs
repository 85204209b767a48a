use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use hingechain::critical::{SearchConfig, StartPlan, Tolerances};
use hingechain::io::{load_chain_file, ChainFile};
use hingechain::panel::{Anchor, Involution};
use hingechain::reach::ArcOptions;
use hingechain::report::{
    cmd_bound, cmd_classify, cmd_critical, cmd_fk, cmd_panel, cmd_reach, CommandError, PanelCommand, Report,
};
use hingechain::Configuration;

#[derive(Parser)]
#[command(name = "hingechain", version, about = "Critical configurations and maximum reach of hinge chains")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    /// CSV tables with `#` header lines.
    Table,
    /// Pretty-printed JSON.
    Structured,
}

#[derive(Args)]
struct SearchArgs {
    /// Relative gradient tolerance for polishing.
    #[arg(long)]
    tol: Option<f64>,
    /// Number of scattered starts (default scales with the bound).
    #[arg(long, conflicts_with = "grid")]
    starts: Option<usize>,
    /// Seed for the start sequence.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Start from local minima of |grad F|^2 on a grid of this resolution.
    #[arg(long)]
    grid: Option<usize>,
}

impl SearchArgs {
    fn config(&self) -> SearchConfig {
        let mut cfg = SearchConfig { seed: self.seed, ..SearchConfig::default() };
        if let Some(t) = self.tol {
            cfg.tol.grad = t;
        }
        cfg.starts = match (self.starts, self.grid) {
            (_, Some(g)) => StartPlan::Grid(g),
            (Some(s), None) => StartPlan::Scattered(s),
            (None, None) => StartPlan::Auto,
        };
        cfg
    }
}

#[derive(Subcommand)]
enum Command {
    /// End-point, squared distance and hinge poses at given angles.
    Fk {
        file: PathBuf,
        /// Comma-separated joint angles in radians.
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
    },
    /// Certified maximum reach.
    Reach {
        file: PathBuf,
        /// Arc descent stopping tolerance, relative to the chain scale.
        #[arg(long)]
        tol: Option<f64>,
        /// Also evaluate F on a torus grid of this resolution for comparison.
        #[arg(long)]
        grid: Option<usize>,
        /// Sweep limit for the arc descent.
        #[arg(long)]
        max_sweeps: Option<usize>,
        /// Skip the smoothed Newton refinement.
        #[arg(long)]
        no_refine: bool,
    },
    /// Census of critical configurations.
    Critical {
        file: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Classify a configuration.
    Classify {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        /// Polish to a nearby critical configuration first.
        #[arg(long)]
        polish: bool,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Panel-chain operations.
    Panel {
        #[command(subcommand)]
        command: PanelSub,
    },
    /// Eulerian-number bound on isolated critical points.
    Bound { n: usize, d: usize },
}

#[derive(Clone, Copy, ValueEnum)]
enum AnchorArg {
    Head,
    Tail,
}

#[derive(Subcommand)]
enum PanelSub {
    /// The 2^n flat configurations.
    Flat { file: PathBuf },
    /// Orbit of a configuration under the involutions.
    Orbit {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
    },
    /// Apply one involution.
    Involution {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        /// Reflect in panel 0's hyperplane instead of at a hinge.
        #[arg(long, conflicts_with_all = ["anchor", "k"])]
        mirror: bool,
        #[arg(long, value_enum, required_unless_present = "mirror")]
        anchor: Option<AnchorArg>,
        /// 1-based hinge index.
        #[arg(long, required_unless_present = "mirror")]
        k: Option<usize>,
    },
}

fn parse_theta(text: &str) -> anyhow::Result<Configuration> {
    let angles = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("invalid angle `{s}`")))
        .collect::<anyhow::Result<Vec<f64>>>()?;
    if angles.iter().any(|a| !a.is_finite()) {
        bail!("angles must be finite");
    }
    Ok(Configuration::new(angles))
}

fn load(path: &Path) -> Result<ChainFile, CommandError> {
    let file = load_chain_file(path)?;
    for w in &file.warnings {
        eprintln!("warning: {w}");
    }
    Ok(file)
}

/// Failures before a command runs are input errors.
fn input<T>(r: anyhow::Result<T>) -> Result<T, CommandError> {
    r.map_err(|e| CommandError::Input(format!("{e:#}")))
}

fn run(cli: &Cli) -> Result<Report, CommandError> {
    match &cli.command {
        Command::Fk { file, theta } => cmd_fk(&load(file)?, &input(parse_theta(theta))?),
        Command::Reach { file, tol, grid, max_sweeps, no_refine } => {
            let mut arc = ArcOptions { refine: !no_refine, ..ArcOptions::default() };
            if let Some(t) = tol {
                arc.sweep_tol = *t;
            }
            if let Some(m) = max_sweeps {
                arc.max_sweeps = *m;
            }
            cmd_reach(&load(file)?, &arc, &Tolerances::default(), *grid)
        }
        Command::Critical { file, search } => cmd_critical(&load(file)?, &search.config()),
        Command::Classify { file, theta, polish, search } => {
            cmd_classify(&load(file)?, &input(parse_theta(theta))?, &search.config(), *polish)
        }
        Command::Panel { command } => {
            let tol = Tolerances::default();
            match command {
                PanelSub::Flat { file } => cmd_panel(&load(file)?, &PanelCommand::Flat, &tol),
                PanelSub::Orbit { file, theta } => {
                    cmd_panel(&load(file)?, &PanelCommand::Orbit(input(parse_theta(theta))?), &tol)
                }
                PanelSub::Involution { file, theta, mirror, anchor, k } => {
                    let op = if *mirror {
                        Involution::Mirror
                    } else {
                        let anchor = match anchor.expect("required by clap") {
                            AnchorArg::Head => Anchor::Head,
                            AnchorArg::Tail => Anchor::Tail,
                        };
                        Involution::Reflect { anchor, k: k.expect("required by clap") }
                    };
                    cmd_panel(&load(file)?, &PanelCommand::Involution(input(parse_theta(theta))?, op), &tol)
                }
            }
        }
        Command::Bound { n, d } => Ok(cmd_bound(*n, *d)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            let text = match cli.format {
                Format::Table => report.to_table(),
                Format::Structured => report.to_json() + "\n",
            };
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
