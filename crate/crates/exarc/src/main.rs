use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use exarc::commands::{self, LabArgs, SurfaceArgs};
use exarc::config::{parse_grid, LoopSource};
use exarc::core::ep::SliceGrid;
use exarc::core::scenarios::{ETA_LOOPS, G};
use exarc::CliResult;

#[derive(Parser)]
#[command(version, about = "Exceptional arcs, loop transport and D3 permutations in a three-state resonator model")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Only print errors.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalue surfaces and |Δ| over a (zeta, xi) slice, as CSV.
    Surface {
        #[arg(long, default_value_t = ETA_LOOPS, allow_negative_numbers = true)]
        eta: f64,
        #[arg(long, default_value_t = G, allow_negative_numbers = true)]
        g: f64,
        /// Grid size, NxM or N.
        #[arg(long, default_value = "101x101", value_parser = parse_grid)]
        grid: (usize, usize),
        /// Half width of the square window centred on the origin.
        #[arg(long, default_value_t = 1.0)]
        window: f64,
    },
    /// Transport around a loop and report permutation, NABP and phases.
    Loop(LoopArgs),
    /// Trace exceptional arcs at fixed g.
    Ea {
        #[arg(long, default_value_t = G, allow_negative_numbers = true)]
        g: f64,
    },
    /// Virtual experiment: synthesise spectra, fit them, run the pipeline.
    Lab {
        #[command(subcommand)]
        command: LabCommand,
    },
    /// Cayley table and group checks for D3.
    Group,
}

#[derive(Args)]
struct LoopArgs {
    /// Built-in loop: mu1, mu3, mu2, rho1, rho2, big, trivial, alpha-alt,
    /// mu2-shifted, mu3-literal, rho1-literal.
    #[arg(long)]
    preset: Option<String>,
    /// Loop config JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    steps_per_segment: Option<usize>,
}

#[derive(Args)]
struct LabLoopArgs {
    #[command(flatten)]
    source: LoopArgs,
    /// Relative noise amplitude, e.g. 0.01 for 1%.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum LabCommand {
    Synth(LabLoopArgs),
    Fit {
        /// Dataset JSON written by `lab synth`.
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Pipeline(LabLoopArgs),
}

impl LoopArgs {
    fn source(&self) -> CliResult<LoopSource> {
        LoopSource::resolve(self.preset.as_deref(), self.config.as_deref())
    }
}

impl LabLoopArgs {
    fn lab_args(&self) -> CliResult<LabArgs> {
        let steps = self.source.steps_per_segment.or(Some(2));
        Ok(LabArgs { source: self.source.source()?, steps_per_segment: steps, noise: self.noise, seed: self.seed })
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let out = &cli.out;
    let path = match &cli.command {
        Command::Surface { eta, g, grid, window } => {
            let grid = SliceGrid { n_zeta: grid.0, n_xi: grid.1, ..SliceGrid::square(*window, 0) };
            commands::surface(&SurfaceArgs { eta: *eta, g: *g, grid }, out)?
        }
        Command::Loop(a) => commands::run_loop(&a.source()?, a.steps_per_segment, out)?,
        Command::Ea { g } => commands::ea(*g, out)?,
        Command::Lab { command } => match command {
            LabCommand::Synth(a) => commands::lab_synth(&a.lab_args()?, out)?,
            LabCommand::Fit { dataset, seed } => commands::lab_fit(dataset, *seed, out)?,
            LabCommand::Pipeline(a) => commands::lab_pipeline(&a.lab_args()?, out)?,
        },
        Command::Group => {
            let (path, report) = commands::group(out)?;
            print!("{}", report.table);
            path
        }
    };
    println!("{}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
