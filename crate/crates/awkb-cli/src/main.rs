//! `awkb` binary: parses the command line, loads and validates the scenario
//! configuration, dispatches to a subcommand, and maps errors onto exit
//! codes (0 success, 2 configuration, 3 numerical, 4 internal).

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use awkb_cli::commands;
use awkb_cli::config::{OutputFormat, ScenarioConfig};
use awkb_cli::error::CliError;
use awkb_cli::output::Emitter;

#[derive(Parser)]
#[command(
    name = "awkb",
    version,
    about = "Semiclassical wavefunction comparison and quantization diagnostics"
)]
struct Cli {
    /// Path to a JSON scenario configuration; defaults apply when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Directory the data files and manifest are written into.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,

    /// Override the output format chosen by the configuration.
    #[arg(long, global = true, value_enum, value_name = "FORMAT")]
    format: Option<OutputFormat>,

    /// Omit wall-clock timings from the manifest so repeated runs of the
    /// same scenario are byte-identical.
    #[arg(long, global = true)]
    seedless: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate bound-state wavefunction approximations on one grid.
    Bound,
    /// Tabulate phase-series term magnitudes and asymptotic-ordering flags.
    Series,
    /// Tabulate radial scattering approximations against the exact wave.
    Scatter,
    /// Solve the quantization condition and report contour diagnostics.
    Quantize {
        /// Highest quantum number to solve for.
        #[arg(long, default_value_t = 5)]
        n_max: u32,
    },
    /// Compare nested-series partial sums against exact amplitude transport.
    Convergence,
    /// Verify shape independence of winding and reflection loop integrals.
    ContourCheck,
}

fn load_config(path: &Option<PathBuf>) -> Result<ScenarioConfig, CliError> {
    let cfg = match path {
        None => ScenarioConfig::default(),
        Some(p) => {
            let bytes = std::fs::read(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            ScenarioConfig::from_json_bytes(&bytes)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
    };
    cfg.validate()
        .map_err(|errs| CliError::Config(errs.join("; ")))?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = load_config(&cli.config)?;
    std::fs::create_dir_all(&cli.out).map_err(|e| {
        CliError::Config(format!(
            "cannot create output directory {}: {e}",
            cli.out.display()
        ))
    })?;
    let format = cli.format.unwrap_or(cfg.output.format);
    let mut em = Emitter::new(&cli.out, &cfg.output.path, format, cli.seedless);
    let t0 = std::time::Instant::now();
    let name = match &cli.command {
        Command::Bound => {
            commands::cmd_bound(&cfg, &mut em)?;
            "bound"
        }
        Command::Series => {
            commands::cmd_series(&cfg, &mut em)?;
            "series"
        }
        Command::Scatter => {
            commands::cmd_scatter(&cfg, &mut em)?;
            "scatter"
        }
        Command::Quantize { n_max } => {
            commands::cmd_quantize(&cfg, &mut em, *n_max)?;
            "quantize"
        }
        Command::Convergence => {
            commands::cmd_convergence(&cfg, &mut em)?;
            "convergence"
        }
        Command::ContourCheck => {
            commands::cmd_contour_check(&cfg, &mut em)?;
            "contour-check"
        }
    };
    em.timing("total", t0.elapsed().as_millis());
    em.finish(name, &cfg)?;
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
