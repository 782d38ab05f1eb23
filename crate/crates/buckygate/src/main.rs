//! Command-line entry point: five subcommands over the library, with the
//! documented exit-code discipline (0 success, 2 configuration, 3
//! divergence/aliasing, 4 target not reached, 5 calibration failed, 1 I/O).

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use buckygate::commands::{
    cmd_calibrate, cmd_figures, cmd_gate_time, cmd_simulate, cmd_sweep, parse_target_phase,
};
use buckygate::output::OutputFormat;
use buckygate::Result;

#[derive(Parser)]
#[command(
    name = "buckygate",
    version,
    about = "Two-qubit phase gate simulator for dipole-coupled spins in driven z-fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and write t, amplitudes, norm, theta, C.
    Simulate {
        /// Configuration file (TOML, unit-suffixed keys).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output path (default trajectory.csv / trajectory.json).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format: csv or json.
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Find when the conditional phase first crosses the target.
    GateTime {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: String,
        /// Target phase: pi, -pi, pi/2, -pi/2, pi/4 or -pi/4.
        #[arg(long, default_value = "-pi")]
        target_phase: String,
    },
    /// Evaluate gate time and concurrence over a (Bt, omega, r) grid.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: String,
        /// Grid, e.g. "Bt_T=0.1:0.3:5,omega_GHz=14|15.5|17,r_nm=1.0856".
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, default_value = "-pi")]
        target_phase: String,
        /// Worker threads (0 = all cores). Results are identical either way.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Also report the fastest gate with concurrence at least this value.
        #[arg(long)]
        c_min: Option<f64>,
    },
    /// Fit the inter-spin distance and frequency convention to a gate time.
    Calibrate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Where to write the calibration document (default calibration.toml).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Target gate time in ns.
        #[arg(long, default_value_t = 1.56)]
        target_tau_ns: f64,
    },
    /// Write the four reference-figure CSV files (theta and C, both scenarios).
    Figures {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (default current directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            format,
        } => {
            cmd_simulate(config.as_deref(), out.as_deref(), format.parse()?)?;
        }
        Command::GateTime {
            config,
            out,
            format,
            target_phase,
        } => {
            let target = parse_target_phase(&target_phase)?;
            cmd_gate_time(config.as_deref(), out.as_deref(), format.parse()?, target)?;
        }
        Command::Sweep {
            config,
            out,
            format,
            grid,
            target_phase,
            jobs,
            c_min,
        } => {
            let target = parse_target_phase(&target_phase)?;
            cmd_sweep(
                config.as_deref(),
                grid.as_deref(),
                out.as_deref(),
                format.parse::<OutputFormat>()?,
                target,
                jobs,
                c_min,
            )?;
        }
        Command::Calibrate {
            config,
            out,
            target_tau_ns,
        } => {
            cmd_calibrate(config.as_deref(), out.as_deref(), target_tau_ns)?;
        }
        Command::Figures { config, out } => {
            cmd_figures(config.as_deref(), out.as_deref())?;
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
