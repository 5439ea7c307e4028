use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qspeed::cli::{
    cmd_decompose, cmd_fig3, cmd_table2, cmd_tomo, to_csv, write_report, CountInputs,
    ExperimentConfig, WrittenReport,
};
use qspeed::dynamics::SpinAxis;
use qspeed::parallel::Execution;
use qspeed::swapnet::Shots;
use qspeed::waveplate::EulerAngles;
use qspeed::{fixtures, Result};

#[derive(Debug, Parser)]
#[command(
    name = "qspeed",
    version,
    about = "Speed-of-evolution witnesses and swap-network simulation"
)]
struct Cli {
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// JSON object merged into the configuration; may be repeated.
    #[arg(long = "set", value_name = "JSON", global = true)]
    overrides: Vec<String>,
    /// Directory for the CSV and JSON reports.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long)]
    axis: Option<SpinAxis>,
    #[arg(long)]
    tau: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact speed and SLDF over the p grid with threshold crossings.
    Table2 {
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Exact, sampled and fixture-state speed curves.
    Fig3 {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        seed: Option<u64>,
        /// Shots per run, or `exact`.
        #[arg(long)]
        shots: Option<Shots>,
        #[arg(long)]
        mc_samples: Option<usize>,
        #[arg(long)]
        sequential: bool,
    },
    /// Fixture fidelities and tomography self-consistency.
    Tomo {
        /// Directory of matrix-JSON fixtures (embedded copies when omitted).
        #[arg(long)]
        fixtures: Option<PathBuf>,
        /// Pauli-setting count file to reconstruct a state from.
        #[arg(long)]
        state_counts: Option<PathBuf>,
        /// Probe count file to reconstruct the Bell measurement from.
        #[arg(long)]
        detector_counts: Option<PathBuf>,
    },
    /// Wave-plate angles realizing the Euler rotation `Ry(xi) Rx(eta) Ry(zeta)`.
    Decompose {
        #[arg(long, allow_hyphen_values = true)]
        xi: f64,
        #[arg(long, allow_hyphen_values = true)]
        eta: f64,
        #[arg(long, allow_hyphen_values = true)]
        zeta: f64,
    },
    /// Writes the embedded fixture matrices as JSON files.
    ExportFixtures {
        #[arg(long)]
        out: PathBuf,
    },
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    for patch in &cli.overrides {
        config = config.apply_json_override(patch)?;
    }
    if let Some(dir) = &cli.output_dir {
        config.output_dir = dir.clone();
    }
    Ok(config)
}

fn apply_grid(config: &mut ExperimentConfig, grid: &GridArgs) {
    if let Some(axis) = grid.axis {
        config.axis = axis;
    }
    if let Some(tau) = grid.tau {
        config.tau = tau;
    }
}

fn report_paths(w: &WrittenReport) {
    eprintln!("wrote {} and {}", w.csv.display(), w.json.display());
}

fn run(cli: Cli) -> Result<()> {
    let mut config = resolve(&cli)?;
    match &cli.command {
        Command::Table2 { grid } => {
            apply_grid(&mut config, grid);
            let report = cmd_table2(&config)?;
            print!("{}", to_csv(&report.rows)?);
            for c in &report.crossings {
                println!(
                    "# crossing {} = {:.6} (above threshold for larger p: {})",
                    c.quantity, c.p, c.exceeds_above
                );
            }
            report_paths(&write_report(
                &config.output_dir,
                "table2",
                &report.rows,
                &report,
            )?);
        }
        Command::Fig3 {
            grid,
            seed,
            shots,
            mc_samples,
            sequential,
        } => {
            apply_grid(&mut config, grid);
            if let Some(seed) = seed {
                config.seed = *seed;
            }
            if let Some(shots) = shots {
                config.shots = *shots;
            }
            if let Some(n) = mc_samples {
                config.mc_samples = *n;
            }
            if *sequential {
                config.execution = Execution::Sequential;
            }
            let report = cmd_fig3(&config)?;
            print!("{}", to_csv(&report.rows)?);
            report_paths(&write_report(
                &config.output_dir,
                "fig3",
                &report.rows,
                &report,
            )?);
        }
        Command::Tomo {
            fixtures,
            state_counts,
            detector_counts,
        } => {
            if let Some(dir) = fixtures {
                config.fixtures_dir = Some(dir.clone());
            }
            let inputs = CountInputs {
                state_counts: state_counts.as_deref(),
                detector_counts: detector_counts.as_deref(),
            };
            let report = cmd_tomo(&config, &inputs)?;
            print!("{}", to_csv(&report.rows)?);
            println!(
                "# mean BSM fidelity {:.4} / {:.4} (reference {:.4} / {:.4})",
                report.bsm_mean_fidelity[0],
                report.bsm_mean_fidelity[1],
                report.bsm_reference_fidelity[0],
                report.bsm_reference_fidelity[1]
            );
            report_paths(&write_report(
                &config.output_dir,
                "tomo",
                &report.rows,
                &report,
            )?);
        }
        Command::Decompose { xi, eta, zeta } => {
            let report = cmd_decompose(&config, EulerAngles::new(*xi, *eta, *zeta))?;
            print!("{}", to_csv(&report.plates)?);
            println!("# reproduces target: {}", report.reproduces_target);
            report_paths(&write_report(
                &config.output_dir,
                "decompose",
                &report.plates,
                &report,
            )?);
        }
        Command::ExportFixtures { out } => {
            for path in fixtures::write_all(out)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
