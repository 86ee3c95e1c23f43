use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use repeater_core::{noise_tolerance_search, run_chain, AttemptMode, PairingMode, TimeModel};

use crate::config_io::{load_config, Overrides};
use crate::error::{CliError, CliResult};
use crate::plan::PlanReport;
use crate::plot::{render_svg, PlotRequest};
use crate::row::{write_rows, ResultRow};
use crate::sweep::{run_sweep, SweepSpec};

#[derive(Debug, Parser)]
#[command(
    name = "repeater-sim",
    version,
    about = "Entanglement-swapping repeater chain experiments"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Override the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Link-attempt model.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, global = true, value_enum)]
    pub time_model: Option<TimeModelArg>,
    #[arg(long, global = true, value_enum)]
    pub pairing: Option<PairingArg>,
    /// Exit with status 2 when a run or plan misses its target.
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Sampled,
    Expected,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TimeModelArg {
    PaperFaithful,
    DistanceAware,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PairingArg {
    Pumping,
    Nesting,
}

impl GlobalArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            attempt_mode: self.mode.map(|m| match m {
                ModeArg::Sampled => AttemptMode::Sampled,
                ModeArg::Expected => AttemptMode::Expected,
            }),
            time_model: self.time_model.map(|m| match m {
                TimeModelArg::PaperFaithful => TimeModel::PaperFaithful,
                TimeModelArg::DistanceAware => TimeModel::DistanceAware,
            }),
            pairing_mode: self.pairing.map(|p| match p {
                PairingArg::Pumping => PairingMode::Pumping,
                PairingArg::Nesting => PairingMode::Nesting,
            }),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one configuration and print its result row.
    Run { config: PathBuf },
    /// Run a parameter sweep and write one CSV row per point and repetition.
    Sweep {
        spec: PathBuf,
        /// Output CSV; standard output when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Print per-layer thresholds, ideal purification rounds and pair cost.
    Plan {
        #[arg(long)]
        f_target: f64,
        #[arg(long)]
        n_nodes: usize,
        /// Fidelity assumed for every link entering a layer.
        #[arg(long, default_value_t = 0.9)]
        input_fidelity: f64,
        #[arg(long, default_value_t = repeater_core::purification::DEFAULT_ROUND_CAP)]
        round_cap: u32,
    },
    /// Find the smallest memory lifetime on a grid that meets the target.
    Boundary {
        config: PathBuf,
        /// Ascending memory lifetimes in ms, comma separated.
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        grid: Vec<f64>,
        /// Target fidelity; defaults to the config's f_target.
        #[arg(long)]
        f_target: Option<f64>,
    },
    /// Draw columns of a result CSV as an SVG line chart.
    Plot {
        csv: PathBuf,
        #[arg(short, long)]
        x: String,
        /// Columns to plot, comma separated or repeated.
        #[arg(short, long, value_delimiter = ',', required = true, num_args = 1..)]
        y: Vec<String>,
        #[arg(long)]
        log_y: bool,
        #[arg(short, long)]
        out: PathBuf,
    },
}

/// Runs a parsed command line, writing results to `out` and notes to `err`.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let overrides = cli.global.overrides();
    let strict = cli.global.strict;
    match &cli.command {
        Command::Run { config } => {
            let mut config_value = load_config(config)?;
            overrides.apply(&mut config_value);
            let metrics = run_chain(&config_value)?;
            let row = ResultRow::new(&config_value, &metrics);
            write_rows(&mut *out, std::slice::from_ref(&row))?;
            let _ = writeln!(
                err,
                "F_end {:.6} (target {}), generation time {:.4} ms, {} swap rounds, cost {} (sum {})",
                metrics.final_fidelity,
                config_value.f_target,
                metrics.generation_time,
                metrics.swap_rounds,
                metrics.cost.chain_product,
                metrics.cost.total
            );
            match &metrics.shortfall {
                Some(reason) => {
                    let _ = writeln!(err, "infeasible: {reason}");
                    if strict {
                        return Err(CliError::Infeasible(reason.clone()));
                    }
                }
                None => {
                    let _ = writeln!(err, "feasible");
                }
            }
            Ok(())
        }
        Command::Sweep { spec, out: path } => {
            let spec = SweepSpec::load(spec)?;
            let rows = run_sweep(&spec, &overrides)?;
            match path {
                Some(path) => write_csv_file(path, &rows)?,
                None => write_rows(&mut *out, &rows)?,
            }
            let infeasible = rows.iter().filter(|r| !r.feasible).count();
            let _ = writeln!(err, "{} rows, {} infeasible", rows.len(), infeasible);
            if strict && infeasible > 0 {
                return Err(CliError::Infeasible(format!(
                    "{infeasible} of {} sweep points",
                    rows.len()
                )));
            }
            Ok(())
        }
        Command::Plan {
            f_target,
            n_nodes,
            input_fidelity,
            round_cap,
        } => {
            let pairing = overrides.pairing_mode.unwrap_or_default();
            let report = PlanReport::new(*f_target, *n_nodes, *input_fidelity, pairing, *round_cap)?;
            write!(out, "{}", report.render()).map_err(|e| CliError::io("<stdout>", e))?;
            if strict {
                if let Some(k) = report.blocking_layer() {
                    return Err(CliError::Infeasible(format!("layer {k} threshold unreachable")));
                }
            }
            Ok(())
        }
        Command::Boundary { config, grid, f_target } => {
            let mut template = load_config(config)?;
            overrides.apply(&mut template);
            let target = f_target.unwrap_or(template.f_target);
            let report = noise_tolerance_search(&template, target, grid)?;
            let w = |e| CliError::io("<stdout>", e);
            writeln!(out, "{:>10}  {:>14}  feasible", "t_depol", "final_fidelity").map_err(w)?;
            for p in &report.points {
                writeln!(out, "{:>10}  {:>14.9}  {}", p.t_depol, p.final_fidelity, p.feasible).map_err(w)?;
            }
            match report.boundary {
                Some(t) => {
                    writeln!(out, "boundary: {t} ms").map_err(w)?;
                    Ok(())
                }
                None => {
                    writeln!(out, "no feasible point").map_err(w)?;
                    Err(CliError::NoFeasiblePoint)
                }
            }
        }
        Command::Plot {
            csv,
            x,
            y,
            log_y,
            out: path,
        } => {
            let file = File::open(csv).map_err(|e| CliError::io(csv, e))?;
            let request = PlotRequest {
                x: x.clone(),
                y: y.clone(),
                log_y: *log_y,
            };
            let svg = render_svg(io::BufReader::new(file), &request)?;
            std::fs::write(path, svg).map_err(|e| CliError::io(path, e))?;
            Ok(())
        }
    }
}

fn write_csv_file(path: &Path, rows: &[ResultRow]) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_rows(BufWriter::new(file), rows)
}
