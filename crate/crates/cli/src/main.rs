use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use pufbench_core::config::ExperimentConfig;
use std::path::PathBuf;

/// Behavioral simulator and evaluation toolkit for memristor-based arbiter
/// PUFs.
#[derive(Parser)]
#[command(name = "pufbench", version, about)]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (flat `key = value` lines) overlaid on defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Named preset(s) applied before the config file, in order.
    #[arg(long, global = true)]
    preset: Vec<String>,

    /// Master seed (overrides mc.seed).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte Carlo sample count (overrides mc.samples).
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// Output directory (overrides io.out_dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker thread count; results are invariant to this.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Write an I-V table of the nominal device across a bias list.
    DeviceSweep {
        /// Comma-separated voltages (overrides device.sweep_v_list).
        #[arg(long, allow_hyphen_values = true)]
        v_list: Option<String>,
    },
    /// Evaluate one sampled instance over the configured challenge set.
    Simulate,
    /// Run a Monte Carlo population and write CRP data plus statistics.
    Mc {
        /// Write one consolidated CRP file instead of per-instance files.
        #[arg(long)]
        consolidated: bool,
        /// Write per-instance CRP files (the default unless mc.consolidated
        /// says otherwise).
        #[arg(long, conflicts_with = "consolidated")]
        per_instance: bool,
    },
    /// Compute uniqueness/reliability/uniformity/bit-aliasing from CRP files.
    Metrics {
        /// One CRP file per chip (same challenge set) for uniqueness.
        #[arg(long, num_args = 1..)]
        chips: Vec<PathBuf>,
        /// Reference CRP file for reliability.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Trial CRP files re-measured under perturbed conditions.
        #[arg(long, num_args = 1..)]
        trials: Vec<PathBuf>,
    },
    /// Sweep one environment axis and report reliability per point.
    Sweep {
        /// Axis: temp_cmos, temp_memristor or supply (overrides
        /// mc.sweep_axis).
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated points (overrides mc.sweep_points).
        #[arg(long, allow_hyphen_values = true)]
        points: Option<String>,
    },
    /// Run the four standard populations end to end and render the
    /// size/reliability/uniqueness table.
    Report,
}

fn build_config(common: &Common, command: &Command) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::default();
    for preset in &common.preset {
        config.apply_preset(preset)?;
    }
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)?;
        config.apply_str(&text)?;
    }
    if let Some(seed) = common.seed {
        config.set("mc.seed", seed.to_string())?;
    }
    if let Some(samples) = common.samples {
        config.set("mc.samples", samples.to_string())?;
    }
    if let Some(out) = &common.out {
        config.set("io.out_dir", out.display().to_string())?;
    }
    match command {
        Command::DeviceSweep { v_list: Some(v) } => config.set("device.sweep_v_list", v)?,
        Command::Sweep { axis, points } => {
            if let Some(axis) = axis {
                config.set("mc.sweep_axis", axis)?;
            }
            if let Some(points) = points {
                config.set("mc.sweep_points", points)?;
            }
        }
        _ => {}
    }
    Ok(config)
}

fn run(cli: &Cli) -> Result<()> {
    let config = build_config(&cli.common, &cli.command)?;
    let workers = cli.common.workers;
    match &cli.command {
        Command::DeviceSweep { .. } => {
            let path = pufbench::cmd_device_sweep(&config)?;
            println!("wrote {}", path.display());
        }
        Command::Simulate => {
            let path = pufbench::with_workers(workers, || pufbench::cmd_simulate(&config))??;
            println!("wrote {}", path.display());
        }
        Command::Mc {
            consolidated,
            per_instance,
        } => {
            let flag = if *consolidated {
                Some(true)
            } else if *per_instance {
                Some(false)
            } else {
                None
            };
            let out = pufbench::with_workers(workers, || pufbench::cmd_mc(&config, flag))??;
            println!(
                "wrote {} CRP file(s), {} records, stats at {}",
                out.crp_paths.len(),
                out.records,
                out.stats_path.display()
            );
        }
        Command::Metrics {
            chips,
            reference,
            trials,
        } => {
            let out = pufbench::cmd_metrics(&config, chips, reference.as_ref(), trials)?;
            print!("{}", out.table_text);
            println!(
                "wrote {} and {}",
                out.text_path.display(),
                out.kv_path.display()
            );
        }
        Command::Sweep { .. } => {
            let path = pufbench::with_workers(workers, || pufbench::cmd_sweep(&config))??;
            println!("wrote {}", path.display());
        }
        Command::Report => {
            let out = pufbench::with_workers(workers, || pufbench::cmd_report(&config))??;
            print!("{}", out.table_text);
            println!(
                "wrote {} and {}",
                out.table_path.display(),
                out.kv_path.display()
            );
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(&cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
