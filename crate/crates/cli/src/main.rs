use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use hetnet_core::harness::output::metadata_path;
use hetnet_core::harness::{load_config, run_experiment, write_csv, write_metadata, ExperimentConfig, ExperimentKind, RunMetadata};

/// Two-tier massive-MIMO downlink experiments.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// TOML configuration; omitted keys take the built-in defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV; metadata goes to `<out>.meta.json`.
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte-Carlo trials per drop (0 for closed forms only).
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads (0 for all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// rate-sweep, pr-sweep, power-scaling, scheduling or one-tier.
    #[arg(long, value_parser = parse_experiment)]
    experiment: Option<ExperimentKind>,
    /// User drops per sweep point.
    #[arg(long)]
    drops: Option<usize>,
}

fn parse_experiment(s: &str) -> Result<ExperimentKind, String> {
    s.parse().map_err(|e: hetnet_core::Error| e.to_string())
}

fn run(args: Args) -> hetnet_core::Result<()> {
    let mut cfg = match &args.config {
        Some(p) => load_config(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = args.seed {
        cfg.mc.seed = v;
    }
    if let Some(v) = args.trials {
        cfg.mc.trials = v;
    }
    if let Some(v) = args.workers {
        cfg.mc.workers = v;
    }
    if let Some(v) = args.experiment {
        cfg.experiment = v;
    }
    if let Some(v) = args.drops {
        cfg.mc.drops = v;
    }
    cfg.validate()?;
    let d = cfg.derived();
    log::info!(
        "tau={} prelog={:.4} n_sc={} p_sc={} dBm noise={:.3e} mW",
        d.tau,
        d.prelog,
        d.n_sc,
        d.p_sc_dbm,
        d.noise_mw
    );

    let start = Instant::now();
    let table = run_experiment(&cfg)?;
    let runtime = start.elapsed().as_secs_f64();
    write_csv(&table, &args.out)?;
    let meta = RunMetadata::new(&cfg, &table, runtime);
    write_metadata(&meta, &metadata_path(&args.out))?;
    log::info!(
        "{} rows ({} infeasible) in {runtime:.1} s -> {}",
        meta.rows,
        meta.infeasible_rows,
        args.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::FAILURE
        }
    }
}
