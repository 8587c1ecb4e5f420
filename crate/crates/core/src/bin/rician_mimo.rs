//! Command-line front end: antenna sweeps, SE distributions, Monte Carlo
//! validation and network dumps, driven by TOML configs.
//!
//! Exit codes: 0 success, 1 configuration error, 2 validation failure,
//! 3 I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rician_mimo::error::{Error, Result};
use rician_mimo::experiment::{
    self, emit_plot_script, ExperimentConfig, Preset,
};

#[derive(Parser)]
#[command(
    name = "rician-mimo",
    version,
    about = "Uplink SE of multi-cell massive MIMO under correlated Rician fading"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Average UL sum SE versus the number of BS antennas (CSV + gnuplot
    /// script).
    Fig1(RunArgs),
    /// Empirical CDF of the per-UE SE at a fixed antenna count.
    Fig2(RunArgs),
    /// Closed-form SINR versus Monte Carlo moments for every UE.
    Validate(RunArgs),
    /// Write one network geometry realization as structured text.
    DumpNetwork(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment config; defaults to the subcommand's preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the global seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores). Affects speed only, never results.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are successes, anything else is a
            // configuration error
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(args: &RunArgs, preset: Preset) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path, preset)?,
        None => ExperimentConfig::preset(preset),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_path(cfg: &ExperimentConfig, default_name: &str) -> PathBuf {
    cfg.out
        .clone()
        .unwrap_or_else(|| PathBuf::from(default_name))
}

fn run(cli: Cli) -> Result<()> {
    let (args, preset) = match &cli.command {
        Command::Fig1(a) => (a, Preset::PaperFig1),
        Command::Fig2(a) => (a, Preset::PaperFig2),
        Command::Validate(a) => (a, Preset::Validate),
        Command::DumpNetwork(a) => (a, Preset::Custom),
    };
    let cfg = load_config(args, preset)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(&cli.command, &cfg))
}

fn dispatch(cmd: &Command, cfg: &ExperimentConfig) -> Result<()> {
    match cmd {
        Command::Fig1(_) => {
            let points = experiment::run_fig1(cfg)?;
            let path = out_path(cfg, "fig1.csv");
            experiment::write_bytes(&path, experiment::fig1_csv(&points).as_bytes())?;
            let script = emit_plot_script(&path, Preset::PaperFig1)?;
            println!(
                "fig1: {} curve points over {} drops -> {} (+ {})",
                points.len(),
                cfg.drops,
                path.display(),
                script.display()
            );
            Ok(())
        }
        Command::Fig2(_) => {
            let points = experiment::run_fig2(cfg)?;
            let path = out_path(cfg, "fig2.csv");
            experiment::write_bytes(&path, experiment::fig2_csv(&points).as_bytes())?;
            let script = emit_plot_script(&path, Preset::PaperFig2)?;
            println!(
                "fig2: {} CDF points at M={} -> {} (+ {})",
                points.len(),
                cfg.sweep[0],
                path.display(),
                script.display()
            );
            Ok(())
        }
        Command::Validate(_) => {
            let (rows, all_pass) = experiment::run_validate(cfg)?;
            let path = out_path(cfg, "validate.csv");
            experiment::write_bytes(&path, experiment::validate_csv(&rows).as_bytes())?;
            let failed: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
            println!(
                "validate: {}/{} UE checks passed -> {}",
                rows.len() - failed.len(),
                rows.len(),
                path.display()
            );
            for r in &failed {
                println!(
                    "  FAIL m={} {} {} cell={} ue={}: closed {:.6e} vs mc {:.6e} (se {:.2e}, rel {:.3e})",
                    r.m,
                    r.fading.label(),
                    r.estimator.label(),
                    r.cell,
                    r.ue,
                    r.gamma_closed,
                    r.gamma_mc,
                    r.mc_se,
                    r.rel_err
                );
            }
            if all_pass {
                Ok(())
            } else {
                Err(Error::ValidationFailed(format!(
                    "{} of {} UE checks outside tolerance",
                    failed.len(),
                    rows.len()
                )))
            }
        }
        Command::DumpNetwork(_) => {
            let path = out_path(cfg, "network.txt");
            experiment::dump_network_file(cfg, &path)?;
            println!("network dump -> {}", path.display());
            Ok(())
        }
    }
}
