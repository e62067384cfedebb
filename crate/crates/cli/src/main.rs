//! `soaphd`: Monte Carlo experiments, sweeps, cross-validation and log replay.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use soa_phd::birth::BirthModelKind;
use soa_phd::harness::{
    self, estimate_expected_births, load_logs, output, run_monte_carlo, run_on_logs, scans_to_sequence,
    sweep_birth_weight, write_jsonl, ExperimentConfig, SequenceCounts,
};
use soa_phd::sim::{simulate, trial_rng};

#[derive(Parser)]
#[command(
    name = "soaphd",
    version,
    about = "GM-PHD tracking experiments with pluggable birth models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo trials on the simulator.
    Simulate(Common),
    /// Mean delay across a range of expected-births settings.
    Sweep(Common),
    /// Cross-validated expected-births estimates from detection logs.
    Crossval(LogArgs),
    /// Replays detection logs through the filter with per-fold estimates.
    Replay(LogArgs),
    /// Parses and checks a config file (and the scenario it references).
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
    /// Writes simulated trials as a detection log.
    ExportLogs {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Number of sequences (one simulated trial each).
        #[arg(long, default_value_t = 7)]
        sequences: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Truncate sequence `i` to `steps - i * step_decrement` frames so
        /// that durations vary.
        #[arg(long, default_value_t = 50)]
        step_decrement: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed; trial `t` uses `seed + t`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// One model, a comma-separated list, or `all`.
    #[arg(long)]
    birth_model: Option<String>,
    /// Clutter rate(s) per scan, comma-separated.
    #[arg(long, value_delimiter = ',')]
    clutter: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct LogArgs {
    #[command(flatten)]
    common: Common,
    /// JSONL log file or directory; overrides `replay.logs`.
    #[arg(long)]
    logs: Option<PathBuf>,
    #[arg(long)]
    folds: Option<usize>,
}

fn parse_models(s: &str) -> Result<Vec<BirthModelKind>> {
    if s == "all" {
        return Ok(BirthModelKind::ALL.to_vec());
    }
    s.split(',')
        .map(|m| m.trim().parse::<BirthModelKind>().map_err(Into::into))
        .collect()
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => Ok(ExperimentConfig::load(p)?),
        None => Ok(ExperimentConfig::default()),
    }
}

fn apply(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = load_config(common.config.as_deref())?;
    if let Some(s) = common.seed {
        cfg.base_seed = s;
    }
    if let Some(t) = common.trials {
        cfg.trials = t;
    }
    if let Some(m) = &common.birth_model {
        let models = parse_models(m)?;
        cfg.birth_model = models[0];
        cfg.compare = models;
    }
    if !common.clutter.is_empty() {
        cfg.clutter_rates = common.clutter.clone();
    }
    if let Some(o) = &common.out {
        cfg.output_dir = o.clone();
    }
    if let Some(j) = common.jobs {
        cfg.jobs = j;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn apply_logs(args: &LogArgs) -> Result<(ExperimentConfig, Vec<harness::DetectionLogSequence>)> {
    let mut cfg = apply(&args.common)?;
    if let Some(l) = &args.logs {
        cfg.replay.logs = Some(l.clone());
    }
    if let Some(f) = args.folds {
        cfg.replay.folds = f;
    }
    cfg.validate()?;
    let Some(path) = cfg.replay.logs.clone() else {
        bail!("no detection logs given (use --logs or set replay.logs)");
    };
    let seqs = load_logs(&path).with_context(|| format!("reading {}", path.display()))?;
    Ok((cfg, seqs))
}

fn print_summary(outcomes: &[harness::TrialOutcome]) {
    println!(
        "{:<18} {:>7} {:>9} {:>10} {:>9} {:>10} {:>10} {:>11}",
        "model", "clutter", "N_hat", "delay[s]", "card.err", "OSPA", "precision", "components"
    );
    let rows = output::summarize(outcomes);
    let get = |m: &str, l: f64, n: f64, metric: &str| {
        rows.iter()
            .find(|r| r.birth_model == m && r.clutter_rate == l && r.expected_births == n && r.metric == metric)
            .map(|r| r.mean)
            .unwrap_or(f64::NAN)
    };
    let mut seen = Vec::new();
    for r in &rows {
        let key = (r.birth_model.clone(), r.clutter_rate, r.expected_births);
        if seen.contains(&key) {
            continue;
        }
        seen.push(key.clone());
        let (m, l, n) = key;
        println!(
            "{:<18} {:>7} {:>9.5} {:>10.3} {:>9.3} {:>10.3} {:>10.3} {:>11.1}",
            m,
            l,
            n,
            get(&m, l, n, "mean_delay"),
            get(&m, l, n, "cardinality_error"),
            get(&m, l, n, "ospa"),
            get(&m, l, n, "precision"),
            get(&m, l, n, "mean_components"),
        );
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(common) => {
            let cfg = apply(&common)?;
            let outcomes = run_monte_carlo(&cfg)?;
            output::write_outcomes(&cfg.output_dir, "simulate", &outcomes)?;
            output::write_manifest(
                &cfg.output_dir,
                "simulate",
                vec!["trials.csv", "summary.csv", "delays.csv", "components.csv"],
                &cfg,
            )?;
            print_summary(&outcomes);
        }
        Command::Sweep(common) => {
            let cfg = apply(&common)?;
            let result = sweep_birth_weight(&cfg)?;
            output::write_sweep(&cfg.output_dir, &result)?;
            output::write_outcomes(&cfg.output_dir, "sweep", &result.outcomes)?;
            output::write_manifest(
                &cfg.output_dir,
                "sweep",
                vec![
                    "sweep.csv",
                    "sweep_summary.csv",
                    "trials.csv",
                    "summary.csv",
                    "delays.csv",
                    "components.csv",
                ],
                &cfg,
            )?;
            for s in &result.summary {
                println!(
                    "{:<18} settings={} mean delay={:.3} s  std across settings={:.4} s",
                    s.birth_model, s.settings, s.mean_of_means, s.std_of_means
                );
            }
        }
        Command::Crossval(args) => {
            let (cfg, seqs) = apply_logs(&args)?;
            let counts: Vec<SequenceCounts> = seqs.iter().map(SequenceCounts::from).collect();
            let folds = estimate_expected_births(&counts, cfg.replay.folds)?;
            output::write_crossval(&cfg.output_dir, &folds)?;
            output::write_manifest(&cfg.output_dir, "crossval", vec!["crossval.csv"], &cfg)?;
            for f in &folds {
                println!(
                    "fold {}: held out {:?}, N_hat = {}/{} = {:.6}",
                    f.fold, f.held_out, f.train_targets, f.train_steps, f.expected_births
                );
            }
        }
        Command::Replay(args) => {
            let (cfg, seqs) = apply_logs(&args)?;
            let (folds, outcomes) = run_on_logs(&cfg, &seqs, &cfg.models())?;
            output::write_crossval(&cfg.output_dir, &folds)?;
            output::write_outcomes(&cfg.output_dir, "replay", &outcomes)?;
            output::write_manifest(
                &cfg.output_dir,
                "replay",
                vec![
                    "crossval.csv",
                    "trials.csv",
                    "summary.csv",
                    "delays.csv",
                    "components.csv",
                ],
                &cfg,
            )?;
            print_summary(&outcomes);
        }
        Command::ValidateConfig { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let scenario = cfg.load_scenario()?;
            if let Some(l) = &cfg.replay.logs {
                load_logs(l)?;
            }
            println!(
                "{}: ok ({} steps, {} targets, models {:?})",
                config.display(),
                scenario.steps(),
                scenario.targets.len(),
                cfg.models().iter().map(|m| m.as_str()).collect::<Vec<_>>()
            );
        }
        Command::ExportLogs {
            config,
            sequences,
            seed,
            step_decrement,
            out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let scenario = cfg.load_scenario()?;
            let base = seed.unwrap_or(cfg.base_seed);
            let seqs: Vec<_> = (0..sequences)
                .map(|i| {
                    let mut scans = simulate(&scenario, &mut trial_rng(base.wrapping_add(i as u64)));
                    let keep = scans.len().saturating_sub(i * step_decrement).max(1);
                    scans.truncate(keep);
                    scans_to_sequence(&format!("sim{i:02}"), &scans, &scenario)
                })
                .collect();
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            let file = std::fs::File::create(&out)?;
            write_jsonl(&seqs, std::io::BufWriter::new(file))?;
            println!("wrote {} sequences to {}", seqs.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
