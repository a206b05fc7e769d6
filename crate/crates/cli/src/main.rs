//! `antmine` — evolve controllers, evaluate genomes and run studies.
//!
//! Exit codes: 0 success, 2 input or configuration error, 3 runtime
//! failure, 4 internal invariant violation.

mod args;
mod output;

use antmine::evolve::{self, EvolutionConfig};
use antmine::experiments::{self, StudyConfig, StudyRow};
use antmine::genome::ControllerGenome;
use antmine::rng::{derive_seed, label};
use antmine::trace::{read_trace, record_episode, write_trace};
use antmine::world::World;
use args::{Cli, Command, ConfigArgs};
use clap::Parser;
use output::{Manifest, OutputDir};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: unreadable or invalid config, genome or trace.
    #[error("{0}")]
    Input(String),
    /// Failure while running.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

pub fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

pub fn runtime_err(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
        Err(_) => {
            eprintln!("error: internal invariant violated (see panic message above)");
            ExitCode::from(4)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Evolve { config, partitions, out } => cmd_evolve(&config, partitions, &out),
        Command::Eval { config, genome, partitions, out } => cmd_eval(&config, &genome, partitions, &out),
        Command::Sweep { config, genome, counts, out } => cmd_sweep(&config, &genome, &counts, &out),
        Command::Brigade { traces, threshold, out } => cmd_brigade(&traces, threshold, &out),
        Command::Beacon { config, budgets, seeds, test_episodes, out } => {
            let study = resolve_study(&config, None, seeds, test_episodes)?;
            let rows = experiments::beacon_study(&study, &budgets, config.workers()).map_err(runtime_err)?;
            write_study("beacon", &study, &rows, &out, &["timesteps", "beacon"], |s| {
                // "timesteps=60,beacon=on" -> ["60", "on"]
                s.split(',').map(|kv| kv.split_once('=').map_or(kv, |(_, v)| v).to_string()).collect()
            })
        }
        Command::Partition { config, partitions, seeds, test_episodes, out } => {
            let study = resolve_study(&config, None, seeds, test_episodes)?;
            let rows = experiments::partition_study(&study, &partitions, config.workers()).map_err(runtime_err)?;
            write_study("partition", &study, &rows, &out, &["partitions"], |s| {
                vec![s.trim_start_matches("partitions=").to_string()]
            })
        }
    }
}

fn resolve(config: &ConfigArgs, partitions: Option<u32>) -> Result<EvolutionConfig, CliError> {
    let resolved = config.resolve(partitions)?;
    resolved.validate().map_err(input_err)?;
    Ok(resolved)
}

fn resolve_study(config: &ConfigArgs, partitions: Option<u32>, seeds: u32, test_episodes: u32) -> Result<StudyConfig, CliError> {
    if seeds == 0 {
        return Err(CliError::Input("--seeds must be at least 1".into()));
    }
    let evolution = resolve(config, partitions)?;
    let seeds = (0..u64::from(seeds)).map(|i| derive_seed(evolution.seed, &[label::STUDY, i])).collect();
    Ok(StudyConfig { evolution, seeds, test_episodes })
}

fn cmd_evolve(args: &ConfigArgs, partitions: Option<u32>, out: &Path) -> Result<(), CliError> {
    let config = resolve(args, partitions)?;
    let mut manifest = Manifest::start("evolve", json!(config), config.seed);
    let log = evolve::run_evolution(&config, args.workers()).map_err(runtime_err)?;
    let dir = OutputDir::create(out)?;

    let mut csv = dir.csv_writer("evolution.csv")?;
    csv.write_record(["generation", "best_fitness", "mean_fitness", "best_genome_id"]).map_err(runtime_err)?;
    for s in &log.stats {
        csv.serialize((s.generation, s.best_fitness, s.mean_fitness, s.best_genome_id)).map_err(runtime_err)?;
    }
    dir.finish_csv(csv)?;
    dir.write_text("champion.json", &(log.champion.to_json() + "\n"))?;
    if config.checkpoint_interval > 0 {
        for (generation, genome) in &log.checkpoints {
            dir.write_text(&format!("checkpoints/champion_gen{generation:05}.json"), &(genome.to_json() + "\n"))?;
        }
    }
    manifest.results = json!({ "champion_fitness": log.champion_fitness, "generations": log.stats.len() - 1 });
    manifest.finish(&dir)?;
    println!("{:.6}", log.champion_fitness);
    Ok(())
}

fn load_genome(path: &Path) -> Result<ControllerGenome, CliError> {
    ControllerGenome::load(path).map_err(input_err)
}

fn cmd_eval(args: &ConfigArgs, genome_path: &Path, partitions: Option<u32>, out: &Path) -> Result<(), CliError> {
    let config = args.resolve(partitions)?;
    let genome = load_genome(genome_path)?;
    if config.episodes == 0 {
        return Err(CliError::Input("episodes: must be at least 1".into()));
    }
    // an invalid world is a runtime failure for eval
    config.world.validate().map_err(runtime_err)?;
    let mut manifest = Manifest::start("eval", json!({ "config": config, "genome": genome_path }), config.seed);
    let controller = genome.develop().map_err(input_err)?;
    let dir = OutputDir::create(out)?;
    let mut total = 0.0;
    for e in 0..config.episodes {
        let world_config = evolve::episode_world(&config, config.seed, e);
        let mut world = World::new(&world_config).map_err(runtime_err)?;
        let team = vec![&controller; world_config.robot_count as usize];
        let records = record_episode(&mut world, &team).map_err(runtime_err)?;
        world.check_invariants().map_err(|m| runtime_err(format!("world invariant violated: {m}")))?;
        total += world.fitness().map_err(runtime_err)?;
        let mut buf = Vec::new();
        write_trace(&mut buf, &records).map_err(runtime_err)?;
        dir.write_bytes(&format!("traces/episode_{e:04}.jsonl"), &buf)?;
    }
    let fitness = total / f64::from(config.episodes);
    manifest.results = json!({ "mean_fitness": fitness });
    manifest.finish(&dir)?;
    println!("{fitness:.6}");
    Ok(())
}

fn cmd_sweep(args: &ConfigArgs, genome_path: &Path, counts: &[u32], out: &Path) -> Result<(), CliError> {
    let config = args.resolve(None)?;
    let genome = load_genome(genome_path)?;
    let manifest = Manifest::start(
        "sweep",
        json!({ "config": config, "genome": genome_path, "counts": counts }),
        config.seed,
    );
    let result = experiments::scalability_sweep(&genome, counts, &config.world, config.episodes, config.seed, args.workers())
        .map_err(|e| match e {
            experiments::ExperimentError::World(w) => input_err(w),
            other => runtime_err(other),
        })?;
    let dir = OutputDir::create(out)?;
    let mut csv = dir.csv_writer("sweep.csv")?;
    csv.write_record(["robot_count", "mean_fitness", "stderr", "episodes"]).map_err(runtime_err)?;
    for r in &result.rows {
        csv.serialize((r.robot_count, r.mean_fitness, r.stderr, r.episodes)).map_err(runtime_err)?;
    }
    dir.finish_csv(csv)?;
    manifest.finish(&dir)?;
    Ok(())
}

fn cmd_brigade(traces: &Path, threshold: f64, out: &Path) -> Result<(), CliError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(traces)
        .map_err(|e| input_err(format!("cannot read trace directory {}: {e}", traces.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Input(format!("no .jsonl traces in {}", traces.display())));
    }
    let manifest = Manifest::start("brigade", json!({ "traces": traces, "threshold": threshold }), 0);
    let mut all = Vec::with_capacity(files.len());
    let mut rows = Vec::with_capacity(files.len() + 1);
    for path in &files {
        let file = std::fs::File::open(path).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
        let trace = read_trace(std::io::BufReader::new(file)).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
        let stats = experiments::brigade_classify(std::slice::from_ref(&trace), threshold).map_err(input_err)?;
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        rows.push((name, stats));
        all.push(trace);
    }
    let total = experiments::brigade_classify(&all, threshold).map_err(input_err)?;
    rows.push(("all".to_string(), total));

    let dir = OutputDir::create(out)?;
    let mut csv = dir.csv_writer("brigade.csv")?;
    csv.write_record(["trace", "delivered_units", "multi_mover_units", "brigade_fraction", "is_brigade_solution"])
        .map_err(runtime_err)?;
    for (name, s) in &rows {
        csv.serialize((name, s.delivered_units, s.multi_mover_units, s.brigade_fraction, s.is_brigade_solution))
            .map_err(runtime_err)?;
    }
    dir.finish_csv(csv)?;
    manifest.finish(&dir)?;
    Ok(())
}

fn write_study(
    name: &'static str,
    study: &StudyConfig,
    rows: &[StudyRow],
    out: &Path,
    setting_columns: &[&str],
    split_setting: impl Fn(&str) -> Vec<String>,
) -> Result<(), CliError> {
    let mut manifest = Manifest::start(name, json!(study), study.evolution.seed);
    let dir = OutputDir::create(out)?;
    let mut csv = dir.csv_writer(&format!("{name}.csv"))?;
    let mut header: Vec<&str> = setting_columns.to_vec();
    header.extend(["mean_fitness", "stderr", "runs"]);
    csv.write_record(&header).map_err(runtime_err)?;
    for row in rows {
        let mut record = split_setting(&row.setting);
        record.extend([row.mean_fitness.to_string(), row.stderr.to_string(), row.runs.len().to_string()]);
        csv.write_record(&record).map_err(runtime_err)?;
    }
    dir.finish_csv(csv)?;
    manifest.results = json!(rows);
    manifest.finish(&dir)?;
    for row in rows {
        println!("{}: {:.4} ± {:.4}", row.setting, row.mean_fitness, row.stderr);
    }
    Ok(())
}
