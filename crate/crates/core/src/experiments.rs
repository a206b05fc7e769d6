//! Study harness: density sweeps, bucket-brigade detection, beacon and
//! partition studies, and solution-probability aggregation.

use crate::evolve::{self, EvolutionConfig, EvolutionLog, EvolveError};
use crate::genome::{Controller, ControllerGenome};
use crate::rng::{derive_seed, label};
use crate::trace::{record_episode, TraceRecord};
use crate::world::{EventKind, World, WorldConfig, WorldError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Default share of delivered units that must have been pushed by two or
/// more robots for a run to count as a bucket-brigade solution.
pub const BRIGADE_THRESHOLD: f64 = 0.25;
/// Fitness a run must exceed to count as a solution.
pub const SOLUTION_BAR: f64 = 0.9;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("malformed trace: {0}")]
    MalformedTrace(String),
    #[error("invalid study: {0}")]
    Invalid(String),
    #[error(transparent)]
    Evolve(#[from] EvolveError),
    #[error(transparent)]
    World(#[from] WorldError),
}

/// Sample mean and standard error of the mean (n − 1 denominator; 0 for a
/// single sample).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Standard error of a difference of two independent means.
pub fn pooled_stderr(a: f64, b: f64) -> f64 {
    (a * a + b * b).sqrt()
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut r = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties; 0 when either
/// side has no variance.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let (rx, ry) = (ranks(xs), ranks(ys));
    let (mx, _) = mean_stderr(&rx);
    let (my, _) = mean_stderr(&ry);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx * vy).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub robot_count: u32,
    pub mean_fitness: f64,
    pub stderr: f64,
    pub episodes: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, robot_count: u32) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.robot_count == robot_count)
    }
}

/// Evaluates one controller at several team sizes with the resource count
/// held fixed. Every count uses the same episode seeds, derived exactly as
/// [`evolve::evaluate_fitness`] derives them from `derive_seed(seed, [SWEEP])`.
pub fn scalability_sweep(
    genome: &ControllerGenome,
    robot_counts: &[u32],
    world: &WorldConfig,
    n_episodes: u32,
    seed: u64,
    workers: usize,
) -> Result<SweepResult, ExperimentError> {
    if n_episodes == 0 || robot_counts.is_empty() {
        return Err(ExperimentError::Invalid("sweep needs at least one count and one episode".into()));
    }
    let mut counts = robot_counts.to_vec();
    counts.sort_unstable();
    counts.dedup();
    let controller = genome.develop().map_err(EvolveError::from)?;
    let eval_seed = derive_seed(seed, &[label::SWEEP]);
    let pool = evolve::build_pool(workers)?;
    let mut rows = Vec::with_capacity(counts.len());
    for &n in &counts {
        let config = EvolutionConfig {
            episodes: n_episodes,
            world: WorldConfig { robot_count: n, ..world.clone() },
            ..EvolutionConfig::default()
        };
        config.world.validate()?;
        let scores = pool.install(|| {
            (0..n_episodes)
                .into_par_iter()
                .map(|e| evolve::run_single_episode(&controller, &evolve::episode_world(&config, eval_seed, e)))
                .collect::<Result<Vec<f64>, WorldError>>()
        })?;
        let (mean, stderr) = mean_stderr(&scores);
        rows.push(SweepRow { robot_count: n, mean_fitness: mean, stderr, episodes: n_episodes });
    }
    Ok(SweepResult { rows })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrigadeStats {
    pub delivered_units: u32,
    /// Delivered units pushed by two or more distinct robots.
    pub multi_mover_units: u32,
    pub brigade_fraction: f64,
    pub is_brigade_solution: bool,
}

/// Reconstructs every unit's movers from Push events. A unit counts as
/// delivered when its last Push in the trace landed it in the dump (the
/// Push is immediately followed by a Dump event for the same unit).
pub fn brigade_classify(traces: &[Vec<TraceRecord>], threshold: f64) -> Result<BrigadeStats, ExperimentError> {
    let mut delivered = 0u32;
    let mut multi = 0u32;
    for (n, trace) in traces.iter().enumerate() {
        let bad = |msg: String| ExperimentError::MalformedTrace(format!("trace {n}: {msg}"));
        // unit -> (movers, last push delivered)
        let mut units: BTreeMap<u32, (BTreeSet<u32>, bool)> = BTreeMap::new();
        let mut last_t = None;
        for record in trace {
            if last_t.is_some_and(|t| record.t <= t) {
                return Err(bad(format!("timestep {} out of order", record.t)));
            }
            last_t = Some(record.t);
            let mut pending: Option<(u32, u32)> = None;
            for event in &record.events {
                if event.timestep != record.t {
                    return Err(bad(format!("event stamped {} inside record {}", event.timestep, record.t)));
                }
                match event.kind {
                    EventKind::Push { unit, robot, .. } => {
                        let entry = units.entry(unit).or_default();
                        entry.0.insert(robot);
                        entry.1 = false;
                        pending = Some((unit, robot));
                    }
                    EventKind::Dump { unit, robot } => {
                        if pending != Some((unit, robot)) {
                            return Err(bad(format!("dump of unit {unit} without a matching push")));
                        }
                        units.get_mut(&unit).expect("pushed unit is tracked").1 = true;
                        pending = None;
                    }
                    _ => pending = None,
                }
            }
        }
        for (movers, in_dump) in units.values() {
            if *in_dump {
                delivered += 1;
                multi += u32::from(movers.len() >= 2);
            }
        }
    }
    let fraction = if delivered == 0 { 0.0 } else { f64::from(multi) / f64::from(delivered) };
    Ok(BrigadeStats {
        delivered_units: delivered,
        multi_mover_units: multi,
        brigade_fraction: fraction,
        is_brigade_solution: delivered > 0 && fraction >= threshold,
    })
}

/// Records `n_episodes` traces of a homogeneous team.
pub fn record_traces(
    controller: &Controller,
    world: &WorldConfig,
    n_episodes: u32,
    seed: u64,
) -> Result<Vec<Vec<TraceRecord>>, ExperimentError> {
    (0..n_episodes)
        .map(|e| {
            let config = WorldConfig { rng_seed: derive_seed(seed, &[label::STUDY, u64::from(e)]), ..world.clone() };
            let mut w = World::new(&config)?;
            let team = vec![controller; config.robot_count as usize];
            Ok(record_episode(&mut w, &team)?)
        })
        .collect()
}

/// Fraction of runs whose best fitness exceeds `bar`.
pub fn solution_probability(logs: &[EvolutionLog], bar: f64) -> f64 {
    solution_probability_of(&logs.iter().map(EvolutionLog::best_fitness).collect::<Vec<_>>(), bar)
}

pub fn solution_probability_of(best_fitnesses: &[f64], bar: f64) -> f64 {
    if best_fitnesses.is_empty() {
        return 0.0;
    }
    best_fitnesses.iter().filter(|&&f| f > bar).count() as f64 / best_fitnesses.len() as f64
}

/// Shared settings of the evolution-driven studies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub evolution: EvolutionConfig,
    /// Master seeds; one evolution run per seed and setting.
    pub seeds: Vec<u64>,
    /// Fresh episodes used to score each final champion.
    pub test_episodes: u32,
}

/// One evolved run inside a study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRun {
    pub seed: u64,
    /// Champion's fitness on its own training episodes.
    pub train_fitness: f64,
    /// Champion's fitness on fresh test episodes.
    pub test_fitness: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    /// Human-readable setting, e.g. `partitions=4` or `timesteps=60,beacon=on`.
    pub setting: String,
    pub runs: Vec<StudyRun>,
    pub mean_fitness: f64,
    pub stderr: f64,
}

impl StudyRow {
    fn new(setting: String, runs: Vec<StudyRun>) -> StudyRow {
        let (mean_fitness, stderr) = mean_stderr(&runs.iter().map(|r| r.test_fitness).collect::<Vec<_>>());
        StudyRow { setting, runs, mean_fitness, stderr }
    }
}

/// Evolves a champion with `config` and scores it on fresh test episodes.
pub fn evolve_and_test(
    config: &EvolutionConfig,
    test_episodes: u32,
    pool: &rayon::ThreadPool,
) -> Result<(EvolutionLog, StudyRun), ExperimentError> {
    let log = evolve::run_evolution_in(config, pool)?;
    let test = EvolutionConfig { episodes: test_episodes.max(1), boundary_mix: 0.0, ..config.clone() };
    let controller = log.champion.develop().map_err(EvolveError::from)?;
    let test_seed = derive_seed(config.seed, &[label::STUDY]);
    let scores = pool.install(|| {
        (0..test.episodes)
            .into_par_iter()
            .map(|e| evolve::run_single_episode(&controller, &evolve::episode_world(&test, test_seed, e)))
            .collect::<Result<Vec<f64>, WorldError>>()
    })?;
    let (test_fitness, _) = mean_stderr(&scores);
    let run = StudyRun { seed: config.seed, train_fitness: log.champion_fitness, test_fitness };
    Ok((log, run))
}

fn study_rows(
    study: &StudyConfig,
    settings: Vec<(String, EvolutionConfig)>,
    workers: usize,
) -> Result<Vec<StudyRow>, ExperimentError> {
    if study.seeds.is_empty() {
        return Err(ExperimentError::Invalid("a study needs at least one seed".into()));
    }
    let pool = evolve::build_pool(workers)?;
    settings
        .into_iter()
        .map(|(name, config)| {
            let runs = study
                .seeds
                .iter()
                .map(|&seed| Ok(evolve_and_test(&EvolutionConfig { seed, ..config.clone() }, study.test_episodes, &pool)?.1))
                .collect::<Result<Vec<_>, ExperimentError>>()?;
            Ok(StudyRow::new(name, runs))
        })
        .collect()
}

/// Champion fitness with the beacon on and off, at each time budget.
pub fn beacon_study(study: &StudyConfig, time_budgets: &[u32], workers: usize) -> Result<Vec<StudyRow>, ExperimentError> {
    if time_budgets.is_empty() {
        return Err(ExperimentError::Invalid("beacon study needs at least one time budget".into()));
    }
    let mut settings = Vec::new();
    for &t in time_budgets {
        for on in [true, false] {
            let mut config = study.evolution.clone();
            config.world.max_timesteps = t;
            config.world.beacon_enabled = on;
            settings.push((format!("timesteps={t},beacon={}", if on { "on" } else { "off" }), config));
        }
    }
    study_rows(study, settings, workers)
}

/// Champion fitness for each floor-partition setting, equal budgets.
pub fn partition_study(study: &StudyConfig, partitions: &[u32], workers: usize) -> Result<Vec<StudyRow>, ExperimentError> {
    if let Some(p) = partitions.iter().find(|p| ![1, 4, 16].contains(*p)) {
        return Err(ExperimentError::Invalid(format!("partition count {p} is not 1, 4 or 16")));
    }
    let settings = partitions
        .iter()
        .map(|&p| {
            let mut config = study.evolution.clone();
            config.world.partition_count = p;
            (format!("partitions={p}"), config)
        })
        .collect();
    study_rows(study, settings, workers)
}

/// Brigade statistics of champions evolved at each team size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrigadeRow {
    pub robot_count: u32,
    pub seed: u64,
    pub test_fitness: f64,
    pub stats: BrigadeStats,
}

pub fn brigade_study(
    study: &StudyConfig,
    robot_counts: &[u32],
    threshold: f64,
    workers: usize,
) -> Result<Vec<BrigadeRow>, ExperimentError> {
    let pool = evolve::build_pool(workers)?;
    let mut rows = Vec::new();
    for &n in robot_counts {
        for &seed in &study.seeds {
            let mut config = EvolutionConfig { seed, ..study.evolution.clone() };
            config.world.robot_count = n;
            let (log, run) = evolve_and_test(&config, study.test_episodes, &pool)?;
            let controller = log.champion.develop().map_err(EvolveError::from)?;
            let traces = record_traces(&controller, &config.world, study.test_episodes.max(1), seed)?;
            let stats = brigade_classify(&traces, threshold)?;
            rows.push(BrigadeRow { robot_count: n, seed, test_fitness: run.test_fitness, stats });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ant::{seed_genome, SeedParams};
    use crate::controller::{Behavior, Repertoire};
    use crate::rng::rng_from_seed;
    use crate::world::{Event, Pos};

    fn push(t: u32, unit: u32, robot: u32) -> Event {
        Event { timestep: t, kind: EventKind::Push { unit, from: Pos::new(1, 1), to: Pos::new(1, 2), robot } }
    }

    fn dump(t: u32, unit: u32, robot: u32) -> Event {
        Event { timestep: t, kind: EventKind::Dump { unit, robot } }
    }

    fn record(t: u32, events: Vec<Event>) -> TraceRecord {
        TraceRecord { t, robots: vec![], events }
    }

    #[test]
    fn relayed_unit_counts_as_multi_mover() {
        let trace = vec![
            record(0, vec![push(0, 7, 0)]),
            record(1, vec![push(1, 7, 2), push(1, 3, 2), dump(1, 3, 2)]),
            record(2, vec![push(2, 7, 2), dump(2, 7, 2)]),
        ];
        let stats = brigade_classify(&[trace], BRIGADE_THRESHOLD).unwrap();
        assert_eq!(stats.delivered_units, 2);
        assert_eq!(stats.multi_mover_units, 1);
        assert_eq!(stats.brigade_fraction, 0.5);
        assert!(stats.is_brigade_solution);
    }

    #[test]
    fn units_pushed_out_of_the_dump_are_not_delivered() {
        let trace = vec![record(0, vec![push(0, 1, 0), dump(0, 1, 0)]), record(1, vec![push(1, 1, 1)])];
        let stats = brigade_classify(&[trace], BRIGADE_THRESHOLD).unwrap();
        assert_eq!(stats.delivered_units, 0);
        assert_eq!(stats.brigade_fraction, 0.0);
        assert!(!stats.is_brigade_solution);
    }

    #[test]
    fn malformed_traces_are_rejected() {
        let orphan = vec![record(0, vec![dump(0, 1, 0)])];
        assert!(matches!(brigade_classify(&[orphan], 0.25), Err(ExperimentError::MalformedTrace(_))));
        let backwards = vec![record(3, vec![]), record(2, vec![])];
        assert!(matches!(brigade_classify(&[backwards], 0.25), Err(ExperimentError::MalformedTrace(_))));
        let stamped = vec![record(0, vec![push(1, 1, 0)])];
        assert!(matches!(brigade_classify(&[stamped], 0.25), Err(ExperimentError::MalformedTrace(_))));
    }

    #[test]
    fn empty_and_single_robot_traces_have_zero_fraction() {
        assert_eq!(brigade_classify(&[], 0.25).unwrap().brigade_fraction, 0.0);
        let c = crate::controller::Constant {
            repertoire: Repertoire::Basis,
            triggered: [Behavior::MoveForward, Behavior::TurnRight].into_iter().collect(),
        };
        let world = WorldConfig { robot_count: 1, max_timesteps: 200, ..WorldConfig::default() };
        let controller = crate::genome::Controller::Fixed(crate::baselines::random_fixed_net(
            &mut rng_from_seed(1),
            crate::baselines::NetVariant::Pc,
            Repertoire::Basis,
        ));
        let traces = record_traces(&controller, &world, 3, 1).unwrap();
        assert_eq!(brigade_classify(&traces, 0.25).unwrap().multi_mover_units, 0);
        let mut w = World::new(&world).unwrap();
        let trace = record_episode(&mut w, &[&c]).unwrap();
        assert_eq!(brigade_classify(&[trace], 0.25).unwrap().brigade_fraction, 0.0);
    }

    #[test]
    fn classification_agrees_with_world_bookkeeping() {
        // the world's own mover sets and dump membership give the same answer
        for seed in 0..20 {
            let genome = seed_genome(&mut rng_from_seed(seed), Repertoire::Basis, &SeedParams::default());
            let controller = crate::genome::Controller::Ant(crate::ant::Tissue::develop(&genome).unwrap());
            let config = WorldConfig { rng_seed: seed, max_timesteps: 150, ..WorldConfig::default() };
            let mut w = World::new(&config).unwrap();
            let trace = record_episode(&mut w, &vec![&controller; 4]).unwrap();
            let stats = brigade_classify(&[trace], 0.25).unwrap();
            let delivered: Vec<_> = w.units().iter().filter(|u| w.in_dump(u.position)).collect();
            assert_eq!(stats.delivered_units as usize, delivered.len());
            assert_eq!(stats.multi_mover_units as usize, delivered.iter().filter(|u| u.mover_set.len() >= 2).count());
        }
    }

    #[test]
    fn spearman_basics() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), -1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]), 0.0);
        // ties get average ranks: ranks (1, 2.5, 2.5, 4) vs (1, 2, 3, 4)
        let rho = spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]);
        assert!((rho - 4.5 / (4.5f64 * 5.0).sqrt()).abs() < 1e-12, "{rho}");
    }

    #[test]
    fn solution_probability_counts_runs_above_the_bar() {
        let fits = [0.95, 0.2, 0.91, 0.5, 0.3, 0.1, 0.92, 0.0, 0.4, 0.6];
        assert_eq!(solution_probability_of(&fits, 0.9), 0.3);
        assert_eq!(solution_probability_of(&[0.1, 0.2], 0.9), 0.0);
        assert!(solution_probability_of(&fits, 0.5) >= solution_probability_of(&fits, 0.9));
    }

    #[test]
    fn single_count_sweep_matches_evaluate_fitness() {
        let genome = ControllerGenome::Ant(seed_genome(&mut rng_from_seed(4), Repertoire::Basis, &SeedParams::default()));
        let world = WorldConfig { max_timesteps: 100, ..WorldConfig::default() };
        let sweep = scalability_sweep(&genome, &[1], &world, 6, 9, 1).unwrap();
        let config = EvolutionConfig {
            episodes: 6,
            world: WorldConfig { robot_count: 1, ..world.clone() },
            ..EvolutionConfig::default()
        };
        let direct = evolve::evaluate_fitness(&genome, &config, derive_seed(9, &[label::SWEEP])).unwrap();
        assert!((sweep.rows[0].mean_fitness - direct).abs() < 1e-12);
        let multi = scalability_sweep(&genome, &[16, 1, 4], &world, 3, 9, 2).unwrap();
        let counts: Vec<u32> = multi.rows.iter().map(|r| r.robot_count).collect();
        assert_eq!(counts, vec![1, 4, 16]);
    }

    #[test]
    fn mean_stderr_known_values() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 12.0).sqrt()).abs() < 1e-12);
        assert_eq!(mean_stderr(&[0.4]), (0.4, 0.0));
    }
}
