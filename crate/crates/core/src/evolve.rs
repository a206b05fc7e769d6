//! Generational genetic algorithm with tournament selection and elitism.
//!
//! Every random draw comes from a stream derived from the master seed and a
//! fixed path, so results do not depend on how evaluations are scheduled:
//!
//! * initial individual `i`: `[INIT_POPULATION, i]`
//! * fixed-net topology (one per run): `[TOPOLOGY]`
//! * selection and variation in generation `g`: `[VARIATION, g]`
//! * evaluation of individual `i` in generation `g`: `[EVALUATION, g, i]`,
//!   episode `e` then uses `derive_seed(eval_seed, [e])`
//!
//! Elites carry their fitness forward rather than being re-scored, which
//! makes the population best non-decreasing.

use crate::ant::{self, SeedParams};
use crate::baselines::{self, NetVariant};
use crate::controller::Repertoire;
use crate::genome::{Controller, ControllerGenome, GenomeError};
use crate::rng::{derive_rng, derive_seed, label};
use crate::world::{World, WorldConfig, WorldError};
use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("invalid evolution config: {0}")]
    ConfigInvalid(String),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Genome(#[from] GenomeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerKind {
    AntBasis,
    AntPrimitive,
    Fc,
    Pc,
}

impl ControllerKind {
    pub fn mode(self) -> Repertoire {
        match self {
            ControllerKind::AntPrimitive => Repertoire::Primitive,
            _ => Repertoire::Basis,
        }
    }

    pub fn accepts(self, genome: &ControllerGenome) -> bool {
        match (self, genome) {
            (ControllerKind::AntBasis | ControllerKind::AntPrimitive, ControllerGenome::Ant(g)) => g.mode == self.mode(),
            (ControllerKind::Fc, ControllerGenome::Fixed(n)) => n.variant == NetVariant::Fc,
            (ControllerKind::Pc, ControllerGenome::Fixed(n)) => n.variant == NetVariant::Pc,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionConfig {
    pub population: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    /// `None` means `round(0.06 · population)`, at least 2.
    pub tournament_size: Option<usize>,
    pub episodes: u32,
    pub generations: u32,
    pub elitism: usize,
    /// Template for every evaluation world; its `rng_seed` is replaced by a
    /// derived episode seed.
    pub world: WorldConfig,
    pub controller: ControllerKind,
    pub seed: u64,
    /// Fraction of evaluation episodes run with a single robot.
    pub boundary_mix: f64,
    pub seed_params: SeedParams,
    /// Champion snapshot every this many generations; 0 keeps only the final.
    pub checkpoint_interval: u32,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            population: 100,
            crossover_prob: 0.7,
            mutation_prob: 0.025,
            tournament_size: None,
            episodes: 10,
            generations: 50,
            elitism: 1,
            world: WorldConfig::default(),
            controller: ControllerKind::AntBasis,
            seed: 0,
            boundary_mix: 0.0,
            seed_params: SeedParams::default(),
            checkpoint_interval: 0,
        }
    }
}

impl EvolutionConfig {
    pub fn effective_tournament_size(&self) -> usize {
        self.tournament_size
            .unwrap_or_else(|| ((0.06 * self.population as f64).round() as usize).max(2))
    }

    /// Number of evaluation episodes run with one robot.
    pub fn single_robot_episodes(&self) -> u32 {
        (self.boundary_mix * f64::from(self.episodes)).round() as u32
    }

    pub fn validate(&self) -> Result<(), EvolveError> {
        let bad = |msg: String| Err(EvolveError::ConfigInvalid(msg));
        let k = self.effective_tournament_size();
        if self.population < 2 {
            return bad(format!("population: {} is below 2", self.population));
        }
        if !(2..=self.population).contains(&k) {
            return bad(format!("tournament_size: {k} outside 2..={}", self.population));
        }
        for (key, p) in [
            ("crossover_prob", self.crossover_prob),
            ("mutation_prob", self.mutation_prob),
            ("boundary_mix", self.boundary_mix),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{key}: {p} outside [0, 1]"));
            }
        }
        if self.episodes == 0 {
            return bad("episodes: must be at least 1".into());
        }
        if self.elitism >= self.population {
            return bad(format!("elitism: {} must be below the population", self.elitism));
        }
        let sp = &self.seed_params;
        if sp.min_neurons > sp.max_neurons || !(0.0..=1.0).contains(&sp.decision_fraction) {
            return bad("seed_params: inconsistent neuron range or decision fraction".into());
        }
        self.world.validate()?;
        if self.single_robot_episodes() > 0 {
            WorldConfig { robot_count: 1, ..self.world.clone() }.validate()?;
        }
        Ok(())
    }
}

/// Seed for evaluating individual `index` of generation `generation`.
pub fn eval_seed(master: u64, generation: u32, index: usize) -> u64 {
    derive_seed(master, &[label::EVALUATION, u64::from(generation), index as u64])
}

/// World config of evaluation episode `episode`.
pub fn episode_world(config: &EvolutionConfig, eval_seed: u64, episode: u32) -> WorldConfig {
    let robot_count = if episode < config.single_robot_episodes() { 1 } else { config.world.robot_count };
    WorldConfig { robot_count, rng_seed: derive_seed(eval_seed, &[u64::from(episode)]), ..config.world.clone() }
}

/// Fitness of one homogeneous-team episode.
pub fn run_single_episode(controller: &Controller, world: &WorldConfig) -> Result<f64, WorldError> {
    let mut w = World::new(world)?;
    let team = vec![controller; world.robot_count as usize];
    w.run_episode(&team)?;
    w.fitness()
}

/// Mean fitness over the configured number of episodes.
pub fn evaluate_fitness(genome: &ControllerGenome, config: &EvolutionConfig, eval_seed: u64) -> Result<f64, EvolveError> {
    let controller = genome.develop()?;
    evaluate_controller(&controller, config, eval_seed)
}

pub fn evaluate_controller(controller: &Controller, config: &EvolutionConfig, eval_seed: u64) -> Result<f64, EvolveError> {
    let mut total = 0.0;
    for e in 0..config.episodes {
        total += run_single_episode(controller, &episode_world(config, eval_seed, e))?;
    }
    Ok(total / f64::from(config.episodes))
}

/// Returns the index of the fittest of `size` distinct uniformly drawn
/// individuals; ties go to the lower index.
pub fn tournament_select<R: Rng + ?Sized>(fitnesses: &[f64], size: usize, rng: &mut R) -> usize {
    let size = size.clamp(1, fitnesses.len());
    index::sample(rng, fitnesses.len(), size)
        .into_iter()
        .reduce(|best, i| {
            if fitnesses[i] > fitnesses[best] || (fitnesses[i] == fitnesses[best] && i < best) {
                i
            } else {
                best
            }
        })
        .expect("population is non-empty")
}

/// Indices of the `n` fittest individuals, best first, ties by lower index.
pub fn elite_indices(fitnesses: &[f64], n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fitnesses.len()).collect();
    order.sort_by(|&a, &b| fitnesses[b].total_cmp(&fitnesses[a]).then(a.cmp(&b)));
    order.truncate(n);
    order
}

fn vary<R: Rng + ?Sized>(
    a: &ControllerGenome,
    b: &ControllerGenome,
    config: &EvolutionConfig,
    rng: &mut R,
) -> Result<(ControllerGenome, ControllerGenome), EvolveError> {
    let cross = rng.random_bool(config.crossover_prob);
    let p_m = config.mutation_prob;
    Ok(match (a, b) {
        (ControllerGenome::Ant(x), ControllerGenome::Ant(y)) => {
            let (c1, c2) = if cross {
                ant::crossover(x, y, rng).map_err(GenomeError::from)?
            } else {
                (x.clone(), y.clone())
            };
            (ControllerGenome::Ant(ant::mutate(&c1, rng, p_m)), ControllerGenome::Ant(ant::mutate(&c2, rng, p_m)))
        }
        (ControllerGenome::Fixed(x), ControllerGenome::Fixed(y)) => {
            let (c1, c2) = if cross {
                baselines::crossover_fixed(x, y, rng).map_err(GenomeError::from)?
            } else {
                (x.clone(), y.clone())
            };
            (
                ControllerGenome::Fixed(baselines::mutate_fixed(&c1, rng, p_m)),
                ControllerGenome::Fixed(baselines::mutate_fixed(&c2, rng, p_m)),
            )
        }
        _ => return Err(GenomeError::KindMismatch(a.kind_name(), b.kind_name()).into()),
    })
}

/// Builds the next population: the elites first (best first), then
/// tournament-selected, crossed and mutated offspring.
pub fn next_generation<R: Rng + ?Sized>(
    population: &[ControllerGenome],
    fitnesses: &[f64],
    config: &EvolutionConfig,
    rng: &mut R,
) -> Result<Vec<ControllerGenome>, EvolveError> {
    let p = population.len();
    let k = config.effective_tournament_size();
    let mut next: Vec<ControllerGenome> =
        elite_indices(fitnesses, config.elitism.min(p)).into_iter().map(|i| population[i].clone()).collect();
    while next.len() < p {
        let a = tournament_select(fitnesses, k, rng);
        let b = tournament_select(fitnesses, k, rng);
        let (c1, c2) = vary(&population[a], &population[b], config, rng)?;
        next.push(c1);
        if next.len() < p {
            next.push(c2);
        }
    }
    Ok(next)
}

/// Random initial population for the configured controller kind.
pub fn initial_population(config: &EvolutionConfig) -> Vec<ControllerGenome> {
    let master = config.seed;
    let topology = match config.controller {
        ControllerKind::Fc | ControllerKind::Pc => {
            let variant = if config.controller == ControllerKind::Fc { NetVariant::Fc } else { NetVariant::Pc };
            Some(baselines::random_fixed_net(&mut derive_rng(master, &[label::TOPOLOGY]), variant, Repertoire::Basis))
        }
        _ => None,
    };
    (0..config.population)
        .map(|i| {
            let mut rng = derive_rng(master, &[label::INIT_POPULATION, i as u64]);
            match &topology {
                Some(net) => ControllerGenome::Fixed(net.randomize_weights(&mut rng)),
                None => ControllerGenome::Ant(ant::seed_genome(&mut rng, config.controller.mode(), &config.seed_params)),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: u32,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    /// `generation · population + index` of the individual's creation.
    pub best_genome_id: u64,
    pub wall_time_ms: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionLog {
    pub stats: Vec<GenerationStats>,
    pub champion: ControllerGenome,
    pub champion_fitness: f64,
    /// `(generation, champion)` at every checkpoint.
    pub checkpoints: Vec<(u32, ControllerGenome)>,
}

impl EvolutionLog {
    pub fn best_fitness(&self) -> f64 {
        self.champion_fitness
    }
}

/// Scores a population of generation `generation` using up to `workers`
/// threads; individuals with a cached score are not re-evaluated.
pub fn evaluate_population(
    population: &[ControllerGenome],
    cached: &[Option<f64>],
    config: &EvolutionConfig,
    generation: u32,
    pool: &rayon::ThreadPool,
) -> Result<Vec<f64>, EvolveError> {
    pool.install(|| {
        population
            .par_iter()
            .zip(cached)
            .enumerate()
            .map(|(i, (g, cache))| match cache {
                Some(f) => Ok(*f),
                None => evaluate_fitness(g, config, eval_seed(config.seed, generation, i)),
            })
            .collect()
    })
}

pub fn build_pool(workers: usize) -> Result<rayon::ThreadPool, EvolveError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| EvolveError::ConfigInvalid(format!("workers: {e}")))
}

/// Runs a full evolution with `workers` evaluation threads.
pub fn run_evolution(config: &EvolutionConfig, workers: usize) -> Result<EvolutionLog, EvolveError> {
    let pool = build_pool(workers)?;
    run_evolution_in(config, &pool)
}

/// Runs a full evolution on an existing thread pool.
pub fn run_evolution_in(config: &EvolutionConfig, pool: &rayon::ThreadPool) -> Result<EvolutionLog, EvolveError> {
    config.validate()?;
    let p = config.population;
    let mut population = initial_population(config);
    let mut ids: Vec<u64> = (0..p as u64).collect();
    let mut cached = vec![None; p];
    let mut stats = Vec::with_capacity(config.generations as usize + 1);
    let mut checkpoints = Vec::new();
    let mut generation = 0u32;
    loop {
        let started = Instant::now();
        let fitnesses = evaluate_population(&population, &cached, config, generation, pool)?;
        let best = elite_indices(&fitnesses, 1)[0];
        stats.push(GenerationStats {
            generation,
            best_fitness: fitnesses[best],
            mean_fitness: fitnesses.iter().sum::<f64>() / p as f64,
            best_genome_id: ids[best],
            wall_time_ms: started.elapsed().as_millis() as u64,
        });
        let interval = config.checkpoint_interval;
        if interval > 0 && generation % interval == 0 {
            checkpoints.push((generation, population[best].clone()));
        }
        if generation == config.generations {
            let champion = population[best].clone();
            if checkpoints.last().map(|(g, _)| *g) != Some(generation) {
                checkpoints.push((generation, champion.clone()));
            }
            return Ok(EvolutionLog { stats, champion, champion_fitness: fitnesses[best], checkpoints });
        }

        let mut rng = derive_rng(config.seed, &[label::VARIATION, u64::from(generation)]);
        let elites = elite_indices(&fitnesses, config.elitism);
        let next = next_generation(&population, &fitnesses, config, &mut rng)?;
        generation += 1;
        let base = u64::from(generation) * p as u64;
        cached = (0..p).map(|i| elites.get(i).map(|&e| fitnesses[e])).collect();
        ids = (0..p).map(|i| elites.get(i).map_or(base + i as u64, |&e| ids[e])).collect();
        population = next;
    }
}
