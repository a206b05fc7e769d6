//! Browser front end for the simulator.
//!
//! Three operations are exported: step a seeded robot team and read back
//! snapshots for drawing, probe a tissue's activation on a chosen input
//! plane, and sweep a genome across team sizes. Everything crosses the
//! boundary as JSON strings so the page needs no generated bindings beyond
//! the functions themselves.

use antmine::ant::{seed_genome, SeedParams, Tissue};
use antmine::controller::{encode_inputs, InputPlane, Repertoire, INPUT_NODES};
use antmine::evolve::{evaluate_fitness, EvolutionConfig};
use antmine::genome::{Controller, ControllerGenome};
use antmine::rng::rng_from_seed;
use antmine::world::{FloorColor, Pos, World, WorldConfig};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn to_js(e: String) -> JsError {
    JsError::new(&e)
}

fn parse_genome(genome_json: &str) -> Result<ControllerGenome, String> {
    ControllerGenome::from_json(genome_json).map_err(|e| e.to_string())
}

/// A fresh, unevolved basis-mode tissue genome drawn from `seed`.
#[wasm_bindgen(js_name = seedGenome)]
pub fn seed_genome_json(seed: u32) -> String {
    let genome = seed_genome(&mut rng_from_seed(u64::from(seed)), Repertoire::Basis, &SeedParams::default());
    ControllerGenome::Ant(genome).to_json()
}

/// One running episode with a homogeneous team.
#[wasm_bindgen]
pub struct Simulation {
    world: World,
    controller: Controller,
}

impl Simulation {
    pub fn create(genome_json: &str, robots: u32, beacon: bool, seed: u32) -> Result<Simulation, String> {
        let controller = parse_genome(genome_json)?.develop().map_err(|e| e.to_string())?;
        let config = WorldConfig {
            robot_count: robots,
            beacon_enabled: beacon,
            rng_seed: u64::from(seed),
            ..WorldConfig::default()
        };
        let world = World::new(&config).map_err(|e| e.to_string())?;
        Ok(Simulation { world, controller })
    }

    pub fn advance(&mut self, steps: u32) -> Result<(), String> {
        let team = vec![&self.controller; self.world.robots().len()];
        let mut events = Vec::new();
        for _ in 0..steps {
            if self.finished() {
                break;
            }
            self.world.step_all(&team, &mut events, None).map_err(|e| e.to_string())?;
            events.clear();
        }
        Ok(())
    }

    fn finished(&self) -> bool {
        self.world.timestep() >= self.world.config().max_timesteps
    }

    pub fn snapshot_value(&self) -> Value {
        let config = self.world.config();
        let mut colors = Vec::with_capacity((config.grid_width * config.grid_height) as usize);
        for y in 0..config.grid_height {
            for x in 0..config.grid_width {
                colors.push(match self.world.color(Pos::new(x, y)) {
                    Some(FloorColor::Blue) => 1,
                    Some(FloorColor::Red) => 2,
                    Some(FloorColor::Orange) => 3,
                    _ => 0,
                });
            }
        }
        let units: Vec<[i32; 2]> = self.world.units().iter().map(|u| [u.position.x, u.position.y]).collect();
        let robots: Vec<Value> = self
            .world
            .robots()
            .iter()
            .map(|r| json!({ "x": r.anchor.x, "y": r.anchor.y, "h": r.heading.letter().to_string() }))
            .collect();
        let dump = self.world.dump_interior();
        json!({
            "t": self.world.timestep(),
            "max_t": config.max_timesteps,
            "width": config.grid_width,
            "height": config.grid_height,
            "colors": colors,
            "units": units,
            "robots": robots,
            "dump": [dump.x, dump.y, dump.width, dump.height],
            "beacon": config.beacon_enabled.then_some(config.beacon_position),
            "delivered": self.world.delivered_count(),
            "fitness": self.world.fitness().unwrap_or(0.0),
        })
    }

    /// Input plane that robot `id` sees right now.
    pub fn robot_inputs(&self, id: u32) -> Result<Vec<f64>, String> {
        let frame = self.world.sense(id).map_err(|e| e.to_string())?;
        Ok(encode_inputs(&frame).0.to_vec())
    }

    pub fn probe_value(&self, inputs: &[f64]) -> Result<Value, String> {
        match &self.controller {
            Controller::Ant(tissue) => probe(tissue, inputs),
            Controller::Fixed(_) => Err("only tissue controllers can be probed".into()),
        }
    }
}

#[wasm_bindgen]
impl Simulation {
    #[wasm_bindgen(constructor)]
    pub fn new(genome_json: &str, robots: u32, beacon: bool, seed: u32) -> Result<Simulation, JsError> {
        Simulation::create(genome_json, robots, beacon, seed).map_err(to_js)
    }

    /// Advances up to `steps` timesteps, stopping at the episode end.
    pub fn step(&mut self, steps: u32) -> Result<(), JsError> {
        self.advance(steps).map_err(to_js)
    }

    #[wasm_bindgen(getter)]
    pub fn done(&self) -> bool {
        self.finished()
    }

    /// JSON snapshot of the grid, units and robots.
    pub fn snapshot(&self) -> String {
        self.snapshot_value().to_string()
    }

    /// The 16 input values robot `id` currently senses.
    #[wasm_bindgen(js_name = robotInputs)]
    pub fn robot_inputs_js(&self, id: u32) -> Result<Vec<f64>, JsError> {
        self.robot_inputs(id).map_err(to_js)
    }

    /// Tissue activation on a 16-value input plane, as JSON.
    pub fn probe(&self, inputs: &[f64]) -> Result<String, JsError> {
        self.probe_value(inputs).map(|v| v.to_string()).map_err(to_js)
    }
}

fn probe(tissue: &Tissue, inputs: &[f64]) -> Result<Value, String> {
    let plane: [f64; INPUT_NODES] =
        inputs.try_into().map_err(|_| format!("expected {INPUT_NODES} inputs, got {}", inputs.len()))?;
    let act = tissue.activate_detailed(&InputPlane(plane));
    let motors: Vec<Value> = tissue
        .motor_positions()
        .enumerate()
        .map(|(i, p)| {
            json!({
                "layer": p.layer, "row": p.row, "col": p.col,
                "concentration": act.concentration[i],
                "active": act.active[i],
                "output": act.output[i],
            })
        })
        .collect();
    let triggered: Vec<String> = act.triggered.iter().map(|b| format!("{b:?}")).collect();
    Ok(json!({
        "motors": motors,
        "decisions_fired": act.fired.iter().filter(|&&f| f).count(),
        "decisions": act.fired.len(),
        "triggered": triggered,
    }))
}

pub fn sweep_value(genome_json: &str, counts: &[u32], episodes: u32, seed: u32) -> Result<Value, String> {
    let genome = parse_genome(genome_json)?;
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut rows = Vec::with_capacity(sorted.len());
    for n in sorted {
        let mut config = EvolutionConfig { episodes, ..EvolutionConfig::default() };
        config.world.robot_count = n;
        config.validate().map_err(|e| e.to_string())?;
        let fitness = evaluate_fitness(&genome, &config, u64::from(seed)).map_err(|e| e.to_string())?;
        rows.push(json!({ "robots": n, "fitness": fitness }));
    }
    Ok(Value::Array(rows))
}

/// Mean fitness of `genome_json` at each team size, with identical
/// resource layouts across sizes.
#[wasm_bindgen(js_name = teamSweep)]
pub fn team_sweep(genome_json: &str, counts: &[u32], episodes: u32, seed: u32) -> Result<String, JsError> {
    sweep_value(genome_json, counts, episodes, seed).map(|v| v.to_string()).map_err(to_js)
}
