//! Deterministic grid world for the resource-collection task.
//!
//! Robots occupy a 2×2 footprint and move resources by bulldozing them.
//! Cells carry an immutable floor color (template) and a pile of resource
//! units. The world is confined to one episode; there is no global state.

mod config;
mod motion;
mod sense;

pub use config::{Rect, WorldConfig};
pub use sense::{LightPosition, SensorFrame};

use crate::controller::Behavior;
use crate::rng::{rng_from_seed, SimRng};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum WorldError {
    #[error("invalid world config: {0}")]
    ConfigInvalid(String),
    #[error("unknown robot id {0}")]
    UnknownRobot(u32),
    #[error("fitness is undefined for a world with zero resources")]
    ZeroResources,
    #[error("expected one controller per robot ({expected}), got {got}")]
    ControllerCount { expected: usize, got: usize },
}

/// Floor template colors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FloorColor {
    Floor,
    Blue,
    Red,
    Orange,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Heading {
    N,
    E,
    S,
    W,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::N, Heading::E, Heading::S, Heading::W];

    #[inline]
    pub fn forward(self) -> Pos {
        match self {
            Heading::N => Pos::new(0, 1),
            Heading::E => Pos::new(1, 0),
            Heading::S => Pos::new(0, -1),
            Heading::W => Pos::new(-1, 0),
        }
    }

    #[inline]
    pub fn right(self) -> Pos {
        self.turned_right().forward()
    }

    pub fn turned_right(self) -> Heading {
        match self {
            Heading::N => Heading::E,
            Heading::E => Heading::S,
            Heading::S => Heading::W,
            Heading::W => Heading::N,
        }
    }

    pub fn turned_left(self) -> Heading {
        match self {
            Heading::N => Heading::W,
            Heading::W => Heading::S,
            Heading::S => Heading::E,
            Heading::E => Heading::N,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Heading::N => 'N',
            Heading::E => 'E',
            Heading::S => 'S',
            Heading::W => 'W',
        }
    }
}

/// Integer cell coordinate (also used for cell offsets).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pos {
    pub x: i32,
    pub y: i32,
}

impl Pos {
    #[inline]
    pub const fn new(x: i32, y: i32) -> Pos {
        Pos { x, y }
    }
}

impl std::ops::Add for Pos {
    type Output = Pos;
    #[inline]
    fn add(self, o: Pos) -> Pos {
        Pos::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Mul<i32> for Pos {
    type Output = Pos;
    #[inline]
    fn mul(self, k: i32) -> Pos {
        Pos::new(self.x * k, self.y * k)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceUnit {
    pub id: u32,
    pub position: Pos,
    pub last_mover: Option<u32>,
    /// Every robot that has ever pushed this unit, in first-push order.
    pub mover_set: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobotState {
    pub id: u32,
    /// Minimum-x, minimum-y corner of the 2×2 footprint.
    pub anchor: Pos,
    pub heading: Heading,
    pub memory: [bool; 4],
}

impl RobotState {
    pub fn footprint(&self) -> [Pos; 4] {
        let a = self.anchor;
        [a, Pos::new(a.x + 1, a.y), Pos::new(a.x, a.y + 1), Pos::new(a.x + 1, a.y + 1)]
    }

    /// The rear-left footprint cell, origin of the robot's local frame.
    #[inline]
    pub(crate) fn rear_left(&self) -> Pos {
        let f = self.heading.forward();
        let r = self.heading.right();
        Pos::new(
            self.anchor.x + (1 - f.x - r.x) / 2,
            self.anchor.y + (1 - f.y - r.y) / 2,
        )
    }

    /// Global cell at local offset `(ahead, right)` from the rear-left cell.
    #[inline]
    pub fn local_cell(&self, ahead: i32, right: i32) -> Pos {
        self.rear_left() + self.heading.forward() * ahead + self.heading.right() * right
    }

    pub fn memory_bits(&self) -> u8 {
        self.memory
            .iter()
            .enumerate()
            .fold(0u8, |acc, (i, &b)| acc | (u8::from(b) << i))
    }

    /// Continuous center of the footprint.
    pub fn center(&self) -> [f64; 2] {
        [f64::from(self.anchor.x) + 1.0, f64::from(self.anchor.y) + 1.0]
    }
}

/// One thing that happened during a timestep.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub timestep: u32,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    Push { unit: u32, from: Pos, to: Pos, robot: u32 },
    Dump { unit: u32, robot: u32 },
    Blocked { robot: u32, behavior: Behavior },
    Move { robot: u32, behavior: Behavior },
    BitOp { robot: u32, bit: u8, value: bool },
}

const NO_ROBOT: u32 = u32::MAX;

/// The complete state of one episode.
#[derive(Clone, Debug)]
pub struct World {
    config: WorldConfig,
    colors: Vec<FloorColor>,
    piles: Vec<Vec<u32>>,
    occupancy: Vec<u32>,
    units: Vec<ResourceUnit>,
    robots: Vec<RobotState>,
    dump_interior: Rect,
    timestep: u32,
}

impl World {
    /// Builds a world from `config`, placing robots and resources with the
    /// config's seed.
    pub fn new(config: &WorldConfig) -> Result<World, WorldError> {
        config.validate()?;
        let (w, h) = (config.grid_width, config.grid_height);
        let n = (w * h) as usize;
        let mut world = World {
            config: config.clone(),
            colors: vec![FloorColor::Floor; n],
            piles: vec![Vec::new(); n],
            occupancy: vec![NO_ROBOT; n],
            units: Vec::with_capacity(config.resource_count as usize),
            robots: Vec::with_capacity(config.robot_count as usize),
            dump_interior: config.dump_rect.inner(),
            timestep: 0,
        };
        world.paint_templates();
        let mut rng = rng_from_seed(config.rng_seed);
        world.place_robots(&mut rng)?;
        world.place_resources(&mut rng)?;
        Ok(world)
    }

    /// Builds a world with an explicit layout instead of random placement.
    /// `robot_count` and `resource_count` are taken from the slices.
    pub fn with_layout(
        config: &WorldConfig,
        robots: &[(Pos, Heading)],
        units: &[Pos],
    ) -> Result<World, WorldError> {
        let config = WorldConfig {
            robot_count: robots.len() as u32,
            resource_count: units.len() as u32,
            ..config.clone()
        };
        config.validate()?;
        let n = (config.grid_width * config.grid_height) as usize;
        let mut world = World {
            dump_interior: config.dump_rect.inner(),
            colors: vec![FloorColor::Floor; n],
            piles: vec![Vec::new(); n],
            occupancy: vec![NO_ROBOT; n],
            units: Vec::new(),
            robots: Vec::new(),
            timestep: 0,
            config,
        };
        world.paint_templates();
        for (id, &(anchor, heading)) in robots.iter().enumerate() {
            let robot = RobotState { id: id as u32, anchor, heading, memory: [false; 4] };
            for p in robot.footprint() {
                if !world.is_walkable(p) || world.robot_at(p).is_some() {
                    return Err(WorldError::ConfigInvalid(format!("robot {id} cannot stand at {anchor:?}")));
                }
                let i = world.index(p);
                world.occupancy[i] = id as u32;
            }
            world.robots.push(robot);
        }
        for (id, &position) in units.iter().enumerate() {
            if !world.in_grid(position) || world.robot_at(position).is_some() {
                return Err(WorldError::ConfigInvalid(format!("unit {id} cannot lie at {position:?}")));
            }
            let i = world.index(position);
            world.piles[i].push(id as u32);
            world.units.push(ResourceUnit { id: id as u32, position, last_mover: None, mover_set: Vec::new() });
        }
        Ok(world)
    }

    fn paint_templates(&mut self) {
        let (w, h) = (self.config.grid_width, self.config.grid_height);
        let per_axis = self.config.partitions_per_axis().unwrap_or(1);
        for y in 0..h {
            for x in 0..w {
                let mut color = FloorColor::Floor;
                if x == 0 || y == 0 || x == w - 1 || y == h - 1 {
                    color = FloorColor::Orange;
                } else if per_axis > 1 {
                    let (tile_w, tile_h) = (w / per_axis, h / per_axis);
                    if x % tile_w == 0 || y % tile_h == 0 {
                        color = FloorColor::Blue;
                    }
                }
                let dump = self.config.dump_rect;
                if dump.contains(x, y) {
                    color = if self.dump_interior.contains(x, y) {
                        FloorColor::Red
                    } else {
                        FloorColor::Blue
                    };
                }
                let i = self.index(Pos::new(x, y));
                self.colors[i] = color;
            }
        }
    }

    fn place_robots(&mut self, rng: &mut SimRng) -> Result<(), WorldError> {
        let (w, h) = (self.config.grid_width, self.config.grid_height);
        let dump = self.config.dump_rect;
        for id in 0..self.config.robot_count {
            let mut candidates = Vec::new();
            for y in 1..h - 2 {
                for x in 1..w - 2 {
                    let probe = RobotState {
                        id,
                        anchor: Pos::new(x, y),
                        heading: Heading::N,
                        memory: [false; 4],
                    };
                    let ok = probe
                        .footprint()
                        .iter()
                        .all(|p| !dump.contains(p.x, p.y) && self.robot_at(*p).is_none());
                    if ok {
                        candidates.push(probe.anchor);
                    }
                }
            }
            if candidates.is_empty() {
                return Err(WorldError::ConfigInvalid(format!(
                    "no room to place robot {id} of {}",
                    self.config.robot_count
                )));
            }
            let anchor = candidates[rng.random_range(0..candidates.len())];
            let heading = Heading::ALL[rng.random_range(0..4)];
            let robot = RobotState { id, anchor, heading, memory: [false; 4] };
            for p in robot.footprint() {
                let i = self.index(p);
                self.occupancy[i] = id;
            }
            self.robots.push(robot);
        }
        Ok(())
    }

    fn place_resources(&mut self, rng: &mut SimRng) -> Result<(), WorldError> {
        let (w, h) = (self.config.grid_width, self.config.grid_height);
        let mut candidates = Vec::new();
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                let p = Pos::new(x, y);
                if self.color(p) == Some(FloorColor::Floor)
                    && !self.config.dump_rect.contains(x, y)
                    && self.robot_at(p).is_none()
                {
                    candidates.push(p);
                }
            }
        }
        let r = self.config.resource_count as usize;
        if r > candidates.len() {
            return Err(WorldError::ConfigInvalid(format!(
                "resource_count {r} exceeds the {} plain floor cells available",
                candidates.len()
            )));
        }
        let picks = rand::seq::index::sample(rng, candidates.len(), r);
        for (id, k) in picks.into_iter().enumerate() {
            let position = candidates[k];
            let i = self.index(position);
            self.piles[i].push(id as u32);
            self.units.push(ResourceUnit {
                id: id as u32,
                position,
                last_mover: None,
                mover_set: Vec::new(),
            });
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn index(&self, p: Pos) -> usize {
        (p.y * self.config.grid_width + p.x) as usize
    }

    #[inline]
    pub fn in_grid(&self, p: Pos) -> bool {
        p.x >= 0 && p.y >= 0 && p.x < self.config.grid_width && p.y < self.config.grid_height
    }

    #[inline]
    pub fn is_perimeter(&self, p: Pos) -> bool {
        p.x == 0 || p.y == 0 || p.x == self.config.grid_width - 1 || p.y == self.config.grid_height - 1
    }

    /// In-grid and not on the perimeter ring.
    #[inline]
    pub fn is_walkable(&self, p: Pos) -> bool {
        self.in_grid(p) && !self.is_perimeter(p)
    }

    pub fn color(&self, p: Pos) -> Option<FloorColor> {
        self.in_grid(p).then(|| self.colors[self.index(p)])
    }

    /// Unit ids piled on cell `p` (empty when off-grid).
    pub fn units_at(&self, p: Pos) -> &[u32] {
        if self.in_grid(p) {
            &self.piles[self.index(p)]
        } else {
            &[]
        }
    }

    #[inline]
    pub fn robot_at(&self, p: Pos) -> Option<u32> {
        if !self.in_grid(p) {
            return None;
        }
        let id = self.occupancy[self.index(p)];
        (id != NO_ROBOT).then_some(id)
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn robots(&self) -> &[RobotState] {
        &self.robots
    }

    pub fn robot(&self, id: u32) -> Result<&RobotState, WorldError> {
        self.robots.get(id as usize).ok_or(WorldError::UnknownRobot(id))
    }

    pub fn units(&self) -> &[ResourceUnit] {
        &self.units
    }

    pub fn timestep(&self) -> u32 {
        self.timestep
    }

    pub fn dump_interior(&self) -> Rect {
        self.dump_interior
    }

    pub fn in_dump(&self, p: Pos) -> bool {
        self.dump_interior.contains(p.x, p.y)
    }

    pub fn delivered_count(&self) -> usize {
        self.units.iter().filter(|u| self.in_dump(u.position)).count()
    }

    /// Fraction of resource units lying inside the dump interior.
    pub fn fitness(&self) -> Result<f64, WorldError> {
        if self.units.is_empty() {
            return Err(WorldError::ZeroResources);
        }
        Ok(self.delivered_count() as f64 / self.units.len() as f64)
    }

    /// Runs a full episode: `max_timesteps` steps of `step_all`.
    pub fn run_episode<D: crate::controller::DecisionSource + ?Sized>(
        &mut self,
        controllers: &[&D],
    ) -> Result<(), WorldError> {
        let mut events = Vec::new();
        for _ in 0..self.config.max_timesteps {
            events.clear();
            self.step_all(controllers, &mut events, None)?;
        }
        Ok(())
    }

    /// Checks the structural invariants; returns a description of the first
    /// violation found.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut seen_units = vec![false; self.units.len()];
        for (i, pile) in self.piles.iter().enumerate() {
            for &u in pile {
                let unit = self.units.get(u as usize).ok_or(format!("dangling unit {u}"))?;
                if self.index(unit.position) != i {
                    return Err(format!("unit {u} stored in the wrong cell"));
                }
                if std::mem::replace(&mut seen_units[u as usize], true) {
                    return Err(format!("unit {u} stored twice"));
                }
                if self.occupancy[i] != NO_ROBOT {
                    return Err(format!("unit {u} lies under robot {}", self.occupancy[i]));
                }
            }
        }
        if seen_units.iter().any(|s| !s) {
            return Err("unit missing from every cell".into());
        }
        for unit in &self.units {
            if !self.in_grid(unit.position) {
                return Err(format!("unit {} off-grid", unit.id));
            }
            if let Some(m) = unit.last_mover {
                if !unit.mover_set.contains(&m) {
                    return Err(format!("unit {} last mover not in mover set", unit.id));
                }
            }
        }
        let mut cells = 0;
        for robot in &self.robots {
            for p in robot.footprint() {
                if !self.is_walkable(p) {
                    return Err(format!("robot {} footprint leaves the work area", robot.id));
                }
                if self.occupancy[self.index(p)] != robot.id {
                    return Err(format!("robot {} footprint overlaps or is unindexed", robot.id));
                }
                cells += 1;
            }
        }
        let indexed = self.occupancy.iter().filter(|&&o| o != NO_ROBOT).count();
        if indexed != cells {
            return Err("stale occupancy entries".into());
        }
        Ok(())
    }
}
