//! Replay traces: one JSON object per timestep, one line per object.
//!
//! Record `t` holds every robot's pose and memory at the start of step `t`,
//! the sensor frame it read, and the events emitted during the step.

use crate::controller::DecisionSource;
use crate::world::{Event, Heading, SensorFrame, World, WorldError};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    World(#[from] WorldError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceRobot {
    pub id: u32,
    pub x: i32,
    pub y: i32,
    pub h: Heading,
    /// Memory bits M1..M4 as a string of `0`/`1`.
    pub mem: String,
    pub frame: SensorFrame,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceRecord {
    pub t: u32,
    pub robots: Vec<TraceRobot>,
    pub events: Vec<Event>,
}

/// Runs a full episode and records it.
pub fn record_episode<D: DecisionSource + ?Sized>(
    world: &mut World,
    controllers: &[&D],
) -> Result<Vec<TraceRecord>, WorldError> {
    let steps = world.config().max_timesteps;
    let mut records = Vec::with_capacity(steps as usize);
    let mut frames = Vec::with_capacity(controllers.len());
    for _ in 0..steps {
        let t = world.timestep();
        let poses = world.robots().to_vec();
        let mut events = Vec::new();
        frames.clear();
        world.step_all(controllers, &mut events, Some(&mut frames))?;
        let robots = poses
            .iter()
            .zip(&frames)
            .map(|(r, frame)| TraceRobot {
                id: r.id,
                x: r.anchor.x,
                y: r.anchor.y,
                h: r.heading,
                mem: r.memory.iter().map(|&b| if b { '1' } else { '0' }).collect(),
                frame: *frame,
            })
            .collect();
        records.push(TraceRecord { t, robots, events });
    }
    Ok(records)
}

pub fn write_trace<W: Write>(mut out: W, records: &[TraceRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trace<R: BufRead>(input: R) -> Result<Vec<TraceRecord>, TraceError> {
    let mut records = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line)
            .map_err(|e| TraceError::Malformed { line: i + 1, message: e.to_string() })?;
        records.push(record);
    }
    Ok(records)
}
