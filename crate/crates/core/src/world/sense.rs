use super::{FloorColor, World, WorldError};
use serde::{Deserialize, Serialize};

/// Bearing of the light beacon relative to the robot's heading.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LightPosition {
    Left,
    Center,
    Right,
    NotVisible,
}

/// Half-width of the `Center` bearing cone, degrees.
const CENTER_CONE_DEG: f64 = 22.5;
/// Field of view half-angle of the light sensor, degrees.
const FIELD_OF_VIEW_DEG: f64 = 90.0;
/// Obstacle sonar range in cells ahead of the front edge.
const SONAR_RANGE: i32 = 3;

/// One robot's discretized sensor readout.
///
/// Resource and color cells are indexed near-left, near-right, far-left,
/// far-right over the 2×2 block directly ahead of the robot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SensorFrame {
    pub resources: [bool; 4],
    pub colors: [FloorColor; 4],
    /// Front-left and front-right obstacle sonars.
    pub obstacles: [bool; 2],
    pub light_position: LightPosition,
    /// 0 at the beacon, 10 at a full grid diagonal.
    pub light_distance: u8,
    pub memory: [bool; 4],
}

/// Local `(ahead, right)` offsets of the four sensed cells.
pub(crate) const SENSED_CELLS: [(i32, i32); 4] = [(2, 0), (2, 1), (3, 0), (3, 1)];

impl World {
    /// Reads robot `id`'s sensors. Never mutates the world.
    pub fn sense(&self, id: u32) -> Result<SensorFrame, WorldError> {
        let robot = *self.robot(id)?;
        let mut resources = [false; 4];
        let mut colors = [FloorColor::Orange; 4];
        for (k, &(ahead, right)) in SENSED_CELLS.iter().enumerate() {
            let cell = robot.local_cell(ahead, right);
            resources[k] = !self.units_at(cell).is_empty();
            colors[k] = self.color(cell).unwrap_or(FloorColor::Orange);
        }
        let mut obstacles = [false; 2];
        for (side, hit) in obstacles.iter_mut().enumerate() {
            *hit = (2..2 + SONAR_RANGE).any(|ahead| {
                let cell = robot.local_cell(ahead, side as i32);
                !self.is_walkable(cell) || self.robot_at(cell).is_some_and(|r| r != id)
            });
        }
        let (light_position, light_distance) = self.light_reading(&robot);
        Ok(SensorFrame {
            resources,
            colors,
            obstacles,
            light_position,
            light_distance,
            memory: robot.memory,
        })
    }

    fn light_reading(&self, robot: &super::RobotState) -> (LightPosition, u8) {
        if !self.config.beacon_enabled {
            return (LightPosition::NotVisible, 10);
        }
        let [cx, cy] = robot.center();
        let [bx, by] = self.config.beacon_position;
        let (dx, dy) = (bx - cx, by - cy);
        let dist = dx.hypot(dy);
        let diag = f64::from(self.config.grid_width).hypot(f64::from(self.config.grid_height));
        let level = (10.0 * dist / diag).floor().clamp(0.0, 10.0) as u8;

        let f = robot.heading.forward();
        let r = robot.heading.right();
        let along = dx * f64::from(f.x) + dy * f64::from(f.y);
        let lateral = dx * f64::from(r.x) + dy * f64::from(r.y);
        let position = if dist == 0.0 {
            LightPosition::Center
        } else {
            let bearing = lateral.atan2(along).to_degrees();
            if bearing.abs() <= CENTER_CONE_DEG {
                LightPosition::Center
            } else if bearing.abs() > FIELD_OF_VIEW_DEG {
                LightPosition::NotVisible
            } else if bearing > 0.0 {
                LightPosition::Right
            } else {
                LightPosition::Left
            }
        };
        (position, level)
    }
}
