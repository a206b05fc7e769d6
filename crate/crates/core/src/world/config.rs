use super::WorldError;
use serde::{Deserialize, Serialize};

/// Axis-aligned cell rectangle: cells `x..x+width` × `y..y+height`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x: i32,
    pub y: i32,
    pub width: i32,
    pub height: i32,
}

impl Rect {
    #[inline]
    pub fn contains(&self, x: i32, y: i32) -> bool {
        x >= self.x && x < self.x + self.width && y >= self.y && y < self.y + self.height
    }

    /// The rectangle shrunk by one cell on every side.
    pub fn inner(&self) -> Rect {
        Rect {
            x: self.x + 1,
            y: self.y + 1,
            width: (self.width - 2).max(0),
            height: (self.height - 2).max(0),
        }
    }

    pub fn center(&self) -> [f64; 2] {
        [
            f64::from(self.x) + f64::from(self.width) / 2.0,
            f64::from(self.y) + f64::from(self.height) / 2.0,
        ]
    }

    pub fn area(&self) -> i32 {
        self.width * self.height
    }
}

/// Everything needed to build one episode's world.
///
/// Coordinates: `x` grows east, `y` grows north; cell `(x, y)` spans the
/// continuous square `[x, x+1) × [y, y+1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldConfig {
    pub grid_width: i32,
    pub grid_height: i32,
    pub robot_count: u32,
    pub resource_count: u32,
    pub dump_rect: Rect,
    pub beacon_position: [f64; 2],
    pub beacon_enabled: bool,
    pub partition_count: u32,
    pub max_timesteps: u32,
    pub rng_seed: u64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        let dump_rect = Rect { x: 6, y: 11, width: 4, height: 4 };
        WorldConfig {
            grid_width: 16,
            grid_height: 16,
            robot_count: 4,
            resource_count: 30,
            dump_rect,
            beacon_position: dump_rect.center(),
            beacon_enabled: true,
            partition_count: 1,
            max_timesteps: 300,
            rng_seed: 0,
        }
    }
}

impl WorldConfig {
    /// A square `size`×`size` world with a 4×4 dump against the middle of
    /// the north wall and the beacon at the dump center.
    pub fn square(size: i32) -> WorldConfig {
        let dump_rect = Rect { x: size / 2 - 2, y: size - 5, width: 4, height: 4 };
        WorldConfig {
            grid_width: size,
            grid_height: size,
            dump_rect,
            beacon_position: dump_rect.center(),
            ..WorldConfig::default()
        }
    }

    /// Cells per axis of each partition tile.
    pub fn partitions_per_axis(&self) -> Option<i32> {
        match self.partition_count {
            1 => Some(1),
            4 => Some(2),
            16 => Some(4),
            _ => None,
        }
    }

    /// Cells a robot or resource may initially occupy: not on the
    /// perimeter ring and not inside the dump rectangle.
    pub fn free_cell_count(&self) -> i64 {
        let interior = i64::from(self.grid_width - 2) * i64::from(self.grid_height - 2);
        interior - i64::from(self.dump_rect.area())
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        let invalid = |msg: String| Err(WorldError::ConfigInvalid(msg));
        if self.grid_width < 5 || self.grid_height < 5 {
            return invalid(format!(
                "grid_width/grid_height must be at least 5 (got {}x{})",
                self.grid_width, self.grid_height
            ));
        }
        if self.robot_count < 1 {
            return invalid("robot_count must be at least 1".into());
        }
        if self.max_timesteps < 1 {
            return invalid("max_timesteps must be at least 1".into());
        }
        let Some(per_axis) = self.partitions_per_axis() else {
            return invalid(format!(
                "partition_count must be one of 1, 4, 16 (got {})",
                self.partition_count
            ));
        };
        if self.grid_width % per_axis != 0 || self.grid_height % per_axis != 0 {
            return invalid(format!(
                "partition_count {} does not divide a {}x{} grid into equal rectangles",
                self.partition_count, self.grid_width, self.grid_height
            ));
        }
        let d = self.dump_rect;
        if d.width < 3 || d.height < 3 {
            return invalid("dump_rect must be at least 3x3 to have an interior".into());
        }
        if d.x < 1 || d.y < 1 || d.x + d.width > self.grid_width - 1 || d.y + d.height > self.grid_height - 1 {
            return invalid(format!(
                "dump_rect {:?} must lie inside the grid, clear of the perimeter ring",
                d
            ));
        }
        if !self.beacon_position.iter().all(|v| v.is_finite()) {
            return invalid("beacon_position must be finite".into());
        }
        let needed = i64::from(self.robot_count) * 4 + i64::from(self.resource_count);
        if needed > self.free_cell_count() {
            return invalid(format!(
                "robot_count x 4 + resource_count = {needed} exceeds {} free cells",
                self.free_cell_count()
            ));
        }
        Ok(())
    }
}
