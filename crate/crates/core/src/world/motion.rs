use super::{Event, EventKind, Pos, RobotState, SensorFrame, World, WorldError, NO_ROBOT};
use crate::controller::{encode_inputs, Behavior, DecisionSource};

/// Footprint displacement of a movement behavior, in the robot's local
/// frame (`ahead`, `right`) relative to its rear-left cell.
struct Displacement {
    ahead: [i32; 2],
    right: [i32; 2],
    /// Resulting heading, relative to the current one.
    turn: Turn,
    /// Push direction in local `(ahead, right)` units; `None` means the
    /// move refuses to enter cells holding resources.
    push: Option<(i32, i32)>,
}

#[derive(Clone, Copy)]
enum Turn {
    None,
    Left,
    Right,
}

fn displacement(behavior: Behavior) -> Option<Displacement> {
    use Behavior::*;
    let d = |ahead, right, turn, push| Some(Displacement { ahead, right, turn, push });
    match behavior {
        MoveForward => d([1, 2], [0, 1], Turn::None, Some((1, 0))),
        DumpResource => d([-1, 0], [0, 1], Turn::Left, None),
        SlideLeft => d([0, 1], [-1, 0], Turn::None, Some((0, -1))),
        SlideRight => d([0, 1], [1, 2], Turn::None, Some((0, 1))),
        DiagonalLeft => d([1, 2], [-1, 0], Turn::None, Some((1, -1))),
        DiagonalRight => d([1, 2], [1, 2], Turn::None, Some((1, 1))),
        // pivots swing the 2×2 body a quarter turn about a rear corner
        PivotLeftForward => d([0, 1], [-2, -1], Turn::Left, Some((0, -1))),
        PivotLeftBackward => d([-2, -1], [0, 1], Turn::Right, Some((-1, 0))),
        PivotRightForward => d([0, 1], [2, 3], Turn::Right, Some((0, 1))),
        PivotRightBackward => d([-2, -1], [0, 1], Turn::Left, Some((-1, 0))),
        _ => None,
    }
}

impl World {
    /// Executes one behavior for robot `id`, appending the resulting events.
    ///
    /// A move that would leave the work area, overlap another robot, or push
    /// a resource somewhere it cannot go is a no-op reported as `Blocked`.
    pub fn apply_behavior(
        &mut self,
        id: u32,
        behavior: Behavior,
        events: &mut Vec<Event>,
    ) -> Result<(), WorldError> {
        let robot = *self.robot(id)?;
        let t = self.timestep;
        if let Some((bit, value)) = behavior.bit_op() {
            self.robots[id as usize].memory[bit as usize] = value;
            events.push(Event { timestep: t, kind: EventKind::BitOp { robot: id, bit: bit + 1, value } });
            return Ok(());
        }
        let heading = match behavior {
            Behavior::TurnLeft => Some(robot.heading.turned_left()),
            Behavior::TurnRight => Some(robot.heading.turned_right()),
            _ => None,
        };
        if let Some(heading) = heading {
            self.robots[id as usize].heading = heading;
            events.push(Event { timestep: t, kind: EventKind::Move { robot: id, behavior } });
            return Ok(());
        }
        let disp = displacement(behavior).expect("every non-bit, non-turn behavior has a displacement");
        if self.try_displace(&robot, &disp, events) {
            events.push(Event { timestep: t, kind: EventKind::Move { robot: id, behavior } });
        } else {
            events.push(Event { timestep: t, kind: EventKind::Blocked { robot: id, behavior } });
        }
        Ok(())
    }

    fn try_displace(&mut self, robot: &RobotState, disp: &Displacement, events: &mut Vec<Event>) -> bool {
        let old = robot.footprint();
        let mut new = [Pos::new(0, 0); 4];
        let mut k = 0;
        for &a in &disp.ahead {
            for &r in &disp.right {
                new[k] = robot.local_cell(a, r);
                k += 1;
            }
        }
        for &p in &new {
            if !self.is_walkable(p) {
                return false;
            }
            let occ = self.occupancy[self.index(p)];
            if occ != NO_ROBOT && occ != robot.id {
                return false;
            }
        }

        // (entered cell, push target) for every entered cell holding units
        let mut pushes: Vec<(Pos, Pos)> = Vec::new();
        for &p in &new {
            if old.contains(&p) || self.units_at(p).is_empty() {
                continue;
            }
            let Some((da, dr)) = disp.push else {
                return false;
            };
            let step = robot.heading.forward() * da + robot.heading.right() * dr;
            let mut target = p + step;
            while new.contains(&target) {
                target = target + step;
            }
            if !self.is_walkable(target) || self.robot_at(target).is_some() {
                return false;
            }
            pushes.push((p, target));
        }

        let t = self.timestep;
        for (from, to) in pushes {
            let fi = self.index(from);
            let moved = std::mem::take(&mut self.piles[fi]);
            let dumped = self.in_dump(to);
            for &u in &moved {
                let unit = &mut self.units[u as usize];
                unit.position = to;
                unit.last_mover = Some(robot.id);
                if !unit.mover_set.contains(&robot.id) {
                    unit.mover_set.push(robot.id);
                }
                events.push(Event {
                    timestep: t,
                    kind: EventKind::Push { unit: u, from, to, robot: robot.id },
                });
                if dumped {
                    events.push(Event { timestep: t, kind: EventKind::Dump { unit: u, robot: robot.id } });
                }
            }
            let ti = self.index(to);
            self.piles[ti].extend(moved);
        }

        for p in old {
            let i = self.index(p);
            self.occupancy[i] = NO_ROBOT;
        }
        for p in new {
            let i = self.index(p);
            self.occupancy[i] = robot.id;
        }
        let heading = match disp.turn {
            Turn::None => robot.heading,
            Turn::Left => robot.heading.turned_left(),
            Turn::Right => robot.heading.turned_right(),
        };
        let anchor = Pos::new(
            new.iter().map(|p| p.x).min().unwrap_or(0),
            new.iter().map(|p| p.y).min().unwrap_or(0),
        );
        let r = &mut self.robots[robot.id as usize];
        r.anchor = anchor;
        r.heading = heading;
        true
    }

    /// Advances the world one timestep.
    ///
    /// Robots act in ascending id order: each senses, asks its controller
    /// for a triggered set, then runs the triggered behaviors in the
    /// controller's execution order. Sensor frames are appended to `frames`
    /// when given.
    pub fn step_all<D: DecisionSource + ?Sized>(
        &mut self,
        controllers: &[&D],
        events: &mut Vec<Event>,
        mut frames: Option<&mut Vec<SensorFrame>>,
    ) -> Result<(), WorldError> {
        if controllers.len() != self.robots.len() {
            return Err(WorldError::ControllerCount { expected: self.robots.len(), got: controllers.len() });
        }
        for (id, controller) in controllers.iter().enumerate() {
            let id = id as u32;
            let frame = self.sense(id)?;
            if let Some(frames) = frames.as_deref_mut() {
                frames.push(frame);
            }
            let triggered = controller.decide(&encode_inputs(&frame));
            if triggered.is_empty() {
                continue;
            }
            for &behavior in controller.execution_order() {
                if triggered.contains(behavior) {
                    self.apply_behavior(id, behavior, events)?;
                }
            }
        }
        self.timestep += 1;
        Ok(())
    }
}
