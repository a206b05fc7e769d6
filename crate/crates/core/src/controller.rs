//! Behavior repertoires, sensor encoding and the decision contract shared by
//! every controller family.

use crate::world::{FloorColor, LightPosition, SensorFrame};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Which behavior repertoire a controller drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Repertoire {
    /// The 12 pre-ordered macro behaviors.
    Basis,
    /// 12 basis behaviors plus 8 extra movement primitives, executed in an
    /// evolved order.
    Primitive,
}

impl Repertoire {
    pub fn len(self) -> usize {
        match self {
            Repertoire::Basis => 12,
            Repertoire::Primitive => 20,
        }
    }

    pub fn is_empty(self) -> bool {
        false
    }

    /// Behaviors in their default execution order.
    pub fn behaviors(self) -> &'static [Behavior] {
        &Behavior::ALL[..self.len()]
    }

    pub fn contains(self, behavior: Behavior) -> bool {
        (behavior.code() as usize) < self.len()
    }

    /// Looks up a behavior by its index in this repertoire.
    pub fn behavior(self, index: usize) -> Result<Behavior, UnknownBehavior> {
        self.behaviors()
            .get(index)
            .copied()
            .ok_or(UnknownBehavior { mode: self, index })
    }
}

impl fmt::Display for Repertoire {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Repertoire::Basis => f.write_str("basis"),
            Repertoire::Primitive => f.write_str("primitive"),
        }
    }
}

#[derive(Debug, Clone, Copy, Error, PartialEq, Eq)]
#[error("no behavior with index {index} in the {mode} repertoire")]
pub struct UnknownBehavior {
    pub mode: Repertoire,
    pub index: usize,
}

/// An executable robot behavior.
///
/// The discriminant is the behavior's global code: codes 0..12 are the basis
/// set in its fixed execution order, codes 12..20 the extra primitives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Behavior {
    DumpResource = 0,
    MoveForward = 1,
    TurnRight = 2,
    TurnLeft = 3,
    SetBit1 = 4,
    ClearBit1 = 5,
    SetBit2 = 6,
    ClearBit2 = 7,
    SetBit3 = 8,
    ClearBit3 = 9,
    SetBit4 = 10,
    ClearBit4 = 11,
    SlideLeft = 12,
    SlideRight = 13,
    DiagonalLeft = 14,
    DiagonalRight = 15,
    PivotLeftForward = 16,
    PivotLeftBackward = 17,
    PivotRightForward = 18,
    PivotRightBackward = 19,
}

impl Behavior {
    pub const ALL: [Behavior; 20] = [
        Behavior::DumpResource,
        Behavior::MoveForward,
        Behavior::TurnRight,
        Behavior::TurnLeft,
        Behavior::SetBit1,
        Behavior::ClearBit1,
        Behavior::SetBit2,
        Behavior::ClearBit2,
        Behavior::SetBit3,
        Behavior::ClearBit3,
        Behavior::SetBit4,
        Behavior::ClearBit4,
        Behavior::SlideLeft,
        Behavior::SlideRight,
        Behavior::DiagonalLeft,
        Behavior::DiagonalRight,
        Behavior::PivotLeftForward,
        Behavior::PivotLeftBackward,
        Behavior::PivotRightForward,
        Behavior::PivotRightBackward,
    ];

    #[inline]
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Behavior> {
        Behavior::ALL.get(code as usize).copied()
    }

    /// `Some((bit, value))` for the memory bit operations; bits are 0-based.
    pub fn bit_op(self) -> Option<(u8, bool)> {
        let code = self.code();
        if (4..12).contains(&code) {
            let k = code - 4;
            Some((k / 2, k % 2 == 0))
        } else {
            None
        }
    }
}

/// A set of behaviors, stored as a bitmask over behavior codes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct BehaviorSet(u32);

impl BehaviorSet {
    pub const EMPTY: BehaviorSet = BehaviorSet(0);

    #[inline]
    pub fn insert(&mut self, behavior: Behavior) {
        self.0 |= 1 << behavior.code();
    }

    #[inline]
    pub fn contains(self, behavior: Behavior) -> bool {
        self.0 & (1 << behavior.code()) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn iter(self) -> impl Iterator<Item = Behavior> {
        Behavior::ALL.into_iter().filter(move |b| self.contains(*b))
    }

    pub fn is_subset_of(self, repertoire: Repertoire) -> bool {
        self.0 >> repertoire.len() == 0
    }
}

impl FromIterator<Behavior> for BehaviorSet {
    fn from_iter<I: IntoIterator<Item = Behavior>>(iter: I) -> Self {
        let mut set = BehaviorSet::EMPTY;
        for b in iter {
            set.insert(b);
        }
        set
    }
}

pub const INPUT_NODES: usize = 16;
/// Side of the square input plane.
pub const INPUT_SIDE: i32 = 4;

/// The 16-node numeric view of a sensor frame, laid out row-major on a 4×4
/// plane: V1-V4, C1-C4, S1, S2, LP1, LD1, M1-M4.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InputPlane(pub [f64; INPUT_NODES]);

impl InputPlane {
    /// Node value at plane coordinate `(row, col)`, or `None` off the plane.
    #[inline]
    pub fn at(&self, row: i32, col: i32) -> Option<f64> {
        if (0..INPUT_SIDE).contains(&row) && (0..INPUT_SIDE).contains(&col) {
            Some(self.0[(row * INPUT_SIDE + col) as usize])
        } else {
            None
        }
    }
}

fn color_level(color: FloorColor) -> f64 {
    match color {
        FloorColor::Floor => 0.0,
        FloorColor::Blue => 1.0 / 3.0,
        FloorColor::Red => 2.0 / 3.0,
        FloorColor::Orange => 1.0,
    }
}

fn bearing_level(lp: LightPosition) -> f64 {
    match lp {
        LightPosition::NotVisible => 0.0,
        LightPosition::Left => 1.0 / 3.0,
        LightPosition::Center => 2.0 / 3.0,
        LightPosition::Right => 1.0,
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Encodes a discrete sensor frame into the input plane.
pub fn encode_inputs(frame: &SensorFrame) -> InputPlane {
    let mut v = [0.0; INPUT_NODES];
    for i in 0..4 {
        v[i] = flag(frame.resources[i]);
        v[4 + i] = color_level(frame.colors[i]);
        v[12 + i] = flag(frame.memory[i]);
    }
    v[8] = flag(frame.obstacles[0]);
    v[9] = flag(frame.obstacles[1]);
    v[10] = bearing_level(frame.light_position);
    v[11] = f64::from(frame.light_distance) / 10.0;
    InputPlane(v)
}

/// Number of distinct discrete sensor frames when the light bearing sensor
/// has `bearing_states` states.
pub fn sensor_space_size(bearing_states: u64) -> u64 {
    let resources = 2u64.pow(4);
    let colors = 4u64.pow(4);
    let obstacles = 2u64.pow(2);
    let distance = 11;
    let memory = 2u64.pow(4);
    resources * colors * obstacles * bearing_states * distance * memory
}

/// Anything that can drive a robot: maps an input plane to a set of
/// behaviors to trigger this timestep.
pub trait DecisionSource {
    fn repertoire(&self) -> Repertoire;

    fn decide(&self, input: &InputPlane) -> BehaviorSet;

    /// Order in which triggered behaviors execute; always a permutation of
    /// the repertoire.
    fn execution_order(&self) -> &[Behavior] {
        self.repertoire().behaviors()
    }
}

/// A controller that never triggers anything.
#[derive(Clone, Copy, Debug)]
pub struct Idle(pub Repertoire);

impl DecisionSource for Idle {
    fn repertoire(&self) -> Repertoire {
        self.0
    }

    fn decide(&self, _input: &InputPlane) -> BehaviorSet {
        BehaviorSet::EMPTY
    }
}

/// A controller that triggers the same set on every input.
#[derive(Clone, Debug)]
pub struct Constant {
    pub repertoire: Repertoire,
    pub triggered: BehaviorSet,
}

impl DecisionSource for Constant {
    fn repertoire(&self) -> Repertoire {
        self.repertoire
    }

    fn decide(&self, _input: &InputPlane) -> BehaviorSet {
        self.triggered
    }
}

/// True if `order` is a permutation of the repertoire's behaviors.
pub fn is_permutation_of(order: &[Behavior], repertoire: Repertoire) -> bool {
    if order.len() != repertoire.len() {
        return false;
    }
    let mut seen = 0u32;
    for b in order {
        if !repertoire.contains(*b) {
            return false;
        }
        seen |= 1 << b.code();
    }
    seen.count_ones() as usize == repertoire.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::SensorFrame;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn random_frame(rng: &mut impl Rng) -> SensorFrame {
        let color = |rng: &mut dyn rand::RngCore| match rng.random_range(0..4) {
            0 => FloorColor::Floor,
            1 => FloorColor::Blue,
            2 => FloorColor::Red,
            _ => FloorColor::Orange,
        };
        let lp = match rng.random_range(0..4) {
            0 => LightPosition::Left,
            1 => LightPosition::Center,
            2 => LightPosition::Right,
            _ => LightPosition::NotVisible,
        };
        SensorFrame {
            resources: [rng.random(), rng.random(), rng.random(), rng.random()],
            colors: [color(rng), color(rng), color(rng), color(rng)],
            obstacles: [rng.random(), rng.random()],
            light_position: lp,
            light_distance: rng.random_range(0..=10),
            memory: [rng.random(), rng.random(), rng.random(), rng.random()],
        }
    }

    #[test]
    fn basis_order_follows_the_behavior_table() {
        let basis = Repertoire::Basis.behaviors();
        assert_eq!(basis.len(), 12);
        assert_eq!(basis[0], Behavior::DumpResource);
        assert_eq!(basis[1], Behavior::MoveForward);
        assert_eq!(basis[2], Behavior::TurnRight);
        assert_eq!(basis[3], Behavior::TurnLeft);
        // orders 5,7,9,11 set bits 1-4; orders 6,8,10,12 clear them
        for i in 0..4u8 {
            assert_eq!(basis[4 + 2 * i as usize].bit_op(), Some((i, true)));
            assert_eq!(basis[5 + 2 * i as usize].bit_op(), Some((i, false)));
        }
    }

    #[test]
    fn primitive_repertoire_has_twenty_behaviors() {
        let prim = Repertoire::Primitive.behaviors();
        assert_eq!(prim.len(), 20);
        let moves = prim.iter().filter(|b| b.bit_op().is_none()).count();
        let bits = prim.iter().filter(|b| b.bit_op().is_some()).count();
        assert_eq!((moves, bits), (12, 8));
        assert!(is_permutation_of(prim, Repertoire::Primitive));
        assert!(matches!(
            Repertoire::Basis.behavior(12),
            Err(UnknownBehavior { index: 12, .. })
        ));
    }

    #[test]
    fn all_zero_frame_encodes_to_zero_plane() {
        let frame = SensorFrame {
            resources: [false; 4],
            colors: [FloorColor::Floor; 4],
            obstacles: [false; 2],
            light_position: LightPosition::NotVisible,
            light_distance: 0,
            memory: [false; 4],
        };
        assert_eq!(encode_inputs(&frame).0, [0.0; 16]);
    }

    #[test]
    fn encoding_is_injective_on_random_frames() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut seen: HashMap<[u64; 16], SensorFrame> = HashMap::new();
        for _ in 0..10_000 {
            let a = random_frame(&mut rng);
            let b = random_frame(&mut rng);
            let (pa, pb) = (encode_inputs(&a), encode_inputs(&b));
            assert_eq!(a == b, pa == pb);
            assert!(pa.0.iter().all(|v| (0.0..=1.0).contains(v)));
            let key = pa.0.map(f64::to_bits);
            if let Some(prev) = seen.insert(key, a) {
                assert_eq!(prev, a);
            }
        }
    }

    #[test]
    fn sensor_space_sizes() {
        assert_eq!(sensor_space_size(3), 8_650_752);
        assert_eq!(sensor_space_size(4), 11_534_336);
    }

    #[test]
    fn behavior_set_subset_check() {
        let set: BehaviorSet = [Behavior::MoveForward, Behavior::SlideLeft].into_iter().collect();
        assert!(!set.is_subset_of(Repertoire::Basis));
        assert!(set.is_subset_of(Repertoire::Primitive));
        assert_eq!(set.iter().collect::<Vec<_>>(), vec![Behavior::MoveForward, Behavior::SlideLeft]);
    }
}
