//! Independent reference implementations used by the acceptance suite.

use antmine::ant::{mutate, seed_genome, Genome, LatticePos, SeedParams, ThresholdFn};
use antmine::controller::{BehaviorSet, Repertoire, INPUT_NODES};
use antmine::rng::SimRng;
use rand::Rng;
use std::collections::BTreeMap;

/// Naive tissue evaluation straight from the genome: no precomputed
/// wiring, no field tables, outputs resolved by memoized recursion over
/// lattice coordinates.
pub fn reference_activate(genome: &Genome, input: &[f64; INPUT_NODES]) -> (BTreeMap<LatticePos, bool>, BehaviorSet) {
    let fired: Vec<bool> = genome
        .decision_genes
        .iter()
        .map(|d| {
            let mut s = 0.0;
            for i in 0..INPUT_NODES {
                s += d.input_weights[i] * input[i];
            }
            s >= d.firing_threshold
        })
        .collect();

    let concentration = |p: LatticePos| -> f64 {
        let mut c = 0.0;
        for (d, &f) in genome.decision_genes.iter().zip(&fired) {
            let inside = (p.layer - d.position.layer).abs() <= d.half_extents[0]
                && (p.row - d.position.row).abs() <= d.half_extents[1]
                && (p.col - d.position.col).abs() <= d.half_extents[2];
            if f && inside {
                c += d.emission_strength;
            }
        }
        c
    };
    let conc: BTreeMap<LatticePos, f64> = genome.motor_genes.iter().map(|g| (g.position, concentration(g.position))).collect();
    let max = conc.values().copied().fold(0.0, f64::max);

    let mut memo: BTreeMap<LatticePos, bool> = BTreeMap::new();
    fn output(
        p: LatticePos,
        genome: &Genome,
        input: &[f64; INPUT_NODES],
        conc: &BTreeMap<LatticePos, f64>,
        max: f64,
        memo: &mut BTreeMap<LatticePos, bool>,
    ) -> bool {
        if let Some(&o) = memo.get(&p) {
            return o;
        }
        let gene = genome.motor_genes.iter().find(|g| g.position == p).expect("motor exists");
        let active = max > 0.0 && conc[&p] == max;
        let mut out = false;
        if active {
            let mut u = 0.0;
            for dr in -1..=1 {
                for dc in -1..=1 {
                    let k = ((dr + 1) * 3 + (dc + 1)) as usize;
                    let (r, c) = (p.row + dr, p.col + dc);
                    let x = if p.layer == 1 {
                        if (0..4).contains(&r) && (0..4).contains(&c) {
                            Some(input[(r * 4 + c) as usize])
                        } else {
                            None
                        }
                    } else {
                        let below = LatticePos::new(p.layer - 1, r, c);
                        genome
                            .motor_genes
                            .iter()
                            .any(|g| g.position == below)
                            .then(|| if output(below, genome, input, conc, max, memo) { 1.0 } else { 0.0 })
                    };
                    if let Some(x) = x {
                        u += gene.weights[k] * x;
                    }
                }
            }
            out = reference_fire(gene.threshold_fn, u, gene.thresholds);
        }
        memo.insert(p, out);
        out
    }

    let mut triggered = BehaviorSet::EMPTY;
    for g in &genome.motor_genes {
        if output(g.position, genome, input, &conc, max, &mut memo) {
            if let Some(tag) = g.output_tag {
                triggered.insert(tag);
            }
        }
    }
    (memo, triggered)
}

/// Threshold functions written out case by case.
pub fn reference_fire(f: ThresholdFn, u: f64, t: [f64; 2]) -> bool {
    let (lo, hi) = if t[0] <= t[1] { (t[0], t[1]) } else { (t[1], t[0]) };
    let inside = u >= lo && u < hi;
    match f {
        ThresholdFn::Up => u >= lo,
        ThresholdFn::Down => u < lo,
        ThresholdFn::Ditch => inside,
        ThresholdFn::Mound => !inside,
    }
}

/// A seed-culture genome pushed through a few rounds of heavy mutation so
/// the sample covers grown, multi-layer tissues.
pub fn random_genome(rng: &mut SimRng) -> Genome {
    let mode = if rng.random_bool(0.5) { Repertoire::Basis } else { Repertoire::Primitive };
    let mut g = seed_genome(rng, mode, &SeedParams::default());
    for _ in 0..rng.random_range(0..6) {
        g = mutate(&g, rng, 0.2);
    }
    g
}

/// Input plane drawn from the values a real sensor frame can produce.
pub fn random_input(rng: &mut SimRng) -> [f64; INPUT_NODES] {
    let mut v = [0.0; INPUT_NODES];
    for (i, x) in v.iter_mut().enumerate() {
        *x = match i {
            4..=7 | 10 => f64::from(rng.random_range(0..4u8)) / 3.0,
            11 => f64::from(rng.random_range(0..=10u8)) / 10.0,
            _ => f64::from(u8::from(rng.random_bool(0.5))),
        };
    }
    v
}

/// C(n, k) as a float.
pub fn choose(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
