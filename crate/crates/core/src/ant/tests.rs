use super::*;
use crate::controller::{InputPlane, Repertoire};
use crate::rng::rng_from_seed;
use rand::Rng;

fn motor(position: LatticePos, tag: Option<Behavior>) -> MotorGene {
    MotorGene {
        position,
        weights: [0.0; 9],
        thresholds: [0.0, 0.0],
        threshold_fn: ThresholdFn::Up,
        output_tag: tag,
    }
}

fn always_firing(position: LatticePos, half_extents: [i32; 3], strength: f64) -> DecisionGene {
    DecisionGene {
        position,
        input_weights: [0.0; 16],
        firing_threshold: -1.0,
        half_extents,
        emission_strength: strength,
    }
}

fn basis_genome(motor_genes: Vec<MotorGene>, decision_genes: Vec<DecisionGene>) -> Genome {
    Genome {
        mode: Repertoire::Basis,
        motor_genes,
        decision_genes,
        execution_order: Repertoire::Basis.behaviors().to_vec(),
    }
}

#[test]
fn seed_culture_develops_eighteen_motor_neurons() {
    let mut genes = Vec::new();
    for row in 0..3 {
        for col in 0..6 {
            genes.push(motor(LatticePos::new(1, row, col), Some(Behavior::MoveForward)));
        }
    }
    let genome = basis_genome(genes, vec![always_firing(LatticePos::new(2, 1, 2), [1, 1, 1], 1.0)]);
    let tissue = Tissue::develop(&genome).unwrap();
    assert_eq!(tissue.motor_count(), 18);
    assert_eq!(tissue.decision_count(), 1);
    for p in tissue.motor_positions().collect::<Vec<_>>() {
        assert!(tissue.fan_in(p).unwrap() <= 9);
    }
    // interior neuron above the input plane sees a full 3×3 patch
    assert_eq!(tissue.fan_in(LatticePos::new(1, 1, 1)), Some(9));
    // columns 5 lies past the 4-wide input plane on both sides of its patch
    assert_eq!(tissue.fan_in(LatticePos::new(1, 1, 5)), Some(0));
}

#[test]
fn corner_neuron_has_four_inputs() {
    let genome = basis_genome(vec![motor(LatticePos::new(1, 0, 0), Some(Behavior::TurnLeft))], vec![]);
    let tissue = Tissue::develop(&genome).unwrap();
    assert_eq!(tissue.fan_in(LatticePos::new(1, 0, 0)), Some(4));
    let mut inputs = tissue.input_positions(LatticePos::new(1, 0, 0)).unwrap();
    inputs.sort();
    assert_eq!(
        inputs,
        vec![LatticePos::new(0, 0, 0), LatticePos::new(0, 0, 1), LatticePos::new(0, 1, 0), LatticePos::new(0, 1, 1)]
    );
}

#[test]
fn upper_layers_wire_to_motor_neurons_below() {
    let genome = basis_genome(
        vec![
            motor(LatticePos::new(1, 0, 0), None),
            motor(LatticePos::new(1, 1, 1), None),
            motor(LatticePos::new(1, 3, 3), None),
            motor(LatticePos::new(2, 0, 1), Some(Behavior::MoveForward)),
        ],
        vec![],
    );
    let tissue = Tissue::develop(&genome).unwrap();
    let mut inputs = tissue.input_positions(LatticePos::new(2, 0, 1)).unwrap();
    inputs.sort();
    assert_eq!(inputs, vec![LatticePos::new(1, 0, 0), LatticePos::new(1, 1, 1)]);
}

#[test]
fn malformed_genomes_are_rejected() {
    let dup = basis_genome(
        vec![motor(LatticePos::new(1, 0, 0), Some(Behavior::MoveForward))],
        vec![always_firing(LatticePos::new(1, 0, 0), [1, 1, 1], 1.0)],
    );
    assert!(matches!(Tissue::develop(&dup), Err(AntError::MalformedGenome(_))));

    let untagged = basis_genome(vec![motor(LatticePos::new(1, 0, 0), None)], vec![]);
    assert!(matches!(untagged.validate(), Err(AntError::MalformedGenome(_))));

    let mut heavy = motor(LatticePos::new(1, 0, 0), Some(Behavior::MoveForward));
    heavy.weights[3] = 1.5;
    assert!(basis_genome(vec![heavy], vec![]).validate().is_err());

    let out_of_lattice = basis_genome(vec![motor(LatticePos::new(0, 0, 0), Some(Behavior::MoveForward))], vec![]);
    assert!(out_of_lattice.validate().is_err());

    let wrong_tag = basis_genome(vec![motor(LatticePos::new(1, 0, 0), Some(Behavior::SlideLeft))], vec![]);
    assert!(wrong_tag.validate().is_err());

    let mut bad_order = basis_genome(vec![motor(LatticePos::new(1, 0, 0), Some(Behavior::MoveForward))], vec![]);
    bad_order.execution_order.swap(0, 1);
    assert!(bad_order.validate().is_err());

    let zero_extent = basis_genome(
        vec![motor(LatticePos::new(1, 0, 0), Some(Behavior::MoveForward))],
        vec![always_firing(LatticePos::new(2, 0, 0), [0, 1, 1], 1.0)],
    );
    assert!(zero_extent.validate().is_err());
}

#[test]
fn no_firing_decision_means_idle() {
    let mut quiet = always_firing(LatticePos::new(2, 0, 0), [2, 4, 4], 1.0);
    quiet.firing_threshold = 0.5;
    let genome = basis_genome(vec![motor(LatticePos::new(1, 0, 0), Some(Behavior::MoveForward))], vec![quiet]);
    let tissue = Tissue::develop(&genome).unwrap();
    let act = tissue.activate_detailed(&InputPlane([0.0; 16]));
    assert_eq!(act.fired, vec![false]);
    assert!(act.triggered.is_empty());
    assert!(act.active.iter().all(|a| !a));
}

#[test]
fn covered_neuron_is_selected_and_others_are_silenced() {
    // Two tagged neurons that would both fire; the field covers only one.
    let genome = basis_genome(
        vec![
            motor(LatticePos::new(1, 0, 0), Some(Behavior::MoveForward)),
            motor(LatticePos::new(1, 0, 4), Some(Behavior::TurnLeft)),
        ],
        vec![always_firing(LatticePos::new(2, 0, 0), [1, 1, 1], 1.0)],
    );
    let tissue = Tissue::develop(&genome).unwrap();
    let (triggered, order) = tissue.activate(&InputPlane([0.5; 16]));
    assert_eq!(triggered.iter().collect::<Vec<_>>(), vec![Behavior::MoveForward]);
    assert_eq!(order, Repertoire::Basis.behaviors());
}

#[test]
fn overlapping_fields_select_the_overlap() {
    // 10 motor neurons along layer 1, row 0, cols 0..10.
    let motors: Vec<MotorGene> =
        (0..10).map(|c| motor(LatticePos::new(1, 0, c), Some(Behavior::MoveForward))).collect();
    let fields = vec![
        always_firing(LatticePos::new(2, 0, 2), [1, 1, 2], 1.0),
        always_firing(LatticePos::new(2, 1, 5), [1, 1, 2], 0.7),
    ];
    let genome = basis_genome(motors.clone(), fields.clone());
    let tissue = Tissue::develop(&genome).unwrap();
    let act = tissue.activate_detailed(&InputPlane([0.0; 16]));

    // independent recomputation: sum strengths per neuron, keep the max
    let expected: Vec<f64> = motors
        .iter()
        .map(|m| {
            let mut c = 0.0;
            for d in &fields {
                let inside = (m.position.layer - d.position.layer).abs() <= d.half_extents[0]
                    && (m.position.row - d.position.row).abs() <= d.half_extents[1]
                    && (m.position.col - d.position.col).abs() <= d.half_extents[2];
                if inside {
                    c += d.emission_strength;
                }
            }
            c
        })
        .collect();
    assert_eq!(act.concentration, expected);
    assert_eq!(act.concentration[3], 1.7);
    assert_eq!(act.concentration[4], 1.7);
    let active_cols: Vec<usize> = act.active.iter().enumerate().filter(|(_, a)| **a).map(|(i, _)| i).collect();
    assert_eq!(active_cols, vec![3, 4]);
}

#[test]
fn ditch_and_mound_are_complements() {
    let mut rng = rng_from_seed(3);
    for _ in 0..10_000 {
        let u = rng.random_range(-12.0..12.0);
        let t = [rng.random_range(-3.0..=3.0), rng.random_range(-3.0..=3.0)];
        assert_ne!(ThresholdFn::Ditch.fire(u, t), ThresholdFn::Mound.fire(u, t));
        assert_ne!(ThresholdFn::Up.fire(u, t), ThresholdFn::Down.fire(u, t));
    }
    // boundaries: Ditch is closed below, open above
    assert!(ThresholdFn::Ditch.fire(-1.0, [1.0, -1.0]));
    assert!(!ThresholdFn::Ditch.fire(1.0, [1.0, -1.0]));
    assert!(ThresholdFn::Up.fire(-1.0, [1.0, -1.0]));
}

#[test]
fn seed_genomes_span_the_size_range() {
    let params = SeedParams::default();
    let mut counts = Vec::new();
    for seed in 0..1000 {
        let mut rng = rng_from_seed(seed);
        let mode = if seed % 2 == 0 { Repertoire::Basis } else { Repertoire::Primitive };
        let g = seed_genome(&mut rng, mode, &params);
        g.validate().unwrap();
        counts.push(g.neuron_count());
    }
    assert_eq!(*counts.iter().min().unwrap(), 18);
    assert_eq!(*counts.iter().max().unwrap(), 110);
    // draws below 18 collapse onto the seed layer: P(count = 18) = 9/101
    let at_floor = counts.iter().filter(|&&c| c == 18).count() as f64 / 1000.0;
    assert!((at_floor - 9.0 / 101.0).abs() < 0.03, "{at_floor}");
    let above = counts.iter().filter(|&&c| c > 64).count() as f64 / 1000.0;
    assert!((above - 46.0 / 101.0).abs() < 0.05, "{above}");
}

#[test]
fn seed_genome_is_deterministic() {
    let a = seed_genome(&mut rng_from_seed(42), Repertoire::Primitive, &SeedParams::default());
    let b = seed_genome(&mut rng_from_seed(42), Repertoire::Primitive, &SeedParams::default());
    assert_eq!(a, b);
    assert!(crate::controller::is_permutation_of(&a.execution_order, Repertoire::Primitive));
}

#[test]
fn zero_rate_mutation_is_identity() {
    let g = seed_genome(&mut rng_from_seed(5), Repertoire::Primitive, &SeedParams::default());
    assert_eq!(mutate(&g, &mut rng_from_seed(9), 0.0), g);
}

#[test]
fn full_rate_mutation_redraws_and_stays_valid() {
    let genome = basis_genome(
        vec![motor(LatticePos::new(1, 0, 0), Some(Behavior::MoveForward))],
        vec![always_firing(LatticePos::new(2, 0, 0), [1, 1, 1], 0.5)],
    );
    for seed in 0..200 {
        let m = mutate(&genome, &mut rng_from_seed(seed), 1.0);
        m.validate().unwrap();
        let motor = &m.motor_genes.iter().find(|g| g.position == LatticePos::new(1, 0, 0)).unwrap();
        assert!(motor.weights.iter().all(|&w| w != 0.0));
    }
}

#[test]
fn mutation_rate_matches_per_field_probability() {
    let p_m = 0.025;
    let g = seed_genome(&mut rng_from_seed(77), Repertoire::Basis, &SeedParams::default());
    let mut rng = rng_from_seed(78);
    let mut changed = 0usize;
    let mut total = 0usize;
    for _ in 0..10_000 {
        let m = mutate(&g, &mut rng, p_m);
        // continuous weight fields of genes that survived deletion
        for gene in &m.motor_genes {
            if let Some(orig) = g.motor_genes.iter().find(|o| o.position == gene.position) {
                for (a, b) in orig.weights.iter().zip(&gene.weights) {
                    total += 1;
                    changed += usize::from(a != b);
                }
            }
        }
    }
    let n = total as f64;
    let mean = n * p_m;
    let sigma = (n * p_m * (1.0 - p_m)).sqrt();
    assert!((changed as f64 - mean).abs() <= 3.0 * sigma, "changed {changed}, expected {mean} ± {}", 3.0 * sigma);
}

#[test]
fn crossover_of_identical_parents_is_identity() {
    let a = seed_genome(&mut rng_from_seed(10), Repertoire::Primitive, &SeedParams::default());
    for seed in 0..50 {
        let (c1, c2) = crossover(&a, &a, &mut rng_from_seed(seed)).unwrap();
        assert_eq!(c1, a);
        assert_eq!(c2, a);
    }
}

#[test]
fn crossover_at_zero_swaps_parents() {
    let a = seed_genome(&mut rng_from_seed(1), Repertoire::Primitive, &SeedParams::default());
    let b = seed_genome(&mut rng_from_seed(2), Repertoire::Primitive, &SeedParams::default());
    let (c1, c2) = crossover_with_cut(&a, &b, 0, &mut rng_from_seed(0)).unwrap();
    assert_eq!(c1, b);
    assert_eq!(c2, a);
}

#[test]
fn crossover_rejects_mixed_modes() {
    let a = seed_genome(&mut rng_from_seed(1), Repertoire::Primitive, &SeedParams::default());
    let b = seed_genome(&mut rng_from_seed(2), Repertoire::Basis, &SeedParams::default());
    assert_eq!(
        crossover(&a, &b, &mut rng_from_seed(0)).unwrap_err(),
        AntError::ModeMismatch(Repertoire::Primitive, Repertoire::Basis)
    );
}

#[test]
fn genome_json_round_trip_is_exact() {
    let g = seed_genome(&mut rng_from_seed(123), Repertoire::Primitive, &SeedParams::default());
    let text = serde_json::to_string(&g).unwrap();
    assert!(text.contains("0x"));
    let back: Genome = serde_json::from_str(&text).unwrap();
    assert_eq!(back, g);
}
