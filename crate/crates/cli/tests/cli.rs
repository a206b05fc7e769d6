use antmine::ant::{seed_genome, SeedParams};
use antmine::controller::Repertoire;
use antmine::evolve::{evaluate_fitness, EvolutionConfig};
use antmine::genome::ControllerGenome;
use antmine::rng::rng_from_seed;
use antmine::world::LightPosition;
use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

const QUICK: &[&str] = &["--pop", "8", "--generations", "2", "--episodes", "2", "--timesteps", "40"];

fn antmine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_antmine")).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = antmine(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn digests(dir: &Path) -> Vec<(String, String)> {
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| (o["path"].as_str().unwrap().to_string(), o["sha256"].as_str().unwrap().to_string()))
        .collect()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

fn write_genome(dir: &Path, genome: &ControllerGenome) -> String {
    let path = dir.join("genome.json");
    genome.save(&path).unwrap();
    path.to_string_lossy().into_owned()
}

fn idle_genome() -> ControllerGenome {
    let mut g = seed_genome(&mut rng_from_seed(1), Repertoire::Basis, &SeedParams::default());
    g.decision_genes.clear();
    ControllerGenome::Ant(g)
}

#[test]
fn missing_config_exits_2_naming_the_path() {
    let out = antmine(&["evolve", "--config", "/nonexistent/run.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/run.json"));
}

#[test]
fn unknown_and_invalid_keys_exit_2_naming_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"populaton": 5}"#).unwrap();
    let out = antmine(&["evolve", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("populaton"));

    std::fs::write(&bad, r#"{"crossover_prob": 2.0}"#).unwrap();
    let out = antmine(&["evolve", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("crossover_prob"));

    let out = antmine(&["evolve", "--controller", "fc", "--mode", "primitive"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn same_seed_gives_identical_digests_for_any_worker_count() {
    let tmp = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for (name, workers) in [("a", "1"), ("b", "1"), ("c", "8")] {
        let out = tmp.path().join(name);
        let mut args = vec!["evolve", "--seed", "7", "--workers", workers, "--out", out.to_str().unwrap()];
        args.extend(QUICK);
        run_ok(&args);
        runs.push(digests(&out));
    }
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
    assert_eq!(runs[0].len(), 2);

    let other = tmp.path().join("d");
    let mut args = vec!["evolve", "--seed", "8", "--out", other.to_str().unwrap()];
    args.extend(QUICK);
    run_ok(&args);
    assert_ne!(digests(&other), runs[0]);
}

#[test]
fn zero_generations_emit_only_initial_stats() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("g0");
    run_ok(&["evolve", "--generations", "0", "--pop", "6", "--episodes", "1", "--timesteps", "20", "--out", out.to_str().unwrap()]);
    let rows = csv_rows(&out.join("evolution.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][0], "0");
    assert!(ControllerGenome::load(&out.join("champion.json")).is_ok());
}

#[test]
fn idle_genome_evaluates_to_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let genome = write_genome(tmp.path(), &idle_genome());
    let out = tmp.path().join("eval");
    let stdout = run_ok(&["eval", "--genome", &genome, "--episodes", "2", "--timesteps", "30", "--out", out.to_str().unwrap()]);
    assert_eq!(stdout.trim(), "0.000000");
}

#[test]
fn eval_matches_in_process_fitness() {
    let tmp = tempfile::tempdir().unwrap();
    let genome = ControllerGenome::Ant(seed_genome(&mut rng_from_seed(21), Repertoire::Basis, &SeedParams::default()));
    let path = write_genome(tmp.path(), &genome);
    let out = tmp.path().join("eval");
    let stdout =
        run_ok(&["eval", "--genome", &path, "--seed", "5", "--episodes", "4", "--timesteps", "120", "--out", out.to_str().unwrap()]);
    let mut config = EvolutionConfig { seed: 5, episodes: 4, ..EvolutionConfig::default() };
    config.world.max_timesteps = 120;
    let expected = evaluate_fitness(&genome, &config, 5).unwrap();
    assert_eq!(stdout.trim(), format!("{expected:.6}"));
}

#[test]
fn beacon_off_traces_never_see_the_light() {
    let tmp = tempfile::tempdir().unwrap();
    let genome = ControllerGenome::Ant(seed_genome(&mut rng_from_seed(2), Repertoire::Basis, &SeedParams::default()));
    let path = write_genome(tmp.path(), &genome);
    let out = tmp.path().join("eval");
    run_ok(&[
        "eval", "--genome", &path, "--robots", "4", "--beacon", "off", "--episodes", "2", "--timesteps", "50", "--out",
        out.to_str().unwrap(),
    ]);
    for e in 0..2 {
        let file = std::fs::File::open(out.join(format!("traces/episode_{e:04}.jsonl"))).unwrap();
        let trace = antmine::trace::read_trace(std::io::BufReader::new(file)).unwrap();
        assert_eq!(trace.len(), 50);
        for record in &trace {
            assert_eq!(record.robots.len(), 4);
            for r in &record.robots {
                assert_eq!(r.frame.light_position, LightPosition::NotVisible);
                assert_eq!(r.frame.light_distance, 10);
            }
        }
    }
}

#[test]
fn malformed_genome_exits_2_and_bad_world_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"kind":"ant","mode":"basis"}"#).unwrap();
    assert_eq!(antmine(&["eval", "--genome", bad.to_str().unwrap()]).status.code(), Some(2));

    let genome = write_genome(tmp.path(), &idle_genome());
    let out = antmine(&["eval", "--genome", &genome, "--robots", "100", "--out", tmp.path().join("x").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sweep_writes_one_row_per_count_ascending() {
    let tmp = tempfile::tempdir().unwrap();
    let genome = ControllerGenome::Ant(seed_genome(&mut rng_from_seed(3), Repertoire::Basis, &SeedParams::default()));
    let path = write_genome(tmp.path(), &genome);
    let out = tmp.path().join("sweep");
    run_ok(&[
        "sweep", "--genome", &path, "--counts", "1,2,4,8,16", "--episodes", "2", "--timesteps", "30", "--out",
        out.to_str().unwrap(),
    ]);
    let rows = csv_rows(&out.join("sweep.csv"));
    let counts: Vec<u32> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(counts, vec![1, 2, 4, 8, 16]);
}

#[test]
fn single_robot_traces_have_no_brigade() {
    let tmp = tempfile::tempdir().unwrap();
    let genome = ControllerGenome::Ant(seed_genome(&mut rng_from_seed(4), Repertoire::Basis, &SeedParams::default()));
    let path = write_genome(tmp.path(), &genome);
    let traces = tmp.path().join("solo");
    run_ok(&["eval", "--genome", &path, "--robots", "1", "--episodes", "3", "--timesteps", "150", "--out", traces.to_str().unwrap()]);
    let out = tmp.path().join("brigade");
    run_ok(&["brigade", "--traces", traces.join("traces").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let rows = csv_rows(&out.join("brigade.csv"));
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| &r[3] == "0.0"));
}

#[test]
fn partition_study_writes_three_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("partition");
    run_ok(&[
        "partition", "--partitions", "1,4,16", "--seeds", "2", "--test-episodes", "2", "--pop", "4", "--generations", "1",
        "--episodes", "1", "--timesteps", "20", "--out", out.to_str().unwrap(),
    ]);
    let rows = csv_rows(&out.join("partition.csv"));
    let settings: Vec<&str> = rows.iter().map(|r| r.get(0).unwrap()).collect();
    assert_eq!(settings, vec!["1", "4", "16"]);
    assert!(rows.iter().all(|r| &r[3] == "2"));
}

#[test]
fn beacon_study_writes_two_rows_per_budget() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("beacon");
    run_ok(&[
        "beacon", "--budgets", "20,40", "--seeds", "1", "--test-episodes", "1", "--pop", "4", "--generations", "0",
        "--episodes", "1", "--out", out.to_str().unwrap(),
    ]);
    let rows = csv_rows(&out.join("beacon.csv"));
    let settings: Vec<(String, String)> = rows.iter().map(|r| (r[0].to_string(), r[1].to_string())).collect();
    let expected = [("20", "on"), ("20", "off"), ("40", "on"), ("40", "off")];
    assert_eq!(settings, expected.map(|(a, b)| (a.to_string(), b.to_string())));
}
