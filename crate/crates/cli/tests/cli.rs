use std::path::Path;
use std::process::{Command, Output};

use bboe_core::dynamics::{State, SystemId};
use bboe_core::world::{Bounds, World};

fn bboe(args: &[&str], bundle_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bboe"));
    cmd.args(args).env_remove("BBOE_BUNDLE_DIR");
    if let Some(dir) = bundle_dir {
        cmd.env("BBOE_BUNDLE_DIR", dir);
    }
    cmd.output().expect("run bboe")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Data lines of a results CSV, split into fields.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).filter(|l| !l.is_empty()).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

/// Drops the wall-clock column so rows compare across runs.
fn without_time(rows: Vec<Vec<String>>) -> Vec<Vec<String>> {
    rows.into_iter()
        .map(|mut r| {
            r.remove(4);
            r
        })
        .collect()
}

fn bundle_dir(edges: usize) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let o = bboe(&["bundle-generate", "--edges", &edges.to_string(), "--seed", "0"], Some(dir.path()));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join(format!("diff-drive-{edges}.bboe")).is_file());
    dir
}

#[test]
fn bundle_generate_zero_edges_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.bboe");
    let o = bboe(&["bundle-generate", "--edges", "0", "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn bundle_generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.bboe");
    let b = dir.path().join("b.bboe");
    for p in [&a, &b] {
        let o = bboe(&["bundle-generate", "--edges", "300", "--seed", "4", "--out", p.to_str().unwrap()], None);
        assert!(o.status.success());
        assert!(stdout(&o).contains("wrote 300 edges"));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let loaded = bboe_core::bundle::load_bundle(&a).unwrap();
    assert_eq!(loaded.len(), 300);
}

#[test]
fn plan_start_in_goal_costs_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("trivial.json");
    let bounds = Bounds { min: [0.0, 0.0], max: [10.0, 10.0] };
    World::empty(SystemId::DiffDrive, bounds, State::new(&[5.0, 5.0, 0.0]), [5.2, 5.0], 1.0, 0.3).unwrap().save(&scenario).unwrap();
    for planner in ["bboe-85", "rrt", "gbrrt", "bi-nostrategy"] {
        let o = bboe(&["plan", "--scenario", scenario.to_str().unwrap(), "--planner", planner, "--edges", "50"], None);
        assert_eq!(o.status.code(), Some(0), "{planner}");
        let rows = csv_rows(&stdout(&o));
        assert_eq!(rows[0][3], "true");
        assert_eq!(rows[0][5], "0");
    }
}

#[test]
fn plan_is_deterministic_and_dumps_path() {
    let dir = bundle_dir(500);
    let path_csv = dir.path().join("path.csv");
    let args = ["plan", "--difficulty", "easy", "--seed", "2", "--planner", "bboe-85", "--edges", "500", "--max-iter", "3000"];
    let a = bboe(&args, Some(dir.path()));
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path_csv.to_str().unwrap()]);
    let b = bboe(&with_out, Some(dir.path()));
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(without_time(csv_rows(&stdout(&a))), without_time(csv_rows(&stdout(&b))));
    let dump = std::fs::read_to_string(&path_csv).unwrap();
    assert!(dump.starts_with("t,x,y,theta\n"));
    assert!(dump.lines().count() > 2);
}

#[test]
fn plan_failure_exits_one() {
    let o = bboe(&["plan", "--difficulty", "very-hard", "--planner", "rrt", "--max-iter", "1"], None);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(csv_rows(&stdout(&o))[0][3], "false");
}

#[test]
fn plan_rejects_mismatched_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let trailer = dir.path().join("trailer.bboe");
    let o = bboe(&["bundle-generate", "--system", "car-with-trailer", "--edges", "20", "--out", trailer.to_str().unwrap()], None);
    assert!(o.status.success());
    let o = bboe(&["plan", "--bundle", trailer.to_str().unwrap(), "--planner", "bboe-85", "--max-iter", "10"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).is_empty());
}

#[test]
fn usage_errors_exit_two() {
    let cases: [&[&str]; 6] = [
        &["bench", "--difficulty", "easy", "--trials", "1"],
        &["bench", "--planner", "", "--trials", "1"],
        &["bench", "--planner", "astar", "--trials", "1"],
        &["ablate", "--axis", "gamma", "--values", "1", "--trials", "1"],
        &["ablate", "--axis", "skip_n", "--values", "ten", "--trials", "1"],
        &["plan", "--planner", "bboe-85", "--theta", "-1"],
    ];
    for args in cases {
        let o = bboe(args, None);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
    let o = bboe(&["ablate", "--axis", "gamma", "--values", "1"], None);
    assert!(String::from_utf8_lossy(&o.stderr).contains("skip_n, k_bias, variant"));
}

#[test]
fn plan_runs_match_bench_rows() {
    let dir = bundle_dir(2000);
    let bench_csv = dir.path().join("bench.csv");
    let o = bboe(
        &["bench", "--difficulty", "hard", "--planner", "bboe-85", "--trials", "20", "--max-iter", "400", "--out", bench_csv.to_str().unwrap()],
        Some(dir.path()),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let bench = without_time(csv_rows(&std::fs::read_to_string(&bench_csv).unwrap()));
    assert_eq!(bench.len(), 20);
    for seed in 0..20 {
        let o = bboe(
            &["plan", "--difficulty", "hard", "--seed", &seed.to_string(), "--planner", "bboe-85", "--max-iter", "400"],
            Some(dir.path()),
        );
        let row = without_time(csv_rows(&stdout(&o))).remove(0);
        assert_eq!(row, bench[seed], "seed {seed}");
    }
}

#[test]
fn printed_table_matches_recomputed_aggregates() {
    let dir = bundle_dir(500);
    let csv_path = dir.path().join("out.csv");
    let o = bboe(
        &[
            "bench", "--difficulty", "easy,medium", "--planner", "bboe-85,rrt", "--trials", "4", "--edges", "500", "--max-iter", "1500",
            "--out", csv_path.to_str().unwrap(),
        ],
        Some(dir.path()),
    );
    assert!(o.status.success());
    let table = stdout(&o);
    let rows = csv_rows(&std::fs::read_to_string(&csv_path).unwrap());
    assert_eq!(rows.len(), 16);
    for planner in ["bboe-85", "rrt"] {
        for difficulty in ["easy", "medium"] {
            let cell: Vec<&Vec<String>> = rows.iter().filter(|r| r[0] == planner && r[1] == difficulty).collect();
            let ok: Vec<&&Vec<String>> = cell.iter().filter(|r| r[3] == "true").collect();
            let stat = |col: usize| {
                if ok.is_empty() {
                    return "-".to_string();
                }
                let v: Vec<f64> = ok.iter().map(|r| r[col].parse().unwrap()).collect();
                let mean = v.iter().sum::<f64>() / v.len() as f64;
                let lo = v.iter().cloned().fold(f64::MAX, f64::min);
                let hi = v.iter().cloned().fold(f64::MIN, f64::max);
                format!("{mean:.3} [{lo:.3}, {hi:.3}]")
            };
            let line = table
                .lines()
                .find(|l| l.split_whitespace().take(2).eq([planner, difficulty]))
                .unwrap_or_else(|| panic!("no line for {planner} {difficulty}"));
            assert!(line.contains(&format!("{}/{}", ok.len(), cell.len())), "{line}");
            assert!(line.contains(&stat(4)), "{line}");
            assert!(line.contains(&stat(5)), "{line}");
        }
    }
}

#[test]
fn single_value_sweep_equals_bench() {
    let dir = bundle_dir(500);
    let bench_csv = dir.path().join("bench.csv");
    let ablate_csv = dir.path().join("ablate.csv");
    let common = ["--difficulty", "medium", "--planner", "bboe-85", "--trials", "3", "--edges", "500", "--max-iter", "800"];
    let mut bench_args = vec!["bench"];
    bench_args.extend(common);
    bench_args.extend(["--skip-n", "100", "--out", bench_csv.to_str().unwrap()]);
    let mut ablate_args = vec!["ablate", "--axis", "skip_n", "--values", "100"];
    ablate_args.extend(common);
    ablate_args.extend(["--out", ablate_csv.to_str().unwrap()]);
    assert!(bboe(&bench_args, Some(dir.path())).status.success());
    assert!(bboe(&ablate_args, Some(dir.path())).status.success());
    let bench = without_time(csv_rows(&std::fs::read_to_string(&bench_csv).unwrap()));
    let ablate_text = std::fs::read_to_string(&ablate_csv).unwrap();
    assert!(ablate_text.starts_with("planner,difficulty,seed,success,time_s,cost_m,iterations,prop_attempts,axis_value\n"));
    let ablate: Vec<Vec<String>> = without_time(csv_rows(&ablate_text))
        .into_iter()
        .map(|mut r| {
            assert_eq!(r.pop().as_deref(), Some("100"));
            r
        })
        .collect();
    assert_eq!(bench, ablate);
}

#[test]
fn scenario_round_trips_through_plan() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("s.json");
    let o = bboe(&["scenario", "--difficulty", "medium", "--seed", "7", "--out", file.to_str().unwrap()], None);
    assert!(o.status.success());
    let loaded = World::load(&file).unwrap();
    assert_eq!(loaded, bboe_core::world::generate_scenario(bboe_core::world::Level::Medium, 7).unwrap());
}
