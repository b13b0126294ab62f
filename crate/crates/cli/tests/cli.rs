use std::path::{Path, PathBuf};
use std::process::Command;

use moea_cli::output::read_front_objectives;
use moea_cli::{
    cmd_compare, cmd_oracle_check, cmd_run, cmd_sweep, CommonArgs, CompareArgs, OracleArgs, RunArgs, SweepArgs,
};
use moea_core::archive::ArchiveKind;

const SCH: &str = r#"
repeats = 1

[run]
problem = "sch"
population_size = 12
max_evaluations = 600
seed = 1
checkpoint_interval = 200
archive = { kind = "grid", capacity = 30 }
"#;

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn moea(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_moea")).args(args).output().unwrap()
}

fn run_args(config: PathBuf, out: PathBuf) -> RunArgs {
    RunArgs {
        common: CommonArgs {
            config,
            out: Some(out),
            ..Default::default()
        },
        ..Default::default()
    }
}

fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

#[test]
fn run_writes_three_files_and_a_nondominated_front() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sch.toml", SCH);
    let files = cmd_run(&run_args(cfg, dir.path().join("out")), &mut Vec::new()).unwrap();
    assert_eq!(files.len(), 1);
    let f = &files[0];
    assert!(f.front.exists() && f.stats.exists() && f.summary.exists());
    let text = std::fs::read_to_string(&f.front).unwrap();
    assert!(text.starts_with("id,x1,f1,f2\n"));
    let front = read_front_objectives(&text).unwrap();
    assert!(!front.is_empty());
    for a in &front {
        assert!(front.iter().all(|b| !dominates(a, b)));
    }
    let stats = std::fs::read_to_string(&f.stats).unwrap();
    for line in stats.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["evaluations_done"].as_u64().unwrap() <= 600);
    }
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&f.summary).unwrap()).unwrap();
    assert_eq!(summary["evaluations"], 600);
    assert!(summary["metrics"]["gd"].is_number());
}

#[test]
fn repeats_derive_distinct_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sch.toml", SCH);
    let mut args = run_args(cfg, dir.path().join("out"));
    args.common.repeats = Some(3);
    args.common.seed = Some(40);
    let files = cmd_run(&args, &mut Vec::new()).unwrap();
    assert_eq!(files.iter().map(|f| f.seed).collect::<Vec<_>>(), [40, 41, 42]);
    let fronts: Vec<String> = files
        .iter()
        .map(|f| std::fs::read_to_string(&f.front).unwrap())
        .collect();
    assert_eq!(fronts.len(), 3);
    assert_ne!(fronts[0], fronts[1]);
    for (f, seed) in files.iter().zip(40..) {
        let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&f.summary).unwrap()).unwrap();
        assert_eq!(s["seed"], seed);
    }
}

#[test]
fn same_config_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sch.toml", SCH);
    let a = cmd_run(&run_args(cfg.clone(), dir.path().join("a")), &mut Vec::new()).unwrap();
    let b = cmd_run(&run_args(cfg, dir.path().join("b")), &mut Vec::new()).unwrap();
    let read = |p: &Path| std::fs::read(p).unwrap();
    assert_eq!(read(&a[0].front), read(&b[0].front));
    assert_eq!(read(&a[0].stats), read(&b[0].stats));
    assert_eq!(read(&a[0].summary), read(&b[0].summary));
}

#[test]
fn overrides_replace_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sch.toml", SCH);
    let mut args = run_args(cfg, dir.path().join("out"));
    args.overrides.archive = Some(ArchiveKind::Gps);
    args.overrides.max_evaluations = Some(100);
    let files = cmd_run(&args, &mut Vec::new()).unwrap();
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&files[0].summary).unwrap()).unwrap();
    assert_eq!(s["archiver"], "gps");
    assert_eq!(s["evaluations"], 100);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(dir.path(), "ok.toml", SCH);
    let out = dir.path().join("out");
    let r = moea(&["run", "--config", ok.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));

    let bad_kind = write(dir.path(), "kind.toml", &SCH.replace("\"grid\"", "\"octree\""));
    assert_eq!(
        moea(&["run", "--config", bad_kind.to_str().unwrap()]).status.code(),
        Some(2)
    );

    let bad_key = write(dir.path(), "key.toml", &format!("verbose = true\n{SCH}"));
    assert_eq!(
        moea(&["run", "--config", bad_key.to_str().unwrap()]).status.code(),
        Some(2)
    );

    let bad_budget = write(
        dir.path(),
        "budget.toml",
        &SCH.replace("max_evaluations = 600", "max_evaluations = 3"),
    );
    assert_eq!(
        moea(&["run", "--config", bad_budget.to_str().unwrap()]).status.code(),
        Some(2)
    );

    assert_eq!(moea(&["run", "--config", "/nonexistent/x.toml"]).status.code(), Some(2));
    assert_eq!(
        moea(&["run", "--config", ok.to_str().unwrap(), "--archive", "octree"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        moea(&["sweep", "--archive", "gps", "--sizes", "25"]).status.code(),
        Some(2)
    );
    assert_eq!(moea(&["oracle-check", "--k", "101"]).status.code(), Some(2));
    assert_eq!(
        moea(&["oracle-check", "--k", "50", "--seed", "4"]).status.code(),
        Some(0)
    );
}

const COMPARE: &str = r#"
repeats = 2

[run]
problem = "lattice:50:3"
population_size = 10
max_evaluations = 400
seed = 5
archive = { kind = "rn", capacity = 20 }

[[variants]]
name = "rn"
archive = { kind = "rn", capacity = 20 }

[[variants]]
name = "gps"
archive = { kind = "gps", rays_per_axis = 16 }

[[variants]]
name = "gps2"
archive = { kind = "gps", rays_per_axis = 16 }
"#;

#[test]
fn compare_writes_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cmp.toml", COMPARE);
    let out = dir.path().join("cmp");
    let args = CompareArgs {
        common: CommonArgs {
            config: cfg,
            out: Some(out.clone()),
            ..Default::default()
        },
    };
    let report = cmd_compare(&args, &mut Vec::new()).unwrap();
    assert_eq!(report.seeds, [5, 6]);
    let csv = std::fs::read_to_string(out.join("compare.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    for col in [
        "gd",
        "spacing",
        "deterioration_events",
        "dominance_comparisons",
        "monotonicity_violations",
        "coverage_of_gps",
    ] {
        assert!(header.split(',').any(|h| h == col), "missing {col}");
    }
    assert!(out.join("compare.json").exists());

    let [rn, gps, gps2] = &report.rows[..] else {
        panic!("three rows")
    };
    assert_eq!(rn.monotonicity_violations, None);
    assert_eq!(gps.monotonicity_violations, Some(0));
    assert_eq!(rn.coverage["rn"], 1.0);
    let strip = |r: &moea_cli::CompareRow| {
        let mut r = r.clone();
        r.variant.clear();
        r
    };
    assert_eq!(strip(gps), strip(gps2));
}

#[test]
fn compare_needs_two_variants() {
    let dir = tempfile::tempdir().unwrap();
    let one = COMPARE
        .split("[[variants]]")
        .take(2)
        .collect::<Vec<_>>()
        .join("[[variants]]");
    let cfg = write(dir.path(), "one.toml", &one);
    let r = moea(&[
        "compare",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("two variants"));
}

#[test]
fn sweep_reports_slopes() {
    let dir = tempfile::tempdir().unwrap();
    for (kind, lo, hi) in [(ArchiveKind::Gps, -0.2, 0.2), (ArchiveKind::Rn, 0.8, 1.2)] {
        let args = SweepArgs {
            archive: kind,
            sizes: vec![25, 50, 100, 200],
            seed: 1,
            out: dir.path().to_path_buf(),
        };
        let report = cmd_sweep(&args, &mut Vec::new()).unwrap();
        assert!((lo..=hi).contains(&report.slope), "{kind}: {}", report.slope);
        let csv = std::fs::read_to_string(dir.path().join(format!("sweep_{kind}.csv"))).unwrap();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with("n,mean_comparisons\n25,"));
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(format!("sweep_{kind}.json"))).unwrap())
                .unwrap();
        assert_eq!(json["points"].as_array().unwrap().len(), 4);
    }
}

#[test]
fn oracle_check_single_point_and_full_lattice() {
    let single = cmd_oracle_check(&OracleArgs { k: 1, seed: 9 }, &mut Vec::new()).unwrap();
    assert!(single.iter().all(|l| l.front_size == 1 && l.retained_fraction == 1.0));
    let mut log = Vec::new();
    let full = cmd_oracle_check(&OracleArgs { k: 50, seed: 2 }, &mut log).unwrap();
    assert_eq!(full.len(), 3);
    assert!(full.iter().all(|l| l.outside == 0 && l.retained_fraction > 0.0));
    assert_eq!(String::from_utf8(log).unwrap().lines().count(), 3);
}
