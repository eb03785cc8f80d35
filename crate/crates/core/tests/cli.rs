use std::path::Path;
use std::process::{Command, Output};

use moproc::metrics::MetricsReport;
use moproc::optimizer::RunManifest;

const GRAMMAR: &str = include_str!("../src/cli/grammar.ebnf");

fn moproc(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moproc")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn quick_run(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--frames", "20", "--steps", "20"];
    args.extend_from_slice(extra);
    moproc(&args, dir)
}

#[test]
fn run_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = moproc(&["run", "--task", "HSI-3", "--prior", "dct:K=8", "--seed", "0", "--out", "r"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = dir.path().join("r");
    for f in ["motion.json", "motion.bvh", "positions.csv", "manifest.json", "metrics.json"] {
        assert!(r.join(f).is_file(), "{f} missing");
    }
    for f in ["root_path.svg", "heights.svg", "trace.svg"] {
        let svg = std::fs::read_to_string(r.join("plots").join(f)).unwrap();
        assert!(svg.starts_with("<svg"), "{f}");
    }
    let bvh = std::fs::read_to_string(r.join("motion.bvh")).unwrap();
    assert!(bvh.starts_with("HIERARCHY") && bvh.contains("MOTION"));
    let csv = std::fs::read_to_string(r.join("positions.csv")).unwrap();
    assert_eq!(csv.lines().count(), 61);
    assert!(csv.starts_with("j0_x,j0_y,j0_z"));
}

#[test]
fn invalid_program_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.mopro");
    std::fs::write(&bad, "task \"t\" {\n  constraint all frames: joint(nose).pos.y > 1;\n}\n").unwrap();
    let o = moproc(&["run", "--program", "bad.mopro"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.mopro:2:32"), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn restarts_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let o = quick_run(dir.path(), &["--task", "HSI-1", "--restarts", "5", "--out", "r"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = RunManifest::from_json(&std::fs::read_to_string(dir.path().join("r/manifest.json")).unwrap()).unwrap();
    assert_eq!(m.restarts.len(), 5);
    assert_eq!(m.config.restarts, 5);
    let best = m.restarts.iter().map(|r| r.constraint_error).fold(f64::INFINITY, f64::min);
    assert_eq!(m.restarts[m.restart_chosen].constraint_error, best);
    assert_eq!(m.program_name, "HSI-1");
    assert_eq!(m.prior, "dct:K=8");
}

#[test]
fn eval_reproduces_run_metrics_exactly() {
    let dir = tempfile::tempdir().unwrap();
    for (task, extra) in [("GEO-1", vec!["--param", "d=1.2"]), ("HOI-1", vec![]), ("HSI-2", vec![])] {
        let mut args = vec!["--task", task, "--out", task, "--seed", "3"];
        args.extend(extra.iter().copied());
        let o = quick_run(dir.path(), &args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let run_dir = dir.path().join(task);
        let m = RunManifest::from_json(&std::fs::read_to_string(run_dir.join("manifest.json")).unwrap()).unwrap();
        let o = moproc(&["eval", &format!("{task}/motion.json")], dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let r: MetricsReport = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(r.foot_skate_ratio.to_bits(), m.metrics["foot_skate_ratio"].to_bits());
        assert_eq!(r.max_acceleration.to_bits(), m.metrics["max_acceleration"].to_bits());
        assert_eq!(r.bone_length_incorrect_ratio.to_bits(), m.metrics["bone_length_incorrect_ratio"].to_bits());
        assert_eq!(r.constraint_error.unwrap().to_bits(), m.metrics["constraint_error"].to_bits());
        assert_eq!(r.success, m.success);
        let saved: MetricsReport = serde_json::from_str(&std::fs::read_to_string(run_dir.join("metrics.json")).unwrap()).unwrap();
        assert_eq!(saved, r);
    }
}

#[test]
fn directory_table_matches_single_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = quick_run(dir.path(), &["--task", "HSC-1", "--seeds", "0..3", "--out", "batch"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 3);
    let table = moproc(&["eval", "batch", "--task", "HSC-1"], dir.path());
    assert_eq!(table.status.code(), Some(0), "{}", stderr(&table));
    let text = stdout(&table);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(moproc::metrics::CSV_HEADER));
    for (seed, line) in lines.enumerate() {
        let single = moproc(&["eval", &format!("batch/seed-{seed}/motion.json"), "--task", "HSC-1"], dir.path());
        let mut r: MetricsReport = serde_json::from_str(&stdout(&single)).unwrap();
        r.id = format!("seed-{seed}/motion.json");
        assert_eq!(line, r.csv_row());
    }
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn satisfying_motion_evaluates_to_success() {
    let dir = tempfile::tempdir().unwrap();
    let motion = serde_json::json!({
        "fps": 20.0,
        "skeleton": "default22",
        "frames": (0..5).map(|_| serde_json::json!({"root": [0.0, 0.92, 0.0], "rot": vec![[0.0; 3]; 22]})).collect::<Vec<_>>(),
    });
    std::fs::write(dir.path().join("still.json"), motion.to_string()).unwrap();
    let o = moproc(&["eval", "still.json", "--task", "HSI-3"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: MetricsReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r.constraint_error, Some(0.0));
    assert_eq!(r.success, Some(true));
    assert_eq!(r.bone_length_incorrect_ratio, 0.0);
    assert_eq!(r.foot_skate_ratio, 0.0);
}

#[test]
fn gradcheck_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let o = moproc(&["gradcheck", "--task", "HOI-2"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let err: f64 = stdout(&o).split_whitespace().nth(5).unwrap().parse().unwrap();
    assert!(err < 1e-4);

    std::fs::write(dir.path().join("const.mopro"), "task \"c\" { constraint all frames: 2 > 1; }").unwrap();
    let o = moproc(&["gradcheck", "const.mopro"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("0.000e0"));

    std::fs::write(dir.path().join("bad.mopro"), "task \"b\" { constraint all frames: joint(head).pos.y > ; }").unwrap();
    assert_eq!(moproc(&["gradcheck", "bad.mopro"], dir.path()).status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("inf.mopro"),
        "task \"inf\" { constraint all frames: 1e308 * 1e308 * joint(head).pos.y == 0; }",
    )
    .unwrap();
    let o = quick_run(dir.path(), &["--program", "inf.mopro"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("non-finite"));
    assert_eq!(moproc(&["gradcheck", "inf.mopro"], dir.path()).status.code(), Some(3));
}

#[test]
fn user_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["run", "--task", "HSI-3", "--program", "x.mopro"],
        vec!["run", "--task", "NOPE-9"],
        vec!["run", "--task", "HSI-3", "--prior", "pca:missing.json"],
        vec!["run", "--task", "HSI-3", "--relax", "plane"],
        vec!["run", "--task", "HSI-3", "--param", "nope=1"],
        vec!["run", "--task", "HSI-3", "--param", "half=[1,2,3]"],
        vec!["run", "--task", "HSI-3", "--lr", "-1"],
        vec!["run", "--task", "HSI-3", "--seeds", "4..2"],
        vec!["eval", "missing.json"],
        vec!["frobnicate"],
    ] {
        let o = moproc(&args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn prompt_embeds_grammar_and_description() {
    let dir = tempfile::tempdir().unwrap();
    let o = moproc(&["prompt", "walking inside a square"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains(GRAMMAR));
    assert_eq!(text.matches("walking inside a square").count(), 1);

    let o = moproc(&["prompt"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(GRAMMAR));
    assert!(!stdout(&o).contains("Task:"));
}

#[test]
fn list_tasks_honors_corpus_override() {
    let dir = tempfile::tempdir().unwrap();
    let o = moproc(&["list-tasks"], dir.path());
    assert_eq!(stdout(&o).lines().count(), 13);

    let corpus = dir.path().join("corpus");
    std::fs::create_dir(&corpus).unwrap();
    std::fs::write(corpus.join("x.mopro"), "task \"NEW-1\" { constraint all frames: joint(head).pos.y > 1.4; }").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_moproc"))
        .arg("list-tasks")
        .env("MOPROC_CORPUS", &corpus)
        .output()
        .unwrap();
    let ids = stdout(&o);
    assert!(ids.lines().any(|l| l == "NEW-1"));
    assert_eq!(ids.lines().count(), 14);

    let o = Command::new(env!("CARGO_BIN_EXE_moproc"))
        .args(["run", "--task", "NEW-1", "--frames", "10", "--steps", "5", "--out"])
        .arg(dir.path().join("new"))
        .env("MOPROC_CORPUS", &corpus)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}
