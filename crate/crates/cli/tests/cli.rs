use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_benjamin"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&read(path)).unwrap()
}

const SMALL: [&str; 4] = ["--n", "512", "--L", "62.83185307179586"];

#[test]
fn solve_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = ["solve", "--omega", "1", "--p", "3", "--n", "2048", "--L", "314.159"];
    assert!(run(&args, &a).status.success());
    assert!(run(&args, &b).status.success());
    for f in ["wave.csv", "wave.json", "wave.grid.json"] {
        assert_eq!(read(&a.join(f)), read(&b.join(f)), "{f}");
    }
    let m = json(&a.join("manifest.json"));
    assert_eq!(m["status"], "ok");
    assert_eq!(m["command"], "solve");
    let files: Vec<&str> = m["artifact_files"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(files.contains(&"wave.csv") && files.contains(&"wave.json"));
    assert!(m["duration_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn physical_then_solve_matches_direct_solve() {
    let dir = tempfile::tempdir().unwrap();
    let phys = dir.path().join("phys");
    assert!(run(&["physical", "--c", "1.3", "--gamma", "1.7"], &phys).status.success());
    let omega = json(&phys.join("physical.json"))["omega"].as_f64().unwrap();
    assert_eq!(omega, 4.0 * 1.3 / (1.7 * 1.7) - 1.0);

    let via = dir.path().join("via");
    let direct = dir.path().join("direct");
    let mut a = vec!["solve", "--c", "1.3", "--gamma", "1.7", "--p", "4"];
    a.extend(SMALL);
    let w = format!("{omega}");
    let mut b = vec!["solve", "--omega", w.as_str(), "--p", "4"];
    b.extend(SMALL);
    assert!(run(&a, &via).status.success());
    assert!(run(&b, &direct).status.success());
    assert_eq!(read(&via.join("wave.csv")), read(&direct.join("wave.csv")));
    assert_eq!(read(&via.join("wave.json")), read(&direct.join("wave.json")));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve", "--omega", "-1", "--p", "3"], &dir.path().join("neg"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ω > 0"));
    let m = json(&dir.path().join("neg/manifest.json"));
    assert!(m["status"].as_str().unwrap().starts_with("usage error"));

    let out = run(&["solve", "--bogus"], &dir.path().join("x"));
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["physical", "--c", "1"], &dir.path().join("y"));
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["maximize", "--problem", "gn", "--alpha", "1", "--p", "8"], &dir.path().join("z"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn computational_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["solve", "--omega", "1", "--p", "3", "--max-iter", "2", "--route", "fixedpoint"];
    args.extend(SMALL);
    let out = run(&args, &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"omega": 2.0, "p": 4.0, "n": 256, "L": 40.0, "tol": 1e-9}"#).unwrap();
    let out = dir.path().join("o");
    let status = run(&["solve", "--config", cfg.to_str().unwrap(), "--omega", "1.5"], &out).status;
    assert!(status.success());
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["config"]["params"]["omega"].as_f64(), Some(1.5));
    assert_eq!(m["config"]["params"]["p"].as_f64(), Some(4.0));
    assert_eq!(m["config"]["grid"]["n"].as_u64(), Some(256));
    assert_eq!(m["config"]["solver"]["tol"].as_f64(), Some(1e-9));

    std::fs::write(&cfg, r#"{"omgea": 2.0}"#).unwrap();
    let out = run(&["solve", "--config", cfg.to_str().unwrap()], &dir.path().join("bad"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_evolve_and_greens_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = dir.path().join("sweep");
    let mut args = vec!["sweep", "--p", "3", "--alpha", "0.5", "--alpha", "1", "--alpha", "2"];
    args.extend(SMALL);
    assert!(run(&args, &sweep).status.success());
    let t = json(&sweep.join("sweep.json"));
    assert_eq!(t["rows"].as_array().unwrap().len(), 3);
    assert_eq!(t["quotient_decreasing"], true);

    let ev = dir.path().join("evolve");
    let mut args = vec!["evolve", "--omega", "1", "--p", "3", "--dt", "0.01", "--t-final", "1", "--eps", "1e-3"];
    args.extend(SMALL);
    assert!(run(&args, &ev).status.success());
    let rows = read(&ev.join("trajectory.csv")).lines().count();
    // header, t = 0, t = 1 (100 steps, default stride 100)
    assert_eq!(rows, 3);
    assert!(json(&ev.join("evolve.json"))["drift"]["mass"].as_f64().unwrap() < 1e-12);

    let frames = dir.path().join("frames");
    args.push("--frame-files");
    assert!(run(&args, &frames).status.success());
    assert!(frames.join("frames/frame_000001.csv").exists());

    let gr = dir.path().join("greens");
    assert!(run(&["greens", "--omega", "1", "--n", "4096", "--L", "628.3185307179586"], &gr).status.success());
    assert!(json(&gr.join("greens.json"))["weighted_tail_max"].as_f64().unwrap() > 0.0);
}

#[test]
fn index_reports_instability() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("idx");
    let args = ["index", "--omega", "10", "--p", "10", "--n", "512", "--L", "31.41592653589793"];
    assert!(run(&args, &out).status.success());
    assert_eq!(json(&out.join("index.json"))["verdict"], "Unstable");
    assert_eq!(json(&out.join("verdict.json"))["verdict"], "Unstable");
}
