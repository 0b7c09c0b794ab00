use std::path::Path;
use std::process::Command;

use signflip::io::write_problem;
use signflip_core::problems::random::{diagonal_spec, rng, ObjectiveKind};
use signflip_core::problems::build_diagonal;

fn signflip(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_signflip")).args(args).output().expect("binary runs")
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn solve_is_deterministic_without_timings() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        let out = signflip(&["solve", "--problem", "diffusion", "--m-side", "7", "--no-timings", "--out-dir", d.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let line = String::from_utf8(out.stdout).unwrap();
        assert!(line.starts_with("problem=diffusion rule=field objective="), "{line}");
    }
    for f in ["trace.csv", "design.json", "field.csv", "edges.csv", "manifest.json"] {
        assert_eq!(read(&a, f), read(&b, f), "{f}");
    }
    let trace = String::from_utf8(read(&a, "trace.csv")).unwrap();
    assert!(trace.lines().skip(1).all(|l| l.ends_with(',')), "{trace}");
}

#[test]
fn control_run_writes_a_trajectory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"problem": "control", "control": {"horizon": 20}}"#).unwrap();
    let out = signflip(&["solve", "--config", cfg.to_str().unwrap(), "--out-dir", tmp.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let traj = String::from_utf8(read(tmp.path(), "trajectory.csv")).unwrap();
    assert_eq!(traj.lines().next().unwrap(), "t,e1,e2,e3,u1,u2,g1,g2,g3");
    assert_eq!(traj.lines().count(), 21);
}

#[test]
fn oracle_on_a_custom_problem() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("tiny.json");
    let spec = diagonal_spec(&mut rng(4), 6, ObjectiveKind::Quadratic).unwrap();
    write_problem(&input, &build_diagonal(&spec).unwrap()).unwrap();
    let out = signflip(&["oracle", "--problem", "custom", "--input", input.to_str().unwrap(), "--out-dir", tmp.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let line = String::from_utf8(out.stdout).unwrap();
    assert!(line.starts_with("global objective="), "{line}");
    assert!(line.contains("dominance=ok"), "{line}");
    let signs = line.split("signs=").nth(1).unwrap().split(' ').next().unwrap();
    assert_eq!(signs.len(), 6);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap();
    assert_eq!(signflip(&["solve", "--problem", "diffusion", "--m-side", "1", "--out-dir", dir]).status.code(), Some(2));
    assert_eq!(signflip(&["solve", "--problem", "custom", "--out-dir", dir]).status.code(), Some(2));
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"problem": "acoustic"}"#).unwrap();
    assert_eq!(signflip(&["solve", "--config", bad.to_str().unwrap(), "--out-dir", dir]).status.code(), Some(2));
    assert_eq!(signflip(&["solve", "--problem", "diffusion", "--epsilon", "-1", "--out-dir", dir]).status.code(), Some(2));
    // comfort band that no input can reach from the ambient swing in time
    let infeasible = tmp.path().join("hot.json");
    std::fs::write(&infeasible, r#"{"problem": "control", "control": {"horizon": 10, "comfort_min": 0.0, "comfort_max": 0.0, "b_in": [0.0, 0.0]}}"#).unwrap();
    assert_eq!(signflip(&["solve", "--config", infeasible.to_str().unwrap(), "--out-dir", dir]).status.code(), Some(1));
    assert_eq!(signflip(&["oracle", "--problem", "diffusion", "--m-side", "5", "--max-m", "8", "--out-dir", dir]).status.code(), Some(2));
}

#[test]
fn verify_passes() {
    let out = signflip(&["verify"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 6, "{text}");
}
