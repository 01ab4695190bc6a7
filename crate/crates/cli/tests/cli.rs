use std::path::Path;
use std::process::Command;

fn dynsc(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dynsc")).args(args).output().expect("binary runs")
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn generate_and_replay_resistance_stream() {
    let dir = tempfile::tempdir().unwrap();
    let (g, s, out) = (p(dir.path(), "g.txt"), p(dir.path(), "s.txt"), p(dir.path(), "out.csv"));
    assert!(dynsc(&["gen", "graph", "--kind", "gnp", "--n", "20", "--p", "0.3", "--seed", "1", "--out", &g]).status.success());
    assert!(dynsc(&["gen", "stream", "--graph", &g, "--kind", "mixed", "--length", "60", "--seed", "1", "--out", &s]).status.success());
    let r = dynsc(&["run", "--graph", &g, "--stream", &s, "--mode", "er", "--beta", "0.3", "--eps", "0.5", "--seed", "1", "--oracle", "--out", &out]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("# dynsc-run v1 mode=er algo=dynamic"));
    assert_eq!(csv.lines().count(), 60 + 3);
    assert!(csv.lines().last().unwrap().starts_with("summary,"));
}

#[test]
fn identical_seeds_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (p(dir.path(), "a.txt"), p(dir.path(), "b.txt"));
    let g = p(dir.path(), "g.txt");
    dynsc(&["gen", "graph", "--kind", "bounded", "--n", "30", "--degree", "5", "--seed", "4", "--out", &g]);
    for f in [&a, &b] {
        dynsc(&["gen", "stream", "--graph", &g, "--kind", "query-heavy", "--length", "100", "--seed", "9", "--out", f]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn solver_mode_with_demand_file() {
    let dir = tempfile::tempdir().unwrap();
    let (g, d, s) = (p(dir.path(), "g.txt"), p(dir.path(), "d.txt"), p(dir.path(), "s.txt"));
    dynsc(&["gen", "graph", "--kind", "bounded", "--n", "25", "--degree", "6", "--seed", "2", "--out", &g]);
    dynsc(&["gen", "demand", "--graph", &g, "--seed", "2", "--out", &d]);
    dynsc(&["gen", "solver-stream", "--graph", &g, "--demand", &d, "--length", "20", "--max-degree", "6", "--seed", "2", "--out", &s]);
    let r = dynsc(&[
        "run", "--graph", &g, "--stream", &s, "--demand", &d, "--mode", "energy", "--beta", "0.3", "--eps", "0.25", "--c-rho", "4",
        "--max-degree", "6", "--oracle",
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(String::from_utf8_lossy(&r.stdout).contains(",EN,"));
}

#[test]
fn malformed_stream_fails_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let (g, s) = (p(dir.path(), "g.txt"), p(dir.path(), "s.txt"));
    dynsc(&["gen", "graph", "--kind", "snake", "--n", "12", "--out", &g]);
    std::fs::write(&s, "Q 0 11\nQ 0\n").unwrap();
    let r = dynsc(&["run", "--graph", &g, "--stream", &s]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("line 2"));
}

#[test]
fn rejected_op_gives_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let (g, s) = (p(dir.path(), "g.txt"), p(dir.path(), "s.txt"));
    dynsc(&["gen", "graph", "--kind", "gnp", "--n", "10", "--p", "0.5", "--out", &g]);
    std::fs::write(&s, "D 0 0\n").unwrap();
    let r = dynsc(&["run", "--graph", &g, "--stream", &s, "--algo", "recompute"]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn load_experiment_csv() {
    let out = dynsc(&["load", "--k", "16,32"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    assert_eq!(text.lines().count(), 4);
}
