use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn dir(name: &str) -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn write(d: &PathBuf, name: &str, text: &str) -> String {
    let p = d.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wllab")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn triangles(d: &PathBuf) -> (String, String) {
    let g = write(d, "k3k1.txt", "4 3\n0 1\n1 2\n0 2\n");
    let h = write(d, "p3k1.txt", "4 2\n0 1\n1 2\n");
    (g, h)
}

#[test]
fn wl_commands() {
    let d = dir("wl");
    let (g, h) = triangles(&d);
    let v = json(&run(&["wl", "distinguish", "--k", "2", "--rounds", "4", &g, &h]));
    assert_eq!(v["verdict"]["outcome"], "distinguished");
    let v = json(&run(&["wl", "distinguish", "--k", "1", "--rounds", "1", &g, &h]));
    assert_eq!(v["verdict"]["outcome"], "equivalent");
    let v = json(&run(&["wl", "run", "--k", "1", "--graph", &g]));
    assert_eq!(v["rounds"][0]["classes"], 1);
    assert_eq!(v["stable"], true);
    let c = write(&d, "colors.txt", "3 1\n");
    let v = json(&run(&["wl", "run", "--k", "1", "--rounds", "1", "--graph", &g, "--colors", &c]));
    assert_eq!(v["rounds"][0]["classes"], 2);
}

#[test]
fn usage_errors_exit_with_two() {
    let d = dir("usage");
    let (g, _) = triangles(&d);
    assert_eq!(run(&["wl", "distinguish", "--k", "2", &g, "/no/such/file.g6"]).status.code(), Some(2));
    assert_eq!(run(&["wl", "run", "--k", "2", "--graph", &g, "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["suite", "no-such-suite"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_wllab"))
        .args(["gen", "dh", "--n", "3"])
        .env("WLLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let bad = write(&d, "bad.txt", "3 1\n0 7\n");
    assert_eq!(run(&["wl", "run", "--k", "1", "--graph", &bad]).status.code(), Some(1));
}

#[test]
fn decomposition_commands() {
    let d = dir("rw");
    let c5 = write(&d, "c5.txt", "5 5\n0 1\n1 2\n2 3\n3 4\n0 4\n");
    let v = json(&run(&["rw", "exact", &c5]));
    assert_eq!(v["rank_width"], 2);
    let dec = write(&d, "c5.json", &v["decomposition"].to_string());
    let v = json(&run(&["rw", "validate", "--decomp", &dec, &c5]));
    assert_eq!(v["valid"], true);
    assert_eq!(v["report"]["width"], 2);
    let v = json(&run(&["rw", "balance", "--decomp", &dec, &c5]));
    assert!(v["after"]["width"].as_u64().unwrap() <= 4);
    let p2 = write(&d, "p2.txt", "2 1\n0 1\n");
    let out = run(&["rw", "validate", "--decomp", &dec, &p2]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn split_and_flip_commands() {
    let d = dir("flip");
    let k4 = write(&d, "k4.txt", "4 6\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n");
    let cut = write(&d, "cut.json", "[0, 1]");
    let v = json(&run(&["split", "pair", "--cut", &cut, &k4]));
    assert_eq!(v["a"], serde_json::json!([0]));
    assert_eq!(v["b"], serde_json::json!([2]));
    let k22 = write(&d, "k22.txt", "4 4\n0 2\n0 3\n1 2\n1 3\n");
    let built = run(&["flip", "build", "--cut", &cut, &k22]);
    let f = write(&d, "flip.json", &String::from_utf8(built.stdout).unwrap());
    let v = json(&run(&["flip", "apply", "--flip", &f, &k22]));
    assert_eq!(v["components"].as_array().unwrap().len(), 4);
    assert_eq!(v["edges"].as_array().unwrap().len(), 0);
    let outside = write(&d, "far.json", "[9]");
    assert_eq!(run(&["split", "pair", "--cut", &outside, &k4]).status.code(), Some(1));
}

#[test]
fn game_commands() {
    let d = dir("game");
    let k3 = write(&d, "k3.txt", "3 3\n0 1\n1 2\n0 2\n");
    let p3 = write(&d, "p3.txt", "3 2\n0 1\n1 2\n");
    let v = json(&run(&["game", "exhaust", "--pebbles", "2", "--rounds", "3", &k3, &p3]));
    assert_eq!(v["duplicator_survives"], false);
    let (g, h) = triangles(&d);
    let v = json(&run(&["game", "strategy", &g, &h]));
    assert_eq!(v["outcome"], "spoiler_wins");
    assert!(v["budget"]["pebbles_used_max"].as_u64().unwrap() <= 9);
    let v = json(&run(&["game", "strategy", "--no-finisher", "--duplicator", "heuristic", &g, &h]));
    assert_eq!(v["outcome"], "spoiler_wins");
}

#[test]
fn generators_are_seeded() {
    let a = run(&["gen", "dh", "--n", "9", "--seed", "4"]);
    let b = run(&["gen", "dh", "--n", "9", "--seed", "4"]);
    assert_eq!(a.stdout, b.stdout);
    let r = run(&["gen", "random", "--n", "5", "--p", "0", "--seed", "1", "--format", "edges"]);
    assert_eq!(String::from_utf8(r.stdout).unwrap(), "5 0\n");
    let d = dir("gen");
    let k4 = write(&d, "k4.txt", "4 6\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n");
    let out = run(&["gen", "cfi", "--base", &k4]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 2);
    assert_eq!(run(&["gen", "random", "--n", "3", "--p", "2"]).status.code(), Some(2));
}

#[test]
fn suite_reports() {
    let d = dir("suite");
    let a = d.join("a.json");
    let b = d.join("b.json");
    let r = d.join("r.json");
    for p in [&a, &b] {
        let out = run(&["suite", "main-theorem", "--max-n", "5", "--out", r.to_str().unwrap()]);
        assert!(out.status.success());
        assert!(String::from_utf8(out.stdout).unwrap().contains("PASS"));
        std::fs::rename(&r, p).unwrap();
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let report: Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["pass"], true);

    let hash = |k: &str| {
        let v = json(&run(&["suite", "game-equivalence", "--max-n", "2", "--k", k]));
        v["config_hash"].as_str().unwrap().to_string()
    };
    assert_ne!(hash("1"), hash("2"));

    let v = json(&run(&["suite", "balance", "--instances", "0"]));
    assert_eq!(v["pass"], true);
    assert_eq!(v["warnings"].as_array().unwrap().len(), 1);

    let out = Command::new(env!("CARGO_BIN_EXE_wllab"))
        .args(["suite", "lemma-3.6", "--instances", "20"])
        .env("WLLAB_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(json(&out), json(&run(&["suite", "lemma-3.6", "--instances", "20"])));
}
