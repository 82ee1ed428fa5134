use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use dirnet_cli::format;
use dirnet_core::network::{Role, Vertex, VertexId};
use dirnet_core::{Instance, Network, Point, Space};
use serde_json::Value;
use tempfile::TempDir;

fn dirnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn length_of(solution: &Path) -> f64 {
    let v: Value = serde_json::from_str(&fs::read_to_string(solution).unwrap()).unwrap();
    v["length"].as_f64().unwrap()
}

const TWO_POINTS: &str = r#"{"schema": "dirnet.instance/1",
  "space": {"kind": "euclidean", "dim": 2},
  "sources": [[0, 0]], "sinks": [[3, 4]]}"#;

const TRIANGLE: &str = r#"{"schema": "dirnet.instance/1",
  "space": {"kind": "euclidean", "dim": 2},
  "sources": [[0, 0], [1, 0]], "sinks": [[0.5, 0.8660254037844386]]}"#;

#[test]
fn solve_two_points() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", TWO_POINTS);
    let out = dir.path().join("s.json");
    let o = dirnet(&["solve", s(&inst), "-o", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(length_of(&out), 5.0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("0 steiner points"));
}

#[test]
fn solve_and_certify_triangle() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", TRIANGLE);
    let out = dir.path().join("s.json");
    let o = dirnet(&["solve", s(&inst), "--max-steiner", "1", "-o", s(&out)]);
    assert_eq!(code(&o), 0);
    assert!((length_of(&out) - 3f64.sqrt()).abs() < 1e-6);
    let o = dirnet(&["certify", s(&out)]);
    assert_eq!(code(&o), 0);
    let cert: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(cert["steiner_count"], 1);
}

#[test]
fn solution_files_round_trip() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", TRIANGLE);
    let o = dirnet(&["solve", s(&inst), "--max-steiner", "1"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let loaded = format::parse_solution(&text).unwrap();
    assert_eq!(format::to_canonical(&loaded.file), text);
}

#[test]
fn empty_sinks_are_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", &TWO_POINTS.replace("[[3, 4]]", "[]"));
    let o = dirnet(&["solve", s(&inst)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("sinks"));
}

#[test]
fn truncated_solution_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", TWO_POINTS);
    let o = dirnet(&["solve", s(&inst)]);
    let text = String::from_utf8(o.stdout).unwrap();
    let cut = write(&dir, "cut.json", &text[..text.len() / 2]);
    let o = dirnet(&["certify", s(&cut)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn tampered_solutions_are_rejected() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", TWO_POINTS);
    let text = String::from_utf8(dirnet(&["solve", s(&inst)]).stdout).unwrap();

    let moved = text.replacen("4.0000000000000000e0", "4.5000000000000000e0", 1);
    assert_ne!(moved, text);
    let p = write(&dir, "moved.json", &moved);
    let o = dirnet(&["certify", s(&p)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("digest"));

    let longer = text.replace(
        "\"length\": 5.0000000000000000e0",
        "\"length\": 6.0000000000000000e0",
    );
    assert_ne!(longer, text);
    let p = write(&dir, "longer.json", &longer);
    let o = dirnet(&["certify", s(&p)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("length"));
}

/// A chain a -> s1 -> ... -> s23 -> b on the x axis, written through the
/// file layer so its digest and length are valid.
fn chain_solution(vertices: usize) -> String {
    let space = Arc::new(Space::euclidean(2).unwrap());
    let inst = Instance::with_space(
        space.clone(),
        vec![Point::Coords(vec![0.0, 0.0])],
        vec![Point::Coords(vec![(vertices - 1) as f64, 0.0])],
        None,
    )
    .unwrap();
    let mut vs = inst.terminals();
    for i in 1..vertices - 1 {
        vs.insert(
            VertexId(i + 1),
            Vertex {
                role: Role::Steiner,
                location: Point::Coords(vec![i as f64, 0.0]),
            },
        );
    }
    let order: Vec<usize> = std::iter::once(0)
        .chain((1..vertices - 1).map(|i| i + 1))
        .chain(std::iter::once(1))
        .collect();
    let edges = order
        .windows(2)
        .map(|w| (VertexId(w[0]), VertexId(w[1])))
        .collect();
    let net = Network::new(space, vs, edges, inst.demand()).unwrap();
    format::to_canonical(&format::solution_file(&inst, &net, None, None))
}

#[test]
fn long_path_is_inconsistent() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "chain.json", &chain_solution(25));
    let o = dirnet(&["certify", s(&p)]);
    assert_eq!(code(&o), 1);
    let cert: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(cert["path_bound"], 20);
    assert_eq!(cert["max_path_vertices"], 25);
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(
        stderr.contains("path_too_long") && stderr.contains("\"bound\":20"),
        "{stderr}"
    );
}

#[test]
fn simplify_removes_a_relay() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "chain.json", &chain_solution(3));
    let out = dir.path().join("simple.json");
    let o = dirnet(&["simplify", s(&p), "-o", s(&out)]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["network"]["edges"], serde_json::json!([[0, 1]]));
    assert_eq!(v["network"]["vertices"].as_array().unwrap().len(), 2);
    assert_eq!(length_of(&out), 2.0);
}

#[test]
fn oracle_matches_solve_on_five_points() {
    let dir = TempDir::new().unwrap();
    let o = dirnet(&[
        "gen", "--space", "explicit", "--points", "5", "--seed", "11",
    ]);
    assert_eq!(code(&o), 0);
    let inst = write(&dir, "i.json", &String::from_utf8(o.stdout).unwrap());
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    assert_eq!(code(&dirnet(&["solve", s(&inst), "-o", s(&a)])), 0);
    assert_eq!(code(&dirnet(&["oracle", s(&inst), "-o", s(&b)])), 0);
    assert_eq!(length_of(&a), length_of(&b));
}

#[test]
fn reduce_med_on_a_cycle() {
    let dir = TempDir::new().unwrap();
    let d = write(
        &dir,
        "d.json",
        r#"{"schema": "dirnet.digraph/1", "vertices": ["x", "y", "z"],
            "arcs": [{"from": "x", "to": "y"}, {"from": "y", "to": "z"},
                     {"from": "z", "to": "x"}, {"from": "x", "to": "z"}]}"#,
    );
    let o = dirnet(&["reduce-med", s(&d)]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["arcs"].as_array().unwrap().len(), 3);
}

#[test]
fn reduce_med_names_an_unreachable_pair() {
    let dir = TempDir::new().unwrap();
    let d = write(
        &dir,
        "d.json",
        r#"{"schema": "dirnet.digraph/1", "vertices": ["x", "y"],
            "arcs": [{"from": "x", "to": "y"}]}"#,
    );
    let o = dirnet(&["reduce-med", s(&d)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("y cannot reach x"));
}

#[test]
fn budget_over_the_ceiling_is_refused() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", TWO_POINTS);
    let o = dirnet(&["solve", s(&inst), "--max-steiner", "20"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn point_to_point_is_solved_but_not_certified() {
    let dir = TempDir::new().unwrap();
    let inst = write(
        &dir,
        "i.json",
        r#"{"schema": "dirnet.instance/1", "space": {"kind": "euclidean", "dim": 2},
            "sources": [[0, 0], [0, 10]], "sinks": [[1, 0], [1, 10]],
            "pairs": [[0, 0], [1, 1]]}"#,
    );
    let out = dir.path().join("s.json");
    assert_eq!(code(&dirnet(&["solve", s(&inst), "-o", s(&out)])), 0);
    assert_eq!(length_of(&out), 2.0);
    assert_eq!(code(&dirnet(&["certify", s(&out)])), 2);
    let o = dirnet(&[
        "solve",
        s(&inst),
        "--variant",
        "all-pairs",
        "--max-steiner",
        "0",
    ]);
    assert_eq!(code(&o), 0);
}

#[test]
fn gen_is_deterministic() {
    for space in ["euclidean", "rectilinear", "explicit", "graph", "digraph"] {
        let a = dirnet(&["gen", "--space", space, "--seed", "5"]);
        let b = dirnet(&["gen", "--space", space, "--seed", "5"]);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout);
    }
    let text = String::from_utf8(dirnet(&["gen", "--seed", "5"]).stdout).unwrap();
    assert_eq!(
        format::write_instance(&format::parse_instance(&text).unwrap()),
        text
    );
}

#[test]
fn text_reports() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", TWO_POINTS);
    let o = dirnet(&["solve", s(&inst), "--format", "text"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(
        text.starts_with("length: 5.0000000000000000e0\nsteiner points: 0\n"),
        "{text}"
    );
}

#[test]
fn bad_flags_exit_with_input_error() {
    assert_eq!(code(&dirnet(&["solve"])), 2);
    assert_eq!(code(&dirnet(&["frobnicate"])), 2);
}
