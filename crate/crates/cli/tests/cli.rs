use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cusptree::group_models::{cayley_ball, GroupModel};
use cusptree::metric_graph::families::{cycle, path, theta};
use cusptree::metric_graph::MetricGraph;
use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cusptree"));
    c.env("CUSPTREE_THREADS", "2");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

struct Dir(TempDir);

impl Dir {
    fn new() -> Self {
        Dir(TempDir::new().unwrap())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    fn s(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }

    fn write(&self, name: &str, v: &Value) -> String {
        std::fs::write(self.path(name), serde_json::to_string(v).unwrap()).unwrap();
        self.s(name)
    }

    fn graph(&self, name: &str, g: &MetricGraph) -> String {
        self.write(name, &serde_json::to_value(g.to_json()).unwrap())
    }

    fn read(&self, name: &str) -> Value {
        read(&self.path(name))
    }
}

fn read(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn f2_comm(d: &Dir) -> String {
    d.write(
        "f2_comm.json",
        &json!({"family": "free", "rank": 2, "peripherals": [{"name": "P", "generators": ["aba-b-"]}]}),
    )
}

fn ok(o: &Output) {
    assert_eq!(code(o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn build_cusped_records_depths_and_run() {
    let d = Dir::new();
    let spec = f2_comm(&d);
    ok(&run(&["build", "cusped", "--spec", &spec, "--radius", "4", "--depth", "3", "-o", &d.s("x.json")]));
    let x = d.read("x.json");
    let n = x["n"].as_u64().unwrap() as usize;
    assert_eq!(x["depth"].as_array().unwrap().len(), n);
    assert_eq!(x["max_depth"], 3);
    assert!(x["depth"].as_array().unwrap().iter().any(|v| v == 3));
    let runcfg = &x["run"];
    assert_eq!(runcfg["command"], "build");
    assert_eq!(runcfg["parameters"]["radius"], 4);
    let hash = runcfg["inputs"][0]["sha256"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert_eq!(x["group"]["family"], "free");

    // same inputs, same bytes
    ok(&run(&["build", "cusped", "--spec", &spec, "--radius", "4", "--depth", "3", "-o", &d.s("x2.json")]));
    let a = std::fs::read_to_string(d.path("x.json")).unwrap();
    let b = std::fs::read_to_string(d.path("x2.json")).unwrap().replace("x2.json", "x.json");
    assert_eq!(a, b);
}

#[test]
fn build_coned_has_cones() {
    let d = Dir::new();
    let spec = f2_comm(&d);
    ok(&run(&["build", "coned", "--spec", &spec, "--radius", "3", "-o", &d.s("c.json")]));
    let c = d.read("c.json");
    let cones = c["cones"].as_array().unwrap();
    assert!(!cones.is_empty());
    assert_eq!(cones.len(), c["pieces"].as_array().unwrap().len());
}

#[test]
fn build_dot_output_carries_run_comment() {
    let d = Dir::new();
    let spec = f2_comm(&d);
    ok(&run(&["build", "cusped", "--spec", &spec, "--radius", "2", "--format", "dot", "-o", &d.s("x.dot")]));
    let text = std::fs::read_to_string(d.path("x.dot")).unwrap();
    assert!(text.starts_with("// run: {"));
    assert!(text.contains("graph cusped"));
}

#[test]
fn build_rejects_bad_specs() {
    let d = Dir::new();
    let spec = d.write("bad.json", &json!({"family": "braid", "rank": 3}));
    let o = run(&["build", "cusped", "--spec", &spec, "--radius", "2", "-o", &d.s("x.json")]);
    assert_eq!(code(&o), 2);
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
    assert!(!d.path("x.json").exists());
}

#[test]
fn delta_examples() {
    let d = Dir::new();
    let tree = d.graph("tree.json", &cayley_ball(&GroupModel::free(2).unwrap(), 2).graph);
    ok(&run(&["delta", "--space", &tree, "-o", &d.s("t.json")]));
    assert_eq!(d.read("t.json")["delta_doubled"], 0);

    let c4 = d.graph("c4.json", &cycle(4));
    ok(&run(&["delta", "--space", &c4, "-o", &d.s("c.json")]));
    let r = d.read("c.json");
    assert_eq!(r["delta_doubled"], 2);
    assert_eq!(r["delta"], 1.0);

    let o = run(&["delta", "--space", &c4, "--mode", "sampled", "-o", &d.s("s.json")]);
    assert_eq!(code(&o), 2);
    ok(&run(&["delta", "--space", &c4, "--mode", "sampled", "--seed", "5", "--samples", "50", "-o", &d.s("s.json")]));
    let s = d.read("s.json");
    assert_eq!(s["run"]["parameters"]["seed"], 5);
    assert!(s["delta_doubled"].as_i64().unwrap() <= 2);
}

#[test]
fn tree_examples() {
    let d = Dir::new();
    let c8 = d.graph("c8.json", &cycle(8));
    ok(&run(&["tree", "--graph", &c8, "-o", &d.s("c8t.json")]));
    let t = d.read("c8t.json");
    assert_eq!(t["vertices"], json!([{"type": "necklace", "set": [0, 1, 2, 3, 4, 5, 6, 7]}]));

    let th = d.graph("theta.json", &theta(4));
    ok(&run(&["tree", "--graph", &th, "-o", &d.s("tt.json")]));
    let t = d.read("tt.json");
    assert_eq!(t["vertices"].as_array().unwrap().len(), 4);
    assert_eq!(t["edges"], json!([[0, 1], [0, 2], [0, 3]]));

    ok(&run(&["tree", "--graph", &th, "--format", "dot", "-o", &d.s("tt.dot")]));
    assert!(std::fs::read_to_string(d.path("tt.dot")).unwrap().contains("diamond"));

    let split = d.write("split.json", &json!({"n": 4, "edges": [[0, 1], [2, 3]]}));
    assert_eq!(code(&run(&["tree", "--graph", &split, "-o", &d.s("x.json")])), 2);
}

fn z_line(d: &Dir) -> String {
    // Z with peripheral Z: one piece covering the whole ball, so the cusped
    // space is a single horoball over a path
    let spec = d.write(
        "z.json",
        &json!({"family": "free_abelian", "rank": 1, "peripherals": [{"name": "A", "generators": ["a"]}]}),
    );
    ok(&run(&["build", "cusped", "--spec", &spec, "--radius", "6", "--depth", "3", "-o", &d.s("zx.json")]));
    d.s("zx.json")
}

#[test]
fn qi_identity_map() {
    let d = Dir::new();
    let c6 = d.graph("c6.json", &cycle(6));
    let map = d.write("id.json", &json!({"map": [0, 1, 2, 3, 4, 5]}));
    ok(&run(&["qi", "--map", &map, "--source", &c6, "--target", &c6, "--lambda", "1", "-o", &d.s("r.json")]));
    let r = d.read("r.json");
    assert_eq!(r["report"]["k"], json!([1, 1]));
    assert_eq!(r["report"]["c"], json!([0, 1]));
    assert_eq!(r["report"]["bound_checked"]["pass"], true);
    assert_eq!(r["run"]["inputs"].as_array().unwrap().len(), 3);
}

#[test]
fn qi_horoball_extension_passes() {
    let d = Dir::new();
    let x = z_line(&d);
    let n0 = read(Path::new(&x))["depth"].as_array().unwrap().iter().filter(|v| **v == 0).count();
    // reflection of the ball of Z: a ↔ a-, fixing the identity
    let words: Vec<String> = cayley_ball(&GroupModel::free_abelian(1).unwrap(), 6)
        .words
        .iter()
        .map(|w| GroupModel::free_abelian(1).unwrap().render(w))
        .collect();
    let mirror: Vec<usize> = words
        .iter()
        .map(|w| {
            let m = if w.is_empty() { String::new() } else if w.contains('-') { w.replace('-', "") } else { w.chars().map(|c| format!("{c}-")).collect() };
            words.iter().position(|u| *u == m).unwrap()
        })
        .collect();
    assert_eq!(mirror.len(), n0);
    let map = d.write("m.json", &json!({"map": mirror, "correspondence": [[0, 0]]}));
    ok(&run(&["qi", "--map", &map, "--source", &x, "--target", &x, "-o", &d.s("r.json")]));
    let r = d.read("r.json");
    assert_eq!(r["mode"], "cusped_extension");
    assert_eq!(r["report"]["bound_checked"]["pass"], true);
    assert_eq!(r["measurement"]["offset_t"], 0);
}

#[test]
fn qi_depth_zero_map_needs_correspondence() {
    let d = Dir::new();
    let x = z_line(&d);
    let n0 = read(Path::new(&x))["depth"].as_array().unwrap().iter().filter(|v| **v == 0).count();
    let map = d.write("m.json", &json!({"map": (0..n0).collect::<Vec<_>>()}));
    let o = run(&["qi", "--map", &map, "--source", &x, "--target", &x, "-o", &d.s("r.json")]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("correspondence"));
}

#[test]
fn qi_bound_violation_exits_one() {
    let d = Dir::new();
    let p = d.graph("p.json", &path(10));
    let mut m: Vec<usize> = (0..10).collect();
    m[1] = 9;
    let map = d.write("m.json", &json!({"map": m}));
    let o = run(&["qi", "--map", &map, "--source", &p, "--target", &p, "--lambda", "1/2", "-o", &d.s("r.json")]);
    assert_eq!(code(&o), 1);
    let r = d.read("r.json");
    assert_eq!(r["report"]["bound_checked"]["pass"], false);
    assert!(r["report"]["bound_checked"]["violations"].as_u64().unwrap() > 0);
}

#[test]
fn sphere_examples() {
    let d = Dir::new();
    let t = d.graph("t.json", &cayley_ball(&GroupModel::free(2).unwrap(), 3).graph);
    ok(&run(&["sphere", "--space", &t, "--radius", "2", "--threshold", "1", "-o", &d.s("s.json")]));
    let s = d.read("s.json");
    assert_eq!(s["n"], 12);
    assert_eq!(s["edges"].as_array().unwrap().len(), 12);
    assert_eq!(s["diagnostic"], true);
    assert_eq!(s["pipeline"]["components"].as_array().unwrap().len(), 4);

    ok(&run(&["sphere", "--space", &t, "--radius", "2", "--threshold", "4", "-o", &d.s("k.json")]));
    let k = d.read("k.json");
    assert_eq!(k["edges"].as_array().unwrap().len(), 66);

    // the sphere file is itself a graph file
    ok(&run(&["tree", "--graph", &d.s("k.json"), "-o", &d.s("kt.json")]));
    assert_eq!(d.read("kt.json")["vertices"][0]["type"], "rigid");

    assert_eq!(code(&run(&["sphere", "--space", &t, "--radius", "0", "-o", &d.s("z.json")])), 2);
}

#[test]
fn sphere_default_threshold_on_cusped_space() {
    let d = Dir::new();
    let spec = f2_comm(&d);
    ok(&run(&["build", "cusped", "--spec", &spec, "--radius", "2", "--depth", "2", "-o", &d.s("x.json")]));
    ok(&run(&["sphere", "--space", &d.s("x.json"), "--radius", "2", "-o", &d.s("s.json")]));
    let s = d.read("s.json");
    assert!(s["run"]["parameters"]["resolved_threshold"].is_u64());
    assert_eq!(s["horoball_of"].as_array().unwrap().len(), s["n"].as_u64().unwrap() as usize);
}

#[test]
fn scan_writes_csv_and_sidecar() {
    let d = Dir::new();
    ok(&run(&["scan", "--recipe", "free-abelian", "--params", "1,2,3", "-o", &d.s("scan.csv")]));
    let csv = std::fs::read_to_string(d.path("scan.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "recipe,param,vertices,delta_doubled,witness,mode,seed");
    assert_eq!(lines.len(), 4);
    let side = d.read("scan.csv.run.json");
    assert_eq!(side["run"]["command"], "scan");
    assert_eq!(side["run"]["parameters"]["params"], json!([1, 2, 3]));

    let o = run(&["scan", "--recipe", "free", "--params", "2", "--mode", "sampled", "-o", &d.s("s.csv")]);
    assert_eq!(code(&o), 2);
    ok(&run(&["scan", "--recipe", "horoball-cycle", "--params", "8", "--mode", "sampled", "--seed", "1", "-o", &d.s("s.csv")]));
    assert!(std::fs::read_to_string(d.path("s.csv")).unwrap().contains("sampled"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["tree"])), 2);
    let d = Dir::new();
    assert_eq!(code(&run(&["tree", "--graph", &d.s("missing.json"), "-o", &d.s("o.json")])), 2);
}
