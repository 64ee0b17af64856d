//! End-to-end checks of the `ses` binary: exit codes, output wiring, and
//! cross-subcommand agreement.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ses"))
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ses-cli-test-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const OPEN_MAP: &str = "type octile\nheight 4\nwidth 4\nmap\n....\n....\n....\n....\n";

#[test]
fn plan_on_an_empty_scenario_exits_2() {
    let dir = workdir("empty-scen");
    let map = write(&dir, "m.map", OPEN_MAP);
    let scen = write(&dir, "s.scen", "version 1\n");
    let out = run(&["plan", "--map", &map, "--scen", &scen, "--agents", "1"], &dir);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn plan_single_agent_open_map_finds_a_shortest_path() {
    let dir = workdir("single");
    let map = write(&dir, "m.map", OPEN_MAP);
    let scen = write(&dir, "s.scen", "version 1\n0\tm.map\t4\t4\t0\t0\t3\t3\t6\n");
    let sol_path = dir.join("sol.json").to_string_lossy().into_owned();
    let out = run(
        &["plan", "--map", &map, "--scen", &scen, "--agents", "1", "--out", &sol_path],
        &dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let sol: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&sol_path).unwrap()).unwrap();
    let path = sol["agents"][0]["path"].as_array().unwrap();
    assert_eq!(path.last().unwrap()[2], 6, "manhattan-distance travel time");

    let check = run(
        &["validate", "--map", &map, "--scen", &scen, "--solution", &sol_path],
        &dir,
    );
    assert!(check.status.success());
    assert_eq!(stdout(&check).trim(), "ok");
}

#[test]
fn generated_instances_validate_end_to_end() {
    let dir = workdir("gen");
    let sol = dir.join("sol.json").to_string_lossy().into_owned();
    let map = dir.join("g.map").to_string_lossy().into_owned();
    let scen = dir.join("g.scen").to_string_lossy().into_owned();
    let out = run(
        &[
            "plan", "--gen", "6x6", "--density", "0.1", "--agents", "3", "--seed", "9",
            "--out", &sol, "--out-map", &map, "--out-scen", &scen,
        ],
        &dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let check = run(&["validate", "--map", &map, "--scen", &scen, "--solution", &sol], &dir);
    assert!(check.status.success(), "{}", stdout(&check));
}

#[test]
fn validate_reports_violations_with_exit_1() {
    let dir = workdir("invalid");
    let map = write(&dir, "m.map", OPEN_MAP);
    let scen = write(
        &dir,
        "s.scen",
        "version 1\n0\tm.map\t4\t4\t0\t0\t2\t0\t2\n0\tm.map\t4\t4\t2\t0\t0\t0\t2\n",
    );
    // Head-on swap: both agents drive through each other.
    let sol = write(
        &dir,
        "bad.json",
        r#"{"agents":[
            {"id":0,"path":[[0,0,0],[1,0,1],[2,0,2]]},
            {"id":1,"path":[[2,0,0],[1,0,1],[0,0,2]]}
        ]}"#,
    );
    let out = run(&["validate", "--map", &map, "--scen", &scen, "--solution", &sol], &dir);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("violation:"));
}

fn generate_solution(dir: &Path, seed: &str) -> String {
    let sol = dir.join(format!("sol{seed}.json")).to_string_lossy().into_owned();
    let out = run(
        &["plan", "--gen", "7x7", "--density", "0.1", "--agents", "3", "--seed", seed, "--out", &sol],
        dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    sol
}

#[test]
fn replan_with_no_delays_is_the_identity() {
    let dir = workdir("replan-id");
    let sol = generate_solution(&dir, "4");
    let delays = write(&dir, "none.json", "[]");
    let out = run(&["replan", "--solution", &sol, "--delays", &delays], &dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let line = stdout(&out);
    let fields: Vec<&str> = line.split_whitespace().collect();
    assert_eq!(fields.len(), 5, "pre post explored pruned runtime_us");
    assert_eq!(fields[0], fields[1], "post equals pre");
    assert_eq!(fields[2], "1", "explored only the root");
}

#[test]
fn replan_algorithms_agree_with_the_oracle() {
    let dir = workdir("replan-agree");
    let sol = generate_solution(&dir, "5");
    let delays = write(&dir, "d.json", r#"[{"agent":0,"at_index":0,"delta":4}]"#);
    let mut posts = Vec::new();
    for algo in ["gses", "eses", "oracle"] {
        let out = run(
            &["replan", "--solution", &sol, "--delays", &delays, "--algo", algo],
            &dir,
        );
        assert!(out.status.success(), "{algo}: {}", String::from_utf8_lossy(&out.stderr));
        let line = stdout(&out);
        let fields: Vec<u64> = line
            .split_whitespace()
            .map(|f| f.parse().unwrap())
            .collect();
        assert!(fields[1] <= fields[0], "{algo}: post <= pre");
        posts.push(fields[1]);
    }
    assert_eq!(posts[0], posts[1], "gses == eses");
    assert_eq!(posts[0], posts[2], "gses == oracle");
}

#[test]
fn replan_writes_decisions_and_graph() {
    let dir = workdir("replan-out");
    let sol = generate_solution(&dir, "6");
    let delays = write(&dir, "d.json", r#"[{"agent":1,"at_index":0,"delta":3}]"#);
    let plan = dir.join("plan.json").to_string_lossy().into_owned();
    let out = run(
        &["replan", "--solution", &sol, "--delays", &delays, "--out", &plan],
        &dir,
    );
    assert!(out.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&plan).unwrap()).unwrap();
    assert!(doc["decisions"].is_array());
    assert!(doc["tpg"]["agents"].is_array());
    assert!(doc["tpg"]["type2_edges"].is_array());
}

#[test]
fn oracle_subcommand_prints_costs() {
    let dir = workdir("oracle");
    let sol = generate_solution(&dir, "8");
    let delays = write(&dir, "d.json", r#"[{"agent":0,"at_index":0,"delta":3}]"#);
    let out = run(&["oracle", "--solution", &sol, "--delays", &delays], &dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let line = stdout(&out);
    let fields: Vec<u64> = line.split_whitespace().map(|f| f.parse().unwrap()).collect();
    assert_eq!(fields.len(), 4, "pre post switchable runtime_us");
    assert!(fields[1] <= fields[0]);
}

#[test]
fn simulate_runs_configs_and_respects_p_zero() {
    let dir = workdir("simulate");
    let config = write(
        &dir,
        "exp.toml",
        r#"
algos = ["gses", "eses"]
time_limit_s = 30

[delay]
p = 0.3
delta_min = 2
delta_max = 4
seed = 5

[[trials]]
name = "block"
width = 6
height = 6
agents = 3
obstacle_density = 0.1
seeds = [1, 2]
"#,
    );
    let out = run(&["simulate", "--config", &config, "--jobs", "2"], &dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "map,n_agents,scenario,seed,algo,replan_idx,delta_sum,pre_cost,post_cost,explored,pruned,runtime_us,timed_out"
    );
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty(), "p=0.3 produces replan rows");
    // Paired algos report identical optimal costs per replan point.
    let mut posts: std::collections::BTreeMap<(String, String), Vec<String>> =
        Default::default();
    for row in &rows {
        let cols: Vec<&str> = row.split(',').collect();
        posts
            .entry((cols[3].into(), cols[5].into()))
            .or_default()
            .push(cols[8].into());
    }
    for ((seed, idx), values) in posts {
        assert_eq!(values.len(), 2, "seed {seed} replan {idx} present for both algos");
        assert_eq!(values[0], values[1], "seed {seed} replan {idx}");
    }

    let quiet = write(
        &dir,
        "quiet.toml",
        r#"
algos = ["gses"]
[delay]
p = 0.0
[[trials]]
name = "calm"
width = 5
height = 5
agents = 2
seeds = [3]
"#,
    );
    let out = run(&["simulate", "--config", &quiet], &dir);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 1, "header only, no replans");
}

#[test]
fn simulate_rejects_bad_config_with_exit_2() {
    let dir = workdir("bad-config");
    let config = write(&dir, "bad.toml", "algos = []\n");
    let out = run(&["simulate", "--config", &config], &dir);
    assert_eq!(out.status.code(), Some(2));
}
