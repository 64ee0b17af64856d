//! Browser demo bindings: three JSON-in/JSON-out operations behind
//! `wasm-bindgen`, driven by the static page in `www/`.
//!
//! Everything returns an envelope `{"ok": ...}` or `{"error": "..."}` so the
//! page never deals with thrown values. The functions also compile and run
//! natively, which is how they are unit tested.

use serde::Serialize;
use ses_core::planner::generate_instance;
use ses_core::search::{
    brute_force_optimal, naive_fix_all, ses_search, EsesModules, GsesModules, SearchOptions,
};
use ses_core::sim::Algo;
use ses_core::solution::{solution_from_json, solution_to_json, validate_solution};
use ses_core::stpg::{construct_stpg, delays_from_json, DelayEvent};
use ses_core::tpg::{
    build_tpg, exec_tpg, replay_frames, ExecReport, ExecutionState, Tpg, VertexId,
};
use ses_core::{Cell, Cost, GridMap, MapfSolution};
use wasm_bindgen::prelude::*;

fn envelope<T: Serialize>(result: Result<T, String>) -> String {
    let value = match result {
        Ok(ok) => serde_json::json!({ "ok": ok }),
        Err(error) => serde_json::json!({ "error": error }),
    };
    value.to_string()
}

fn grid_rows(map: &GridMap) -> Vec<String> {
    (0..map.height())
        .map(|y| {
            (0..map.width())
                .map(|x| if map.is_blocked(Cell::new(x, y)) { '@' } else { '.' })
                .collect()
        })
        .collect()
}

type FramesJson = Vec<Vec<[u32; 2]>>;

fn frames_json(frames: &[Vec<Cell>]) -> FramesJson {
    frames
        .iter()
        .map(|frame| frame.iter().map(|c| [c.x, c.y]).collect())
        .collect()
}

fn scratch_frames(tpg: &Tpg) -> Result<(Cost, FramesJson), String> {
    let report: ExecReport = exec_tpg(tpg, None).map_err(|e| e.to_string())?;
    Ok((report.cost, frames_json(&replay_frames(tpg, &report))))
}

#[derive(Serialize)]
struct InstanceJson {
    width: u32,
    height: u32,
    rows: Vec<String>,
    tasks: Vec<TaskJson>,
    solution: serde_json::Value,
    plan_cost: Cost,
    exec_cost: Cost,
    frames: FramesJson,
}

#[derive(Serialize)]
struct TaskJson {
    id: usize,
    start: [u32; 2],
    goal: [u32; 2],
}

/// Seeded random instance plus its delay-free execution, for rendering.
#[wasm_bindgen]
pub fn demo_generate(seed: u64, width: u32, height: u32, agents: usize, density: f64) -> String {
    envelope(demo_generate_impl(seed, width, height, agents, density))
}

fn demo_generate_impl(
    seed: u64,
    width: u32,
    height: u32,
    agents: usize,
    density: f64,
) -> Result<InstanceJson, String> {
    let (map, tasks, sol) =
        generate_instance(seed, width, height, agents, density).map_err(|e| e.to_string())?;
    let tpg = build_tpg(&sol);
    let (exec_cost, frames) = scratch_frames(&tpg)?;
    Ok(InstanceJson {
        width: map.width(),
        height: map.height(),
        rows: grid_rows(&map),
        tasks: tasks
            .iter()
            .map(|t| TaskJson {
                id: t.agent,
                start: [t.start.x, t.start.y],
                goal: [t.goal.x, t.goal.y],
            })
            .collect(),
        solution: serde_json::from_str(&solution_to_json(&sol)).expect("solution json"),
        plan_cost: ses_core::solution::solution_cost(&sol),
        exec_cost,
        frames,
    })
}

#[derive(Serialize)]
struct ReplanJson {
    pre_cost: Cost,
    post_cost: Cost,
    explored: u64,
    generated: u64,
    pruned: u64,
    switchable: usize,
    decisions: serde_json::Value,
    naive_frames: FramesJson,
    replanned_frames: FramesJson,
}

/// Applies a delay list to a solution and re-optimizes the passing orders
/// with the chosen algorithm, returning both the naive and the optimized
/// executions for side-by-side animation.
#[wasm_bindgen]
pub fn demo_replan(solution_json: &str, delays_json: &str, algo: &str) -> String {
    envelope(demo_replan_impl(solution_json, delays_json, algo))
}

fn demo_replan_impl(
    solution_json: &str,
    delays_json: &str,
    algo: &str,
) -> Result<ReplanJson, String> {
    let sol = solution_from_json(solution_json).map_err(|e| e.to_string())?;
    let delays = delays_from_json(delays_json).map_err(|e| e.to_string())?;
    let algo: Algo = algo.parse()?;
    let g = build_tpg(&sol);
    let state = align_state(&g, &delays)?;
    let (root, _) = construct_stpg(&g, &state, &delays).map_err(|e| e.to_string())?;

    let naive = naive_fix_all(&root);
    let (pre_cost, naive_frames) = scratch_frames(&naive)?;
    let opts = SearchOptions::default();
    let (tpg, stats, decisions) = match algo {
        Algo::Eses => {
            let o = ses_search::<EsesModules>(&root, &opts).map_err(|e| e.to_string())?;
            (o.tpg, o.stats, o.decisions)
        }
        Algo::Gses => {
            let o = ses_search::<GsesModules>(&root, &opts).map_err(|e| e.to_string())?;
            (o.tpg, o.stats, o.decisions)
        }
        Algo::Naive => (naive.clone(), Default::default(), Vec::new()),
        Algo::Oracle => {
            let o = brute_force_optimal(&root, 20).map_err(|e| e.to_string())?;
            (o.tpg, Default::default(), o.decisions)
        }
    };
    let (post_cost, replanned_frames) = scratch_frames(&tpg)?;
    Ok(ReplanJson {
        pre_cost,
        post_cost,
        explored: stats.explored,
        generated: stats.generated,
        pruned: stats.pruned,
        switchable: root.switchable().len(),
        decisions: serde_json::from_str(&ses_core::search::decisions_to_json(&decisions))
            .expect("decision json"),
        naive_frames,
        replanned_frames,
    })
}

fn align_state(g: &Tpg, delays: &[DelayEvent]) -> Result<ExecutionState, String> {
    let mut state = ExecutionState::initial(g);
    loop {
        let aligned = !delays.is_empty()
            && delays
                .iter()
                .all(|d| d.agent < g.n_agents() && state.progress()[d.agent] == d.at_index);
        if aligned || (delays.is_empty() && state.is_complete(g)) {
            return Ok(state);
        }
        if state.is_complete(g) {
            return Err("delays never align with any execution state".into());
        }
        state.step(g).map_err(|e| e.to_string())?;
    }
}

#[derive(Serialize)]
struct TrialJson {
    final_cost: Cost,
    baseline_cost: Cost,
    replans: Vec<TrialReplanJson>,
    frames: FramesJson,
    delay_marks: Vec<[u32; 2]>,
}

#[derive(Serialize)]
struct TrialReplanJson {
    at_iteration: u32,
    delta_sum: u64,
    pre_cost: Cost,
    post_cost: Cost,
    explored: u64,
}

/// One seeded delay-injection trial over a solution: random delays strike
/// during execution, each one triggering a replan with the chosen
/// algorithm. Returns the realized trajectory and per-replan numbers.
#[wasm_bindgen]
pub fn demo_trial(solution_json: &str, p: f64, delay_seed: u64, algo: &str) -> String {
    envelope(demo_trial_impl(solution_json, p, delay_seed, algo))
}

fn demo_trial_impl(
    solution_json: &str,
    p: f64,
    delay_seed: u64,
    algo: &str,
) -> Result<TrialJson, String> {
    use rand::{Rng, SeedableRng};
    if !(0.0..=1.0).contains(&p) {
        return Err(format!("p must be in [0,1], got {p}"));
    }
    let sol = solution_from_json(solution_json).map_err(|e| e.to_string())?;
    let algo: Algo = algo.parse()?;
    let baseline_cost = exec_tpg(&build_tpg(&sol), None).map_err(|e| e.to_string())?.cost;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(delay_seed);
    let mut g = build_tpg(&sol);
    let mut state = ExecutionState::initial(&g);
    let mut frames = vec![current_positions(&g, &state)];
    let mut replans = Vec::new();
    let mut delay_marks = Vec::new();
    let mut iteration = 0u32;
    // Hard cap so a pathological request cannot hang the page.
    let max_iterations = 10_000u32;

    while !state.is_complete(&g) {
        if iteration > max_iterations {
            return Err("trial exceeded the iteration cap".into());
        }
        let mut events = Vec::new();
        for agent in 0..g.n_agents() {
            let at = state.progress()[agent];
            let serving = g.is_dummy(VertexId::new(agent, at))
                || (at < g.goal_index(agent) && g.is_dummy(VertexId::new(agent, at + 1)));
            if at < g.goal_index(agent) && !serving && rng.random_bool(p) {
                events.push(DelayEvent {
                    agent,
                    at_index: at,
                    delta: rng.random_range(2..=5),
                });
            }
        }
        if !events.is_empty() {
            for e in &events {
                let cell = g.effective_location(VertexId::new(e.agent, e.at_index));
                delay_marks.push([cell.x, cell.y]);
            }
            let (root, new_state) = construct_stpg(&g, &state, &events).map_err(|e| e.to_string())?;
            let pre_cost = exec_tpg(&naive_fix_all(&root), None).map_err(|e| e.to_string())?.cost;
            let opts = SearchOptions::default();
            let (tpg, post_cost, explored) = match algo {
                Algo::Eses => {
                    let o = ses_search::<EsesModules>(&root, &opts).map_err(|e| e.to_string())?;
                    (o.tpg, o.cost, o.stats.explored)
                }
                Algo::Gses => {
                    let o = ses_search::<GsesModules>(&root, &opts).map_err(|e| e.to_string())?;
                    (o.tpg, o.cost, o.stats.explored)
                }
                Algo::Naive => (naive_fix_all(&root), pre_cost, 0),
                Algo::Oracle => {
                    let o = brute_force_optimal(&root, 16).map_err(|e| e.to_string())?;
                    (o.tpg, o.cost, 0)
                }
            };
            replans.push(TrialReplanJson {
                at_iteration: iteration,
                delta_sum: events.iter().map(|e| e.delta as u64).sum(),
                pre_cost,
                post_cost,
                explored,
            });
            g = tpg;
            state = new_state;
        }
        state.step(&g).map_err(|e| e.to_string())?;
        iteration += 1;
        frames.push(current_positions(&g, &state));
    }

    Ok(TrialJson {
        final_cost: state.cost(),
        baseline_cost,
        replans,
        frames: frames_json(&frames),
        delay_marks,
    })
}

fn current_positions(g: &Tpg, state: &ExecutionState) -> Vec<Cell> {
    (0..g.n_agents())
        .map(|agent| g.effective_location(VertexId::new(agent, state.progress()[agent])))
        .collect()
}

/// Validation report for a solution edited by hand in the page.
#[wasm_bindgen]
pub fn demo_validate(map_rows_json: &str, solution_json: &str) -> String {
    envelope(demo_validate_impl(map_rows_json, solution_json))
}

fn demo_validate_impl(map_rows_json: &str, solution_json: &str) -> Result<Vec<String>, String> {
    let rows: Vec<String> = serde_json::from_str(map_rows_json).map_err(|e| e.to_string())?;
    if rows.is_empty() {
        return Err("empty map".into());
    }
    let width = rows[0].chars().count() as u32;
    let blocked: Vec<bool> = rows
        .iter()
        .flat_map(|r| r.chars().map(|c| c != '.'))
        .collect();
    let map = GridMap::new(width, rows.len() as u32, blocked).map_err(|e| e.to_string())?;
    let sol: MapfSolution = solution_from_json(solution_json).map_err(|e| e.to_string())?;
    let tasks: Vec<_> = sol
        .paths
        .iter()
        .enumerate()
        .map(|(agent, p)| ses_core::AgentTask {
            agent,
            start: p.first().map(|&(c, _)| c).unwrap_or(Cell::new(0, 0)),
            goal: p.last().map(|&(c, _)| c).unwrap_or(Cell::new(0, 0)),
        })
        .collect();
    Ok(validate_solution(&map, &tasks, &sol)
        .violations
        .iter()
        .map(|v| v.to_string())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generate_envelope_carries_instance() {
        let out = demo_generate(7, 6, 6, 3, 0.1);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v["error"].is_null(), "{out}");
        assert_eq!(v["ok"]["width"], 6);
        assert_eq!(v["ok"]["tasks"].as_array().unwrap().len(), 3);
        assert!(v["ok"]["frames"].as_array().unwrap().len() >= 2);
        assert!(v["ok"]["exec_cost"].as_u64().unwrap() <= v["ok"]["plan_cost"].as_u64().unwrap());
    }

    #[test]
    fn replan_envelope_improves_or_matches_naive() {
        let gen: serde_json::Value =
            serde_json::from_str(&demo_generate(3, 6, 6, 3, 0.1)).unwrap();
        let solution = gen["ok"]["solution"].to_string();
        let delays = r#"[{"agent":0,"at_index":0,"delta":4}]"#;
        for algo in ["gses", "eses", "oracle", "naive"] {
            let out: serde_json::Value =
                serde_json::from_str(&demo_replan(&solution, delays, algo)).unwrap();
            assert!(out["error"].is_null(), "{algo}: {out}");
            let pre = out["ok"]["pre_cost"].as_u64().unwrap();
            let post = out["ok"]["post_cost"].as_u64().unwrap();
            assert!(post <= pre, "{algo}");
            assert!(!out["ok"]["naive_frames"].as_array().unwrap().is_empty());
        }
    }

    #[test]
    fn trial_envelope_reports_replans() {
        let gen: serde_json::Value =
            serde_json::from_str(&demo_generate(11, 6, 6, 3, 0.1)).unwrap();
        let solution = gen["ok"]["solution"].to_string();
        let out: serde_json::Value =
            serde_json::from_str(&demo_trial(&solution, 0.4, 5, "gses")).unwrap();
        assert!(out["error"].is_null(), "{out}");
        assert!(out["ok"]["final_cost"].as_u64().unwrap()
            >= out["ok"]["baseline_cost"].as_u64().unwrap());
        let frames = out["ok"]["frames"].as_array().unwrap();
        assert!(frames.len() >= 2);
        // And a bad algorithm name comes back as an error envelope.
        let bad: serde_json::Value =
            serde_json::from_str(&demo_trial(&solution, 0.4, 5, "nope")).unwrap();
        assert!(bad["ok"].is_null());
    }

    #[test]
    fn validate_reports_hand_made_collision() {
        let rows = r#"["...", "...", "..."]"#;
        let solution = r#"{"agents":[
            {"id":0,"path":[[0,0,0],[1,0,1]]},
            {"id":1,"path":[[2,0,0],[1,0,1]]}
        ]}"#;
        let out: serde_json::Value =
            serde_json::from_str(&demo_validate(rows, solution)).unwrap();
        let violations = out["ok"].as_array().unwrap();
        assert!(!violations.is_empty());
    }
}
