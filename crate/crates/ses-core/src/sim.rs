//! Stochastic delay-injection harness: execute a plan, delay agents at
//! random, replan the passing orders, and measure costs and search effort.
//!
//! At every execution timestep each unfinished agent that is not already
//! serving a delay is delayed with probability `p`; delay lengths are drawn
//! uniformly from `[delta_min, delta_max]`. All delays drawn at one timestep
//! trigger a single replan. Trials are deterministic given their seeds;
//! only the runtime columns vary between runs.

use crate::grid::GridMap;
use crate::movingai;
use crate::planner::{generate_instance, plan_paths};
use crate::search::{
    brute_force_optimal, naive_fix_all, ses_search, EsesModules, GsesModules, SearchError,
    SearchOptions, SearchStats,
};
use crate::solution::{validate_solution, AgentTask, MapfSolution};
use crate::stpg::{construct_stpg, DelayEvent, StpgError};
use crate::tpg::{build_tpg, exec_tpg, ExecutionState, Tpg, TpgError, VertexId};
use crate::{Cell, Cost};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use std::collections::VecDeque;
use std::path::Path;
use std::sync::Mutex;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Replanning algorithm under test.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Eses,
    Gses,
    Naive,
    Oracle,
}

impl Algo {
    pub const ALL: [Algo; 4] = [Algo::Eses, Algo::Gses, Algo::Naive, Algo::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Eses => "eses",
            Algo::Gses => "gses",
            Algo::Naive => "naive",
            Algo::Oracle => "oracle",
        }
    }
}

impl std::str::FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> Result<Algo, String> {
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}` (expected eses|gses|naive|oracle)"))
    }
}

impl std::fmt::Display for Algo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-timestep delay distribution.
#[derive(Clone, Copy, Debug, Deserialize)]
pub struct DelayModel {
    pub p: f64,
    #[serde(default = "default_delta_min")]
    pub delta_min: u32,
    #[serde(default = "default_delta_max")]
    pub delta_max: u32,
    #[serde(default)]
    pub seed: u64,
}

fn default_delta_min() -> u32 {
    10
}

fn default_delta_max() -> u32 {
    20
}

impl DelayModel {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(SimError::Invalid(format!("p must be in [0,1], got {}", self.p)));
        }
        if self.delta_min < 1 || self.delta_min > self.delta_max {
            return Err(SimError::Invalid(format!(
                "need 1 <= delta_min <= delta_max, got [{}, {}]",
                self.delta_min, self.delta_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("{0}")]
    Invalid(String),
    #[error("solution fails validation: {0} violations")]
    InvalidSolution(usize),
    #[error(transparent)]
    Stpg(#[from] StpgError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("execution deadlocked mid-trial: {0}")]
    Execution(#[from] TpgError),
    #[error("config: {0}")]
    Config(String),
}

/// One replanning event inside a trial.
#[derive(Clone, Debug)]
pub struct ReplanRecord {
    /// Execution iteration at which the delay batch was drawn.
    pub at_iteration: u32,
    /// Sum of the delay lengths in the batch.
    pub delta_sum: u64,
    /// Cost of the naive fix-all completion of the root.
    pub pre_cost: Cost,
    /// Cost of the plan the algorithm returned.
    pub post_cost: Cost,
    /// Wall-clock time of the search call only.
    pub runtime: Duration,
    pub stats: SearchStats,
}

#[derive(Clone, Debug)]
pub struct TrialResult {
    pub algo: Algo,
    pub replans: Vec<ReplanRecord>,
    /// Total realized cost of the executed trajectory, delays included.
    pub final_cost: Cost,
    /// Realized per-iteration agent positions, `frames[t][agent]`.
    pub frames: Vec<Vec<Cell>>,
    pub timed_out: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct TrialOptions {
    pub budget: Duration,
    pub oracle_cap: usize,
}

impl Default for TrialOptions {
    fn default() -> Self {
        TrialOptions {
            budget: Duration::from_secs(90),
            oracle_cap: 20,
        }
    }
}

fn positions(g: &Tpg, state: &ExecutionState) -> Vec<Cell> {
    (0..g.n_agents())
        .map(|agent| g.effective_location(VertexId::new(agent, state.progress()[agent])))
        .collect()
}

/// An agent is eligible for a fresh delay draw while it is unfinished and
/// not serving one: both its current vertex and its next vertex are real.
/// Delays that strike while a dummy chain is still ahead merge into that
/// chain instead of stacking a second event.
fn delay_eligible(g: &Tpg, state: &ExecutionState, agent: usize) -> bool {
    let at = state.progress()[agent];
    at < g.goal_index(agent)
        && !g.is_dummy(VertexId::new(agent, at))
        && !g.is_dummy(VertexId::new(agent, at + 1))
}

/// Executes `sol` under the delay model, replanning with `algo` whenever a
/// delay batch is drawn. A trial that exceeds its budget is marked timed
/// out and returns its partial records.
pub fn run_trial(
    map: &GridMap,
    tasks: &[AgentTask],
    sol: &MapfSolution,
    model: &DelayModel,
    algo: Algo,
    opts: &TrialOptions,
) -> Result<TrialResult, SimError> {
    model.validate()?;
    let report = validate_solution(map, tasks, sol);
    if !report.is_ok() {
        return Err(SimError::InvalidSolution(report.violations.len()));
    }

    let started = Instant::now();
    let deadline = started + opts.budget;
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let mut g = build_tpg(sol);
    let mut state = ExecutionState::initial(&g);
    let mut frames = vec![positions(&g, &state)];
    let mut replans = Vec::new();
    let mut timed_out = false;
    let mut iteration = 0u32;

    while !state.is_complete(&g) {
        if Instant::now() > deadline {
            timed_out = true;
            break;
        }

        // Draw this timestep's delays, agents in ascending id.
        let mut events = Vec::new();
        for agent in 0..g.n_agents() {
            if delay_eligible(&g, &state, agent) && rng.random_bool(model.p) {
                let delta = rng.random_range(model.delta_min..=model.delta_max);
                events.push(DelayEvent {
                    agent,
                    at_index: state.progress()[agent],
                    delta,
                });
            }
        }

        if !events.is_empty() {
            let (root, new_state) = construct_stpg(&g, &state, &events)?;
            let pre_cost = exec_tpg(&naive_fix_all(&root), None)?.cost;
            let search_opts = SearchOptions {
                deadline: Some(deadline),
                trace: false,
            };
            let t0 = Instant::now();
            let outcome = match algo {
                Algo::Eses => ses_search::<EsesModules>(&root, &search_opts)
                    .map(|o| (o.tpg, o.cost, o.stats)),
                Algo::Gses => ses_search::<GsesModules>(&root, &search_opts)
                    .map(|o| (o.tpg, o.cost, o.stats)),
                Algo::Naive => Ok((naive_fix_all(&root), pre_cost, SearchStats::default())),
                Algo::Oracle => brute_force_optimal(&root, opts.oracle_cap)
                    .map(|o| (o.tpg, o.cost, SearchStats::default())),
            };
            let runtime = t0.elapsed();
            let (tpg, post_cost, stats) = match outcome {
                Ok(x) => x,
                Err(SearchError::Timeout) => {
                    timed_out = true;
                    break;
                }
                Err(e) => return Err(e.into()),
            };
            replans.push(ReplanRecord {
                at_iteration: iteration,
                delta_sum: events.iter().map(|e| e.delta as u64).sum(),
                pre_cost,
                post_cost,
                runtime,
                stats,
            });
            g = tpg;
            state = new_state;
        }

        state.step(&g)?;
        iteration += 1;
        frames.push(positions(&g, &state));
    }

    Ok(TrialResult {
        algo,
        replans,
        final_cost: state.cost(),
        frames,
        timed_out,
    })
}

fn default_time_limit() -> u64 {
    90
}

fn default_jobs() -> usize {
    1
}

fn default_oracle_cap() -> usize {
    20
}

/// One scenario block: either a generated instance family (width/height) or
/// a map/scenario file pair, each run once per seed per algorithm.
#[derive(Clone, Debug, Deserialize)]
pub struct TrialConfig {
    pub name: String,
    pub agents: usize,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub width: u32,
    #[serde(default)]
    pub height: u32,
    #[serde(default)]
    pub obstacle_density: f64,
    #[serde(default)]
    pub map: Option<String>,
    #[serde(default)]
    pub scen: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct ExperimentConfig {
    pub algos: Vec<Algo>,
    pub delay: DelayModel,
    pub trials: Vec<TrialConfig>,
    #[serde(default = "default_time_limit")]
    pub time_limit_s: u64,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    #[serde(default = "default_oracle_cap")]
    pub oracle_cap: usize,
}

impl ExperimentConfig {
    /// Parses TOML or JSON depending on `toml_format`.
    pub fn parse(text: &str, toml_format: bool) -> Result<ExperimentConfig, SimError> {
        let config: ExperimentConfig = if toml_format {
            toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?
        } else {
            serde_json::from_str(text).map_err(|e| SimError::Config(e.to_string()))?
        };
        if config.algos.is_empty() {
            return Err(SimError::Config("at least one algorithm required".into()));
        }
        if config.trials.is_empty() {
            return Err(SimError::Config("at least one trial block required".into()));
        }
        config.delay.validate()?;
        for t in &config.trials {
            let generated = t.width > 0 && t.height > 0;
            let from_files = t.map.is_some() && t.scen.is_some();
            if generated == from_files {
                return Err(SimError::Config(format!(
                    "trial `{}`: give either width/height or map/scen",
                    t.name
                )));
            }
            if t.seeds.is_empty() || t.agents == 0 {
                return Err(SimError::Config(format!(
                    "trial `{}`: needs agents and at least one seed",
                    t.name
                )));
            }
        }
        Ok(config)
    }
}

/// One CSV row per replan event.
#[derive(Clone, Debug)]
pub struct ExperimentRow {
    pub map: String,
    pub n_agents: usize,
    pub scenario: String,
    pub seed: u64,
    pub algo: Algo,
    pub replan_idx: usize,
    pub delta_sum: u64,
    pub pre_cost: Cost,
    pub post_cost: Cost,
    pub explored: u64,
    pub pruned: u64,
    pub runtime_us: u128,
    pub timed_out: bool,
}

pub const CSV_HEADER: &str =
    "map,n_agents,scenario,seed,algo,replan_idx,delta_sum,pre_cost,post_cost,explored,pruned,runtime_us,timed_out";

impl ExperimentRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.map,
            self.n_agents,
            self.scenario,
            self.seed,
            self.algo,
            self.replan_idx,
            self.delta_sum,
            self.pre_cost,
            self.post_cost,
            self.explored,
            self.pruned,
            self.runtime_us,
            self.timed_out
        )
    }
}

/// Aggregates per algorithm over all finished trials.
#[derive(Clone, Debug)]
pub struct AlgoSummary {
    pub algo: Algo,
    pub trials: usize,
    pub timed_out: usize,
    pub replans: usize,
    pub mean_runtime_us: f64,
    pub mean_explored: f64,
    pub mean_pruned: f64,
    /// Mean of (naive pre cost - replanned post cost) over replan events.
    pub mean_improvement: f64,
}

#[derive(Debug)]
pub struct ExperimentResult {
    pub rows: Vec<ExperimentRow>,
    pub summaries: Vec<AlgoSummary>,
    pub errors: Vec<String>,
}

impl ExperimentResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.to_csv());
            out.push('\n');
        }
        out
    }

    pub fn summary_lines(&self) -> Vec<String> {
        self.summaries
            .iter()
            .map(|s| {
                format!(
                    "{}: trials={} timed_out={} replans={} mean_runtime_us={:.1} mean_explored={:.2} mean_pruned={:.2} mean_improvement={:.2}",
                    s.algo,
                    s.trials,
                    s.timed_out,
                    s.replans,
                    s.mean_runtime_us,
                    s.mean_explored,
                    s.mean_pruned,
                    s.mean_improvement
                )
            })
            .collect()
    }
}

type PreparedInstance = (u64, GridMap, Vec<AgentTask>, MapfSolution, String);
type FinishedTrial = Option<Result<(WorkItem, TrialResult), String>>;

struct WorkItem {
    index: usize,
    map_label: String,
    scenario: String,
    seed: u64,
    algo: Algo,
    map: GridMap,
    tasks: Vec<AgentTask>,
    sol: MapfSolution,
    delay_seed: u64,
}

fn derive_delay_seed(base: u64, instance_seed: u64) -> u64 {
    base ^ instance_seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs the cross product of trial blocks, seeds, and algorithms in a pool
/// of `jobs` workers. Per-trial failures are recorded and the experiment
/// continues. Row order is deterministic; runtime columns are not.
pub fn run_experiment(config: &ExperimentConfig, base_dir: &Path) -> ExperimentResult {
    let mut work = Vec::new();
    let mut errors = Vec::new();

    for block in &config.trials {
        let prepared: Result<Vec<PreparedInstance>, String> =
            if let (Some(map_rel), Some(scen_rel)) = (&block.map, &block.scen) {
                let map_path = base_dir.join(map_rel);
                let scen_path = base_dir.join(scen_rel);
                (|| {
                    let map_text = std::fs::read_to_string(&map_path)
                        .map_err(|e| format!("{}: {e}", map_path.display()))?;
                    let map = movingai::parse_map(&map_text).map_err(|e| e.to_string())?;
                    let scen_text = std::fs::read_to_string(&scen_path)
                        .map_err(|e| format!("{}: {e}", scen_path.display()))?;
                    let mut tasks =
                        movingai::parse_scen(&scen_text, &map).map_err(|e| e.to_string())?;
                    if tasks.len() < block.agents {
                        return Err(format!(
                            "scenario has {} entries, need {}",
                            tasks.len(),
                            block.agents
                        ));
                    }
                    tasks.truncate(block.agents);
                    let label = map_rel.clone();
                    block
                        .seeds
                        .iter()
                        .map(|&seed| {
                            let sol = plan_paths(&map, &tasks, seed).map_err(|e| e.to_string())?;
                            Ok((seed, map.clone(), tasks.clone(), sol, label.clone()))
                        })
                        .collect()
                })()
            } else {
                block
                    .seeds
                    .iter()
                    .map(|&seed| {
                        let (map, tasks, sol) = generate_instance(
                            seed,
                            block.width,
                            block.height,
                            block.agents,
                            block.obstacle_density,
                        )
                        .map_err(|e| e.to_string())?;
                        let label = format!(
                            "gen:{}x{}:d{:.2}",
                            block.width, block.height, block.obstacle_density
                        );
                        Ok((seed, map, tasks, sol, label))
                    })
                    .collect()
            };

        match prepared {
            Err(e) => errors.push(format!("trial `{}`: {e}", block.name)),
            Ok(instances) => {
                for (seed, map, tasks, sol, label) in instances {
                    for &algo in &config.algos {
                        work.push(WorkItem {
                            index: work.len(),
                            map_label: label.clone(),
                            scenario: block.name.clone(),
                            seed,
                            algo,
                            map: map.clone(),
                            tasks: tasks.clone(),
                            sol: sol.clone(),
                            delay_seed: derive_delay_seed(config.delay.seed, seed),
                        });
                    }
                }
            }
        }
    }

    let n_work = work.len();
    let queue = Mutex::new(work.into_iter().collect::<VecDeque<_>>());
    let results: Mutex<Vec<FinishedTrial>> = Mutex::new((0..n_work).map(|_| None).collect());
    let opts = TrialOptions {
        budget: Duration::from_secs(config.time_limit_s),
        oracle_cap: config.oracle_cap,
    };
    let workers = config.jobs.clamp(1, n_work.max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let Some(item) = queue.lock().unwrap().pop_front() else {
                    return;
                };
                let model = DelayModel {
                    seed: item.delay_seed,
                    ..config.delay
                };
                let outcome = run_trial(&item.map, &item.tasks, &item.sol, &model, item.algo, &opts)
                    .map_err(|e| {
                        format!("trial `{}` seed {} {}: {e}", item.scenario, item.seed, item.algo)
                    });
                let index = item.index;
                results.lock().unwrap()[index] = Some(outcome.map(|r| (item, r)));
            });
        }
    });

    let mut rows = Vec::new();
    let mut per_algo: Vec<(Algo, Vec<&TrialResult>)> =
        config.algos.iter().map(|&a| (a, Vec::new())).collect();
    let finished: Vec<_> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .flatten()
        .collect();
    for outcome in &finished {
        match outcome {
            Err(e) => errors.push(e.clone()),
            Ok((item, result)) => {
                if let Some(slot) = per_algo.iter_mut().find(|(a, _)| *a == item.algo) {
                    slot.1.push(result);
                }
                for (replan_idx, r) in result.replans.iter().enumerate() {
                    rows.push(ExperimentRow {
                        map: item.map_label.clone(),
                        n_agents: item.tasks.len(),
                        scenario: item.scenario.clone(),
                        seed: item.seed,
                        algo: item.algo,
                        replan_idx,
                        delta_sum: r.delta_sum,
                        pre_cost: r.pre_cost,
                        post_cost: r.post_cost,
                        explored: r.stats.explored,
                        pruned: r.stats.pruned,
                        runtime_us: r.runtime.as_micros(),
                        timed_out: result.timed_out,
                    });
                }
            }
        }
    }

    let summaries = per_algo
        .into_iter()
        .map(|(algo, trials)| {
            let replans: Vec<&ReplanRecord> =
                trials.iter().flat_map(|t| t.replans.iter()).collect();
            let n = replans.len().max(1) as f64;
            AlgoSummary {
                algo,
                trials: trials.len(),
                timed_out: trials.iter().filter(|t| t.timed_out).count(),
                replans: replans.len(),
                mean_runtime_us: replans.iter().map(|r| r.runtime.as_micros() as f64).sum::<f64>()
                    / n,
                mean_explored: replans.iter().map(|r| r.stats.explored as f64).sum::<f64>() / n,
                mean_pruned: replans.iter().map(|r| r.stats.pruned as f64).sum::<f64>() / n,
                mean_improvement: replans
                    .iter()
                    .map(|r| r.pre_cost as f64 - r.post_cost as f64)
                    .sum::<f64>()
                    / n,
            }
        })
        .collect();

    ExperimentResult { rows, summaries, errors }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solution::collision_violations;

    fn instance(seed: u64) -> (GridMap, Vec<AgentTask>, MapfSolution) {
        generate_instance(seed, 6, 6, 3, 0.1).unwrap()
    }

    fn model(p: f64, seed: u64) -> DelayModel {
        DelayModel { p, delta_min: 2, delta_max: 4, seed }
    }

    #[test]
    fn no_delays_means_no_replans() {
        let (map, tasks, sol) = instance(5);
        let result =
            run_trial(&map, &tasks, &sol, &model(0.0, 1), Algo::Gses, &Default::default())
                .unwrap();
        assert!(result.replans.is_empty());
        assert!(!result.timed_out);
        let baseline = exec_tpg(&build_tpg(&sol), None).unwrap().cost;
        assert_eq!(result.final_cost, baseline);
    }

    #[test]
    fn certain_delay_on_a_single_agent_merges_into_one_event_per_move() {
        // One agent, one move: delayed at t=0, then serves the whole dummy
        // chain and finishes. No passing orders exist, so the replan is
        // cost-neutral.
        let map = GridMap::open(3, 1);
        let tasks = vec![AgentTask {
            agent: 0,
            start: Cell::new(0, 0),
            goal: Cell::new(1, 0),
        }];
        let sol = plan_paths(&map, &tasks, 0).unwrap();
        let m = DelayModel { p: 1.0, delta_min: 3, delta_max: 3, seed: 9 };
        let result = run_trial(&map, &tasks, &sol, &m, Algo::Gses, &Default::default()).unwrap();
        assert_eq!(result.replans.len(), 1, "one delay event, drawn at t=0");
        assert_eq!(result.replans[0].at_iteration, 0);
        assert_eq!(result.replans[0].pre_cost, result.replans[0].post_cost);
        assert_eq!(result.final_cost, 1 + 3); // one move plus the forced wait
    }

    #[test]
    fn realized_trajectories_stay_collision_free_and_complete() {
        for seed in 0..12 {
            let (map, tasks, sol) = instance(seed);
            for algo in [Algo::Gses, Algo::Eses, Algo::Naive] {
                let result = run_trial(
                    &map,
                    &tasks,
                    &sol,
                    &model(0.25, seed * 7 + 1),
                    algo,
                    &Default::default(),
                )
                .unwrap();
                assert!(!result.timed_out);
                assert!(
                    collision_violations(&result.frames).is_empty(),
                    "seed {seed} algo {algo}"
                );
                let last = result.frames.last().unwrap();
                for task in &tasks {
                    assert_eq!(last[task.agent], task.goal, "seed {seed} algo {algo}");
                }
            }
        }
    }

    #[test]
    fn optimized_replans_never_exceed_naive_and_match_oracle() {
        for seed in 0..8 {
            let (map, tasks, sol) = instance(seed + 50);
            let m = model(0.3, seed + 1);
            let opts = TrialOptions::default();
            let gses = run_trial(&map, &tasks, &sol, &m, Algo::Gses, &opts).unwrap();
            let eses = run_trial(&map, &tasks, &sol, &m, Algo::Eses, &opts).unwrap();
            let oracle = run_trial(&map, &tasks, &sol, &m, Algo::Oracle, &opts).unwrap();
            // Same seed, same delay stream: replan points coincide.
            assert_eq!(gses.replans.len(), oracle.replans.len());
            assert_eq!(gses.replans.len(), eses.replans.len());
            for ((g, e), o) in gses.replans.iter().zip(&eses.replans).zip(&oracle.replans) {
                assert!(g.post_cost <= g.pre_cost);
                assert_eq!(g.post_cost, o.post_cost, "seed {seed}");
                assert_eq!(e.post_cost, o.post_cost, "seed {seed}");
                assert_eq!(g.at_iteration, o.at_iteration);
            }
        }
    }

    #[test]
    fn trials_are_deterministic_given_seeds() {
        let (map, tasks, sol) = instance(33);
        let m = model(0.4, 12);
        let a = run_trial(&map, &tasks, &sol, &m, Algo::Gses, &Default::default()).unwrap();
        let b = run_trial(&map, &tasks, &sol, &m, Algo::Gses, &Default::default()).unwrap();
        assert_eq!(a.final_cost, b.final_cost);
        assert_eq!(a.frames, b.frames);
        assert_eq!(a.replans.len(), b.replans.len());
        for (x, y) in a.replans.iter().zip(&b.replans) {
            assert_eq!(
                (x.pre_cost, x.post_cost, x.delta_sum),
                (y.pre_cost, y.post_cost, y.delta_sum)
            );
            assert_eq!(x.stats, y.stats);
        }
    }

    const CONFIG: &str = r#"
algos = ["gses", "eses"]
time_limit_s = 30
jobs = 2

[delay]
p = 0.25
delta_min = 2
delta_max = 4
seed = 3

[[trials]]
name = "small"
width = 5
height = 5
agents = 3
obstacle_density = 0.1
seeds = [1, 2]
"#;

    #[test]
    fn experiment_emits_paired_rows_and_csv() {
        let config = ExperimentConfig::parse(CONFIG, true).unwrap();
        let result = run_experiment(&config, Path::new("."));
        assert!(result.errors.is_empty(), "{:?}", result.errors);
        assert_eq!(result.summaries.len(), 2);
        // Paired algos see identical replan points and equal optimal costs.
        let by_key = |algo: Algo| -> Vec<(u64, usize, Cost)> {
            result
                .rows
                .iter()
                .filter(|r| r.algo == algo)
                .map(|r| (r.seed, r.replan_idx, r.post_cost))
                .collect()
        };
        assert_eq!(by_key(Algo::Gses), by_key(Algo::Eses));

        let csv = result.to_csv();
        assert!(csv.starts_with(CSV_HEADER));
        // Determinism modulo the runtime column.
        let strip = |text: &str| -> Vec<String> {
            text.lines()
                .map(|l| {
                    let cols: Vec<&str> = l.split(',').collect();
                    cols.iter()
                        .enumerate()
                        .filter(|(i, _)| *i != 11)
                        .map(|(_, c)| *c)
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .collect()
        };
        let rerun = run_experiment(&config, Path::new("."));
        assert_eq!(strip(&csv), strip(&rerun.to_csv()));
    }

    #[test]
    fn config_validation_rejects_nonsense() {
        assert!(ExperimentConfig::parse("algos = []", true).is_err());
        let missing_geometry = r#"
algos = ["gses"]
[delay]
p = 0.1
[[trials]]
name = "x"
agents = 2
seeds = [1]
"#;
        assert!(ExperimentConfig::parse(missing_geometry, true).is_err());
        let json = r#"{
            "algos": ["naive"],
            "delay": {"p": 0.0},
            "trials": [{"name": "j", "agents": 2, "seeds": [4], "width": 5, "height": 5}]
        }"#;
        let config = ExperimentConfig::parse(json, false).unwrap();
        assert_eq!(config.time_limit_s, 90);
        assert_eq!(config.delay.delta_min, 10);
    }
}
