//! `ses` — plan, validate, execute, and replan grid MAPF solutions.
//!
//! Machine-readable results go to stdout; logs and traces go to stderr.
//! Exit codes: 0 success, 1 validation violations, 2 bad input or config,
//! 3 unsolvable instance, 4 timeout, 5 search found no solution.

use clap::{Args, Parser, Subcommand};
use ses_core::planner::{generate_instance, plan_paths, PlanError};
use ses_core::search::{
    brute_force_optimal, decisions_to_json, naive_fix_all, ses_search, EsesModules, GsesModules,
    SearchError, SearchOptions, SearchOutcome, SearchStats,
};
use ses_core::sim::{run_experiment, Algo, ExperimentConfig};
use ses_core::solution::{solution_from_json, solution_to_json, validate_solution, AgentTask};
use ses_core::stpg::{construct_stpg, delays_from_json, DelayEvent, Stpg};
use ses_core::tpg::{build_tpg, exec_tpg, tpg_to_json, ExecutionState, Tpg};
use ses_core::{movingai, Cost};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

#[derive(Parser)]
#[command(name = "ses", version, about = "Passing-order replanning for MAPF plans")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Verbose: stream per-expansion search traces to stderr as JSON lines.
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Plan collision-free paths for a scenario, or generate an instance.
    Plan(PlanArgs),
    /// Check a solution against a map and scenario.
    Validate(ValidateArgs),
    /// Re-optimize passing orders after delays.
    Replan(ReplanArgs),
    /// Exhaustive optimal replan (small switchable sets only).
    Oracle(OracleArgs),
    /// Run a delay-injection experiment from a config file.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct PlanArgs {
    /// MovingAI .map file (requires --scen).
    #[arg(long, requires = "scen", conflicts_with = "gen")]
    map: Option<PathBuf>,
    /// MovingAI .scen file; the first --agents entries are used.
    #[arg(long)]
    scen: Option<PathBuf>,
    /// Generate an instance instead: grid size as WxH, e.g. 8x8.
    #[arg(long, value_name = "WxH")]
    gen: Option<String>,
    /// Obstacle density for --gen, in [0,1).
    #[arg(long, default_value_t = 0.0)]
    density: f64,
    #[arg(long)]
    agents: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Solution JSON output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the generated map here (--gen only).
    #[arg(long)]
    out_map: Option<PathBuf>,
    /// Also write the generated scenario here (--gen only).
    #[arg(long)]
    out_scen: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    scen: PathBuf,
    #[arg(long)]
    solution: PathBuf,
    /// Use only the first N scenario entries (default: all).
    #[arg(long)]
    agents: Option<usize>,
}

#[derive(Args)]
struct ReplanArgs {
    #[arg(long)]
    solution: PathBuf,
    /// Delay list JSON: [{"agent":d,"at_index":c,"delta":n},...].
    #[arg(long)]
    delays: PathBuf,
    #[arg(long, default_value = "gses")]
    algo: Algo,
    #[arg(long, default_value_t = 90)]
    time_limit_s: u64,
    #[arg(long, default_value_t = 20)]
    oracle_cap: usize,
    /// Write the optimized graph and decision list here as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    solution: PathBuf,
    #[arg(long)]
    delays: PathBuf,
    #[arg(long, default_value_t = 20)]
    oracle_cap: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment config, TOML or JSON by extension.
    #[arg(long)]
    config: PathBuf,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker pool size override.
    #[arg(long)]
    jobs: Option<usize>,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Failure {
        Failure { code, message: message.into() }
    }
}

type CliResult = Result<(), Failure>;

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Plan(args) => cmd_plan(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Replan(args) => cmd_replan(args, cli.verbose),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Simulate(args) => cmd_simulate(args),
    };
    if let Err(failure) = outcome {
        eprintln!("ses: {}", failure.message);
        std::process::exit(failure.code);
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))
}

fn write_out(path: Option<&PathBuf>, text: &str) -> CliResult {
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Failure::new(2, format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn plan_error(e: PlanError) -> Failure {
    match e {
        PlanError::Unsolvable(_) => Failure::new(3, e.to_string()),
        _ => Failure::new(2, e.to_string()),
    }
}

fn load_tasks(
    map_path: &Path,
    scen_path: &Path,
    agents: Option<usize>,
) -> Result<(ses_core::GridMap, Vec<AgentTask>), Failure> {
    let map = movingai::parse_map(&read(map_path)?)
        .map_err(|e| Failure::new(2, format!("{}: {e}", map_path.display())))?;
    let mut tasks = movingai::parse_scen(&read(scen_path)?, &map)
        .map_err(|e| Failure::new(2, format!("{}: {e}", scen_path.display())))?;
    if let Some(n) = agents {
        if tasks.len() < n {
            return Err(Failure::new(
                2,
                format!("scenario has {} entries, need {n}", tasks.len()),
            ));
        }
        tasks.truncate(n);
    }
    Ok((map, tasks))
}

fn cmd_plan(args: PlanArgs) -> CliResult {
    let solution = if let Some(gen) = &args.gen {
        let (w, h) = gen
            .split_once('x')
            .and_then(|(w, h)| Some((w.parse().ok()?, h.parse().ok()?)))
            .ok_or_else(|| Failure::new(2, format!("bad --gen `{gen}`, expected WxH")))?;
        let (map, tasks, sol) =
            generate_instance(args.seed, w, h, args.agents, args.density).map_err(plan_error)?;
        if let Some(p) = &args.out_map {
            std::fs::write(p, movingai::format_map(&map))
                .map_err(|e| Failure::new(2, format!("{}: {e}", p.display())))?;
        }
        if let Some(p) = &args.out_scen {
            let name = args
                .out_map
                .as_ref()
                .and_then(|m| m.file_name())
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "generated.map".into());
            std::fs::write(p, movingai::format_scen(&name, &map, &tasks))
                .map_err(|e| Failure::new(2, format!("{}: {e}", p.display())))?;
        }
        sol
    } else {
        let map_path = args
            .map
            .as_ref()
            .ok_or_else(|| Failure::new(2, "need --map/--scen or --gen"))?;
        let (map, tasks) = load_tasks(map_path, args.scen.as_ref().unwrap(), Some(args.agents))?;
        plan_paths(&map, &tasks, args.seed).map_err(plan_error)?
    };
    write_out(args.out.as_ref(), &(solution_to_json(&solution) + "\n"))
}

fn cmd_validate(args: ValidateArgs) -> CliResult {
    let (map, tasks) = load_tasks(&args.map, &args.scen, args.agents)?;
    let sol =
        solution_from_json(&read(&args.solution)?).map_err(|e| Failure::new(2, e.to_string()))?;
    if sol.n_agents() != tasks.len() {
        return Err(Failure::new(
            2,
            format!("solution has {} agents, scenario {}", sol.n_agents(), tasks.len()),
        ));
    }
    let report = validate_solution(&map, &tasks, &sol);
    if report.is_ok() {
        println!("ok");
        Ok(())
    } else {
        for v in &report.violations {
            println!("violation: {v}");
        }
        Err(Failure::new(1, format!("{} violations", report.violations.len())))
    }
}

/// Steps a fresh execution of the graph until every delayed agent sits
/// exactly at its event index. With no delays, runs to completion — nothing
/// is open to replan then. Errors when the events can never align.
fn align_state(g: &Tpg, delays: &[DelayEvent]) -> Result<ExecutionState, Failure> {
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
            return Err(Failure::new(
                2,
                "delays never align with any execution state of this solution",
            ));
        }
        state
            .step(g)
            .map_err(|e| Failure::new(2, format!("execution failed: {e}")))?;
    }
}

fn build_root(solution_path: &Path, delays_path: &Path) -> Result<Stpg, Failure> {
    let sol =
        solution_from_json(&read(solution_path)?).map_err(|e| Failure::new(2, e.to_string()))?;
    let delays =
        delays_from_json(&read(delays_path)?).map_err(|e| Failure::new(2, e.to_string()))?;
    let g = build_tpg(&sol);
    let state = align_state(&g, &delays)?;
    let (root, _) =
        construct_stpg(&g, &state, &delays).map_err(|e| Failure::new(2, e.to_string()))?;
    Ok(root)
}

fn search_failure(e: SearchError) -> Failure {
    let code = match e {
        SearchError::Timeout => 4,
        SearchError::NoSolutionFound => 5,
        SearchError::TooManySwitchable { .. } => 2,
    };
    Failure::new(code, e.to_string())
}

fn emit_plan_files(out: Option<&PathBuf>, tpg: &Tpg, decisions_json: String) -> CliResult {
    if let Some(path) = out {
        let doc = format!(
            "{{\n\"decisions\": {},\n\"tpg\": {}\n}}\n",
            decisions_json,
            tpg_to_json(tpg)
        );
        std::fs::write(path, doc)
            .map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_replan(args: ReplanArgs, verbose: bool) -> CliResult {
    let root = build_root(&args.solution, &args.delays)?;
    let pre_cost = exec_tpg(&naive_fix_all(&root), None)
        .map_err(|e| Failure::new(2, e.to_string()))?
        .cost;
    let opts = SearchOptions {
        deadline: Some(Instant::now() + Duration::from_secs(args.time_limit_s)),
        trace: verbose,
    };

    let t0 = Instant::now();
    let (tpg, post_cost, stats, decisions, trace): (Tpg, Cost, SearchStats, String, Vec<_>) =
        match args.algo {
            Algo::Eses => {
                let SearchOutcome { tpg, cost, stats, decisions, trace } =
                    ses_search::<EsesModules>(&root, &opts).map_err(search_failure)?;
                (tpg, cost, stats, decisions_to_json(&decisions), trace)
            }
            Algo::Gses => {
                let SearchOutcome { tpg, cost, stats, decisions, trace } =
                    ses_search::<GsesModules>(&root, &opts).map_err(search_failure)?;
                (tpg, cost, stats, decisions_to_json(&decisions), trace)
            }
            Algo::Naive => {
                let tpg = naive_fix_all(&root);
                (tpg, pre_cost, SearchStats::default(), "[]".into(), Vec::new())
            }
            Algo::Oracle => {
                let result = brute_force_optimal(&root, args.oracle_cap).map_err(search_failure)?;
                (
                    result.tpg,
                    result.cost,
                    SearchStats::default(),
                    decisions_to_json(&result.decisions),
                    Vec::new(),
                )
            }
        };
    let runtime = t0.elapsed();

    if verbose {
        for line in &trace {
            eprintln!("{}", serde_json::to_string(line).expect("trace serialization"));
        }
    }
    println!(
        "{pre_cost} {post_cost} {} {} {}",
        stats.explored,
        stats.pruned,
        runtime.as_micros()
    );
    emit_plan_files(args.out.as_ref(), &tpg, decisions)
}

fn cmd_oracle(args: OracleArgs) -> CliResult {
    let root = build_root(&args.solution, &args.delays)?;
    let pre_cost = exec_tpg(&naive_fix_all(&root), None)
        .map_err(|e| Failure::new(2, e.to_string()))?
        .cost;
    let open = root.switchable().len();
    let t0 = Instant::now();
    let result = brute_force_optimal(&root, args.oracle_cap).map_err(search_failure)?;
    let runtime = t0.elapsed();
    println!("{pre_cost} {} {open} {}", result.cost, runtime.as_micros());
    emit_plan_files(args.out.as_ref(), &result.tpg, decisions_to_json(&result.decisions))
}

fn cmd_simulate(args: SimulateArgs) -> CliResult {
    let text = read(&args.config)?;
    let is_toml = args.config.extension().is_none_or(|ext| ext != "json");
    let mut config =
        ExperimentConfig::parse(&text, is_toml).map_err(|e| Failure::new(2, e.to_string()))?;
    if let Some(jobs) = args.jobs {
        config.jobs = jobs.max(1);
    }
    let base_dir = args
        .config
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .to_path_buf();
    let result = run_experiment(&config, &base_dir);
    for line in result.summary_lines() {
        eprintln!("{line}");
    }
    for error in &result.errors {
        eprintln!("trial error: {error}");
    }
    write_out(args.out.as_ref(), &result.to_csv())
}
