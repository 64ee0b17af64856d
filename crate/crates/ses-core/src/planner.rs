//! Prioritized planning with space-time reservations, and a seeded
//! instance generator built on top of it.
//!
//! Agents are planned one at a time. A planned agent's per-timestep
//! occupancy is written into a reservation table; later agents may not
//! occupy a cell within one timestep of an existing occupancy, which rules
//! out both vertex collisions and leave/enter (follow) collisions. Finished
//! agents park at their goals forever.

use crate::grid::{Cell, GridMap};
use crate::solution::{validate_solution, AgentTask, MapfSolution};
use crate::Timestep;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use thiserror::Error;

const MAX_ATTEMPTS: usize = 40;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("invalid tasks: {0}")]
    InvalidTasks(String),
    #[error("obstacle density must be in [0,1), got {0}")]
    BadDensity(f64),
    #[error("unsolvable after {0} attempts")]
    Unsolvable(usize),
}

#[derive(Default)]
struct Reservations {
    occupied: HashSet<(Cell, Timestep)>,
    parked_from: HashMap<Cell, Timestep>,
    latest_finite: HashMap<Cell, Timestep>,
}

impl Reservations {
    /// May an agent occupy `c` at time `t`? Conflicts with any existing
    /// occupancy of `c` at `t-1`, `t`, or `t+1`, and with parked agents.
    fn allows(&self, c: Cell, t: Timestep) -> bool {
        if let Some(&from) = self.parked_from.get(&c) {
            if t + 1 >= from {
                return false;
            }
        }
        let near_occupied = (t > 0 && self.occupied.contains(&(c, t - 1)))
            || self.occupied.contains(&(c, t))
            || self.occupied.contains(&(c, t + 1));
        !near_occupied
    }

    /// Earliest time from which parking at `c` forever stays conflict-free.
    fn parkable_from(&self, c: Cell) -> Option<Timestep> {
        if self.parked_from.contains_key(&c) {
            return None;
        }
        Some(self.latest_finite.get(&c).map_or(0, |&m| m + 2))
    }

    fn commit(&mut self, positions: &[Cell]) {
        let last = positions.len() - 1;
        for (t, &c) in positions.iter().enumerate().take(last) {
            let t = t as Timestep;
            self.occupied.insert((c, t));
            let latest = self.latest_finite.entry(c).or_insert(t);
            *latest = (*latest).max(t);
        }
        self.parked_from.insert(positions[last], last as Timestep);
    }
}

/// Space-time A* for one agent. Returns per-timestep positions from the
/// start through the final arrival at the goal, or `None` within `horizon`.
/// Ties break on smaller timestep, then smaller cell index.
fn space_time_astar(
    map: &GridMap,
    start: Cell,
    goal: Cell,
    res: &Reservations,
    horizon: Timestep,
) -> Option<Vec<Cell>> {
    let goal_free_from = res.parkable_from(goal)?;
    if !res.allows(start, 0) {
        return None;
    }

    let key = |c: Cell, t: Timestep| (map.cell_index(c), t);
    let mut open = BinaryHeap::new();
    let mut parents: HashMap<(usize, Timestep), Cell> = HashMap::new();
    let mut seen: HashSet<(usize, Timestep)> = HashSet::new();
    open.push(Reverse((start.manhattan(goal), 0, map.cell_index(start), start)));
    seen.insert(key(start, 0));

    while let Some(Reverse((_, t, _, cell))) = open.pop() {
        if cell == goal && t >= goal_free_from {
            let mut positions = vec![goal; t as usize + 1];
            let mut cur = (cell, t);
            while cur.1 > 0 {
                positions[cur.1 as usize] = cur.0;
                let prev = parents[&key(cur.0, cur.1)];
                cur = (prev, cur.1 - 1);
            }
            positions[0] = start;
            return Some(positions);
        }
        if t >= horizon {
            continue;
        }
        let moves = std::iter::once(cell).chain(map.neighbors4(cell));
        for next in moves {
            if !res.allows(next, t + 1) || !seen.insert(key(next, t + 1)) {
                continue;
            }
            parents.insert(key(next, t + 1), cell);
            let f = (t + 1) + next.manhattan(goal);
            open.push(Reverse((f, t + 1, map.cell_index(next), next)));
        }
    }
    None
}

fn compress(positions: &[Cell]) -> Vec<(Cell, Timestep)> {
    let mut tuples = vec![(positions[0], 0)];
    for (t, &c) in positions.iter().enumerate().skip(1) {
        if c != positions[t - 1] {
            tuples.push((c, t as Timestep));
        }
    }
    tuples
}

fn check_tasks(map: &GridMap, tasks: &[AgentTask]) -> Result<(), PlanError> {
    for (i, task) in tasks.iter().enumerate() {
        for cell in [task.start, task.goal] {
            if !map.in_bounds(cell) || map.is_blocked(cell) {
                return Err(PlanError::InvalidTasks(format!(
                    "agent {i}: cell {cell} is blocked or out of bounds"
                )));
            }
        }
        for (j, other) in tasks.iter().enumerate().skip(i + 1) {
            if task.start == other.start {
                return Err(PlanError::InvalidTasks(format!("agents {i} and {j} share a start")));
            }
            if task.goal == other.goal {
                return Err(PlanError::InvalidTasks(format!("agents {i} and {j} share a goal")));
            }
        }
    }
    Ok(())
}

fn plan_in_order(
    map: &GridMap,
    tasks: &[AgentTask],
    order: &[usize],
    horizon: Timestep,
) -> Option<MapfSolution> {
    let mut res = Reservations::default();
    let mut paths: Vec<Option<Vec<(Cell, Timestep)>>> = vec![None; tasks.len()];
    for &i in order {
        let positions = space_time_astar(map, tasks[i].start, tasks[i].goal, &res, horizon)?;
        res.commit(&positions);
        paths[i] = Some(compress(&positions));
    }
    Some(MapfSolution {
        paths: paths.into_iter().map(|p| p.unwrap()).collect(),
    })
}

fn horizon_for(map: &GridMap, n_agents: usize) -> Timestep {
    let cells = map.width() * map.height();
    (cells * (n_agents as u32 + 4)).max(64)
}

/// Plans collision-free paths for fixed tasks. The priority order is the
/// agent order first, then seeded shuffles; every candidate is re-validated
/// before it is returned.
pub fn plan_paths(map: &GridMap, tasks: &[AgentTask], seed: u64) -> Result<MapfSolution, PlanError> {
    check_tasks(map, tasks)?;
    let horizon = horizon_for(map, tasks.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..tasks.len()).collect();
    for attempt in 0..MAX_ATTEMPTS {
        if attempt > 0 {
            order.shuffle(&mut rng);
        }
        if let Some(sol) = plan_in_order(map, tasks, &order, horizon) {
            if validate_solution(map, tasks, &sol).is_ok() {
                return Ok(sol);
            }
        }
    }
    Err(PlanError::Unsolvable(MAX_ATTEMPTS))
}

/// Generates a random solvable instance: a map with the given obstacle
/// density, `n_agents` tasks drawn from the largest connected component,
/// and a valid solution. Deterministic in `seed`; start/goal draws are
/// retried on planning failure, up to a bounded attempt count.
pub fn generate_instance(
    seed: u64,
    width: u32,
    height: u32,
    n_agents: usize,
    obstacle_density: f64,
) -> Result<(GridMap, Vec<AgentTask>, MapfSolution), PlanError> {
    if !(0.0..1.0).contains(&obstacle_density) {
        return Err(PlanError::BadDensity(obstacle_density));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut blocked = Vec::with_capacity((width * height) as usize);
    for _ in 0..width * height {
        blocked.push(rng.random_bool(obstacle_density));
    }
    let map = GridMap::new(width, height, blocked)
        .map_err(|e| PlanError::InvalidTasks(e.to_string()))?;
    let component = map.largest_component();
    if component.len() < n_agents {
        return Err(PlanError::Unsolvable(0));
    }

    let horizon = horizon_for(&map, n_agents);
    let mut order: Vec<usize> = (0..n_agents).collect();
    for _ in 0..MAX_ATTEMPTS {
        let mut starts = component.clone();
        starts.shuffle(&mut rng);
        starts.truncate(n_agents);
        let mut goals = component.clone();
        goals.shuffle(&mut rng);
        goals.truncate(n_agents);
        let tasks: Vec<AgentTask> = (0..n_agents)
            .map(|agent| AgentTask {
                agent,
                start: starts[agent],
                goal: goals[agent],
            })
            .collect();
        order.shuffle(&mut rng);
        if let Some(sol) = plan_in_order(&map, &tasks, &order, horizon) {
            if validate_solution(&map, &tasks, &sol).is_ok() {
                return Ok((map, tasks, sol));
            }
        }
    }
    Err(PlanError::Unsolvable(MAX_ATTEMPTS))
}
