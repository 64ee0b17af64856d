//! MAPF instances and solutions: the solution format, collision semantics,
//! and validation.
//!
//! A path is a sequence of `(location, timestep)` tuples with strictly
//! increasing timesteps; waits are implicit in timestep gaps and are never
//! stored. Two collision rules apply:
//!
//! 1. two agents occupy the same location at the same timestep;
//! 2. one agent leaves a location at the same timestep another enters it
//!    (swaps are a special case of this rule).

use crate::grid::{Cell, GridMap};
use crate::{Cost, Timestep};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One agent's start/goal assignment.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct AgentTask {
    pub agent: usize,
    pub start: Cell,
    pub goal: Cell,
}

/// A set of per-agent paths. `paths[i]` belongs to agent `i`; each entry is a
/// `(location, timestep)` tuple and the first tuple always has timestep 0.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MapfSolution {
    pub paths: Vec<Vec<(Cell, Timestep)>>,
}

impl MapfSolution {
    pub fn n_agents(&self) -> usize {
        self.paths.len()
    }

    /// Timestep at which agent `i` reaches its goal (its travel time).
    pub fn last_time(&self, agent: usize) -> Timestep {
        self.paths[agent].last().map(|&(_, t)| t).unwrap_or(0)
    }

    /// Index of the last tuple of agent `i`.
    pub fn last_index(&self, agent: usize) -> usize {
        self.paths[agent].len().saturating_sub(1)
    }

    /// Position of agent `i` at time `t`: the location of the latest tuple
    /// with timestep `<= t` (agents rest at their goals after finishing).
    pub fn position_at(&self, agent: usize, t: Timestep) -> Cell {
        let path = &self.paths[agent];
        let mut pos = path[0].0;
        for &(cell, ts) in path {
            if ts <= t {
                pos = cell;
            } else {
                break;
            }
        }
        pos
    }

    pub fn makespan(&self) -> Timestep {
        (0..self.n_agents()).map(|i| self.last_time(i)).max().unwrap_or(0)
    }

    /// Per-timestep occupancy: `frames[t][agent]` for `t in 0..=makespan`.
    pub fn expand_frames(&self) -> Vec<Vec<Cell>> {
        let makespan = self.makespan();
        (0..=makespan)
            .map(|t| (0..self.n_agents()).map(|i| self.position_at(i, t)).collect())
            .collect()
    }
}

/// Sum of travel times over all agents.
pub fn solution_cost(sol: &MapfSolution) -> Cost {
    (0..sol.n_agents()).map(|i| sol.last_time(i) as Cost).sum()
}

/// A single rule violation found by [`validate_solution`]. Violations are
/// data, not errors: a report may carry any number of them.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Violation {
    EmptyPath { agent: usize },
    FirstTimestepNonzero { agent: usize, t: Timestep },
    NonIncreasingTimestep { agent: usize, index: usize },
    NotAdjacent { agent: usize, index: usize },
    OutOfBounds { agent: usize, index: usize, cell: Cell },
    BlockedCell { agent: usize, index: usize, cell: Cell },
    StartMismatch { agent: usize },
    GoalMismatch { agent: usize },
    DuplicateStart { a: usize, b: usize },
    DuplicateGoal { a: usize, b: usize },
    VertexCollision { t: Timestep, cell: Cell, a: usize, b: usize },
    FollowCollision { t: Timestep, cell: Cell, leaver: usize, enterer: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        use Violation::*;
        match *self {
            EmptyPath { agent } => write!(f, "agent {agent}: empty path"),
            FirstTimestepNonzero { agent, t } => {
                write!(f, "agent {agent}: first timestep is {t}, expected 0")
            }
            NonIncreasingTimestep { agent, index } => {
                write!(f, "agent {agent}: timestep not increasing at tuple {index}")
            }
            NotAdjacent { agent, index } => {
                write!(f, "agent {agent}: tuples {} and {index} not adjacent", index - 1)
            }
            OutOfBounds { agent, index, cell } => {
                write!(f, "agent {agent}: tuple {index} at {cell} is out of bounds")
            }
            BlockedCell { agent, index, cell } => {
                write!(f, "agent {agent}: tuple {index} at {cell} is blocked")
            }
            StartMismatch { agent } => write!(f, "agent {agent}: path does not begin at its start"),
            GoalMismatch { agent } => write!(f, "agent {agent}: path does not end at its goal"),
            DuplicateStart { a, b } => write!(f, "agents {a} and {b} share a start"),
            DuplicateGoal { a, b } => write!(f, "agents {a} and {b} share a goal"),
            VertexCollision { t, cell, a, b } => {
                write!(f, "agents {a} and {b} both at {cell} at t={t}")
            }
            FollowCollision { t, cell, leaver, enterer } => write!(
                f,
                "agent {enterer} enters {cell} at t={t} as agent {leaver} leaves it"
            ),
        }
    }
}

/// Outcome of [`validate_solution`].
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Collision scan over per-timestep occupancy frames (`frames[t][agent]`).
/// Shared by solution validation and trajectory replay checks.
pub fn collision_violations(frames: &[Vec<Cell>]) -> Vec<Violation> {
    let mut out = Vec::new();
    for (t, frame) in frames.iter().enumerate() {
        for a in 0..frame.len() {
            for b in a + 1..frame.len() {
                if frame[a] == frame[b] {
                    out.push(Violation::VertexCollision {
                        t: t as Timestep,
                        cell: frame[a],
                        a,
                        b,
                    });
                }
            }
        }
    }
    for t in 1..frames.len() {
        let (prev, cur) = (&frames[t - 1], &frames[t]);
        for leaver in 0..cur.len() {
            if prev[leaver] == cur[leaver] {
                continue;
            }
            let left = prev[leaver];
            for enterer in 0..cur.len() {
                if enterer != leaver && cur[enterer] == left && prev[enterer] != left {
                    out.push(Violation::FollowCollision {
                        t: t as Timestep,
                        cell: left,
                        leaver,
                        enterer,
                    });
                }
            }
        }
    }
    out
}

/// Checks a solution against the structural path invariants, the task
/// assignment, and both collision rules. Implicit waits are expanded into
/// per-timestep occupancy before the collision scan.
pub fn validate_solution(
    map: &GridMap,
    tasks: &[AgentTask],
    sol: &MapfSolution,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    assert_eq!(tasks.len(), sol.n_agents(), "one path per agent");

    for a in 0..tasks.len() {
        for b in a + 1..tasks.len() {
            if tasks[a].start == tasks[b].start {
                report.violations.push(Violation::DuplicateStart { a, b });
            }
            if tasks[a].goal == tasks[b].goal {
                report.violations.push(Violation::DuplicateGoal { a, b });
            }
        }
    }

    let mut structurally_sound = true;
    for (agent, path) in sol.paths.iter().enumerate() {
        if path.is_empty() {
            report.violations.push(Violation::EmptyPath { agent });
            structurally_sound = false;
            continue;
        }
        if path[0].1 != 0 {
            report
                .violations
                .push(Violation::FirstTimestepNonzero { agent, t: path[0].1 });
        }
        for (index, &(cell, t)) in path.iter().enumerate() {
            if !map.in_bounds(cell) {
                report.violations.push(Violation::OutOfBounds { agent, index, cell });
                structurally_sound = false;
                continue;
            }
            if map.is_blocked(cell) {
                report.violations.push(Violation::BlockedCell { agent, index, cell });
            }
            if index > 0 {
                if t <= path[index - 1].1 {
                    report
                        .violations
                        .push(Violation::NonIncreasingTimestep { agent, index });
                }
                if !cell.adjacent(path[index - 1].0) {
                    report.violations.push(Violation::NotAdjacent { agent, index });
                }
            }
        }
        if path[0].0 != tasks[agent].start {
            report.violations.push(Violation::StartMismatch { agent });
        }
        if path.last().unwrap().0 != tasks[agent].goal {
            report.violations.push(Violation::GoalMismatch { agent });
        }
    }

    if structurally_sound {
        report
            .violations
            .extend(collision_violations(&sol.expand_frames()));
    }
    report
}

#[derive(Debug, Error)]
pub enum SolutionIoError {
    #[error("solution json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("solution json: agent ids must be 0..n in order, got {0}")]
    BadAgentId(usize),
}

#[derive(Serialize, Deserialize)]
struct SolutionJson {
    agents: Vec<AgentPathJson>,
}

#[derive(Serialize, Deserialize)]
struct AgentPathJson {
    id: usize,
    path: Vec<[u32; 3]>,
}

/// Serializes to `{"agents":[{"id":0,"path":[[x,y,t],...]},...]}`.
pub fn solution_to_json(sol: &MapfSolution) -> String {
    let doc = SolutionJson {
        agents: sol
            .paths
            .iter()
            .enumerate()
            .map(|(id, path)| AgentPathJson {
                id,
                path: path.iter().map(|&(c, t)| [c.x, c.y, t]).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("solution serialization")
}

pub fn solution_from_json(text: &str) -> Result<MapfSolution, SolutionIoError> {
    let doc: SolutionJson = serde_json::from_str(text)?;
    let mut paths = vec![None; doc.agents.len()];
    for entry in doc.agents {
        if entry.id >= paths.len() || paths[entry.id].is_some() {
            return Err(SolutionIoError::BadAgentId(entry.id));
        }
        paths[entry.id] = Some(
            entry
                .path
                .iter()
                .map(|&[x, y, t]| (Cell::new(x, y), t))
                .collect::<Vec<_>>(),
        );
    }
    Ok(MapfSolution {
        paths: paths.into_iter().map(|p| p.unwrap()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(steps: &[(u32, u32, Timestep)]) -> Vec<(Cell, Timestep)> {
        steps.iter().map(|&(x, y, t)| (Cell::new(x, y), t)).collect()
    }

    fn tasks_of(sol: &MapfSolution) -> Vec<AgentTask> {
        sol.paths
            .iter()
            .enumerate()
            .map(|(agent, p)| AgentTask {
                agent,
                start: p[0].0,
                goal: p.last().unwrap().0,
            })
            .collect()
    }

    #[test]
    fn cost_sums_last_timesteps() {
        let single = MapfSolution {
            paths: vec![path(&[(0, 0, 0), (1, 0, 2), (2, 0, 5)])],
        };
        assert_eq!(solution_cost(&single), 5);

        let pair = MapfSolution {
            paths: vec![
                path(&[(0, 0, 0), (1, 0, 5)]),
                path(&[(0, 2, 0), (1, 2, 7)]),
            ],
        };
        assert_eq!(solution_cost(&pair), 12);
    }

    #[test]
    fn vertex_collision_reported_once_per_pair() {
        let map = GridMap::open(5, 5);
        let sol = MapfSolution {
            paths: vec![
                path(&[(2, 1, 0), (2, 2, 3)]),
                path(&[(2, 3, 0), (2, 2, 3), (2, 3, 4)]),
            ],
        };
        let report = validate_solution(&map, &tasks_of(&sol), &sol);
        let collisions: Vec<_> = report
            .violations
            .iter()
            .filter(|v| matches!(v, Violation::VertexCollision { .. }))
            .collect();
        assert_eq!(collisions.len(), 1);
        assert_eq!(
            collisions[0],
            &Violation::VertexCollision {
                t: 3,
                cell: Cell::new(2, 2),
                a: 0,
                b: 1
            }
        );
    }

    #[test]
    fn follow_collision_through_implicit_wait() {
        // Agent 1 sits at (1,1) over t in [2,4] (implicit wait) and leaves at
        // t=4; agent 0 enters (1,1) at t=4. Exactly one follow violation.
        let map = GridMap::open(4, 4);
        let sol = MapfSolution {
            paths: vec![
                path(&[(3, 1, 0), (2, 1, 3), (1, 1, 4)]),
                path(&[(0, 1, 0), (1, 1, 2), (1, 2, 4), (1, 3, 5)]),
            ],
        };
        let report = validate_solution(&map, &tasks_of(&sol), &sol);
        assert_eq!(
            report.violations,
            vec![Violation::FollowCollision {
                t: 4,
                cell: Cell::new(1, 1),
                leaver: 1,
                enterer: 0
            }]
        );
    }

    #[test]
    fn swap_is_caught_by_the_follow_rule() {
        let map = GridMap::open(4, 1);
        let sol = MapfSolution {
            paths: vec![
                path(&[(0, 0, 0), (1, 0, 1)]),
                path(&[(1, 0, 0), (0, 0, 1)]),
            ],
        };
        let report = validate_solution(&map, &tasks_of(&sol), &sol);
        let follows = report
            .violations
            .iter()
            .filter(|v| matches!(v, Violation::FollowCollision { .. }))
            .count();
        assert_eq!(follows, 2); // both directions of the swap
    }

    #[test]
    fn structural_violations_are_reported() {
        let mut map = GridMap::open(3, 3);
        map.set_blocked(Cell::new(2, 2), true);
        let sol = MapfSolution {
            paths: vec![path(&[(0, 0, 1), (2, 0, 1), (2, 2, 0)])],
        };
        let tasks = vec![AgentTask {
            agent: 0,
            start: Cell::new(0, 1),
            goal: Cell::new(2, 2),
        }];
        let report = validate_solution(&map, &tasks, &sol);
        assert!(report.violations.contains(&Violation::FirstTimestepNonzero { agent: 0, t: 1 }));
        assert!(report.violations.contains(&Violation::NotAdjacent { agent: 0, index: 1 }));
        assert!(report
            .violations
            .contains(&Violation::NonIncreasingTimestep { agent: 0, index: 2 }));
        assert!(report.violations.contains(&Violation::BlockedCell {
            agent: 0,
            index: 2,
            cell: Cell::new(2, 2)
        }));
        assert!(report.violations.contains(&Violation::StartMismatch { agent: 0 }));
    }

    #[test]
    fn json_round_trip_preserves_cost() {
        let sol = MapfSolution {
            paths: vec![
                path(&[(0, 0, 0), (1, 0, 1), (1, 1, 4)]),
                path(&[(2, 2, 0), (2, 1, 2)]),
            ],
        };
        let text = solution_to_json(&sol);
        let back = solution_from_json(&text).unwrap();
        assert_eq!(back, sol);
        assert_eq!(solution_cost(&back), solution_cost(&sol));
    }
}
