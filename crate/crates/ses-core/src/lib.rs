//! Execution-time replanning for multi-agent path finding plans.
//!
//! A MAPF solution fixes, for every location that several agents visit, the
//! order in which they pass through it. When agents are delayed during
//! execution, keeping those passing orders can stall the whole team. This
//! crate models plans as temporal plan graphs (TPGs), executes them, and —
//! when delays happen — searches over switchable TPGs for the passing-order
//! assignment with minimum total travel time.
//!
//! The pieces, bottom up:
//!
//! * [`grid`], [`solution`], [`planner`], [`movingai`] — grids, MAPF
//!   solutions, collision validation, and a seeded instance generator.
//! * [`tpg`] — temporal plan graphs: construction, execution, cycle
//!   detection, and longest-path costs.
//! * [`stpg`] — switchable TPGs: the switchable/non-switchable edge
//!   partition, fix/reverse operations, and construction from a delayed
//!   execution state.
//! * [`search`] — the switchable-edge search (SES) framework with
//!   execution-based (ESES) and graph-based (GSES) module sets, a naive
//!   fix-all baseline, and a brute-force optimality oracle.
//! * [`sim`] — a stochastic delay-injection harness: execute, delay,
//!   replan, measure.

pub mod grid;
pub mod movingai;
pub mod planner;
pub mod search;
pub mod sim;
pub mod solution;
pub mod stpg;
pub mod tpg;

/// Discrete plan time. Timestep `0` is the initial configuration.
pub type Timestep = u32;

/// Sum-of-travel-times cost.
pub type Cost = u64;

pub use grid::{Cell, GridMap};
pub use solution::{validate_solution, solution_cost, AgentTask, MapfSolution, Violation};
pub use stpg::{construct_stpg, DelayEvent, Stpg};
pub use tpg::{
    build_tpg, exec_tpg, has_cycle, longest_paths, tpg_cost_via_lp, ExecutionState, Tpg,
    Type2Edge, VertexId,
};
