//! Execution-based modules.
//!
//! ESES simulates execution of the reduced graph. The auxiliary data is a
//! per-agent index of the most recently satisfied vertex; Branch advances it
//! until some agent's next vertex touches a switchable edge and returns that
//! edge together with the cost accrued so far. The node's `g` accumulates
//! those increments, and Heuristic prices the rest of the execution, so
//! `g + h` is the partial cost throughout.

use super::{min_incident_switchable, BranchStep, SearchModules};
use crate::stpg::Stpg;
use crate::tpg::{ExecutionState, VertexId};
use crate::Cost;

pub struct EsesModules;

impl SearchModules for EsesModules {
    /// `aux[i]` is the index of agent `i`'s most recently satisfied vertex.
    type Aux = Vec<usize>;

    fn name() -> &'static str {
        "eses"
    }

    fn root_aux(root: &Stpg) -> Vec<usize> {
        vec![0; root.n_agents()]
    }

    fn branch(g: &Stpg, aux: &Vec<usize>) -> (Vec<usize>, Cost, BranchStep) {
        let reduced = g.reduce();
        let mut state = ExecutionState::from_progress(&reduced, aux);
        let mut frontier = aux.clone();
        loop {
            // Scan the horizon: the first unsatisfied vertex of each agent,
            // ascending agent id. Branch on the smallest incident
            // switchable edge, in either orientation.
            for agent in 0..g.n_agents() {
                if frontier[agent] >= g.goal_index(agent) {
                    continue;
                }
                let next = VertexId::new(agent, frontier[agent] + 1);
                if let Some(edge) = min_incident_switchable(g, next) {
                    return (frontier, state.cost(), BranchStep::Switch(edge));
                }
            }
            if state.is_complete(&reduced) {
                debug_assert!(
                    g.switchable().is_empty(),
                    "every switchable edge passes through the horizon before completion"
                );
                return (
                    frontier,
                    state.cost(),
                    BranchStep::Complete { tpg: reduced, early: false },
                );
            }
            let ready = state
                .step(&reduced)
                .expect("cycle pruning keeps reduced graphs deadlock-free");
            for v in ready {
                frontier[v.agent] = v.index;
            }
        }
    }

    /// Cost of executing the reduced graph from `aux` to completion.
    fn heuristic(g: &Stpg, aux: Vec<usize>) -> (Cost, Vec<usize>) {
        let reduced = g.reduce();
        let state = ExecutionState::from_progress(&reduced, &aux);
        let report = crate::tpg::exec_tpg(&reduced, Some(&state))
            .expect("cycle pruning keeps reduced graphs deadlock-free");
        (report.cost, aux)
    }
}
