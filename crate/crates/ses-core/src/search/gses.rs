//! Graph-based modules.
//!
//! GSES stores longest-path values of the reduced graph as auxiliary data.
//! Heuristic recomputes them and prices a node as the sum over agents of
//! the goal vertex's value — exactly the partial cost — so nodes keep
//! `g = 0`. Branch picks a switchable edge `(u, v)` whose values are out of
//! order (`lp[u] >= lp[v]`); once no such edge remains, fixing everything
//! left cannot lengthen any path, and the search terminates early.

use super::{BranchStep, SearchModules};
use crate::stpg::Stpg;
use crate::tpg::longest_paths;
use crate::Cost;

pub struct GsesModules;

impl SearchModules for GsesModules {
    /// Longest-path value per vertex (flat order), filled by `heuristic`.
    type Aux = Vec<u32>;

    fn name() -> &'static str {
        "gses"
    }

    fn root_aux(_root: &Stpg) -> Vec<u32> {
        Vec::new()
    }

    fn branch(g: &Stpg, aux: &Vec<u32>) -> (Vec<u32>, Cost, BranchStep) {
        let reduced = g.reduce();
        debug_assert_eq!(aux.len(), g.vertex_count(), "heuristic runs before branch");
        for &edge in g.switchable() {
            if aux[reduced.flat_index(edge.from)] >= aux[reduced.flat_index(edge.to)] {
                return (aux.clone(), 0, BranchStep::Switch(edge));
            }
        }
        let early = !g.switchable().is_empty();
        (aux.clone(), 0, BranchStep::Complete { tpg: g.fix_all(), early })
    }

    fn heuristic(g: &Stpg, _aux: Vec<u32>) -> (Cost, Vec<u32>) {
        let reduced = g.reduce();
        let lp = longest_paths(&reduced).expect("cycle pruning keeps reduced graphs acyclic");
        let h = (0..g.n_agents())
            .map(|agent| lp.get(&reduced, reduced.goal_vertex(agent)) as Cost)
            .sum();
        (h, lp.values().to_vec())
    }
}
