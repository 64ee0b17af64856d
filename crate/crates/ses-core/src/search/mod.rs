//! Switchable-edge search: best-first search over STPGs for the
//! minimum-cost committed passing order.
//!
//! The framework expands one node per iteration: a Branch module picks a
//! switchable edge, the edge is resolved both ways (fix and reverse), each
//! child whose new edge closes a cycle in the reduced graph is pruned, and
//! a Heuristic module prices the survivors so that `g + h` is always the
//! node's partial cost — the execution cost of its reduced graph. Because
//! the partial cost lower-bounds every completion, the first finished node
//! popped is optimal.
//!
//! Two module sets implement Branch/Heuristic: [`EsesModules`] simulates
//! execution of the reduced graph and branches when an agent's next vertex
//! touches a switchable edge; [`GsesModules`] works on longest-path values
//! and can terminate early once every remaining switchable edge is already
//! consistent with them.

mod eses;
mod gses;

pub use eses::EsesModules;
pub use gses::GsesModules;

use crate::stpg::Stpg;
use crate::tpg::{exec_tpg, has_cycle, Tpg, Type2Edge, VertexId};
use crate::Cost;
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SearchError {
    #[error("no solution found")]
    NoSolutionFound,
    #[error("search exceeded its time limit")]
    Timeout,
    #[error("too many switchable edges for the oracle: {got} > cap {cap}")]
    TooManySwitchable { got: usize, cap: usize },
}

/// How a switchable edge was resolved.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeAction {
    Fix,
    Reverse,
}

/// One resolved edge in the order the search committed it.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct Decision {
    #[serde(serialize_with = "serialize_edge")]
    pub edge: Type2Edge,
    pub action: EdgeAction,
}

fn serialize_edge<S: serde::Serializer>(e: &Type2Edge, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("Type2Edge", 2)?;
    st.serialize_field("from", &[e.from.agent, e.from.index])?;
    st.serialize_field("to", &[e.to.agent, e.to.index])?;
    st.end()
}

pub fn decisions_to_json(decisions: &[Decision]) -> String {
    serde_json::to_string_pretty(decisions).expect("decision serialization")
}

/// Search counters. `explored` counts nodes popped from the queue,
/// `generated` counts pushes (the root included), `pruned` counts children
/// rejected by cycle detection.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize)]
pub struct SearchStats {
    pub explored: u64,
    pub generated: u64,
    pub pruned: u64,
    pub terminated_early: bool,
}

/// One line per expansion when tracing is on.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExpansionTrace {
    pub f: Cost,
    pub g: Cost,
    pub h: Cost,
    pub switchable: usize,
    #[serde(serialize_with = "serialize_edge_opt")]
    pub chosen: Option<Type2Edge>,
    pub fix_pruned: bool,
    pub reverse_pruned: bool,
}

fn serialize_edge_opt<S: serde::Serializer>(
    e: &Option<Type2Edge>,
    s: S,
) -> Result<S::Ok, S::Error> {
    match e {
        Some(edge) => s.serialize_some(&[
            [edge.from.agent, edge.from.index],
            [edge.to.agent, edge.to.index],
        ]),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Copy, Default)]
pub struct SearchOptions {
    pub deadline: Option<Instant>,
    pub trace: bool,
}

#[derive(Debug)]
pub struct SearchOutcome {
    pub tpg: Tpg,
    pub cost: Cost,
    pub stats: SearchStats,
    pub decisions: Vec<Decision>,
    pub trace: Vec<ExpansionTrace>,
}

/// What a Branch module found in a node.
pub enum BranchStep {
    /// Branch on this switchable edge.
    Switch(Type2Edge),
    /// The node is a finished plan. `early` marks an early termination with
    /// switchable edges fixed in place rather than searched.
    Complete { tpg: Tpg, early: bool },
}

/// A Branch/Heuristic module pair. `g + h` of every enqueued node must equal
/// the partial cost of its graph.
pub trait SearchModules {
    type Aux: Clone;

    fn name() -> &'static str;

    fn root_aux(root: &Stpg) -> Self::Aux;

    /// Inspects a node, returning updated auxiliary data, the cost increment
    /// `g_delta` accrued while inspecting, and either an edge to branch on
    /// or the finished plan.
    fn branch(g: &Stpg, aux: &Self::Aux) -> (Self::Aux, Cost, BranchStep);

    /// Prices a node: `h` plus the auxiliary data to store with it.
    fn heuristic(g: &Stpg, aux: Self::Aux) -> (Cost, Self::Aux);
}

struct Node<A> {
    stpg: Stpg,
    aux: A,
    g: Cost,
    h: Cost,
    seq: u64,
    decisions: Vec<Decision>,
}

impl<A> Node<A> {
    fn f(&self) -> Cost {
        self.g + self.h
    }
}

/// Min-order on f, then deeper (larger g) first, then FIFO.
impl<A> Ord for Node<A> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f()
            .cmp(&self.f())
            .then(self.g.cmp(&other.g))
            .then(other.seq.cmp(&self.seq))
    }
}

impl<A> PartialOrd for Node<A> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<A> PartialEq for Node<A> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<A> Eq for Node<A> {}

/// True iff the reduced graph of `g` has a cycle through `new_edge`, checked
/// by a DFS from the edge head. Parents are generated with acyclic reduced
/// graphs and gain one non-switchable edge per child, so any cycle must run
/// through the new edge; this check is therefore exact.
pub fn cycle_detection(g: &Stpg, new_edge: Type2Edge) -> bool {
    debug_assert!(g.nonswitchable().contains(&new_edge));
    let reduced = g.reduce();
    let target = new_edge.from;
    let mut seen = vec![false; reduced.vertex_count()];
    let mut stack = vec![new_edge.to];
    seen[reduced.flat_index(new_edge.to)] = true;
    while let Some(v) = stack.pop() {
        if v == target {
            return true;
        }
        for next in reduced.successors(v) {
            let idx = reduced.flat_index(next);
            if !seen[idx] {
                seen[idx] = true;
                stack.push(next);
            }
        }
    }
    false
}

/// Best-first search over fix/reverse resolutions of `root`'s switchable
/// edges. Returns a minimum-cost deadlock-free plan among all resolutions.
pub fn ses_search<M: SearchModules>(
    root: &Stpg,
    opts: &SearchOptions,
) -> Result<SearchOutcome, SearchError> {
    let mut stats = SearchStats::default();
    let mut trace = Vec::new();
    let mut seq = 0u64;

    let (h_root, aux_root) = M::heuristic(root, M::root_aux(root));
    let mut queue: BinaryHeap<Node<M::Aux>> = BinaryHeap::new();
    queue.push(Node {
        stpg: root.clone(),
        aux: aux_root,
        g: 0,
        h: h_root,
        seq,
        decisions: Vec::new(),
    });
    stats.generated += 1;

    while let Some(node) = queue.pop() {
        stats.explored += 1;
        if opts.deadline.is_some_and(|d| Instant::now() > d) {
            return Err(SearchError::Timeout);
        }

        let (aux_next, g_delta, step) = M::branch(&node.stpg, &node.aux);
        match step {
            BranchStep::Complete { tpg, early } => {
                stats.terminated_early = early;
                if opts.trace {
                    trace.push(ExpansionTrace {
                        f: node.f(),
                        g: node.g,
                        h: node.h,
                        switchable: node.stpg.switchable().len(),
                        chosen: None,
                        fix_pruned: false,
                        reverse_pruned: false,
                    });
                }
                debug_assert_eq!(
                    exec_tpg(&tpg, None).map(|r| r.cost),
                    Ok(node.f()),
                    "finished node's f must price its plan exactly"
                );
                return Ok(SearchOutcome {
                    cost: node.f(),
                    tpg,
                    stats,
                    decisions: node.decisions,
                    trace,
                });
            }
            BranchStep::Switch(edge) => {
                let mut fix_pruned = false;
                let mut reverse_pruned = false;
                let children = [
                    (node.stpg.fix_edge(edge), edge, EdgeAction::Fix, &mut fix_pruned),
                    (
                        node.stpg.reverse_edge(edge),
                        edge.reversed(),
                        EdgeAction::Reverse,
                        &mut reverse_pruned,
                    ),
                ];
                for (child, new_edge, action, pruned_flag) in children {
                    let child = child.expect("branch edge is switchable");
                    if cycle_detection(&child, new_edge) {
                        stats.pruned += 1;
                        *pruned_flag = true;
                        continue;
                    }
                    let (h, aux) = M::heuristic(&child, aux_next.clone());
                    seq += 1;
                    let mut decisions = node.decisions.clone();
                    decisions.push(Decision { edge, action });
                    let g = node.g + g_delta;
                    #[cfg(debug_assertions)]
                    {
                        let partial = exec_tpg(&child.reduce(), None)
                            .expect("cycle-pruned child reduces to an acyclic graph")
                            .cost;
                        debug_assert_eq!(g + h, partial, "g + h must equal the partial cost");
                    }
                    queue.push(Node { stpg: child, aux, g, h, seq, decisions });
                    stats.generated += 1;
                }
                if opts.trace {
                    trace.push(ExpansionTrace {
                        f: node.f(),
                        g: node.g,
                        h: node.h,
                        switchable: node.stpg.switchable().len(),
                        chosen: Some(edge),
                        fix_pruned,
                        reverse_pruned,
                    });
                }
            }
        }
    }
    Err(SearchError::NoSolutionFound)
}

/// The naive completion: fix every switchable edge. For roots built from a
/// delayed execution state this is always deadlock-free, and its cost
/// upper-bounds the optimum.
pub fn naive_fix_all(root: &Stpg) -> Tpg {
    root.fix_all()
}

#[derive(Debug)]
pub struct BruteForceResult {
    pub cost: Cost,
    pub decisions: Vec<Decision>,
    pub tpg: Tpg,
}

/// Exhaustive oracle: tries all `2^n` fix/reverse assignments of the
/// switchable edges, discards cyclic results, and returns the cheapest
/// (lexicographically first among ties, with fix ordered before reverse).
pub fn brute_force_optimal(root: &Stpg, cap: usize) -> Result<BruteForceResult, SearchError> {
    let edges: Vec<Type2Edge> = root.switchable().iter().copied().collect();
    let n = edges.len();
    if n > cap {
        return Err(SearchError::TooManySwitchable { got: n, cap });
    }

    let mut best: Option<BruteForceResult> = None;
    for mask in 0u64..(1u64 << n) {
        let decisions: Vec<Decision> = edges
            .iter()
            .enumerate()
            .map(|(i, &edge)| Decision {
                edge,
                action: if mask >> (n - 1 - i) & 1 == 0 {
                    EdgeAction::Fix
                } else {
                    EdgeAction::Reverse
                },
            })
            .collect();
        let mut resolved = root.nonswitchable().clone();
        for d in &decisions {
            resolved.insert(match d.action {
                EdgeAction::Fix => d.edge,
                EdgeAction::Reverse => d.edge.reversed(),
            });
        }
        let tpg = root.with_edges(resolved.into_iter().collect());
        if has_cycle(&tpg) {
            continue;
        }
        let cost = exec_tpg(&tpg, None).expect("acyclic graphs execute").cost;
        if best.as_ref().is_none_or(|b| cost < b.cost) {
            best = Some(BruteForceResult { cost, decisions, tpg });
        }
    }
    // A root built from a delayed execution state always has at least the
    // fix-all completion.
    best.ok_or(SearchError::NoSolutionFound)
}

/// Horizon test used by ESES: the smallest switchable edge touching vertex
/// `v`. An edge touches its two endpoints and also its arrival vertex — the
/// tail agent's real arrival at the shared location, behind any spliced
/// dummies. Branching no later than that arrival keeps both ways of
/// resolving the edge ahead of the simulated execution, so a child's new
/// edge never points into an already-satisfied vertex and node prices stay
/// exact.
pub(crate) fn min_incident_switchable(g: &Stpg, v: VertexId) -> Option<Type2Edge> {
    g.switchable()
        .iter()
        .copied()
        .filter(|e| e.from == v || e.to == v || (e.from.agent == v.agent && g.arrival_vertex(*e) == v))
        .min()
}
