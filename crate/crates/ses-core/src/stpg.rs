//! Switchable temporal plan graphs.
//!
//! An STPG partitions a TPG's Type-2 edges into a switchable set (passing
//! order still open) and a non-switchable set (passing order committed).
//! Two operations resolve a switchable edge: `fix` keeps its direction,
//! `reverse` flips the passing order at the shared location. All values are
//! persistent — children share the vertex skeleton with their parent and
//! copy only the two edge sets.

use crate::tpg::{ExecutionState, Skeleton, Tpg, TpgError, Type2Edge, VertexId};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StpgError {
    #[error("edge {0} is not switchable")]
    NotSwitchable(Type2Edge),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid delay: {0}")]
    InvalidDelay(String),
    #[error(transparent)]
    Graph(#[from] TpgError),
}

/// A forced wait: `agent` must stay at the location of its current vertex
/// `at_index` for `delta` extra timesteps.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct DelayEvent {
    pub agent: usize,
    pub at_index: usize,
    pub delta: u32,
}

/// Parses a delay list from `[{"agent":d,"at_index":c,"delta":n},...]`.
pub fn delays_from_json(text: &str) -> Result<Vec<DelayEvent>, StpgError> {
    let delays: Vec<DelayEvent> =
        serde_json::from_str(text).map_err(|e| StpgError::InvalidDelay(e.to_string()))?;
    for d in &delays {
        if d.delta == 0 {
            return Err(StpgError::InvalidDelay(format!(
                "agent {}: delta must be at least 1",
                d.agent
            )));
        }
    }
    Ok(delays)
}

pub fn delays_to_json(delays: &[DelayEvent]) -> String {
    serde_json::to_string_pretty(delays).expect("delay serialization")
}

/// A TPG whose Type-2 edges are split into switchable and non-switchable
/// sets. Immutable; `fix_edge` and `reverse_edge` return new values.
#[derive(Clone, Debug)]
pub struct Stpg {
    skel: Arc<Skeleton>,
    switchable: BTreeSet<Type2Edge>,
    nonswitchable: BTreeSet<Type2Edge>,
}

impl Stpg {
    /// Splits an existing graph's edges into the given switchable subset and
    /// the rest. Every switchable edge must be an edge of `tpg`, must not
    /// point into a goal vertex, and must leave room for reversal.
    pub fn from_tpg_partition(
        tpg: &Tpg,
        switchable: BTreeSet<Type2Edge>,
    ) -> Result<Stpg, StpgError> {
        let all: BTreeSet<Type2Edge> = tpg.type2_edges().iter().copied().collect();
        for e in &switchable {
            if !all.contains(e) {
                return Err(StpgError::NotSwitchable(*e));
            }
            if e.to.index >= tpg.goal_index(e.to.agent) {
                return Err(StpgError::InvalidState(format!(
                    "switchable edge {e} points into a goal vertex"
                )));
            }
        }
        let nonswitchable = all.difference(&switchable).copied().collect();
        Ok(Stpg {
            skel: tpg.skel.clone(),
            switchable,
            nonswitchable,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.skel.n_agents()
    }

    pub fn vertex_count(&self) -> usize {
        self.skel.vertex_count()
    }

    pub fn goal_index(&self, agent: usize) -> usize {
        self.skel.goal_index(agent)
    }

    pub fn switchable(&self) -> &BTreeSet<Type2Edge> {
        &self.switchable
    }

    pub fn nonswitchable(&self) -> &BTreeSet<Type2Edge> {
        &self.nonswitchable
    }

    pub fn is_switchable(&self, e: Type2Edge) -> bool {
        self.switchable.contains(&e)
    }

    /// See [`Tpg::arrival_vertex`].
    pub fn arrival_vertex(&self, e: Type2Edge) -> VertexId {
        self.skel
            .real_vertex_at_or_before(VertexId::new(e.from.agent, e.from.index - 1))
    }

    /// Commits a switchable edge in its current direction.
    pub fn fix_edge(&self, e: Type2Edge) -> Result<Stpg, StpgError> {
        if !self.switchable.contains(&e) {
            return Err(StpgError::NotSwitchable(e));
        }
        let mut child = self.clone();
        child.switchable.remove(&e);
        child.nonswitchable.insert(e);
        Ok(child)
    }

    /// Commits the opposite passing order: removes the switchable edge and
    /// adds its reversal to the non-switchable set.
    pub fn reverse_edge(&self, e: Type2Edge) -> Result<Stpg, StpgError> {
        if !self.switchable.contains(&e) {
            return Err(StpgError::NotSwitchable(e));
        }
        let reversed = e.reversed();
        debug_assert!(
            reversed.from.index <= self.goal_index(reversed.from.agent),
            "reversal target exists because switchable edges never point into goals"
        );
        let mut child = self.clone();
        child.switchable.remove(&e);
        child.nonswitchable.insert(reversed);
        Ok(child)
    }

    /// The reduced graph: vertices, Type-1 edges, and only the
    /// non-switchable Type-2 edges. Its execution cost is the partial cost.
    pub fn reduce(&self) -> Tpg {
        Tpg::from_skeleton(self.skel.clone(), self.nonswitchable.iter().copied().collect())
    }

    /// Fixes every switchable edge at once — the naive completion.
    pub fn fix_all(&self) -> Tpg {
        let edges = self
            .nonswitchable
            .iter()
            .chain(self.switchable.iter())
            .copied()
            .collect();
        Tpg::from_skeleton(self.skel.clone(), edges)
    }

    /// A graph over the same vertices with an explicit Type-2 edge set.
    pub(crate) fn with_edges(&self, edges: Vec<Type2Edge>) -> Tpg {
        Tpg::from_skeleton(self.skel.clone(), edges)
    }
}

/// Builds the root STPG for replanning after delays.
///
/// Step 1 partitions the Type-2 edges of `g0` against the execution state:
/// an edge `(v[j][s+1] -> v[i][k])` stays switchable only while the passing
/// order can still physically go either way — agent `j` has not yet reached
/// the shared location (`v[j][s]` unsatisfied) and agent `i`'s visit is not
/// its goal (`k < z_i`). Everything else is committed. Step 2 splices
/// `delta` dummy vertices after each delayed agent's current vertex,
/// shifting later indices up.
///
/// Returns the STPG and the execution state re-mapped onto the new vertex
/// layout (dummies unsatisfied; accumulated cost carried over).
pub fn construct_stpg(
    g0: &Tpg,
    state: &ExecutionState,
    delays: &[DelayEvent],
) -> Result<(Stpg, ExecutionState), StpgError> {
    if state.progress().len() != g0.n_agents() {
        return Err(StpgError::InvalidState(
            "state does not match the graph's agent count".into(),
        ));
    }
    let mut seen = BTreeSet::new();
    for d in delays {
        if d.delta == 0 {
            return Err(StpgError::InvalidDelay(format!(
                "agent {}: delta must be at least 1",
                d.agent
            )));
        }
        if d.agent >= g0.n_agents() {
            return Err(StpgError::InvalidDelay(format!("agent {} does not exist", d.agent)));
        }
        if !seen.insert(d.agent) {
            return Err(StpgError::InvalidDelay(format!(
                "agent {} delayed twice in one event batch",
                d.agent
            )));
        }
        if d.at_index >= g0.goal_index(d.agent) {
            return Err(StpgError::InvalidDelay(format!(
                "agent {} is at or past its goal and cannot be delayed",
                d.agent
            )));
        }
        if state.progress()[d.agent] != d.at_index {
            return Err(StpgError::InvalidState(format!(
                "agent {} is at index {}, not {}",
                d.agent,
                state.progress()[d.agent],
                d.at_index
            )));
        }
    }

    // Step 1 on the original indexing. An edge stays switchable only while
    // the passing order is still physically open: the tail's agent has not
    // reached the shared location (its real arrival vertex, behind any
    // dummies, is unsatisfied) and the head is short of its goal.
    let mut switchable = BTreeSet::new();
    let mut nonswitchable = BTreeSet::new();
    for &e in g0.type2_edges() {
        let arrival = g0.arrival_vertex(e);
        let open = !state.is_satisfied(g0, arrival) && e.to.index < g0.goal_index(e.to.agent);
        if open {
            switchable.insert(e);
        } else {
            nonswitchable.insert(e);
        }
    }

    // Step 2: splice dummies, ascending agent id, building the index map.
    let mut shifts: Vec<(usize, usize, usize)> = delays
        .iter()
        .map(|d| (d.agent, d.at_index, d.delta as usize))
        .collect();
    shifts.sort();
    let mut locs: Vec<Vec<Option<crate::grid::Cell>>> =
        g0.vertices().fold(vec![Vec::new(); g0.n_agents()], |mut acc, v| {
            acc[v.agent].push(g0.location(v));
            acc
        });
    for &(agent, after, count) in &shifts {
        locs[agent].splice(after + 1..after + 1, std::iter::repeat_n(None, count));
    }
    let new_skel = Skeleton::new(locs);
    let translate = |v: VertexId| -> VertexId {
        match shifts.iter().find(|&&(agent, after, _)| agent == v.agent && v.index > after) {
            Some(&(_, _, count)) => VertexId::new(v.agent, v.index + count),
            None => v,
        }
    };

    let remap_set = |set: &BTreeSet<Type2Edge>| -> BTreeSet<Type2Edge> {
        set.iter()
            .map(|e| Type2Edge::new(translate(e.from), translate(e.to)))
            .collect()
    };
    let stpg = Stpg {
        skel: new_skel.clone(),
        switchable: remap_set(&switchable),
        nonswitchable: remap_set(&nonswitchable),
    };
    let new_state = state.remap(&g0.skel, &new_skel, translate);

    // Dummies sit strictly after each delayed agent's satisfied frontier.
    debug_assert!(delays
        .iter()
        .all(|d| new_state.progress()[d.agent] == d.at_index));
    Ok((stpg, new_state))
}
