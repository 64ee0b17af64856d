//! Temporal plan graphs.
//!
//! A TPG captures the precedence structure of a MAPF solution. Every tuple
//! of every path becomes a vertex; Type-1 edges chain one agent's moves in
//! order, and a Type-2 edge runs from `v[j][s+1]` to `v[i][k]` whenever the
//! two agents visit the same location (`l[j][s] == l[i][k]`) and agent `j`
//! is planned to leave it before agent `i` arrives. Executing the graph
//! instead of the timed paths absorbs delays: an agent advances exactly when
//! the moves its next vertex depends on have happened.

use crate::grid::Cell;
use crate::solution::MapfSolution;
use crate::Cost;
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::sync::Arc;
use thiserror::Error;

/// A vertex is the `index`-th move event of `agent`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VertexId {
    pub agent: usize,
    pub index: usize,
}

impl VertexId {
    pub fn new(agent: usize, index: usize) -> Self {
        VertexId { agent, index }
    }
}

impl std::fmt::Display for VertexId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "v[{}][{}]", self.agent, self.index)
    }
}

/// A directed inter-agent precedence edge: `to` may happen only after
/// `from`. Ordering is lexicographic on (tail agent, tail index, head agent,
/// head index) and is used wherever a deterministic edge order is needed.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Type2Edge {
    pub from: VertexId,
    pub to: VertexId,
}

impl Type2Edge {
    pub fn new(from: VertexId, to: VertexId) -> Self {
        Type2Edge { from, to }
    }

    /// The edge that encodes the opposite passing order. Reversing
    /// `(v[j][s+1] -> v[i][k])` yields `(v[i][k+1] -> v[j][s])`: the two
    /// vertices before and after the shared location swap roles.
    pub fn reversed(&self) -> Type2Edge {
        debug_assert!(self.from.index >= 1);
        Type2Edge {
            from: VertexId::new(self.to.agent, self.to.index + 1),
            to: VertexId::new(self.from.agent, self.from.index - 1),
        }
    }
}

impl std::fmt::Display for Type2Edge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} -> {}", self.from, self.to)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TpgError {
    #[error("deadlock: unsatisfied vertices remain but none can be satisfied")]
    Deadlock,
    #[error("cyclic graph: no topological order exists")]
    CyclicGraph,
    #[error("malformed graph: {0}")]
    Malformed(String),
}

/// Vertex layout shared by a TPG and every switchable graph derived from
/// it: per-agent locations (`None` marks a delay dummy) plus flat indexing.
#[derive(Debug)]
pub(crate) struct Skeleton {
    locs: Vec<Vec<Option<Cell>>>,
    offsets: Vec<usize>,
    total: usize,
}

impl Skeleton {
    pub(crate) fn new(locs: Vec<Vec<Option<Cell>>>) -> Arc<Skeleton> {
        let mut offsets = Vec::with_capacity(locs.len());
        let mut total = 0;
        for chain in &locs {
            offsets.push(total);
            total += chain.len();
        }
        Arc::new(Skeleton { locs, offsets, total })
    }

    pub(crate) fn n_agents(&self) -> usize {
        self.locs.len()
    }

    pub(crate) fn len(&self, agent: usize) -> usize {
        self.locs[agent].len()
    }

    /// Index of agent's goal vertex (`z_i`).
    pub(crate) fn goal_index(&self, agent: usize) -> usize {
        self.locs[agent].len() - 1
    }

    pub(crate) fn vertex_count(&self) -> usize {
        self.total
    }

    pub(crate) fn flat(&self, v: VertexId) -> usize {
        debug_assert!(v.index < self.len(v.agent));
        self.offsets[v.agent] + v.index
    }

    pub(crate) fn contains(&self, v: VertexId) -> bool {
        v.agent < self.n_agents() && v.index < self.len(v.agent)
    }

    pub(crate) fn location(&self, v: VertexId) -> Option<Cell> {
        self.locs[v.agent][v.index]
    }

    /// Location an agent occupies at vertex `v`; a dummy vertex keeps the
    /// location of the last real vertex before it.
    pub(crate) fn effective_location(&self, v: VertexId) -> Cell {
        let chain = &self.locs[v.agent];
        chain[..=v.index]
            .iter()
            .rev()
            .find_map(|&loc| loc)
            .expect("vertex 0 always carries a location")
    }

    /// The last real (non-dummy) vertex at or before `v` on its chain.
    /// Vertex 0 is always real, so the walk terminates.
    pub(crate) fn real_vertex_at_or_before(&self, v: VertexId) -> VertexId {
        let chain = &self.locs[v.agent];
        let mut index = v.index;
        while chain[index].is_none() {
            index -= 1;
        }
        VertexId::new(v.agent, index)
    }

    pub(crate) fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.n_agents())
            .flat_map(move |agent| (0..self.len(agent)).map(move |index| VertexId::new(agent, index)))
    }

}

/// A temporal plan graph: the vertex skeleton plus a set of Type-2 edges.
/// Type-1 edges are implicit — they always connect consecutive vertices of
/// one agent. Immutable once built.
#[derive(Clone, Debug)]
pub struct Tpg {
    pub(crate) skel: Arc<Skeleton>,
    type2: Vec<Type2Edge>,
    in2: Vec<Vec<VertexId>>,
    out2: Vec<Vec<VertexId>>,
}

impl Tpg {
    pub(crate) fn from_skeleton(skel: Arc<Skeleton>, mut type2: Vec<Type2Edge>) -> Tpg {
        type2.sort();
        type2.dedup();
        let mut in2 = vec![Vec::new(); skel.vertex_count()];
        let mut out2 = vec![Vec::new(); skel.vertex_count()];
        for e in &type2 {
            out2[skel.flat(e.from)].push(e.to);
            in2[skel.flat(e.to)].push(e.from);
        }
        Tpg { skel, type2, in2, out2 }
    }

    /// Assembles a graph from raw parts. `locations[i][k]` is the cell of
    /// vertex `(i, k)`, or `None` for a dummy. Structural invariants are
    /// checked; location consistency of the edges is not.
    pub fn from_parts(
        locations: Vec<Vec<Option<Cell>>>,
        edges: Vec<Type2Edge>,
    ) -> Result<Tpg, TpgError> {
        if locations.is_empty() || locations.iter().any(|c| c.is_empty()) {
            return Err(TpgError::Malformed("every agent needs at least one vertex".into()));
        }
        if locations.iter().any(|c| c[0].is_none()) {
            return Err(TpgError::Malformed("vertex 0 of an agent cannot be a dummy".into()));
        }
        let skel = Skeleton::new(locations);
        for e in &edges {
            if !skel.contains(e.from) || !skel.contains(e.to) {
                return Err(TpgError::Malformed(format!("edge {e} out of range")));
            }
            if e.from.agent == e.to.agent {
                return Err(TpgError::Malformed(format!("edge {e} connects one agent to itself")));
            }
            if e.from.index == 0 {
                return Err(TpgError::Malformed(format!("edge {e} leaves an initial vertex")));
            }
        }
        Ok(Tpg::from_skeleton(skel, edges))
    }

    pub fn n_agents(&self) -> usize {
        self.skel.n_agents()
    }

    pub fn vertex_count(&self) -> usize {
        self.skel.vertex_count()
    }

    /// `z_i`: index of agent's last (goal) vertex.
    pub fn goal_index(&self, agent: usize) -> usize {
        self.skel.goal_index(agent)
    }

    pub fn goal_vertex(&self, agent: usize) -> VertexId {
        VertexId::new(agent, self.goal_index(agent))
    }

    pub fn flat_index(&self, v: VertexId) -> usize {
        self.skel.flat(v)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.skel.vertices()
    }

    pub fn location(&self, v: VertexId) -> Option<Cell> {
        self.skel.location(v)
    }

    pub fn is_dummy(&self, v: VertexId) -> bool {
        self.skel.location(v).is_none()
    }

    pub fn effective_location(&self, v: VertexId) -> Cell {
        self.skel.effective_location(v)
    }

    /// The vertex at which the edge tail's agent arrives at the shared
    /// location: the tail's predecessor, skipping spliced dummies. The
    /// agent occupies the shared location from this vertex until the tail.
    pub fn arrival_vertex(&self, e: Type2Edge) -> VertexId {
        self.skel
            .real_vertex_at_or_before(VertexId::new(e.from.agent, e.from.index - 1))
    }

    pub fn type2_edges(&self) -> &[Type2Edge] {
        &self.type2
    }

    pub fn type1_edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.n_agents()).flat_map(move |agent| {
            (0..self.goal_index(agent))
                .map(move |k| (VertexId::new(agent, k), VertexId::new(agent, k + 1)))
        })
    }

    pub fn type2_in_neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.in2[self.skel.flat(v)]
    }

    /// All successors of `v`: the Type-1 follower, then Type-2 heads.
    pub fn successors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        let next = (v.index + 1 < self.skel.len(v.agent))
            .then(|| VertexId::new(v.agent, v.index + 1));
        next.into_iter().chain(self.out2[self.skel.flat(v)].iter().copied())
    }
}

/// Builds the TPG of a valid solution: one vertex per tuple and exactly the
/// Type-2 edges `(v[j][s+1] -> v[i][k])` with `l[j][s] == l[i][k]` and
/// `t[j][s+1] < t[i][k]`.
pub fn build_tpg(sol: &MapfSolution) -> Tpg {
    let locs: Vec<Vec<Option<Cell>>> = sol
        .paths
        .iter()
        .map(|path| path.iter().map(|&(c, _)| Some(c)).collect())
        .collect();
    let skel = Skeleton::new(locs);

    // Bucket visits by location: (agent, index, arrival time).
    let mut visits: HashMap<Cell, Vec<(usize, usize, u32)>> = HashMap::new();
    for (agent, path) in sol.paths.iter().enumerate() {
        for (index, &(cell, t)) in path.iter().enumerate() {
            visits.entry(cell).or_default().push((agent, index, t));
        }
    }

    let mut edges = Vec::new();
    for bucket in visits.values() {
        for &(j, s, _) in bucket {
            if s + 1 >= sol.paths[j].len() {
                continue; // j never leaves this location
            }
            let depart = sol.paths[j][s + 1].1;
            for &(i, k, arrive) in bucket {
                if i != j && depart < arrive {
                    edges.push(Type2Edge::new(VertexId::new(j, s + 1), VertexId::new(i, k)));
                }
            }
        }
    }
    Tpg::from_skeleton(skel, edges)
}

/// Execution marks for one graph: per-vertex satisfied flags, each agent's
/// most recently satisfied index, and the accumulated cost counter. Single
/// owner; step it against the graph it was created for.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExecutionState {
    satisfied: Vec<bool>,
    progress: Vec<usize>,
    cost: Cost,
}

impl ExecutionState {
    /// Initial state: vertex 0 of every agent is satisfied.
    pub fn initial(g: &Tpg) -> ExecutionState {
        ExecutionState::from_progress(g, &vec![0; g.n_agents()])
    }

    /// State with every vertex of agent `i` up to `progress[i]` satisfied
    /// and zero accumulated cost.
    pub fn from_progress(g: &Tpg, progress: &[usize]) -> ExecutionState {
        assert_eq!(progress.len(), g.n_agents());
        let mut satisfied = vec![false; g.vertex_count()];
        for (agent, &p) in progress.iter().enumerate() {
            assert!(p <= g.goal_index(agent));
            for index in 0..=p {
                satisfied[g.flat_index(VertexId::new(agent, index))] = true;
            }
        }
        ExecutionState {
            satisfied,
            progress: progress.to_vec(),
            cost: 0,
        }
    }

    pub fn progress(&self) -> &[usize] {
        &self.progress
    }

    pub fn cost(&self) -> Cost {
        self.cost
    }

    pub fn is_satisfied(&self, g: &Tpg, v: VertexId) -> bool {
        self.satisfied[g.flat_index(v)]
    }

    pub fn is_finished(&self, g: &Tpg, agent: usize) -> bool {
        self.progress[agent] == g.goal_index(agent)
    }

    pub fn is_complete(&self, g: &Tpg) -> bool {
        (0..g.n_agents()).all(|agent| self.is_finished(g, agent))
    }

    /// One execution iteration. Charges one cost unit per unfinished agent,
    /// gathers every agent's first unsatisfied vertex whose Type-2
    /// in-neighbors are all satisfied, then marks the gathered set. Errors
    /// with a deadlock when nothing can be marked.
    pub fn step(&mut self, g: &Tpg) -> Result<Vec<VertexId>, TpgError> {
        let mut ready = Vec::new();
        for agent in 0..g.n_agents() {
            if self.is_finished(g, agent) {
                continue;
            }
            self.cost += 1;
            let candidate = VertexId::new(agent, self.progress[agent] + 1);
            if g.type2_in_neighbors(candidate)
                .iter()
                .all(|&u| self.satisfied[g.flat_index(u)])
            {
                ready.push(candidate);
            }
        }
        if ready.is_empty() {
            return Err(TpgError::Deadlock);
        }
        for &v in &ready {
            self.satisfied[g.flat_index(v)] = true;
            self.progress[v.agent] = v.index;
        }
        Ok(ready)
    }

    /// Rebuilds the state for a re-indexed skeleton. `translate` maps old
    /// vertex ids to new ones; fresh (dummy) vertices stay unsatisfied.
    pub(crate) fn remap(
        &self,
        old: &Skeleton,
        new: &Skeleton,
        translate: impl Fn(VertexId) -> VertexId,
    ) -> ExecutionState {
        let mut satisfied = vec![false; new.vertex_count()];
        let mut progress = vec![0; new.n_agents()];
        for v in old.vertices() {
            if self.satisfied[old.flat(v)] {
                let nv = translate(v);
                satisfied[new.flat(nv)] = true;
                progress[nv.agent] = progress[nv.agent].max(nv.index);
            }
        }
        ExecutionState {
            satisfied,
            progress,
            cost: self.cost,
        }
    }
}

/// Result of running a graph to completion: the cost accumulated from the
/// starting state, and the iteration at which each vertex became satisfied
/// (0 for vertices satisfied at start).
#[derive(Clone, Debug)]
pub struct ExecReport {
    pub cost: Cost,
    pub iterations: Vec<u32>,
    pub iteration_count: u32,
}

impl ExecReport {
    pub fn iteration(&self, g: &Tpg, v: VertexId) -> u32 {
        self.iterations[g.flat_index(v)]
    }
}

/// Runs the execution loop to completion from `from` (or the initial state)
/// and reports cost and per-vertex satisfaction iterations. Errors with a
/// deadlock on graphs where execution gets stuck; cost accumulated so far is
/// lost in that case.
pub fn exec_tpg(g: &Tpg, from: Option<&ExecutionState>) -> Result<ExecReport, TpgError> {
    let mut state = match from {
        Some(s) => {
            let mut s = s.clone();
            s.cost = 0;
            s
        }
        None => ExecutionState::initial(g),
    };
    let mut iterations = vec![0u32; g.vertex_count()];
    let mut iteration = 0u32;
    while !state.is_complete(g) {
        let ready = state.step(g)?;
        iteration += 1;
        for v in ready {
            iterations[g.flat_index(v)] = iteration;
        }
    }
    Ok(ExecReport {
        cost: state.cost,
        iterations,
        iteration_count: iteration,
    })
}

/// Per-iteration agent positions of an execution, starting from the initial
/// configuration: `frames[t][agent]`. Dummy vertices keep the agent at its
/// current location.
pub fn replay_frames(g: &Tpg, report: &ExecReport) -> Vec<Vec<Cell>> {
    let mut progress = vec![0usize; g.n_agents()];
    let mut frames = Vec::with_capacity(report.iteration_count as usize + 1);
    for t in 0..=report.iteration_count {
        for (agent, current) in progress.iter_mut().enumerate() {
            while *current < g.goal_index(agent)
                && report.iterations[g.flat_index(VertexId::new(agent, *current + 1))] <= t
            {
                *current += 1;
            }
        }
        frames.push(
            (0..g.n_agents())
                .map(|agent| g.effective_location(VertexId::new(agent, progress[agent])))
                .collect(),
        );
    }
    frames
}

/// True iff the directed graph over Type-1 and Type-2 edges has a cycle.
/// Iterative DFS with the usual three-color marking.
pub fn has_cycle(g: &Tpg) -> bool {
    const WHITE: u8 = 0;
    const GREY: u8 = 1;
    const BLACK: u8 = 2;
    let mut color = vec![WHITE; g.vertex_count()];

    for root in g.vertices() {
        if color[g.flat_index(root)] != WHITE {
            continue;
        }
        // Stack of (vertex, entered): entered=false on first visit,
        // true when all successors have been pushed.
        let mut stack = vec![(root, false)];
        while let Some((v, entered)) = stack.pop() {
            let idx = g.flat_index(v);
            if entered {
                color[idx] = BLACK;
                continue;
            }
            if color[idx] == BLACK {
                continue;
            }
            color[idx] = GREY;
            stack.push((v, true));
            for next in g.successors(v) {
                match color[g.flat_index(next)] {
                    GREY => return true,
                    WHITE => stack.push((next, false)),
                    _ => {}
                }
            }
        }
    }
    false
}

/// Longest-path lengths from the initial vertices, per vertex.
#[derive(Clone, Debug)]
pub struct LongestPaths {
    values: Vec<u32>,
}

impl LongestPaths {
    pub fn get(&self, g: &Tpg, v: VertexId) -> u32 {
        self.values[g.flat_index(v)]
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub(crate) fn from_values(values: Vec<u32>) -> LongestPaths {
        LongestPaths { values }
    }
}

/// Computes longest paths in three steps: zero-initialize, topologically
/// sort, then relax `lp[u] = max(lp[u], lp[v] + 1)` along every edge
/// `(v -> u)` in topological order. O(|V| + |E|). Errors on cyclic graphs.
pub fn longest_paths(g: &Tpg) -> Result<LongestPaths, TpgError> {
    let n = g.vertex_count();
    let mut indegree = vec![0u32; n];
    for v in g.vertices() {
        for next in g.successors(v) {
            indegree[g.flat_index(next)] += 1;
        }
    }
    // In-degree peeling; the heap keeps the order deterministic (agent id,
    // then index) among simultaneously available vertices.
    let mut heap: BinaryHeap<Reverse<VertexId>> = g
        .vertices()
        .filter(|&v| indegree[g.flat_index(v)] == 0)
        .map(Reverse)
        .collect();
    let mut lp = vec![0u32; n];
    let mut processed = 0usize;
    while let Some(Reverse(v)) = heap.pop() {
        processed += 1;
        let base = lp[g.flat_index(v)];
        for next in g.successors(v) {
            let idx = g.flat_index(next);
            lp[idx] = lp[idx].max(base + 1);
            indegree[idx] -= 1;
            if indegree[idx] == 0 {
                heap.push(Reverse(next));
            }
        }
    }
    if processed != n {
        return Err(TpgError::CyclicGraph);
    }
    Ok(LongestPaths::from_values(lp))
}

/// Graph cost via longest paths: the sum over agents of the goal vertex's
/// longest-path length. Agrees exactly with [`exec_tpg`] on acyclic graphs.
pub fn tpg_cost_via_lp(g: &Tpg) -> Result<Cost, TpgError> {
    let lp = longest_paths(g)?;
    Ok((0..g.n_agents())
        .map(|agent| lp.get(g, g.goal_vertex(agent)) as Cost)
        .sum())
}

#[derive(Serialize, Deserialize)]
struct TpgJson {
    agents: Vec<TpgAgentJson>,
    type2_edges: Vec<TpgEdgeJson>,
}

#[derive(Serialize, Deserialize)]
struct TpgAgentJson {
    id: usize,
    vertices: Vec<Option<[u32; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct TpgEdgeJson {
    from: [usize; 2],
    to: [usize; 2],
}

/// Serializes to
/// `{"agents":[{"id":0,"vertices":[[x,y]|null,...]}],"type2_edges":[{"from":[a,k],"to":[a,k]},...]}`.
pub fn tpg_to_json(g: &Tpg) -> String {
    let doc = TpgJson {
        agents: (0..g.n_agents())
            .map(|agent| TpgAgentJson {
                id: agent,
                vertices: (0..=g.goal_index(agent))
                    .map(|k| g.location(VertexId::new(agent, k)).map(|c| [c.x, c.y]))
                    .collect(),
            })
            .collect(),
        type2_edges: g
            .type2_edges()
            .iter()
            .map(|e| TpgEdgeJson {
                from: [e.from.agent, e.from.index],
                to: [e.to.agent, e.to.index],
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("tpg serialization")
}

pub fn tpg_from_json(text: &str) -> Result<Tpg, TpgError> {
    let doc: TpgJson =
        serde_json::from_str(text).map_err(|e| TpgError::Malformed(e.to_string()))?;
    let mut locations = vec![Vec::new(); doc.agents.len()];
    for agent in &doc.agents {
        if agent.id >= locations.len() {
            return Err(TpgError::Malformed(format!("bad agent id {}", agent.id)));
        }
        locations[agent.id] = agent
            .vertices
            .iter()
            .map(|v| v.map(|[x, y]| Cell::new(x, y)))
            .collect();
    }
    let edges = doc
        .type2_edges
        .iter()
        .map(|e| {
            Type2Edge::new(
                VertexId::new(e.from[0], e.from[1]),
                VertexId::new(e.to[0], e.to[1]),
            )
        })
        .collect();
    Tpg::from_parts(locations, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::generate_instance;
    use crate::solution::{collision_violations, solution_cost};

    fn path(steps: &[(u32, u32, u32)]) -> Vec<(Cell, u32)> {
        steps.iter().map(|&(x, y, t)| (Cell::new(x, y), t)).collect()
    }

    /// Literal quadruple-loop scan over (j, s, i, k) applying the Type-2
    /// edge definition directly. Independent of the bucketed construction.
    fn type2_oracle(sol: &MapfSolution) -> Vec<Type2Edge> {
        let mut edges = Vec::new();
        for j in 0..sol.n_agents() {
            for s in 0..sol.paths[j].len().saturating_sub(1) {
                for i in 0..sol.n_agents() {
                    if i == j {
                        continue;
                    }
                    for k in 0..sol.paths[i].len() {
                        let same_loc = sol.paths[j][s].0 == sol.paths[i][k].0;
                        let leaves_before = sol.paths[j][s + 1].1 < sol.paths[i][k].1;
                        if same_loc && leaves_before {
                            edges.push(Type2Edge::new(
                                VertexId::new(j, s + 1),
                                VertexId::new(i, k),
                            ));
                        }
                    }
                }
            }
        }
        edges.sort();
        edges.dedup();
        edges
    }

    /// Memoized recursive longest path from the initial vertices.
    fn lp_oracle(g: &Tpg) -> Vec<u32> {
        fn rec(g: &Tpg, v: VertexId, memo: &mut HashMap<VertexId, u32>) -> u32 {
            if let Some(&x) = memo.get(&v) {
                return x;
            }
            let mut preds: Vec<VertexId> = g.type2_in_neighbors(v).to_vec();
            if v.index > 0 {
                preds.push(VertexId::new(v.agent, v.index - 1));
            }
            let value = preds
                .iter()
                .map(|&u| rec(g, u, memo) + 1)
                .max()
                .unwrap_or(0);
            memo.insert(v, value);
            value
        }
        let mut memo = HashMap::new();
        g.vertices().map(|v| rec(g, v, &mut memo)).collect()
    }

    /// Two crossing agents sharing one location D=(1,1): agent 0 passes it
    /// first (leaves at t=3), agent 1 arrives at t=4.
    fn crossing_solution() -> MapfSolution {
        MapfSolution {
            paths: vec![
                path(&[(0, 0, 0), (0, 1, 1), (1, 1, 2), (2, 1, 3)]),
                path(&[(2, 0, 0), (1, 0, 1), (1, 1, 4), (1, 2, 5)]),
            ],
        }
    }

    #[test]
    fn type2_edge_leaves_departure_vertex_not_arrival() {
        let g = build_tpg(&crossing_solution());
        let expected = Type2Edge::new(VertexId::new(0, 3), VertexId::new(1, 2));
        assert_eq!(g.type2_edges(), &[expected]);
        // The edge tail is the move *away from* the shared cell, never the
        // arrival itself.
        assert!(!g
            .type2_edges()
            .contains(&Type2Edge::new(VertexId::new(0, 2), VertexId::new(1, 2))));
    }

    #[test]
    fn single_agent_chain_has_no_type2_edges() {
        let sol = MapfSolution {
            paths: vec![path(&[(0, 0, 0), (1, 0, 1), (2, 0, 2), (3, 0, 3)])],
        };
        let g = build_tpg(&sol);
        assert_eq!(g.type1_edges().count(), 3);
        assert!(g.type2_edges().is_empty());
    }

    #[test]
    fn build_matches_quadruple_loop_oracle() {
        for seed in 0..30 {
            let (_, _, sol) = generate_instance(seed, 6, 6, 3, 0.1).unwrap();
            let g = build_tpg(&sol);
            assert_eq!(g.type2_edges(), type2_oracle(&sol).as_slice(), "seed {seed}");
        }
    }

    #[test]
    fn exec_cost_of_plain_chain_is_path_length() {
        let sol = MapfSolution {
            paths: vec![path(&[(0, 0, 0), (1, 0, 1), (2, 0, 2), (3, 0, 3), (4, 0, 4), (4, 1, 5)])],
        };
        let report = exec_tpg(&build_tpg(&sol), None).unwrap();
        assert_eq!(report.cost, 5);
    }

    #[test]
    fn unnecessary_wait_is_dropped_by_execution() {
        // The timestep gap at the second tuple is not forced by any
        // precedence, so execution beats the timed plan.
        let sol = MapfSolution {
            paths: vec![path(&[(0, 0, 0), (1, 0, 3), (2, 0, 4)])],
        };
        let report = exec_tpg(&build_tpg(&sol), None).unwrap();
        assert_eq!(report.cost, 2);
        assert!(report.cost < solution_cost(&sol));
    }

    #[test]
    fn antiparallel_edges_deadlock_and_cycle() {
        let locs = vec![
            vec![Some(Cell::new(0, 0)), Some(Cell::new(1, 0))],
            vec![Some(Cell::new(0, 1)), Some(Cell::new(1, 1))],
        ];
        let edges = vec![
            Type2Edge::new(VertexId::new(0, 1), VertexId::new(1, 1)),
            Type2Edge::new(VertexId::new(1, 1), VertexId::new(0, 1)),
        ];
        let g = Tpg::from_parts(locs, edges).unwrap();
        assert!(has_cycle(&g));
        assert_eq!(exec_tpg(&g, None).unwrap_err(), TpgError::Deadlock);
        assert_eq!(longest_paths(&g).unwrap_err(), TpgError::CyclicGraph);
    }

    #[test]
    fn built_graphs_are_acyclic_and_deadlock_free() {
        for seed in 0..20 {
            let (_, _, sol) = generate_instance(seed, 6, 6, 3, 0.1).unwrap();
            let g = build_tpg(&sol);
            assert!(!has_cycle(&g));
            assert!(exec_tpg(&g, None).is_ok());
        }
    }

    #[test]
    fn execution_never_beats_iteration_bound_of_plan() {
        // Every vertex is satisfied no later than its planned timestep.
        for seed in 0..20 {
            let (_, _, sol) = generate_instance(seed, 6, 6, 3, 0.1).unwrap();
            let g = build_tpg(&sol);
            let report = exec_tpg(&g, None).unwrap();
            for (agent, p) in sol.paths.iter().enumerate() {
                for (index, &(_, t)) in p.iter().enumerate() {
                    assert!(report.iteration(&g, VertexId::new(agent, index)) <= t);
                }
            }
            assert!(report.cost <= solution_cost(&sol));
        }
    }

    #[test]
    fn chain_longest_paths_count_indices() {
        let sol = MapfSolution {
            paths: vec![path(&[(0, 0, 0), (1, 0, 1), (2, 0, 2), (3, 0, 3), (4, 0, 4), (4, 1, 5)])],
        };
        let g = build_tpg(&sol);
        let lp = longest_paths(&g).unwrap();
        for k in 0..=5 {
            assert_eq!(lp.get(&g, VertexId::new(0, k)), k as u32);
        }
        assert_eq!(tpg_cost_via_lp(&g).unwrap(), 5);
    }

    #[test]
    fn satisfaction_iteration_equals_longest_path() {
        for seed in 0..20 {
            let (_, _, sol) = generate_instance(seed, 6, 6, 3, 0.1).unwrap();
            let g = build_tpg(&sol);
            let report = exec_tpg(&g, None).unwrap();
            let lp = longest_paths(&g).unwrap();
            for v in g.vertices() {
                assert_eq!(report.iteration(&g, v), lp.get(&g, v), "{v}");
            }
            assert_eq!(tpg_cost_via_lp(&g).unwrap(), report.cost);
        }
    }

    #[test]
    fn longest_paths_match_memoized_recursion() {
        for seed in 0..15 {
            let (_, _, sol) = generate_instance(seed, 6, 6, 3, 0.1).unwrap();
            let g = build_tpg(&sol);
            let lp = longest_paths(&g).unwrap();
            assert_eq!(lp.values(), lp_oracle(&g).as_slice());
        }
    }

    #[test]
    fn replayed_execution_is_collision_free() {
        for seed in 0..20 {
            let (_, _, sol) = generate_instance(seed, 6, 6, 4, 0.1).unwrap();
            let g = build_tpg(&sol);
            let report = exec_tpg(&g, None).unwrap();
            let frames = replay_frames(&g, &report);
            assert!(collision_violations(&frames).is_empty(), "seed {seed}");
        }
    }

    #[test]
    fn json_round_trip() {
        let (_, _, sol) = generate_instance(11, 5, 5, 3, 0.1).unwrap();
        let g = build_tpg(&sol);
        let text = tpg_to_json(&g);
        let back = tpg_from_json(&text).unwrap();
        assert_eq!(back.type2_edges(), g.type2_edges());
        assert_eq!(back.vertex_count(), g.vertex_count());
        assert_eq!(
            exec_tpg(&back, None).unwrap().cost,
            exec_tpg(&g, None).unwrap().cost
        );
    }
}
