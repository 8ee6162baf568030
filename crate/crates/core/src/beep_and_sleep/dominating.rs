//! DominatingSet through Beep-and-Sleep: every vertex is a set (its closed
//! neighbourhood) and an element at once.
//!
//! A vertex cannot beep and listen in the same slot. An element that is
//! active and still uncovered when its set side wakes therefore skips the
//! listening and joins directly in that round's announcement slot.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::schedule::{PhaseSchedule, SlotPos};
use crate::beeping::{
    run, BeepMetrics, BeepProtocol, CommGraph, NodeRng, Role, RunConfig, SlotAction,
};
use crate::instance::{Delta, Instance, Solution};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge ({0}, {1}) references a vertex outside 0..{2}")]
    OutOfRange(usize, usize, usize),
    #[error("self loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
}

/// Simple undirected graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::OutOfRange(u, v, n));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(GraphError::DuplicateEdge(u, w[0]));
            }
        }
        Ok(Graph { adj })
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        if self.adj.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.n()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &w in &self.adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

pub fn cycle_graph(n: usize) -> Graph {
    assert!(n >= 3, "cycles need at least three vertices");
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::new(n, &edges).expect("cycle is simple")
}

/// `K_{1,leaves}` with the centre at vertex 0.
pub fn star_graph(leaves: usize) -> Graph {
    let edges: Vec<(usize, usize)> = (1..=leaves).map(|v| (0, v)).collect();
    Graph::new(leaves + 1, &edges).expect("star is simple")
}

/// Random spanning tree (uniform attachment over a shuffled vertex order)
/// plus every remaining pair independently with probability `extra_edge_prob`.
pub fn random_connected_graph(n: usize, extra_edge_prob: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut present = vec![vec![false; n]; n];
    let mut edges = Vec::new();
    for i in 1..n {
        let (u, v) = (order[i], order[rng.gen_range(0..i)]);
        present[u][v] = true;
        present[v][u] = true;
        edges.push((u, v));
    }
    for (u, row) in present.iter().enumerate() {
        for (v, &linked) in row.iter().enumerate().skip(u + 1) {
            if !linked && rng.gen_bool(extra_edge_prob) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, &edges).expect("generated graph is simple")
}

/// SetCover view of DominatingSet: set `v` is the closed neighbourhood `N[v]`.
pub fn closed_neighborhood_instance(g: &Graph) -> Instance {
    let sets = (0..g.n())
        .map(|v| {
            let mut s = g.neighbors(v).to_vec();
            s.push(v);
            s
        })
        .collect();
    Instance::new(g.n(), sets).expect("closed neighbourhoods cover every vertex")
}

pub fn is_dominating<'a>(g: &Graph, set: impl IntoIterator<Item = &'a usize>) -> bool {
    let mut dominated = vec![false; g.n()];
    for &v in set {
        dominated[v] = true;
        for &w in g.neighbors(v) {
            dominated[w] = true;
        }
    }
    dominated.into_iter().all(|d| d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DsNode {
    pub x: u32,
    pub wake_round: usize,
    pub beep_slot_count: usize,
    pub joined: bool,
    pub joined_at: Option<u64>,
    pub covered: bool,
    pub active: bool,
    pub beep_slot: usize,
    pub heard_probe: bool,
    pub finished: bool,
}

struct DominatingBeep {
    schedule: PhaseSchedule,
}

impl DominatingBeep {
    fn join(node: &mut DsNode, slot: u64) -> SlotAction {
        node.joined = true;
        node.covered = true;
        node.joined_at = Some(slot);
        SlotAction::Beep
    }
}

impl BeepProtocol for DominatingBeep {
    type Node = DsNode;

    fn spawn(&self, _: Role) -> DsNode {
        DsNode {
            x: 0,
            wake_round: 0,
            beep_slot_count: 0,
            joined: false,
            joined_at: None,
            covered: false,
            active: false,
            beep_slot: 1,
            heard_probe: false,
            finished: false,
        }
    }

    fn act(&self, node: &mut DsNode, slot: u64, rng: &mut NodeRng) -> SlotAction {
        let sched = &self.schedule;
        if slot + 1 == sched.total_slots() {
            node.finished = true;
        }
        match sched.locate(slot) {
            SlotPos::Main {
                phase,
                round,
                slot: idx,
            } => {
                if round == 0 && idx == 0 {
                    if !node.joined {
                        node.x = sched.draw_wake_sample(rng);
                        node.wake_round = sched.wake_round(node.x);
                    }
                    node.active = !node.covered && rng.gen_bool(sched.activation_prob(phase));
                    node.beep_slot = rng.gen_range(1..=sched.rounds_per_phase());
                    node.beep_slot_count = 0;
                }
                let beeper = node.active && !node.covered;
                let awake = !node.joined && round == node.wake_round;
                if idx < sched.announce_slot() {
                    if beeper {
                        if idx + 1 == node.beep_slot {
                            SlotAction::Beep
                        } else {
                            SlotAction::Idle
                        }
                    } else if awake {
                        SlotAction::Listen
                    } else {
                        SlotAction::Idle
                    }
                } else if awake && (beeper || node.beep_slot_count >= sched.join_threshold()) {
                    Self::join(node, slot)
                } else if !node.covered {
                    SlotAction::Listen
                } else {
                    SlotAction::Idle
                }
            }
            SlotPos::CleanupProbe => {
                if !node.covered {
                    SlotAction::Beep
                } else if !node.joined {
                    SlotAction::Listen
                } else {
                    SlotAction::Idle
                }
            }
            SlotPos::CleanupJoin => {
                if !node.joined && node.heard_probe {
                    Self::join(node, slot)
                } else if !node.covered {
                    SlotAction::Listen
                } else {
                    SlotAction::Idle
                }
            }
            SlotPos::Done => SlotAction::Idle,
        }
    }

    fn hear(&self, node: &mut DsNode, slot: u64, heard: bool) {
        match self.schedule.locate(slot) {
            SlotPos::Main { slot: idx, .. } if idx < self.schedule.announce_slot() => {
                node.beep_slot_count += usize::from(heard);
            }
            SlotPos::Main { .. } => node.covered |= heard,
            SlotPos::CleanupProbe => node.heard_probe = heard,
            SlotPos::CleanupJoin => {
                // Nobody around can cover this vertex any more: it dominates itself.
                if !heard {
                    node.joined = true;
                    node.joined_at = Some(slot);
                }
                node.covered = true;
            }
            SlotPos::Done => {}
        }
    }

    fn finished(&self, node: &DsNode) -> bool {
        node.finished
    }

    fn horizon(&self) -> u64 {
        self.schedule.total_slots()
    }
}

#[derive(Debug, Clone)]
pub struct DominatingReport {
    /// `chosen` is the dominating set; vertex `v`'s coverer is the earliest
    /// joined vertex of `N[v]` (lowest id on ties) with its join slot.
    pub solution: Solution,
    pub metrics: BeepMetrics,
}

/// Runs the DominatingSet variant with `Δ = max degree + 1`, the largest
/// closed neighbourhood.
pub fn run_dominating_set(g: &Graph, k: usize, seed: u64) -> DominatingReport {
    let protocol = DominatingBeep {
        schedule: PhaseSchedule::new(Delta::new(g.max_degree() + 1), k),
    };
    let graph = CommGraph::from_adjacency(g.adj.clone());
    let run = run(&graph, &protocol, RunConfig::new(seed, protocol.horizon()))
        .expect("DominatingSet run terminates at its horizon");
    let mut solution = Solution::new(g.n());
    for (v, node) in run.nodes.iter().enumerate() {
        if node.joined {
            solution.chosen.insert(v);
        }
    }
    for v in 0..g.n() {
        solution.per_element_coverer[v] = std::iter::once(v)
            .chain(g.neighbors(v).iter().copied())
            .filter_map(|u| run.nodes[u].joined_at.map(|t| (t, u)))
            .min()
            .map(|(t, u)| (u, t));
    }
    DominatingReport {
        solution,
        metrics: run.metrics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_is_dominated() {
        let g = star_graph(5);
        for seed in 0..20 {
            let r = run_dominating_set(&g, 2, seed);
            assert!(is_dominating(&g, &r.solution.chosen));
            assert!(r.solution.provenance_consistent());
        }
    }

    #[test]
    fn single_vertex_selects_itself() {
        let g = Graph::new(1, &[]).unwrap();
        for k in 1..4 {
            let r = run_dominating_set(&g, k, 3);
            assert_eq!(
                r.solution.chosen.iter().copied().collect::<Vec<_>>(),
                vec![0]
            );
        }
    }

    #[test]
    fn isolated_vertices_dominate_themselves() {
        let g = Graph::new(4, &[(0, 1)]).unwrap();
        let r = run_dominating_set(&g, 2, 9);
        assert!(is_dominating(&g, &r.solution.chosen));
        assert!(r.solution.chosen.contains(&2) && r.solution.chosen.contains(&3));
    }

    #[test]
    fn cycle_eight_mean_size() {
        // OPT(C_8) = 3 (e.g. {0, 3, 6}); the mean over 200 seeds must stay ≤ 6.
        let g = cycle_graph(8);
        let total: usize = (0..200)
            .map(|seed| {
                let r = run_dominating_set(&g, 2, seed);
                assert!(is_dominating(&g, &r.solution.chosen));
                r.solution.size()
            })
            .sum();
        assert!(total as f64 / 200.0 <= 6.0, "mean {}", total as f64 / 200.0);
    }

    #[test]
    fn graph_validation_and_generators() {
        assert_eq!(
            Graph::new(2, &[(0, 2)]),
            Err(GraphError::OutOfRange(0, 2, 2))
        );
        assert_eq!(Graph::new(2, &[(1, 1)]), Err(GraphError::SelfLoop(1)));
        assert_eq!(
            Graph::new(2, &[(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        for seed in 0..20 {
            let g = random_connected_graph(30, 0.05, seed);
            assert!(g.is_connected());
        }
        assert!(!Graph::new(3, &[(0, 1)]).unwrap().is_connected());
        let inst = closed_neighborhood_instance(&cycle_graph(5));
        assert_eq!(inst.delta().get(), 3);
        assert!(is_dominating(&cycle_graph(6), &[0, 3]));
        assert!(!is_dominating(&cycle_graph(6), &[0]));
    }
}
