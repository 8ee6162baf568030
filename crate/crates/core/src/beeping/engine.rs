use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::Instance;

/// Per-node random stream. Each node's stream is forked from the trial seed
/// and the node index, so replays are exact and streams are independent.
pub type NodeRng = ChaCha8Rng;

pub fn node_rng(seed: u64, node: usize) -> NodeRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(node as u64);
    rng
}

/// Static role of a node, the only thing a node learns about itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Set,
    Element,
    /// Both a set and an element (DominatingSet).
    Vertex,
}

/// Communication graph of a beeping network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommGraph {
    adj: Vec<Vec<usize>>,
    roles: Vec<Role>,
}

impl CommGraph {
    /// Bipartite problem graph: set `s` is node `s`, element `e` is node
    /// `m + e`.
    pub fn from_instance(inst: &Instance) -> Self {
        let m = inst.n_sets();
        let mut adj: Vec<Vec<usize>> = inst
            .sets()
            .iter()
            .map(|members| members.iter().map(|&e| m + e).collect())
            .collect();
        adj.extend((0..inst.n_elements()).map(|e| inst.element_ports(e).to_vec()));
        let mut roles = vec![Role::Set; m];
        roles.resize(m + inst.n_elements(), Role::Element);
        CommGraph { adj, roles }
    }

    /// Undirected graph where every node plays both roles. Adjacency must be
    /// symmetric; this is not re-checked here.
    pub fn from_adjacency(adj: Vec<Vec<usize>>) -> Self {
        let roles = vec![Role::Vertex; adj.len()];
        CommGraph { adj, roles }
    }

    pub fn n_nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn role(&self, v: usize) -> Role {
        self.roles[v]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlotAction {
    Beep,
    Listen,
    Idle,
}

impl SlotAction {
    pub fn as_str(self) -> &'static str {
        match self {
            SlotAction::Beep => "BEEP",
            SlotAction::Listen => "LISTEN",
            SlotAction::Idle => "IDLE",
        }
    }
}

/// Carrier-sense result of one slot. `heard[v]` is `Some` only for nodes that
/// listened.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SlotOutcome {
    pub heard: Vec<Option<bool>>,
}

/// Computes what every listener hears given everyone's action.
pub fn step_slot(graph: &CommGraph, actions: &[SlotAction]) -> SlotOutcome {
    let mut out = SlotOutcome::default();
    let mut scratch = Vec::new();
    step_slot_into(graph, actions, &mut scratch, &mut out);
    out
}

fn step_slot_into(
    graph: &CommGraph,
    actions: &[SlotAction],
    beeped_near: &mut Vec<bool>,
    out: &mut SlotOutcome,
) -> u64 {
    assert_eq!(actions.len(), graph.n_nodes(), "one action per node");
    beeped_near.clear();
    beeped_near.resize(actions.len(), false);
    let mut beeps = 0;
    for (v, a) in actions.iter().enumerate() {
        if *a == SlotAction::Beep {
            beeps += 1;
            for &w in graph.neighbors(v) {
                beeped_near[w] = true;
            }
        }
    }
    out.heard.clear();
    out.heard.extend(
        actions
            .iter()
            .zip(beeped_near.iter())
            .map(|(a, &b)| (*a == SlotAction::Listen).then_some(b)),
    );
    beeps
}

/// A node-local program run by every node of a beeping network.
///
/// The engine owns all node states and calls into the protocol with one
/// state at a time, so a node can only base decisions on its own state, the
/// slot index, its private random stream and what it heard while listening.
pub trait BeepProtocol {
    type Node: Clone + std::fmt::Debug + PartialEq;

    fn spawn(&self, role: Role) -> Self::Node;
    fn act(&self, node: &mut Self::Node, slot: u64, rng: &mut NodeRng) -> SlotAction;
    /// Called only for nodes that listened in `slot`.
    fn hear(&self, node: &mut Self::Node, slot: u64, heard: bool);
    /// A finished node is never scheduled again and counts as idle.
    fn finished(&self, node: &Self::Node) -> bool;
    /// Number of slots the protocol needs.
    fn horizon(&self) -> u64;
}

/// Omniscient hook for instrumentation; it sees the whole network but cannot
/// influence it.
pub trait SlotObserver<N> {
    fn on_slot(&mut self, slot: u64, actions: &[SlotAction], outcome: &SlotOutcome, nodes: &[N]);
}

impl<N> SlotObserver<N> for () {
    fn on_slot(&mut self, _: u64, _: &[SlotAction], _: &SlotOutcome, _: &[N]) {}
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("slot budget {budget} is below the protocol horizon {horizon}")]
    BudgetBelowHorizon { budget: u64, horizon: u64 },
    #[error("protocol did not terminate within {0} slots")]
    HorizonExceeded(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BeepMetrics {
    pub slots: u64,
    pub beeps: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotRecord {
    pub actions: Vec<SlotAction>,
    pub heard: Vec<Option<bool>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Transcript {
    pub slots: Vec<SlotRecord>,
}

impl Transcript {
    /// One line per non-idle node per slot: `slot node ACTION [heard]`, where
    /// `heard` is `0`/`1` for listeners and omitted otherwise.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (t, rec) in self.slots.iter().enumerate() {
            for (v, a) in rec.actions.iter().enumerate() {
                match (a, rec.heard[v]) {
                    (SlotAction::Idle, _) => {}
                    (_, Some(h)) => {
                        let _ = writeln!(out, "{t} {v} {} {}", a.as_str(), u8::from(h));
                    }
                    (_, None) => {
                        let _ = writeln!(out, "{t} {v} {}", a.as_str());
                    }
                }
            }
        }
        out
    }

    pub fn beeps(&self) -> u64 {
        self.slots
            .iter()
            .flat_map(|r| &r.actions)
            .filter(|a| **a == SlotAction::Beep)
            .count() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    pub seed: u64,
    pub max_slots: u64,
    pub record_transcript: bool,
}

impl RunConfig {
    pub fn new(seed: u64, max_slots: u64) -> Self {
        RunConfig {
            seed,
            max_slots,
            record_transcript: false,
        }
    }

    pub fn with_transcript(mut self) -> Self {
        self.record_transcript = true;
        self
    }
}

#[derive(Debug, Clone)]
pub struct BeepRun<N> {
    pub nodes: Vec<N>,
    pub metrics: BeepMetrics,
    pub transcript: Option<Transcript>,
}

pub fn run<P: BeepProtocol>(
    graph: &CommGraph,
    protocol: &P,
    cfg: RunConfig,
) -> Result<BeepRun<P::Node>, EngineError> {
    run_observed(graph, protocol, cfg, &mut ())
}

/// Runs all nodes in lock-step from a common wake-up slot until every node
/// has finished.
pub fn run_observed<P, O>(
    graph: &CommGraph,
    protocol: &P,
    cfg: RunConfig,
    observer: &mut O,
) -> Result<BeepRun<P::Node>, EngineError>
where
    P: BeepProtocol,
    O: SlotObserver<P::Node>,
{
    let horizon = protocol.horizon();
    if cfg.max_slots < horizon {
        return Err(EngineError::BudgetBelowHorizon {
            budget: cfg.max_slots,
            horizon,
        });
    }
    let n = graph.n_nodes();
    let mut nodes: Vec<P::Node> = (0..n).map(|v| protocol.spawn(graph.role(v))).collect();
    let mut rngs: Vec<NodeRng> = (0..n).map(|v| node_rng(cfg.seed, v)).collect();
    let mut metrics = BeepMetrics::default();
    let mut transcript = cfg.record_transcript.then(Transcript::default);
    let mut actions = vec![SlotAction::Idle; n];
    let mut outcome = SlotOutcome::default();
    let mut scratch = Vec::new();
    let mut live: Vec<usize> = (0..n).filter(|&v| !protocol.finished(&nodes[v])).collect();

    let mut slot = 0;
    while !live.is_empty() {
        if slot >= cfg.max_slots {
            return Err(EngineError::HorizonExceeded(cfg.max_slots));
        }
        actions.fill(SlotAction::Idle);
        for &v in &live {
            actions[v] = protocol.act(&mut nodes[v], slot, &mut rngs[v]);
        }
        metrics.beeps += step_slot_into(graph, &actions, &mut scratch, &mut outcome);
        for &v in &live {
            if let Some(h) = outcome.heard[v] {
                protocol.hear(&mut nodes[v], slot, h);
            }
        }
        observer.on_slot(slot, &actions, &outcome, &nodes);
        if let Some(t) = transcript.as_mut() {
            t.slots.push(SlotRecord {
                actions: actions.clone(),
                heard: outcome.heard.clone(),
            });
        }
        live.retain(|&v| !protocol.finished(&nodes[v]));
        slot += 1;
    }
    metrics.slots = slot;
    Ok(BeepRun {
        nodes,
        metrics,
        transcript,
    })
}
