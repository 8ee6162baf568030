use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use super::query::{QueryCounter, QueryOracle};
use crate::beeping::{node_rng, NodeRng};
use crate::instance::Instance;

pub type Port = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Set,
    Element,
}

/// Harness-side identity of a node. Protocols never see it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeRef {
    pub side: Side,
    pub index: usize,
}

impl NodeRef {
    pub fn set(index: usize) -> Self {
        NodeRef {
            side: Side::Set,
            index,
        }
    }

    pub fn element(index: usize) -> Self {
        NodeRef {
            side: Side::Element,
            index,
        }
    }

    /// Engine slot: sets first, then elements.
    pub fn flat(self, n_sets: usize) -> usize {
        match self.side {
            Side::Set => self.index,
            Side::Element => n_sets + self.index,
        }
    }

    pub fn from_flat(v: usize, n_sets: usize) -> Self {
        if v < n_sets {
            NodeRef::set(v)
        } else {
            NodeRef::element(v - n_sets)
        }
    }
}

/// Message payloads. Every tag fits in a constant number of bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    Beep,
    Joined,
    Uncovered,
    JoinRequest,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tag::Beep => "BEEP",
            Tag::Joined => "JOINED",
            Tag::Uncovered => "UNCOVERED",
            Tag::JoinRequest => "JOIN-REQUEST",
        })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Kt0Error {
    #[error("{node:?} has no port {port}")]
    InvalidPort { node: NodeRef, port: Port },
    #[error("{node:?} sent twice on port {port} in one round")]
    DuplicateSend { node: NodeRef, port: Port },
    #[error("round budget {budget} is below the protocol horizon {horizon}")]
    BudgetBelowHorizon { budget: u64, horizon: u64 },
    #[error("protocol did not terminate within {0} rounds")]
    HorizonExceeded(u64),
}

/// Resolves where a message sent on a port ends up, and on which of the
/// receiver's ports it arrives.
pub trait Router {
    fn resolve(&mut self, from: NodeRef, port: Port) -> Result<(NodeRef, Port), Kt0Error>;
}

/// Reads the adjacency lists directly.
#[derive(Debug, Clone, Copy)]
pub struct DirectRouter<'a> {
    inst: &'a Instance,
}

impl<'a> DirectRouter<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        DirectRouter { inst }
    }
}

/// Position of `target` in a sorted adjacency list.
pub(crate) fn mate_port(list: &[usize], target: usize) -> Port {
    list.binary_search(&target)
        .expect("problem graph adjacency is symmetric")
}

impl Router for DirectRouter<'_> {
    fn resolve(&mut self, from: NodeRef, port: Port) -> Result<(NodeRef, Port), Kt0Error> {
        let invalid = Kt0Error::InvalidPort { node: from, port };
        match from.side {
            Side::Element => {
                let s = *self
                    .inst
                    .element_ports(from.index)
                    .get(port)
                    .ok_or(invalid)?;
                Ok((NodeRef::set(s), mate_port(self.inst.set(s), from.index)))
            }
            Side::Set => {
                let e = *self.inst.set(from.index).get(port).ok_or(invalid)?;
                Ok((
                    NodeRef::element(e),
                    mate_port(self.inst.element_ports(e), from.index),
                ))
            }
        }
    }
}

/// Resolves receivers exclusively through counted `SetOf`/`EltOf` queries.
#[derive(Debug, Clone)]
pub struct QueryRouter<'a> {
    oracle: QueryOracle<'a>,
}

impl<'a> QueryRouter<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        QueryRouter {
            oracle: QueryOracle::new(inst),
        }
    }

    pub fn counter(&self) -> QueryCounter {
        self.oracle.counter()
    }
}

impl Router for QueryRouter<'_> {
    fn resolve(&mut self, from: NodeRef, port: Port) -> Result<(NodeRef, Port), Kt0Error> {
        let invalid = Kt0Error::InvalidPort { node: from, port };
        match from.side {
            Side::Element => {
                let s = self.oracle.set_of(from.index, port).ok_or(invalid)?;
                let to = NodeRef::set(s);
                Ok((to, self.oracle.arrival_port(to, from)))
            }
            Side::Set => {
                let e = self.oracle.elt_of(from.index, port).ok_or(invalid)?;
                let to = NodeRef::element(e);
                Ok((to, self.oracle.arrival_port(to, from)))
            }
        }
    }
}

/// A node-local program for the KT0 model. Nodes know their side and their
/// number of ports, nothing else about the network.
pub trait Kt0Protocol {
    type Node: Clone + fmt::Debug + PartialEq;

    fn spawn(&self, side: Side, degree: usize) -> Self::Node;
    /// Processes the messages delivered this round (sent last round) and
    /// queues this round's messages in `outbox`.
    fn round(
        &self,
        node: &mut Self::Node,
        round: u64,
        inbox: &[(Port, Tag)],
        rng: &mut NodeRng,
        outbox: &mut Vec<(Port, Tag)>,
    );
    fn finished(&self, node: &Self::Node) -> bool;
    /// Label under which messages sent in `round` are accounted.
    fn stage(&self, round: u64) -> &'static str;
    fn horizon(&self) -> u64;
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MessageStats {
    pub total: u64,
    pub per_stage: BTreeMap<String, u64>,
    /// Messages sent in each round.
    pub per_round: Vec<u64>,
    /// Messages placed in inboxes; equals `total` after every round.
    pub delivered: u64,
}

impl MessageStats {
    pub fn stage(&self, label: &str) -> u64 {
        self.per_stage.get(label).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Delivery {
    pub round: u64,
    pub from: NodeRef,
    pub from_port: Port,
    pub to: NodeRef,
    pub to_port: Port,
    pub tag: Tag,
}

fn side_str(side: Side) -> &'static str {
    match side {
        Side::Set => "set",
        Side::Element => "element",
    }
}

/// `round sender_kind sender_id port tag`, one line per message.
pub fn render_message_log(log: &[Delivery]) -> String {
    let mut out = String::new();
    for d in log {
        let _ = writeln!(
            out,
            "{} {} {} {} {}",
            d.round,
            side_str(d.from.side),
            d.from.index,
            d.from_port,
            d.tag
        );
    }
    out
}

/// Omniscient instrumentation hook, called after every round with the
/// messages sent in it.
pub trait RoundObserver<N> {
    fn on_round(&mut self, round: u64, sent: &[Delivery], nodes: &[N]);
}

impl<N> RoundObserver<N> for () {
    fn on_round(&mut self, _: u64, _: &[Delivery], _: &[N]) {}
}

/// Per-node `(arrival port, tag)` lists, indexed by engine slot.
pub type Inboxes = Vec<Vec<(Port, Tag)>>;

/// Message delivery and accounting for one problem graph.
pub struct Kt0Engine<'a, R> {
    inst: &'a Instance,
    router: R,
    stats: MessageStats,
    port_offset: Vec<usize>,
    sent_stamp: Vec<u64>,
}

impl<'a, R: Router> Kt0Engine<'a, R> {
    pub fn new(inst: &'a Instance, router: R) -> Self {
        let m = inst.n_sets();
        let mut port_offset = Vec::with_capacity(inst.n_nodes() + 1);
        let mut acc = 0;
        for v in 0..inst.n_nodes() {
            port_offset.push(acc);
            acc += degree(inst, NodeRef::from_flat(v, m));
        }
        port_offset.push(acc);
        Kt0Engine {
            inst,
            router,
            stats: MessageStats::default(),
            port_offset,
            sent_stamp: vec![0; acc],
        }
    }

    pub fn stats(&self) -> &MessageStats {
        &self.stats
    }

    pub fn router(&self) -> &R {
        &self.router
    }

    /// Delivers every queued message. `outboxes` is indexed by engine slot
    /// (sets first). Returns next round's inboxes and the routed messages.
    pub fn step_round(
        &mut self,
        round: u64,
        stage: &str,
        outboxes: &[Vec<(Port, Tag)>],
    ) -> Result<(Inboxes, Vec<Delivery>), Kt0Error> {
        let m = self.inst.n_sets();
        let mut inboxes = vec![Vec::new(); outboxes.len()];
        let mut sent = Vec::new();
        for (v, outbox) in outboxes.iter().enumerate() {
            let from = NodeRef::from_flat(v, m);
            let ports = self.port_offset[v + 1] - self.port_offset[v];
            for &(port, tag) in outbox {
                if port >= ports {
                    return Err(Kt0Error::InvalidPort { node: from, port });
                }
                let stamp = &mut self.sent_stamp[self.port_offset[v] + port];
                if *stamp == round + 1 {
                    return Err(Kt0Error::DuplicateSend { node: from, port });
                }
                *stamp = round + 1;
                let (to, to_port) = self.router.resolve(from, port)?;
                inboxes[to.flat(m)].push((to_port, tag));
                sent.push(Delivery {
                    round,
                    from,
                    from_port: port,
                    to,
                    to_port,
                    tag,
                });
            }
        }
        let count = sent.len() as u64;
        self.stats.total += count;
        self.stats.delivered += inboxes.iter().map(Vec::len).sum::<usize>() as u64;
        *self.stats.per_stage.entry(stage.to_string()).or_default() += count;
        let r = round as usize;
        if self.stats.per_round.len() <= r {
            self.stats.per_round.resize(r + 1, 0);
        }
        self.stats.per_round[r] += count;
        Ok((inboxes, sent))
    }

    pub fn into_parts(self) -> (R, MessageStats) {
        (self.router, self.stats)
    }
}

pub(crate) fn degree(inst: &Instance, node: NodeRef) -> usize {
    match node.side {
        Side::Set => inst.set(node.index).len(),
        Side::Element => inst.element_ports(node.index).len(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Kt0Config {
    pub seed: u64,
    pub max_rounds: u64,
    pub record_log: bool,
}

impl Kt0Config {
    pub fn new(seed: u64, max_rounds: u64) -> Self {
        Kt0Config {
            seed,
            max_rounds,
            record_log: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Kt0Run<N> {
    /// Final node states, sets first.
    pub nodes: Vec<N>,
    pub stats: MessageStats,
    pub rounds: u64,
    pub log: Option<Vec<Delivery>>,
}

/// Runs `protocol` with synchronous wake-up in round 0 until every node has
/// finished and no message is in flight.
pub fn run_with<P, R, O>(
    inst: &Instance,
    protocol: &P,
    router: R,
    cfg: Kt0Config,
    observer: &mut O,
) -> Result<(Kt0Run<P::Node>, R), Kt0Error>
where
    P: Kt0Protocol,
    R: Router,
    O: RoundObserver<P::Node>,
{
    let horizon = protocol.horizon();
    if cfg.max_rounds < horizon {
        return Err(Kt0Error::BudgetBelowHorizon {
            budget: cfg.max_rounds,
            horizon,
        });
    }
    let m = inst.n_sets();
    let n = inst.n_nodes();
    let mut engine = Kt0Engine::new(inst, router);
    let mut nodes: Vec<P::Node> = (0..n)
        .map(|v| {
            let node = NodeRef::from_flat(v, m);
            protocol.spawn(node.side, degree(inst, node))
        })
        .collect();
    let mut rngs: Vec<NodeRng> = (0..n).map(|v| node_rng(cfg.seed, v)).collect();
    let mut inboxes: Vec<Vec<(Port, Tag)>> = vec![Vec::new(); n];
    let mut outboxes: Vec<Vec<(Port, Tag)>> = vec![Vec::new(); n];
    let mut log = cfg.record_log.then(Vec::new);

    let mut round = 0;
    loop {
        let idle = inboxes.iter().all(Vec::is_empty);
        if idle && nodes.iter().all(|node| protocol.finished(node)) {
            break;
        }
        if round >= cfg.max_rounds {
            return Err(Kt0Error::HorizonExceeded(cfg.max_rounds));
        }
        for v in 0..n {
            outboxes[v].clear();
            if !protocol.finished(&nodes[v]) {
                protocol.round(
                    &mut nodes[v],
                    round,
                    &inboxes[v],
                    &mut rngs[v],
                    &mut outboxes[v],
                );
            }
        }
        let (next, sent) = engine.step_round(round, protocol.stage(round), &outboxes)?;
        inboxes = next;
        observer.on_round(round, &sent, &nodes);
        if let Some(log) = log.as_mut() {
            log.extend_from_slice(&sent);
        }
        round += 1;
    }
    let (router, stats) = engine.into_parts();
    Ok((
        Kt0Run {
            nodes,
            stats,
            rounds: round,
            log,
        },
        router,
    ))
}

pub fn run_kt0<P: Kt0Protocol>(
    inst: &Instance,
    protocol: &P,
    cfg: Kt0Config,
) -> Result<Kt0Run<P::Node>, Kt0Error> {
    run_with(inst, protocol, DirectRouter::new(inst), cfg, &mut ()).map(|(run, _)| run)
}

/// Same execution as [`run_kt0`], but every message's receiver is found via
/// one `SetOf` (element sender) or `EltOf` (set sender) query.
pub fn run_via_queries<P: Kt0Protocol>(
    inst: &Instance,
    protocol: &P,
    cfg: Kt0Config,
) -> Result<(Kt0Run<P::Node>, QueryCounter), Kt0Error> {
    run_with(inst, protocol, QueryRouter::new(inst), cfg, &mut ())
        .map(|(run, router)| (run, router.counter()))
}
