//! Two-stage low-message SetCover in the KT0 model.
//!
//! The phase structure follows Beep-and-Sleep with `k = ⌈log₂ Δ⌉`, but a
//! round has a single step and BEEPs are real messages, so a waking set
//! simply counts them. Each logical round takes two engine rounds: elements
//! send BEEPs, then waking sets decide and announce. After the first
//! `⌈k/2⌉` phases every uncovered element reports itself with UNCOVERED and
//! from then on sets announce only to those elements. A final JOIN-REQUEST
//! on port 0 covers any stragglers.

use rand::Rng;

use crate::beep_and_sleep::sample_capped_geometric;
use crate::beeping::NodeRng;
use crate::cover_stats::{CoverStats, CoverTracker};
use crate::instance::{Delta, Instance, InstanceError, Solution};
use crate::kt0::{
    run_with, Delivery, DirectRouter, Kt0Config, Kt0Protocol, MessageStats, Port, QueryCounter,
    QueryRouter, RoundObserver, Side, Tag,
};

pub const STAGE_ONE: &str = "stage1";
pub const BOUNDARY: &str = "boundary";
pub const STAGE_TWO: &str = "stage2";
pub const CLEANUP: &str = "cleanup";

/// Global knowledge shared by all nodes: `c`, `Δ` and `ln(n + m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kt0Params {
    c: f64,
    delta: Delta,
    ln_n: f64,
    k: usize,
    boundary: usize,
}

/// Where an engine round sits in the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundPos {
    /// Elements send BEEPs for logical round `round` of `phase`.
    Beep {
        phase: usize,
        round: usize,
    },
    /// Sets waking in `round` count BEEPs and possibly announce.
    Decide {
        phase: usize,
        round: usize,
    },
    Boundary,
    CleanupRequest,
    CleanupReply,
    CleanupFinish,
    Done,
}

impl Kt0Params {
    pub const DEFAULT_C: f64 = 2.0;

    pub fn new(c: f64, delta: Delta, n_nodes: usize) -> Result<Self, InstanceError> {
        if !(c.is_finite() && c > 0.0) {
            return Err(InstanceError::InfeasibleParams(format!(
                "c must be positive, got {c}"
            )));
        }
        let k = delta.log2_ceil();
        Ok(Kt0Params {
            c,
            delta,
            ln_n: (n_nodes.max(1) as f64).ln(),
            k,
            boundary: k.div_ceil(2),
        })
    }

    pub fn for_instance(inst: &Instance, c: f64) -> Result<Self, InstanceError> {
        Self::new(c, inst.delta(), inst.n_nodes())
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn delta(&self) -> Delta {
        self.delta
    }

    pub fn ln_n(&self) -> f64 {
        self.ln_n
    }

    /// Number of phases, `⌈log₂ Δ⌉` (at least 1).
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of stage-one phases, `⌈k/2⌉`.
    pub fn stage_boundary(&self) -> usize {
        self.boundary
    }

    pub fn rounds_per_phase(&self) -> usize {
        4 * self.k
    }

    /// `min(1, c·8·ln(n)·2^i/Δ)`.
    pub fn activation_prob(&self, phase: usize) -> f64 {
        let p = self.c * 8.0 * self.ln_n * 2f64.powi(phase as i32) / self.delta.get() as f64;
        p.min(1.0)
    }

    /// `c·4·ln(n)`, half the expected BEEP count of a set with `Δ/2^i`
    /// uncovered elements.
    pub fn nominal_join_threshold(&self) -> f64 {
        self.c * 4.0 * self.ln_n
    }

    /// Half the expected BEEP count of a set with `Δ/2^i` uncovered elements
    /// at the actual (capped) activation probability. Equals
    /// [`Self::nominal_join_threshold`] whenever the probability is below 1.
    pub fn join_threshold(&self, phase: usize) -> f64 {
        let span = self.delta.get() as f64 / 2f64.powi(phase as i32);
        self.activation_prob(phase) * span / 2.0
    }

    pub fn wake_success_prob(&self) -> f64 {
        1.0 - (self.delta.get() as f64).powf(-1.0 / self.k as f64)
    }

    pub fn draw_wake_round<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let cap = self.rounds_per_phase() as u32;
        let x = sample_capped_geometric(self.wake_success_prob(), cap, rng).unwrap_or(cap);
        (self.rounds_per_phase() - 1).saturating_sub(x as usize)
    }

    fn phase_len(&self) -> u64 {
        2 * self.rounds_per_phase() as u64
    }

    /// The UNCOVERED round exists only if there is a second stage.
    pub fn has_boundary_round(&self) -> bool {
        self.boundary < self.k
    }

    pub fn boundary_round(&self) -> u64 {
        self.boundary as u64 * self.phase_len()
    }

    pub fn cleanup_start(&self) -> u64 {
        self.k as u64 * self.phase_len() + u64::from(self.has_boundary_round())
    }

    pub fn total_rounds(&self) -> u64 {
        self.cleanup_start() + 3
    }

    pub fn locate(&self, round: u64) -> RoundPos {
        let len = self.phase_len();
        let main = |phase: usize, offset: u64| {
            let r = (offset / 2) as usize;
            if offset.is_multiple_of(2) {
                RoundPos::Beep { phase, round: r }
            } else {
                RoundPos::Decide { phase, round: r }
            }
        };
        let b = self.boundary_round();
        let cleanup = self.cleanup_start();
        if round < b {
            main((round / len) as usize, round % len)
        } else if round < cleanup {
            if self.has_boundary_round() && round == b {
                return RoundPos::Boundary;
            }
            let rel = round - b - u64::from(self.has_boundary_round());
            main(self.boundary + (rel / len) as usize, rel % len)
        } else {
            match round - cleanup {
                0 => RoundPos::CleanupRequest,
                1 => RoundPos::CleanupReply,
                2 => RoundPos::CleanupFinish,
                _ => RoundPos::Done,
            }
        }
    }

    pub fn stage_of(&self, round: u64) -> &'static str {
        match self.locate(round) {
            RoundPos::Beep { phase, .. } | RoundPos::Decide { phase, .. } => {
                if phase < self.boundary {
                    STAGE_ONE
                } else {
                    STAGE_TWO
                }
            }
            RoundPos::Boundary => BOUNDARY,
            _ => CLEANUP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kt0SetState {
    pub degree: usize,
    pub wake_round: usize,
    pub joined: bool,
    /// Ports that reported UNCOVERED at the stage boundary, ascending.
    pub stage_two_view: Option<Vec<Port>>,
    pub finished: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kt0ElementState {
    pub degree: usize,
    /// Ports activated for the current phase.
    pub active_ports: Vec<Port>,
    pub covered: bool,
    pub finished: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Kt0Node {
    Set(Kt0SetState),
    Element(Kt0ElementState),
}

#[derive(Debug, Clone)]
pub struct Kt0SetCover {
    params: Kt0Params,
}

impl Kt0SetCover {
    pub fn new(params: Kt0Params) -> Self {
        Kt0SetCover { params }
    }

    pub fn params(&self) -> &Kt0Params {
        &self.params
    }

    fn set_round(
        &self,
        s: &mut Kt0SetState,
        round: u64,
        inbox: &[(Port, Tag)],
        rng: &mut NodeRng,
        outbox: &mut Vec<(Port, Tag)>,
    ) {
        let p = &self.params;
        if inbox.iter().any(|&(_, tag)| tag == Tag::Uncovered) {
            let view = s.stage_two_view.get_or_insert_with(Vec::new);
            view.extend(inbox.iter().filter(|m| m.1 == Tag::Uncovered).map(|m| m.0));
            view.sort_unstable();
        }
        match p.locate(round) {
            RoundPos::Beep { phase, round: 0 } => {
                s.wake_round = p.draw_wake_round(rng);
                if phase == p.stage_boundary() && s.stage_two_view.is_none() {
                    s.stage_two_view = Some(Vec::new());
                }
            }
            RoundPos::Decide { phase, round: r } if !s.joined && r == s.wake_round => {
                let beeps = inbox.iter().filter(|m| m.1 == Tag::Beep).count();
                if beeps > 0 && beeps as f64 >= p.join_threshold(phase) {
                    s.joined = true;
                    match &s.stage_two_view {
                        Some(view) if phase >= p.stage_boundary() => {
                            outbox.extend(view.iter().map(|&port| (port, Tag::Joined)));
                        }
                        _ => outbox.extend((0..s.degree).map(|port| (port, Tag::Joined))),
                    }
                }
            }
            RoundPos::CleanupReply => {
                for &(port, tag) in inbox {
                    if tag == Tag::JoinRequest {
                        s.joined = true;
                        outbox.push((port, Tag::Joined));
                    }
                }
                s.finished = true;
            }
            _ => {}
        }
    }

    fn element_round(
        &self,
        e: &mut Kt0ElementState,
        round: u64,
        inbox: &[(Port, Tag)],
        rng: &mut NodeRng,
        outbox: &mut Vec<(Port, Tag)>,
    ) {
        if inbox.iter().any(|m| m.1 == Tag::Joined) {
            e.covered = true;
            e.finished = true;
            return;
        }
        let p = &self.params;
        match p.locate(round) {
            RoundPos::Beep { phase, round: r } => {
                if r == 0 {
                    let q = p.activation_prob(phase);
                    e.active_ports = (0..e.degree).filter(|_| rng.gen_bool(q)).collect();
                }
                outbox.extend(e.active_ports.iter().map(|&port| (port, Tag::Beep)));
            }
            RoundPos::Boundary => outbox.extend((0..e.degree).map(|port| (port, Tag::Uncovered))),
            RoundPos::CleanupRequest => outbox.push((0, Tag::JoinRequest)),
            RoundPos::CleanupFinish => e.finished = true,
            _ => {}
        }
    }
}

impl Kt0Protocol for Kt0SetCover {
    type Node = Kt0Node;

    fn spawn(&self, side: Side, degree: usize) -> Kt0Node {
        match side {
            Side::Set => Kt0Node::Set(Kt0SetState {
                degree,
                wake_round: 0,
                joined: false,
                stage_two_view: None,
                finished: false,
            }),
            Side::Element => Kt0Node::Element(Kt0ElementState {
                degree,
                active_ports: Vec::new(),
                covered: false,
                finished: false,
            }),
        }
    }

    fn round(
        &self,
        node: &mut Kt0Node,
        round: u64,
        inbox: &[(Port, Tag)],
        rng: &mut NodeRng,
        outbox: &mut Vec<(Port, Tag)>,
    ) {
        match node {
            Kt0Node::Set(s) => self.set_round(s, round, inbox, rng, outbox),
            Kt0Node::Element(e) => self.element_round(e, round, inbox, rng, outbox),
        }
    }

    fn finished(&self, node: &Kt0Node) -> bool {
        match node {
            Kt0Node::Set(s) => s.finished,
            Kt0Node::Element(e) => e.finished,
        }
    }

    fn stage(&self, round: u64) -> &'static str {
        self.params.stage_of(round)
    }

    fn horizon(&self) -> u64 {
        self.params.total_rounds()
    }
}

struct CoverObserver<'a> {
    tracker: CoverTracker<'a>,
    params: &'a Kt0Params,
    snapshot_round: u64,
    snapshot: Option<Vec<bool>>,
}

impl RoundObserver<Kt0Node> for CoverObserver<'_> {
    fn on_round(&mut self, round: u64, sent: &[Delivery], _: &[Kt0Node]) {
        let mut events: Vec<(usize, Vec<usize>)> = Vec::new();
        for d in sent {
            if d.tag != Tag::Joined || !self.tracker.is_uncovered(d.to.index) {
                continue;
            }
            match events.iter_mut().find(|(e, _)| *e == d.to.index) {
                Some((_, coverers)) => coverers.push(d.from.index),
                None => events.push((d.to.index, vec![d.from.index])),
            }
        }
        if !events.is_empty() {
            events.sort_unstable();
            let phase = match self.params.locate(round) {
                RoundPos::Decide { phase, .. } => Some(phase),
                _ => None,
            };
            self.tracker.record_step(round + 1, phase, &events);
        }
        if round == self.snapshot_round {
            self.snapshot = Some(self.tracker.uncovered().to_vec());
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Routing {
    #[default]
    Direct,
    Queries,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Kt0Options {
    pub routing: Routing,
    pub record_log: bool,
}

#[derive(Debug, Clone)]
pub struct Kt0Report {
    pub solution: Solution,
    pub messages: MessageStats,
    pub cover: CoverStats,
    pub rounds: u64,
    /// `U′`: elements still uncovered when the first stage ended.
    pub boundary_uncovered: Vec<bool>,
    pub nodes: Vec<Kt0Node>,
    pub log: Option<Vec<Delivery>>,
    /// Present when routed through the query adapter.
    pub queries: Option<QueryCounter>,
}

pub fn run_kt0_setcover(inst: &Instance, params: &Kt0Params, seed: u64) -> Kt0Report {
    run_kt0_setcover_with(inst, params, seed, Kt0Options::default())
}

/// Runs the protocol with all nodes waking in round 0.
pub fn run_kt0_setcover_with(
    inst: &Instance,
    params: &Kt0Params,
    seed: u64,
    opts: Kt0Options,
) -> Kt0Report {
    let protocol = Kt0SetCover::new(params.clone());
    let cfg = Kt0Config {
        seed,
        max_rounds: protocol.horizon(),
        record_log: opts.record_log,
    };
    let mut observer = CoverObserver {
        tracker: CoverTracker::new(inst),
        params,
        snapshot_round: params.boundary_round() - 1,
        snapshot: None,
    };
    let (run, queries) = match opts.routing {
        Routing::Direct => {
            let (run, _) = run_with(inst, &protocol, DirectRouter::new(inst), cfg, &mut observer)
                .expect("protocol only uses valid ports and stops at its horizon");
            (run, None)
        }
        Routing::Queries => {
            let (run, router) =
                run_with(inst, &protocol, QueryRouter::new(inst), cfg, &mut observer)
                    .expect("protocol only uses valid ports and stops at its horizon");
            (run, Some(router.counter()))
        }
    };
    let boundary_uncovered = observer
        .snapshot
        .take()
        .unwrap_or_else(|| vec![false; inst.n_elements()]);
    let chosen = run
        .nodes
        .iter()
        .enumerate()
        .filter_map(|(v, node)| match node {
            Kt0Node::Set(s) if s.joined => Some(v),
            _ => None,
        });
    let (solution, cover) = observer.tracker.finish(chosen);
    Kt0Report {
        solution,
        messages: run.stats,
        cover,
        rounds: run.rounds,
        boundary_uncovered,
        nodes: run.nodes,
        log: run.log,
        queries,
    }
}

/// Largest number of `U′` elements in any single set.
pub fn stage_boundary_degrees(inst: &Instance, report: &Kt0Report) -> usize {
    inst.sets()
        .iter()
        .map(|s| s.iter().filter(|&&e| report.boundary_uncovered[e]).count())
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_random, Density};

    fn params(inst: &Instance) -> Kt0Params {
        Kt0Params::for_instance(inst, Kt0Params::DEFAULT_C).unwrap()
    }

    #[test]
    fn parameters() {
        let p = Kt0Params::new(2.0, Delta::new(256), 512).unwrap();
        assert_eq!(
            (p.k(), p.stage_boundary(), p.rounds_per_phase()),
            (8, 4, 32)
        );
        assert!((p.wake_success_prob() - 0.5).abs() < 1e-12);
        let ln = 512f64.ln();
        assert!((p.activation_prob(0) - 16.0 * ln / 256.0).abs() < 1e-12);
        assert_eq!(p.activation_prob(3), 1.0);
        // Uncapped: the threshold is c·4·ln(n).
        assert!((p.join_threshold(0) - 8.0 * ln).abs() < 1e-9);
        assert!((p.nominal_join_threshold() - 8.0 * ln).abs() < 1e-12);
        // Capped at 1: half of Δ/2^i.
        assert_eq!(p.join_threshold(3), 16.0);
        assert!(Kt0Params::new(0.0, Delta::new(4), 10).is_err());
        let odd = Kt0Params::new(2.0, Delta::new(5), 10).unwrap();
        assert_eq!((odd.k(), odd.stage_boundary()), (3, 2));
    }

    #[test]
    fn round_layout() {
        let p = Kt0Params::new(2.0, Delta::new(4), 10).unwrap();
        // k = 2: 8 logical rounds per phase, one stage-one phase.
        assert_eq!(p.locate(0), RoundPos::Beep { phase: 0, round: 0 });
        assert_eq!(p.locate(15), RoundPos::Decide { phase: 0, round: 7 });
        assert_eq!(p.locate(16), RoundPos::Boundary);
        assert_eq!(p.locate(17), RoundPos::Beep { phase: 1, round: 0 });
        assert_eq!(p.locate(32), RoundPos::Decide { phase: 1, round: 7 });
        assert_eq!(p.locate(33), RoundPos::CleanupRequest);
        assert_eq!(p.locate(36), RoundPos::Done);
        assert_eq!(p.total_rounds(), 36);
        let labels: Vec<&str> = [0, 16, 17, 33].iter().map(|&r| p.stage_of(r)).collect();
        assert_eq!(labels, vec![STAGE_ONE, BOUNDARY, STAGE_TWO, CLEANUP]);
        // k = 1 has no second stage and no boundary round.
        let one = Kt0Params::new(2.0, Delta::new(2), 10).unwrap();
        assert!(!one.has_boundary_round());
        assert_eq!(one.locate(8), RoundPos::CleanupRequest);
    }

    #[test]
    fn single_edge_instance() {
        let inst = Instance::new(1, vec![vec![0]]).unwrap();
        for seed in 0..20 {
            let r = run_kt0_setcover(&inst, &params(&inst), seed);
            assert_eq!(
                r.solution.chosen.iter().copied().collect::<Vec<_>>(),
                vec![0]
            );
            assert!(r.messages.total <= 3, "{} messages", r.messages.total);
            assert!(r.rounds <= params(&inst).total_rounds());
        }
    }

    #[test]
    fn disjoint_singletons() {
        let inst = Instance::new(10, (0..10).map(|e| vec![e]).collect()).unwrap();
        for seed in 0..10 {
            let r = run_kt0_setcover(&inst, &params(&inst), seed);
            assert_eq!(r.solution.size(), 10);
            assert!(r.messages.total <= 30);
        }
    }

    #[test]
    fn covers_and_accounts() {
        for seed in 0..30 {
            let inst = generate_random(60, 40, Density::EdgeProb(0.2), seed).unwrap();
            let r = run_kt0_setcover(&inst, &params(&inst), seed);
            assert!(r.solution.verify(&inst).unwrap().is_empty());
            assert!(r.solution.provenance_consistent());
            let m = &r.messages;
            assert_eq!(m.total, m.per_round.iter().sum::<u64>());
            assert_eq!(m.total, m.per_stage.values().sum::<u64>());
            assert_eq!(m.total, m.delivered);
            // Everything left at the boundary is covered later.
            let leftover = r.boundary_uncovered.iter().filter(|&&u| u).count() as u64;
            assert!(m.stage(BOUNDARY) <= leftover * inst.delta().get() as u64);
        }
    }

    #[test]
    fn query_routing_matches_direct() {
        let inst = generate_random(50, 30, Density::EdgeProb(0.25), 9).unwrap();
        let p = params(&inst);
        let a = run_kt0_setcover(&inst, &p, 4);
        let opts = Kt0Options {
            routing: Routing::Queries,
            record_log: false,
        };
        let b = run_kt0_setcover_with(&inst, &p, 4, opts);
        assert_eq!(a.nodes, b.nodes);
        assert_eq!(a.solution, b.solution);
        assert_eq!(a.messages, b.messages);
        assert_eq!(b.queries.unwrap().total(), b.messages.total);
    }

    #[test]
    fn boundary_degree_examples() {
        let singles = Instance::new(6, (0..6).map(|e| vec![e]).collect()).unwrap();
        let r = run_kt0_setcover(&singles, &params(&singles), 1);
        assert!(stage_boundary_degrees(&singles, &r) <= 1);
        // One set holding everything joins in phase 0 with certainty.
        let inst = Instance::new(4, vec![vec![0, 1, 2, 3]]).unwrap();
        let r = run_kt0_setcover(&inst, &params(&inst), 0);
        assert_eq!(stage_boundary_degrees(&inst, &r), 0);
        assert_eq!(r.messages.stage(STAGE_TWO), 0);
    }
}
