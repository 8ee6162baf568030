//! Beep-and-Sleep: SetCover with beeps only.
//!
//! In every phase each set sleeps for a geometrically distributed number of
//! rounds, wakes for exactly one round and listens in its `4k` listening
//! slots. Uncovered elements that are active in the phase beep in one fixed
//! slot per round. A set that heard beeps in at least `3k` slots joins and
//! beeps in the announcement slot, which covers every uncovered element
//! around it. Two cleanup slots after the last phase let every still
//! uncovered element recruit all of its remaining sets.

mod dominating;
mod schedule;

use rand::Rng;

use crate::beeping::{
    run_observed, BeepMetrics, BeepProtocol, CommGraph, NodeRng, Role, RunConfig, SlotAction,
    SlotObserver, SlotOutcome, Transcript,
};
use crate::cover_stats::{CoverStats, CoverTracker};
use crate::instance::{Delta, Instance, Solution};

pub use dominating::{
    closed_neighborhood_instance, cycle_graph, is_dominating, random_connected_graph,
    run_dominating_set, star_graph, DominatingReport, Graph, GraphError,
};
pub use schedule::{sample_capped_geometric, PhaseSchedule, ScheduleError, SlotPos, CLEANUP_SLOTS};

#[derive(Debug, Clone, PartialEq)]
pub struct SetState {
    pub x: u32,
    pub wake_round: usize,
    pub beep_slot_count: usize,
    pub joined: bool,
    /// Cleanup probe result.
    pub heard_probe: bool,
    pub finished: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementState {
    pub active: bool,
    /// One-based listening slot in `1..=4k`.
    pub beep_slot: usize,
    pub covered: bool,
    /// `(phase, round)` of coverage; `None` while uncovered or when covered
    /// during cleanup.
    pub covered_at: Option<(usize, usize)>,
    pub finished: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BsNode {
    Set(SetState),
    Element(ElementState),
}

/// Protocol object shared by all nodes: it carries only global knowledge
/// (`Δ` and `k`).
#[derive(Debug, Clone)]
pub struct BeepAndSleep {
    schedule: PhaseSchedule,
}

impl BeepAndSleep {
    pub fn new(delta: Delta, k: usize) -> Self {
        BeepAndSleep {
            schedule: PhaseSchedule::new(delta, k),
        }
    }

    pub fn schedule(&self) -> &PhaseSchedule {
        &self.schedule
    }

    fn set_act(&self, s: &mut SetState, slot: u64, rng: &mut NodeRng) -> SlotAction {
        let sched = &self.schedule;
        let last = slot + 1 == sched.total_slots();
        if last {
            s.finished = true;
        }
        match sched.locate(slot) {
            SlotPos::Main {
                round, slot: idx, ..
            } => {
                if round == 0 && idx == 0 {
                    s.x = sched.draw_wake_sample(rng);
                    s.wake_round = sched.wake_round(s.x);
                    s.beep_slot_count = 0;
                }
                if s.joined || round != s.wake_round {
                    SlotAction::Idle
                } else if idx < sched.announce_slot() {
                    SlotAction::Listen
                } else if s.beep_slot_count >= sched.join_threshold() {
                    s.joined = true;
                    SlotAction::Beep
                } else {
                    SlotAction::Idle
                }
            }
            SlotPos::CleanupProbe if !s.joined => SlotAction::Listen,
            SlotPos::CleanupJoin if !s.joined && s.heard_probe => {
                s.joined = true;
                SlotAction::Beep
            }
            _ => SlotAction::Idle,
        }
    }

    fn element_act(&self, e: &mut ElementState, slot: u64, rng: &mut NodeRng) -> SlotAction {
        let sched = &self.schedule;
        if slot + 1 == sched.total_slots() {
            e.finished = true;
        }
        if e.covered {
            return SlotAction::Idle;
        }
        match sched.locate(slot) {
            SlotPos::Main {
                phase,
                round,
                slot: idx,
            } => {
                if round == 0 && idx == 0 {
                    e.active = rng.gen_bool(sched.activation_prob(phase));
                    e.beep_slot = rng.gen_range(1..=sched.rounds_per_phase());
                }
                if idx == sched.announce_slot() {
                    SlotAction::Listen
                } else if e.active && idx + 1 == e.beep_slot {
                    SlotAction::Beep
                } else {
                    SlotAction::Idle
                }
            }
            SlotPos::CleanupProbe => SlotAction::Beep,
            SlotPos::CleanupJoin => SlotAction::Listen,
            SlotPos::Done => SlotAction::Idle,
        }
    }
}

impl BeepProtocol for BeepAndSleep {
    type Node = BsNode;

    fn spawn(&self, role: Role) -> BsNode {
        match role {
            Role::Set => BsNode::Set(SetState {
                x: 0,
                wake_round: 0,
                beep_slot_count: 0,
                joined: false,
                heard_probe: false,
                finished: false,
            }),
            Role::Element => BsNode::Element(ElementState {
                active: false,
                beep_slot: 1,
                covered: false,
                covered_at: None,
                finished: false,
            }),
            Role::Vertex => panic!("Beep-and-Sleep runs on bipartite problem graphs"),
        }
    }

    fn act(&self, node: &mut BsNode, slot: u64, rng: &mut NodeRng) -> SlotAction {
        match node {
            BsNode::Set(s) => self.set_act(s, slot, rng),
            BsNode::Element(e) => self.element_act(e, slot, rng),
        }
    }

    fn hear(&self, node: &mut BsNode, slot: u64, heard: bool) {
        match (node, self.schedule.locate(slot)) {
            (BsNode::Set(s), SlotPos::Main { .. }) => s.beep_slot_count += usize::from(heard),
            (BsNode::Set(s), SlotPos::CleanupProbe) => s.heard_probe = heard,
            (BsNode::Element(e), pos) if heard => {
                e.covered = true;
                e.finished = true;
                if let SlotPos::Main { phase, round, .. } = pos {
                    e.covered_at = Some((phase, round));
                }
            }
            _ => {}
        }
    }

    fn finished(&self, node: &BsNode) -> bool {
        match node {
            BsNode::Set(s) => s.finished,
            BsNode::Element(e) => e.finished,
        }
    }

    fn horizon(&self) -> u64 {
        self.schedule.total_slots()
    }
}

/// Turns carrier-sense events into cover events for [`CoverTracker`].
struct CoverObserver<'a> {
    tracker: CoverTracker<'a>,
    schedule: &'a PhaseSchedule,
    m: usize,
}

impl SlotObserver<BsNode> for CoverObserver<'_> {
    fn on_slot(&mut self, slot: u64, actions: &[SlotAction], outcome: &SlotOutcome, _: &[BsNode]) {
        let inst = self.tracker_instance();
        let events: Vec<(usize, Vec<usize>)> = (0..inst.n_elements())
            .filter(|&e| outcome.heard[self.m + e] == Some(true) && self.tracker.is_uncovered(e))
            .map(|e| {
                let coverers = inst
                    .element_ports(e)
                    .iter()
                    .copied()
                    .filter(|&s| actions[s] == SlotAction::Beep)
                    .collect();
                (e, coverers)
            })
            .collect();
        if events.is_empty() {
            return;
        }
        let phase = match self.schedule.locate(slot) {
            SlotPos::Main { phase, .. } => Some(phase),
            _ => None,
        };
        self.tracker.record_step(slot, phase, &events);
    }
}

impl<'a> CoverObserver<'a> {
    fn tracker_instance(&self) -> &'a Instance {
        self.tracker.instance()
    }
}

#[derive(Debug, Clone)]
pub struct BeepReport {
    pub solution: Solution,
    pub metrics: BeepMetrics,
    pub cover: CoverStats,
    pub nodes: Vec<BsNode>,
    pub transcript: Option<Transcript>,
}

pub fn run_beep_and_sleep(inst: &Instance, k: usize, seed: u64) -> BeepReport {
    run_beep_and_sleep_with(inst, k, seed, false)
}

/// Runs Beep-and-Sleep with all nodes waking in slot 0. Set `s` is engine
/// node `s` and element `e` is node `m + e`.
pub fn run_beep_and_sleep_with(
    inst: &Instance,
    k: usize,
    seed: u64,
    record_transcript: bool,
) -> BeepReport {
    let protocol = BeepAndSleep::new(inst.delta(), k);
    let graph = CommGraph::from_instance(inst);
    let mut cfg = RunConfig::new(seed, protocol.horizon());
    cfg.record_transcript = record_transcript;
    let mut observer = CoverObserver {
        tracker: CoverTracker::new(inst),
        schedule: protocol.schedule(),
        m: inst.n_sets(),
    };
    let run = run_observed(&graph, &protocol, cfg, &mut observer)
        .expect("Beep-and-Sleep terminates exactly at its horizon");
    let chosen = run
        .nodes
        .iter()
        .enumerate()
        .filter_map(|(v, node)| match node {
            BsNode::Set(s) if s.joined => Some(v),
            _ => None,
        });
    let (solution, cover) = observer.tracker.finish(chosen);
    BeepReport {
        solution,
        metrics: run.metrics,
        cover,
        nodes: run.nodes,
        transcript: run.transcript,
    }
}
