//! Slot-synchronous Beeping-model simulator.
//!
//! In every slot each node beeps, listens or idles. A listener learns one bit:
//! whether at least one neighbour beeped.

mod engine;

pub use engine::{
    node_rng, run, run_observed, step_slot, BeepMetrics, BeepProtocol, BeepRun, CommGraph,
    EngineError, NodeRng, Role, RunConfig, SlotAction, SlotObserver, SlotOutcome, SlotRecord,
    Transcript,
};
