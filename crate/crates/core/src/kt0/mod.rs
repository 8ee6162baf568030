//! Round-synchronous KT0 message passing.
//!
//! Nodes address neighbours only through local port numbers. Each round a
//! node may send one small tagged message per port; messages arrive at the
//! start of the next round, tagged with the receiver-side port.

mod engine;
mod query;

pub use engine::{
    render_message_log, run_kt0, run_via_queries, run_with, Delivery, DirectRouter, Inboxes,
    Kt0Config, Kt0Engine, Kt0Error, Kt0Protocol, Kt0Run, MessageStats, NodeRef, Port, QueryRouter,
    RoundObserver, Router, Side, Tag,
};
pub use query::{QueryCounter, QueryOracle};
