//! Simulation laboratory for distributed SetCover.
//!
//! * [`instance`]: problem instances, generators and the text file format.
//! * [`beeping`] and [`beep_and_sleep`]: the Beeping model and the
//!   Beep-and-Sleep protocol, including the DominatingSet variant.
//! * [`kt0`] and [`kt0_setcover`]: port-addressed message passing with
//!   message accounting, the EltOf/SetOf query adapter, and the two-stage
//!   low-message protocol.
//! * [`baselines`]: greedy and exact sequential oracles.
//! * [`harness`]: experiment configuration, result rows and aggregation.

pub mod baselines;
pub mod beep_and_sleep;
pub mod beeping;
pub mod cover_stats;
pub mod harness;
pub mod instance;
pub mod kt0;
pub mod kt0_setcover;
pub mod scalar;

pub use scalar::Scalar;

/// Floating-point scalar used for ratios and statistics.
pub type Real = f64;
/// Exact rational scalar, e.g. for harmonic numbers.
pub type Exact = num_rational::BigRational;
