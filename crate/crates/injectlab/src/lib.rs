//! Simulation laboratory for sequential prediction with abstention when a
//! mostly-i.i.d. stream is laced with clean-label adversarial injections.
//!
//! A hidden bit decides each round whether the presented point is drawn from
//! a fixed distribution or chosen by an adversary; labels always come from
//! the hidden target concept. The learner answers `+1`, `-1`, or abstains,
//! pays for every wrong committed prediction, and pays for abstentions only
//! on i.i.d. rounds.
//!
//! Modules:
//! - [`protocol`]: the round-by-round game, histories, transcripts, tallies.
//! - [`classes`]: concept classes (rectangles, tree orders, halfspaces,
//!   finite tables) with exact version-space queries.
//! - [`geometry`]: exact rational linear feasibility and a direction-cone
//!   kernel for planar halfspace queries.
//! - [`scores`]: leave-one-out / leave-k-out score functions.
//! - [`learner`]: the potential-threshold learner, per-class incremental
//!   delta engines, the halfspace bootstrap wrapper, baselines.
//! - [`adversaries`]: i.i.d., scheduled, targeted, and the hard-tree
//!   lower-bound stream.
//! - [`oracle`]: brute-force verification of score properties and bounds.
//! - [`harness`]: experiment configs, sweeps, reports, acceptance battery.

pub mod adversaries;
pub mod classes;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod learner;
pub mod oracle;
pub mod protocol;
pub mod rational;
pub mod scores;

pub use error::{Error, Result};
