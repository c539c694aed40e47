//! Simulator and exact small-instance solver for the game of like: a repeated
//! content-sharing game where each player weighs content they care about
//! against engagement they receive.

// Validation compares with `!(x >= 0.0)` and friends so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod io;
pub mod ledger;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod par;
pub mod policies;
pub mod scenarios;
pub mod utility;
pub mod verify;

pub use engine::{run_game, RunTrace};
pub use model::{GameConfig, PlayerId, PolicyId};
