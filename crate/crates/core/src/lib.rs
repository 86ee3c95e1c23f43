//! Discrete-event simulation of chain quantum repeaters under depolarizing
//! memory noise.
//!
//! Links between neighbouring nodes are heralded with the Barrett–Kok scheme,
//! joined by parallel `|Φ+>`-projected swaps in `⌈log₂(n+1)⌉` rounds, and
//! purified with BBPSSW whenever a link falls below the fidelity its layer
//! needs for the end-to-end target.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod config;
pub mod error;
pub mod link;
pub mod purification;
pub mod quantum;
pub mod rng;

pub use chain::{
    noise_tolerance_search, run_chain, run_generation_phase, run_swap_rounds, BoundaryPoint, BoundaryReport,
    LayerTrace, LinkState, PairState, RunMetrics,
};
pub use config::{ChainConfig, PurificationSuccessMode, Representation, TimeModel};
pub use error::{Result, SimError};
pub use link::{AttemptMode, LinkParams, LinkSample};
pub use purification::{CostLedger, PairingMode, PurificationPlan};
pub use quantum::{DensityMatrix4, WernerForm};
