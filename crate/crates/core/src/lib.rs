//! Reward-modulated learning with distal rewards: a rate-based network whose
//! synapses carry a decaying short-term hypothesis and a consolidated
//! long-term component, together with the stochastic environment and the
//! experiments that exercise it.

pub mod environment;
pub mod error;
pub mod experiments;
pub mod io;
pub mod matrix;
pub mod network;
pub mod plasticity;
pub mod rng;

pub use error::{Error, Result};
