//! Agent-based simulator for meme diffusion on social networks where agents
//! have a bounded feed (finite attention) and a probability of injecting new
//! memes (information load).
//!
//! The crate is organised around the pipeline used by the experiments:
//! [`netgen`] builds the network, [`diffusion`] runs the sharing dynamics,
//! [`metrics`] turns meme records into discriminative power and diversity,
//! [`scrolling`] and [`calib`] model heterogeneous attention, and
//! [`harness`] binds everything into reproducible parameter sweeps.

pub mod calib;
pub mod diffusion;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod netgen;
pub mod rng;
pub mod scrolling;

pub use error::{Error, Result};
