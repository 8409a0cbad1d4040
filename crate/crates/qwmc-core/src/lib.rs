//! Quantum-walk Monte Carlo toolkit for photon transport.
//!
//! The pipeline: Compton physics turns a beam energy into per-step
//! interaction probabilities ([`physics`]); a discrete-time quantum walk
//! embeds that absorb-or-advance chain into a unitary circuit ([`walk`])
//! simulated on a dense statevector ([`sim`]); iterative amplitude
//! estimation reads the survival probability back out with quadratically
//! fewer oracle queries than direct sampling ([`estimation`]); classical
//! Monte Carlo and comparison metrics keep everything honest
//! ([`baseline`]).
//!
//! All stochastic routines take explicit `u64` seeds and produce results
//! that are independent of thread count (see [`rng`]).  The `parallel`
//! feature (on by default) runs amplitude kernels, sampling, and
//! experiment replications on a rayon thread pool.

pub mod baseline;
pub mod error;
pub mod estimation;
mod exec;
pub mod physics;
pub mod rng;
pub mod sim;
pub mod walk;

pub use error::{Error, Result};
