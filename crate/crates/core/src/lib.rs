//! Discrete memoryless channels with i.i.d. state known causally at the
//! transmitter, and what shared entanglement buys on them.
//!
//! The crate is organised around one channel object, [`ChannelWithState`],
//! and several independent analyses of it:
//!
//! - [`capacity`]: classical capacity with causal state information, computed
//!   by reducing to the stateless channel over Shannon strategies and running
//!   Blahut–Arimoto, next to the closed forms for noisy complete-graph channels
//!   and an exhaustive minimum-entropy oracle.
//! - [`conversion`]: the Bell-pair channel-conversion protocol that turns one
//!   use of a graph channel into a binary symmetric channel, evaluated three
//!   ways (closed form, exact state-vector simulation, Monte Carlo).
//! - [`zero_error`]: bipartiteness, exhaustive zero-error code search for one
//!   and two channel uses, bipartite Kochen–Specker sets and the channel they
//!   induce, and an exact simulation of the entanglement-assisted zero-error
//!   protocol on it.
//! - [`asymptotics`]: small-noise gain ratio between the two capacities.
//!
//! [`quantum`] is a deliberately small dense simulator (pure states, density
//! operators, projective and POVM measurements, partial traces) sized for the
//! protocols above.

pub mod asymptotics;
pub mod bitset;
pub mod capacity;
pub mod channels;
pub mod conversion;
mod error;
pub mod info;
pub mod quantum;
pub mod zero_error;

pub use channels::{ChannelWithState, GraphSpec, InputConstraintMap};
pub use error::{Error, Result};
