//! Opportunistic entanglement routing.
//!
//! Two halves live here. [`analytics`] holds exact and Monte-Carlo
//! evaluations of the waiting-time and rate quantities of a line of quantum
//! repeaters (geometric link generation, infinite link lifetime, one request
//! stream from end `A` to end `B`). [`engine`], [`routing`] and [`bench`]
//! form a slotted simulator for line and grid networks that compares
//! non-opportunistic forwarding (wait for the whole path) against
//! k-opportunistic forwarding (advance the swap chain as soon as the next `k`
//! hops are ready).

pub mod analytics;
pub mod bench;
pub mod engine;
mod error;
pub mod rng;
pub mod routing;
pub mod topology;

pub use error::{Error, Result};
pub use rng::RngStream;
