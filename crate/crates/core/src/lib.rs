//! Charging-station siting on Voronoi candidates.
//!
//! The crate is `no_std` (with `alloc`) and carries every algorithm: the
//! spatial substrate, the bounded Voronoi candidate generator, a tick-based
//! agent simulator for EV charging, the placement environment with its hybrid
//! reward, a small feedforward network with backpropagation, the dual
//! Q-network agent, static baselines and evaluation metrics. File formats,
//! reports and the command line live in the `voltsite` crate.
#![no_std]
#![warn(clippy::all)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod dqn;
pub mod env;
pub mod geo;
pub mod math;
pub mod metrics;
pub mod nn;
pub mod ports;
pub mod rng;
pub mod sim;
pub mod voronoi;

pub use geo::{CoordinateMode, Domain, Point};
pub use ports::{PortCatalog, PortType};
