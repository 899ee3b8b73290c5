//! Simulation and analysis toolkit for frequency-shifted Franson interferometry.
//!
//! Two-photon interferometers whose beamsplitters are acousto-optic
//! modulators imprint a frequency shift on the short arm of each
//! interferometer. When the two shifts do not cancel, the coincidence rate
//! beats at their sum. This crate covers:
//!
//! * [`coincidence`] and [`fringe`]: closed-form coincidence probabilities,
//!   visibility degradation from finite bandwidths, fringe-scan synthesis
//!   and visibility estimation.
//! * [`eraser`]: the visibility / which-path tradeoff under finite time
//!   resolution.
//! * [`beats`]: the beat-modulated coincidence point process with dead time,
//!   inter-arrival histograms and the beat fit.
//! * [`aom`]: Bragg geometry, reflectivity, elastic sound speed, Doppler
//!   equivalence and synchronization-cable phase.
//! * [`relativity`]: before-before / after-after timing classification and
//!   visibility predictions for time-ordered collapse models.
//! * [`qkd`]: key distribution with pseudo-complementary frequency bases and
//!   with frequency sidebands.
//! * [`cli`]: the `franson` command-line front end.
//!
//! Internally every frequency is angular (rad/s). Hz appears only at the
//! configuration and report boundary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aom;
pub mod beats;
pub mod cli;
pub mod coincidence;
pub mod config;
pub mod eraser;
mod error;
pub mod fringe;
pub mod qkd;
pub mod quad;
pub mod relativity;
pub mod report;
pub mod units;

pub use error::{Error, Result};
