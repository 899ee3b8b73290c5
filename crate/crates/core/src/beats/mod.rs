//! Two-photon beats seen through the inter-arrival statistics of
//! coincidences.
//!
//! When `Ω⁰ ≠ 0` the coincidence rate is modulated as `1 + V·cos(Ω⁰t + θ)`,
//! but the beat is too fast and its phase too unstable to reconstruct from
//! absolute timestamps. The time between successive coincidences does not
//! depend on the absolute phase, and its density
//!
//! ```text
//! P(Δt) = [1 + (V²/2)·cos(Ω⁰Δt)]·exp(−Δt/τ) / (τ·[1 + (V²/2)/(1 + (Ω⁰τ)²)])
//! ```
//!
//! carries the beat frequency. This module simulates the coincidence stream
//! ([`generate_stream`]), histograms successive differences
//! ([`histogram_interarrivals`]) and fits the histogram ([`fit_beats`]).

mod density;
mod fit;
mod histogram;
mod stream;

pub use density::{
    bin_probability, binned_counts, interarrival_cdf, interarrival_density, interarrival_survival,
    BinnedCounts, SMALL_BIN_LIMIT,
};
pub use fit::{fit_beats, fit_beats_with, fit_counts, BeatFit, FitFlag, FitOptions};
pub use histogram::{histogram_interarrivals, read_histogram_csv, write_histogram_csv, Histogram};
pub use stream::{generate_stream, write_stream};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Parameters of the simulated coincidence process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessParams {
    /// Mean time between coincidences `τ` (s).
    pub mean_interval: f64,
    /// Beat visibility `V`.
    pub visibility: f64,
    /// Beat angular frequency `Ω⁰` (rad/s).
    pub beat_freq: f64,
    /// Non-paralyzable detector dead time `τ_d` (s).
    pub dead_time: f64,
    /// Acquisition time (s).
    pub duration: f64,
    pub seed: u64,
}

impl ProcessParams {
    pub fn new(
        mean_interval: f64,
        visibility: f64,
        beat_freq: f64,
        dead_time: f64,
        duration: f64,
        seed: u64,
    ) -> Result<Self> {
        let p = ProcessParams {
            mean_interval,
            visibility,
            beat_freq,
            dead_time,
            duration,
            seed,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean_interval.is_finite() && self.mean_interval > 0.0) {
            return Err(Error::invalid("mean interval must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err(Error::invalid("visibility must lie in [0, 1]"));
        }
        if !self.beat_freq.is_finite() {
            return Err(Error::invalid("beat frequency must be finite"));
        }
        if !(self.dead_time.is_finite() && self.dead_time >= 0.0) {
            return Err(Error::invalid("dead time must be >= 0"));
        }
        if !self.duration.is_finite() {
            return Err(Error::invalid("duration must be finite"));
        }
        Ok(())
    }

    /// Conditions under which the analytic density is only approximate.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.beat_freq != 0.0
            && self.dead_time * self.beat_freq.abs() > 0.1 * std::f64::consts::TAU
        {
            w.push(format!(
                "dead time {:e} s is not small against the beat period {:e} s",
                self.dead_time,
                std::f64::consts::TAU / self.beat_freq.abs()
            ));
        }
        w
    }

    /// `V²/2`, the modulation depth of the inter-arrival density.
    pub fn modulation_depth(&self) -> f64 {
        0.5 * self.visibility * self.visibility
    }
}
