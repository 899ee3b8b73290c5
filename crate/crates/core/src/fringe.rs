//! Synthetic fringe scans and visibility estimation.
//!
//! A scan steps an extra interferometer phase over a grid and records the
//! true and accidental coincidences integrated over a window `T` at each
//! step. The time average of the beat over the window is taken analytically:
//!
//! ```text
//! ⟨cos(θ − Ω⁰t)⟩_[t₀, t₀+T] = cos(θ − Ω⁰(t₀ + T/2))·sinc(Ω⁰T/2)
//! ```
//!
//! with `t₀` drawn uniformly over one beat period, so fringes wash out once
//! `Ω⁰T ≫ 1`.

use std::f64::consts::PI;
use std::io::{self, Write};

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::coincidence::{check_chi, CoincidenceModel};
use crate::report::write_csv_header;
use crate::{Error, Result};

/// Counts recorded at one scan phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringePoint {
    pub phase: f64,
    pub true_coincidences: u64,
    pub accidental_coincidences: u64,
}

impl FringePoint {
    pub fn total(&self) -> u64 {
        self.true_coincidences + self.accidental_coincidences
    }
}

/// `sin(x)/x` with the removable singularity filled in.
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Mean of `cos(theta − omega·t)` over `[t0, t0 + window]`.
pub fn window_average_cos(theta: f64, omega: f64, t0: f64, window: f64) -> f64 {
    (theta - omega * (t0 + 0.5 * window)).cos() * sinc(0.5 * omega * window)
}

pub(crate) fn poisson_draw<R: Rng>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive finite mean");
    dist.sample(rng) as u64
}

/// `n` phases evenly spaced over `[0, 2π)`.
pub fn uniform_phase_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

/// Simulate a fringe scan. Deterministic for a given `seed`.
pub fn fringe_scan(
    model: &CoincidenceModel,
    chi: f64,
    phase_grid: &[f64],
    integration_time: f64,
    seed: u64,
) -> Result<Vec<FringePoint>> {
    check_chi(chi)?;
    if !(integration_time.is_finite() && integration_time > 0.0) {
        return Err(Error::invalid("integration time must be > 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = model.omega_sum();
    let period = if omega != 0.0 {
        2.0 * PI / omega.abs()
    } else {
        0.0
    };
    let pairs = model.source.pair_rate() * integration_time;
    let accidental_mean = model.accidental_rate() * integration_time;
    let base_phase = model.global_phase();

    let mut out = Vec::with_capacity(phase_grid.len());
    for &phase in phase_grid {
        let t0 = if period > 0.0 {
            rng.random::<f64>() * period
        } else {
            0.0
        };
        let avg = window_average_cos(base_phase + phase, omega, t0, integration_time);
        let p = 0.5 * (1.0 + chi * avg);
        let true_coincidences = poisson_draw(&mut rng, pairs * p);
        let accidental_coincidences = poisson_draw(&mut rng, accidental_mean);
        out.push(FringePoint {
            phase,
            true_coincidences,
            accidental_coincidences,
        });
    }
    Ok(out)
}

/// Write a scan as CSV `phase_rad,true_counts,accidental_counts`.
pub fn write_scan_csv<W: Write>(out: &mut W, scan: &[FringePoint]) -> io::Result<()> {
    write_csv_header(out, "phase_rad,true_counts,accidental_counts")?;
    for p in scan {
        writeln!(
            out,
            "{:.12e},{},{}",
            p.phase, p.true_coincidences, p.accidental_coincidences
        )?;
    }
    Ok(())
}

/// Visibility estimated from a fringe scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityEstimate {
    /// Fringe amplitude over mean total counts (accidentals included).
    pub raw_visibility: f64,
    /// Fringe amplitude over mean counts after removing the measured
    /// accidental level.
    pub noise_subtracted_visibility: f64,
    /// `φ₀` in `C·(1 + V·cos(φ + φ₀)) + B`.
    pub fit_phase: f64,
    /// Standard error of the fitted amplitude, in counts.
    pub amplitude_error: f64,
    /// Set when the fringe amplitude is not distinguishable from shot noise;
    /// both visibilities are then reported as zero.
    pub degenerate: bool,
}

/// Least-squares fit of `c₀ + a·cos φ + b·sin φ` to total counts.
///
/// Requires at least 8 points covering a full fringe period.
pub fn visibility_from_counts(scan: &[FringePoint]) -> Result<VisibilityEstimate> {
    let n = scan.len();
    if n < 8 {
        return Err(Error::invalid(format!(
            "need at least 8 scan points, got {n}"
        )));
    }
    let (lo, hi) = scan
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.phase), hi.max(p.phase))
        });
    // an evenly spaced grid of n points over one period spans 2π(n−1)/n
    if (hi - lo) * n as f64 / (n as f64 - 1.0) < 2.0 * PI * (1.0 - 1e-9) {
        return Err(Error::invalid("scan does not cover a full fringe period"));
    }

    let mut ata = Matrix3::<f64>::zeros();
    let mut aty = Vector3::<f64>::zeros();
    for p in scan {
        let row = Vector3::new(1.0, p.phase.cos(), p.phase.sin());
        ata += row * row.transpose();
        aty += row * p.total() as f64;
    }
    let coef = ata
        .lu()
        .solve(&aty)
        .ok_or_else(|| Error::Numerical("singular fringe design matrix".into()))?;
    let (c0, a, b) = (coef[0], coef[1], coef[2]);
    let amplitude = a.hypot(b);
    let accidental_mean = scan
        .iter()
        .map(|p| p.accidental_coincidences as f64)
        .sum::<f64>()
        / n as f64;
    let mean_total = scan.iter().map(|p| p.total() as f64).sum::<f64>() / n as f64;
    let amplitude_error = (2.0 * mean_total.max(1.0) / n as f64).sqrt();
    let fit_phase = crate::units::wrap_phase((-b).atan2(a));

    let net = c0 - accidental_mean;
    if amplitude < 3.0 * amplitude_error || c0 <= 0.0 || net <= 0.0 {
        return Ok(VisibilityEstimate {
            raw_visibility: 0.0,
            noise_subtracted_visibility: 0.0,
            fit_phase,
            amplitude_error,
            degenerate: true,
        });
    }
    Ok(VisibilityEstimate {
        raw_visibility: amplitude / c0,
        noise_subtracted_visibility: amplitude / net,
        fit_phase,
        amplitude_error,
        degenerate: false,
    })
}
