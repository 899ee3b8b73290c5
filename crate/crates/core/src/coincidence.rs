//! Coincidence probability of a Franson interferometer with frequency
//! shifts in the short arms.
//!
//! Each analyzer `i` has a path difference `Δl_i = l_i − s_i`, a phase `φ_i`
//! and an angular frequency shift `Ω_i` applied to the short arm. With
//! `Ω⁰ = Ω_a + Ω_b`, the normalized coincidence probability is
//!
//! ```text
//! P(t) = [1 + χ·cos(Φ − Ω⁰t)] / 2,    Φ = ω₀Δt + Ω⁰Δt + φ_a + φ_b
//! ```
//!
//! where `χ` is the bandwidth-limited visibility from
//! [`visibility_factor`]. When `Ω⁰ = 0` this is the ordinary Franson fringe;
//! otherwise the coincidence rate beats at `Ω⁰`.

use serde::{Deserialize, Serialize};

use crate::units::{wrap_phase, SPEED_OF_LIGHT};
use crate::{Error, Result};

/// Phase smear below which single-photon fringes are treated as visible.
///
/// A phase uniformly smeared over `Φ` reduces visibility by `sinc(Φ/2)`,
/// which is above 0.999 for `Φ < 0.1`.
pub const FRINGE_SMEAR_THRESHOLD: f64 = 0.1;

/// One unbalanced interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferometerArm {
    delta_l: f64,
    phase: f64,
    freq_shift: f64,
}

impl InterferometerArm {
    /// `delta_l` in meters (long minus short), `phase` in radians, `freq_shift`
    /// in rad/s. The sign of the shift encodes the acoustic-wave direction.
    pub fn new(delta_l: f64, phase: f64, freq_shift: f64) -> Result<Self> {
        if !(delta_l.is_finite() && delta_l >= 0.0) {
            return Err(Error::invalid(format!(
                "path difference must be finite and >= 0, got {delta_l}"
            )));
        }
        if !phase.is_finite() || !freq_shift.is_finite() {
            return Err(Error::invalid("phase and frequency shift must be finite"));
        }
        Ok(InterferometerArm {
            delta_l,
            phase: wrap_phase(phase),
            freq_shift,
        })
    }

    pub fn delta_l(&self) -> f64 {
        self.delta_l
    }

    /// Phase in `[0, 2π)`.
    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn freq_shift(&self) -> f64 {
        self.freq_shift
    }

    /// Long-minus-short transit delay `Δl/c`.
    pub fn delay(&self) -> f64 {
        self.delta_l / SPEED_OF_LIGHT
    }
}

/// Spectral properties of the photon-pair source. All rates in rad/s
/// except `pair_rate`, which is in pairs per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpectrum {
    omega0: f64,
    pump_bandwidth: f64,
    photon_bandwidth: f64,
    pair_rate: f64,
}

impl SourceSpectrum {
    pub fn new(
        omega0: f64,
        pump_bandwidth: f64,
        photon_bandwidth: f64,
        pair_rate: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("pump frequency", omega0),
            ("pump bandwidth", pump_bandwidth),
            ("photon bandwidth", photon_bandwidth),
            ("pair rate", pair_rate),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        if photon_bandwidth < pump_bandwidth {
            return Err(Error::invalid(
                "photon bandwidth must not be narrower than the pump bandwidth",
            ));
        }
        Ok(SourceSpectrum {
            omega0,
            pump_bandwidth,
            photon_bandwidth,
            pair_rate,
        })
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }
    pub fn pump_bandwidth(&self) -> f64 {
        self.pump_bandwidth
    }
    pub fn photon_bandwidth(&self) -> f64 {
        self.photon_bandwidth
    }
    pub fn pair_rate(&self) -> f64 {
        self.pair_rate
    }
}

/// Everything entering the coincidence probability.
///
/// `omega_sum` and `global_phase` are computed on demand from the arms and
/// the source, so they can never disagree with them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceModel {
    pub arm_a: InterferometerArm,
    pub arm_b: InterferometerArm,
    pub source: SourceSpectrum,
    accidental_rate: f64,
}

impl CoincidenceModel {
    pub fn new(
        arm_a: InterferometerArm,
        arm_b: InterferometerArm,
        source: SourceSpectrum,
        accidental_rate: f64,
    ) -> Result<Self> {
        if !(accidental_rate.is_finite() && accidental_rate >= 0.0) {
            return Err(Error::invalid(format!(
                "accidental rate must be >= 0, got {accidental_rate}"
            )));
        }
        Ok(CoincidenceModel {
            arm_a,
            arm_b,
            source,
            accidental_rate,
        })
    }

    pub fn accidental_rate(&self) -> f64 {
        self.accidental_rate
    }

    /// `Ω⁰ = Ω_a + Ω_b` (rad/s).
    pub fn omega_sum(&self) -> f64 {
        self.arm_a.freq_shift + self.arm_b.freq_shift
    }

    /// Long-minus-short delay shared by both analyzers, taken as the mean of
    /// the two arms (they coincide for a balanced setup).
    pub fn delay(&self) -> f64 {
        0.5 * (self.arm_a.delay() + self.arm_b.delay())
    }

    /// `Φ = ω₀Δt + Ω⁰Δt + φ_a + φ_b`, reduced to `[0, 2π)`.
    pub fn global_phase(&self) -> f64 {
        let dt = self.delay();
        // reduce the large optical term on its own to keep precision
        let optical = wrap_phase(self.source.omega0 * dt);
        wrap_phase(optical + self.omega_sum() * dt + self.arm_a.phase + self.arm_b.phase)
    }

    /// Bandwidth-limited visibility `χ` for this geometry.
    pub fn visibility_factor(&self) -> f64 {
        visibility_factor(
            self.arm_a.delta_l,
            self.arm_b.delta_l,
            self.source.pump_bandwidth,
            self.source.photon_bandwidth,
        )
        .expect("source bandwidths are validated on construction")
    }
}

/// Normalized coincidence probability at lab time `t` (seconds).
pub fn coincidence_probability(model: &CoincidenceModel, chi: f64, t: f64) -> Result<f64> {
    check_chi(chi)?;
    Ok(probability_at(
        model.global_phase(),
        model.omega_sum(),
        chi,
        t,
    ))
}

pub(crate) fn check_chi(chi: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&chi) {
        return Err(Error::domain(format!(
            "visibility factor must lie in [0, 1], got {chi}"
        )));
    }
    Ok(())
}

#[inline]
pub(crate) fn probability_at(global_phase: f64, omega_sum: f64, chi: f64, t: f64) -> f64 {
    (0.5 * (1.0 + chi * (global_phase - omega_sum * t).cos())).clamp(0.0, 1.0)
}

#[inline]
fn gaussian_factor(x: f64, y: f64) -> f64 {
    let p = x * y;
    (-0.5 * p * p).exp()
}

/// Visibility reduction from the pump and photon bandwidths:
/// `f(Δl_b/c, δω₀)·f((Δl_a − Δl_b)/c, Δ)` with `f(x, y) = exp(−x²y²/2)`.
pub fn visibility_factor(
    delta_l_a: f64,
    delta_l_b: f64,
    pump_bandwidth: f64,
    photon_bandwidth: f64,
) -> Result<f64> {
    if !(pump_bandwidth > 0.0 && photon_bandwidth > 0.0) {
        return Err(Error::invalid("bandwidths must be > 0"));
    }
    Ok(gaussian_factor(delta_l_b / SPEED_OF_LIGHT, pump_bandwidth)
        * gaussian_factor((delta_l_a - delta_l_b) / SPEED_OF_LIGHT, photon_bandwidth))
}

/// Whether a single photon crossing a frequency-shifting beamsplitter still
/// interferes with itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distinguishability {
    /// `Ω/δω₀` in radians.
    pub phase_smear: f64,
    pub fringes_possible: bool,
}

/// Phase smear `Ω/δω` of a photon of bandwidth `δω` shifted by `Ω`.
pub fn single_photon_distinguishability(
    freq_shift: f64,
    photon_bandwidth: f64,
) -> Result<Distinguishability> {
    if !(photon_bandwidth > 0.0) {
        return Err(Error::invalid("photon bandwidth must be > 0"));
    }
    let phase_smear = (freq_shift / photon_bandwidth).abs();
    Ok(Distinguishability {
        phase_smear,
        fringes_possible: phase_smear < FRINGE_SMEAR_THRESHOLD,
    })
}
