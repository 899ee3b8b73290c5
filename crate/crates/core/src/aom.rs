//! Acousto-optic modulator geometry: Bragg angle, reflectivity, elastic
//! sound speed, the Doppler picture of the frequency shift and the phase
//! picked up along the synchronization cable.
//!
//! Angles are radians. The acoustic frequency is an ordinary frequency (Hz)
//! because it enters through the acoustic wavelength `λ_s = v_s/Ω_s`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::units::{SPEED_OF_LIGHT, TAU};
use crate::{Error, Result};

/// Angles beyond this are outside the small-angle reflectivity formula.
pub const SMALL_ANGLE_LIMIT: f64 = 0.2;

/// An acousto-optic device and the light passing through it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AomSpec {
    acoustic_freq: f64,
    sound_speed: f64,
    wavelength: f64,
    refractive_index: f64,
    interaction_length: f64,
    figure_of_merit: f64,
    acoustic_power: f64,
}

impl AomSpec {
    /// `acoustic_freq` in Hz, `sound_speed` in m/s, vacuum `wavelength` and
    /// `interaction_length` in m, `acoustic_power` in W. The figure of merit
    /// is in whatever units make `M·I` dimensionally consistent.
    pub fn new(
        acoustic_freq: f64,
        sound_speed: f64,
        wavelength: f64,
        refractive_index: f64,
        interaction_length: f64,
        figure_of_merit: f64,
        acoustic_power: f64,
    ) -> Result<Self> {
        let positive = [
            ("acoustic frequency", acoustic_freq),
            ("sound speed", sound_speed),
            ("wavelength", wavelength),
            ("refractive index", refractive_index),
            ("interaction length", interaction_length),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        for (name, v) in [
            ("figure of merit", figure_of_merit),
            ("acoustic power", acoustic_power),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(AomSpec {
            acoustic_freq,
            sound_speed,
            wavelength,
            refractive_index,
            interaction_length,
            figure_of_merit,
            acoustic_power,
        })
    }

    pub fn acoustic_freq(&self) -> f64 {
        self.acoustic_freq
    }
    pub fn sound_speed(&self) -> f64 {
        self.sound_speed
    }
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }
    pub fn refractive_index(&self) -> f64 {
        self.refractive_index
    }
    pub fn interaction_length(&self) -> f64 {
        self.interaction_length
    }
    pub fn figure_of_merit(&self) -> f64 {
        self.figure_of_merit
    }
    pub fn acoustic_power(&self) -> f64 {
        self.acoustic_power
    }

    pub fn with_acoustic_power(self, acoustic_power: f64) -> Result<Self> {
        AomSpec::new(
            self.acoustic_freq,
            self.sound_speed,
            self.wavelength,
            self.refractive_index,
            self.interaction_length,
            self.figure_of_merit,
            acoustic_power,
        )
    }

    /// `λ_s = v_s/Ω_s` (m).
    pub fn acoustic_wavelength(&self) -> f64 {
        self.sound_speed / self.acoustic_freq
    }

    /// Optical frequency of the incident light (Hz).
    pub fn optical_freq(&self) -> f64 {
        SPEED_OF_LIGHT / self.wavelength
    }

    /// Frequency shift after passing the device twice (Hz).
    pub fn double_pass_shift(&self) -> f64 {
        2.0 * self.acoustic_freq
    }

    /// [`double_pass_shift`](Self::double_pass_shift) in rad/s.
    pub fn double_pass_shift_angular(&self) -> f64 {
        TAU * self.double_pass_shift()
    }
}

/// `θ_B = asin(λ/(2nλ_s))`.
pub fn bragg_angle(spec: &AomSpec) -> Result<f64> {
    let arg = spec.wavelength / (2.0 * spec.refractive_index * spec.acoustic_wavelength());
    if arg > 1.0 {
        return Err(Error::domain(format!(
            "no Bragg solution: λ/(2nλ_s) = {arg} exceeds 1"
        )));
    }
    Ok(arg.asin())
}

/// Full deflection between diffracted and undiffracted beams.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deflection {
    /// `2θ_B` inside the crystal.
    pub internal: f64,
    /// `2·asin(n·sin θ_B)` after refraction into air.
    pub external: f64,
}

pub fn deflection(spec: &AomSpec) -> Result<Deflection> {
    let theta = bragg_angle(spec)?;
    let outside = spec.refractive_index * theta.sin();
    if outside > 1.0 {
        return Err(Error::domain(
            "diffracted beam is totally internally reflected",
        ));
    }
    Ok(Deflection {
        internal: 2.0 * theta,
        external: 2.0 * outside.asin(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reflectivity {
    pub reflectivity: f64,
    /// Acoustic power giving a 50/50 split at this geometry (W).
    pub half_power: f64,
    /// Whether θ is within the small-angle validity of the formula.
    pub small_angle: bool,
}

/// `R = π²/(2λ²)·(L/sin θ)²·M·I`.
pub fn reflectivity(spec: &AomSpec, theta: f64) -> Result<Reflectivity> {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::domain(format!(
            "reflectivity needs 0 < θ < π/2, got {theta}"
        )));
    }
    let geometry = spec.interaction_length / theta.sin();
    let per_watt = PI * PI / (2.0 * spec.wavelength * spec.wavelength)
        * geometry
        * geometry
        * spec.figure_of_merit;
    if per_watt <= 0.0 {
        return Err(Error::domain(
            "zero figure of merit: no power reaches a 50/50 split",
        ));
    }
    Ok(Reflectivity {
        reflectivity: per_watt * spec.acoustic_power,
        half_power: 0.5 / per_watt,
        small_angle: theta <= SMALL_ANGLE_LIMIT,
    })
}

/// Isotropic elastic solid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ElasticMaterial {
    young_modulus: f64,
    poisson_ratio: f64,
    density: f64,
}

impl ElasticMaterial {
    pub fn new(young_modulus: f64, poisson_ratio: f64, density: f64) -> Result<Self> {
        if !(young_modulus.is_finite() && young_modulus > 0.0) {
            return Err(Error::invalid("Young's modulus must be > 0"));
        }
        if !(density.is_finite() && density > 0.0) {
            return Err(Error::invalid("density must be > 0"));
        }
        if !(poisson_ratio > -1.0) {
            return Err(Error::invalid("Poisson ratio must be > -1"));
        }
        if !(poisson_ratio < 0.5) {
            return Err(Error::domain(format!(
                "Poisson ratio {poisson_ratio} >= 0.5: the first Lamé parameter diverges"
            )));
        }
        Ok(ElasticMaterial {
            young_modulus,
            poisson_ratio,
            density,
        })
    }

    /// `(λ, μ)` in Pa.
    pub fn lame(&self) -> (f64, f64) {
        let (e, nu) = (self.young_modulus, self.poisson_ratio);
        let mu = e / (2.0 * (1.0 + nu));
        let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
        (lambda, mu)
    }
}

/// Longitudinal sound speed `√((λ + 2μ)/ρ)` (m/s).
pub fn sound_speed(material: &ElasticMaterial) -> f64 {
    let (lambda, mu) = material.lame();
    ((lambda + 2.0 * mu) / material.density).sqrt()
}

/// Doppler shift `2n·v·sin θ/c·ν` (Hz) off a grating moving at `v`.
pub fn doppler_shift(n: f64, v: f64, theta: f64, nu: f64) -> f64 {
    2.0 * n * v * theta.sin() / SPEED_OF_LIGHT * nu
}

/// Phase per meter of cable `α = 2π·ν/v_synch` (rad/m).
pub fn sync_phase_per_meter(nu_aom: f64, v_synch: f64) -> Result<f64> {
    if !(v_synch.is_finite() && v_synch > 0.0) {
        return Err(Error::invalid("signal speed must be > 0"));
    }
    Ok(TAU * nu_aom / v_synch)
}

/// Phase difference for a cable length difference `cable_delta` (m).
pub fn sync_phase(nu_aom: f64, v_synch: f64, cable_delta: f64) -> Result<f64> {
    Ok(sync_phase_per_meter(nu_aom, v_synch)? * cable_delta)
}

/// Signal speed implied by a measured phase slope `alpha` (rad/m).
pub fn sync_speed_from_slope(nu_aom: f64, alpha: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::invalid("phase slope must be > 0"));
    }
    Ok(TAU * nu_aom / alpha)
}
