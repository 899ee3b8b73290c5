//! Physical constants and unit conversions.

use std::f64::consts::PI;

/// Speed of light in vacuum (m/s), exact.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub const TAU: f64 = 2.0 * PI;

/// Ordinary frequency (Hz) to angular frequency (rad/s).
#[inline]
pub fn hz_to_rad(hz: f64) -> f64 {
    TAU * hz
}

/// Angular frequency (rad/s) to ordinary frequency (Hz).
#[inline]
pub fn rad_to_hz(rad_per_s: f64) -> f64 {
    rad_per_s / TAU
}

/// Spectral width in angular frequency of a band `delta_lambda` wide
/// centred on vacuum wavelength `lambda`: `2πc·Δλ/λ²`.
pub fn angular_bandwidth_from_wavelength(delta_lambda: f64, lambda: f64) -> f64 {
    TAU * SPEED_OF_LIGHT * delta_lambda / (lambda * lambda)
}

/// Reduce an angle to `[0, 2π)`.
pub fn wrap_phase(phase: f64) -> f64 {
    let r = phase.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hz_round_trip() {
        let hz = 31_250.0;
        assert!((rad_to_hz(hz_to_rad(hz)) - hz).abs() < 1e-9);
    }

    #[test]
    fn wrap_phase_range() {
        for p in [-1e-18, -PI, 0.0, 7.0, 1e6, -1e6] {
            let w = wrap_phase(p);
            assert!((0.0..TAU).contains(&w), "{p} -> {w}");
            assert!(((p - w) / TAU - ((p - w) / TAU).round()).abs() < 1e-9);
        }
    }

    #[test]
    fn filter_bandwidth_11nm() {
        let dw = angular_bandwidth_from_wavelength(11e-9, 1314e-9);
        assert!((dw / 1.2e13 - 1.0).abs() < 0.01, "{dw}");
    }
}
