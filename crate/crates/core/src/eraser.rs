//! Visibility versus which-path information when the frequency shift marks
//! the path.
//!
//! With a finite time resolution `Δt` the beat is averaged by a Gaussian
//! window, reducing the visibility to `exp(−(Ω⁰Δt)²/2)`. The same `Δt` fixes
//! the energy resolution `Δω = 2π/Δt` of a total-energy measurement that
//! guesses the path pair: long-long if `ω < ω₀ + Ω⁰/2`, short-short
//! otherwise. With `q` the probability of a correct guess the which-path
//! information is `K = 2q − 1`.
//!
//! `q` is evaluated from its defining Gaussian tail integral. Carried out in
//! closed form it gives `K = erf(Ω⁰Δt/(4√2π))`; the alternative form
//! `2·erf(·) − 1` is negative for small arguments and is not used.

use std::f64::consts::PI;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::quad::integrate_to_infinity;
use crate::report::write_csv_header;
use crate::{Error, Result};

/// Absolute tolerance of the tail quadrature behind `q`.
pub const QUADRATURE_TOLERANCE: f64 = 1e-12;

/// Slack allowed on `V² + K² ≤ 1`.
pub const DUALITY_EPSILON: f64 = 1e-12;

/// Time and energy resolution of a coincidence measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolutionSetting {
    omega_sum: f64,
    time_resolution: f64,
    energy_resolution: f64,
}

impl ResolutionSetting {
    /// General setting; requires `Δω·Δt ≥ 2π`.
    pub fn new(omega_sum: f64, time_resolution: f64, energy_resolution: f64) -> Result<Self> {
        if !(time_resolution.is_finite() && time_resolution >= 0.0) {
            return Err(Error::invalid("time resolution must be >= 0"));
        }
        if !omega_sum.is_finite() {
            return Err(Error::invalid("beat frequency must be finite"));
        }
        if energy_resolution * time_resolution < 2.0 * PI * (1.0 - 1e-12) {
            return Err(Error::domain(format!(
                "energy-time product {} is below 2π",
                energy_resolution * time_resolution
            )));
        }
        Ok(ResolutionSetting {
            omega_sum,
            time_resolution,
            energy_resolution,
        })
    }

    /// Setting that saturates `Δω·Δt = 2π`.
    pub fn saturated(omega_sum: f64, time_resolution: f64) -> Result<Self> {
        if !(time_resolution > 0.0) {
            return Err(Error::domain(
                "time resolution must be > 0 for a finite energy resolution",
            ));
        }
        Self::new(omega_sum, time_resolution, 2.0 * PI / time_resolution)
    }

    pub fn omega_sum(&self) -> f64 {
        self.omega_sum
    }
    pub fn time_resolution(&self) -> f64 {
        self.time_resolution
    }
    pub fn energy_resolution(&self) -> f64 {
        self.energy_resolution
    }

    pub fn visibility(&self) -> f64 {
        visibility_vs_resolution(self.omega_sum, self.time_resolution)
    }

    /// Which-path information for this setting's energy resolution.
    pub fn which_path(&self) -> Result<WhichPath> {
        let threshold = 0.5 * self.omega_sum.abs() / self.energy_resolution;
        // P(u > threshold) for a standard normal u
        let tail = integrate_to_infinity(
            |u| (-0.5 * u * u).exp() / (2.0 * PI).sqrt(),
            threshold,
            QUADRATURE_TOLERANCE,
            0.0,
        )?
        .value;
        let q = (1.0 - tail).clamp(0.5, 1.0);
        Ok(WhichPath {
            q,
            k: 2.0 * q - 1.0,
        })
    }
}

/// Probability of a correct path guess and the derived information.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WhichPath {
    pub q: f64,
    pub k: f64,
}

/// Coincidence probability averaged over a Gaussian time window of width
/// `time_resolution`.
pub fn time_averaged_probability(
    global_phase: f64,
    omega_sum: f64,
    time_resolution: f64,
) -> Result<f64> {
    if !(time_resolution >= 0.0) {
        return Err(Error::invalid("time resolution must be >= 0"));
    }
    Ok(0.5 + 0.5 * global_phase.cos() * visibility_vs_resolution(omega_sum, time_resolution))
}

/// `V = exp(−(Ω⁰Δt)²/2)`.
pub fn visibility_vs_resolution(omega_sum: f64, time_resolution: f64) -> f64 {
    let x = omega_sum * time_resolution;
    (-0.5 * x * x).exp()
}

/// Which-path information at saturated energy-time resolution.
pub fn which_path_information(omega_sum: f64, time_resolution: f64) -> Result<WhichPath> {
    ResolutionSetting::saturated(omega_sum, time_resolution)?.which_path()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualityCheck {
    pub sum_of_squares: f64,
    pub satisfied: bool,
}

/// Check `V² + K² ≤ 1`.
pub fn duality_check(visibility: f64, which_path: f64) -> Result<DualityCheck> {
    for (name, x) in [
        ("visibility", visibility),
        ("which-path information", which_path),
    ] {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::invalid(format!(
                "{name} must lie in [0, 1], got {x}"
            )));
        }
    }
    let sum_of_squares = visibility * visibility + which_path * which_path;
    Ok(DualityCheck {
        sum_of_squares,
        satisfied: sum_of_squares <= 1.0 + DUALITY_EPSILON,
    })
}

/// One row of the tradeoff table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffRow {
    pub omega_dt: f64,
    pub visibility: f64,
    pub which_path: f64,
    pub sum_of_squares: f64,
}

/// Evaluate `V`, `K` and `V² + K²` at each dimensionless `Ω⁰Δt`.
pub fn tradeoff_table(omega_dt: &[f64]) -> Result<Vec<TradeoffRow>> {
    omega_dt
        .iter()
        .map(|&x| {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::invalid(format!("Ω⁰Δt must be > 0, got {x}")));
            }
            let v = visibility_vs_resolution(x, 1.0);
            let k = which_path_information(x, 1.0)?.k;
            Ok(TradeoffRow {
                omega_dt: x,
                visibility: v,
                which_path: k,
                sum_of_squares: duality_check(v, k)?.sum_of_squares,
            })
        })
        .collect()
}

/// `n` log-spaced points between `lo` and `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                .collect()
        }
    }
}

/// CSV `omega_dt,V,K,V2_plus_K2`.
pub fn write_tradeoff_csv<W: Write>(out: &mut W, rows: &[TradeoffRow]) -> io::Result<()> {
    write_csv_header(out, "omega_dt,V,K,V2_plus_K2")?;
    for r in rows {
        writeln!(
            out,
            "{:.12e},{:.12e},{:.12e},{:.12e}",
            r.omega_dt, r.visibility, r.which_path, r.sum_of_squares
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;
    use statrs::function::erf::erf;

    /// Gaussian-weighted average of the instantaneous probability.
    fn averaged_oracle(phi: f64, omega: f64, dt: f64) -> f64 {
        let span = 12.0 * dt;
        integrate(
            |t| {
                let p = 0.5 * (1.0 + (phi - omega * t).cos());
                let w = (-0.5 * (t / dt).powi(2)).exp() / ((2.0 * PI).sqrt() * dt);
                p * w
            },
            -span,
            span,
            1e-13,
            0.0,
        )
        .unwrap()
        .value
    }

    #[test]
    fn averaged_probability_examples() {
        for phi in [0.0, 0.7, PI] {
            let exact = 0.5 * (1.0 + f64::cos(phi));
            assert!((time_averaged_probability(phi, 5.0, 0.0).unwrap() - exact).abs() < 1e-15);
            assert!((time_averaged_probability(phi, 0.0, 3.0).unwrap() - exact).abs() < 1e-15);
        }
        let p = time_averaged_probability(0.0, 1.0, 1.0).unwrap();
        assert!((p - 0.803_265_329_856_316_7).abs() < 1e-14);
        assert!((p - averaged_oracle(0.0, 1.0, 1.0)).abs() < 1e-10);
        assert!(time_averaged_probability(0.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn averaged_probability_matches_quadrature_grid() {
        for phi in [0.0, 0.5, 1.9, 3.0, 5.5] {
            for x in [0.01, 0.3, 1.0, 2.5, 6.0] {
                let dt = 1e-3;
                let omega = x / dt;
                let got = time_averaged_probability(phi, omega, dt).unwrap();
                assert!((got - averaged_oracle(phi, omega, dt)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn visibility_examples() {
        assert_eq!(visibility_vs_resolution(10.0, 0.0), 1.0);
        let half = (2.0 * 2f64.ln()).sqrt();
        assert!((visibility_vs_resolution(half, 1.0) - 0.5).abs() < 1e-15);
        assert!((visibility_vs_resolution(3.0, 1.0) - 0.011_108_996_538_242_306).abs() < 1e-15);
    }

    #[test]
    fn which_path_examples() {
        let w = which_path_information(0.0, 1.0).unwrap();
        assert!((w.q - 0.5).abs() < 1e-12 && w.k.abs() < 1e-12);
        assert!(which_path_information(1.0, 1e6).unwrap().k > 1.0 - 1e-12);
        assert!(which_path_information(1.0, 0.0).is_err());
        // frozen from an independent adaptive quadrature: erf(1)
        let x = 4.0 * 2f64.sqrt() * PI;
        let w = which_path_information(x, 1.0).unwrap();
        assert!((w.k - 0.842_700_792_949_714_8).abs() < 1e-10);
        let w = which_path_information(1.0, 1.0).unwrap();
        assert!((w.q - 0.531_713_343_258_289_5).abs() < 1e-10);
    }

    #[test]
    fn which_path_matches_erf_closed_form() {
        for x in log_grid(1e-3, 1e3, 60) {
            let q = which_path_information(x, 1.0).unwrap().q;
            let closed = 0.5 + 0.5 * erf(x / (4.0 * 2f64.sqrt() * PI));
            assert!((q - closed).abs() < 1e-8, "x = {x}");
        }
    }

    #[test]
    fn which_path_monotone() {
        let ks: Vec<f64> = log_grid(1e-2, 1e2, 40)
            .into_iter()
            .map(|x| which_path_information(x, 1.0).unwrap().k)
            .collect();
        assert!(ks.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn resolution_setting_enforces_uncertainty() {
        assert!(ResolutionSetting::new(1.0, 1.0, 1.0).is_err());
        assert!(ResolutionSetting::new(1.0, 1.0, 2.0 * PI).is_ok());
        let s = ResolutionSetting::saturated(2.0, 0.5).unwrap();
        assert!((s.energy_resolution() * s.time_resolution() - 2.0 * PI).abs() < 1e-12);
        // coarser energy resolution means less path information
        let coarse = ResolutionSetting::new(2.0, 0.5, 8.0 * PI).unwrap();
        assert!(coarse.which_path().unwrap().k < s.which_path().unwrap().k);
    }

    #[test]
    fn duality_examples() {
        let d = duality_check(1.0, 0.0).unwrap();
        assert_eq!(d.sum_of_squares, 1.0);
        assert!(d.satisfied);
        assert!(duality_check(0.0, 1.0).unwrap().satisfied);
        let v = visibility_vs_resolution(1.0, 1.0);
        let k = which_path_information(1.0, 1.0).unwrap().k;
        let d = duality_check(v, k).unwrap();
        assert!(d.sum_of_squares < 1.0 && d.satisfied);
        assert!(duality_check(1.1, 0.0).is_err());
    }

    #[test]
    fn table_csv() {
        let rows = tradeoff_table(&log_grid(1e-3, 1e3, 5)).unwrap();
        assert_eq!(rows.len(), 5);
        let mut buf = Vec::new();
        write_tradeoff_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1) == Some("omega_dt,V,K,V2_plus_K2"));
        assert!(tradeoff_table(&[0.0]).is_err());
    }
}
