use crate::{Error, Result};

use super::ProcessParams;

/// Largest `t_b·Ω⁰` for which a bin is approximated by its midpoint value.
pub const SMALL_BIN_LIMIT: f64 = 0.1;

fn normalization(depth: f64, omega: f64, tau: f64) -> f64 {
    let wt = omega * tau;
    1.0 + depth / (1.0 + wt * wt)
}

/// Probability density (1/s) of a gap `dt` between successive coincidences.
pub fn interarrival_density(dt: f64, visibility: f64, beat_freq: f64, mean_interval: f64) -> f64 {
    if dt < 0.0 {
        return 0.0;
    }
    let depth = 0.5 * visibility * visibility;
    (1.0 + depth * (beat_freq * dt).cos()) * (-dt / mean_interval).exp()
        / (mean_interval * normalization(depth, beat_freq, mean_interval))
}

/// `∫_t^∞ P`, in closed form.
pub fn interarrival_survival(t: f64, visibility: f64, beat_freq: f64, mean_interval: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let depth = 0.5 * visibility * visibility;
    let wt = beat_freq * mean_interval;
    let phase = beat_freq * t;
    let osc = (phase.cos() - wt * phase.sin()) / (1.0 + wt * wt);
    (-t / mean_interval).exp() * (1.0 + depth * osc)
        / normalization(depth, beat_freq, mean_interval)
}

/// `∫_0^t P`.
pub fn interarrival_cdf(t: f64, visibility: f64, beat_freq: f64, mean_interval: f64) -> f64 {
    1.0 - interarrival_survival(t, visibility, beat_freq, mean_interval)
}

/// Probability that a gap falls in `[lo, hi)`.
pub fn bin_probability(
    lo: f64,
    hi: f64,
    visibility: f64,
    beat_freq: f64,
    mean_interval: f64,
) -> f64 {
    interarrival_survival(lo, visibility, beat_freq, mean_interval)
        - interarrival_survival(hi, visibility, beat_freq, mean_interval)
}

/// Expected histogram of successive-coincidence gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedCounts {
    pub bin_width: f64,
    pub lo: f64,
    pub counts: Vec<f64>,
    /// Whether bins were evaluated at their midpoint (`t_b·Ω⁰ <`
    /// [`SMALL_BIN_LIMIT`]) instead of integrated exactly.
    pub small_bin_approximation: bool,
    pub warnings: Vec<String>,
}

/// Expected counts per bin for an acquisition of `acquisition` seconds,
/// which contains about `acquisition/τ` gaps.
pub fn binned_counts(
    params: &ProcessParams,
    bin_width: f64,
    lo: f64,
    hi: f64,
    acquisition: f64,
) -> Result<BinnedCounts> {
    params.validate()?;
    if !(bin_width > 0.0 && hi > lo && lo >= 0.0 && acquisition >= 0.0) {
        return Err(Error::invalid(
            "need bin_width > 0, 0 <= lo < hi, acquisition >= 0",
        ));
    }
    let n = ((hi - lo) / bin_width).round() as usize;
    let scale = acquisition / params.mean_interval;
    let (v, w, tau) = (params.visibility, params.beat_freq, params.mean_interval);
    let small = bin_width * w.abs() < SMALL_BIN_LIMIT;
    let mut warnings = params.warnings();
    if !small {
        warnings.push(format!(
            "bin width × beat frequency = {:.3} is not small; bins integrated exactly",
            bin_width * w.abs()
        ));
    }
    let counts = (0..n)
        .map(|k| {
            let a = lo + k as f64 * bin_width;
            let b = a + bin_width;
            if small {
                scale * bin_width * interarrival_density(0.5 * (a + b), v, w, tau)
            } else {
                scale * bin_probability(a, b, v, w, tau)
            }
        })
        .collect();
    Ok(BinnedCounts {
        bin_width,
        lo,
        counts,
        small_bin_approximation: small,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;
    use std::f64::consts::PI;

    fn norm_oracle(v: f64, w: f64, tau: f64) -> f64 {
        // 60 τ leaves a tail below e^-60
        let pieces = 240;
        let step = 60.0 * tau / pieces as f64;
        (0..pieces)
            .map(|i| {
                let a = i as f64 * step;
                integrate(
                    |t| interarrival_density(t, v, w, tau),
                    a,
                    a + step,
                    1e-15,
                    1e-14,
                )
                .unwrap()
                .value
            })
            .sum()
    }

    #[test]
    fn pure_exponential_without_beat() {
        let tau = 2e-3;
        for dt in [0.0, 1e-4, 3e-3] {
            let p = interarrival_density(dt, 0.0, 1e5, tau);
            assert!((p - (-dt / tau).exp() / tau).abs() < 1e-9);
        }
    }

    #[test]
    fn normalized_example() {
        let tau = 1e-3;
        let n = norm_oracle(0.97, 5.0 / tau, tau);
        assert!((n - 1.0).abs() < 1e-9, "{n}");
    }

    #[test]
    fn density_at_zero_example() {
        let w = 2.0 * PI * 31_250.0;
        let tau = 1e-3;
        let wt = 2.0 * PI * 31.25;
        let expected = 1.5 / (tau * (1.0 + 0.5 / (1.0 + wt * wt)));
        assert!((interarrival_density(0.0, 1.0, w, tau) / expected - 1.0).abs() < 1e-14);
    }

    #[test]
    fn survival_matches_quadrature() {
        let (v, w, tau) = (0.9, 2.0 * PI * 31_250.0, 1e-3);
        for t in [0.0, 1e-5, 3.3e-4, 2e-3, 7e-3] {
            let q =
                integrate(|s| interarrival_density(s, v, w, tau), 0.0, t, 1e-14, 1e-13).unwrap();
            assert!(
                (interarrival_cdf(t, v, w, tau) - q.value).abs() < 1e-10,
                "t = {t}"
            );
        }
    }

    #[test]
    fn bin_counts_sum_to_rate_times_time() {
        let p = ProcessParams::new(1e-3, 0.97, 2.0 * PI * 31_250.0, 0.0, 1.0, 0).unwrap();
        let b = binned_counts(&p, 4e-6, 0.0, 0.1, 300.0).unwrap();
        assert!(!b.small_bin_approximation);
        assert!(!b.warnings.is_empty());
        let total: f64 = b.counts.iter().sum();
        assert!((total - 3e5).abs() < 1e-6 * 3e5, "{total}");
    }

    #[test]
    fn small_bins_use_midpoint_rule() {
        let p = ProcessParams::new(1e-3, 0.0, 0.0, 0.0, 1.0, 0).unwrap();
        let b = binned_counts(&p, 1e-5, 0.0, 5e-3, 10.0).unwrap();
        assert!(b.small_bin_approximation);
        assert!(b.counts.windows(2).all(|c| c[1] < c[0]));
    }

    #[test]
    fn four_microsecond_bins_need_exact_integral() {
        // at t_b·Ω⁰ ≈ 0.785 the midpoint rule misstates the modulation
        let (v, w, tau) = (0.97, 2.0 * PI * 31_250.0, 1e-3);
        let tb = 4e-6;
        assert!((tb * w - 0.785).abs() < 1e-3);
        let mut worst: f64 = 0.0;
        for k in 0..64 {
            let a = k as f64 * tb;
            let exact = bin_probability(a, a + tb, v, w, tau);
            let mid = tb * interarrival_density(a + 0.5 * tb, v, w, tau);
            worst = worst.max((mid - exact).abs() / exact);
        }
        assert!(worst > 0.01, "{worst}");
    }

    #[test]
    fn normalization_over_grid() {
        for v in [0.0, 0.3, 0.6, 0.9, 1.0] {
            for wt in [0.0, 0.5, 2.0, 10.0, 40.0] {
                let tau = 1e-3;
                let n = norm_oracle(v, wt / tau, tau);
                assert!((n - 1.0).abs() < 1e-9, "V={v} Ωτ={wt}: {n}");
            }
        }
    }
}
