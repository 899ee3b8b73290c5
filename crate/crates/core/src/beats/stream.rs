use std::f64::consts::TAU;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::ProcessParams;
use crate::Result;

/// Simulate coincidence timestamps (seconds, strictly increasing).
///
/// The rate is `(1 + V·cos(Ω⁰t + θ))/τ`, so its long-run mean is `1/τ`, with
/// the start phase `θ` uniform in `[0, 2π)`. Events are drawn by thinning a
/// homogeneous process of rate `(1 + V)/τ`, then a non-paralyzable dead time
/// discards any event closer than `τ_d` to the previously kept one.
pub fn generate_stream(params: &ProcessParams) -> Result<Vec<f64>> {
    params.validate()?;
    if params.duration <= 0.0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let theta = rng.random::<f64>() * TAU;
    let v = params.visibility;
    let peak_rate = (1.0 + v) / params.mean_interval;
    let gaps = Exp::new(peak_rate).expect("positive rate");

    let mut out = Vec::with_capacity((1.2 * params.duration / params.mean_interval) as usize + 1);
    let mut t = 0.0;
    let mut last_kept = f64::NEG_INFINITY;
    loop {
        t += gaps.sample(&mut rng);
        if t >= params.duration {
            break;
        }
        let accept = (1.0 + v * (params.beat_freq * t + theta).cos()) / (1.0 + v);
        if rng.random::<f64>() >= accept {
            continue;
        }
        if t - last_kept < params.dead_time || t <= last_kept {
            continue;
        }
        out.push(t);
        last_kept = t;
    }
    Ok(out)
}

/// Newline-delimited timestamps with 12 significant digits.
pub fn write_stream<W: Write>(out: &mut W, timestamps: &[f64]) -> io::Result<()> {
    for t in timestamps {
        writeln!(out, "{t:.11e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(v: f64, tau: f64, dead: f64, duration: f64, seed: u64) -> ProcessParams {
        ProcessParams::new(tau, v, TAU * 31_250.0, dead, duration, seed).unwrap()
    }

    #[test]
    fn homogeneous_mean_gap() {
        let tau = 1e-3;
        let ts = generate_stream(&params(0.0, tau, 0.0, 100.0, 5)).unwrap();
        let gaps: Vec<f64> = ts.windows(2).map(|w| w[1] - w[0]).collect();
        let n = gaps.len() as f64;
        assert!(n > 9e4);
        let mean = gaps.iter().sum::<f64>() / n;
        // exponential gaps: standard error τ/√n
        assert!((mean - tau).abs() < 3.0 * tau / n.sqrt(), "{mean}");
    }

    #[test]
    fn modulated_mean_rate_is_one_over_tau() {
        let tau = 1e-3;
        let ts = generate_stream(&params(0.97, tau, 0.0, 100.0, 11)).unwrap();
        let n = ts.len() as f64;
        assert!((n - 1e5).abs() < 4.0 * 1e5f64.sqrt(), "{n}");
    }

    #[test]
    fn strictly_increasing_and_deterministic() {
        let p = params(0.5, 1e-4, 0.0, 2.0, 3);
        let a = generate_stream(&p).unwrap();
        assert!(a.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(a, generate_stream(&p).unwrap());
        assert_ne!(a, generate_stream(&params(0.5, 1e-4, 0.0, 2.0, 4)).unwrap());
    }

    #[test]
    fn dead_time_enforced() {
        let dead = 5e-3;
        let ts = generate_stream(&params(0.3, 1e-4, dead, 5.0, 8)).unwrap();
        assert!(ts.windows(2).all(|w| w[1] - w[0] >= dead));
        // dead time far beyond the mean gap: roughly one event per window
        let n = ts.len() as f64;
        assert!(n <= 5.0 / dead + 1.0);
        assert!(n > 0.9 * 5.0 / (dead + 1e-4));
    }

    #[test]
    fn empty_for_nonpositive_duration() {
        assert!(generate_stream(&params(0.5, 1e-3, 0.0, 0.0, 1))
            .unwrap()
            .is_empty());
        assert!(generate_stream(&params(0.5, 1e-3, 0.0, -1.0, 1))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn twelve_significant_digits() {
        let mut buf = Vec::new();
        write_stream(&mut buf, &[0.123456789012345, 12.5]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "1.23456789012e-1\n1.25000000000e1\n"
        );
    }
}
