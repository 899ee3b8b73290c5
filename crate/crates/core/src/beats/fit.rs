use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::Histogram;
use crate::{Error, Result};

const MIN_NONEMPTY_BINS: usize = 50;
const MIN_BEAT_PERIODS: f64 = 3.0;
const COARSE_GROUP: usize = 32;
const WINDOW_FLOOR: f64 = 1e-4;
const PADDING: usize = 8;
const FALSE_ALARM: f64 = 1e-3;
const WEIGHT_FLOOR: f64 = 1e-6;
// Pearson terms of sparser bins are too heavy-tailed to summarize the fit.
const CHI2_MIN_EXPECTED: f64 = 5.0;

/// Outcome category of a beat fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitFlag {
    Ok,
    /// The periodogram peak was below the noise floor; only the envelope
    /// was fitted and the beat parameters are zero.
    NoBeatDetected,
}

/// Fitted parameters of the inter-arrival histogram with standard errors.
///
/// The model for the bin `[t₁, t₂)` is
/// `(A/τ)·∫ exp(−t/τ)·(1 + a·cos Ωt) dt` with `a = V²/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeatFit {
    pub amplitude: f64,
    pub amplitude_err: f64,
    pub visibility_sq_half: f64,
    pub visibility_sq_half_err: f64,
    /// rad/s
    pub beat_freq: f64,
    pub beat_freq_err: f64,
    /// s
    pub mean_interval: f64,
    pub mean_interval_err: f64,
    /// Pearson χ² per degree of freedom over bins expecting at least five
    /// counts.
    pub chi2_reduced: f64,
    pub bins_used: usize,
    pub iterations: usize,
    pub flag: FitFlag,
}

impl BeatFit {
    pub fn freq_hz(&self) -> f64 {
        self.beat_freq / TAU
    }

    pub fn freq_err_hz(&self) -> f64 {
        self.beat_freq_err / TAU
    }

    /// `V = √(2a)`.
    pub fn visibility(&self) -> f64 {
        (2.0 * self.visibility_sq_half).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Bins starting below this gap are ignored (dead time).
    pub min_dt: f64,
    pub max_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            min_dt: 0.0,
            max_iterations: 200,
        }
    }
}

pub fn fit_beats(hist: &Histogram) -> Result<BeatFit> {
    fit_beats_with(hist, &FitOptions::default())
}

pub fn fit_beats_with(hist: &Histogram, opts: &FitOptions) -> Result<BeatFit> {
    let counts: Vec<f64> = hist.counts.iter().map(|&c| c as f64).collect();
    fit_counts(hist.lo, hist.bin_width, &counts, opts)
}

/// Fit counts in contiguous bins of width `bin_width` starting at `lo`.
pub fn fit_counts(lo: f64, bin_width: f64, counts: &[f64], opts: &FitOptions) -> Result<BeatFit> {
    if !(bin_width > 0.0 && lo >= 0.0 && lo.is_finite()) {
        return Err(Error::invalid("need bin_width > 0 and lo >= 0"));
    }
    if counts.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
        return Err(Error::invalid("counts must be finite and non-negative"));
    }
    let first = (0..counts.len())
        .find(|&k| lo + k as f64 * bin_width >= opts.min_dt * (1.0 - 1e-12))
        .ok_or_else(|| Error::invalid("no bins above the minimum gap"))?;
    let all = Bins {
        edges: (first..=counts.len())
            .map(|k| lo + k as f64 * bin_width)
            .collect(),
        y: counts[first..].to_vec(),
    };
    let nonempty = all.y.iter().filter(|&&c| c > 0.0).count();
    if nonempty < MIN_NONEMPTY_BINS {
        return Err(Error::invalid(format!(
            "{nonempty} non-empty bins; at least {MIN_NONEMPTY_BINS} are needed"
        )));
    }

    let tau0 = coarse_decay_time(&all)?;
    let a0 = all.y.iter().sum::<f64>() / all.envelope_mass(tau0);
    // drop the far tail where nothing is expected
    let n = (0..all.len())
        .rposition(|k| a0 * all.envelope_bin(k, tau0) >= WINDOW_FLOOR)
        .map_or(all.len(), |k| k + 1)
        .max(MIN_NONEMPTY_BINS)
        .min(all.len());
    let bins = all.truncate(n);

    let envelope = levenberg_marquardt(
        &bins,
        [a0, 0.0, 0.0, tau0],
        [true, false, false, true],
        opts,
    )?;
    let (mu, _) = model(&bins, &envelope.params);
    let residual: Vec<f64> = bins.y.iter().zip(&mu).map(|(y, m)| y - m).collect();
    let expected: f64 = mu.iter().sum();

    let Some(omega0) = periodogram_peak(&residual, expected, bin_width) else {
        return envelope.into_fit(&bins, FitFlag::NoBeatDetected);
    };
    let span = bins.edges[bins.len()] - bins.edges[0];
    let tau = envelope.params[3];
    let (amp, beat) = linear_amplitudes(&bins, omega0, tau);
    let start = [
        amp.max(f64::MIN_POSITIVE),
        (beat / amp).clamp(0.01, 0.5),
        omega0,
        tau,
    ];
    let full = levenberg_marquardt(&bins, start, [true; 4], opts)?;
    if full.params[2] * span / TAU < MIN_BEAT_PERIODS {
        return Err(Error::domain(format!(
            "fit window spans {:.2} beat periods; at least {MIN_BEAT_PERIODS} are needed",
            full.params[2] * span / TAU
        )));
    }
    full.into_fit(&bins, FitFlag::Ok)
}

struct Bins {
    edges: Vec<f64>,
    y: Vec<f64>,
}

impl Bins {
    fn len(&self) -> usize {
        self.y.len()
    }

    fn truncate(&self, n: usize) -> Bins {
        Bins {
            edges: self.edges[..=n].to_vec(),
            y: self.y[..n].to_vec(),
        }
    }

    fn envelope_bin(&self, k: usize, tau: f64) -> f64 {
        (-self.edges[k] / tau).exp() - (-self.edges[k + 1] / tau).exp()
    }

    fn envelope_mass(&self, tau: f64) -> f64 {
        (-self.edges[0] / tau).exp() - (-self.edges[self.len()] / tau).exp()
    }
}

/// `∫ e^{st} dt` over `[lo, hi]`.
fn i0(s: Complex64, lo: f64, hi: f64) -> Complex64 {
    ((s * hi).exp() - (s * lo).exp()) / s
}

/// `∫ t·e^{st} dt` over `[lo, hi]`.
fn i1(s: Complex64, lo: f64, hi: f64) -> Complex64 {
    let prim = |t: f64| (s * t).exp() * (t / s - 1.0 / (s * s));
    prim(hi) - prim(lo)
}

/// Expected counts and their gradient in `[A, a, Ω, τ]`.
fn model(bins: &Bins, p: &[f64; 4]) -> (Vec<f64>, Vec<[f64; 4]>) {
    let [amp, depth, omega, tau] = *p;
    let s0 = Complex64::new(-1.0 / tau, 0.0);
    let s = Complex64::new(-1.0 / tau, omega);
    let mut mu = Vec::with_capacity(bins.len());
    let mut jac = Vec::with_capacity(bins.len());
    for k in 0..bins.len() {
        let (lo, hi) = (bins.edges[k], bins.edges[k + 1]);
        let e0 = i0(s0, lo, hi).re;
        let e = i0(s, lo, hi);
        let m = amp / tau * (e0 + depth * e.re);
        let t0 = i1(s0, lo, hi).re;
        let t = i1(s, lo, hi);
        mu.push(m);
        jac.push([
            m / amp,
            amp / tau * e.re,
            -amp / tau * depth * t.im,
            -m / tau + amp / (tau * tau * tau) * (t0 + depth * t.re),
        ]);
    }
    (mu, jac)
}

fn neg_log_likelihood(y: &[f64], mu: &[f64]) -> f64 {
    y.iter()
        .zip(mu)
        .map(|(&y, &m)| {
            let m = m.max(f64::MIN_POSITIVE);
            if y > 0.0 {
                m - y * m.ln()
            } else {
                m
            }
        })
        .sum()
}

/// Envelope decay time from a log-linear fit to groups of bins.
fn coarse_decay_time(bins: &Bins) -> Result<f64> {
    let mut pts = Vec::new();
    let mut k = 0;
    while k < bins.len() {
        let end = (k + COARSE_GROUP).min(bins.len());
        let sum: f64 = bins.y[k..end].iter().sum();
        let width = bins.edges[end] - bins.edges[k];
        if sum >= 5.0 {
            pts.push((
                0.5 * (bins.edges[k] + bins.edges[end]),
                (sum / width).ln(),
                sum,
            ));
        }
        k = end;
    }
    if pts.len() < 2 {
        return Err(Error::invalid(
            "too few populated bins to estimate the decay",
        ));
    }
    let w: f64 = pts.iter().map(|p| p.2).sum();
    let tm = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / w;
    let lm = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / w;
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - tm) * (p.1 - lm)).sum();
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - tm) * (p.0 - tm)).sum();
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(Error::domain("histogram shows no decaying envelope"));
    }
    Ok(-1.0 / slope)
}

/// Angular frequency of the strongest periodic component of `residual`, or
/// `None` when its normalized power stays below the false-alarm threshold.
fn periodogram_peak(residual: &[f64], expected: f64, bin_width: f64) -> Option<f64> {
    let n = residual.len();
    let len = n * PADDING;
    let mut buf: Vec<Complex64> = residual.iter().map(|&r| Complex64::new(r, 0.0)).collect();
    buf.resize(len, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let power: Vec<f64> = buf[..=len / 2].iter().map(|z| z.norm_sqr()).collect();
    let j_min = (MIN_BEAT_PERIODS * PADDING as f64).ceil() as usize;
    if j_min + 1 >= power.len() {
        return None;
    }
    let j = (j_min..power.len() - 1).max_by(|&a, &b| power[a].total_cmp(&power[b]))?;
    let independent = (n / 2).max(1) as f64;
    if power[j] / expected.max(f64::MIN_POSITIVE) < (independent / FALSE_ALARM).ln() {
        return None;
    }
    let (l, c, r) = (power[j - 1], power[j], power[j + 1]);
    let curve = l - 2.0 * c + r;
    let shift = if curve < 0.0 {
        0.5 * (l - r) / curve
    } else {
        0.0
    };
    Some(TAU * (j as f64 + shift) / (len as f64 * bin_width))
}

/// Weighted linear estimate of `(A, A·a)` at fixed `Ω` and `τ`.
fn linear_amplitudes(bins: &Bins, omega: f64, tau: f64) -> (f64, f64) {
    let s0 = Complex64::new(-1.0 / tau, 0.0);
    let s = Complex64::new(-1.0 / tau, omega);
    let (mut h00, mut h01, mut h11, mut g0, mut g1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..bins.len() {
        let (lo, hi) = (bins.edges[k], bins.edges[k + 1]);
        let b0 = i0(s0, lo, hi).re / tau;
        let b1 = i0(s, lo, hi).re / tau;
        let w = 1.0 / b0.max(WEIGHT_FLOOR);
        h00 += w * b0 * b0;
        h01 += w * b0 * b1;
        h11 += w * b1 * b1;
        g0 += w * b0 * bins.y[k];
        g1 += w * b1 * bins.y[k];
    }
    let det = h00 * h11 - h01 * h01;
    if det.abs() <= 1e-300 {
        return (g0 / h00, 0.0);
    }
    ((h11 * g0 - h01 * g1) / det, (h00 * g1 - h01 * g0) / det)
}

struct Solution {
    params: [f64; 4],
    covariance: DMatrix<f64>,
    free: [bool; 4],
    iterations: usize,
}

impl Solution {
    fn into_fit(self, bins: &Bins, flag: FitFlag) -> Result<BeatFit> {
        let (mu, _) = model(bins, &self.params);
        let (chi2, populated) = bins
            .y
            .iter()
            .zip(&mu)
            .filter(|(_, &m)| m >= CHI2_MIN_EXPECTED)
            .fold((0.0, 0usize), |(s, n), (y, m)| {
                (s + (y - m) * (y - m) / m, n + 1)
            });
        let n_free = self.free.iter().filter(|&&f| f).count();
        let dof = populated.saturating_sub(n_free).max(1);
        let mut err = [0.0; 4];
        let mut idx = 0;
        for (j, e) in err.iter_mut().enumerate() {
            if self.free[j] {
                *e = self.covariance[(idx, idx)].max(0.0).sqrt();
                idx += 1;
            }
        }
        let [amplitude, visibility_sq_half, beat_freq, mean_interval] = self.params;
        let fit = BeatFit {
            amplitude,
            amplitude_err: err[0],
            visibility_sq_half,
            visibility_sq_half_err: err[1],
            beat_freq,
            beat_freq_err: err[2],
            mean_interval,
            mean_interval_err: err[3],
            chi2_reduced: chi2 / dof as f64,
            bins_used: bins.len(),
            iterations: self.iterations,
            flag,
        };
        let values = [
            fit.amplitude,
            fit.amplitude_err,
            fit.visibility_sq_half,
            fit.visibility_sq_half_err,
            fit.beat_freq,
            fit.beat_freq_err,
            fit.mean_interval,
            fit.mean_interval_err,
            fit.chi2_reduced,
        ];
        if values.iter().all(|v| v.is_finite()) {
            Ok(fit)
        } else {
            Err(Error::Numerical(
                "beat fit produced non-finite values".into(),
            ))
        }
    }
}

fn project(p: &mut [f64; 4], previous: &[f64; 4]) {
    p[1] = p[1].clamp(0.0, 0.5);
    for j in [0, 2, 3] {
        if !(p[j] > 0.0) {
            p[j] = 0.1 * previous[j];
        }
    }
}

/// Poisson maximum likelihood by damped Fisher scoring. Each step solves the
/// Pearson-weighted normal equations, which makes the fixed point the
/// Poisson score equation.
fn levenberg_marquardt(
    bins: &Bins,
    start: [f64; 4],
    free: [bool; 4],
    opts: &FitOptions,
) -> Result<Solution> {
    let idx: Vec<usize> = (0..4).filter(|&j| free[j]).collect();
    let scale: Vec<f64> = idx
        .iter()
        .map(|&j| {
            if j == 1 {
                0.5
            } else {
                start[j].abs().max(f64::MIN_POSITIVE)
            }
        })
        .collect();
    let m = idx.len();
    let mut p = start;
    let (mut mu, mut jac) = model(bins, &p);
    let mut nll = neg_log_likelihood(&bins.y, &mu);
    let mut lambda = 1e-3;

    let normal = |mu: &[f64], jac: &[[f64; 4]]| {
        let mut h = DMatrix::<f64>::zeros(m, m);
        let mut g = DVector::<f64>::zeros(m);
        for k in 0..bins.len() {
            let w = 1.0 / mu[k].max(WEIGHT_FLOOR);
            let r = bins.y[k] - mu[k];
            for a in 0..m {
                let ja = jac[k][idx[a]] * scale[a];
                g[a] += w * r * ja;
                for b in a..m {
                    h[(a, b)] += w * ja * jac[k][idx[b]] * scale[b];
                }
            }
        }
        for a in 0..m {
            for b in 0..a {
                h[(a, b)] = h[(b, a)];
            }
        }
        (h, g)
    };

    for iteration in 1..=opts.max_iterations {
        let (h, g) = normal(&mu, &jac);
        let mut improved = false;
        let mut converged = false;
        while lambda < 1e16 {
            let mut damped = h.clone();
            for a in 0..m {
                damped[(a, a)] += lambda * h[(a, a)].max(1e-300);
            }
            let Some(step) = damped.cholesky().map(|c| c.solve(&g)) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial = p;
            for a in 0..m {
                trial[idx[a]] += step[a] * scale[a];
            }
            project(&mut trial, &p);
            let (mu_t, jac_t) = model(bins, &trial);
            let nll_t = neg_log_likelihood(&bins.y, &mu_t);
            if nll_t.is_finite() && nll_t <= nll {
                let rel = (0..m)
                    .map(|a| (trial[idx[a]] - p[idx[a]]).abs() / scale[a])
                    .fold(0.0, f64::max);
                converged = rel < 1e-10 || nll - nll_t < 1e-12 * (1.0 + nll.abs());
                p = trial;
                mu = mu_t;
                jac = jac_t;
                nll = nll_t;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // no downhill step left; accept only if the gradient is negligible
            let decrement = h
                .clone()
                .cholesky()
                .map(|c| g.dot(&c.solve(&g)))
                .unwrap_or(f64::INFINITY);
            if decrement < 1e-6 {
                converged = true;
            } else {
                return Err(Error::NonConvergence {
                    iterations: iteration,
                    diagnostics: format!("stalled at {p:?} with Newton decrement {decrement:e}"),
                });
            }
        }
        if converged {
            let (h, _) = normal(&mu, &jac);
            let inv = h
                .clone()
                .cholesky()
                .map(|c| c.inverse())
                .or_else(|| h.try_inverse())
                .ok_or_else(|| Error::Numerical("singular information matrix".into()))?;
            let mut covariance = inv;
            for a in 0..m {
                for b in 0..m {
                    covariance[(a, b)] *= scale[a] * scale[b];
                }
            }
            return Ok(Solution {
                params: p,
                covariance,
                free,
                iterations: iteration,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iterations,
        diagnostics: format!("parameters {p:?}, objective {nll:e}"),
    })
}
