//! Key distribution with frequency-shifted interferometers.
//!
//! Two bases are realized either by phase settings (`φ₁ ∈ {0, π/2}`,
//! `φ₂ ∈ {0, −π/2}`) or by frequency shifts (`Ω₁ ∈ {0, Ω}`, `Ω₂ ∈ {0, −Ω}`).
//! Frequency bases are only pseudo-complementary: a mismatched pair still
//! correlates at any instant, and the correlation vanishes only on average
//! over the beat. A third scheme encodes phases on frequency sidebands and
//! post-selects one sideband ([`sideband`]).

mod protocol;
pub mod sideband;

pub use protocol::{
    run_protocol, run_protocol_traced, write_trace_csv, BasisStrategy, KeyReport, PairingStat,
    ProtocolConfig, RoundTrace, TimingConstraints, DEFAULT_ARM_DELAY,
};

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::quad::integrate;
use crate::units::TAU;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Phase,
    Frequency,
    Sideband,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phase" => Ok(Scheme::Phase),
            "freq" | "frequency" => Ok(Scheme::Frequency),
            "sideband" => Ok(Scheme::Sideband),
            other => Err(Error::invalid(format!(
                "unknown scheme `{other}` (phase, freq, sideband)"
            ))),
        }
    }
}

/// Settings of one round. Frequencies in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundSetting {
    pub alice_phase: f64,
    pub bob_phase: f64,
    pub alice_shift: f64,
    pub bob_shift: f64,
    pub scheme: Scheme,
    /// Uncertainty of the disclosed detection time (s).
    pub emission_time_jitter: f64,
}

impl RoundSetting {
    pub fn new(
        scheme: Scheme,
        alice_phase: f64,
        bob_phase: f64,
        alice_shift: f64,
        bob_shift: f64,
        emission_time_jitter: f64,
    ) -> Result<Self> {
        let values = [alice_phase, bob_phase, alice_shift, bob_shift];
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("round settings must be finite"));
        }
        if !(emission_time_jitter.is_finite() && emission_time_jitter >= 0.0) {
            return Err(Error::invalid("time jitter must be >= 0"));
        }
        Ok(RoundSetting {
            alice_phase,
            bob_phase,
            alice_shift,
            bob_shift,
            scheme,
            emission_time_jitter,
        })
    }

    /// Setting for basis choices `a`, `b ∈ {0, 1}` of the phase or
    /// frequency scheme.
    pub fn for_bases(scheme: Scheme, a: u8, b: u8, omega: f64) -> Result<Self> {
        if a > 1 || b > 1 {
            return Err(Error::invalid("basis index must be 0 or 1"));
        }
        let (a, b) = (f64::from(a), f64::from(b));
        match scheme {
            Scheme::Phase => {
                RoundSetting::new(scheme, a * FRAC_PI_2, -b * FRAC_PI_2, 0.0, 0.0, 0.0)
            }
            Scheme::Frequency => RoundSetting::new(scheme, 0.0, 0.0, a * omega, -b * omega, 0.0),
            Scheme::Sideband => Err(Error::invalid(
                "sideband rounds are not described by basis shifts",
            )),
        }
    }

    pub fn phase_sum(&self) -> f64 {
        self.alice_phase + self.bob_phase
    }

    pub fn shift_sum(&self) -> f64 {
        self.alice_shift + self.bob_shift
    }
}

/// Joint outcome probabilities, `+` and `−` for each side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomeProbabilities {
    pub pp: f64,
    pub pm: f64,
    pub mp: f64,
    pub mm: f64,
}

impl OutcomeProbabilities {
    /// `E = p₊₊ + p₋₋ − p₊₋ − p₋₊`.
    pub fn correlation(&self) -> f64 {
        self.pp + self.mm - self.pm - self.mp
    }
}

/// `p±± = (1 ± cos(φ₁ + φ₂ + (Ω₁ + Ω₂)t))/4`, same sign for equal outcomes.
pub fn outcome_probabilities(setting: &RoundSetting, t: f64) -> OutcomeProbabilities {
    let c = (setting.phase_sum() + setting.shift_sum() * t).cos();
    let same = 0.25 * (1.0 + c);
    let diff = 0.25 * (1.0 - c);
    OutcomeProbabilities {
        pp: same,
        pm: diff,
        mp: diff,
        mm: same,
    }
}

/// Correlation averaged over emission time: over one beat period when the
/// shifts do not cancel, otherwise constant.
pub fn time_averaged_correlation(setting: &RoundSetting) -> Result<f64> {
    let w = setting.shift_sum();
    if w == 0.0 {
        return Ok(setting.phase_sum().cos());
    }
    let period = TAU / w.abs();
    let q = integrate(
        |t| outcome_probabilities(setting, t).correlation(),
        0.0,
        period,
        1e-13 * period,
        0.0,
    )?;
    Ok(q.value / period)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JitterModel {
    Uniform,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EveKnowledge {
    /// Magnitude of the beat phasor averaged over the timing jitter.
    pub phase_knowledge: f64,
    pub breach: bool,
}

/// How well an eavesdropper who learns the disclosed detection times can
/// follow the beat. `jitter` is the full width (uniform) or standard
/// deviation (Gaussian) of the timing uncertainty.
pub fn eve_timing_attack(omega_sum: f64, jitter: f64, model: JitterModel) -> Result<EveKnowledge> {
    if !(jitter.is_finite() && jitter >= 0.0) {
        return Err(Error::invalid("jitter must be >= 0"));
    }
    if !omega_sum.is_finite() {
        return Err(Error::invalid("beat frequency must be finite"));
    }
    let x = omega_sum * jitter;
    let phase_knowledge = match model {
        JitterModel::Gaussian => (-0.5 * x * x).exp(),
        JitterModel::Uniform => crate::fringe::sinc(0.5 * x).abs(),
    };
    Ok(EveKnowledge {
        phase_knowledge,
        breach: phase_knowledge > 0.5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const OMEGA: f64 = TAU * 4e8;

    #[test]
    fn phase_table() {
        let expected = [[1.0, 0.0], [0.0, 1.0]];
        for a in 0..2u8 {
            for b in 0..2u8 {
                let s = RoundSetting::for_bases(Scheme::Phase, a, b, 0.0).unwrap();
                let e = time_averaged_correlation(&s).unwrap();
                assert!(
                    (e - expected[a as usize][b as usize]).abs() < 1e-10,
                    "{a}{b}: {e}"
                );
            }
        }
        let s = RoundSetting::for_bases(Scheme::Phase, 0, 0, 0.0).unwrap();
        let p = outcome_probabilities(&s, 0.3);
        assert_eq!((p.pp, p.mm, p.pm, p.mp), (0.5, 0.5, 0.0, 0.0));
    }

    #[test]
    fn frequency_table() {
        let expected = [[1.0, 0.0], [0.0, 1.0]];
        for a in 0..2u8 {
            for b in 0..2u8 {
                let s = RoundSetting::for_bases(Scheme::Frequency, a, b, OMEGA).unwrap();
                let e = time_averaged_correlation(&s).unwrap();
                assert!(
                    (e - expected[a as usize][b as usize]).abs() < 1e-10,
                    "{a}{b}: {e}"
                );
            }
        }
    }

    #[test]
    fn eve_examples() {
        let k = eve_timing_attack(OMEGA, 0.0, JitterModel::Uniform).unwrap();
        assert_eq!(k.phase_knowledge, 1.0);
        assert!(k.breach);
        let k = eve_timing_attack(
            OMEGA,
            1000.0 * TAU / OMEGA + 0.3 / OMEGA,
            JitterModel::Uniform,
        )
        .unwrap();
        assert!(k.phase_knowledge < 1e-3);
        assert!(!k.breach);
        let k = eve_timing_attack(OMEGA, 1.0 / OMEGA, JitterModel::Gaussian).unwrap();
        assert!((k.phase_knowledge - (-0.5f64).exp()).abs() < 1e-15);
        assert!(k.breach);
        assert!(eve_timing_attack(OMEGA, -1.0, JitterModel::Gaussian).is_err());
    }

    proptest! {
        #[test]
        fn probabilities_sum_to_one(
            pa in -10f64..10.0, pb in -10f64..10.0,
            wa in -1e9f64..1e9, wb in -1e9f64..1e9, t in 0f64..1e-6,
        ) {
            let s = RoundSetting::new(Scheme::Frequency, pa, pb, wa, wb, 0.0).unwrap();
            let p = outcome_probabilities(&s, t);
            prop_assert!((p.pp + p.pm + p.mp + p.mm - 1.0).abs() < 1e-15);
            prop_assert!(p.pp >= 0.0 && p.pm >= 0.0);
        }

        #[test]
        fn beat_average_vanishes(phase in -PI..PI, w in 1e3f64..1e9, sign in any::<bool>()) {
            let w = if sign { w } else { -w };
            let s = RoundSetting::new(Scheme::Frequency, phase, 0.0, w, 0.0, 0.0).unwrap();
            prop_assert!(time_averaged_correlation(&s).unwrap().abs() < 1e-10);
            let still = RoundSetting::new(Scheme::Frequency, phase, 0.3, w, -w, 0.0).unwrap();
            prop_assert!((time_averaged_correlation(&still).unwrap() - (phase + 0.3).cos()).abs() < 1e-15);
        }
    }
}
