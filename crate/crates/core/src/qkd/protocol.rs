use std::f64::consts::FRAC_PI_2;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sideband::{sideband_amplitude, SidebandVariant};
use super::{eve_timing_attack, outcome_probabilities, JitterModel, RoundSetting, Scheme};
use crate::report::write_csv_header;
use crate::units::TAU;
use crate::{Error, Result};

/// Default path difference of the interferometer arms, as a delay (s).
pub const DEFAULT_ARM_DELAY: f64 = 1.5e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisStrategy {
    /// Independent 50/50 choices on each side.
    Uniform,
    /// Both sides always pick the same basis.
    Matched,
}

impl std::str::FromStr for BasisStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(BasisStrategy::Uniform),
            "matched" => Ok(BasisStrategy::Matched),
            other => Err(Error::invalid(format!(
                "unknown basis strategy `{other}` (uniform, matched)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolConfig {
    pub rounds: usize,
    pub scheme: Scheme,
    pub basis_strategy: BasisStrategy,
    /// Frequency-basis shift `Ω` (rad/s).
    pub omega: f64,
    /// Precision of the disclosed detection times (s).
    pub delta_t_disclosure: f64,
    /// Arm path difference as a delay `Δl/c` (s).
    pub arm_delay: f64,
    pub seed: u64,
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::invalid("need at least one round"));
        }
        if !(self.omega.is_finite() && self.omega >= 0.0) {
            return Err(Error::invalid("omega must be >= 0"));
        }
        if self.scheme == Scheme::Frequency && self.omega == 0.0 {
            return Err(Error::invalid("the frequency scheme needs omega > 0"));
        }
        if !(self.delta_t_disclosure.is_finite() && self.delta_t_disclosure >= 0.0) {
            return Err(Error::invalid("disclosure precision must be >= 0"));
        }
        if !(self.arm_delay.is_finite() && self.arm_delay > 0.0) {
            return Err(Error::invalid("arm delay must be > 0"));
        }
        Ok(())
    }
}

/// `1/Ω < δt < Δl/c`: the disclosed times must hide the beat phase while
/// still resolving which arm the photons took.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimingConstraints {
    pub min_disclosure: f64,
    pub disclosure: f64,
    pub arm_delay: f64,
    pub satisfied: bool,
}

impl TimingConstraints {
    pub fn new(omega: f64, disclosure: f64, arm_delay: f64) -> Self {
        let min_disclosure = 1.0 / omega;
        TimingConstraints {
            min_disclosure,
            disclosure,
            arm_delay,
            satisfied: disclosure > min_disclosure && arm_delay > disclosure,
        }
    }
}

/// Statistics of one basis pairing. For the phase and frequency schemes
/// `mean` is the correlation `⟨E⟩`; for the sideband scheme it is the
/// click rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairingStat {
    pub basis_a: u8,
    pub basis_b: u8,
    pub rounds: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyReport {
    pub scheme: Scheme,
    pub rounds: usize,
    pub sifted: usize,
    pub errors: usize,
    pub qber: f64,
    pub mean_correlation: Vec<PairingStat>,
    /// Bits per sifted round available to a timing eavesdropper.
    pub eve_information: f64,
    pub eve_phase_knowledge: f64,
    pub eve_breach: bool,
    pub timing: Option<TimingConstraints>,
    pub warnings: Vec<String>,
}

/// One round of the protocol. Outcomes are bits: `0` for `+`, `1` for
/// `−`. In the sideband scheme `outcome_a` is Alice's bit and `outcome_b`
/// is `1` when Bob's detector fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RoundTrace {
    pub round: usize,
    pub basis_a: u8,
    pub basis_b: u8,
    pub outcome_a: u8,
    pub outcome_b: u8,
    pub sifted: bool,
}

pub fn run_protocol(config: &ProtocolConfig) -> Result<KeyReport> {
    run(config, None)
}

pub fn run_protocol_traced(config: &ProtocolConfig) -> Result<(KeyReport, Vec<RoundTrace>)> {
    let mut trace = Vec::with_capacity(config.rounds);
    let report = run(config, Some(&mut trace))?;
    Ok((report, trace))
}

fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

fn run(config: &ProtocolConfig, mut trace: Option<&mut Vec<RoundTrace>>) -> Result<KeyReport> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let period = if config.omega > 0.0 {
        TAU / config.omega
    } else {
        0.0
    };
    let mut sums = [[0.0f64; 2]; 2];
    let mut counts = [[0usize; 2]; 2];
    let (mut sifted, mut errors) = (0, 0);

    for round in 0..config.rounds {
        let a = u8::from(rng.random::<bool>());
        let b = match config.basis_strategy {
            BasisStrategy::Uniform => u8::from(rng.random::<bool>()),
            BasisStrategy::Matched => a,
        };
        let (outcome_a, outcome_b, kept, value) = match config.scheme {
            Scheme::Phase | Scheme::Frequency => {
                let setting = RoundSetting::for_bases(config.scheme, a, b, config.omega)?;
                let t = rng.random::<f64>() * period;
                let p = outcome_probabilities(&setting, t);
                let u = rng.random::<f64>();
                let (oa, ob) = if u < p.pp {
                    (0, 0)
                } else if u < p.pp + p.pm {
                    (0, 1)
                } else if u < p.pp + p.pm + p.mp {
                    (1, 0)
                } else {
                    (1, 1)
                };
                let e = if oa == ob { 1.0 } else { -1.0 };
                (oa, ob, a == b, e)
            }
            Scheme::Sideband => {
                // Alice's bit sets her phase; Bob's guess sets his. Only a
                // correct guess can fire the filtered detector.
                let phi_a = f64::from(a) * FRAC_PI_2;
                let phi_b = std::f64::consts::PI - f64::from(1 - b) * FRAC_PI_2;
                let p = sideband_amplitude(phi_a, phi_b, SidebandVariant::TwoPhoton)?;
                let click = rng.random::<f64>() < p;
                (a, u8::from(click), click, if click { 1.0 } else { 0.0 })
            }
        };
        sums[a as usize][b as usize] += value;
        counts[a as usize][b as usize] += 1;
        if kept {
            sifted += 1;
            let wrong = match config.scheme {
                Scheme::Sideband => a != b,
                _ => outcome_a != outcome_b,
            };
            errors += usize::from(wrong);
        }
        if let Some(trace) = trace.as_deref_mut() {
            trace.push(RoundTrace {
                round,
                basis_a: a,
                basis_b: b,
                outcome_a,
                outcome_b,
                sifted: kept,
            });
        }
    }

    let mut warnings = Vec::new();
    let mut mean_correlation = Vec::new();
    for a in 0..2u8 {
        for b in 0..2u8 {
            let n = counts[a as usize][b as usize];
            if n > 0 {
                mean_correlation.push(PairingStat {
                    basis_a: a,
                    basis_b: b,
                    rounds: n,
                    mean: sums[a as usize][b as usize] / n as f64,
                });
            }
        }
    }
    if sifted == 0 {
        warnings.push("no sifted rounds; QBER reported as 0".to_string());
    }
    let qber = if sifted > 0 {
        errors as f64 / sifted as f64
    } else {
        0.0
    };

    let (timing, knowledge) = if config.scheme == Scheme::Frequency {
        let timing =
            TimingConstraints::new(config.omega, config.delta_t_disclosure, config.arm_delay);
        if config.delta_t_disclosure <= timing.min_disclosure {
            warnings.push(format!(
                "disclosure precision {:e} s does not exceed 1/Ω = {:e} s",
                config.delta_t_disclosure, timing.min_disclosure
            ));
        }
        if config.arm_delay <= config.delta_t_disclosure {
            warnings.push(format!(
                "arm delay {:e} s does not exceed disclosure precision {:e} s",
                config.arm_delay, config.delta_t_disclosure
            ));
        }
        let eve = eve_timing_attack(
            config.omega,
            config.delta_t_disclosure,
            JitterModel::Uniform,
        )?;
        if eve.breach {
            warnings.push(format!(
                "disclosed times leave the beat phase {:.3} known",
                eve.phase_knowledge
            ));
        }
        (Some(timing), Some(eve))
    } else {
        (None, None)
    };
    let (eve_information, eve_phase_knowledge, eve_breach) = match knowledge {
        Some(k) => (
            1.0 - binary_entropy(0.5 * (1.0 + k.phase_knowledge)),
            k.phase_knowledge,
            k.breach,
        ),
        None => (0.0, 0.0, false),
    };

    Ok(KeyReport {
        scheme: config.scheme,
        rounds: config.rounds,
        sifted,
        errors,
        qber,
        mean_correlation,
        eve_information,
        eve_phase_knowledge,
        eve_breach,
        timing,
        warnings,
    })
}

pub fn write_trace_csv<W: Write>(out: &mut W, trace: &[RoundTrace]) -> io::Result<()> {
    write_csv_header(out, "round,basis_a,basis_b,outcome_a,outcome_b,sifted")?;
    for r in trace {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.round,
            r.basis_a,
            r.basis_b,
            r.outcome_a,
            r.outcome_b,
            u8::from(r.sifted)
        )?;
    }
    Ok(())
}
