//! Phase encoding on frequency sidebands.
//!
//! A phase modulator maps `|ω⟩ → |ω⟩ + e^{iφ}|ω+Ω⟩`. The map is not
//! unitary, so amplitudes are carried unnormalized as a ledger of raw
//! terms, and a detection probability is `|Σ amplitude|²/n²` over the `n`
//! terms that land on the filtered mode.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SidebandVariant {
    /// One photon modulated by Alice, then by Bob.
    SinglePhoton,
    /// Pair source `|ω+Ω⟩|ω+Ω⟩ + |ω⟩|ω⟩`, one modulator on each side.
    TwoPhoton,
    /// Single photon through the three-sideband map
    /// `|ω⟩ → |ω⟩ + e^{iφ}|ω+Ω⟩ + e^{−iφ}|ω−Ω⟩`.
    Bb84,
}

impl std::str::FromStr for SidebandVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single-photon" => Ok(SidebandVariant::SinglePhoton),
            "two-photon" => Ok(SidebandVariant::TwoPhoton),
            "bb84" => Ok(SidebandVariant::Bb84),
            other => Err(Error::invalid(format!(
                "unknown sideband variant `{other}`"
            ))),
        }
    }
}

/// Lattice position: multiples of `Ω` above `ω` for each photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Mode {
    Single(i32),
    Pair(i32, i32),
}

/// Unmerged amplitude ledger after both modulations.
#[derive(Debug, Clone, PartialEq)]
pub struct SidebandState {
    pub raw: Vec<(Mode, Complex64)>,
    /// Mode passed by the filters.
    pub output: Mode,
}

impl SidebandState {
    /// Terms merged by mode, with the number of raw paths behind each.
    pub fn merged(&self) -> BTreeMap<Mode, (Complex64, usize)> {
        let mut out: BTreeMap<Mode, (Complex64, usize)> = BTreeMap::new();
        for &(mode, amp) in &self.raw {
            let e = out.entry(mode).or_insert((Complex64::new(0.0, 0.0), 0));
            e.0 += amp;
            e.1 += 1;
        }
        out
    }

    pub fn amplitude(&self, mode: Mode) -> Complex64 {
        self.raw
            .iter()
            .filter(|(m, _)| *m == mode)
            .map(|(_, a)| a)
            .sum()
    }

    /// Normalized detection probability at `mode`.
    pub fn probability(&self, mode: Mode) -> f64 {
        let paths = self.raw.iter().filter(|(m, _)| *m == mode).count();
        if paths == 0 {
            return 0.0;
        }
        self.amplitude(mode).norm_sqr() / (paths * paths) as f64
    }

    pub fn filtered_amplitude(&self) -> Complex64 {
        self.amplitude(self.output)
    }

    pub fn detection_probability(&self) -> f64 {
        self.probability(self.output)
    }
}

fn modulator(phi: f64, three_term: bool) -> Vec<(i32, Complex64)> {
    let mut m = vec![
        (0, Complex64::new(1.0, 0.0)),
        (1, Complex64::from_polar(1.0, phi)),
    ];
    if three_term {
        m.push((-1, Complex64::from_polar(1.0, -phi)));
    }
    m
}

/// Apply `map` to photon `slot` (0 or 1) of every term.
fn apply(
    terms: &[(Mode, Complex64)],
    slot: usize,
    map: &[(i32, Complex64)],
) -> Vec<(Mode, Complex64)> {
    let mut out = Vec::with_capacity(terms.len() * map.len());
    for &(mode, amp) in terms {
        for &(shift, factor) in map {
            let moved = match (mode, slot) {
                (Mode::Single(k), _) => Mode::Single(k + shift),
                (Mode::Pair(a, b), 0) => Mode::Pair(a + shift, b),
                (Mode::Pair(a, b), _) => Mode::Pair(a, b + shift),
            };
            out.push((moved, amp * factor));
        }
    }
    out
}

/// Ledger for Alice's modulation `φ_a` followed by Bob's `φ_b`.
pub fn sideband_state_evolution(phi_a: f64, phi_b: f64, variant: SidebandVariant) -> SidebandState {
    sideband_state_with_output(phi_a, phi_b, variant, None)
}

/// As [`sideband_state_evolution`] with an explicit filtered mode. The
/// default is `k = 1` (`(1, 1)` for pairs).
pub fn sideband_state_with_output(
    phi_a: f64,
    phi_b: f64,
    variant: SidebandVariant,
    output: Option<Mode>,
) -> SidebandState {
    let one = Complex64::new(1.0, 0.0);
    let (raw, default) = match variant {
        SidebandVariant::SinglePhoton | SidebandVariant::Bb84 => {
            let three = variant == SidebandVariant::Bb84;
            let start = [(Mode::Single(0), one)];
            let after_a = apply(&start, 0, &modulator(phi_a, three));
            (
                apply(&after_a, 0, &modulator(phi_b, three)),
                Mode::Single(1),
            )
        }
        SidebandVariant::TwoPhoton => {
            let start = [(Mode::Pair(1, 1), one), (Mode::Pair(0, 0), one)];
            let after_a = apply(&start, 0, &modulator(phi_a, false));
            (
                apply(&after_a, 1, &modulator(phi_b, false)),
                Mode::Pair(1, 1),
            )
        }
    };
    SidebandState {
        raw,
        output: output.unwrap_or(default),
    }
}

/// Closed-form probability of a click behind the filter.
pub fn sideband_amplitude(phi_a: f64, phi_b: f64, variant: SidebandVariant) -> Result<f64> {
    if !(phi_a.is_finite() && phi_b.is_finite()) {
        return Err(Error::invalid("phases must be finite"));
    }
    Ok(match variant {
        SidebandVariant::SinglePhoton | SidebandVariant::Bb84 => {
            0.5 * (1.0 + (phi_a - phi_b).cos())
        }
        SidebandVariant::TwoPhoton => 0.5 * (1.0 + (phi_a + phi_b).cos()),
    })
}
