//! Time ordering of the two detections in the rest frames of the moving
//! acoustic gratings, alignment budgets, and the visibility expected under
//! standard quantum mechanics versus multisimultaneity.

use std::f64::consts::SQRT_2;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::report::write_csv_header;
use crate::units::SPEED_OF_LIGHT;
use crate::{Error, Result};

/// Default width (m, air path) of the alignment blur around the dip.
pub const DEFAULT_SIGMA: f64 = 0.076e-3;
/// Default noise-subtracted visibility outside the dip.
pub const DEFAULT_V0: f64 = 0.97;
/// Air-path change per unit translation-stage travel.
pub const STAGE_TO_AIR_SLOPE: f64 = 1.1;

/// Largest arrival-time difference that keeps both frames in the same
/// ordering, and the matching path difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeWindow {
    /// `v·d/c²` (s).
    pub dt_max: f64,
    /// `v·d/c` (m).
    pub path_window: f64,
}

pub fn max_time_discrepancy(v: f64, d: f64) -> Result<TimeWindow> {
    if !(0.0..SPEED_OF_LIGHT).contains(&v) {
        return Err(Error::invalid("frame speed must lie in [0, c)"));
    }
    if !(d.is_finite() && d >= 0.0) {
        return Err(Error::invalid("separation must be >= 0"));
    }
    let dt_max = v * d / (SPEED_OF_LIGHT * SPEED_OF_LIGHT);
    Ok(TimeWindow {
        dt_max,
        path_window: SPEED_OF_LIGHT * dt_max,
    })
}

/// `d/c`, the window for plain space-like separation.
pub fn spacelike_window(d: f64) -> f64 {
    d / SPEED_OF_LIGHT
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveOrientation {
    Opposed,
    Reversed,
    AtRest,
}

impl std::str::FromStr for WaveOrientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "opposed" => Ok(WaveOrientation::Opposed),
            "reversed" => Ok(WaveOrientation::Reversed),
            "at-rest" | "at_rest" | "rest" => Ok(WaveOrientation::AtRest),
            other => Err(Error::invalid(format!(
                "unknown wave orientation `{other}` (opposed, reversed, at-rest)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeOrdering {
    BeforeAfter,
    BeforeBefore,
    AfterAfter,
}

impl TimeOrdering {
    pub fn as_str(&self) -> &'static str {
        match self {
            TimeOrdering::BeforeAfter => "before-after",
            TimeOrdering::BeforeBefore => "before-before",
            TimeOrdering::AfterAfter => "after-after",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimingConfig {
    frame_speed: f64,
    separation: f64,
    lab_time_diff: f64,
    orientation: WaveOrientation,
}

impl TimingConfig {
    pub fn new(
        frame_speed: f64,
        separation: f64,
        lab_time_diff: f64,
        orientation: WaveOrientation,
    ) -> Result<Self> {
        if !(separation.is_finite() && separation > 0.0) {
            return Err(Error::invalid("separation must be > 0"));
        }
        if !lab_time_diff.is_finite() {
            return Err(Error::invalid("time difference must be finite"));
        }
        max_time_discrepancy(frame_speed, separation)?;
        Ok(TimingConfig {
            frame_speed,
            separation,
            lab_time_diff,
            orientation,
        })
    }

    pub fn lab_time_diff(&self) -> f64 {
        self.lab_time_diff
    }

    pub fn with_lab_time_diff(self, lab_time_diff: f64) -> Result<Self> {
        TimingConfig::new(
            self.frame_speed,
            self.separation,
            lab_time_diff,
            self.orientation,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimingClass {
    pub ordering: TimeOrdering,
    /// Distance (s) of `|Δt|` from the window edge.
    pub margin: f64,
    pub dt_max: f64,
}

pub fn classify_timing(config: &TimingConfig) -> TimingClass {
    let dt_max = match config.orientation {
        WaveOrientation::AtRest => 0.0,
        _ => config.frame_speed * config.separation / (SPEED_OF_LIGHT * SPEED_OF_LIGHT),
    };
    let dt = config.lab_time_diff.abs();
    let (ordering, margin) = if dt >= dt_max {
        (TimeOrdering::BeforeAfter, dt - dt_max)
    } else if config.orientation == WaveOrientation::Opposed {
        (TimeOrdering::BeforeBefore, dt_max - dt)
    } else {
        (TimeOrdering::AfterAfter, dt_max - dt)
    };
    TimingClass {
        ordering,
        margin,
        dt_max,
    }
}

/// Wave-packet length contributions (m of air path).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpreadBudget {
    pub coherence_length: f64,
    pub dispersion_spread: f64,
    pub total: f64,
}

/// Packet spread from a filter of `filter_bandwidth_nm` at `center_nm` and
/// `fiber_length_m` of fiber.
///
/// The dispersion enters through its slope `dispersion_slope` (ps/(nm²·km))
/// around the zero-dispersion wavelength. A photon `wavelength_offset_nm`
/// away from half the pump wavelength pairs with a twin on the other side,
/// so the two see a differential dispersion of `slope·2·offset` over the
/// filter band.
pub fn spread_budget(
    filter_bandwidth_nm: f64,
    center_nm: f64,
    fiber_length_m: f64,
    dispersion_slope: f64,
    wavelength_offset_nm: f64,
) -> Result<SpreadBudget> {
    if !(filter_bandwidth_nm.is_finite() && filter_bandwidth_nm > 0.0) {
        return Err(Error::invalid("filter bandwidth must be > 0"));
    }
    if !(center_nm.is_finite() && center_nm > 0.0) {
        return Err(Error::invalid("center wavelength must be > 0"));
    }
    if !(fiber_length_m.is_finite() && fiber_length_m >= 0.0) {
        return Err(Error::invalid("fiber length must be >= 0"));
    }
    if !(dispersion_slope.is_finite() && wavelength_offset_nm.is_finite()) {
        return Err(Error::invalid("dispersion inputs must be finite"));
    }
    let coherence_length = center_nm * center_nm / filter_bandwidth_nm * 1e-9;
    let dispersion_ps_nm_km = dispersion_slope * 2.0 * wavelength_offset_nm;
    let spread_ps = (dispersion_ps_nm_km * fiber_length_m * 1e-3 * filter_bandwidth_nm).abs();
    let dispersion_spread = spread_ps * 1e-12 * SPEED_OF_LIGHT;
    Ok(SpreadBudget {
        coherence_length,
        dispersion_spread,
        total: coherence_length.hypot(dispersion_spread),
    })
}

fn check_curve_inputs(window: f64, sigma: f64, v0: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::invalid("sigma must be > 0"));
    }
    if !(window.is_finite() && window >= 0.0) {
        return Err(Error::invalid("window must be >= 0"));
    }
    if !(0.0..=1.0).contains(&v0) {
        return Err(Error::invalid("v0 must lie in [0, 1]"));
    }
    Ok(())
}

/// Visibility under multisimultaneity: zero for `|x| < window`, `v0`
/// outside, blurred by a unit-mass Gaussian of standard deviation `sigma`.
pub fn multisim_visibility(x: f64, window: f64, sigma: f64, v0: f64) -> Result<f64> {
    check_curve_inputs(window, sigma, v0)?;
    // erfc form keeps full relative precision deep inside the dip
    let s = SQRT_2 * sigma;
    Ok(v0 * 0.5 * (erfc((window - x) / s) + erfc((window + x) / s)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisibilityCurve {
    pub path_offsets: Vec<f64>,
    pub qm_visibility: f64,
    pub multisim_visibility: Vec<f64>,
}

pub fn predict_curves(
    offsets: &[f64],
    window: f64,
    sigma: f64,
    v0: f64,
) -> Result<VisibilityCurve> {
    if offsets.is_empty() {
        return Err(Error::invalid("no path offsets"));
    }
    let multisim = offsets
        .iter()
        .map(|&x| multisim_visibility(x, window, sigma, v0))
        .collect::<Result<_>>()?;
    Ok(VisibilityCurve {
        path_offsets: offsets.to_vec(),
        qm_visibility: v0,
        multisim_visibility: multisim,
    })
}

pub fn write_curve_csv<W: Write>(out: &mut W, curve: &VisibilityCurve) -> io::Result<()> {
    write_csv_header(out, "x_m,v_qm,v_multisim")?;
    for (x, v) in curve.path_offsets.iter().zip(&curve.multisim_visibility) {
        writeln!(out, "{x:.9e},{:.12e},{v:.12e}", curve.qm_visibility)?;
    }
    Ok(())
}

/// Map translation-stage positions to air-equivalent path offsets.
pub fn elongation_calibration(stage_positions: &[f64], slope: f64) -> Result<Vec<f64>> {
    if !(slope.is_finite() && slope > 0.0) {
        return Err(Error::invalid("calibration slope must be > 0"));
    }
    Ok(stage_positions.iter().map(|p| p * slope).collect())
}

/// Evenly spaced stage positions `start, start+step, …` up to `stop`.
pub fn stage_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && stop >= start) {
        return Err(Error::invalid("need step > 0 and stop >= start"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}
