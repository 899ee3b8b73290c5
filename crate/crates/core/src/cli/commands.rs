use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use serde::Serialize;

use super::{json_bytes, write_atomic, CliError, Format, RunConfig};
use crate::aom::{self, AomSpec, ElasticMaterial};
use crate::beats::{
    fit_beats_with, generate_stream, histogram_interarrivals, read_histogram_csv,
    write_histogram_csv, write_stream, FitOptions, Histogram, ProcessParams,
};
use crate::coincidence::{CoincidenceModel, InterferometerArm, SourceSpectrum};
use crate::eraser::{log_grid, tradeoff_table, write_tradeoff_csv};
use crate::fringe::{
    fringe_scan as simulate_scan, uniform_phase_grid, visibility_from_counts, write_scan_csv,
};
use crate::qkd::{
    run_protocol_traced, write_trace_csv, BasisStrategy, ProtocolConfig, Scheme, DEFAULT_ARM_DELAY,
};
use crate::relativity::{
    classify_timing, elongation_calibration, max_time_discrepancy, predict_curves,
    spacelike_window, spread_budget, stage_grid, write_curve_csv, TimingConfig, WaveOrientation,
    DEFAULT_SIGMA, DEFAULT_V0, STAGE_TO_AIR_SLOPE,
};
use crate::units::{hz_to_rad, rad_to_hz, SPEED_OF_LIGHT};

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write(&mut buf).map_err(|e| CliError::Usage(format!("cannot format CSV: {e}")))?;
    Ok(buf)
}

fn parse_choice<T: std::str::FromStr<Err = crate::Error>>(s: &str) -> Result<T, CliError> {
    Ok(s.parse::<T>()?)
}

#[derive(Serialize)]
struct FringeReport<'a> {
    chi: f64,
    omega_sum_hz: f64,
    global_phase_rad: f64,
    visibility: Option<crate::fringe::VisibilityEstimate>,
    points: &'a [crate::fringe::FringePoint],
}

pub(super) fn fringe_scan(mut cfg: RunConfig) -> Result<(), CliError> {
    let p = &mut cfg.params;
    let pair_rate = p.take_f64("pair_rate_per_s")?;
    let integration_time = p.take_f64("integration_time_s")?;
    let arm_a = InterferometerArm::new(
        p.take_f64_or("delta_l_a_m", 0.0)?,
        p.take_f64_or("phase_a_rad", 0.0)?,
        hz_to_rad(p.take_f64_or("shift_a_hz", 0.0)?),
    )?;
    let arm_b = InterferometerArm::new(
        p.take_f64_or("delta_l_b_m", 0.0)?,
        p.take_f64_or("phase_b_rad", 0.0)?,
        hz_to_rad(p.take_f64_or("shift_b_hz", 0.0)?),
    )?;
    let source = SourceSpectrum::new(
        hz_to_rad(p.take_f64_or("pump_freq_hz", SPEED_OF_LIGHT / 657e-9)?),
        hz_to_rad(p.take_f64_or("pump_bandwidth_hz", 1e6)?),
        hz_to_rad(p.take_f64_or("photon_bandwidth_hz", 1.9e12)?),
        pair_rate,
    )?;
    let accidental = p.take_f64_or("accidental_rate_per_s", 0.0)?;
    let chi_override = p.take_f64_opt("chi")?;
    let points = p.take_usize_or("points", 16)?;
    std::mem::take(p).finish()?;

    let model = CoincidenceModel::new(arm_a, arm_b, source, accidental)?;
    let chi = chi_override.unwrap_or_else(|| model.visibility_factor());
    let scan = simulate_scan(
        &model,
        chi,
        &uniform_phase_grid(points),
        integration_time,
        cfg.seed,
    )?;
    let fmt = cfg.format(Format::Csv, &[Format::Csv, Format::Json], "fringe-scan")?;
    let bytes = match fmt {
        Format::Csv => csv_bytes(|b| write_scan_csv(b, &scan))?,
        Format::Json => json_bytes(&FringeReport {
            chi,
            omega_sum_hz: rad_to_hz(model.omega_sum()),
            global_phase_rad: model.global_phase(),
            visibility: visibility_from_counts(&scan).ok(),
            points: &scan,
        })?,
    };
    cfg.emit(&bytes)
}

pub(super) fn beat_histogram(
    mut cfg: RunConfig,
    stream_out: Option<&Path>,
) -> Result<(), CliError> {
    let p = &mut cfg.params;
    let mean_interval = p.take_f64("mean_interval_s")?;
    let visibility = p.take_f64("visibility")?;
    let beat_freq = hz_to_rad(p.take_f64("beat_freq_hz")?);
    let duration = p.take_f64("duration_s")?;
    let dead_time = p.take_f64_or("dead_time_s", 0.0)?;
    let bin_width = p.take_f64_or("bin_width_s", 4e-6)?;
    let lo = p.take_f64_or("hist_lo_s", 0.0)?;
    let hi = p.take_f64_or("hist_hi_s", 0.1)?;
    std::mem::take(p).finish()?;

    let params = ProcessParams::new(
        mean_interval,
        visibility,
        beat_freq,
        dead_time,
        duration,
        cfg.seed,
    )?;
    for w in params.warnings() {
        eprintln!("warning: {w}");
    }
    let fmt = cfg.format(Format::Csv, &[Format::Csv, Format::Json], "beat-histogram")?;
    let stream = generate_stream(&params)?;
    if let Some(path) = stream_out {
        let bytes = csv_bytes(|b| write_stream(b, &stream))?;
        write_atomic(path, &bytes)?;
    }
    let hist = histogram_interarrivals(&stream, bin_width, lo, hi)?;
    let bytes = match fmt {
        Format::Csv => csv_bytes(|b| write_histogram_csv(b, &hist))?,
        Format::Json => {
            #[derive(Serialize)]
            struct Report<'a> {
                events: usize,
                #[serde(flatten)]
                histogram: &'a Histogram,
            }
            json_bytes(&Report {
                events: stream.len(),
                histogram: &hist,
            })?
        }
    };
    cfg.emit(&bytes)
}

#[derive(Serialize)]
struct FitReport {
    v_sq_half: f64,
    v_sq_half_err: f64,
    freq_hz: f64,
    freq_err_hz: f64,
    tau_s: f64,
    tau_err_s: f64,
    amplitude: f64,
    chi2_reduced: f64,
    bins_used: usize,
    iterations: usize,
    flag: crate::beats::FitFlag,
}

pub(super) fn beat_fit(mut cfg: RunConfig, input: &Path) -> Result<(), CliError> {
    let p = &mut cfg.params;
    let defaults = FitOptions::default();
    let opts = FitOptions {
        min_dt: p.take_f64_or("min_dt_s", defaults.min_dt)?,
        max_iterations: p.take_usize_or("max_iterations", defaults.max_iterations)?,
    };
    std::mem::take(p).finish()?;

    let file = File::open(input).map_err(|e| CliError::io(input, e))?;
    let hist = read_histogram_csv(BufReader::new(file))?;
    let fit = fit_beats_with(&hist, &opts)?;
    let report = FitReport {
        v_sq_half: fit.visibility_sq_half,
        v_sq_half_err: fit.visibility_sq_half_err,
        freq_hz: fit.freq_hz(),
        freq_err_hz: fit.freq_err_hz(),
        tau_s: fit.mean_interval,
        tau_err_s: fit.mean_interval_err,
        amplitude: fit.amplitude,
        chi2_reduced: fit.chi2_reduced,
        bins_used: fit.bins_used,
        iterations: fit.iterations,
        flag: fit.flag,
    };
    let fmt = cfg.format(Format::Json, &[Format::Json, Format::Csv], "beat-fit")?;
    let bytes = match fmt {
        Format::Json => json_bytes(&report)?,
        Format::Csv => csv_bytes(|b| {
            use std::io::Write;
            crate::report::write_csv_header(
                b,
                "v_sq_half,freq_hz,freq_err_hz,tau_s,chi2_reduced,flag",
            )?;
            let flag = serde_json::to_value(report.flag).map_err(std::io::Error::other)?;
            writeln!(
                b,
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}",
                report.v_sq_half,
                report.freq_hz,
                report.freq_err_hz,
                report.tau_s,
                report.chi2_reduced,
                flag.as_str().unwrap_or_default()
            )
        })?,
    };
    cfg.emit(&bytes)
}

pub(super) fn eraser_table(mut cfg: RunConfig) -> Result<(), CliError> {
    let p = &mut cfg.params;
    let lo = p.take_f64("omega_dt_min")?;
    let hi = p.take_f64("omega_dt_max")?;
    let points = p.take_usize_or("points", 200)?;
    std::mem::take(p).finish()?;
    if !(lo > 0.0 && hi >= lo) || points == 0 {
        return Err(CliError::Usage(
            "need 0 < omega_dt_min <= omega_dt_max and points > 0".into(),
        ));
    }
    let rows = tradeoff_table(&log_grid(lo, hi, points))?;
    let fmt = cfg.format(Format::Csv, &[Format::Csv, Format::Json], "eraser-table")?;
    let bytes = match fmt {
        Format::Csv => csv_bytes(|b| write_tradeoff_csv(b, &rows))?,
        Format::Json => {
            #[derive(Serialize)]
            struct Table<'a> {
                rows: &'a [crate::eraser::TradeoffRow],
            }
            json_bytes(&Table { rows: &rows })?
        }
    };
    cfg.emit(&bytes)
}

#[derive(Serialize)]
struct AomReport {
    acoustic_freq_hz: f64,
    acoustic_wavelength_m: f64,
    sound_speed_m_per_s: f64,
    material_sound_speed_m_per_s: Option<f64>,
    bragg_angle_rad: f64,
    bragg_angle_deg: f64,
    deflection_internal_deg: f64,
    deflection_external_deg: f64,
    doppler_shift_hz: f64,
    double_pass_shift_hz: f64,
    reflectivity: Option<aom::Reflectivity>,
    sync_freq_hz: f64,
    alpha_rad_per_m: f64,
    sync_phase_rad: f64,
}

pub(super) fn aom_calc(mut cfg: RunConfig) -> Result<(), CliError> {
    let p = &mut cfg.params;
    let acoustic_freq = p.take_f64("acoustic_freq_hz")?;
    let wavelength = p.take_f64("wavelength_m")?;
    let n = p.take_f64("refractive_index")?;
    let length = p.take_f64_or("interaction_length_m", 1e-2)?;
    let merit = p.take_f64_opt("figure_of_merit")?;
    let power = p.take_f64_or("acoustic_power_w", 0.0)?;
    let explicit_speed = p.take_f64_opt("sound_speed_m_per_s")?;
    let material = match p.take_f64_opt("young_modulus_pa")? {
        Some(e) => Some(ElasticMaterial::new(
            e,
            p.take_f64("poisson_ratio")?,
            p.take_f64("density_kg_per_m3")?,
        )?),
        None => None,
    };
    let material_speed = material.as_ref().map(aom::sound_speed);
    let speed = explicit_speed
        .or(material_speed)
        .ok_or_else(|| crate::config::ConfigError::Missing("sound_speed_m_per_s".into()))?;
    let sync_freq = p.take_f64_or("sync_freq_hz", 2.0 * acoustic_freq)?;
    let sync_speed = p.take_f64_or("sync_speed_fraction_c", 0.6)? * SPEED_OF_LIGHT;
    let cable = p.take_f64_or("cable_delta_m", 0.0)?;
    std::mem::take(p).finish()?;

    let spec = AomSpec::new(
        acoustic_freq,
        speed,
        wavelength,
        n,
        length,
        merit.unwrap_or(0.0),
        power,
    )?;
    let theta = aom::bragg_angle(&spec)?;
    let deflection = aom::deflection(&spec)?;
    let reflectivity = match merit {
        Some(_) => Some(aom::reflectivity(&spec, theta)?),
        None => None,
    };
    let report = AomReport {
        acoustic_freq_hz: acoustic_freq,
        acoustic_wavelength_m: spec.acoustic_wavelength(),
        sound_speed_m_per_s: speed,
        material_sound_speed_m_per_s: material_speed,
        bragg_angle_rad: theta,
        bragg_angle_deg: theta.to_degrees(),
        deflection_internal_deg: deflection.internal.to_degrees(),
        deflection_external_deg: deflection.external.to_degrees(),
        doppler_shift_hz: aom::doppler_shift(n, speed, theta, spec.optical_freq()),
        double_pass_shift_hz: spec.double_pass_shift(),
        reflectivity,
        sync_freq_hz: sync_freq,
        alpha_rad_per_m: aom::sync_phase_per_meter(sync_freq, sync_speed)?,
        sync_phase_rad: aom::sync_phase(sync_freq, sync_speed, cable)?,
    };
    cfg.format(Format::Json, &[Format::Json], "aom-calc")?;
    cfg.emit(&json_bytes(&report)?)
}

pub(super) fn relativity_scan(mut cfg: RunConfig) -> Result<(), CliError> {
    let p = &mut cfg.params;
    let speed = p.take_f64("frame_speed_m_per_s")?;
    let separation = p.take_f64("separation_m")?;
    let sigma = p.take_f64_or("sigma_m", DEFAULT_SIGMA)?;
    let v0 = p.take_f64_or("v0", DEFAULT_V0)?;
    let start = p.take_f64_or("stage_min_m", -1.8e-3)?;
    let stop = p.take_f64_or("stage_max_m", 1.8e-3)?;
    let step = p.take_f64_or("stage_step_m", 0.1e-3)?;
    let slope = p.take_f64_or("stage_to_air", STAGE_TO_AIR_SLOPE)?;
    std::mem::take(p).finish()?;

    let window = max_time_discrepancy(speed, separation)?.path_window;
    let offsets = elongation_calibration(&stage_grid(start, stop, step)?, slope)?;
    let curve = predict_curves(&offsets, window, sigma, v0)?;
    let fmt = cfg.format(Format::Csv, &[Format::Csv, Format::Json], "relativity-scan")?;
    let bytes = match fmt {
        Format::Csv => csv_bytes(|b| write_curve_csv(b, &curve))?,
        Format::Json => {
            #[derive(Serialize)]
            struct Scan<'a> {
                window_m: f64,
                sigma_m: f64,
                #[serde(flatten)]
                curve: &'a crate::relativity::VisibilityCurve,
            }
            json_bytes(&Scan {
                window_m: window,
                sigma_m: sigma,
                curve: &curve,
            })?
        }
    };
    cfg.emit(&bytes)
}

#[derive(Serialize)]
struct TimingReport {
    ordering: &'static str,
    margin_s: f64,
    margin_ps: f64,
    dt_max_s: f64,
    path_window_m: f64,
    spacelike_window_s: f64,
    spread_budget: Option<crate::relativity::SpreadBudget>,
}

pub(super) fn timing_check(mut cfg: RunConfig) -> Result<(), CliError> {
    let p = &mut cfg.params;
    let speed = p.take_f64("frame_speed_m_per_s")?;
    let separation = p.take_f64("separation_m")?;
    let dt = p.take_f64_or("lab_time_diff_s", 0.0)?;
    let orientation: WaveOrientation = parse_choice(&p.take_string_or("orientation", "opposed"))?;
    let budget = match p.take_f64_opt("filter_bandwidth_nm")? {
        Some(bw) => Some(spread_budget(
            bw,
            p.take_f64_or("center_nm", 1314.0)?,
            p.take_f64_or("fiber_length_m", 100.0)?,
            p.take_f64_or("dispersion_slope_ps_per_nm2_km", 0.09)?,
            p.take_f64_or("wavelength_offset_nm", 1.0)?,
        )?),
        None => None,
    };
    std::mem::take(p).finish()?;

    let config = TimingConfig::new(speed, separation, dt, orientation)?;
    let class = classify_timing(&config);
    let window = max_time_discrepancy(speed, separation)?;
    let report = TimingReport {
        ordering: class.ordering.as_str(),
        margin_s: class.margin,
        margin_ps: class.margin * 1e12,
        dt_max_s: class.dt_max,
        path_window_m: window.path_window,
        spacelike_window_s: spacelike_window(separation),
        spread_budget: budget,
    };
    cfg.format(Format::Json, &[Format::Json], "timing-check")?;
    cfg.emit(&json_bytes(&report)?)
}

pub(super) fn qkd_sim(
    mut cfg: RunConfig,
    scheme: &str,
    rounds: usize,
    trace_out: Option<&Path>,
) -> Result<(), CliError> {
    let scheme: Scheme = parse_choice(scheme)?;
    let p = &mut cfg.params;
    let omega = hz_to_rad(p.take_f64_or("omega_hz", 4e8)?);
    let disclosure = p.take_f64_or("disclosure_s", 1e-9)?;
    let arm_delay = p.take_f64_or("arm_delay_s", DEFAULT_ARM_DELAY)?;
    let strategy: BasisStrategy = parse_choice(&p.take_string_or("basis_strategy", "uniform"))?;
    std::mem::take(p).finish()?;

    let config = ProtocolConfig {
        rounds,
        scheme,
        basis_strategy: strategy,
        omega,
        delta_t_disclosure: disclosure,
        arm_delay,
        seed: cfg.seed,
    };
    let (report, trace) = run_protocol_traced(&config)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(path) = trace_out {
        write_atomic(path, &csv_bytes(|b| write_trace_csv(b, &trace))?)?;
    }
    cfg.format(Format::Json, &[Format::Json], "qkd-sim")?;
    cfg.emit(&json_bytes(&report)?)
}
