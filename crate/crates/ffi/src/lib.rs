//! C ABI over the `franson` toolkit.
//!
//! Every function returns a [`FransonStatus`]; results come back through
//! out-pointers. On failure, [`franson_last_error`] returns a message for the
//! calling thread. Handles are created by `*_new`/`*_generate` functions and
//! released with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use franson::beats::{self, FitFlag, Histogram, ProcessParams};
use franson::coincidence::{self, CoincidenceModel, InterferometerArm, SourceSpectrum};
use franson::qkd::{self, RoundSetting, Scheme};
use franson::{aom, eraser, relativity, Error};

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FransonStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DomainError = 3,
    NumericalFailure = 4,
    Panic = 5,
}

impl From<&Error> for FransonStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidInput(_) => FransonStatus::InvalidArgument,
            Error::Domain(_) => FransonStatus::DomainError,
            Error::NonConvergence { .. } | Error::Numerical(_) => FransonStatus::NumericalFailure,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

struct Failure(FransonStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure((&e).into(), e.to_string())
    }
}

fn null(name: &str) -> Failure {
    Failure(FransonStatus::NullPointer, format!("{name} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FransonStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            FransonStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            FransonStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be null or valid for writes of `T`.
unsafe fn write_out<T>(p: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    unsafe { p.write(value) };
    Ok(())
}

/// # Safety
/// `p` must be null or point to a live `T`.
unsafe fn borrow<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    unsafe { p.as_ref() }.ok_or_else(|| null(name))
}

/// Message describing the most recent failure on this thread, or null.
/// The pointer stays valid until the next call into the library from the
/// same thread.
#[no_mangle]
pub extern "C" fn franson_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// One unbalanced interferometer.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FransonArm {
    /// Path difference in metres.
    pub delta_l: f64,
    /// Static phase in radians.
    pub phase: f64,
    /// Angular frequency shift of the long arm (rad/s).
    pub freq_shift: f64,
}

/// Pump and down-converted photon spectrum. Frequencies are angular.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FransonSource {
    pub pump_freq: f64,
    pub pump_bandwidth: f64,
    pub photon_bandwidth: f64,
    pub pair_rate: f64,
}

/// Opaque two-interferometer coincidence model.
pub struct FransonModel {
    inner: CoincidenceModel,
}

/// Build a coincidence model.
///
/// # Safety
/// Pointer arguments must be null or valid; `out` receives a handle to free
/// with [`franson_model_free`].
#[no_mangle]
pub unsafe extern "C" fn franson_model_new(
    arm_a: *const FransonArm,
    arm_b: *const FransonArm,
    source: *const FransonSource,
    accidental_rate: f64,
    out: *mut *mut FransonModel,
) -> FransonStatus {
    guard(|| {
        let (a, b, s) = unsafe {
            (
                borrow(arm_a, "arm_a")?,
                borrow(arm_b, "arm_b")?,
                borrow(source, "source")?,
            )
        };
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = CoincidenceModel::new(
            InterferometerArm::new(a.delta_l, a.phase, a.freq_shift)?,
            InterferometerArm::new(b.delta_l, b.phase, b.freq_shift)?,
            SourceSpectrum::new(
                s.pump_freq,
                s.pump_bandwidth,
                s.photon_bandwidth,
                s.pair_rate,
            )?,
            accidental_rate,
        )?;
        unsafe { write_out(out, Box::into_raw(Box::new(FransonModel { inner })), "out") }
    })
}

/// # Safety
/// `model` must be null or a handle from [`franson_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn franson_model_free(model: *mut FransonModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Coincidence probability at lab time `t` for visibility factor `chi`.
///
/// # Safety
/// `model` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn franson_model_probability(
    model: *const FransonModel,
    chi: f64,
    t: f64,
    out: *mut f64,
) -> FransonStatus {
    guard(|| {
        let m = unsafe { borrow(model, "model")? };
        let p = coincidence::coincidence_probability(&m.inner, chi, t)?;
        unsafe { write_out(out, p, "out") }
    })
}

/// Bandwidth-limited visibility factor of the model geometry.
///
/// # Safety
/// `model` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn franson_model_visibility_factor(
    model: *const FransonModel,
    out: *mut f64,
) -> FransonStatus {
    guard(|| {
        let m = unsafe { borrow(model, "model")? };
        unsafe { write_out(out, m.inner.visibility_factor(), "out") }
    })
}

/// Sum of the two arm shifts in rad/s.
///
/// # Safety
/// `model` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn franson_model_omega_sum(
    model: *const FransonModel,
    out: *mut f64,
) -> FransonStatus {
    guard(|| {
        let m = unsafe { borrow(model, "model")? };
        unsafe { write_out(out, m.inner.omega_sum(), "out") }
    })
}

/// Parameters of a simulated coincidence stream.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FransonProcessParams {
    pub mean_interval: f64,
    pub visibility: f64,
    /// Angular beat frequency (rad/s).
    pub beat_freq: f64,
    pub dead_time: f64,
    pub duration: f64,
    pub seed: u64,
}

impl FransonProcessParams {
    fn to_core(self) -> Result<ProcessParams, Error> {
        ProcessParams::new(
            self.mean_interval,
            self.visibility,
            self.beat_freq,
            self.dead_time,
            self.duration,
            self.seed,
        )
    }
}

/// Opaque list of coincidence timestamps.
pub struct FransonStream {
    times: Vec<f64>,
}

/// Simulate a coincidence stream.
///
/// # Safety
/// `params` must be valid; `out` receives a handle to free with
/// [`franson_stream_free`].
#[no_mangle]
pub unsafe extern "C" fn franson_stream_generate(
    params: *const FransonProcessParams,
    out: *mut *mut FransonStream,
) -> FransonStatus {
    guard(|| {
        let p = unsafe { borrow(params, "params")? }.to_core()?;
        if out.is_null() {
            return Err(null("out"));
        }
        let times = beats::generate_stream(&p)?;
        unsafe { write_out(out, Box::into_raw(Box::new(FransonStream { times })), "out") }
    })
}

/// Number of timestamps in the stream. Returns 0 for a null handle.
///
/// # Safety
/// `stream` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn franson_stream_len(stream: *const FransonStream) -> usize {
    unsafe { stream.as_ref() }.map_or(0, |s| s.times.len())
}

/// Borrowed pointer to the timestamps, valid until the stream is freed.
///
/// # Safety
/// `stream` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn franson_stream_data(stream: *const FransonStream) -> *const f64 {
    unsafe { stream.as_ref() }.map_or(ptr::null(), |s| s.times.as_ptr())
}

/// # Safety
/// `stream` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn franson_stream_free(stream: *mut FransonStream) {
    if !stream.is_null() {
        drop(unsafe { Box::from_raw(stream) });
    }
}

/// Opaque histogram of gaps between successive timestamps.
pub struct FransonHistogram {
    inner: Histogram,
}

fn new_histogram(
    times: &[f64],
    bin_width: f64,
    lo: f64,
    hi: f64,
    out: *mut *mut FransonHistogram,
) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    let inner = beats::histogram_interarrivals(times, bin_width, lo, hi)?;
    unsafe {
        write_out(
            out,
            Box::into_raw(Box::new(FransonHistogram { inner })),
            "out",
        )
    }
}

/// Histogram the gaps of a stream over `[lo, hi)`.
///
/// # Safety
/// `stream` must be a live handle; `out` receives a handle to free with
/// [`franson_histogram_free`].
#[no_mangle]
pub unsafe extern "C" fn franson_histogram_from_stream(
    stream: *const FransonStream,
    bin_width: f64,
    lo: f64,
    hi: f64,
    out: *mut *mut FransonHistogram,
) -> FransonStatus {
    guard(|| {
        let s = unsafe { borrow(stream, "stream")? };
        new_histogram(&s.times, bin_width, lo, hi, out)
    })
}

/// Histogram the gaps of `len` strictly increasing timestamps.
///
/// # Safety
/// `times` must be valid for reads of `len` doubles (or null when `len` is 0).
#[no_mangle]
pub unsafe extern "C" fn franson_histogram_from_times(
    times: *const f64,
    len: usize,
    bin_width: f64,
    lo: f64,
    hi: f64,
    out: *mut *mut FransonHistogram,
) -> FransonStatus {
    guard(|| {
        let slice = if len == 0 {
            &[][..]
        } else if times.is_null() {
            return Err(null("times"));
        } else {
            unsafe { std::slice::from_raw_parts(times, len) }
        };
        new_histogram(slice, bin_width, lo, hi, out)
    })
}

/// Number of bins. Returns 0 for a null handle.
///
/// # Safety
/// `hist` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn franson_histogram_bins(hist: *const FransonHistogram) -> usize {
    unsafe { hist.as_ref() }.map_or(0, |h| h.inner.n_bins())
}

/// Copy up to `len` bin counts into `counts`.
///
/// # Safety
/// `hist` must be a live handle and `counts` valid for writes of `len` values.
#[no_mangle]
pub unsafe extern "C" fn franson_histogram_counts(
    hist: *const FransonHistogram,
    counts: *mut u64,
    len: usize,
) -> FransonStatus {
    guard(|| {
        let h = unsafe { borrow(hist, "hist")? };
        if len > 0 && counts.is_null() {
            return Err(null("counts"));
        }
        let n = len.min(h.inner.counts.len());
        unsafe { ptr::copy_nonoverlapping(h.inner.counts.as_ptr(), counts, n) };
        Ok(())
    })
}

/// # Safety
/// `hist` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn franson_histogram_free(hist: *mut FransonHistogram) {
    if !hist.is_null() {
        drop(unsafe { Box::from_raw(hist) });
    }
}

/// Fitted beat parameters. Frequencies are angular.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FransonBeatFit {
    pub amplitude: f64,
    pub amplitude_err: f64,
    pub visibility_sq_half: f64,
    pub visibility_sq_half_err: f64,
    pub beat_freq: f64,
    pub beat_freq_err: f64,
    pub mean_interval: f64,
    pub mean_interval_err: f64,
    pub chi2_reduced: f64,
    pub bins_used: usize,
    pub iterations: usize,
    /// 1 when no beat rose above the noise; the oscillation terms are then 0.
    pub no_beat_detected: u8,
}

/// Fit the beat model to a histogram.
///
/// # Safety
/// `hist` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn franson_histogram_fit(
    hist: *const FransonHistogram,
    out: *mut FransonBeatFit,
) -> FransonStatus {
    guard(|| {
        let h = unsafe { borrow(hist, "hist")? };
        let f = beats::fit_beats(&h.inner)?;
        let fit = FransonBeatFit {
            amplitude: f.amplitude,
            amplitude_err: f.amplitude_err,
            visibility_sq_half: f.visibility_sq_half,
            visibility_sq_half_err: f.visibility_sq_half_err,
            beat_freq: f.beat_freq,
            beat_freq_err: f.beat_freq_err,
            mean_interval: f.mean_interval,
            mean_interval_err: f.mean_interval_err,
            chi2_reduced: f.chi2_reduced,
            bins_used: f.bins_used,
            iterations: f.iterations,
            no_beat_detected: u8::from(f.flag == FitFlag::NoBeatDetected),
        };
        unsafe { write_out(out, fit, "out") }
    })
}

/// Probability density of a gap `dt` between coincidences.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn franson_interarrival_density(
    dt: f64,
    visibility: f64,
    beat_freq: f64,
    mean_interval: f64,
    out: *mut f64,
) -> FransonStatus {
    guard(|| {
        if !(mean_interval > 0.0 && (0.0..=1.0).contains(&visibility) && beat_freq.is_finite()) {
            return Err(
                Error::InvalidInput("need mean_interval > 0, visibility in [0, 1]".into()).into(),
            );
        }
        let p = beats::interarrival_density(dt, visibility, beat_freq, mean_interval);
        unsafe { write_out(out, p, "out") }
    })
}

/// Visibility left when the detection times resolve `omega_sum` to within
/// `time_resolution`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn franson_eraser_visibility(
    omega_sum: f64,
    time_resolution: f64,
    out: *mut f64,
) -> FransonStatus {
    guard(|| {
        if !(time_resolution >= 0.0 && omega_sum.is_finite()) {
            return Err(Error::InvalidInput("time resolution must be >= 0".into()).into());
        }
        unsafe {
            write_out(
                out,
                eraser::visibility_vs_resolution(omega_sum, time_resolution),
                "out",
            )
        }
    })
}

/// Longitudinal sound speed from Young's modulus, Poisson ratio and density.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn franson_sound_speed(
    young_modulus: f64,
    poisson_ratio: f64,
    density: f64,
    out: *mut f64,
) -> FransonStatus {
    guard(|| {
        let m = aom::ElasticMaterial::new(young_modulus, poisson_ratio, density)?;
        unsafe { write_out(out, aom::sound_speed(&m), "out") }
    })
}

/// Bragg angle inside the crystal, in radians.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn franson_bragg_angle(
    acoustic_freq_hz: f64,
    sound_speed: f64,
    wavelength: f64,
    refractive_index: f64,
    out: *mut f64,
) -> FransonStatus {
    guard(|| {
        let spec = aom::AomSpec::new(
            acoustic_freq_hz,
            sound_speed,
            wavelength,
            refractive_index,
            1.0,
            0.0,
            0.0,
        )?;
        unsafe { write_out(out, aom::bragg_angle(&spec)?, "out") }
    })
}

/// Doppler shift (Hz) of light at `optical_freq_hz` reflected from a sound
/// wave of speed `sound_speed` at angle `theta`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn franson_doppler_shift(
    refractive_index: f64,
    sound_speed: f64,
    theta: f64,
    optical_freq_hz: f64,
    out: *mut f64,
) -> FransonStatus {
    guard(|| unsafe {
        write_out(
            out,
            aom::doppler_shift(refractive_index, sound_speed, theta, optical_freq_hz),
            "out",
        )
    })
}

/// Phase slope (rad/m) of a synchronization signal along a cable.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn franson_sync_phase_per_meter(
    freq_hz: f64,
    signal_speed: f64,
    out: *mut f64,
) -> FransonStatus {
    guard(|| unsafe {
        write_out(
            out,
            aom::sync_phase_per_meter(freq_hz, signal_speed)?,
            "out",
        )
    })
}

/// Timing window between two detection events.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FransonTimeWindow {
    /// Largest lab time difference that keeps both orderings reachable (s).
    pub dt_max: f64,
    /// The same window expressed as a path length (m).
    pub path_window: f64,
}

/// Timing window for a frame moving at `frame_speed` across detectors
/// `separation` metres apart.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn franson_max_time_discrepancy(
    frame_speed: f64,
    separation: f64,
    out: *mut FransonTimeWindow,
) -> FransonStatus {
    guard(|| {
        let w = relativity::max_time_discrepancy(frame_speed, separation)?;
        let w = FransonTimeWindow {
            dt_max: w.dt_max,
            path_window: w.path_window,
        };
        unsafe { write_out(out, w, "out") }
    })
}

/// Visibility predicted by the multisimultaneity model at path offset `x`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn franson_multisim_visibility(
    x: f64,
    window: f64,
    sigma: f64,
    v0: f64,
    out: *mut f64,
) -> FransonStatus {
    guard(|| unsafe {
        write_out(
            out,
            relativity::multisim_visibility(x, window, sigma, v0)?,
            "out",
        )
    })
}

/// Key-distribution encoding.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FransonScheme {
    Phase = 0,
    Frequency = 1,
    Sideband = 2,
}

impl From<FransonScheme> for Scheme {
    fn from(s: FransonScheme) -> Self {
        match s {
            FransonScheme::Phase => Scheme::Phase,
            FransonScheme::Frequency => Scheme::Frequency,
            FransonScheme::Sideband => Scheme::Sideband,
        }
    }
}

/// Time-averaged correlation between the two parties for bases `a` and `b`
/// (each 0 or 1). `omega` is the angular shift unit.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn franson_qkd_correlation(
    scheme: FransonScheme,
    basis_a: u8,
    basis_b: u8,
    omega: f64,
    out: *mut f64,
) -> FransonStatus {
    guard(|| {
        let setting = RoundSetting::for_bases(scheme.into(), basis_a, basis_b, omega)?;
        unsafe { write_out(out, qkd::time_averaged_correlation(&setting)?, "out") }
    })
}
