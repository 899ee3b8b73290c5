use std::f64::consts::TAU;
use std::ffi::CStr;
use std::ptr;

use franson_ffi::*;

fn last_error() -> String {
    let p = franson_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn arms() -> (FransonArm, FransonArm, FransonSource) {
    let a = FransonArm {
        delta_l: 0.45,
        phase: 0.0,
        freq_shift: TAU * 1e8,
    };
    let b = FransonArm {
        delta_l: 0.45,
        phase: 0.0,
        freq_shift: -TAU * 1e8,
    };
    let s = FransonSource {
        pump_freq: TAU * 299_792_458.0 / 657e-9,
        pump_bandwidth: 1e6,
        photon_bandwidth: 1.2e13,
        pair_rate: 100.0,
    };
    (a, b, s)
}

#[test]
fn model_lifecycle() {
    let (a, b, s) = arms();
    let mut model = ptr::null_mut();
    unsafe {
        assert_eq!(
            franson_model_new(&a, &b, &s, 10.0, &mut model),
            FransonStatus::Ok
        );
        assert!(!model.is_null());
        let mut p = f64::NAN;
        assert_eq!(
            franson_model_probability(model, 1.0, 0.0, &mut p),
            FransonStatus::Ok
        );
        assert!((0.0..=1.0).contains(&p));
        let mut w = f64::NAN;
        assert_eq!(franson_model_omega_sum(model, &mut w), FransonStatus::Ok);
        assert!(w.abs() < 1e-6);
        let mut chi = f64::NAN;
        assert_eq!(
            franson_model_visibility_factor(model, &mut chi),
            FransonStatus::Ok
        );
        assert!(chi > 0.99 && chi <= 1.0);
        assert_eq!(
            franson_model_probability(model, 1.5, 0.0, &mut p),
            FransonStatus::DomainError
        );
        assert!(last_error().contains("visibility factor"));
        franson_model_free(model);
    }
}

#[test]
fn null_arguments_are_reported() {
    let (a, b, s) = arms();
    unsafe {
        let mut model = ptr::null_mut();
        assert_eq!(
            franson_model_new(ptr::null(), &b, &s, 0.0, &mut model),
            FransonStatus::NullPointer
        );
        assert!(last_error().contains("arm_a"));
        assert_eq!(
            franson_model_new(&a, &b, &s, 0.0, ptr::null_mut()),
            FransonStatus::NullPointer
        );
        assert_eq!(
            franson_sound_speed(21.9e9, 0.266, 4410.0, ptr::null_mut()),
            FransonStatus::NullPointer
        );
        franson_model_free(ptr::null_mut());
        franson_stream_free(ptr::null_mut());
        franson_histogram_free(ptr::null_mut());
        assert_eq!(franson_stream_len(ptr::null()), 0);
        assert!(franson_stream_data(ptr::null()).is_null());
    }
}

#[test]
fn success_clears_last_error() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(
            franson_sound_speed(21.9e9, 0.6, 4410.0, &mut v),
            FransonStatus::DomainError
        );
        assert!(!franson_last_error().is_null());
        assert_eq!(
            franson_sound_speed(21.9e9, 0.266, 4410.0, &mut v),
            FransonStatus::Ok
        );
    }
    assert!(franson_last_error().is_null());
    assert!((v - 2480.0).abs() < 1.0);
}

#[test]
fn stream_histogram_fit() {
    let params = FransonProcessParams {
        mean_interval: 1e-3,
        visibility: 0.97,
        beat_freq: TAU * 31_250.0,
        dead_time: 0.0,
        duration: 100.0,
        seed: 9,
    };
    unsafe {
        let mut stream = ptr::null_mut();
        assert_eq!(
            franson_stream_generate(&params, &mut stream),
            FransonStatus::Ok
        );
        let n = franson_stream_len(stream);
        assert!(n > 90_000);
        let times = std::slice::from_raw_parts(franson_stream_data(stream), n);
        assert!(times.windows(2).all(|w| w[1] > w[0]));

        let mut hist = ptr::null_mut();
        assert_eq!(
            franson_histogram_from_stream(stream, 4e-6, 0.0, 0.1, &mut hist),
            FransonStatus::Ok
        );
        let bins = franson_histogram_bins(hist);
        assert_eq!(bins, 25_000);
        let mut counts = vec![0u64; bins];
        assert_eq!(
            franson_histogram_counts(hist, counts.as_mut_ptr(), bins),
            FransonStatus::Ok
        );
        assert_eq!(counts.iter().sum::<u64>() as usize, n - 1);

        let mut fit = FransonBeatFit::default();
        assert_eq!(franson_histogram_fit(hist, &mut fit), FransonStatus::Ok);
        assert_eq!(fit.no_beat_detected, 0);
        assert!((fit.beat_freq / TAU - 31_250.0).abs() < 5.0);

        franson_histogram_free(hist);
        franson_stream_free(stream);
    }
}

#[test]
fn histogram_rejects_unsorted_times() {
    let times = [0.0, 2e-3, 1e-3];
    let mut hist = ptr::null_mut();
    let status = unsafe {
        franson_histogram_from_times(times.as_ptr(), times.len(), 1e-4, 0.0, 1e-2, &mut hist)
    };
    assert_eq!(status, FransonStatus::InvalidArgument);
    assert!(hist.is_null());
}

#[test]
fn scalar_calculators() {
    let mut x = 0.0;
    unsafe {
        assert_eq!(
            franson_sync_phase_per_meter(2e8, 0.6 * 299_792_458.0, &mut x),
            FransonStatus::Ok
        );
        assert!((6.88..=7.06).contains(&x));

        let mut w = FransonTimeWindow::default();
        assert_eq!(
            franson_max_time_discrepancy(2500.0, 55.0, &mut w),
            FransonStatus::Ok
        );
        assert!((w.dt_max - 1.530e-12).abs() < 5e-15);

        assert_eq!(
            franson_multisim_visibility(0.0, 0.46e-3, 0.076e-3, 0.97, &mut x),
            FransonStatus::Ok
        );
        assert!(x < 1e-6);

        assert_eq!(
            franson_eraser_visibility(1e9, 0.0, &mut x),
            FransonStatus::Ok
        );
        assert_eq!(x, 1.0);
        assert_eq!(
            franson_eraser_visibility(1e9, -1.0, &mut x),
            FransonStatus::InvalidArgument
        );

        assert_eq!(
            franson_interarrival_density(0.0, 0.0, 0.0, 1e-3, &mut x),
            FransonStatus::Ok
        );
        assert!((x - 1e3).abs() < 1e-9);

        let mut theta = 0.0;
        assert_eq!(
            franson_bragg_angle(1e8, 2480.0, 1.314e-6, 2.5, &mut theta),
            FransonStatus::Ok
        );
        let mut shift = 0.0;
        let nu = 299_792_458.0 / 1.314e-6;
        assert_eq!(
            franson_doppler_shift(2.5, 2480.0, theta, nu, &mut shift),
            FransonStatus::Ok
        );
        assert!((shift - 1e8).abs() < 1e-4);
    }
}

#[test]
fn qkd_correlations() {
    let omega = TAU * 4e8;
    for scheme in [FransonScheme::Phase, FransonScheme::Frequency] {
        for a in 0..2 {
            for b in 0..2 {
                let mut e = f64::NAN;
                assert_eq!(
                    unsafe { franson_qkd_correlation(scheme, a, b, omega, &mut e) },
                    FransonStatus::Ok
                );
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((e - want).abs() < 1e-10);
            }
        }
    }
    let mut e = 0.0;
    let status = unsafe { franson_qkd_correlation(FransonScheme::Phase, 2, 0, omega, &mut e) };
    assert_eq!(status, FransonStatus::InvalidArgument);
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/franson.h");
    let text = std::fs::read_to_string(header).expect("build script writes the header");
    for name in [
        "franson_model_new",
        "franson_histogram_fit",
        "franson_last_error",
        "FRANSON_STATUS_PANIC",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        "#include \"franson.h\"\nint main(void) {\n  FransonModel *m = NULL;\n  double out;\n  \
         FransonStatus s = franson_sound_speed(21.9e9, 0.266, 4410.0, &out);\n  franson_model_free(m);\n  \
         return s == FRANSON_STATUS_OK ? 0 : 1;\n}\n",
    )
    .unwrap();
    let Ok(status) = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .status()
    else {
        eprintln!("no C compiler found; skipping syntax check");
        return;
    };
    assert!(status.success());
}
