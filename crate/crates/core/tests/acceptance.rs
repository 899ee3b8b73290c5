//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any criterion fails.

use std::f64::consts::{PI, TAU};
use std::path::Path;
use std::time::Instant;

use franson::aom::{self, AomSpec, ElasticMaterial};
use franson::beats::{
    fit_beats, generate_stream, histogram_interarrivals, interarrival_cdf, interarrival_density,
    FitFlag, ProcessParams,
};
use franson::coincidence::{CoincidenceModel, InterferometerArm, SourceSpectrum};
use franson::eraser::{log_grid, tradeoff_table, DUALITY_EPSILON};
use franson::fringe::{fringe_scan, uniform_phase_grid, visibility_from_counts};
use franson::qkd::sideband::{sideband_amplitude, sideband_state_evolution, SidebandVariant};
use franson::qkd::{
    run_protocol, time_averaged_correlation, BasisStrategy, ProtocolConfig, RoundSetting, Scheme,
    DEFAULT_ARM_DELAY,
};
use franson::quad::{integrate, integrate_to_infinity};
use franson::relativity::{max_time_discrepancy, multisim_visibility, predict_curves};
use franson::units::SPEED_OF_LIGHT;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sound_speed() -> Outcome {
    let v =
        aom::sound_speed(&ElasticMaterial::new(21.9e9, 0.266, 4410.0).map_err(|e| e.to_string())?);
    check((v - 2480.0).abs() <= 1.0, format!("v_s = {v:.2} m/s"))
}

fn doppler_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < 100 {
        let freq = 10f64.powf(rng.random_range(6.0..9.0));
        let v = rng.random_range(500.0..8000.0);
        let lambda = rng.random_range(2e-7..2e-6);
        let n = rng.random_range(1.0..4.0);
        let spec = AomSpec::new(freq, v, lambda, n, 0.01, 1e-15, 1.0).map_err(|e| e.to_string())?;
        let Ok(theta) = aom::bragg_angle(&spec) else {
            continue;
        };
        let shift = aom::doppler_shift(n, v, theta, spec.optical_freq());
        worst = worst.max(((shift - freq) / freq).abs());
        checked += 1;
    }
    check(
        worst <= 1e-12,
        format!("max relative deviation {worst:.2e} over 100 devices"),
    )
}

fn before_before_window() -> Outcome {
    let w = max_time_discrepancy(2500.0, 55.0).map_err(|e| e.to_string())?;
    let (ps, mm) = (w.dt_max * 1e12, w.path_window * 1e3);
    check(
        (ps - 1.530).abs() <= 0.005 && (mm - 0.459).abs() <= 0.002,
        format!("{ps:.4} ps, {mm:.4} mm"),
    )
}

fn sync_phase() -> Outcome {
    let alpha = aom::sync_phase_per_meter(2e8, 0.60 * SPEED_OF_LIGHT).map_err(|e| e.to_string())?;
    check(
        (6.88..=7.06).contains(&alpha),
        format!("alpha = {alpha:.4} rad/m"),
    )
}

fn beat_recovery() -> Outcome {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut ok = true;
    let v = 0.97;
    let depth = 0.5 * v * v;
    for (freq, seed) in [(31_250.0, 31u64), (62_500.0, 62)] {
        let params =
            ProcessParams::new(1e-3, v, TAU * freq, 0.0, 300.0, seed).map_err(|e| e.to_string())?;
        let stream = generate_stream(&params).map_err(|e| e.to_string())?;
        let hist = histogram_interarrivals(&stream, 4e-6, 0.0, 0.1).map_err(|e| e.to_string())?;
        let fit = fit_beats(&hist).map_err(|e| e.to_string())?;
        let df = fit.freq_hz() - freq;
        let rel = (fit.visibility_sq_half - depth) / depth;
        ok &= stream.len() >= 200_000
            && fit.flag == FitFlag::Ok
            && df.abs() <= 5.0
            && rel.abs() <= 0.10;
        details.push(format!(
            "{freq} Hz: {} events, fit {:.2} ± {:.2} Hz, V²/2 off by {:+.2}%",
            stream.len(),
            fit.freq_hz(),
            fit.freq_err_hz(),
            100.0 * rel
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs <= 30.0;
    details.push(format!("{secs:.1} s"));
    check(ok, details.join("; "))
}

fn density_normalization() -> Outcome {
    let mut worst = 0.0f64;
    let tau = 1e-3;
    for &v in &[0.0, 0.3, 0.6, 0.9, 1.0] {
        for &wt in &[0.0, 0.5, 5.0, 50.0, 500.0] {
            let w = wt / tau;
            // one piece per half period keeps each quadrature smooth
            let span = 60.0 * tau;
            let pieces = ((span * w / PI).ceil() as usize).max(240);
            let step = span / pieces as f64;
            let mut total = 0.0;
            for i in 0..pieces {
                let a = i as f64 * step;
                total += integrate(
                    |t| interarrival_density(t, v, w, tau),
                    a,
                    a + step,
                    1e-16,
                    1e-13,
                )
                .map_err(|e| e.to_string())?
                .value;
            }
            total +=
                integrate_to_infinity(|t| interarrival_density(t, v, w, tau), span, 1e-18, 1e-10)
                    .map_err(|e| e.to_string())?
                    .value;
            worst = worst.max((total - 1.0).abs());
        }
    }
    check(
        worst <= 1e-9,
        format!("max |∫P − 1| = {worst:.2e} over 25 settings"),
    )
}

fn ks_statistic(gaps: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    gaps.sort_by(f64::total_cmp);
    let n = gaps.len() as f64;
    gaps.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

fn monte_carlo_vs_analytic() -> Outcome {
    let start = Instant::now();
    let (tau, v, w) = (1e-3, 0.97, TAU * 31_250.0);
    // asymptotic Kolmogorov 1% point
    let critical = 1.6276;
    let mut passing = 0;
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let params = ProcessParams::new(tau, v, w, 0.0, 1e5 * tau, 1000 + seed)
            .map_err(|e| e.to_string())?;
        let stream = generate_stream(&params).map_err(|e| e.to_string())?;
        let mut gaps: Vec<f64> = stream.windows(2).map(|p| p[1] - p[0]).collect();
        let n = gaps.len() as f64;
        let d = ks_statistic(&mut gaps, |t| interarrival_cdf(t, v, w, tau)) * n.sqrt();
        worst = worst.max(d);
        passing += usize::from(d < critical);
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        passing >= 9 && secs <= 60.0,
        format!("{passing}/10 seeds below the 1% point, max √n·D = {worst:.3}, {secs:.1} s"),
    )
}

fn fringe_pipeline() -> Outcome {
    let start = Instant::now();
    let chi = 0.97;
    let integration = 20.0;
    let pair_rate = 200.0;
    // mean true counts per point are pair_rate·T/2; pick accidentals for 45% raw
    let true_mean = 0.5 * pair_rate * integration;
    let accidental_rate = true_mean * (chi / 0.45 - 1.0) / integration;
    let shift = TAU * 1e8;
    let arm_a = InterferometerArm::new(0.45, 0.0, shift).map_err(|e| e.to_string())?;
    let arm_b = InterferometerArm::new(0.45, 0.0, -shift).map_err(|e| e.to_string())?;
    let source = SourceSpectrum::new(TAU * SPEED_OF_LIGHT / 657e-9, 1e6, 1.2e13, pair_rate)
        .map_err(|e| e.to_string())?;
    let model =
        CoincidenceModel::new(arm_a, arm_b, source, accidental_rate).map_err(|e| e.to_string())?;
    let grid = uniform_phase_grid(16);
    let mut inside = 0;
    let mut raw_sum = 0.0;
    for seed in 0..100 {
        let scan = fringe_scan(&model, chi, &grid, integration, seed).map_err(|e| e.to_string())?;
        let est = visibility_from_counts(&scan).map_err(|e| e.to_string())?;
        raw_sum += est.raw_visibility;
        inside += usize::from((0.92..=1.02).contains(&est.noise_subtracted_visibility));
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        inside >= 95 && secs <= 60.0,
        format!(
            "{inside}/100 seeds in 97 ± 5%, mean raw visibility {:.3}, {secs:.1} s",
            raw_sum / 100.0
        ),
    )
}

fn duality() -> Outcome {
    let rows = tradeoff_table(&log_grid(1e-3, 1e3, 200)).map_err(|e| e.to_string())?;
    let worst = rows
        .iter()
        .map(|r| r.sum_of_squares)
        .fold(f64::NEG_INFINITY, f64::max);
    check(
        rows.len() == 200 && worst <= 1.0 + DUALITY_EPSILON,
        format!("max V² + K² = {worst:.12} over {} points", rows.len()),
    )
}

fn multisim_curve() -> Outcome {
    let (window, sigma, v0) = (0.46e-3, 0.076e-3, 0.97);
    let mut worst = 0.0f64;
    let offsets: Vec<f64> = (0..50).map(|i| -1.5e-3 + 3e-3 * i as f64 / 49.0).collect();
    for &x in &offsets {
        let g = |u: f64| {
            (-(x - u) * (x - u) / (2.0 * sigma * sigma)).exp() / ((2.0 * PI).sqrt() * sigma)
        };
        let inside = integrate(g, -window, window, 1e-14, 0.0)
            .map_err(|e| e.to_string())?
            .value;
        let oracle = v0 * (1.0 - inside);
        let closed = multisim_visibility(x, window, sigma, v0).map_err(|e| e.to_string())?;
        worst = worst.max((closed - oracle).abs());
    }
    let center = multisim_visibility(0.0, window, sigma, v0).map_err(|e| e.to_string())?;
    let curve = predict_curves(&offsets, window, sigma, v0).map_err(|e| e.to_string())?;
    check(
        worst <= 1e-6 && center < 1e-6 * v0 && curve.qm_visibility == v0,
        format!("max deviation {worst:.2e}, V(0) = {center:.2e}"),
    )
}

fn qkd_tables() -> Outcome {
    let start = Instant::now();
    let omega = TAU * 4e8;
    let mut analytic = 0.0f64;
    for scheme in [Scheme::Phase, Scheme::Frequency] {
        for a in 0..2u8 {
            for b in 0..2u8 {
                let s = RoundSetting::for_bases(scheme, a, b, omega).map_err(|e| e.to_string())?;
                let e = time_averaged_correlation(&s).map_err(|e| e.to_string())?;
                let want = if a == b { 1.0 } else { 0.0 };
                analytic = analytic.max((e - want).abs());
            }
        }
    }
    let mut mc_ok = true;
    let mut sigmas = 0.0f64;
    for scheme in [Scheme::Phase, Scheme::Frequency] {
        let report = run_protocol(&ProtocolConfig {
            rounds: 100_000,
            scheme,
            basis_strategy: BasisStrategy::Uniform,
            omega,
            delta_t_disclosure: 1e-9,
            arm_delay: DEFAULT_ARM_DELAY,
            seed: 11,
        })
        .map_err(|e| e.to_string())?;
        for s in &report.mean_correlation {
            let want = if s.basis_a == s.basis_b { 1.0 } else { 0.0 };
            let z = (s.mean - want).abs() * (s.rounds as f64).sqrt();
            sigmas = sigmas.max(z);
            mc_ok &= z <= 3.0;
        }
    }
    let mut ledger = 0.0f64;
    for variant in [
        SidebandVariant::SinglePhoton,
        SidebandVariant::TwoPhoton,
        SidebandVariant::Bb84,
    ] {
        for i in 0..20 {
            for j in 0..20 {
                let (pa, pb) = (TAU * i as f64 / 20.0, TAU * j as f64 / 20.0);
                let closed = sideband_amplitude(pa, pb, variant).map_err(|e| e.to_string())?;
                let state = sideband_state_evolution(pa, pb, variant).detection_probability();
                ledger = ledger.max((closed - state).abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        analytic <= 1e-10 && mc_ok && ledger <= 1e-12 && secs <= 30.0,
        format!(
            "analytic {analytic:.1e}, Monte Carlo max {sigmas:.2}σ, sideband {ledger:.1e}, {secs:.1} s"
        ),
    )
}

fn run_cli(args: &[&str]) -> i32 {
    let mut argv = vec!["franson"];
    argv.extend_from_slice(args);
    franson::cli::dispatch(argv)
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let write = |name: &str, text: &str| -> Result<String, String> {
        let p = dir.path().join(name);
        std::fs::write(&p, text).map_err(|e| e.to_string())?;
        Ok(p.display().to_string())
    };
    let fringe = write(
        "fringe.cfg",
        "pair_rate_per_s = 200\nintegration_time_s = 20\naccidental_rate_per_s = 115\n",
    )?;
    let beats = write(
        "beats.cfg",
        "mean_interval_s = 1e-3\nvisibility = 0.97\nbeat_freq_hz = 31250\nduration_s = 100\n",
    )?;
    let eraser = write(
        "eraser.cfg",
        "omega_dt_min = 1e-3\nomega_dt_max = 1e3\npoints = 50\n",
    )?;
    let aom_cfg = write(
        "aom.cfg",
        "acoustic_freq_hz = 1e8\nwavelength_m = 1.314e-6\nrefractive_index = 2.5\n\
         young_modulus_pa = 21.9e9\npoisson_ratio = 0.266\ndensity_kg_per_m3 = 4410\n",
    )?;
    let rel = write("rel.cfg", "frame_speed_m_per_s = 2500\nseparation_m = 55\n")?;
    let empty = write("empty.cfg", "")?;

    let hist_a = dir.path().join("hist_a.csv").display().to_string();
    let mut cases: Vec<(&str, Vec<String>)> = vec![
        (
            "fringe-scan",
            vec!["fringe-scan".into(), "--config".into(), fringe.clone()],
        ),
        (
            "beat-histogram",
            vec!["beat-histogram".into(), "--config".into(), beats.clone()],
        ),
        (
            "eraser-table",
            vec!["eraser-table".into(), "--config".into(), eraser],
        ),
        (
            "aom-calc",
            vec!["aom-calc".into(), "--config".into(), aom_cfg],
        ),
        (
            "relativity-scan",
            vec!["relativity-scan".into(), "--config".into(), rel.clone()],
        ),
        (
            "timing-check",
            vec!["timing-check".into(), "--config".into(), rel],
        ),
        (
            "qkd-sim",
            vec![
                "qkd-sim".into(),
                "--config".into(),
                empty,
                "--scheme".into(),
                "freq".into(),
            ],
        ),
    ];
    if run_cli(&[
        "beat-histogram",
        "--config",
        &beats,
        "--seed",
        "5",
        "--out",
        &hist_a,
    ]) != 0
    {
        return Err("could not produce the histogram for beat-fit".into());
    }
    cases.push((
        "beat-fit",
        vec!["beat-fit".into(), "--input".into(), hist_a],
    ));

    let mut identical = Vec::new();
    let mut failed = Vec::new();
    for (name, args) in &cases {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{name}-{run}.out"));
            let mut argv: Vec<&str> = args.iter().map(String::as_str).collect();
            let out_s = out.display().to_string();
            argv.extend(["--seed", "7", "--out", &out_s]);
            let code = run_cli(&argv);
            outputs.push((code, read(&out)));
        }
        let same = outputs[0].0 == 0
            && outputs[1].0 == 0
            && outputs[0].1.is_some()
            && outputs[0].1 == outputs[1].1;
        if same {
            identical.push(*name);
        } else {
            failed.push(format!("{name} (exit {})", outputs[0].0));
        }
    }
    check(
        failed.is_empty(),
        if failed.is_empty() {
            format!("{} subcommands byte-identical across runs", identical.len())
        } else {
            format!("differing or failing: {}", failed.join(", "))
        },
    )
}

fn read(path: &Path) -> Option<Vec<u8>> {
    std::fs::read(path).ok()
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("sound speed", sound_speed),
        ("Doppler equivalence", doppler_equivalence),
        ("before-before window", before_before_window),
        ("synchronization phase", sync_phase),
        ("beat recovery", beat_recovery),
        ("density normalization", density_normalization),
        ("Monte Carlo vs analytic", monte_carlo_vs_analytic),
        ("fringe pipeline", fringe_pipeline),
        ("duality", duality),
        ("multisimultaneity curve", multisim_curve),
        ("QKD tables", qkd_tables),
        ("CLI determinism", cli_determinism),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} acceptance criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
