//! Acceptance suite: one test per release criterion, each printing a
//! `[PASS] criterion N` line (visible with `cargo test --test acceptance --
//! --nocapture`). Tolerances and thresholds are pinned in the assertions.

mod naive;

use std::fs;
use std::process::Command;
use std::time::Instant;

use rhoq_cli::parallel;
use rhoq_core::detrended::{
    dfa_exponent, make_scale_grid, rho_q, DetrendConfig, ScaleGrid,
};
use rhoq_core::ingest::ReturnSeries;
use rhoq_core::rolling::{rolling_rho, RollingSpec};
use rhoq_core::stats::{
    chi_squared_crit_1pct, jarque_bera, arch_lm, pearson, significance_band, SurrogateSpec,
};
use rhoq_core::synth;
use rhoq_core::Rng;

fn random_series(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = Rng::new(seed);
    (0..n).map(|_| rng.normal()).collect()
}

/// Criterion 1 — the optimized pipeline matches a naive direct transcription
/// of the profile/detrend/fluctuation/ratio chain: every (T, s, q) with
/// T <= 200, s in {12, 24, 48}, q in {1, 2, 4}, at 1e-9 relative error.
#[test]
fn criterion_01_oracle_equivalence() {
    let q_values = [1.0, 2.0, 4.0];
    let cfg = DetrendConfig::new(2, q_values.to_vec()).unwrap();
    let mut cells = 0usize;
    for t in 12..=200usize {
        let x = random_series(t, 0xC1_0000 + t as u64);
        let y = random_series(t, 0xC2_0000 + t as u64);
        for &s in &[12usize, 24, 48] {
            if s > t {
                continue;
            }
            let fast = rhoq_core::detrended::fluctuation(&x, &y, s, &cfg).unwrap();
            let grid = ScaleGrid::from_scales(&[s], t, 2).unwrap();
            let surface = rho_q(&x, &y, &grid, &cfg).unwrap();
            for (qi, &q) in q_values.iter().enumerate() {
                let (nxx, nyy, nxy) = naive::fluctuations(&x, &y, s, 2, q);
                let nrho = naive::rho(&x, &y, s, 2, q);
                assert!(
                    (fast.f_xx[qi] - nxx).abs() <= 1e-9 * nxx.abs(),
                    "T={t} s={s} q={q}: F_xx {} vs naive {nxx}",
                    fast.f_xx[qi]
                );
                assert!(
                    (fast.f_yy[qi] - nyy).abs() <= 1e-9 * nyy.abs(),
                    "T={t} s={s} q={q}: F_yy {} vs naive {nyy}",
                    fast.f_yy[qi]
                );
                assert!(
                    (fast.f_xy[qi] - nxy).abs() <= 1e-9 * (1.0 + nxy.abs()),
                    "T={t} s={s} q={q}: F_xy {} vs naive {nxy}",
                    fast.f_xy[qi]
                );
                let rho = surface.rho[qi][0];
                assert!(
                    (rho - nrho).abs() <= 1e-9 * (1.0 + nrho.abs()),
                    "T={t} s={s} q={q}: rho {rho} vs naive {nrho}"
                );
                cells += 1;
            }
        }
    }
    println!("[PASS] criterion 1 — oracle equivalence over {cells} (T, s, q) cells at 1e-9");
}

/// Criterion 2 — identity and antisymmetry: rho(x, x) = 1 and
/// rho(x, -x) = -1 within 1e-12 for 100 random series at all configured q, s.
#[test]
fn criterion_02_identity_antisymmetry() {
    let cfg = DetrendConfig::new(2, vec![0.5, 1.0, 2.0, 4.0]).unwrap();
    for i in 0..100u64 {
        let t = 192 + (i as usize % 5) * 64;
        let x = random_series(t, 0xAA00 + i);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let grid = ScaleGrid::from_scales(&[12, 24, 48], t, 2).unwrap();
        let same = rho_q(&x, &x, &grid, &cfg).unwrap();
        let flipped = rho_q(&x, &neg, &grid, &cfg).unwrap();
        for qi in 0..cfg.q_values().len() {
            for si in 0..grid.len() {
                assert!(
                    (same.rho[qi][si] - 1.0).abs() < 1e-12,
                    "series {i}: rho(x,x) = {}",
                    same.rho[qi][si]
                );
                assert!(
                    (flipped.rho[qi][si] + 1.0).abs() < 1e-12,
                    "series {i}: rho(x,-x) = {}",
                    flipped.rho[qi][si]
                );
            }
        }
    }
    println!("[PASS] criterion 2 — identity/antisymmetry within 1e-12 for 100 series");
}

/// Criterion 3 — boundedness: |rho_q(s)| <= 1 + 1e-9 over 1000 randomized
/// pairs including heavy-tailed input, q in {0.5, 1, 2, 4, 6}.
#[test]
fn criterion_03_boundedness() {
    let cfg = DetrendConfig::new(2, vec![0.5, 1.0, 2.0, 4.0, 6.0]).unwrap();
    for i in 0..1000u64 {
        let t = 150 + (i as usize % 8) * 50;
        let (x, y) = match i % 4 {
            0 => synth::gaussian_pair(((i % 19) as f64 / 9.0) - 1.0, t, 0xB0 + i).unwrap(),
            1 => (
                synth::student_t(3.0, t, 0xB1 + i).unwrap(),
                synth::student_t(3.0, t, 0xB2 + i).unwrap(),
            ),
            2 => (
                synth::garch_like(0.1, 0.2, 0.7, t, 0xB3 + i).unwrap(),
                synth::garch_like(0.1, 0.25, 0.65, t, 0xB4 + i).unwrap(),
            ),
            _ => (
                synth::ar1(0.7, t, 0xB5 + i).unwrap(),
                synth::ar1(-0.5, t, 0xB6 + i).unwrap(),
            ),
        };
        let grid = ScaleGrid::from_scales(&[12, 24, 48], t, 2).unwrap();
        let surface = rho_q(&x, &y, &grid, &cfg).unwrap();
        for row in &surface.rho {
            for &v in row {
                assert!(v.abs() <= 1.0 + 1e-9, "pair {i}: rho {v} out of bounds");
            }
        }
    }
    println!("[PASS] criterion 3 — |rho| <= 1 + 1e-9 over 1000 randomized pairs, q in {{0.5,1,2,4,6}}");
}

/// Criterion 4 — estimator recovery: for gaussian pairs with rho0 in
/// {0, 0.5, 0.9} and T = 2^17, the seed-averaged rho_2(s) is within 0.05 of
/// rho0 at every scale in [16, 256].
#[test]
fn criterion_04_estimator_recovery() {
    let t = 1 << 17;
    let cfg = DetrendConfig::new(2, vec![2.0]).unwrap();
    let grid = make_scale_grid(16, 256, 9, t, 2).unwrap();
    let pool = parallel::pool(0).unwrap();
    for &rho0 in &[0.0, 0.5, 0.9] {
        let mut means = vec![0.0f64; grid.len()];
        for seed in 0..10u64 {
            let (x, y) = synth::gaussian_pair(rho0, t, 0x40_00 + seed).unwrap();
            let surface = parallel::rho_surface(&pool, &x, &y, &grid, &cfg).unwrap();
            for (si, m) in means.iter_mut().enumerate() {
                *m += surface.rho[0][si];
            }
        }
        for (si, m) in means.iter_mut().enumerate() {
            *m /= 10.0;
            assert!(
                (*m - rho0).abs() <= 0.05,
                "rho0 {rho0}, scale {}: mean rho_2 {m}",
                grid.scales()[si]
            );
        }
    }
    println!("[PASS] criterion 4 — rho_2(s) recovers rho0 in {{0, 0.5, 0.9}} within 0.05, scales 16..256, 10 seeds");
}

/// Criterion 5 — DFA sanity: white noise of length 2^17 gives a scaling
/// exponent of 0.50 +- 0.03, averaged over 10 seeds.
#[test]
fn criterion_05_dfa_white_noise() {
    let t = 1 << 17;
    let cfg = DetrendConfig::new(2, vec![2.0]).unwrap();
    let grid = make_scale_grid(32, 8192, 10, t, 2).unwrap();
    let mut mean_h = 0.0;
    for seed in 0..10u64 {
        let x = random_series(t, 0x50_00 + seed);
        let fit = dfa_exponent(&x, &grid, &cfg).unwrap();
        mean_h += fit.exponent;
    }
    mean_h /= 10.0;
    assert!(
        (mean_h - 0.5).abs() <= 0.03,
        "white-noise DFA exponent {mean_h}"
    );
    println!("[PASS] criterion 5 — white-noise DFA exponent {mean_h:.4} within 0.50 +- 0.03 over 10 seeds");
}

/// Criterion 6 — surrogate-band scaling: the shuffle sigma of the Pearson
/// coefficient is within a factor of 2 of T^(-1/2) for T = 1e4, 1e5, 1e6.
#[test]
fn criterion_06_surrogate_band_scaling() {
    let pool = parallel::pool(0).unwrap();
    for (i, &t) in [10_000usize, 100_000, 1_000_000].iter().enumerate() {
        let (x, y) = synth::gaussian_pair(0.3, t, 0x60_00 + i as u64).unwrap();
        let spec = SurrogateSpec::new(100, 0x61_00 + i as u64).unwrap();
        let band = parallel::band(&pool, &x, &y, &spec, |a, b| {
            pearson(a, b).map(|v| vec![v])
        })
        .unwrap();
        let expected = 1.0 / (t as f64).sqrt();
        assert!(
            band.sigma[0] >= expected / 2.0 && band.sigma[0] <= expected * 2.0,
            "T = {t}: sigma {} vs T^-1/2 {expected}",
            band.sigma[0]
        );
    }
    println!("[PASS] criterion 6 — shuffled-pair Pearson sigma within 2x of T^-1/2 for T in {{1e4, 1e5, 1e6}}");
}

/// Criterion 7 — the q filter separates fluctuation sizes: on a pair whose
/// large-amplitude segment is comonotone and small-amplitude segment is
/// independent, rho_4(s) exceeds rho_1(s) by at least 0.1 at every scale.
#[test]
fn criterion_07_q_filter_contract() {
    let t = 1 << 16;
    let split = t / 2;
    let (mut x, mut y) = synth::two_regime_pair(t, split, 0x70_01).unwrap();
    // Amplify the comonotone half so it dominates the large-fluctuation boxes.
    for i in split..t {
        x[i] *= 4.0;
        y[i] *= 4.0;
    }
    let cfg = DetrendConfig::new(2, vec![1.0, 4.0]).unwrap();
    let grid = ScaleGrid::from_scales(&[16, 32, 64, 128, 256], t, 2).unwrap();
    let surface = rho_q(&x, &y, &grid, &cfg).unwrap();
    for (si, &scale) in grid.scales().iter().enumerate() {
        let rho1 = surface.rho[0][si];
        let rho4 = surface.rho[1][si];
        assert!(
            rho4 - rho1 >= 0.1,
            "scale {scale}: rho_4 {rho4} does not exceed rho_1 {rho1} by 0.1"
        );
    }
    println!("[PASS] criterion 7 — rho_4 > rho_1 + 0.1 at every scale on the amplitude-regime pair");
}

/// Criterion 8 — rolling consistency and regime detection: a full-span window
/// reproduces the static surface bit for bit, and a two-regime pair shows
/// first-half windows inside the surrogate band with second-half windows
/// above 0.9.
#[test]
fn criterion_08_rolling_consistency_and_regimes() {
    // Bit-for-bit consistency.
    let t = 20_000;
    let xr = random_series(t, 0x80_01);
    let yr = random_series(t, 0x80_02);
    let x = ReturnSeries::from_parts("X", 0, 10, xr.clone(), vec![false; t]).unwrap();
    let y = ReturnSeries::from_parts("Y", 0, 10, yr.clone(), vec![false; t]).unwrap();
    let cfg = DetrendConfig::new(2, vec![1.0, 2.0, 4.0]).unwrap();
    let span_ms = t as i64 * 10_000;
    let spec = RollingSpec::new(span_ms, span_ms, vec![12, 360]).unwrap();
    let rolled = rolling_rho(&x, &y, &spec, &cfg).unwrap();
    assert_eq!(rolled.rho.len(), 1);
    let grid = ScaleGrid::from_scales(&[12, 360], t, 2).unwrap();
    let fixed = rho_q(&xr, &yr, &grid, &cfg).unwrap();
    for qi in 0..3 {
        for si in 0..2 {
            assert_eq!(
                rolled.rho[0][qi][si].unwrap().to_bits(),
                fixed.rho[qi][si].to_bits(),
                "full-span window differs from the static surface"
            );
        }
    }

    // Regime detection.
    let t = 40_000;
    let split = t / 2;
    let (xr, yr) = synth::two_regime_pair(t, split, 0x80_03).unwrap();
    let x = ReturnSeries::from_parts("X", 0, 10, xr.clone(), vec![false; t]).unwrap();
    let y = ReturnSeries::from_parts("Y", 0, 10, yr.clone(), vec![false; t]).unwrap();
    let window_samples = 5_000usize;
    let window_ms = window_samples as i64 * 10_000;
    let spec = RollingSpec::new(window_ms, window_ms, vec![12, 360]).unwrap();
    let q1 = DetrendConfig::new(2, vec![1.0]).unwrap();
    let rolled = rolling_rho(&x, &y, &spec, &q1).unwrap();
    assert_eq!(rolled.rho.len(), 8);

    // Band of rho_1 at both scales from shuffled surrogates of the first
    // (independent-regime) window.
    let wx = &xr[..window_samples];
    let wy = &yr[..window_samples];
    let wgrid = ScaleGrid::from_scales(&[12, 360], window_samples, 2).unwrap();
    let sspec = SurrogateSpec::new(100, 0x80_04).unwrap();
    let band = significance_band(wx, wy, &sspec, |a, b| {
        rho_q(a, b, &wgrid, &q1).map(|s| s.flat())
    })
    .unwrap();

    for w in 0..8 {
        for si in 0..2 {
            let rho = rolled.rho[w][0][si].expect("window long enough");
            if w < 4 {
                assert!(
                    !band.is_significant(si, rho, 3.0),
                    "window {w} scale index {si}: independent regime outside band, rho {rho}"
                );
            } else {
                assert!(
                    rho > 0.9,
                    "window {w} scale index {si}: comonotone regime rho {rho} <= 0.9"
                );
            }
        }
    }
    println!("[PASS] criterion 8 — full-span window bit-identical; regimes resolved against the surrogate band");
}

/// Criterion 9 — diagnostics: JB of alternating +-1 (n = 12) equals 2
/// exactly; JB rejects Student-t(3) and ARCH LM rejects the volatility-
/// clustered generator at the 1% critical values in at least 95 of 100 seeds.
#[test]
fn criterion_09_diagnostics() {
    let alternating: Vec<f64> = (0..12).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let jb = jarque_bera(&alternating).unwrap();
    assert_eq!(jb.statistic, 2.0, "JB of alternating signs must be exact");

    let t = 100_000;
    let jb_crit = chi_squared_crit_1pct(2).unwrap();
    let arch_crit = chi_squared_crit_1pct(5).unwrap();
    let mut jb_rejections = 0;
    let mut arch_rejections = 0;
    for seed in 0..100u64 {
        let heavy = synth::student_t(3.0, t, 0x90_00 + seed).unwrap();
        if jarque_bera(&heavy).unwrap().statistic > jb_crit {
            jb_rejections += 1;
        }
        let clustered = synth::garch_like(0.1, 0.2, 0.7, t, 0x91_00 + seed).unwrap();
        if arch_lm(&clustered, 5).unwrap().statistic > arch_crit {
            arch_rejections += 1;
        }
    }
    assert!(jb_rejections >= 95, "JB rejected only {jb_rejections}/100");
    assert!(arch_rejections >= 95, "ARCH LM rejected only {arch_rejections}/100");
    println!(
        "[PASS] criterion 9 — JB(+-1) = 2 exact; JB rejects t(3) {jb_rejections}/100, ARCH rejects clustering {arch_rejections}/100"
    );
}

/// Criterion 10 — performance and determinism: the full 24-scale surface at
/// q = 1, 2, 4 on one million samples finishes inside 60 s, and the worker
/// count does not change one output byte.
#[test]
fn criterion_10_performance_and_worker_determinism() {
    let t = 1_000_000;
    let (x, y) = synth::gaussian_pair(0.7, t, 0xA0_01).unwrap();
    let cfg = DetrendConfig::new(2, vec![1.0, 2.0, 4.0]).unwrap();
    let grid = make_scale_grid(12, 32_000, 24, t, 2).unwrap();
    assert_eq!(grid.len(), 24);

    let pool = parallel::pool(0).unwrap();
    let start = Instant::now();
    let surface = parallel::rho_surface(&pool, &x, &y, &grid, &cfg).unwrap();
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "surface took {:.1} s",
        elapsed.as_secs_f64()
    );
    assert!(surface.rho.iter().flatten().all(|v| v.is_finite()));

    // Worker-count byte identity through the binary.
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    fs::create_dir_all(&data).unwrap();
    let xs = ReturnSeries::from_parts("X", 0, 10, x, vec![false; t]).unwrap();
    let ys = ReturnSeries::from_parts("Y", 0, 10, y, vec![false; t]).unwrap();
    fs::write(data.join("x.csv"), xs.to_csv()).unwrap();
    fs::write(data.join("y.csv"), ys.to_csv()).unwrap();

    let mut outputs = Vec::new();
    for workers in ["1", "2"] {
        let status = Command::new(env!("CARGO_BIN_EXE_rhoq"))
            .current_dir(dir.path())
            .args([
                "rho",
                "--instrument",
                "X data/x.csv",
                "--instrument",
                "Y data/y.csv",
                "--calendar",
                "24x7",
                "--surrogates",
                "0",
                "--workers",
                workers,
                "--out",
                "out",
            ])
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push((
            fs::read(dir.path().join("out/rho.csv")).unwrap(),
            fs::read(dir.path().join("out/rho.json")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1], "worker count changed output bytes");
    println!(
        "[PASS] criterion 10 — 24-scale surface on 1e6 samples in {:.1} s; workers 1 vs 2 byte-identical",
        elapsed.as_secs_f64()
    );
}
