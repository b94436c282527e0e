use std::f64::consts::PI;

use num_complex::Complex64;
use pat_core::medium::{
    alpha, apply_time_shift, check_shift_condition, green_hat, time_shift_t1, wavenumber, Ball,
    DetectorSeries, Law, MediumParams, ShiftDirection, Tau2Mode,
};
use proptest::prelude::*;

fn medium(tau1: f64, alpha2: f64) -> MediumParams {
    MediumParams::new(1500.0, tau1, Tau2Mode::Zero, alpha2).unwrap()
}

/// Low-frequency expansion of `w / (c0 sqrt(1 - i tau w))`.
fn k_tv_series(w: f64, m: &MediumParams) -> Complex64 {
    let z = Complex64::new(0.0, m.tau1 * w);
    w / m.c0 * (1.0 + z / 2.0 + 3.0 * z * z / 8.0 + 5.0 * z * z * z / 16.0)
}

#[test]
fn tv_wavenumber_matches_low_frequency_series() {
    let m = medium(1e-9, 0.0);
    for w in [1e3, 1e4, 1e5] {
        let k = wavenumber(Law::Tv, w, &m);
        let s = k_tv_series(w, &m);
        assert!((k - s).norm() / s.norm() < 1e-15, "w = {w}");
    }
}

#[test]
fn ksb_and_tv_differ_by_a_linear_phase() {
    let m = medium(2e-8, 0.3 / 1500.0);
    for w in [-3e5, -10.0, 7.0, 2e6] {
        let d = wavenumber(Law::Ksb, w, &m) - wavenumber(Law::Tv, w, &m);
        let expect = w * (1.0 / m.c0 + m.alpha2);
        assert!((d.re - expect).abs() <= 1e-12 * expect.abs());
        assert!(d.im.abs() <= 1e-12 * expect.abs());
    }
}

#[test]
fn tv_attenuation_is_finite_at_high_frequency() {
    // Re alpha_tv grows like sqrt(w / (2 tau1)) / c0.
    let m = medium(1e-6, 0.0);
    let a = alpha(Law::Tv, 1e12, &m);
    assert!(a.re.is_finite() && a.im.is_finite());
    let expect = (1e12f64 / (2.0 * 1e-6)).sqrt() / 1500.0;
    assert!((a.re - expect).abs() < 1e-3 * expect);
}

#[test]
fn green_function_decays_like_a_spherical_wave() {
    let m = medium(0.0, 0.0);
    let x = [0.3, 0.0, 0.4];
    let g = green_hat(&x, 4000.0, &m, Law::Tv).unwrap();
    let expect = (2.0 * PI).powf(-0.5) / (4.0 * PI * 0.5);
    assert!((g.norm() - expect).abs() < 1e-15);
    let phase = Complex64::from_polar(1.0, 4000.0 * 0.5 / 1500.0);
    assert!((g / g.norm() - phase).norm() < 1e-13);
}

#[test]
fn fractional_shift_of_a_gaussian_pulse() {
    let m = medium(1e-9, 0.2 / 1500.0);
    let x = [0.02, 0.01, 0.0];
    let shift = time_shift_t1(&x, &m);
    let dt = 1e-6;
    let n = 512;
    let (t0, sigma) = (300e-6, 8e-6);
    let pulse = |t: f64| (-((t - t0) / sigma).powi(2)).exp();
    let trace: Vec<f64> = (0..n).map(|j| pulse(j as f64 * dt)).collect();
    let s = DetectorSeries::new(vec![x], dt, vec![trace]).unwrap();
    let out = apply_time_shift(&s, &m, ShiftDirection::CausalToTv).unwrap();
    for (j, v) in out.samples()[0].iter().enumerate() {
        let expect = pulse(j as f64 * dt + shift);
        assert!((v - expect).abs() < 1e-9, "sample {j}: {v} vs {expect}");
    }
}

#[test]
fn shift_condition_bound_for_a_small_support() {
    let m = medium(0.0, 0.0);
    let far = Ball {
        center: [0.0; 3],
        radius: 1.0,
    }
    .boundary_points(3, 40);
    let support: Vec<_> = [[0.01, 0.0, 0.0], [0.0, -0.01, 0.0], [0.0, 0.0, 0.005]].to_vec();
    let r = check_shift_condition(&far, &support, &m, 0.05).unwrap();
    assert!(r.pass);
    // |x - y| - |x| is at most |y| by the triangle inequality.
    assert!(r.max_mismatch <= 0.01 + 1e-15);
    assert!(r.max_mismatch > 0.005);
}

#[test]
fn series_csv_reads_back() {
    let pos = vec![[0.1, 0.0, 0.0], [0.0, 0.1, 0.0]];
    let s = DetectorSeries::new(pos.clone(), 1e-7, vec![vec![1.0, -2.5e-9, 3.0], vec![0.0, 1e300, -7.0]]).unwrap();
    let mut buf = Vec::new();
    s.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("t, det_0, det_1\n"));
    let back = DetectorSeries::read_csv(&buf[..], pos).unwrap();
    assert_eq!(back.samples(), s.samples());
}

proptest! {
    #[test]
    fn attenuation_is_hermitian(tau1 in 0.0..1e-6f64, a2 in 0.0..1e-3f64, w in 1e-2..1e7f64) {
        let m = medium(tau1, a2);
        for law in [Law::Ksb, Law::Tv] {
            let p = alpha(law, w, &m);
            let q = alpha(law, -w, &m);
            prop_assert!((p - q.conj()).norm() <= 1e-12 * p.norm().max(1e-300));
        }
    }

    #[test]
    fn waves_decay_in_space(tau1 in 1e-12..1e-6f64, w in 1.0..1e8f64) {
        let m = medium(tau1, 0.0);
        prop_assert!(wavenumber(Law::Tv, w, &m).im > 0.0);
        prop_assert!(wavenumber(Law::Tv, -w, &m).im > 0.0);
    }

    #[test]
    fn green_functions_differ_by_the_delay(
        tau1 in 0.0..1e-7f64,
        a2 in 0.0..1e-3f64,
        r in 1e-3..5e-2f64,
        theta in 0.0..PI,
        phi in 0.0..(2.0 * PI),
        w in -5e5..5e5f64,
    ) {
        let m = medium(tau1, a2);
        let x = [r * theta.sin() * phi.cos(), r * theta.sin() * phi.sin(), r * theta.cos()];
        let gk = green_hat(&x, w, &m, Law::Ksb).unwrap();
        let gt = green_hat(&x, w, &m, Law::Tv).unwrap();
        let phase = w * time_shift_t1(&x, &m);
        let rot = Complex64::from_polar(1.0, phase);
        // Roundoff in a phase of size |phase| is about eps |phase|.
        let tol = 8.0 * f64::EPSILON * (1.0 + phase.abs());
        prop_assert!((gk - gt * rot).norm() <= tol * gt.norm());
    }

    #[test]
    fn shift_round_trip(seed in 0u64..1000, k in 0.0..0.02f64) {
        let m = medium(0.0, 0.0);
        let x = [k, 0.0, 0.0];
        let dt = 5e-7;
        let n = 256;
        let t0 = 64e-6 + (seed % 17) as f64 * 1e-6;
        let trace: Vec<f64> = (0..n)
            .map(|j| {
                let t = j as f64 * dt;
                (-((t - t0) / 6e-6).powi(2)).exp() * (1e5 * t).sin()
            })
            .collect();
        let s = DetectorSeries::new(vec![x], dt, vec![trace]).unwrap();
        let there = apply_time_shift(&s, &m, ShiftDirection::TvToCausal).unwrap();
        let back = apply_time_shift(&there, &m, ShiftDirection::CausalToTv).unwrap();
        prop_assert!(back.rel_l2(&s) <= 1e-6);
    }

    #[test]
    fn boundary_points_lie_on_the_sphere(dim in 2usize..=3, n in 1usize..50, r in 1e-3..10.0f64) {
        let ball = Ball { center: [0.5, -0.25, if dim == 3 { 1.0 } else { 0.0 }], radius: r };
        for p in ball.boundary_points(dim, n) {
            prop_assert!(ball.distance_to_boundary(&p).abs() <= 1e-12 * r);
        }
    }
}
