use num_complex::Complex64;
use proptest::prelude::*;
use slowcav::cavity::{find_modes, transfer};
use slowcav::kk::kk_analytic;
use slowcav::metrics::simulate;
use slowcav::profile::build_background;
use slowcav::pulse::{gaussian_pulse, propagate};
use slowcav::{
    BackgroundShape, CavityConfig, FrequencyGrid, HoleSpec, PulseEnvelope, DEFAULT_CARRIER,
};

fn cavity_strategy() -> impl Strategy<Value = CavityConfig> {
    (1e-3..2e-2f64, 0.05..0.999f64, 0.05..0.999f64, 0.05..1.0f64, 1.0..3.0f64).prop_map(
        |(length, r1, r2, a, n)| CavityConfig {
            length,
            r1,
            r2,
            background_index: n,
            excess_roundtrip: a,
        },
    )
}

fn hole_strategy() -> impl Strategy<Value = HoleSpec> {
    // residual is stored as a fraction of the background and scaled in setup
    (1e5..2e7f64, 0.0..0.25f64, 0.0..0.5f64)
        .prop_map(|(w, r, ramp)| HoleSpec::ramped(0.0, w, r, ramp * w))
}

fn setup(hole: &HoleSpec, alpha0: f64, cfg: &CavityConfig) -> slowcav::FieldTransfer {
    let p = build_background(BackgroundShape::Flat, alpha0, 0.0, 1e9)
        .unwrap()
        .burn_hole(&HoleSpec { residual: hole.residual * alpha0, ..*hole })
        .unwrap();
    let grid = FrequencyGrid::centered(DEFAULT_CARRIER, 0.0, 6.0 * hole.width, 1024).unwrap();
    let disp = kk_analytic(&p, &grid).with_background_index(cfg.background_index);
    transfer(cfg, &p.sample(&grid), &disp).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transmission_never_exceeds_one(
        cfg in cavity_strategy(),
        hole in hole_strategy(),
        alpha0 in 0.0..5000.0f64,
    ) {
        let ft = setup(&hole, alpha0, &cfg);
        for &t in &ft.transmission {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&t), "T = {t}");
        }
    }

    #[test]
    fn absorption_only_lowers_transmission(cfg in cavity_strategy(), hole in hole_strategy()) {
        // same dispersion, with and without the absorption term
        let p = build_background(BackgroundShape::Flat, 2000.0, 0.0, 1e9)
            .unwrap()
            .burn_hole(&HoleSpec { residual: hole.residual * 2000.0, ..hole })
            .unwrap();
        let grid = FrequencyGrid::centered(DEFAULT_CARRIER, 0.0, 6.0 * hole.width, 512).unwrap();
        let disp = kk_analytic(&p, &grid).with_background_index(cfg.background_index);
        let lossy = transfer(&cfg, &p.sample(&grid), &disp).unwrap();
        let clear = transfer(&cfg, &vec![0.0; grid.len()], &disp).unwrap();
        for (a, b) in lossy.transmission.iter().zip(&clear.transmission) {
            prop_assert!(*a <= b * (1.0 + 1e-12));
        }
    }

    #[test]
    fn propagation_is_passive_and_linear(
        hole in hole_strategy(),
        scale in -3.0..3.0f64,
        shift in -0.3..0.3f64,
    ) {
        let cfg = CavityConfig::default();
        let ft = setup(&hole, 2000.0, &cfg);
        let fwhm = 4.0 / hole.width;
        let span = 64.0 * fwhm;
        let a = gaussian_pulse(fwhm, 0.0, span, 1024).unwrap();
        let b = gaussian_pulse(fwhm, shift * span, span, 1024).unwrap();
        let oa = propagate(&a, &ft).unwrap();
        let ob = propagate(&b, &ft).unwrap();
        prop_assert!(oa.energy() <= a.energy() * (1.0 + 1e-9));

        let mix: Vec<Complex64> = a.field.iter().zip(&b.field).map(|(x, y)| x * scale + y).collect();
        let om = propagate(&PulseEnvelope::new(a.start, a.dt, mix).unwrap(), &ft).unwrap();
        let peak = oa.field.iter().chain(&ob.field).map(|z| z.norm()).fold(0.0, f64::max);
        for ((m, x), y) in om.field.iter().zip(&oa.field).zip(&ob.field) {
            prop_assert!((m - (x * scale + y)).norm() <= 1e-9 * peak * (1.0 + scale.abs()));
        }
    }

    #[test]
    fn adjacent_modes_differ_by_one_order(hole in hole_strategy()) {
        let cfg = CavityConfig::default();
        let p = build_background(BackgroundShape::Flat, 3750.0, 0.0, 1e9)
            .unwrap()
            .burn_hole(&HoleSpec { residual: 0.0, ..hole })
            .unwrap();
        let grid = FrequencyGrid::centered(DEFAULT_CARRIER, 0.0, hole.width, 1 << 14).unwrap();
        let sim = simulate(&p, &grid, &cfg, 0.01).unwrap();
        for w in sim.modes.rows.windows(2) {
            prop_assert_eq!(w[1].mode_number - w[0].mode_number, 1);
            prop_assert!(w[1].center > w[0].center);
        }
    }
}

#[test]
fn empty_cavity_modes_sit_one_fsr_apart() {
    let cfg = CavityConfig::default();
    let p = build_background(BackgroundShape::Flat, 0.0, 0.0, 1e11).unwrap();
    let grid = FrequencyGrid::centered(DEFAULT_CARRIER, 0.0, 40e9, 1 << 14).unwrap();
    let disp = kk_analytic(&p, &grid).with_background_index(cfg.background_index);
    let ft = transfer(&cfg, &p.sample(&grid), &disp).unwrap();
    let modes = find_modes(&ft, 0.5);
    assert!(modes.len() >= 2);
    for w in modes.rows.windows(2) {
        let s = w[1].center - w[0].center;
        assert!((s / cfg.empty_fsr() - 1.0).abs() < 1e-4, "spacing {s}");
    }
    for r in &modes.rows {
        let w = r.fwhm.unwrap();
        assert!((w / 1e9 - 1.0).abs() < 1e-2, "fwhm {w}");
        assert!((r.peak_t / cfg.empty_peak_transmission() - 1.0).abs() < 1e-3);
    }
}

#[test]
fn window_delays_the_pulse() {
    let cfg = CavityConfig {
        length: 12e-3,
        ..CavityConfig::default()
    };
    let p = build_background(BackgroundShape::Flat, 300.0, 0.0, 1e9)
        .unwrap()
        .burn_hole(&HoleSpec::ramped(0.0, 18e6, 0.0, 2e6))
        .unwrap();
    // a single pass: no mirrors, so compare the group delay through the medium
    let grid = FrequencyGrid::centered(DEFAULT_CARRIER, 0.0, 200e6, 4096).unwrap();
    let disp = kk_analytic(&p, &grid);
    let alpha = p.sample(&grid);
    let t: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            let phase = 2.0 * std::f64::consts::PI * grid.point(i) * cfg.length * disp.delta_n[i]
                / slowcav::SPEED_OF_LIGHT
                + 2.0 * std::f64::consts::PI * DEFAULT_CARRIER * cfg.length * disp.delta_n[i]
                    / slowcav::SPEED_OF_LIGHT;
            Complex64::from_polar((-0.5 * alpha[i] * cfg.length).exp(), phase)
        })
        .collect();
    let ft = slowcav::FieldTransfer {
        grid,
        transmission: t.iter().map(|z| z.norm_sqr()).collect(),
        t,
        order: vec![0.0; grid.len()],
    };
    let input = gaussian_pulse(200e-9, 0.0, 4e-6, 4096).unwrap();
    let out = propagate(&input, &ft).unwrap();
    let centroid = |p: &PulseEnvelope| {
        let y = p.intensity();
        let m: f64 = y.iter().enumerate().map(|(i, v)| p.time(i) * v).sum();
        m / y.iter().sum::<f64>()
    };
    let ng = slowcav::kk::group_index_exact(&p, DEFAULT_CARRIER, 0.0, 0.0);
    let expected = ng * cfg.length / slowcav::SPEED_OF_LIGHT;
    let delay = centroid(&out) - centroid(&input);
    assert!(delay > 0.0);
    assert!((delay / expected - 1.0).abs() < 0.02, "delay {delay} expected {expected}");
}
