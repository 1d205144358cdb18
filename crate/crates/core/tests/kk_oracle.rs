//! Closed-form dispersion against an independent adaptive Gauss-Kronrod
//! principal-value quadrature.
#![allow(clippy::excessive_precision)]

use approx::assert_relative_eq;
use proptest::prelude::*;
use slowcav::kk::{group_index_exact, kk_analytic, kk_numeric, kk_scale, PrincipalValue};
use slowcav::profile::build_background;
use slowcav::{AbsorptionProfile, BackgroundShape, FrequencyGrid, HoleSpec, DEFAULT_CARRIER};

const ORACLE_RTOL: f64 = 1e-10;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One G7-K15 panel: (kronrod estimate, |kronrod - gauss|).
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (k, err) = gk15(f, a, b);
    // stop at the roundoff floor as well as at the requested tolerance
    if err <= tol.max(1e-14 * k.abs()) || depth == 0 {
        return k;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth - 1) + adapt(f, m, b, 0.5 * tol, depth - 1)
}

/// `PV int alpha(x) / (x - nu) dx` over the real line for a profile whose
/// two constant tails are equal. The tail constant integrates to zero, the
/// pole is removed by subtracting `h(nu)`, and the range is split at every
/// breakpoint and at `nu`.
fn pv_oracle(p: &AbsorptionProfile, nu: f64) -> f64 {
    let (e_lo, e_hi) = p.end_values();
    assert_eq!(e_lo, e_hi, "oracle needs equal tails");
    let (a, b) = p.span();
    let h = |x: f64| p.value(x) - e_lo;
    let inside = nu > a && nu < b;
    let h0 = if inside { h(nu) } else { 0.0 };
    let g = move |x: f64| {
        let d = x - nu;
        if d == 0.0 {
            0.0
        } else {
            (h(x) - h0) / d
        }
    };
    let mut cuts: Vec<f64> = p.knots().iter().map(|k| k.x).collect();
    if inside {
        cuts.push(nu);
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();

    // crude magnitude for the absolute tolerance
    let scale: f64 = cuts
        .windows(2)
        .map(|w| gk15(&g, w[0], w[1]).0.abs())
        .sum::<f64>()
        .max(1e-300);
    let tol = ORACLE_RTOL * scale;
    let n = (cuts.len() - 1) as f64;
    let mut total: f64 = cuts
        .windows(2)
        .map(|w| adapt(&g, w[0], w[1], tol / n, 40))
        .sum();
    if inside {
        total += h0 * ((b - nu) / (nu - a)).ln();
    }
    total
}

/// Derivative of the oracle by Richardson-extrapolated central differences.
fn pv_oracle_slope(p: &AbsorptionProfile, nu: f64, h: f64) -> f64 {
    let d = |h: f64| (pv_oracle(p, nu + h) - pv_oracle(p, nu - h)) / (2.0 * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

fn flat(alpha: f64) -> AbsorptionProfile {
    build_background(BackgroundShape::Flat, alpha, 0.0, 2e8).unwrap()
}

fn close_to_oracle(p: &AbsorptionProfile, probes: &[f64]) {
    let pv = PrincipalValue::new(p);
    for &nu in probes {
        let want = pv_oracle(p, nu);
        let got = pv.value(nu);
        let peak = p.knots().iter().map(|k| k.left.max(k.right)).fold(0.0, f64::max);
        let scale = want.abs().max(1e-3 * peak);
        assert!(
            (got - want).abs() <= 1e-8 * scale,
            "nu = {nu}: closed form {got} vs quadrature {want}"
        );
    }
}

#[test]
fn square_hole_matches_quadrature() {
    let p = flat(3750.0).burn_hole(&HoleSpec::square(0.0, 1e6, 0.0)).unwrap();
    close_to_oracle(&p, &[0.0, 1.3e5, -2.7e5, 4.9e5, 7e5, -3e6, 2.5e7]);
}

#[test]
fn ramped_hole_with_residual_matches_quadrature() {
    let p = flat(2000.0)
        .burn_hole(&HoleSpec::ramped(1e6, 18e6, 40.0, 0.5e6))
        .unwrap();
    close_to_oracle(&p, &[1e6, 3.3e6, -7.6e6, 9.7e6, 11e6, -4e7]);
}

#[test]
fn gaussian_line_with_hole_matches_quadrature() {
    let p = build_background(BackgroundShape::Gaussian, 3750.0, 9e9, 4e10)
        .unwrap()
        .burn_hole(&HoleSpec::ramped(0.0, 18e6, 0.0, 1.5e6))
        .unwrap();
    close_to_oracle(&p, &[0.0, 2e6, -5e6, 8.2e6, 3e9, -6.1e9]);
}

#[test]
fn slope_matches_quadrature_derivative() {
    let cases = [
        (flat(3750.0).burn_hole(&HoleSpec::square(0.0, 1e6, 0.0)).unwrap(), 1e6),
        (
            flat(2000.0).burn_hole(&HoleSpec::ramped(0.0, 18e6, 0.0, 0.5e6)).unwrap(),
            18e6,
        ),
    ];
    for (p, gamma) in &cases {
        let pv = PrincipalValue::new(p);
        for frac in [0.0, 0.17, -0.31] {
            let nu = frac * gamma;
            let want = pv_oracle_slope(p, nu, gamma / 200.0);
            assert_relative_eq!(pv.slope(nu), want, max_relative = 1e-6);
        }
    }
}

#[test]
fn square_hole_center_group_index() {
    // slope 4 alpha0 / Gamma at the center, so n_g - n_bg = c alpha0 / (pi^2 Gamma)
    let c = slowcav::SPEED_OF_LIGHT;
    let pi2 = std::f64::consts::PI.powi(2);
    for (alpha0, gamma) in [(2000.0, 18e6), (3750.0, 1e6), (3750.0, 3e6)] {
        let p = flat(alpha0).burn_hole(&HoleSpec::square(0.0, gamma, 0.0)).unwrap();
        let ng = group_index_exact(&p, DEFAULT_CARRIER, 1.8, 0.0);
        assert_relative_eq!(ng - 1.8, c * alpha0 / (pi2 * gamma), max_relative = 1e-9);
    }
    let p = flat(3750.0).burn_hole(&HoleSpec::square(0.0, 1e6, 0.0)).unwrap();
    let slope = pv_oracle_slope(&p, 0.0, 5e3);
    assert_relative_eq!(slope, 4.0 * 3750.0 / 1e6, max_relative = 1e-6);
}

#[test]
fn numeric_path_agrees_with_closed_form() {
    let gamma = 18e6;
    let p = flat(2000.0).burn_hole(&HoleSpec::square(0.0, gamma, 0.0)).unwrap();
    let grid = FrequencyGrid::centered(DEFAULT_CARRIER, 0.0, 2e9, 1 << 20).unwrap();
    let alpha = p.sample(&grid);
    let exact = kk_analytic(&p, &grid);
    let num = kk_numeric(&alpha, &grid).unwrap();
    let k = kk_scale(DEFAULT_CARRIER);
    let peak = exact.delta_n.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let step = grid.step();
    let near_edge =
        |x: f64| (x - gamma / 2.0).abs() < 50.0 * step || (x + gamma / 2.0).abs() < 50.0 * step;
    // compare over the central tenth of the record, away from the taper
    let lo = grid.len() * 9 / 20;
    let hi = grid.len() * 11 / 20;
    for i in lo..hi {
        let x = grid.point(i);
        if near_edge(x) {
            continue;
        }
        assert!(
            (num.delta_n[i] - exact.delta_n[i]).abs() <= 1e-3 * peak,
            "dn at {x}: {} vs {}",
            num.delta_n[i],
            exact.delta_n[i]
        );
    }
    let c = grid.len() / 2;
    assert_relative_eq!(num.group_index[c], exact.group_index[c], max_relative = 1e-3);
    assert!(k > 0.0);
}

fn hole_strategy() -> impl Strategy<Value = HoleSpec> {
    (1e5..5e7f64, 0.0..1.0f64, 0.0..0.5f64).prop_map(|(w, r, ramp)| {
        HoleSpec::ramped(0.0, w, r * 1000.0, ramp * w)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dispersion_is_linear_in_alpha(hole in hole_strategy(), factor in 0.0..5.0f64) {
        let p = flat(1000.0).burn_hole(&hole).unwrap();
        let q = p.scaled(factor).unwrap();
        let grid = FrequencyGrid::centered(DEFAULT_CARRIER, 0.0, 4.0 * hole.width, 256).unwrap();
        let a = kk_analytic(&p, &grid);
        let b = kk_analytic(&q, &grid);
        let peak = a.delta_n.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in a.delta_n.iter().zip(&b.delta_n) {
            prop_assert!((factor * x - y).abs() <= 1e-9 * peak * factor.max(1.0));
        }
        let na = kk_numeric(&p.sample(&grid), &grid).unwrap();
        let nb = kk_numeric(&q.sample(&grid), &grid).unwrap();
        for (x, y) in na.delta_n.iter().zip(&nb.delta_n) {
            prop_assert!((factor * x - y).abs() <= 1e-9 * peak * factor.max(1.0));
        }
    }

    #[test]
    fn symmetric_hole_gives_odd_index(hole in hole_strategy(), probe in 0.0..2.0f64) {
        let p = flat(1000.0).burn_hole(&hole).unwrap();
        let pv = PrincipalValue::new(&p);
        let nu = probe * hole.width;
        let (plus, minus) = (pv.value(nu), pv.value(-nu));
        let scale = plus.abs().max(minus.abs()).max(1e-6);
        prop_assert!((plus + minus).abs() <= 1e-9 * scale);
        // slope is even
        let (sp, sm) = (pv.slope(nu), pv.slope(-nu));
        prop_assert!((sp - sm).abs() <= 1e-9 * sp.abs().max(sm.abs()).max(1e-12));
    }

    #[test]
    fn hole_always_raises_group_index(hole in hole_strategy()) {
        let p = flat(1000.0).burn_hole(&hole).unwrap();
        prop_assert!(group_index_exact(&p, DEFAULT_CARRIER, 1.8, 0.0) > 1.8);
    }
}

#[test]
fn kronrod_rule_is_exact_for_polynomials() {
    for deg in 0..=22 {
        let (k, _) = gk15(&|x: f64| x.powi(deg), 0.0, 1.0);
        assert_relative_eq!(k, 1.0 / (deg as f64 + 1.0), max_relative = 1e-13);
    }
}
