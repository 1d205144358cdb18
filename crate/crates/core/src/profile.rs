//! Engineered absorption profiles.
//!
//! An [`AbsorptionProfile`] is a piecewise-linear intensity absorption
//! coefficient `alpha(nu)` (m^-1) over detuning (Hz). Each breakpoint carries
//! a left and a right limit so square hole edges are represented exactly as
//! jumps; between breakpoints the profile is linear and beyond the outermost
//! breakpoints it is held constant. This closed form is what lets the
//! Kramers-Kronig stage evaluate the dispersion analytically.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::FrequencyGrid;

/// Breakpoint of a piecewise-linear profile. `left == right` for a continuous
/// point; otherwise the profile jumps from `left` to `right` at `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knot {
    pub x: f64,
    pub left: f64,
    pub right: f64,
}

impl Knot {
    pub fn continuous(x: f64, value: f64) -> Self {
        Self {
            x,
            left: value,
            right: value,
        }
    }

    pub fn jump(&self) -> f64 {
        self.right - self.left
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackgroundShape {
    Flat,
    Gaussian,
}

/// A burned transmission window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoleSpec {
    /// Window center (Hz detuning).
    pub center: f64,
    /// Full width of the window including the edge ramps (Hz).
    pub width: f64,
    /// Absorption left inside the window (m^-1).
    pub residual: f64,
    /// Width of the linear edge on each side (Hz); zero gives a square hole.
    #[serde(default)]
    pub edge_ramp: f64,
}

impl HoleSpec {
    pub fn square(center: f64, width: f64, residual: f64) -> Self {
        Self {
            center,
            width,
            residual,
            edge_ramp: 0.0,
        }
    }

    pub fn ramped(center: f64, width: f64, residual: f64, edge_ramp: f64) -> Self {
        Self {
            center,
            width,
            residual,
            edge_ramp,
        }
    }

    /// Every violated invariant, as human-readable messages.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.center.is_finite() {
            out.push("hole.center must be finite".to_string());
        }
        if !(self.width.is_finite() && self.width > 0.0) {
            out.push("hole.width must be positive".to_string());
        }
        if !(self.residual.is_finite() && self.residual >= 0.0) {
            out.push("hole.residual must be non-negative".to_string());
        }
        if !(self.edge_ramp.is_finite() && self.edge_ramp >= 0.0) {
            out.push("hole.edge_ramp must be non-negative".to_string());
        } else if self.width > 0.0 && self.edge_ramp > self.width / 2.0 {
            out.push("hole.edge_ramp must not exceed half the hole width".to_string());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            Some(msg) => Err(invalid(msg)),
            None => Ok(()),
        }
    }

    pub fn lower_edge(&self) -> f64 {
        self.center - self.width / 2.0
    }

    pub fn upper_edge(&self) -> f64 {
        self.center + self.width / 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionProfile {
    knots: Vec<Knot>,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

impl AbsorptionProfile {
    pub fn new(knots: Vec<Knot>) -> Result<Self> {
        if knots.is_empty() {
            return Err(invalid("profile needs at least one breakpoint"));
        }
        for k in &knots {
            if !k.x.is_finite() || !k.left.is_finite() || !k.right.is_finite() {
                return Err(invalid("profile breakpoints must be finite"));
            }
            if k.left < 0.0 || k.right < 0.0 {
                return Err(invalid("profile absorption must be non-negative"));
            }
        }
        if knots.windows(2).any(|w| w[1].x <= w[0].x) {
            return Err(invalid("profile breakpoints must be strictly increasing"));
        }
        Ok(Self { knots })
    }

    /// Continuous profile through `(x, alpha)` pairs.
    pub fn from_points(xs: &[f64], alphas: &[f64]) -> Result<Self> {
        if xs.len() != alphas.len() {
            return Err(invalid("profile breakpoints and values differ in length"));
        }
        Self::new(
            xs.iter()
                .zip(alphas)
                .map(|(&x, &a)| Knot::continuous(x, a))
                .collect(),
        )
    }

    pub fn flat(alpha: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::from_points(&[lo, hi], &[alpha, alpha])
    }

    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    /// Detuning range covered by breakpoints.
    pub fn span(&self) -> (f64, f64) {
        (self.knots[0].x, self.knots[self.knots.len() - 1].x)
    }

    /// Constant values held beyond the first and last breakpoints.
    pub fn end_values(&self) -> (f64, f64) {
        (self.knots[0].left, self.knots[self.knots.len() - 1].right)
    }

    /// Left and right limits at `x`.
    pub fn limits(&self, x: f64) -> (f64, f64) {
        let k = &self.knots;
        // first knot with k.x >= x
        let i = k.partition_point(|kn| kn.x < x);
        if i < k.len() && k[i].x == x {
            return (k[i].left, k[i].right);
        }
        let v = if i == 0 {
            k[0].left
        } else if i == k.len() {
            k[k.len() - 1].right
        } else {
            let (a, b) = (&k[i - 1], &k[i]);
            let t = (x - a.x) / (b.x - a.x);
            a.right + t * (b.left - a.right)
        };
        (v, v)
    }

    /// Profile value at `x`; at a jump the mean of both limits.
    pub fn value(&self, x: f64) -> f64 {
        let (l, r) = self.limits(x);
        0.5 * (l + r)
    }

    /// Exact evaluation at every grid detuning.
    pub fn sample(&self, grid: &FrequencyGrid) -> Vec<f64> {
        let k = &self.knots;
        let mut out = Vec::with_capacity(grid.len());
        let mut j = 0; // first knot with x >= current detuning
        for i in 0..grid.len() {
            let x = grid.point(i);
            while j < k.len() && k[j].x < x {
                j += 1;
            }
            let v = if j < k.len() && k[j].x == x {
                0.5 * (k[j].left + k[j].right)
            } else if j == 0 {
                k[0].left
            } else if j == k.len() {
                k[k.len() - 1].right
            } else {
                let (a, b) = (&k[j - 1], &k[j]);
                let t = (x - a.x) / (b.x - a.x);
                a.right + t * (b.left - a.right)
            };
            out.push(v);
        }
        out
    }

    /// Profile multiplied by a non-negative constant.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor >= 0.0) {
            return Err(invalid("profile scale factor must be non-negative"));
        }
        Self::new(
            self.knots
                .iter()
                .map(|k| Knot {
                    x: k.x,
                    left: k.left * factor,
                    right: k.right * factor,
                })
                .collect(),
        )
    }

    /// Pointwise sum of two profiles.
    pub fn sum(&self, other: &Self) -> Self {
        let mut xs: Vec<f64> = self
            .knots
            .iter()
            .chain(other.knots.iter())
            .map(|k| k.x)
            .collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();
        let knots = xs
            .into_iter()
            .map(|x| {
                let (al, ar) = self.limits(x);
                let (bl, br) = other.limits(x);
                Knot {
                    x,
                    left: al + bl,
                    right: ar + br,
                }
            })
            .collect();
        Self { knots }.canonical()
    }

    /// Burns a transmission window: inside the flat part the absorption drops
    /// to `hole.residual`, the edges ramp linearly back to the profile value at
    /// the window boundary, and the result never exceeds the original.
    pub fn burn_hole(&self, hole: &HoleSpec) -> Result<Self> {
        hole.validate()?;
        let lo = hole.lower_edge();
        let hi = hole.upper_edge();
        let (first, last) = self.span();
        if lo < first || hi > last {
            return Err(invalid("hole window must lie within the profile span"));
        }
        let bg_lo = self.limits(lo).0;
        let bg_hi = self.limits(hi).1;
        if hole.residual > bg_lo.max(bg_hi) * (1.0 + 1e-12) {
            return Err(invalid("hole.residual exceeds the local background"));
        }

        // Window shape: +inf outside [lo, hi].
        let r = hole.edge_ramp;
        let window: Vec<(f64, f64)> = if r == 0.0 {
            vec![(lo, hole.residual), (hi, hole.residual)]
        } else if lo + r >= hi - r {
            vec![(lo, bg_lo), (hole.center, hole.residual), (hi, bg_hi)]
        } else {
            vec![
                (lo, bg_lo),
                (lo + r, hole.residual),
                (hi - r, hole.residual),
                (hi, bg_hi),
            ]
        };
        let win_value = |x: f64| -> f64 {
            let i = window.partition_point(|w| w.0 < x);
            if i < window.len() && window[i].0 == x {
                return window[i].1;
            }
            let (a, b) = (window[i - 1], window[i]);
            a.1 + (x - a.0) / (b.0 - a.0) * (b.1 - a.1)
        };
        let win_limits = |x: f64| -> (f64, f64) {
            let v = win_value(x);
            let l = if x == lo { f64::INFINITY } else { v };
            let r = if x == hi { f64::INFINITY } else { v };
            (l, r)
        };

        let mut xs: Vec<f64> = self
            .knots
            .iter()
            .map(|k| k.x)
            .filter(|&x| x > lo && x < hi)
            .chain(window.iter().map(|w| w.0))
            .collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();

        let mut inner: Vec<Knot> = Vec::with_capacity(xs.len() * 2);
        for (idx, &x) in xs.iter().enumerate() {
            let (fl, fr) = self.limits(x);
            let (gl, gr) = win_limits(x);
            inner.push(Knot {
                x,
                left: fl.min(gl),
                right: fr.min(gr),
            });
            if let Some(&b) = xs.get(idx + 1) {
                // both are linear on (x, b); add the crossing if they swap order
                let da = fr - gr;
                let db = self.limits(b).0 - win_limits(b).0;
                if da * db < 0.0 {
                    let t = da / (da - db);
                    let xc = x + t * (b - x);
                    if xc > x && xc < b {
                        let v = win_value(xc).min(self.limits(xc).0);
                        inner.push(Knot::continuous(xc, v));
                    }
                }
            }
        }

        let mut knots: Vec<Knot> = self.knots.iter().filter(|k| k.x < lo).copied().collect();
        knots.extend(inner);
        knots.extend(self.knots.iter().filter(|k| k.x > hi).copied());
        Ok(Self { knots }.canonical())
    }

    /// Drops breakpoints that carry no information (continuous and collinear
    /// with both neighbours). The outermost breakpoints are always kept.
    fn canonical(self) -> Self {
        let k = self.knots;
        if k.len() <= 2 {
            return Self { knots: k };
        }
        let mut out: Vec<Knot> = Vec::with_capacity(k.len());
        out.push(k[0]);
        for i in 1..k.len() - 1 {
            let cur = k[i];
            let prev = *out.last().unwrap();
            let next = k[i + 1];
            if close(cur.left, cur.right) {
                let s_in = (cur.left - prev.right) / (cur.x - prev.x);
                let s_out = (next.left - cur.right) / (next.x - cur.x);
                if (s_in - s_out).abs() <= 1e-10 * s_in.abs().max(s_out.abs()) {
                    continue;
                }
            }
            out.push(cur);
        }
        out.push(k[k.len() - 1]);
        Self { knots: out }
    }

    /// Two-column CSV `detuning_Hz,alpha_per_m` of the profile on a grid.
    pub fn to_csv(&self, grid: &FrequencyGrid) -> String {
        let alpha = self.sample(grid);
        let mut s = String::from("detuning_Hz,alpha_per_m\n");
        for (i, a) in alpha.iter().enumerate() {
            s.push_str(&format!("{:.6},{:.9e}\n", grid.point(i), a));
        }
        s
    }

    /// Continuous profile from a two-column CSV (header line optional).
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut xs = Vec::new();
        let mut alphas = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (a, b) = match (cols.next(), cols.next()) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(invalid(format!("profile csv line {}: expected two columns", lineno + 1))),
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(v)) => {
                    xs.push(x);
                    alphas.push(v);
                }
                _ if xs.is_empty() => continue, // header
                _ => return Err(invalid(format!("profile csv line {}: not a number", lineno + 1))),
            }
        }
        Self::from_points(&xs, &alphas)
    }
}

/// Largest `h` such that linear interpolation of a unit-peak gaussian with
/// standard deviation `sigma` over `[x, x + h]` errs by at most `tol`.
fn gaussian_step(x: f64, sigma: f64, tol: f64) -> f64 {
    let curvature = |u: f64| {
        let z = u / sigma;
        ((z * z - 1.0) * (-0.5 * z * z).exp()).abs() / (sigma * sigma)
    };
    let mut h = sigma;
    for _ in 0..4 {
        let peak = (0..=16)
            .map(|k| curvature(x + h * k as f64 / 16.0))
            .fold(0.0_f64, f64::max);
        let next = (8.0 * tol / peak.max(1e-300)).sqrt();
        if next >= h {
            break;
        }
        h = next;
    }
    h.min(sigma)
}

/// Inhomogeneous background absorption spanning `[-grid_span/2, grid_span/2]`.
///
/// The gaussian is tabulated densely enough that interpolation stays within
/// 0.1% of `peak_alpha` everywhere.
pub fn build_background(
    shape: BackgroundShape,
    peak_alpha: f64,
    fwhm: f64,
    grid_span: f64,
) -> Result<AbsorptionProfile> {
    if !(peak_alpha.is_finite() && peak_alpha >= 0.0) {
        return Err(invalid("background.peak_alpha must be non-negative"));
    }
    if !(grid_span.is_finite() && grid_span > 0.0) {
        return Err(invalid("background span must be positive"));
    }
    let half = grid_span / 2.0;
    match shape {
        BackgroundShape::Flat => AbsorptionProfile::flat(peak_alpha, -half, half),
        BackgroundShape::Gaussian => {
            if !(fwhm.is_finite() && fwhm > 0.0) {
                return Err(invalid("background.fwhm must be positive"));
            }
            let sigma = fwhm / (8.0 * std::f64::consts::LN_2).sqrt();
            // half the allowed error, leaving room for rounding
            let tol = 5e-4;
            let mut pos = vec![0.0];
            let mut x = 0.0;
            while x < half {
                x = (x + gaussian_step(x, sigma, tol)).min(half);
                pos.push(x);
            }
            let value = |u: f64| peak_alpha * (-0.5 * (u / sigma).powi(2)).exp();
            let knots: Vec<Knot> = pos
                .iter()
                .skip(1)
                .rev()
                .map(|&p| -p)
                .chain(pos.iter().copied())
                .map(|u| Knot::continuous(u, value(u)))
                .collect();
            AbsorptionProfile::new(knots)
        }
    }
}
