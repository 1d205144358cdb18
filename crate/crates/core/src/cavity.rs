//! Dispersive Fabry-Perot transmission and resonance extraction.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::FrequencyGrid;
use crate::kk::DispersionProfile;
use crate::{DEFAULT_BACKGROUND_INDEX, SPEED_OF_LIGHT};

/// Measured linewidth of the empty crystal cavity (Hz), used to calibrate the
/// default excess round-trip loss.
pub const EMPTY_CAVITY_LINEWIDTH: f64 = 1e9;

/// Largest distance of `2 L nu n / c` from an integer at an accepted
/// resonance. Broad maxima shaped by a sloping loss sit far from the phase
/// condition and are discarded.
pub const MAX_ORDER_RESIDUAL: f64 = 0.25;

/// Crystal etalon parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityConfig {
    /// Physical length (m).
    pub length: f64,
    /// Input mirror intensity reflectivity.
    pub r1: f64,
    /// Output mirror intensity reflectivity.
    pub r2: f64,
    /// Host refractive index away from the ion line.
    pub background_index: f64,
    /// Extra intensity transmission factor per round trip, folding in mode
    /// mismatch and other non-absorptive losses.
    pub excess_roundtrip: f64,
}

impl Default for CavityConfig {
    fn default() -> Self {
        let (length, r, n) = (6e-3, 0.95, DEFAULT_BACKGROUND_INDEX);
        let excess_roundtrip =
            calibrate_excess_loss(length, r, r, n, EMPTY_CAVITY_LINEWIDTH).unwrap_or(1.0);
        Self {
            length,
            r1: r,
            r2: r,
            background_index: n,
            excess_roundtrip,
        }
    }
}

impl CavityConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.length.is_finite() && self.length > 0.0) {
            v.push("cavity.length must be positive".to_string());
        }
        for (name, r) in [("cavity.r1", self.r1), ("cavity.r2", self.r2)] {
            if !(r > 0.0 && r < 1.0) {
                v.push(format!("{name} must lie strictly between 0 and 1"));
            }
        }
        if !(self.background_index.is_finite() && self.background_index > 0.0) {
            v.push("cavity.background_index must be positive".to_string());
        }
        if !(self.excess_roundtrip > 0.0 && self.excess_roundtrip <= 1.0) {
            v.push("cavity.excess_roundtrip must lie in (0, 1]".to_string());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            Some(m) => Err(invalid(m)),
            None => Ok(()),
        }
    }

    /// Field amplitude left after one lossless-medium round trip.
    pub fn round_trip_amplitude(&self) -> f64 {
        (self.r1 * self.r2 * self.excess_roundtrip).sqrt()
    }

    /// Intensity fraction kept per round trip, `R1 R2 A`.
    pub fn round_trip_intensity(&self) -> f64 {
        self.r1 * self.r2 * self.excess_roundtrip
    }

    /// Free spectral range without dispersion, `c / (2 n L)`.
    pub fn empty_fsr(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.background_index * self.length)
    }

    /// Airy linewidth without dispersion or absorption.
    pub fn empty_fwhm(&self) -> f64 {
        self.empty_fsr() * airy_fwhm_fraction(self.round_trip_amplitude())
    }

    /// Peak transmission without absorption.
    pub fn empty_peak_transmission(&self) -> f64 {
        let g = self.round_trip_amplitude();
        (1.0 - self.r1) * (1.0 - self.r2) * self.excess_roundtrip / ((1.0 - g) * (1.0 - g))
    }
}

/// Airy FWHM as a fraction of the free spectral range for round-trip field
/// amplitude `g`.
pub fn airy_fwhm_fraction(g: f64) -> f64 {
    2.0 / PI * ((1.0 - g) / (2.0 * g.sqrt())).asin()
}

/// Excess round-trip factor `A` giving an empty-cavity linewidth `fwhm`.
pub fn calibrate_excess_loss(
    length: f64,
    r1: f64,
    r2: f64,
    background_index: f64,
    fwhm: f64,
) -> Result<f64> {
    let fsr = SPEED_OF_LIGHT / (2.0 * background_index * length);
    if !(fwhm > 0.0 && fwhm < fsr) {
        return Err(invalid("target linewidth must lie between 0 and the free spectral range"));
    }
    // (1 - g) / (2 sqrt g) = s with u = sqrt g:  u^2 + 2 s u - 1 = 0
    let s = (PI * fwhm / (2.0 * fsr)).sin();
    let u = -s + (s * s + 1.0).sqrt();
    let g = u * u;
    let a = g * g / (r1 * r2);
    if a > 1.0 {
        return Err(invalid("mirrors cannot reach the target linewidth"));
    }
    Ok(a)
}

/// `2 L nu n(nu) / c` at a detuning: the (non-integer) longitudinal order.
pub fn resonance_order(detuning: f64, disp: &DispersionProfile, cfg: &CavityConfig) -> f64 {
    let nu = disp.grid.carrier() + detuning;
    let n = cfg.background_index + disp.delta_n_at(detuning);
    2.0 * cfg.length * nu * n / SPEED_OF_LIGHT
}

/// Nearest integer mode number at a detuning, and the distance to it.
pub fn mode_number(detuning: f64, disp: &DispersionProfile, cfg: &CavityConfig) -> (i64, f64) {
    let order = resonance_order(detuning, disp, cfg);
    let m = order.round();
    (m as i64, (order - m).abs())
}

/// Complex field transmission of the etalon on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTransfer {
    pub grid: FrequencyGrid,
    pub t: Vec<Complex64>,
    /// `|t|^2`
    pub transmission: Vec<f64>,
    /// `2 L nu n(nu) / c` per grid point.
    pub order: Vec<f64>,
}

impl FieldTransfer {
    /// CSV `detuning_Hz,T,re_t,im_t`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("detuning_Hz,T,re_t,im_t\n");
        for i in 0..self.grid.len() {
            s.push_str(&format!(
                "{:.6},{:.12e},{:.12e},{:.12e}\n",
                self.grid.point(i),
                self.transmission[i],
                self.t[i].re,
                self.t[i].im
            ));
        }
        s
    }

    /// Linear interpolation of the complex transmission, holding the end
    /// values beyond the grid.
    pub fn interpolate(&self, detuning: f64) -> Complex64 {
        let pos = self.grid.position(detuning);
        let last = self.grid.len() - 1;
        if pos <= 0.0 {
            return self.t[0];
        }
        if pos >= last as f64 {
            return self.t[last];
        }
        let i = pos.floor() as usize;
        let f = pos - i as f64;
        self.t[i] * (1.0 - f) + self.t[i + 1] * f
    }
}

/// `t = sqrt((1-R1)(1-R2)A) e^{i phi - aL/2} / (1 - sqrt(R1 R2 A) e^{2 i phi - aL})`
/// with `phi = 2 pi nu n(nu) L / c` and `n = n_bg + dn`.
pub fn transfer(
    cfg: &CavityConfig,
    alpha: &[f64],
    disp: &DispersionProfile,
) -> Result<FieldTransfer> {
    cfg.validate()?;
    let grid = disp.grid;
    if alpha.len() != grid.len() || disp.delta_n.len() != grid.len() {
        return Err(invalid("absorption and dispersion must share the grid"));
    }
    let pref = ((1.0 - cfg.r1) * (1.0 - cfg.r2) * cfg.excess_roundtrip).sqrt();
    let g = cfg.round_trip_amplitude();
    let mut t = Vec::with_capacity(grid.len());
    let mut transmission = Vec::with_capacity(grid.len());
    let mut order = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let n = cfg.background_index + disp.delta_n[i];
        let ord = 2.0 * cfg.length * grid.frequency(i) * n / SPEED_OF_LIGHT;
        // phi = pi * order; reduce first so the phase keeps full precision
        let phi = PI * ord.rem_euclid(2.0);
        let loss = alpha[i] * cfg.length;
        let single = Complex64::from_polar((-0.5 * loss).exp(), phi);
        let round = Complex64::from_polar(g * (-loss).exp(), 2.0 * phi);
        let ti = pref * single / (1.0 - round);
        t.push(ti);
        transmission.push(ti.norm_sqr());
        order.push(ord);
    }
    Ok(FieldTransfer {
        grid,
        t,
        transmission,
        order,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeRow {
    /// Resonance center (Hz detuning).
    pub center: f64,
    /// Full width at half maximum; `None` when a half-maximum crossing falls
    /// outside the grid.
    pub fwhm: Option<f64>,
    pub peak_t: f64,
    /// Distance to the next resonance; `None` for the last row.
    pub spacing_to_next: Option<f64>,
    pub mode_number: i64,
    /// Non-integer order `2 L nu n / c` at the center.
    pub order: f64,
}

impl ModeRow {
    pub fn residual(&self) -> f64 {
        (self.order - self.mode_number as f64).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ModeTable {
    pub rows: Vec<ModeRow>,
}

impl ModeTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows with centers inside `[lo, hi]`.
    pub fn within(&self, lo: f64, hi: f64) -> Vec<&ModeRow> {
        self.rows
            .iter()
            .filter(|r| r.center >= lo && r.center <= hi)
            .collect()
    }

    /// Index of the adjacent pair whose midpoint lies closest to `detuning`.
    pub fn pair_nearest(&self, detuning: f64) -> Option<usize> {
        (0..self.rows.len().saturating_sub(1)).min_by(|&a, &b| {
            let mid = |i: usize| 0.5 * (self.rows[i].center + self.rows[i + 1].center);
            (mid(a) - detuning)
                .abs()
                .partial_cmp(&(mid(b) - detuning).abs())
                .unwrap()
        })
    }

    /// CSV `center_Hz,fwhm_Hz,peak_T,spacing_Hz,mode_number`; missing values
    /// are left empty.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        let mut s = String::from("center_Hz,fwhm_Hz,peak_T,spacing_Hz,mode_number\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{:.6},{},{:.12e},{},{}\n",
                r.center,
                opt(r.fwhm),
                r.peak_t,
                opt(r.spacing_to_next),
                r.mode_number
            ));
        }
        s
    }
}

/// Half-maximum crossing walking from `peak` in direction `dir`, linearly
/// interpolated between samples.
fn half_crossing(y: &[f64], x: impl Fn(usize) -> f64, peak: usize, half: f64, dir: isize) -> Option<f64> {
    let mut j = peak as isize;
    loop {
        let next = j + dir;
        if next < 0 || next as usize >= y.len() {
            return None;
        }
        let (a, b) = (j as usize, next as usize);
        if y[b] < half {
            let f = (y[a] - half) / (y[a] - y[b]);
            return Some(x(a) + f * (x(b) - x(a)));
        }
        j = next;
    }
}

/// Transmission peaks above `min_peak_fraction` of the global maximum whose
/// order lies within [`MAX_ORDER_RESIDUAL`] of an integer.
///
/// Centers are refined with a parabola through the reciprocal transmission of
/// the three samples around each local maximum; widths come from linearly interpolated half-maximum
/// crossings.
pub fn find_modes(ft: &FieldTransfer, min_peak_fraction: f64) -> ModeTable {
    let y = &ft.transmission;
    let n = y.len();
    let grid = ft.grid;
    let global = y.iter().copied().fold(0.0, f64::max);
    if n < 3 || global <= 0.0 {
        return ModeTable::default();
    }
    let threshold = min_peak_fraction * global;
    let h = grid.step();
    let mut rows: Vec<ModeRow> = Vec::new();
    for i in 1..n - 1 {
        if !(y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] >= threshold) {
            continue;
        }
        // Near an Airy maximum 1/T is quadratic in detuning.
        let (u0, u1, u2) = (1.0 / y[i - 1], 1.0 / y[i], 1.0 / y[i + 1]);
        let denom = u0 - 2.0 * u1 + u2;
        let p = if denom != 0.0 {
            (0.5 * (u0 - u2) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        let center = grid.point(i) + p * h;
        let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
        let peak_t = y1 + 0.25 * (y2 - y0) * p + 0.5 * (y0 - 2.0 * y1 + y2) * p * p;
        let half = 0.5 * peak_t;
        let left = half_crossing(y, |k| grid.point(k), i, half, -1);
        let right = half_crossing(y, |k| grid.point(k), i, half, 1);
        let fwhm = match (left, right) {
            (Some(l), Some(r)) => Some(r - l),
            _ => None,
        };
        let pos = grid.position(center);
        let k = (pos.floor() as usize).min(n - 2);
        let f = pos - k as f64;
        let order = ft.order[k] + f * (ft.order[k + 1] - ft.order[k]);
        if (order - order.round()).abs() > MAX_ORDER_RESIDUAL {
            continue;
        }
        rows.push(ModeRow {
            center,
            fwhm,
            peak_t,
            spacing_to_next: None,
            mode_number: order.round() as i64,
            order,
        });
    }
    for i in 0..rows.len().saturating_sub(1) {
        rows[i].spacing_to_next = Some(rows[i + 1].center - rows[i].center);
    }
    ModeTable { rows }
}
