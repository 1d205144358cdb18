//! Pulse envelopes through the cavity: single-pass frequency-domain filtering
//! and ring-down analysis.
//!
//! Envelopes are baseband at the carrier. A spectral component at detuning
//! `d` evolves as `exp(-2 pi i d t)`, so the cavity phase `exp(+i phi(nu))`
//! with `phi` increasing in frequency is a positive group delay.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::cavity::FieldTransfer;
use crate::error::{invalid, Result};

/// Minimum samples per intensity FWHM accepted by [`gaussian_pulse`].
pub const MIN_SAMPLES_PER_FWHM: f64 = 16.0;

/// Ring-down peaks must exceed this fraction of the largest output intensity.
pub const RING_DOWN_THRESHOLD: f64 = 0.01;

/// Minimum separation between ring-down peaks, in time steps.
pub const RING_DOWN_MIN_SEPARATION: usize = 10;

/// Complex envelope on a uniform time axis `start + k * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseEnvelope {
    pub start: f64,
    pub dt: f64,
    pub field: Vec<Complex64>,
}

impl PulseEnvelope {
    pub fn new(start: f64, dt: f64, field: Vec<Complex64>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid("pulse time step must be positive"));
        }
        if field.len() < 2 {
            return Err(invalid("pulse needs at least two samples"));
        }
        if field.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("pulse field must be finite"));
        }
        Ok(Self { start, dt, field })
    }

    pub fn len(&self) -> usize {
        self.field.len()
    }

    pub fn is_empty(&self) -> bool {
        self.field.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.start + self.dt * k as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.field.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `sum |E|^2 dt`
    pub fn energy(&self) -> f64 {
        self.field.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dt
    }

    /// Energy carried before time `t`.
    pub fn energy_before(&self, t: f64) -> f64 {
        self.field
            .iter()
            .enumerate()
            .take_while(|(k, _)| self.time(*k) < t)
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>()
            * self.dt
    }

    /// Intensity full width at half maximum, from linearly interpolated
    /// crossings around the global peak.
    pub fn intensity_fwhm(&self) -> Option<f64> {
        let y = self.intensity();
        let (peak, &max) = y
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())?;
        let half = 0.5 * max;
        let cross = |dir: isize| -> Option<f64> {
            let mut j = peak as isize;
            loop {
                let nxt = j + dir;
                if nxt < 0 || nxt as usize >= y.len() {
                    return None;
                }
                let (a, b) = (j as usize, nxt as usize);
                if y[b] < half {
                    let f = (y[a] - half) / (y[a] - y[b]);
                    return Some(self.time(a) + f * (self.time(b) - self.time(a)));
                }
                j = nxt;
            }
        };
        Some(cross(1)? - cross(-1)?)
    }

    /// CSV `time_s,intensity,re_field,im_field`; with `normalize` the trace
    /// is scaled to unit peak intensity.
    pub fn to_csv(&self, normalize: bool) -> String {
        let peak = self.intensity().into_iter().fold(0.0, f64::max);
        let scale = if normalize && peak > 0.0 {
            1.0 / peak.sqrt()
        } else {
            1.0
        };
        let mut s = String::from("time_s,intensity,re_field,im_field\n");
        for (k, z) in self.field.iter().enumerate() {
            let z = z * scale;
            s.push_str(&format!(
                "{:.12e},{:.12e},{:.12e},{:.12e}\n",
                self.time(k),
                z.norm_sqr(),
                z.re,
                z.im
            ));
        }
        s
    }
}

/// Gaussian envelope whose intensity has full width `fwhm` at half maximum,
/// peaking at `center`, on `samples` points spanning `[-time_span/2, time_span/2)`.
pub fn gaussian_pulse(fwhm: f64, center: f64, time_span: f64, samples: usize) -> Result<PulseEnvelope> {
    if !(fwhm.is_finite() && fwhm > 0.0) {
        return Err(invalid("pulse.fwhm must be positive"));
    }
    if !(time_span.is_finite() && time_span >= 10.0 * fwhm) {
        return Err(invalid("pulse.time_span must be at least ten pulse widths"));
    }
    if samples < 2 {
        return Err(invalid("pulse.samples must be at least 2"));
    }
    let dt = time_span / samples as f64;
    if fwhm / dt < MIN_SAMPLES_PER_FWHM {
        return Err(invalid("pulse is undersampled: fewer than 16 samples per fwhm"));
    }
    let start = -0.5 * time_span;
    if !(center >= start && center < start + time_span) {
        return Err(invalid("pulse.center must lie inside the time window"));
    }
    // |E|^2 = exp(-4 ln2 (t - t0)^2 / fwhm^2)
    let a = 2.0 * std::f64::consts::LN_2 / (fwhm * fwhm);
    let field = (0..samples)
        .map(|k| {
            let t = start + dt * k as f64 - center;
            Complex64::new((-a * t * t).exp(), 0.0)
        })
        .collect();
    PulseEnvelope::new(start, dt, field)
}

/// Detuning carried by FFT bin `k` of an `n`-point record with step `dt`.
fn bin_detuning(k: usize, n: usize, dt: f64) -> f64 {
    let df = 1.0 / (n as f64 * dt);
    let f = if k < n.div_ceil(2) {
        k as f64
    } else {
        k as f64 - n as f64
    };
    -f * df
}

/// Detuning interval holding the central `fraction` of the spectral energy.
fn energy_band(spectrum: &[Complex64], dt: f64, fraction: f64) -> (f64, f64) {
    let n = spectrum.len();
    let mut bins: Vec<(f64, f64)> = spectrum
        .iter()
        .enumerate()
        .map(|(k, z)| (bin_detuning(k, n, dt), z.norm_sqr()))
        .collect();
    bins.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let total: f64 = bins.iter().map(|b| b.1).sum();
    if total <= 0.0 {
        return (0.0, 0.0);
    }
    let tail = 0.5 * (1.0 - fraction) * total;
    let mut acc = 0.0;
    let mut lo = bins[0].0;
    for b in &bins {
        acc += b.1;
        if acc > tail {
            lo = b.0;
            break;
        }
    }
    acc = 0.0;
    let mut hi = bins[n - 1].0;
    for b in bins.iter().rev() {
        acc += b.1;
        if acc > tail {
            hi = b.0;
            break;
        }
    }
    (lo, hi)
}

/// Output envelope: inverse transform of the input spectrum times `t(nu)`.
///
/// The transfer function is linearly interpolated onto the FFT bins and held
/// at its end values beyond the grid; the 99% energy bandwidth of the input
/// must lie inside the grid.
pub fn propagate(input: &PulseEnvelope, ft: &FieldTransfer) -> Result<PulseEnvelope> {
    let n = input.len();
    let mut buf = input.field.clone();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n).process(&mut buf);

    let (lo, hi) = energy_band(&buf, input.dt, 0.99);
    if lo < ft.grid.start() || hi > ft.grid.end() {
        return Err(invalid(
            "pulse bandwidth exceeds the span of the transfer function grid",
        ));
    }
    for (k, z) in buf.iter_mut().enumerate() {
        *z *= ft.interpolate(bin_detuning(k, n, input.dt));
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let norm = 1.0 / n as f64;
    for z in &mut buf {
        *z *= norm;
    }
    PulseEnvelope::new(input.start, input.dt, buf)
}

/// Ring-down structure of a transmitted trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RingDown {
    pub peak_times: Vec<f64>,
    pub peak_intensities: Vec<f64>,
    /// Mean spacing of successive peaks; `None` with fewer than two peaks.
    pub period: Option<f64>,
    /// Geometric mean of successive peak intensity ratios.
    pub amplitude_ratio: Option<f64>,
}

impl RingDown {
    pub fn is_resolved(&self) -> bool {
        self.period.is_some()
    }
}

/// Intensity peaks above [`RING_DOWN_THRESHOLD`] of the maximum, at least
/// [`RING_DOWN_MIN_SEPARATION`] samples apart (stronger peaks win).
pub fn ring_down_metrics(output: &PulseEnvelope) -> RingDown {
    let y = output.intensity();
    let n = y.len();
    let max = y.iter().copied().fold(0.0, f64::max);
    let mut cand: Vec<usize> = (1..n.saturating_sub(1))
        .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] >= RING_DOWN_THRESHOLD * max)
        .collect();
    cand.sort_by(|&a, &b| y[b].partial_cmp(&y[a]).unwrap().then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for i in cand {
        if kept.iter().all(|&k| k.abs_diff(i) >= RING_DOWN_MIN_SEPARATION) {
            kept.push(i);
        }
    }
    kept.sort_unstable();

    // parabolic refinement of each peak time
    let refine = |i: usize| -> (f64, f64) {
        let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
        let d = y0 - 2.0 * y1 + y2;
        let p = if d != 0.0 { (0.5 * (y0 - y2) / d).clamp(-0.5, 0.5) } else { 0.0 };
        (output.time(i) + p * output.dt, y1 - 0.25 * (y0 - y2) * p)
    };
    let (peak_times, peak_intensities): (Vec<f64>, Vec<f64>) = kept.into_iter().map(refine).unzip();
    let k = peak_times.len();
    let (period, amplitude_ratio) = if k >= 2 {
        let period = (peak_times[k - 1] - peak_times[0]) / (k - 1) as f64;
        let ratio = (peak_intensities[k - 1] / peak_intensities[0]).powf(1.0 / (k - 1) as f64);
        (Some(period), Some(ratio))
    } else {
        (None, None)
    };
    RingDown {
        peak_times,
        peak_intensities,
        period,
        amplitude_ratio,
    }
}
