//! Refractive index from absorption via the narrowband Kramers-Kronig relation.
//!
//! For features much narrower than the carrier the relation reduces to a
//! single Hilbert transform:
//!
//! ```text
//! dn(nu) = c / (4 pi^2 nu0) * PV integral alpha(x) / (x - nu) dx
//! ```
//!
//! With this sign a transmission window (absorption dip) has `d dn/d nu > 0`,
//! i.e. normal dispersion and slow light, and the group index is
//! `n_g = n + dn + nu0 * d dn/d nu`.
//!
//! Two independent routes are provided. [`kk_analytic`] integrates the
//! piecewise-linear profile exactly: every breakpoint contributes a
//! `(nu - x) ln|nu - x|` term weighted by its slope change and a `ln|nu - x|`
//! term weighted by its jump. [`kk_numeric`] works from samples only, by an
//! FFT convolution of the linear interpolant with the discrete kernel of a
//! hat function.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Result};
use crate::grid::FrequencyGrid;
use crate::profile::AbsorptionProfile;
use crate::{DEFAULT_BACKGROUND_INDEX, SPEED_OF_LIGHT};

/// Zero-padding factor of the FFT convolution.
pub const PAD_FACTOR: usize = 4;

/// Fraction of the record at each end that is cosine tapered before the FFT.
pub const TAPER_FRACTION: f64 = 1.0 / 32.0;

/// `c / (4 pi^2 nu0)`: converts the PV integral of `alpha` (m^-1 Hz / Hz)
/// into a dimensionless index deviation.
pub fn kk_scale(carrier: f64) -> f64 {
    SPEED_OF_LIGHT / (4.0 * PI * PI * carrier)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionProfile {
    pub grid: FrequencyGrid,
    /// Real index deviation from the background.
    pub delta_n: Vec<f64>,
    pub group_index: Vec<f64>,
    pub background_index: f64,
}

impl DispersionProfile {
    /// Same dispersion on a different background index; `n_g` shifts by the
    /// difference.
    pub fn with_background_index(mut self, n: f64) -> Self {
        let shift = n - self.background_index;
        for g in &mut self.group_index {
            *g += shift;
        }
        self.background_index = n;
        self
    }

    pub fn delta_n_at(&self, detuning: f64) -> f64 {
        self.grid.interpolate(&self.delta_n, detuning)
    }

    pub fn group_index_at(&self, detuning: f64) -> f64 {
        self.grid.interpolate(&self.group_index, detuning)
    }

    /// Phase index `n + dn` at a detuning.
    pub fn index_at(&self, detuning: f64) -> f64 {
        self.background_index + self.delta_n_at(detuning)
    }

    /// CSV `detuning_Hz,delta_n,group_index`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("detuning_Hz,delta_n,group_index\n");
        for i in 0..self.grid.len() {
            s.push_str(&format!(
                "{:.6},{:.12e},{:.12e}\n",
                self.grid.point(i),
                self.delta_n[i],
                self.group_index[i]
            ));
        }
        s
    }
}

/// Closed-form principal-value integral `PV int alpha(x) / (x - nu) dx` of a
/// piecewise-linear profile, and its derivative in `nu`.
///
/// When the two constant tails differ the integral diverges logarithmically;
/// the divergent constant is dropped by measuring distances in units of the
/// profile span. Derivatives are unaffected.
#[derive(Debug, Clone)]
pub struct PrincipalValue {
    x: Vec<f64>,
    kink: Vec<f64>,
    jump: Vec<f64>,
    constant: f64,
    log_scale: f64,
}

impl PrincipalValue {
    pub fn new(profile: &AbsorptionProfile) -> Self {
        let k = profile.knots();
        let n = k.len();
        let slopes: Vec<f64> = k
            .windows(2)
            .map(|w| (w[1].left - w[0].right) / (w[1].x - w[0].x))
            .collect();
        let slope = |i: isize| -> f64 {
            if i < 0 || i as usize >= slopes.len() {
                0.0
            } else {
                slopes[i as usize]
            }
        };
        let mut x = Vec::with_capacity(n);
        let mut kink = Vec::with_capacity(n);
        let mut jump = Vec::with_capacity(n);
        for (j, kn) in k.iter().enumerate() {
            let c = slope(j as isize - 1) - slope(j as isize);
            let jmp = kn.jump();
            if c == 0.0 && jmp == 0.0 {
                continue;
            }
            x.push(kn.x);
            kink.push(c);
            jump.push(jmp);
        }
        let constant = k
            .windows(2)
            .zip(&slopes)
            .map(|(w, s)| s * (w[1].x - w[0].x))
            .sum();
        let (lo, hi) = profile.span();
        let span = if hi > lo { hi - lo } else { 1.0 };
        Self {
            x,
            kink,
            jump,
            constant,
            log_scale: span.ln(),
        }
    }

    /// Value and derivative at `nu`. Distances below `floor` are raised to
    /// `floor`, which keeps the log singularities of a breakpoint that lands
    /// exactly on `nu` finite.
    pub fn eval(&self, nu: f64, floor: f64) -> (f64, f64) {
        let mut value = self.constant;
        let mut slope = 0.0;
        for ((&x, &c), &j) in self.x.iter().zip(&self.kink).zip(&self.jump) {
            let d = nu - x;
            let ad = d.abs();
            let ln = ad.max(floor).ln();
            let ln_s = ln - self.log_scale;
            if c != 0.0 {
                if ad > 0.0 {
                    value += c * d * ln_s;
                }
                slope += c * ln;
            }
            if j != 0.0 {
                value -= j * ln_s;
                if ad > 0.0 {
                    slope -= j / d;
                }
            }
        }
        (value, slope)
    }

    pub fn value(&self, nu: f64) -> f64 {
        self.eval(nu, 0.0).0
    }

    pub fn slope(&self, nu: f64) -> f64 {
        self.eval(nu, 0.0).1
    }
}

/// Group index at a single detuning from the closed form, with exact
/// derivative.
pub fn group_index_exact(
    profile: &AbsorptionProfile,
    carrier: f64,
    background_index: f64,
    detuning: f64,
) -> f64 {
    let pv = PrincipalValue::new(profile);
    let (v, s) = pv.eval(detuning, 0.0);
    let k = kk_scale(carrier);
    background_index + k * v + carrier * k * s
}

/// Exact dispersion of a piecewise-linear profile on a grid.
///
/// A breakpoint that coincides with a grid point has its log singularity
/// evaluated at a distance of `1e-3` grid steps.
pub fn kk_analytic(profile: &AbsorptionProfile, grid: &FrequencyGrid) -> DispersionProfile {
    let pv = PrincipalValue::new(profile);
    let k = kk_scale(grid.carrier());
    let floor = 1e-3 * grid.step();
    let mut delta_n = Vec::with_capacity(grid.len());
    let mut group_index = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let (v, s) = pv.eval(grid.point(i), floor);
        let dn = k * v;
        delta_n.push(dn);
        group_index.push(DEFAULT_BACKGROUND_INDEX + dn + grid.carrier() * k * s);
    }
    DispersionProfile {
        grid: *grid,
        delta_n,
        group_index,
        background_index: DEFAULT_BACKGROUND_INDEX,
    }
}

/// `PV int hat(x) / (x - k) dx` for a unit hat of half-width one centred on 0.
fn hat_kernel(k: i64) -> f64 {
    let k = k as f64;
    let xlnx = |x: f64| if x == 0.0 { 0.0 } else { x * x.abs().ln() };
    if k.abs() < 10.0 {
        2.0 * xlnx(k) - xlnx(k + 1.0) - xlnx(k - 1.0)
    } else {
        // -sum u^(2m-1) / (m (2m-1)), u = 1/k; the direct form cancels badly
        let u = 1.0 / k;
        let u2 = u * u;
        let mut term = u;
        let mut acc = 0.0;
        for m in 1..=12 {
            let m = m as f64;
            acc += term / (m * (2.0 * m - 1.0));
            term *= u2;
        }
        -acc
    }
}

/// Dispersion from sampled absorption on a uniform grid.
///
/// The edge constant (mean of the two end samples) is removed, the outer
/// `TAPER_FRACTION` of the record is cosine tapered, and the linear
/// interpolant of the samples is Hilbert transformed exactly by FFT
/// convolution with the hat-function kernel on a `PAD_FACTOR`-times
/// zero-padded buffer.
pub fn kk_numeric(alpha: &[f64], grid: &FrequencyGrid) -> Result<DispersionProfile> {
    let n = grid.len();
    if alpha.len() != n {
        return Err(invalid("absorption samples do not match the grid"));
    }
    if alpha.iter().any(|a| !a.is_finite()) {
        return Err(invalid("absorption samples must be finite"));
    }
    let edge = 0.5 * (alpha[0] + alpha[n - 1]);
    let taper = ((n as f64 * TAPER_FRACTION) as usize).max(1);
    let p = PAD_FACTOR * n;

    let mut data = vec![Complex64::new(0.0, 0.0); p];
    for (i, (&a, d)) in alpha.iter().zip(data.iter_mut()).enumerate() {
        let from_edge = i.min(n - 1 - i);
        let w = if from_edge < taper {
            0.5 * (1.0 - (PI * from_edge as f64 / taper as f64).cos())
        } else {
            1.0
        };
        *d = Complex64::new((a - edge) * w, 0.0);
    }
    let mut kernel = vec![Complex64::new(0.0, 0.0); p];
    for m in 0..n {
        let w = hat_kernel(m as i64);
        kernel[m] = Complex64::new(w, 0.0);
        if m > 0 {
            kernel[p - m] = Complex64::new(-w, 0.0);
        }
    }

    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(p);
    let inv = planner.plan_fft_inverse(p);
    fwd.process(&mut data);
    fwd.process(&mut kernel);
    for (d, k) in data.iter_mut().zip(&kernel) {
        *d *= k;
    }
    inv.process(&mut data);

    let scale = kk_scale(grid.carrier()) / p as f64;
    let delta_n: Vec<f64> = data[..n].iter().map(|z| z.re * scale).collect();
    let mut disp = DispersionProfile {
        grid: *grid,
        delta_n,
        group_index: Vec::new(),
        background_index: DEFAULT_BACKGROUND_INDEX,
    };
    disp.group_index = group_index(&disp);
    Ok(disp)
}

/// `n_g = n + dn + nu0 * d dn/d nu` by second-order finite differences
/// (central inside, one-sided at the two ends).
pub fn group_index(disp: &DispersionProfile) -> Vec<f64> {
    let dn = &disp.delta_n;
    let n = dn.len();
    let h = disp.grid.step();
    let nu0 = disp.grid.carrier();
    let deriv = |i: usize| -> f64 {
        if n < 3 {
            return if n == 2 { (dn[1] - dn[0]) / h } else { 0.0 };
        }
        if i == 0 {
            (-3.0 * dn[0] + 4.0 * dn[1] - dn[2]) / (2.0 * h)
        } else if i == n - 1 {
            (3.0 * dn[n - 1] - 4.0 * dn[n - 2] + dn[n - 3]) / (2.0 * h)
        } else {
            (dn[i + 1] - dn[i - 1]) / (2.0 * h)
        }
    };
    (0..n)
        .map(|i| disp.background_index + dn[i] + nu0 * deriv(i))
        .collect()
}
