//! Uniform detuning axis shared by every spectrum in the pipeline.

use crate::error::{invalid, Result};

/// Uniformly spaced detunings (Hz) relative to an absolute optical carrier.
///
/// Point `i` sits at `start + i * step`. The count is even and at least two so
/// the axis can be fed straight into FFT-based routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    carrier: f64,
    start: f64,
    step: f64,
    count: usize,
}

impl FrequencyGrid {
    pub fn new(carrier: f64, start: f64, step: f64, count: usize) -> Result<Self> {
        if !(carrier.is_finite() && carrier > 0.0) {
            return Err(invalid("grid.carrier must be positive"));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(invalid("grid.step must be positive"));
        }
        if !start.is_finite() {
            return Err(invalid("grid.start must be finite"));
        }
        if count < 2 || !count.is_multiple_of(2) {
            return Err(invalid("grid.points must be even and at least 2"));
        }
        let end = start + step * (count - 1) as f64;
        if start.abs().max(end.abs()) >= carrier / 100.0 {
            return Err(invalid(
                "grid detunings must stay below 1% of the carrier frequency",
            ));
        }
        Ok(Self {
            carrier,
            start,
            step,
            count,
        })
    }

    /// `count` points covering `[center - span/2, center + span/2)`; the point
    /// at index `count / 2` lands exactly on `center`.
    pub fn centered(carrier: f64, center: f64, span: f64, count: usize) -> Result<Self> {
        if !(span.is_finite() && span > 0.0) {
            return Err(invalid("grid.span must be positive"));
        }
        if count == 0 {
            return Err(invalid("grid.points must be even and at least 2"));
        }
        let step = span / count as f64;
        Self::new(carrier, center - step * (count / 2) as f64, step, count)
    }

    /// Builds a grid from explicit detunings, rejecting anything that is not
    /// uniformly spaced to within 1e-9 of the mean step.
    pub fn from_points(carrier: f64, points: &[f64]) -> Result<Self> {
        if points.len() < 2 {
            return Err(invalid("grid.points must be even and at least 2"));
        }
        let n = points.len();
        let step = (points[n - 1] - points[0]) / (n - 1) as f64;
        let tol = 1e-9 * step.abs().max(f64::MIN_POSITIVE);
        for (i, &p) in points.iter().enumerate() {
            if (p - (points[0] + step * i as f64)).abs() > tol {
                return Err(invalid("grid must be uniformly spaced"));
            }
        }
        Self::new(carrier, points[0], step, n)
    }

    pub fn carrier(&self) -> f64 {
        self.carrier
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn end(&self) -> f64 {
        self.point(self.count - 1)
    }

    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.point(i)).collect()
    }

    /// Absolute optical frequency of point `i`.
    #[inline]
    pub fn frequency(&self, i: usize) -> f64 {
        self.carrier + self.point(i)
    }

    /// Fractional index of a detuning; may fall outside `[0, len - 1]`.
    #[inline]
    pub fn position(&self, detuning: f64) -> f64 {
        (detuning - self.start) / self.step
    }

    pub fn contains(&self, detuning: f64) -> bool {
        detuning >= self.start && detuning <= self.end()
    }

    /// Linear interpolation of samples on this grid, clamped at the ends.
    pub fn interpolate(&self, samples: &[f64], detuning: f64) -> f64 {
        debug_assert_eq!(samples.len(), self.count);
        let pos = self.position(detuning);
        if pos <= 0.0 {
            return samples[0];
        }
        let last = self.count - 1;
        if pos >= last as f64 {
            return samples[last];
        }
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        samples[i] + frac * (samples[i + 1] - samples[i])
    }
}
