use serde::{Deserialize, Serialize};

use crate::{omega_from_wavelength, Error, Result};

/// Relative tolerance used when checking that sampled axes are uniform.
pub const UNIFORMITY_TOLERANCE: f64 = 1e-12;

/// Uniformly spaced, strictly increasing axis `start + i * step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformAxis {
    start: f64,
    step: f64,
    len: usize,
}

impl UniformAxis {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if len < 2 {
            return Err(Error::invalid(
                "axis.len",
                format!("need at least 2 points, got {len}"),
            ));
        }
        if !(start.is_finite() && step.is_finite() && step > 0.0) {
            return Err(Error::invalid(
                "axis.step",
                format!("axis must be finite and strictly increasing (start {start}, step {step})"),
            ));
        }
        Ok(Self { start, step, len })
    }

    /// Axis with `len` points from `first` to `last` inclusive.
    pub fn linspace(first: f64, last: f64, len: usize) -> Result<Self> {
        if len < 2 {
            return Err(Error::invalid(
                "axis.len",
                format!("need at least 2 points, got {len}"),
            ));
        }
        Self::new(first, (last - first) / (len - 1) as f64, len)
    }

    /// Rebuild an axis from explicit sample values, checking uniform spacing.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::invalid("axis", "need at least 2 samples"));
        }
        let axis = Self::linspace(values[0], values[values.len() - 1], values.len())?;
        let scale = values[0].abs().max(values[values.len() - 1].abs());
        for (i, &v) in values.iter().enumerate() {
            if (v - axis.value(i)).abs() > UNIFORMITY_TOLERANCE * scale.max(axis.step) {
                return Err(Error::invalid(
                    "axis",
                    format!(
                        "sample {i} = {v} breaks uniform spacing (expected {})",
                        axis.value(i)
                    ),
                ));
            }
        }
        Ok(axis)
    }

    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    #[inline]
    pub fn start(&self) -> f64 {
        self.start
    }

    #[inline]
    pub fn step(&self) -> f64 {
        self.step
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn last(&self) -> f64 {
        self.value(self.len - 1)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.value(i)).collect()
    }

    /// Same axis with the spacing halved (`2n - 1` points), so every original
    /// sample is also a sample of the refined axis.
    pub fn refined(&self) -> Self {
        Self {
            start: self.start,
            step: self.step / 2.0,
            len: 2 * self.len - 1,
        }
    }

    /// Index of `value` if it lies on the axis within `rel_tol` of a step.
    pub fn index_of(&self, value: f64, rel_tol: f64) -> Option<usize> {
        let x = (value - self.start) / self.step;
        let i = x.round();
        if i < 0.0 || i >= self.len as f64 || (x - i).abs() > rel_tol {
            return None;
        }
        Some(i as usize)
    }

    fn same_as(&self, other: &Self) -> bool {
        self.len == other.len
            && (self.start - other.start).abs() <= UNIFORMITY_TOLERANCE * self.start.abs()
            && (self.step - other.step).abs() <= UNIFORMITY_TOLERANCE * self.step
    }
}

/// Rectangular angular-frequency grid (rad/ps) for the signal and idler photons.
///
/// Matrices defined on the grid are indexed `(signal, idler)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub signal: UniformAxis,
    pub idler: UniformAxis,
}

impl FrequencyGrid {
    pub fn new(signal: UniformAxis, idler: UniformAxis) -> Self {
        Self { signal, idler }
    }

    /// Square grid with identical signal and idler axes.
    pub fn square(axis: UniformAxis) -> Self {
        Self {
            signal: axis,
            idler: axis,
        }
    }

    /// Square grid with `points` samples spanning the wavelength window
    /// `[min_nm, max_nm]`, uniform in angular frequency.
    pub fn from_wavelength_window(min_nm: f64, max_nm: f64, points: usize) -> Result<Self> {
        if !(min_nm > 0.0 && max_nm > min_nm && max_nm.is_finite()) {
            return Err(Error::invalid(
                "grid.wavelength_window",
                format!("need 0 < min < max, got [{min_nm}, {max_nm}] nm"),
            ));
        }
        let axis = UniformAxis::linspace(
            omega_from_wavelength(max_nm),
            omega_from_wavelength(min_nm),
            points,
        )?;
        Ok(Self::square(axis))
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.signal.len(), self.idler.len())
    }

    /// Area of one grid cell, (rad/ps)^2.
    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.signal.step() * self.idler.step()
    }

    /// True when signal and idler axes coincide, so transposition maps the
    /// grid onto itself.
    pub fn has_identical_axes(&self) -> bool {
        self.signal.same_as(&self.idler)
    }

    /// True when both axes share a spacing, so `ws + wi` and `ws - wi` take
    /// values on uniform lattices indexed by `i + j` and `i - j`.
    pub fn has_common_step(&self) -> bool {
        (self.signal.step() - self.idler.step()).abs() <= UNIFORMITY_TOLERANCE * self.signal.step()
    }

    /// Grid with each axis spacing halved.
    pub fn refined(&self) -> Self {
        Self {
            signal: self.signal.refined(),
            idler: self.idler.refined(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelength_from_omega;

    #[test]
    fn window_grid_spans_wavelengths() {
        let g = FrequencyGrid::from_wavelength_window(1582.0, 1586.0, 256).unwrap();
        assert!(g.has_identical_axes());
        assert!((wavelength_from_omega(g.signal.start()) - 1586.0).abs() < 1e-9);
        assert!((wavelength_from_omega(g.signal.last()) - 1582.0).abs() < 1e-9);
    }

    #[test]
    fn refined_axis_contains_original_samples() {
        let a = UniformAxis::linspace(10.0, 12.0, 5).unwrap();
        let r = a.refined();
        assert_eq!(r.len(), 9);
        for i in 0..a.len() {
            assert_eq!(r.index_of(a.value(i), 1e-9), Some(2 * i));
        }
    }

    #[test]
    fn from_values_rejects_non_uniform() {
        assert!(UniformAxis::from_values(&[0.0, 1.0, 2.5]).is_err());
        let a = UniformAxis::from_values(&[1.0, 1.5, 2.0, 2.5]).unwrap();
        assert_eq!(a.len(), 4);
    }

    #[test]
    fn rejects_bad_axes() {
        assert!(UniformAxis::new(0.0, -1.0, 4).is_err());
        assert!(UniformAxis::new(0.0, 1.0, 1).is_err());
        assert!(FrequencyGrid::from_wavelength_window(1586.0, 1582.0, 8).is_err());
    }
}
