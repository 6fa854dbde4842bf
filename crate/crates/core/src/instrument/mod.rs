//! Dispersive-fiber time-of-flight spectrometer: wavelength to arrival-time
//! mapping, jitter blur and Poissonian coincidence accumulation.

mod acquire;
mod blur;

pub use acquire::{acquire, CoincidenceHistogram};
pub use blur::{
    apply_jitter, blur, blur_channels, jitter_kernel, to_arrival_time, ArrivalTimeMap, BlurReport,
};

use serde::{Deserialize, Serialize};

use crate::spectral::UniformAxis;
use crate::{Error, Result};

/// One spectrometer channel. Both photons usually share the same fiber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrometerSpec {
    pub full_dispersion_ps_per_nm: f64,
    /// FWHM of the Gaussian timing jitter.
    pub jitter_fwhm_ps: f64,
    pub reference_wavelength_nm: f64,
    pub time_window_ps: [f64; 2],
    pub time_bin_ps: f64,
}

impl Default for SpectrometerSpec {
    fn default() -> Self {
        Self {
            full_dispersion_ps_per_nm: 941.0,
            jitter_fwhm_ps: 100.0,
            reference_wavelength_nm: 1584.0,
            time_window_ps: [-1900.0, 1900.0],
            time_bin_ps: 10.0,
        }
    }
}

impl SpectrometerSpec {
    pub fn validate(&self) -> Result<()> {
        let d = self.full_dispersion_ps_per_nm;
        if d == 0.0 || !d.is_finite() {
            return Err(Error::invalid(
                "spectrometer.full_dispersion_ps_per_nm",
                "must be finite and nonzero",
            ));
        }
        if !(self.jitter_fwhm_ps >= 0.0 && self.jitter_fwhm_ps.is_finite()) {
            return Err(Error::invalid(
                "spectrometer.jitter_fwhm_ps",
                "must be >= 0",
            ));
        }
        if !(self.reference_wavelength_nm > 0.0 && self.reference_wavelength_nm.is_finite()) {
            return Err(Error::invalid(
                "spectrometer.reference_wavelength_nm",
                "must be positive",
            ));
        }
        let [lo, hi] = self.time_window_ps;
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::invalid(
                "spectrometer.time_window_ps",
                "window must be ordered",
            ));
        }
        if !(self.time_bin_ps > 0.0 && self.time_bin_ps.is_finite()) {
            return Err(Error::invalid(
                "spectrometer.time_bin_ps",
                "must be positive",
            ));
        }
        if self.time_bin_ps > hi - lo {
            return Err(Error::invalid(
                "spectrometer.time_bin_ps",
                "bin is wider than the window",
            ));
        }
        Ok(())
    }

    /// Bin centres of the arrival-time histogram. The window is rounded to a
    /// whole number of bins starting at its lower edge.
    pub fn time_axis(&self) -> Result<UniformAxis> {
        self.validate()?;
        let [lo, hi] = self.time_window_ps;
        let n = ((hi - lo) / self.time_bin_ps).round().max(1.0) as usize;
        UniformAxis::new(lo + 0.5 * self.time_bin_ps, self.time_bin_ps, n)
    }
}

/// Arrival time relative to the reference wavelength (ps).
#[inline]
pub fn wavelength_to_time(lambda_nm: f64, spec: &SpectrometerSpec) -> f64 {
    spec.full_dispersion_ps_per_nm * (lambda_nm - spec.reference_wavelength_nm)
}

/// Inverse of [`wavelength_to_time`].
#[inline]
pub fn time_to_wavelength(t_ps: f64, spec: &SpectrometerSpec) -> f64 {
    t_ps / spec.full_dispersion_ps_per_nm + spec.reference_wavelength_nm
}

/// Jitter-limited wavelength resolution (nm).
pub fn resolution(spec: &SpectrometerSpec) -> Result<f64> {
    if spec.full_dispersion_ps_per_nm == 0.0 {
        return Err(Error::invalid(
            "spectrometer.full_dispersion_ps_per_nm",
            "zero dispersion gives no spectral resolution",
        ));
    }
    Ok(spec.jitter_fwhm_ps / spec.full_dispersion_ps_per_nm.abs())
}
