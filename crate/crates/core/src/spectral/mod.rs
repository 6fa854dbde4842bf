//! Joint spectral amplitudes of the down-converted photon pair.
//!
//! A [`JsaGrid`] is a complex matrix `f(ws, wi)` sampled on a
//! [`FrequencyGrid`]. Everything downstream assumes the discrete
//! normalization `sum |f|^2 dws dwi = 1` (midpoint rule on the uniform grid).

mod gaussian;
mod grid;
mod phasematch;
mod sellmeier;

pub use gaussian::{build_gaussian_jsa, GaussianJsaParams, MIN_SAMPLES_PER_FWHM};
pub use grid::{FrequencyGrid, UniformAxis, UNIFORMITY_TOLERANCE};
pub use phasematch::{build_phasematched_jsa, phase_mismatch};
pub use sellmeier::{SellmeierCoefficients, SellmeierTable};

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::numeric::{CompensatedSum, FWHM_PER_SIGMA};
use crate::{omega_from_wavelength, Error, Result};

/// Tolerance on `sum |f|^2 dws dwi = 1`.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PumpShape {
    #[default]
    GaussianTransformLimited,
}

/// Pump pulse. `pulse_duration_ps` is the intensity FWHM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpSpec {
    pub center_wavelength_nm: f64,
    pub pulse_duration_ps: f64,
    #[serde(default)]
    pub shape: PumpShape,
}

impl PumpSpec {
    pub fn new(center_wavelength_nm: f64, pulse_duration_ps: f64) -> Result<Self> {
        let pump = Self {
            center_wavelength_nm,
            pulse_duration_ps,
            shape: PumpShape::GaussianTransformLimited,
        };
        pump.validate()?;
        Ok(pump)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.center_wavelength_nm > 0.0 && self.center_wavelength_nm.is_finite()) {
            return Err(Error::invalid(
                "pump.center_wavelength_nm",
                format!(
                    "must be positive and finite, got {}",
                    self.center_wavelength_nm
                ),
            ));
        }
        if !(self.pulse_duration_ps > 0.0 && self.pulse_duration_ps.is_finite()) {
            return Err(Error::invalid(
                "pump.pulse_duration_ps",
                format!(
                    "must be positive and finite, got {}",
                    self.pulse_duration_ps
                ),
            ));
        }
        let bw = self.intensity_bandwidth();
        if !(bw > 0.0 && bw.is_finite()) {
            return Err(Error::invalid(
                "pump.pulse_duration_ps",
                format!("derived bandwidth {bw} rad/ps is not positive and finite"),
            ));
        }
        Ok(())
    }

    /// Pump center angular frequency, rad/ps.
    pub fn center_frequency(&self) -> f64 {
        omega_from_wavelength(self.center_wavelength_nm)
    }

    /// Frequency of each photon at degeneracy (half the pump frequency).
    pub fn degenerate_frequency(&self) -> f64 {
        0.5 * self.center_frequency()
    }

    /// Intensity-spectrum FWHM in rad/ps from the Gaussian time-bandwidth
    /// product (`dw * dt = 4 ln 2`).
    pub fn intensity_bandwidth(&self) -> f64 {
        match self.shape {
            PumpShape::GaussianTransformLimited => {
                4.0 * std::f64::consts::LN_2 / self.pulse_duration_ps
            }
        }
    }

    /// Spectral field amplitude at pump frequency `omega_sum`, unit peak.
    pub fn amplitude(&self, omega_sum: f64) -> f64 {
        match self.shape {
            PumpShape::GaussianTransformLimited => {
                // intensity std in time; field spectrum ~ exp(-W^2 sigma_t^2)
                let sigma_t = self.pulse_duration_ps / FWHM_PER_SIGMA;
                let detuning = omega_sum - self.center_frequency();
                (-(detuning * sigma_t).powi(2)).exp()
            }
        }
    }
}

/// Inverse group velocities in ps/mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseGroupVelocities {
    pub pump: f64,
    pub signal: f64,
    pub idler: f64,
}

impl InverseGroupVelocities {
    /// `k'_p - (k'_s + k'_i) / 2`; zero under type-II group-velocity matching.
    pub fn gvm_mismatch(&self) -> f64 {
        self.pump - 0.5 * (self.signal + self.idler)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DispersionSource {
    /// First-order expansion of the phase mismatch around degeneracy.
    /// `phase_mismatch_rad_per_mm` is the residual mismatch at degeneracy
    /// (zero when the poling period is exactly phase matched there).
    LinearizedGroupVelocity {
        inverse_group_velocities: InverseGroupVelocities,
        phase_mismatch_rad_per_mm: f64,
    },
    /// Full dispersion from Sellmeier equations; `None` if the table has not
    /// been supplied.
    SellmeierTable(Option<SellmeierTable>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrystalSpec {
    pub length_mm: f64,
    pub poling_period_um: f64,
    pub dispersion: DispersionSource,
    /// When set, reject linearized inputs that miss the group-velocity
    /// matching condition by more than `gvm_tolerance_ps_per_mm`.
    pub gvm_check: bool,
    pub gvm_tolerance_ps_per_mm: f64,
}

impl CrystalSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.length_mm > 0.0 && self.length_mm.is_finite()) {
            return Err(Error::invalid(
                "crystal.length_mm",
                format!("must be positive, got {}", self.length_mm),
            ));
        }
        if !(self.poling_period_um > 0.0 && self.poling_period_um.is_finite()) {
            return Err(Error::invalid(
                "crystal.poling_period_um",
                format!("must be positive, got {}", self.poling_period_um),
            ));
        }
        match &self.dispersion {
            DispersionSource::LinearizedGroupVelocity {
                inverse_group_velocities: v,
                phase_mismatch_rad_per_mm,
            } => {
                for (name, x) in [("pump", v.pump), ("signal", v.signal), ("idler", v.idler)] {
                    if !x.is_finite() {
                        return Err(Error::invalid(
                            format!("crystal.{name}_inverse_group_velocity_ps_per_mm"),
                            "must be finite",
                        ));
                    }
                }
                if !phase_mismatch_rad_per_mm.is_finite() {
                    return Err(Error::invalid(
                        "crystal.phase_mismatch_rad_per_mm",
                        "must be finite",
                    ));
                }
                if self.gvm_check && v.gvm_mismatch().abs() > self.gvm_tolerance_ps_per_mm {
                    return Err(Error::invalid(
                        "crystal.pump_inverse_group_velocity_ps_per_mm",
                        format!(
                            "group-velocity matching violated: k'_p - (k'_s + k'_i)/2 = {:.3e} ps/mm exceeds {:.3e}",
                            v.gvm_mismatch(),
                            self.gvm_tolerance_ps_per_mm
                        ),
                    ));
                }
            }
            DispersionSource::SellmeierTable(None) => return Err(Error::MissingSellmeier),
            DispersionSource::SellmeierTable(Some(table)) => table.validate()?,
        }
        Ok(())
    }
}

/// Discretized complex joint spectral amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct JsaGrid {
    grid: FrequencyGrid,
    amplitude: Array2<Complex64>,
    degenerate_frequency: f64,
    normalized: bool,
}

impl JsaGrid {
    /// Wrap an amplitude matrix indexed `(signal, idler)`.
    ///
    /// `degenerate_frequency` (rad/ps) is the single-photon frequency at
    /// degeneracy; fringe phases are quoted relative to twice this value.
    pub fn new(
        grid: FrequencyGrid,
        amplitude: Array2<Complex64>,
        degenerate_frequency: f64,
    ) -> Result<Self> {
        if amplitude.dim() != grid.shape() {
            return Err(Error::Shape(format!(
                "amplitude is {:?} but grid is {:?}",
                amplitude.dim(),
                grid.shape()
            )));
        }
        if let Some(((i, j), _)) = amplitude
            .indexed_iter()
            .find(|(_, z)| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite(format!("JSA element ({i}, {j})")));
        }
        if !(degenerate_frequency > 0.0 && degenerate_frequency.is_finite()) {
            return Err(Error::invalid(
                "degenerate_frequency",
                format!("must be positive, got {degenerate_frequency}"),
            ));
        }
        let mut jsa = Self {
            grid,
            amplitude,
            degenerate_frequency,
            normalized: false,
        };
        jsa.normalized = (jsa.norm() - 1.0).abs() <= NORMALIZATION_TOLERANCE;
        Ok(jsa)
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn amplitude(&self) -> &Array2<Complex64> {
        &self.amplitude
    }

    pub fn degenerate_frequency(&self) -> f64 {
        self.degenerate_frequency
    }

    /// Twice the degenerate frequency: the carrier of the sum-frequency fringe.
    pub fn sum_carrier_frequency(&self) -> f64 {
        2.0 * self.degenerate_frequency
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `sum |f|^2 dws dwi`.
    pub fn norm(&self) -> f64 {
        let s: CompensatedSum = self.amplitude.iter().map(|z| z.norm_sqr()).collect();
        s.total() * self.grid.cell_area()
    }

    /// Joint spectral intensity `|f|^2`.
    pub fn intensity(&self) -> Array2<f64> {
        self.amplitude.mapv(|z| z.norm_sqr())
    }

    pub(crate) fn require_normalized(&self) -> Result<()> {
        if self.normalized {
            Ok(())
        } else {
            Err(Error::NotNormalized { norm: self.norm() })
        }
    }

    /// Largest elementwise `| |f(ws,wi)| - |f(wi,ws)| |`.
    pub fn max_exchange_asymmetry(&self) -> Result<f64> {
        self.require_square()?;
        let a = &self.amplitude;
        Ok(a.indexed_iter()
            .map(|((i, j), z)| (z.norm() - a[[j, i]].norm()).abs())
            .fold(0.0, f64::max))
    }

    /// Largest elementwise `|f - f^T|` (complex).
    pub fn max_transpose_residual(&self) -> Result<f64> {
        self.require_square()?;
        let a = &self.amplitude;
        Ok(a.indexed_iter()
            .map(|((i, j), z)| (z - a[[j, i]]).norm())
            .fold(0.0, f64::max))
    }

    /// Multiply by the unimodular sum-frequency phase `exp(i (ws + wi) tau)`.
    pub fn with_sum_frequency_phase(&self, tau_ps: f64) -> Self {
        let g = self.grid;
        let mut amplitude = self.amplitude.clone();
        for ((i, j), z) in amplitude.indexed_iter_mut() {
            let phase = (g.signal.value(i) + g.idler.value(j)) * tau_ps;
            *z *= Complex64::from_polar(1.0, phase);
        }
        Self {
            grid: self.grid,
            amplitude,
            degenerate_frequency: self.degenerate_frequency,
            normalized: self.normalized,
        }
    }

    fn require_square(&self) -> Result<()> {
        if self.grid.has_identical_axes() {
            Ok(())
        } else {
            Err(Error::Shape(
                "exchange operations need identical signal and idler axes".into(),
            ))
        }
    }
}

/// Rescale so that `sum |f|^2 dws dwi = 1`.
pub fn normalize(jsa: &JsaGrid) -> Result<JsaGrid> {
    let norm = jsa.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::Degenerate(format!(
            "cannot normalize an amplitude with total power {norm}"
        )));
    }
    let scale = norm.sqrt().recip();
    let amplitude = jsa.amplitude.mapv(|z| z * scale);
    JsaGrid::new(jsa.grid, amplitude, jsa.degenerate_frequency)
}

/// Enforce exchange symmetry: `f <- (f + f^T) / 2`, then renormalize.
pub fn symmetrize(jsa: &JsaGrid) -> Result<JsaGrid> {
    jsa.require_square()?;
    let a = &jsa.amplitude;
    let sym = Array2::from_shape_fn(a.dim(), |(i, j)| (a[[i, j]] + a[[j, i]]) * 0.5);
    let out = JsaGrid::new(jsa.grid, sym, jsa.degenerate_frequency)?;
    normalize(&out)
}
