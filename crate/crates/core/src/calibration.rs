//! Calibration of the phenomenological Gaussian JSA against a target
//! envelope width.

use crate::interference::{envelope_fwhm, Interferometer};
use crate::spectral::{build_gaussian_jsa, FrequencyGrid, GaussianJsaParams, PumpSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationOptions {
    /// Coarse-delay step of the envelope scans (ps).
    pub scan_step_ps: f64,
    /// Envelope scans cover `+-` this multiple of the target FWHM.
    pub scan_half_width_factor: f64,
    /// Stop once the bracket on the bandwidth is this small (rad/ps).
    pub bandwidth_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            scan_step_ps: 0.01,
            scan_half_width_factor: 3.0,
            bandwidth_tolerance: 1e-7,
            max_iterations: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub params: GaussianJsaParams,
    pub envelope_fwhm_ps: f64,
    pub iterations: usize,
}

/// Envelope FWHM (ps) of the Gaussian JSA with the given parameters, scanned
/// over `+-half_width_ps`.
pub fn gaussian_envelope_fwhm(
    pump: &PumpSpec,
    params: &GaussianJsaParams,
    grid: &FrequencyGrid,
    half_width_ps: f64,
    step_ps: f64,
) -> Result<f64> {
    let jsa = build_gaussian_jsa(pump, params, grid)?;
    let env =
        Interferometer::new(&jsa)?.envelope_scan(-half_width_ps, half_width_ps, step_ps, 16)?;
    envelope_fwhm(&env)
}

/// Bisect `along_bandwidth` so that the NOON envelope FWHM hits `target_ps`.
///
/// `template` supplies the across-bandwidth and correlation angle; its
/// along-bandwidth is ignored. The search bracket runs from the narrowest
/// bandwidth the grid resolves to half the grid span. Envelopes too wide for
/// the scan window count as wider than the target.
pub fn calibrate_along_bandwidth(
    pump: &PumpSpec,
    template: &GaussianJsaParams,
    grid: &FrequencyGrid,
    target_ps: f64,
    options: &CalibrationOptions,
) -> Result<Calibration> {
    if !(target_ps > 0.0 && target_ps.is_finite()) {
        return Err(Error::invalid(
            "calibration.target_fwhm_ps",
            "must be positive",
        ));
    }
    let half_width = options.scan_half_width_factor * target_ps;
    let fwhm_at = |bw: f64| -> Result<f64> {
        let params = GaussianJsaParams {
            along_bandwidth: bw,
            ..*template
        };
        match gaussian_envelope_fwhm(pump, &params, grid, half_width, options.scan_step_ps) {
            Err(Error::WindowTooSmall(_)) => Ok(f64::INFINITY),
            other => other,
        }
    };

    let step = grid.signal.step().max(grid.idler.step());
    let span =
        (grid.signal.last() - grid.signal.start()).min(grid.idler.last() - grid.idler.start());
    let (mut lo, mut hi) = (
        crate::spectral::MIN_SAMPLES_PER_FWHM * step * 1.0001,
        0.5 * span,
    );
    // envelope width falls as the bandwidth grows
    if fwhm_at(lo)? < target_ps || fwhm_at(hi)? > target_ps {
        return Err(Error::invalid(
            "calibration.target_fwhm_ps",
            format!("{target_ps} ps is not reachable on this grid"),
        ));
    }
    let mut iterations = 0;
    while hi - lo > options.bandwidth_tolerance && iterations < options.max_iterations {
        let mid = 0.5 * (lo + hi);
        if fwhm_at(mid)? > target_ps {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let along = 0.5 * (lo + hi);
    Ok(Calibration {
        params: GaussianJsaParams {
            along_bandwidth: along,
            ..*template
        },
        envelope_fwhm_ps: fwhm_at(along)?,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn bisection_hits_target_width() {
        let pump = PumpSpec::new(792.0, 2.0).unwrap();
        let grid = FrequencyGrid::from_wavelength_window(1582.0, 1586.0, 128).unwrap();
        let template = GaussianJsaParams {
            along_bandwidth: 1.0,
            across_bandwidth: 0.9,
            correlation_angle: FRAC_PI_4,
        };
        let options = CalibrationOptions {
            scan_step_ps: 0.02,
            bandwidth_tolerance: 1e-6,
            ..Default::default()
        };
        let cal = calibrate_along_bandwidth(&pump, &template, &grid, 4.2, &options).unwrap();
        assert!((cal.envelope_fwhm_ps - 4.2).abs() < 0.01, "{cal:?}");
        // a Gaussian sum-marginal gives FWHM_t * FWHM_sum = 8 ln 2, with
        // FWHM_sum = sqrt(2) * along
        let expected = 8.0 * std::f64::consts::LN_2 / (4.2 * std::f64::consts::SQRT_2);
        assert!(
            (cal.params.along_bandwidth - expected).abs() / expected < 0.01,
            "{cal:?}"
        );
    }
}
