use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{normalize, symmetrize, FrequencyGrid, JsaGrid, PumpSpec};
use crate::numeric::FWHM_PER_SIGMA;
use crate::{Error, Result};

/// Minimum number of grid samples across the narrower ellipse FWHM.
pub const MIN_SAMPLES_PER_FWHM: f64 = 8.0;

/// Phenomenological two-dimensional Gaussian JSA.
///
/// The intensity `|f|^2` is an ellipse whose first principal axis points at
/// `correlation_angle` (radians, measured from the signal axis towards the
/// idler axis). `along_bandwidth` and `across_bandwidth` are the intensity
/// FWHMs (rad/ps) along that axis and perpendicular to it. With
/// `correlation_angle = pi/4` the first axis is the sum-frequency direction,
/// so `along_bandwidth` controls the width of the time-domain NOON envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianJsaParams {
    pub along_bandwidth: f64,
    pub across_bandwidth: f64,
    pub correlation_angle: f64,
}

/// Build a normalized, exchange-symmetric Gaussian JSA centred on the
/// degenerate point `(wp/2, wp/2)` of `pump`.
///
/// Ellipses that are not already symmetric under `ws <-> wi` (tilted away from
/// the diagonals with unequal widths) are symmetrized, which superposes the
/// ellipse and its mirror image.
pub fn build_gaussian_jsa(
    pump: &PumpSpec,
    params: &GaussianJsaParams,
    grid: &FrequencyGrid,
) -> Result<JsaGrid> {
    pump.validate()?;
    for (field, bw) in [
        ("source.along_bandwidth_rad_per_ps", params.along_bandwidth),
        (
            "source.across_bandwidth_rad_per_ps",
            params.across_bandwidth,
        ),
    ] {
        if !(bw > 0.0 && bw.is_finite()) {
            return Err(Error::invalid(
                field,
                format!("bandwidth must be positive, got {bw}"),
            ));
        }
    }
    if !params.correlation_angle.is_finite() {
        return Err(Error::invalid(
            "source.correlation_angle_rad",
            "must be finite",
        ));
    }
    if !grid.has_identical_axes() {
        return Err(Error::Shape(
            "Gaussian JSA needs identical signal and idler axes".into(),
        ));
    }
    let narrowest = params.along_bandwidth.min(params.across_bandwidth);
    let coarsest = grid.signal.step().max(grid.idler.step());
    if narrowest / coarsest < MIN_SAMPLES_PER_FWHM {
        return Err(Error::Resolution(format!(
            "{:.2} samples per FWHM ({narrowest} rad/ps over {coarsest} rad/ps steps); need {MIN_SAMPLES_PER_FWHM}",
            narrowest / coarsest
        )));
    }

    let center = pump.degenerate_frequency();
    let (sin, cos) = params.correlation_angle.sin_cos();
    let sigma_u = params.along_bandwidth / FWHM_PER_SIGMA;
    let sigma_v = params.across_bandwidth / FWHM_PER_SIGMA;
    let amplitude = Array2::from_shape_fn(grid.shape(), |(i, j)| {
        let ds = grid.signal.value(i) - center;
        let di = grid.idler.value(j) - center;
        let u = ds * cos + di * sin;
        let v = -ds * sin + di * cos;
        // amplitude exponent is half the intensity exponent
        let arg = u * u / (4.0 * sigma_u * sigma_u) + v * v / (4.0 * sigma_v * sigma_v);
        Complex64::new((-arg).exp(), 0.0)
    });
    let raw = JsaGrid::new(*grid, amplitude, center)?;
    symmetrize(&normalize(&raw)?)
}
