//! Sum-frequency (NOON) and difference-frequency (HOM) two-photon
//! interference.
//!
//! For a normalized JSA the NOON coincidence probability is
//! `P(tau) = 1/2 sum |f|^2 [1 + cos((ws + wi) tau)] dws dwi` and the
//! spectrally resolved map is the summand itself. The HOM counterpart uses
//! `ws - wi` with the opposite fringe sign, so that `tau = 0` is the dip.

mod diagnostics;
mod projection;
mod scan;

pub use diagnostics::{
    count_lobes, fringe_orientation, lobe_count, lobe_parity, oscillation_period, visibility,
    FringeDiagnostics, FringeOrientation, LobeAxis, LobeOptions, Parity, DEFAULT_LOBE_THRESHOLD,
};
pub use projection::{FrequencyProjection, Interferometer};
pub use scan::{
    envelope_fwhm, envelope_scan, scan, DelayScan, EnvelopeScan, MIN_SAMPLES_PER_PERIOD,
};

use std::f64::consts::TAU;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::numeric::CompensatedSum;
use crate::spectral::{FrequencyGrid, JsaGrid};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterferenceKind {
    /// Sum-frequency fringe, peak at zero delay.
    Noon,
    /// Difference-frequency fringe, dip at zero delay.
    Hom,
}

impl InterferenceKind {
    /// Fringe frequency of cell `(ws, wi)`.
    #[inline]
    pub fn beat(self, ws: f64, wi: f64) -> f64 {
        match self {
            InterferenceKind::Noon => ws + wi,
            InterferenceKind::Hom => ws - wi,
        }
    }

    /// Sign of the cosine term: `+1` for the NOON peak, `-1` for the HOM dip.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            InterferenceKind::Noon => 1.0,
            InterferenceKind::Hom => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            InterferenceKind::Noon => "noon",
            InterferenceKind::Hom => "hom",
        }
    }
}

impl std::str::FromStr for InterferenceKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "noon" => Ok(Self::Noon),
            "hom" => Ok(Self::Hom),
            other => Err(crate::Error::invalid(
                "kind",
                format!("expected noon or hom, got `{other}`"),
            )),
        }
    }
}

/// Frequency-resolved coincidence intensity at one delay.
#[derive(Debug, Clone, PartialEq)]
pub struct JsiMap {
    pub grid: FrequencyGrid,
    pub intensity: Array2<f64>,
    pub delay_ps: f64,
    /// Fringe phase at the degenerate point, `2 w_deg tau` modulo 2 pi.
    pub phase_label: f64,
    pub kind: InterferenceKind,
}

impl JsiMap {
    /// `sum I dws dwi`: the coincidence probability this map marginalizes to.
    pub fn total(&self) -> f64 {
        let s: CompensatedSum = self.intensity.iter().copied().collect();
        s.total() * self.grid.cell_area()
    }

    pub fn max(&self) -> f64 {
        self.intensity.iter().copied().fold(0.0, f64::max)
    }
}

/// Fringe phase of `delay_ps` at the sum-frequency carrier of `jsa`, in [0, 2 pi).
pub fn phase_label(jsa: &JsaGrid, delay_ps: f64) -> f64 {
    (jsa.sum_carrier_frequency() * delay_ps).rem_euclid(TAU)
}

/// Delay with fringe phase `phase` on the carrier fringe nearest `coarse_delay_ps`.
///
/// This is the simulated analogue of parking the coarse stage and then
/// stepping the fine stage: `tau = (2 pi k + phase) / wp` with `k` the fringe
/// order closest to the coarse delay.
pub fn delay_at_phase(jsa: &JsaGrid, coarse_delay_ps: f64, phase: f64) -> f64 {
    let carrier = jsa.sum_carrier_frequency();
    let order = (carrier * coarse_delay_ps / TAU).round();
    (TAU * order + phase) / carrier
}

/// Optical period of the sum-frequency fringe, ps.
pub fn carrier_period(jsa: &JsaGrid) -> f64 {
    TAU / jsa.sum_carrier_frequency()
}

fn coincidence(jsa: &JsaGrid, delay_ps: f64, kind: InterferenceKind) -> Result<f64> {
    jsa.require_normalized()?;
    let g = jsa.grid();
    let sign = kind.sign();
    let mut acc = CompensatedSum::new();
    for ((i, j), z) in jsa.amplitude().indexed_iter() {
        let beat = kind.beat(g.signal.value(i), g.idler.value(j));
        acc.add(z.norm_sqr() * (1.0 + sign * (beat * delay_ps).cos()));
    }
    Ok(0.5 * acc.total() * g.cell_area())
}

fn jsi(jsa: &JsaGrid, delay_ps: f64, kind: InterferenceKind) -> Result<JsiMap> {
    jsa.require_normalized()?;
    let g = *jsa.grid();
    let sign = kind.sign();
    let amp = jsa.amplitude();
    let intensity = Array2::from_shape_fn(g.shape(), |(i, j)| {
        let beat = kind.beat(g.signal.value(i), g.idler.value(j));
        0.5 * amp[[i, j]].norm_sqr() * (1.0 + sign * (beat * delay_ps).cos())
    });
    Ok(JsiMap {
        grid: g,
        intensity,
        delay_ps,
        phase_label: phase_label(jsa, delay_ps),
        kind,
    })
}

/// Two-fold NOON coincidence probability at `delay_ps`.
pub fn noon_coincidence(jsa: &JsaGrid, delay_ps: f64) -> Result<f64> {
    coincidence(jsa, delay_ps, InterferenceKind::Noon)
}

/// Joint spectral intensity of the NOON coincidences at `delay_ps`.
pub fn noon_jsi(jsa: &JsaGrid, delay_ps: f64) -> Result<JsiMap> {
    jsi(jsa, delay_ps, InterferenceKind::Noon)
}

/// HOM coincidence probability `1/2 sum |f|^2 [1 - cos((ws - wi) tau)]`.
///
/// Meaningful for exchange-symmetric JSAs; the caller is responsible for
/// symmetrizing first.
pub fn hom_coincidence(jsa: &JsaGrid, delay_ps: f64) -> Result<f64> {
    coincidence(jsa, delay_ps, InterferenceKind::Hom)
}

/// Joint spectral intensity of the HOM coincidences at `delay_ps`.
pub fn hom_jsi(jsa: &JsaGrid, delay_ps: f64) -> Result<JsiMap> {
    jsi(jsa, delay_ps, InterferenceKind::Hom)
}

/// Dispatch on `kind`.
pub fn coincidence_of(jsa: &JsaGrid, delay_ps: f64, kind: InterferenceKind) -> Result<f64> {
    coincidence(jsa, delay_ps, kind)
}

/// Dispatch on `kind`.
pub fn jsi_of(jsa: &JsaGrid, delay_ps: f64, kind: InterferenceKind) -> Result<JsiMap> {
    jsi(jsa, delay_ps, kind)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::spectral::{build_gaussian_jsa, GaussianJsaParams, PumpSpec};
    use crate::Error;
    use std::f64::consts::{FRAC_PI_4, PI};

    pub(crate) fn test_jsa(n: usize) -> JsaGrid {
        let grid = FrequencyGrid::from_wavelength_window(1582.0, 1586.0, n).unwrap();
        let params = GaussianJsaParams {
            along_bandwidth: 0.93,
            across_bandwidth: 0.9,
            correlation_angle: FRAC_PI_4,
        };
        build_gaussian_jsa(&PumpSpec::new(792.0, 2.0).unwrap(), &params, &grid).unwrap()
    }

    #[test]
    fn zero_delay_peak_and_dip() {
        let jsa = test_jsa(96);
        assert!((noon_coincidence(&jsa, 0.0).unwrap() - 1.0).abs() < 1e-9);
        assert!(hom_coincidence(&jsa, 0.0).unwrap().abs() < 1e-9);
    }

    #[test]
    fn long_delay_washes_out() {
        let jsa = test_jsa(128);
        assert!((noon_coincidence(&jsa, 50.0).unwrap() - 0.5).abs() < 1e-3);
        assert!((hom_coincidence(&jsa, 50.0).unwrap() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn zero_delay_map_is_source_jsi() {
        let jsa = test_jsa(64);
        let map = noon_jsi(&jsa, 0.0).unwrap();
        let src = jsa.intensity();
        for (a, b) in map.intensity.iter().zip(src.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn map_marginalizes_to_coincidence() {
        let jsa = test_jsa(64);
        for tau in [-3.7, 0.0013, 2.5, 9.999] {
            let map = noon_jsi(&jsa, tau).unwrap();
            assert!((map.total() - noon_coincidence(&jsa, tau).unwrap()).abs() < 1e-9);
            let hom = hom_jsi(&jsa, tau).unwrap();
            assert!((hom.total() - hom_coincidence(&jsa, tau).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn half_carrier_period_is_darkest_phase() {
        let jsa = test_jsa(64);
        let totals: Vec<f64> = [0.0, PI / 2.0, PI, 1.5 * PI, 2.0 * PI]
            .iter()
            .map(|&p| {
                noon_jsi(&jsa, delay_at_phase(&jsa, 0.0, p))
                    .unwrap()
                    .total()
            })
            .collect();
        let darkest = totals
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(darkest, 2);
        assert!(totals[0] > 0.999 && totals[4] > 0.999);
    }

    #[test]
    fn mirrored_fine_phase_maps_agree() {
        let jsa = test_jsa(64);
        for phi in [0.3, 1.0, 2.2] {
            let a = noon_jsi(&jsa, delay_at_phase(&jsa, 0.0, phi)).unwrap();
            let b = noon_jsi(&jsa, delay_at_phase(&jsa, 0.0, -phi)).unwrap();
            assert!((b.phase_label - (TAU - phi)).abs() < 1e-9);
            for (x, y) in a.intensity.iter().zip(b.intensity.iter()) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn unnormalized_input_is_a_contract_error() {
        let jsa = test_jsa(32);
        let raw = JsaGrid::new(
            *jsa.grid(),
            jsa.amplitude().mapv(|z| z * 2.0),
            jsa.degenerate_frequency(),
        )
        .unwrap();
        assert!(matches!(
            noon_coincidence(&raw, 0.0),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            hom_jsi(&raw, 0.0),
            Err(Error::NotNormalized { .. })
        ));
    }
}
