use ndarray::{Array2, Axis};
use statrs::function::erf::erf;

use super::{wavelength_to_time, SpectrometerSpec};
use crate::interference::JsiMap;
use crate::numeric::{CompensatedSum, FWHM_PER_SIGMA};
use crate::spectral::UniformAxis;
use crate::{wavelength_from_omega, Error, Result};

/// Kernel half-width in standard deviations.
const KERNEL_SIGMAS: f64 = 6.0;

/// Joint intensity on the arrival-time grid (`t1` for the signal channel,
/// `t2` for the idler channel; bin centres in ps).
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalTimeMap {
    pub t1: UniformAxis,
    pub t2: UniformAxis,
    /// Probability mass in each time bin.
    pub intensity: Array2<f64>,
    /// Mass of the map before any window truncation, the denominator for
    /// acquisition probabilities.
    pub source_mass: f64,
    pub delay_ps: f64,
    pub phase_label: f64,
}

impl ArrivalTimeMap {
    pub fn new(t1: UniformAxis, t2: UniformAxis, intensity: Array2<f64>) -> Result<Self> {
        if intensity.dim() != (t1.len(), t2.len()) {
            return Err(Error::Shape(format!(
                "intensity is {:?} but axes are {}x{}",
                intensity.dim(),
                t1.len(),
                t2.len()
            )));
        }
        if intensity.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::NonFinite(
                "arrival-time intensity must be finite and >= 0".into(),
            ));
        }
        let source_mass = mass(&intensity);
        Ok(Self {
            t1,
            t2,
            intensity,
            source_mass,
            delay_ps: 0.0,
            phase_label: 0.0,
        })
    }

    pub fn total(&self) -> f64 {
        mass(&self.intensity)
    }

    /// Edges of the `t1` bins.
    pub fn t1_edges(&self) -> Vec<f64> {
        edges(&self.t1)
    }

    pub fn t2_edges(&self) -> Vec<f64> {
        edges(&self.t2)
    }
}

fn edges(axis: &UniformAxis) -> Vec<f64> {
    (0..=axis.len())
        .map(|k| axis.start() + (k as f64 - 0.5) * axis.step())
        .collect()
}

fn mass(a: &Array2<f64>) -> f64 {
    a.iter().copied().collect::<CompensatedSum>().total()
}

/// Mass bookkeeping of one blur.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlurReport {
    pub input_mass: f64,
    /// Fraction of the input landing inside the time window after the
    /// wavelength-to-time mapping.
    pub in_window_fraction: f64,
    /// Fraction of the in-window mass kept by the jitter convolution.
    pub retained_fraction: f64,
    pub output_mass: f64,
    /// Kernel length in bins for each channel.
    pub kernel_taps: [usize; 2],
}

/// `(n_time_bins x n_omega)` matrix distributing each frequency cell over the
/// time bins it maps onto, in proportion to the overlap.
fn rebin_matrix(omega: &UniformAxis, spec: &SpectrometerSpec, time: &UniformAxis) -> Array2<f64> {
    let mut r = Array2::zeros((time.len(), omega.len()));
    let (t0, b) = (time.start() - 0.5 * time.step(), time.step());
    for i in 0..omega.len() {
        let w = omega.value(i);
        let half = 0.5 * omega.step();
        let ta = wavelength_to_time(wavelength_from_omega(w - half), spec);
        let tb = wavelength_to_time(wavelength_from_omega(w + half), spec);
        let (lo, hi) = if ta < tb { (ta, tb) } else { (tb, ta) };
        let width = hi - lo;
        let first = ((lo - t0) / b).floor().max(0.0) as usize;
        let last = (((hi - t0) / b).ceil().max(0.0) as usize).min(time.len());
        for k in first..last {
            let (e0, e1) = (t0 + k as f64 * b, t0 + (k + 1) as f64 * b);
            let overlap = hi.min(e1) - lo.max(e0);
            if overlap > 0.0 {
                r[[k, i]] = overlap / width;
            }
        }
    }
    r
}

/// Re-express a JSI on the arrival-time grids of the two channels.
///
/// Each frequency cell is spread uniformly over its image interval in time,
/// so mass is conserved apart from what falls outside the window.
pub fn to_arrival_time(
    map: &JsiMap,
    signal: &SpectrometerSpec,
    idler: &SpectrometerSpec,
) -> Result<ArrivalTimeMap> {
    let (t1, t2) = (signal.time_axis()?, idler.time_axis()?);
    let rs = rebin_matrix(&map.grid.signal, signal, &t1);
    let ri = rebin_matrix(&map.grid.idler, idler, &t2);
    let cell_mass = &map.intensity * map.grid.cell_area();
    let intensity = rs.dot(&cell_mass).dot(&ri.t());
    Ok(ArrivalTimeMap {
        t1,
        t2,
        intensity,
        source_mass: map.total(),
        delay_ps: map.delay_ps,
        phase_label: map.phase_label,
    })
}

/// Gaussian jitter kernel integrated over time bins of width `bin_ps`,
/// truncated at six standard deviations. Zero jitter gives the identity.
pub fn jitter_kernel(jitter_fwhm_ps: f64, bin_ps: f64) -> Vec<f64> {
    if jitter_fwhm_ps == 0.0 {
        return vec![1.0];
    }
    let sigma = jitter_fwhm_ps / FWHM_PER_SIGMA;
    let half = (KERNEL_SIGMAS * sigma / bin_ps).ceil() as isize;
    let z = |t: f64| 0.5 * (1.0 + erf(t / (sigma * std::f64::consts::SQRT_2)));
    (-half..=half)
        .map(|d| z((d as f64 + 0.5) * bin_ps) - z((d as f64 - 0.5) * bin_ps))
        .collect()
}

/// Convolve every lane of `a` along `axis` with a centred kernel; mass pushed
/// past the ends is dropped.
fn convolve_axis(a: &Array2<f64>, kernel: &[f64], axis: Axis) -> Array2<f64> {
    let half = (kernel.len() / 2) as isize;
    let mut out = Array2::zeros(a.dim());
    for (lane_in, mut lane_out) in a.lanes(axis).into_iter().zip(out.lanes_mut(axis)) {
        let n = lane_in.len() as isize;
        for (k, o) in lane_out.iter_mut().enumerate() {
            let mut s = 0.0;
            for (m, w) in kernel.iter().enumerate() {
                let src = k as isize + half - m as isize;
                if src >= 0 && src < n {
                    s += w * lane_in[src as usize];
                }
            }
            *o = s;
        }
    }
    out
}

/// Convolve an arrival-time map with each channel's jitter kernel.
pub fn apply_jitter(
    map: &ArrivalTimeMap,
    signal: &SpectrometerSpec,
    idler: &SpectrometerSpec,
) -> Result<(ArrivalTimeMap, BlurReport)> {
    signal.validate()?;
    idler.validate()?;
    let k1 = jitter_kernel(signal.jitter_fwhm_ps, map.t1.step());
    let k2 = jitter_kernel(idler.jitter_fwhm_ps, map.t2.step());
    let before = map.total();
    let blurred = convolve_axis(&convolve_axis(&map.intensity, &k1, Axis(0)), &k2, Axis(1));
    let after = mass(&blurred);
    let retained = if before > 0.0 { after / before } else { 1.0 };
    if k1.len() > map.t1.len() || k2.len() > map.t2.len() {
        log::warn!(
            "jitter kernel ({} / {} bins) is wider than the time window ({} / {} bins); \
             {:.6} of the mass is retained",
            k1.len(),
            k2.len(),
            map.t1.len(),
            map.t2.len(),
            retained
        );
    }
    let report = BlurReport {
        input_mass: map.source_mass,
        in_window_fraction: if map.source_mass > 0.0 {
            before / map.source_mass
        } else {
            1.0
        },
        retained_fraction: retained,
        output_mass: after,
        kernel_taps: [k1.len(), k2.len()],
    };
    Ok((
        ArrivalTimeMap {
            intensity: blurred,
            ..map.clone()
        },
        report,
    ))
}

/// Map a JSI to arrival time and blur it with the jitter of `spec` on both
/// channels.
pub fn blur(map: &JsiMap, spec: &SpectrometerSpec) -> Result<(ArrivalTimeMap, BlurReport)> {
    blur_channels(map, spec, spec)
}

/// [`blur`] with separate signal and idler channels.
pub fn blur_channels(
    map: &JsiMap,
    signal: &SpectrometerSpec,
    idler: &SpectrometerSpec,
) -> Result<(ArrivalTimeMap, BlurReport)> {
    if map.intensity.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("JSI contains non-finite values".into()));
    }
    let timed = to_arrival_time(map, signal, idler)?;
    apply_jitter(&timed, signal, idler)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interference::tests::test_jsa;
    use crate::interference::{count_lobes, delay_at_phase, noon_jsi, LobeOptions, Parity};
    use crate::numeric::fwhm_linear;

    #[test]
    fn rebinning_conserves_in_window_mass() {
        let jsa = test_jsa(128);
        let map = noon_jsi(&jsa, 3.0).unwrap();
        let spec = SpectrometerSpec::default();
        let timed = to_arrival_time(&map, &spec, &spec).unwrap();
        // the 1582-1586 nm grid maps to +-1882 ps, inside the default window
        assert!((timed.total() - map.total()).abs() / map.total() < 1e-12);
    }

    #[test]
    fn zero_jitter_is_identity() {
        let jsa = test_jsa(64);
        let map = noon_jsi(&jsa, 3.0).unwrap();
        let spec = SpectrometerSpec {
            jitter_fwhm_ps: 0.0,
            ..Default::default()
        };
        let timed = to_arrival_time(&map, &spec, &spec).unwrap();
        let (blurred, report) = blur(&map, &spec).unwrap();
        assert_eq!(blurred.intensity, timed.intensity);
        assert_eq!(report.kernel_taps, [1, 1]);
    }

    #[test]
    fn impulse_response_is_the_kernel() {
        let spec = SpectrometerSpec::default();
        let axis = spec.time_axis().unwrap();
        let mut delta = Array2::zeros((axis.len(), axis.len()));
        let c = axis.len() / 2;
        delta[[c, c]] = 1.0;
        let map = ArrivalTimeMap::new(axis, axis, delta).unwrap();
        let (out, report) = apply_jitter(&map, &spec, &spec).unwrap();
        assert!((report.retained_fraction - 1.0).abs() < 1e-6);
        let t: Vec<f64> = axis.values();
        let row: Vec<f64> = out.intensity.row(c).to_vec();
        let col: Vec<f64> = out.intensity.column(c).to_vec();
        for profile in [row, col] {
            let fwhm = fwhm_linear(&t, &profile).unwrap();
            assert!((fwhm - 100.0).abs() / 100.0 < 0.01, "{fwhm}");
        }
        // separable
        let k = jitter_kernel(100.0, 10.0);
        let h = k.len() / 2;
        assert!((out.intensity[[c + 3, c - 2]] - k[h + 3] * k[h - 2]).abs() < 1e-15);
    }

    #[test]
    fn blur_is_linear() {
        let jsa = test_jsa(64);
        let map = noon_jsi(&jsa, 3.0).unwrap();
        let mut scaled = map.clone();
        scaled.intensity *= 3.5;
        let spec = SpectrometerSpec::default();
        let (a, _) = blur(&map, &spec).unwrap();
        let (b, _) = blur(&scaled, &spec).unwrap();
        let max = a.intensity.iter().copied().fold(0.0, f64::max);
        for (x, y) in a.intensity.iter().zip(&b.intensity) {
            assert!((3.5 * x - y).abs() <= 1e-12 * 3.5 * max);
        }
    }

    #[test]
    fn kernel_wider_than_window_loses_mass() {
        let spec = SpectrometerSpec {
            time_window_ps: [-50.0, 50.0],
            jitter_fwhm_ps: 100.0,
            ..Default::default()
        };
        let axis = spec.time_axis().unwrap();
        let map = ArrivalTimeMap::new(axis, axis, Array2::from_elem((10, 10), 1.0)).unwrap();
        let (_, report) = apply_jitter(&map, &spec, &spec).unwrap();
        assert!(report.retained_fraction < 0.5);
    }

    #[test]
    fn parity_survives_jitter() {
        let jsa = test_jsa(256);
        let spec = SpectrometerSpec::default();
        for (phase, parity) in [(0.0, Parity::Odd), (std::f64::consts::PI, Parity::Even)] {
            let map = noon_jsi(&jsa, delay_at_phase(&jsa, 10.0, phase)).unwrap();
            let (blurred, _) = blur(&map, &spec).unwrap();
            let n = count_lobes(&blurred.intensity, &LobeOptions::default()).unwrap();
            assert_eq!(Parity::of(n), parity, "{n} lobes at phase {phase}");
        }
    }
}
