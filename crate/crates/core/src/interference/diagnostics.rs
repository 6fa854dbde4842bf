use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{DelayScan, InterferenceKind, JsiMap};
use crate::{Error, Result};

/// Lobes below this fraction of the map maximum (in height or in
/// prominence) are not counted.
pub const DEFAULT_LOBE_THRESHOLD: f64 = 0.05;

/// Minimum number of section samples between neighbouring lobes.
pub const MIN_SAMPLES_PER_LOBE: usize = 8;

/// `(max - min) / (max + min)` over the scan samples.
///
/// NOON scans must span at least one carrier period. A flat scan has zero
/// visibility and logs a warning.
pub fn visibility(scan: &DelayScan, carrier_period_ps: Option<f64>) -> Result<f64> {
    if scan.len() < 2 {
        return Err(Error::WindowTooSmall(
            "visibility needs at least two samples".into(),
        ));
    }
    if let (InterferenceKind::Noon, Some(period)) = (scan.kind(), carrier_period_ps) {
        if scan.span() < period * (1.0 - 1e-9) {
            return Err(Error::WindowTooSmall(format!(
                "scan spans {:.4} fs but one fringe period is {:.4} fs",
                scan.span() * 1e3,
                period * 1e3
            )));
        }
    }
    let p = scan.probabilities();
    let max = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = p.iter().copied().fold(f64::INFINITY, f64::min);
    if !(max + min > 0.0) || max - min <= 0.0 {
        log::warn!("degenerate scan: zero fringe contrast (max {max}, min {min})");
        return Ok(0.0);
    }
    Ok((max - min) / (max + min))
}

/// Fringe period (ps) measured from the mean-level crossings of a fine scan.
pub fn oscillation_period(scan: &DelayScan) -> Result<f64> {
    let p = scan.probabilities();
    let t = scan.delays();
    let mean = p.iter().sum::<f64>() / p.len() as f64;
    // falling and rising crossings separately: a biased mean shifts each set
    // uniformly, so same-direction spacings stay exact
    let (mut falling, mut rising) = (Vec::new(), Vec::new());
    for k in 1..p.len() {
        let (a, b) = (p[k - 1] - mean, p[k] - mean);
        if a > 0.0 && b <= 0.0 {
            falling.push(t[k - 1] + a / (a - b) * (t[k] - t[k - 1]));
        } else if a < 0.0 && b >= 0.0 {
            rising.push(t[k - 1] + a / (a - b) * (t[k] - t[k - 1]));
        }
    }
    let crossings = if falling.len() >= rising.len() {
        falling
    } else {
        rising
    };
    if crossings.len() < 2 {
        return Err(Error::WindowTooSmall(
            "need two same-direction mean-level crossings to measure a period".into(),
        ));
    }
    Ok((crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64)
}

/// Direction of the 1-D section used for lobe counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LobeAxis {
    /// Along which `ws + wi` varies (`ws - wi` fixed): crosses NOON fringes.
    Sum,
    /// Along which `ws - wi` varies: crosses HOM fringes.
    Difference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LobeOptions {
    /// Height and prominence threshold, relative to the map maximum.
    pub threshold: f64,
    pub axis: LobeAxis,
}

impl Default for LobeOptions {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_LOBE_THRESHOLD,
            axis: LobeAxis::Sum,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn of(count: usize) -> Self {
        if count % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }
}

/// Count intensity lobes along the section through the intensity centroid.
///
/// A lobe is a local maximum of the section whose height and topographic
/// prominence both reach `threshold` times the map maximum. Counting
/// prominence rather than plain threshold crossings keeps lobes separate when
/// blur lifts the dark fringes above the threshold.
pub fn count_lobes(intensity: &Array2<f64>, options: &LobeOptions) -> Result<usize> {
    let (n, m) = intensity.dim();
    let total: f64 = intensity.sum();
    let max = intensity.iter().copied().fold(0.0, f64::max);
    if !(total > 0.0) || !(max > 0.0) {
        return Err(Error::Degenerate(
            "cannot count lobes of an empty map".into(),
        ));
    }
    let (mut ci, mut cj) = (0.0, 0.0);
    for ((i, j), v) in intensity.indexed_iter() {
        ci += i as f64 * v;
        cj += j as f64 * v;
    }
    let (ci, cj) = ((ci / total).round() as isize, (cj / total).round() as isize);

    let dj: isize = match options.axis {
        LobeAxis::Sum => 1,
        LobeAxis::Difference => -1,
    };
    let inside = |k: isize| {
        let (i, j) = (ci + k, cj + dj * k);
        i >= 0 && j >= 0 && (i as usize) < n && (j as usize) < m
    };
    let mut lo = 0isize;
    while inside(lo - 1) {
        lo -= 1;
    }
    let mut hi = 0isize;
    while inside(hi + 1) {
        hi += 1;
    }
    let section: Vec<f64> = (lo..=hi)
        .map(|k| intensity[[(ci + k) as usize, (cj + dj * k) as usize]])
        .collect();

    let level = options.threshold * max;
    let peaks = prominent_peaks(&section, level);
    if let Some(gap) = peaks.windows(2).map(|w| w[1] - w[0]).min() {
        if gap < MIN_SAMPLES_PER_LOBE {
            return Err(Error::Aliasing(format!(
                "lobes only {gap} samples apart on the section; need {MIN_SAMPLES_PER_LOBE}"
            )));
        }
    }
    Ok(peaks.len())
}

/// Indices of local maxima with height and prominence at least `level`.
fn prominent_peaks(y: &[f64], level: f64) -> Vec<usize> {
    let n = y.len();
    let mut out = Vec::new();
    let mut k = 0;
    while k < n {
        // plateau [k, e]
        let mut e = k;
        while e + 1 < n && y[e + 1] == y[k] {
            e += 1;
        }
        let rises = k == 0 || y[k - 1] < y[k];
        let falls = e == n - 1 || y[e + 1] < y[k];
        if rises && falls && y[k] >= level {
            let h = y[k];
            // the map is dark outside the section, so a walk that reaches an
            // edge without meeting higher terrain bottoms out at zero
            let mut left_min = h;
            let mut i = k;
            while i > 0 && y[i - 1] <= h {
                i -= 1;
                left_min = left_min.min(y[i]);
            }
            if i == 0 {
                left_min = left_min.min(0.0);
            }
            let mut right_min = h;
            let mut j = e;
            while j + 1 < n && y[j + 1] <= h {
                j += 1;
                right_min = right_min.min(y[j]);
            }
            if j == n - 1 {
                right_min = right_min.min(0.0);
            }
            let base = left_min.max(right_min);
            if h - base >= level {
                out.push((k + e) / 2);
            }
        }
        k = e + 1;
    }
    out
}

/// Lobe count of a JSI map along the section crossing its fringes.
pub fn lobe_count(map: &JsiMap, threshold: f64) -> Result<usize> {
    let axis = match map.kind {
        InterferenceKind::Noon => LobeAxis::Sum,
        InterferenceKind::Hom => LobeAxis::Difference,
    };
    count_lobes(&map.intensity, &LobeOptions { threshold, axis })
}

/// Odd or even lobe count, with the default threshold.
pub fn lobe_parity(map: &JsiMap) -> Result<Parity> {
    lobe_count(map, DEFAULT_LOBE_THRESHOLD).map(Parity::of)
}

/// Dominant fringe direction of a map, in grid-index coordinates.
///
/// Angles are in degrees in `(-90, 90]`, measured from the signal axis
/// towards the idler axis. The fringe lines are perpendicular to the dominant
/// wavevector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeOrientation {
    pub wavevector_angle_deg: f64,
    pub fringe_angle_deg: f64,
    /// Dominant spatial frequency, cycles per sample along each axis.
    pub wavevector: [f64; 2],
}

fn wrap_half_turn(deg: f64) -> f64 {
    let mut a = deg.rem_euclid(180.0);
    if a > 90.0 {
        a -= 180.0;
    }
    a
}

/// Locate the strongest non-DC spatial frequency of `intensity` with a
/// zero-padded 2-D FFT and refine it by a power-weighted centroid.
///
/// Frequencies closer to DC than `min_radius` cycles per map width are
/// ignored so that the smooth spectral envelope does not win.
pub fn fringe_orientation(intensity: &Array2<f64>, min_radius: f64) -> Result<FringeOrientation> {
    let (n, m) = intensity.dim();
    if n < 8 || m < 8 {
        return Err(Error::WindowTooSmall(
            "map too small for a 2-D spectrum".into(),
        ));
    }
    let pad = 4;
    let size = (pad * n.max(m)).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); size * size];
    let mean = intensity.mean().unwrap_or(0.0);
    for ((i, j), v) in intensity.indexed_iter() {
        buf[i * size + j] = Complex64::new(v - mean, 0.0);
    }
    let fft = FftPlanner::new().plan_fft_forward(size);
    for row in buf.chunks_mut(size) {
        fft.process(row);
    }
    let mut t = vec![Complex64::new(0.0, 0.0); size * size];
    for i in 0..size {
        for j in 0..size {
            t[j * size + i] = buf[i * size + j];
        }
    }
    for row in t.chunks_mut(size) {
        fft.process(row);
    }
    // t[kj * size + ki]
    let signed = |k: usize| {
        if k > size / 2 {
            k as f64 - size as f64
        } else {
            k as f64
        }
    };
    let per_bin = 1.0 / size as f64;
    let cutoff = min_radius / n.max(m) as f64;
    let mut best = (0usize, 0usize, 0.0f64);
    for kj in 0..size {
        for ki in 0..size {
            let (fi, fj) = (signed(ki) * per_bin, signed(kj) * per_bin);
            if (fi * fi + fj * fj).sqrt() < cutoff {
                continue;
            }
            let p = t[kj * size + ki].norm_sqr();
            if p > best.2 {
                best = (ki, kj, p);
            }
        }
    }
    if !(best.2 > 0.0) {
        return Err(Error::Degenerate("map has no oscillating component".into()));
    }
    let half = pad as isize * 2;
    let (mut wi, mut wj, mut wsum) = (0.0, 0.0, 0.0);
    for di in -half..=half {
        for dj in -half..=half {
            let ki = (best.0 as isize + di).rem_euclid(size as isize) as usize;
            let kj = (best.1 as isize + dj).rem_euclid(size as isize) as usize;
            let p = t[kj * size + ki].norm_sqr();
            wi += p * (signed(best.0) + di as f64);
            wj += p * (signed(best.1) + dj as f64);
            wsum += p;
        }
    }
    let (fi, fj) = (wi / wsum * per_bin, wj / wsum * per_bin);
    let wavevector_angle_deg = wrap_half_turn(fj.atan2(fi).to_degrees());
    Ok(FringeOrientation {
        wavevector_angle_deg,
        fringe_angle_deg: wrap_half_turn(wavevector_angle_deg + 90.0),
        wavevector: [fi, fj],
    })
}

/// Summary of a fringe measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeDiagnostics {
    pub visibility: f64,
    pub oscillation_period_fs: f64,
    pub envelope_fwhm_ps: f64,
    pub lobe_count: usize,
}
