use std::f64::consts::TAU;

use rayon::prelude::*;

use super::{InterferenceKind, Interferometer};
use crate::numeric::fwhm_linear;
use crate::spectral::JsaGrid;
use crate::{Error, Result};

/// Fine scans must take at least this many samples per carrier period.
pub const MIN_SAMPLES_PER_PERIOD: f64 = 8.0;

/// Slack allowed on probabilities outside `[0, 1]` from rounding.
const PROBABILITY_SLACK: f64 = 1e-12;

/// Coincidence probability sampled along a delay axis.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayScan {
    delays: Vec<f64>,
    probabilities: Vec<f64>,
    kind: InterferenceKind,
}

impl DelayScan {
    pub fn new(delays: Vec<f64>, probabilities: Vec<f64>, kind: InterferenceKind) -> Result<Self> {
        if delays.len() != probabilities.len() {
            return Err(Error::Shape(format!(
                "{} delays but {} probabilities",
                delays.len(),
                probabilities.len()
            )));
        }
        if delays.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("scan.delays", "must be strictly increasing"));
        }
        if let Some(p) = probabilities
            .iter()
            .find(|p| !(**p >= -PROBABILITY_SLACK && **p <= 1.0 + PROBABILITY_SLACK))
        {
            return Err(Error::invalid(
                "scan.probabilities",
                format!("{p} outside [0, 1]"),
            ));
        }
        Ok(Self {
            delays,
            probabilities,
            kind,
        })
    }

    pub fn delays(&self) -> &[f64] {
        &self.delays
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn kind(&self) -> InterferenceKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.delays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delays.is_empty()
    }

    pub fn span(&self) -> f64 {
        match (self.delays.first(), self.delays.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }
}

fn axis(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::invalid(
            "scan.step_ps",
            format!("must be positive, got {step}"),
        ));
    }
    if !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::invalid(
            "scan.window",
            format!("need start <= stop, got [{start}, {stop}]"),
        ));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|k| start + k as f64 * step).collect())
}

/// Fringe-resolved scan of the chosen coincidence probability.
///
/// NOON scans must resolve the carrier fringe (at least
/// [`MIN_SAMPLES_PER_PERIOD`] samples per `2 pi / wp`); HOM fringes carry no
/// optical carrier and have no such limit.
pub fn scan(
    jsa: &JsaGrid,
    start_ps: f64,
    stop_ps: f64,
    step_ps: f64,
    kind: InterferenceKind,
) -> Result<DelayScan> {
    Interferometer::new(jsa)?.scan(start_ps, stop_ps, step_ps, kind)
}

impl Interferometer {
    pub fn scan(
        &self,
        start_ps: f64,
        stop_ps: f64,
        step_ps: f64,
        kind: InterferenceKind,
    ) -> Result<DelayScan> {
        let delays = axis(start_ps, stop_ps, step_ps)?;
        if kind == InterferenceKind::Noon {
            let samples = self.carrier_period() / step_ps;
            if samples < MIN_SAMPLES_PER_PERIOD {
                return Err(Error::Aliasing(format!(
                    "step {step_ps} ps gives {samples:.2} samples per {:.4} fs carrier period; \
                     a fine NOON scan needs at least {MIN_SAMPLES_PER_PERIOD} (step <= {:.3e} ps). \
                     Use an envelope scan for coarse delays.",
                    self.carrier_period() * 1e3,
                    self.carrier_period() / MIN_SAMPLES_PER_PERIOD
                )));
            }
        }
        let probabilities = self.probabilities(kind, &delays);
        DelayScan::new(delays, probabilities, kind)
    }

    /// Coarse NOON scan reporting the fitted fringe envelope at each delay.
    ///
    /// At each coarse delay the probability is sampled at
    /// `samples_per_period` equispaced points over one carrier period and the
    /// first carrier harmonic is fitted by least squares (an exact DFT bin).
    pub fn envelope_scan(
        &self,
        start_ps: f64,
        stop_ps: f64,
        step_ps: f64,
        samples_per_period: usize,
    ) -> Result<EnvelopeScan> {
        if samples_per_period < 4 {
            return Err(Error::invalid(
                "envelope.samples_per_period",
                "need at least 4 samples per period to fit a fringe",
            ));
        }
        let delays = axis(start_ps, stop_ps, step_ps)?;
        let period = self.carrier_period();
        let m = samples_per_period;
        let fits: Vec<(f64, f64)> = delays
            .par_iter()
            .map(|&tc| {
                let (mut mean, mut c, mut s) = (0.0, 0.0, 0.0);
                for k in 0..m {
                    let phase = TAU * k as f64 / m as f64;
                    let p =
                        self.probability(InterferenceKind::Noon, tc + period * k as f64 / m as f64);
                    mean += p;
                    c += p * phase.cos();
                    s += p * phase.sin();
                }
                let n = m as f64;
                (mean / n, 2.0 * (c * c + s * s).sqrt() / n)
            })
            .collect();
        let upper = fits.iter().map(|(a, amp)| a + amp).collect();
        let lower = fits.iter().map(|(a, amp)| a - amp).collect();
        let contrast = fits
            .iter()
            .map(|(a, amp)| if *a > 0.0 { amp / a } else { 0.0 })
            .collect();
        Ok(EnvelopeScan {
            delays,
            upper,
            lower,
            contrast,
        })
    }
}

/// Fringe envelope of a coarse NOON scan.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeScan {
    pub delays: Vec<f64>,
    /// Fitted fringe maximum at each coarse delay.
    pub upper: Vec<f64>,
    /// Fitted fringe minimum at each coarse delay.
    pub lower: Vec<f64>,
    /// `(upper - lower) / (upper + lower)`, the local visibility.
    pub contrast: Vec<f64>,
}

/// See [`Interferometer::envelope_scan`].
pub fn envelope_scan(
    jsa: &JsaGrid,
    start_ps: f64,
    stop_ps: f64,
    step_ps: f64,
) -> Result<EnvelopeScan> {
    Interferometer::new(jsa)?.envelope_scan(start_ps, stop_ps, step_ps, 16)
}

/// FWHM (ps) of the fringe-contrast envelope, by linear interpolation at half
/// of its maximum.
pub fn envelope_fwhm(envelope: &EnvelopeScan) -> Result<f64> {
    fwhm_linear(&envelope.delays, &envelope.contrast).ok_or_else(|| {
        Error::WindowTooSmall(
            "the contrast envelope does not fall below half maximum on both sides".into(),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::test_jsa;
    use super::*;

    #[test]
    fn undersampled_noon_scan_is_rejected() {
        let jsa = test_jsa(64);
        let err = scan(&jsa, -1.0, 1.0, 0.001, InterferenceKind::Noon).unwrap_err();
        assert!(matches!(err, Error::Aliasing(_)));
        assert!(err.to_string().contains("envelope scan"));
        // HOM fringes have no optical carrier
        assert!(scan(&jsa, -1.0, 1.0, 0.1, InterferenceKind::Hom).is_ok());
    }

    #[test]
    fn peak_versus_dip_at_zero() {
        let jsa = test_jsa(64);
        let noon = scan(&jsa, 0.0, 0.0, 1e-5, InterferenceKind::Noon).unwrap();
        let hom = scan(&jsa, 0.0, 0.0, 1e-5, InterferenceKind::Hom).unwrap();
        assert!((noon.probabilities()[0] - 1.0).abs() < 1e-9);
        assert!(hom.probabilities()[0].abs() < 1e-9);
    }

    #[test]
    fn scan_rejects_bad_axes() {
        assert!(DelayScan::new(vec![0.0, 0.0], vec![0.5, 0.5], InterferenceKind::Noon).is_err());
        assert!(DelayScan::new(vec![0.0, 1.0], vec![0.5, 1.5], InterferenceKind::Noon).is_err());
        let jsa = test_jsa(32);
        assert!(scan(&jsa, 1.0, 0.0, 1e-4, InterferenceKind::Noon).is_err());
        assert!(scan(&jsa, 0.0, 1.0, 0.0, InterferenceKind::Noon).is_err());
    }

    #[test]
    fn envelope_contrast_is_one_at_zero_delay() {
        let jsa = test_jsa(96);
        let env = envelope_scan(&jsa, -0.5, 0.5, 0.5).unwrap();
        assert!((env.contrast[1] - 1.0).abs() < 1e-5);
        assert!(env.contrast[0] < env.contrast[1]);
    }
}
