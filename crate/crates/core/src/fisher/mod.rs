//! Fisher information of the integrated and spectrally resolved NOON
//! measurements, and Monte-Carlo maximum-likelihood checks against the
//! Cramér–Rao bound.
//!
//! Information is reported per detected pair, in ps⁻².

mod mle;
mod report;
mod sampling;

pub use mle::{log_likelihood, mle_delay, mle_delay_with, MleOptions};
pub use report::{crlb_report, EstimationConfig, EstimationReport};
pub use sampling::{sample_events, sample_events_with, EventList, SamplingMode};

use rayon::prelude::*;

use crate::interference::{InterferenceKind, Interferometer};
use crate::numeric::CompensatedSum;
use crate::spectral::JsaGrid;
use crate::{Error, Result};

/// Probabilities closer than this to 0 or 1 make the integrated Fisher
/// information singular.
pub const SINGULAR_EPSILON: f64 = 1e-9;

/// Default central-difference step as a fraction of the carrier period.
pub const DEFAULT_STEP_FRACTION: f64 = 1.0 / 200.0;

/// Largest usable central-difference step, as a fraction of the period.
pub const MAX_STEP_FRACTION: f64 = 1.0 / 8.0;

/// Which second moment of `ws + wi` the spectrally resolved information uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SumMoment {
    /// `sum |f|^2 (ws + wi)^2`, as usually written.
    #[default]
    Raw,
    /// `Var(ws + wi)`: a global frequency offset carries no delay information
    /// once the carrier phase is known.
    Centered,
}

/// Default derivative step (ps) for `jsa`.
pub fn default_derivative_step(jsa: &JsaGrid) -> f64 {
    crate::interference::carrier_period(jsa) * DEFAULT_STEP_FRACTION
}

impl Interferometer {
    /// `P'^2 / (P (1 - P))` of the NOON probability, with `P'` from a
    /// central difference of step `step_ps`.
    pub fn fisher_nsr(&self, delay_ps: f64, step_ps: f64) -> Result<f64> {
        if !(step_ps > 0.0 && step_ps.is_finite()) {
            return Err(Error::invalid(
                "fisher.derivative_step_ps",
                "must be positive",
            ));
        }
        let limit = self.carrier_period() * MAX_STEP_FRACTION;
        if step_ps > limit {
            return Err(Error::Aliasing(format!(
                "derivative step {step_ps} ps exceeds {limit:.3e} ps (1/8 of the fringe period)"
            )));
        }
        let kind = InterferenceKind::Noon;
        let p = self.probability(kind, delay_ps);
        if !(SINGULAR_EPSILON..=1.0 - SINGULAR_EPSILON).contains(&p) {
            return Err(Error::Singular {
                delay_ps,
                probability: p,
            });
        }
        let dp = (self.probability(kind, delay_ps + step_ps)
            - self.probability(kind, delay_ps - step_ps))
            / (2.0 * step_ps);
        Ok(dp * dp / (p * (1.0 - p)))
    }

    /// Spectrally resolved Fisher information; independent of delay.
    pub fn fisher_sr(&self, moment: SumMoment) -> f64 {
        let proj = self.projection(InterferenceKind::Noon);
        match moment {
            SumMoment::Raw => proj.moment(2),
            SumMoment::Centered => {
                let total = proj.total_weight();
                let mean = proj.moment(1) / total;
                let s: CompensatedSum = proj
                    .values()
                    .iter()
                    .zip(proj.weights())
                    .map(|(v, w)| w * (v - mean) * (v - mean))
                    .collect();
                s.total() / total
            }
        }
    }
}

/// Integrated (non-spectrally-resolved) Fisher information at `delay_ps`.
pub fn fisher_nsr(jsa: &JsaGrid, delay_ps: f64, step_ps: f64) -> Result<f64> {
    Interferometer::new(jsa)?.fisher_nsr(delay_ps, step_ps)
}

/// Spectrally resolved Fisher information `sum |f|^2 (ws + wi)^2 dws dwi`.
pub fn fisher_sr(jsa: &JsaGrid) -> Result<f64> {
    Ok(Interferometer::new(jsa)?.fisher_sr(SumMoment::Raw))
}

/// See [`SumMoment`].
pub fn fisher_sr_with(jsa: &JsaGrid, moment: SumMoment) -> Result<f64> {
    Ok(Interferometer::new(jsa)?.fisher_sr(moment))
}

/// Integrated Fisher information over a delay sweep, next to the
/// delay-independent spectrally resolved value.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherCurve {
    pub delays: Vec<f64>,
    pub f_nsr: Vec<f64>,
    pub f_sr: f64,
    /// Sweep points dropped because `P` was within [`SINGULAR_EPSILON`] of 0
    /// or 1.
    pub singular_delays: Vec<f64>,
    pub derivative_step_ps: f64,
}

impl FisherCurve {
    /// Largest integrated information on the sweep and its delay.
    pub fn max_nsr(&self) -> Option<(f64, f64)> {
        self.delays
            .iter()
            .zip(&self.f_nsr)
            .map(|(&d, &f)| (d, f))
            .fold(None, |best, (d, f)| match best {
                Some((_, bf)) if bf >= f => best,
                _ => Some((d, f)),
            })
    }
}

/// Evaluate [`fisher_nsr`] over `delays` (singular points are skipped and
/// listed) together with [`fisher_sr`].
pub fn fisher_curve(jsa: &JsaGrid, delays: &[f64], step_ps: f64) -> Result<FisherCurve> {
    let it = Interferometer::new(jsa)?;
    let values: Vec<Result<f64>> = delays
        .par_iter()
        .map(|&d| it.fisher_nsr(d, step_ps))
        .collect();
    let mut curve = FisherCurve {
        delays: Vec::with_capacity(delays.len()),
        f_nsr: Vec::with_capacity(delays.len()),
        f_sr: it.fisher_sr(SumMoment::Raw),
        singular_delays: Vec::new(),
        derivative_step_ps: step_ps,
    };
    for (&d, v) in delays.iter().zip(values) {
        match v {
            Ok(f) => {
                curve.delays.push(d);
                curve.f_nsr.push(f);
            }
            Err(Error::Singular { .. }) => curve.singular_delays.push(d),
            Err(e) => return Err(e),
        }
    }
    Ok(curve)
}
