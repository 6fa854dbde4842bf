use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{mle_delay_with, sample_events_with, MleOptions, SamplingMode, SumMoment};
use crate::interference::Interferometer;
use crate::numeric::CompensatedSum;
use crate::spectral::JsaGrid;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationConfig {
    pub true_delay_ps: f64,
    pub n_events: usize,
    pub n_trials: usize,
    pub mode: SamplingMode,
    pub seed: u64,
    /// Search window half-width; defaults to a quarter carrier period so the
    /// window holds a single likelihood peak.
    pub window_half_width_ps: Option<f64>,
    pub mle: MleOptions,
    /// Derivative step for the integrated information; defaults to 1/200 of
    /// the carrier period.
    pub derivative_step_ps: Option<f64>,
}

impl EstimationConfig {
    pub fn new(
        true_delay_ps: f64,
        n_events: usize,
        n_trials: usize,
        mode: SamplingMode,
        seed: u64,
    ) -> Self {
        Self {
            true_delay_ps,
            n_events,
            n_trials,
            mode,
            seed,
            window_half_width_ps: None,
            mle: MleOptions::default(),
            derivative_step_ps: None,
        }
    }
}

/// Monte-Carlo estimator statistics next to the Cramér–Rao bound.
///
/// Trial `k` draws from ChaCha8 seeded with `seed` on stream `k`, so the
/// report does not depend on the thread count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub mode: SamplingMode,
    pub true_delay_ps: f64,
    pub n_events: usize,
    pub n_trials: usize,
    pub seed: u64,
    pub rng: String,
    /// Trials whose likelihood was flat over the window.
    pub non_identifiable_trials: usize,
    /// Statistics over the identifiable trials (absent if there are fewer
    /// than two).
    pub estimator_mean_ps: Option<f64>,
    pub estimator_variance_ps2: Option<f64>,
    pub estimator_mse_ps2: Option<f64>,
    /// Per-event Fisher information behind the bound (ps^-2).
    pub fisher_information: f64,
    /// `1 / (n_events * fisher_information)` (ps^2).
    pub crlb_ps2: f64,
    pub variance_to_crlb: Option<f64>,
    pub search_window_ps: [f64; 2],
    pub mle_tolerance_ps: f64,
    pub mle_prescan_points: usize,
    pub min_spread_nats: f64,
    pub derivative_step_ps: Option<f64>,
}

impl EstimationReport {
    /// Standard error of the mean estimate, if defined.
    pub fn standard_error_ps(&self) -> Option<f64> {
        let k = self.n_trials - self.non_identifiable_trials;
        self.estimator_variance_ps2.map(|v| (v / k as f64).sqrt())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report fields are plain values")
    }
}

/// Run `n_trials` rounds of [`super::sample_events`] and
/// [`super::mle_delay`] and compare the spread of the estimates with the
/// Cramér–Rao bound, using the spectrally resolved information or the
/// integrated information at the true delay as appropriate.
pub fn crlb_report(jsa: &JsaGrid, config: &EstimationConfig) -> Result<EstimationReport> {
    if config.n_events == 0 || config.n_trials == 0 {
        return Err(Error::invalid(
            "estimation",
            "n_events and n_trials must be positive",
        ));
    }
    let it = Interferometer::new(jsa)?;
    let half = config
        .window_half_width_ps
        .unwrap_or(0.25 * it.carrier_period());
    if !(half > 0.0) {
        return Err(Error::invalid(
            "estimation.window_half_width_ps",
            "must be positive",
        ));
    }
    let window = (config.true_delay_ps - half, config.true_delay_ps + half);
    let (fisher, step) = match config.mode {
        SamplingMode::SpectrallyResolved => (it.fisher_sr(SumMoment::Raw), None),
        SamplingMode::Integrated => {
            let h = config
                .derivative_step_ps
                .unwrap_or(it.carrier_period() * super::DEFAULT_STEP_FRACTION);
            (it.fisher_nsr(config.true_delay_ps, h)?, Some(h))
        }
    };

    let outcomes: Vec<Result<Option<f64>>> = (0..config.n_trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(trial as u64);
            let events = sample_events_with(
                jsa,
                config.true_delay_ps,
                config.n_events,
                config.mode,
                &mut rng,
            )?;
            match mle_delay_with(&it, &events, window, &config.mle) {
                Ok(x) => Ok(Some(x)),
                Err(Error::NonIdentifiable { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut estimates = Vec::with_capacity(config.n_trials);
    for o in outcomes {
        if let Some(x) = o? {
            estimates.push(x);
        }
    }

    let k = estimates.len();
    let (mean, variance, mse) = if k >= 2 {
        let mean = estimates
            .iter()
            .copied()
            .collect::<CompensatedSum>()
            .total()
            / k as f64;
        let ss = estimates
            .iter()
            .map(|x| (x - mean).powi(2))
            .collect::<CompensatedSum>()
            .total();
        let se = estimates
            .iter()
            .map(|x| (x - config.true_delay_ps).powi(2))
            .collect::<CompensatedSum>()
            .total();
        (Some(mean), Some(ss / (k - 1) as f64), Some(se / k as f64))
    } else {
        (None, None, None)
    };
    let crlb = 1.0 / (config.n_events as f64 * fisher);
    Ok(EstimationReport {
        mode: config.mode,
        true_delay_ps: config.true_delay_ps,
        n_events: config.n_events,
        n_trials: config.n_trials,
        seed: config.seed,
        rng: "ChaCha8 (rand_chacha), stream = trial index".into(),
        non_identifiable_trials: config.n_trials - k,
        estimator_mean_ps: mean,
        estimator_variance_ps2: variance,
        estimator_mse_ps2: mse,
        fisher_information: fisher,
        crlb_ps2: crlb,
        variance_to_crlb: variance.map(|v| v / crlb),
        search_window_ps: [window.0, window.1],
        mle_tolerance_ps: config.mle.tolerance_ps,
        mle_prescan_points: config.mle.prescan_points,
        min_spread_nats: config.mle.min_spread_nats,
        derivative_step_ps: step,
    })
}
