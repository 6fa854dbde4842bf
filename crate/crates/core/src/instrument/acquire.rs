use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use super::ArrivalTimeMap;
use crate::{Error, Result};

/// Coincidence counts on the arrival-time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceHistogram {
    pub t1_edges: Vec<f64>,
    pub t2_edges: Vec<f64>,
    pub counts: Array2<u64>,
    pub acquisition_seconds: f64,
    pub pair_rate_cps: f64,
    pub seed: u64,
    /// `rate * duration * (in-window fraction)`.
    pub expected_total: f64,
}

impl CoincidenceHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Accumulate coincidences for `acquisition_seconds` at `pair_rate_cps`.
///
/// Bin counts are independent Poisson variables with means
/// `rate * duration * intensity / source_mass`, so the total is Poisson with
/// mean `rate * duration` times the in-window fraction. Row `k` of the
/// histogram is drawn from ChaCha8 seeded with `seed` on stream `k`, which
/// makes the result independent of threading.
pub fn acquire(
    map: &ArrivalTimeMap,
    acquisition_seconds: f64,
    pair_rate_cps: f64,
    seed: u64,
) -> Result<CoincidenceHistogram> {
    if !(acquisition_seconds >= 0.0 && acquisition_seconds.is_finite()) {
        return Err(Error::invalid("acquisition.duration_s", "must be >= 0"));
    }
    if !(pair_rate_cps >= 0.0 && pair_rate_cps.is_finite()) {
        return Err(Error::invalid("acquisition.pair_rate_cps", "must be >= 0"));
    }
    if !(map.source_mass > 0.0) || !(map.total() > 0.0) {
        return Err(Error::Degenerate(
            "cannot acquire from an empty density".into(),
        ));
    }
    let scale = acquisition_seconds * pair_rate_cps / map.source_mass;
    let (rows, cols) = map.intensity.dim();
    let data: Vec<Vec<u64>> = (0..rows)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            map.intensity
                .row(k)
                .iter()
                .map(|&v| {
                    let mean = v * scale;
                    if mean > 0.0 {
                        Poisson::new(mean)
                            .map(|p| p.sample(&mut rng) as u64)
                            .unwrap_or(0)
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect();
    let counts = Array2::from_shape_vec((rows, cols), data.into_iter().flatten().collect())
        .map_err(|e| Error::Shape(e.to_string()))?;
    Ok(CoincidenceHistogram {
        t1_edges: map.t1_edges(),
        t2_edges: map.t2_edges(),
        counts,
        acquisition_seconds,
        pair_rate_cps,
        seed,
        expected_total: map.total() * scale,
    })
}
