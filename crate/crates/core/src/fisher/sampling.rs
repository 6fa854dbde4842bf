use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::interference::{noon_jsi, InterferenceKind, Interferometer};
use crate::spectral::JsaGrid;
use crate::{Error, Result};

/// What a detection event records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// The frequencies `(ws, wi)` of each detected pair.
    SpectrallyResolved,
    /// Only whether the coincidence detector clicked.
    Integrated,
}

impl SamplingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SamplingMode::SpectrallyResolved => "spectrally_resolved",
            SamplingMode::Integrated => "integrated",
        }
    }
}

impl std::str::FromStr for SamplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectrally_resolved" | "spectral" | "sr" => Ok(SamplingMode::SpectrallyResolved),
            "integrated" | "nsr" => Ok(SamplingMode::Integrated),
            other => Err(Error::invalid(
                "mode",
                format!("unknown sampling mode {other:?} (spectrally_resolved, integrated)"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventList {
    /// Grid cells `(signal index, idler index)` of detected pairs.
    Spectral(Vec<(usize, usize)>),
    /// Detection outcomes.
    Integrated(Vec<bool>),
}

impl EventList {
    pub fn len(&self) -> usize {
        match self {
            EventList::Spectral(v) => v.len(),
            EventList::Integrated(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mode(&self) -> SamplingMode {
        match self {
            EventList::Spectral(_) => SamplingMode::SpectrallyResolved,
            EventList::Integrated(_) => SamplingMode::Integrated,
        }
    }
}

/// Draw `n_events` events at `delay_ps` with a ChaCha8 stream seeded by
/// `seed`.
pub fn sample_events(
    jsa: &JsaGrid,
    delay_ps: f64,
    n_events: usize,
    mode: SamplingMode,
    seed: u64,
) -> Result<EventList> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_events_with(jsa, delay_ps, n_events, mode, &mut rng)
}

/// Spectrally resolved events come from the normalized NOON JSI at the delay
/// by inverse-CDF sampling over the row-major flattened cells; integrated
/// events are Bernoulli trials with the NOON coincidence probability.
pub fn sample_events_with<R: Rng + ?Sized>(
    jsa: &JsaGrid,
    delay_ps: f64,
    n_events: usize,
    mode: SamplingMode,
    rng: &mut R,
) -> Result<EventList> {
    if n_events == 0 {
        return Err(Error::invalid("n_events", "must be positive"));
    }
    match mode {
        SamplingMode::SpectrallyResolved => {
            let map = noon_jsi(jsa, delay_ps)?;
            let sampler = CellSampler::new(&map.intensity)?;
            let idler_len = map.intensity.ncols();
            let events = (0..n_events)
                .map(|_| {
                    let k = sampler.draw(rng);
                    (k / idler_len, k % idler_len)
                })
                .collect();
            Ok(EventList::Spectral(events))
        }
        SamplingMode::Integrated => {
            let p = Interferometer::new(jsa)?.probability(InterferenceKind::Noon, delay_ps);
            let p = p.clamp(0.0, 1.0);
            Ok(EventList::Integrated(
                (0..n_events).map(|_| rng.random::<f64>() < p).collect(),
            ))
        }
    }
}

/// Inverse-CDF sampler over the cells of a nonnegative matrix.
#[derive(Debug, Clone)]
pub(crate) struct CellSampler {
    cdf: Vec<f64>,
}

impl CellSampler {
    pub(crate) fn new(weights: &ndarray::Array2<f64>) -> Result<Self> {
        let mut acc = 0.0;
        let cdf: Vec<f64> = weights
            .iter()
            .map(|&w| {
                acc += w.max(0.0);
                acc
            })
            .collect();
        if !(acc > 0.0 && acc.is_finite()) {
            return Err(Error::Degenerate(
                "density has no mass to sample (fully dark fringe)".into(),
            ));
        }
        Ok(Self { cdf })
    }

    /// Flattened (row-major) index of one draw.
    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = self.cdf[self.cdf.len() - 1];
        let u = rng.random::<f64>() * total;
        self.cdf
            .partition_point(|&c| c <= u)
            .min(self.cdf.len() - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interference::tests::test_jsa;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn same_seed_same_events() {
        let jsa = test_jsa(48);
        for mode in [SamplingMode::SpectrallyResolved, SamplingMode::Integrated] {
            let a = sample_events(&jsa, 3.0, 500, mode, 7).unwrap();
            let b = sample_events(&jsa, 3.0, 500, mode, 7).unwrap();
            let c = sample_events(&jsa, 3.0, 500, mode, 8).unwrap();
            assert_eq!(a, b);
            assert_ne!(a, c);
        }
    }

    #[test]
    fn zero_delay_always_detects() {
        let jsa = test_jsa(48);
        match sample_events(&jsa, 0.0, 1000, SamplingMode::Integrated, 1).unwrap() {
            EventList::Integrated(v) => assert!(v.iter().all(|&d| d)),
            _ => unreachable!(),
        }
    }

    #[test]
    fn empty_density_is_degenerate() {
        let w = ndarray::Array2::<f64>::zeros((4, 4));
        assert!(matches!(CellSampler::new(&w), Err(Error::Degenerate(_))));
    }

    #[test]
    fn never_draws_empty_cells() {
        let mut w = ndarray::Array2::<f64>::zeros((3, 3));
        w[[0, 2]] = 1.0;
        w[[2, 1]] = 3.0;
        let s = CellSampler::new(&w).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0usize; 9];
        for _ in 0..4000 {
            counts[s.draw(&mut rng)] += 1;
        }
        assert_eq!(counts.iter().sum::<usize>(), counts[2] + counts[7]);
        assert!((counts[7] as f64 / 4000.0 - 0.75).abs() < 0.03);
    }

    #[test]
    fn spectral_draws_follow_the_jsi() {
        // coarse pooling into 8x8 blocks keeps expected counts large
        let jsa = test_jsa(64);
        let tau = 1.3;
        let n = 1_000_000;
        let events =
            match sample_events(&jsa, tau, n, SamplingMode::SpectrallyResolved, 11).unwrap() {
                EventList::Spectral(v) => v,
                _ => unreachable!(),
            };
        let map = noon_jsi(&jsa, tau).unwrap();
        let total: f64 = map.intensity.sum();
        let mut expected = [[0.0f64; 8]; 8];
        for ((i, j), v) in map.intensity.indexed_iter() {
            expected[i / 8][j / 8] += v / total * n as f64;
        }
        let mut observed = [[0.0f64; 8]; 8];
        for (i, j) in events {
            observed[i / 8][j / 8] += 1.0;
        }
        let (mut chi2, mut dof) = (0.0, 0usize);
        for a in 0..8 {
            for b in 0..8 {
                if expected[a][b] >= 5.0 {
                    chi2 += (observed[a][b] - expected[a][b]).powi(2) / expected[a][b];
                    dof += 1;
                }
            }
        }
        let dof = (dof - 1) as f64;
        let p = 1.0 - ChiSquared::new(dof).unwrap().cdf(chi2);
        assert!(p > 1.35e-3, "chi2 {chi2} on {dof} dof, p = {p}");
    }
}
