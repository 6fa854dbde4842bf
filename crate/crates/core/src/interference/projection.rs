use rayon::prelude::*;

use super::InterferenceKind;
use crate::numeric::CompensatedSum;
use crate::spectral::JsaGrid;
use crate::Result;

/// Distribution of a linear frequency combination (`ws + wi` or `ws - wi`)
/// under `|f|^2 dws dwi`.
///
/// When both axes share a spacing the combination lives on a uniform lattice
/// and the `n_s * n_i` cells collapse onto `n_s + n_i - 1` bins; otherwise
/// every cell is kept.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyProjection {
    values: Vec<f64>,
    weights: Vec<f64>,
    lattice: bool,
    idler_len: usize,
    kind: InterferenceKind,
}

impl FrequencyProjection {
    pub fn new(jsa: &JsaGrid, kind: InterferenceKind) -> Self {
        let g = jsa.grid();
        let (ns, ni) = g.shape();
        let amp = jsa.amplitude();
        let area = g.cell_area();
        if g.has_common_step() {
            let step = g.signal.step();
            let nbins = ns + ni - 1;
            let mut acc = vec![CompensatedSum::new(); nbins];
            for ((i, j), z) in amp.indexed_iter() {
                acc[Self::lattice_bin(kind, ni, i, j)].add(z.norm_sqr());
            }
            let (origin, stride) = match kind {
                InterferenceKind::Noon => (g.signal.start() + g.idler.start(), step),
                InterferenceKind::Hom => (g.signal.start() - g.idler.last(), step),
            };
            Self {
                values: (0..nbins).map(|m| origin + m as f64 * stride).collect(),
                weights: acc.iter().map(|s| s.total() * area).collect(),
                lattice: true,
                idler_len: ni,
                kind,
            }
        } else {
            let mut values = Vec::with_capacity(ns * ni);
            let mut weights = Vec::with_capacity(ns * ni);
            for ((i, j), z) in amp.indexed_iter() {
                values.push(kind.beat(g.signal.value(i), g.idler.value(j)));
                weights.push(z.norm_sqr() * area);
            }
            Self {
                values,
                weights,
                lattice: false,
                idler_len: ni,
                kind,
            }
        }
    }

    #[inline]
    fn lattice_bin(kind: InterferenceKind, ni: usize, i: usize, j: usize) -> usize {
        match kind {
            InterferenceKind::Noon => i + j,
            InterferenceKind::Hom => i + (ni - 1) - j,
        }
    }

    /// Bin holding grid cell `(i, j)`.
    #[inline]
    pub fn bin_of(&self, i: usize, j: usize) -> usize {
        if self.lattice {
            Self::lattice_bin(self.kind, self.idler_len, i, j)
        } else {
            i * self.idler_len + j
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `sum w cos(v tau)`: the complex-envelope projection onto the fringe.
    pub fn cosine_moment(&self, tau: f64) -> f64 {
        let s: CompensatedSum = self
            .values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| w * (v * tau).cos())
            .collect();
        s.total()
    }

    /// `sum w v sin(v tau)`.
    pub fn sine_moment(&self, tau: f64) -> f64 {
        let s: CompensatedSum = self
            .values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| w * v * (v * tau).sin())
            .collect();
        s.total()
    }

    /// Raw moment `sum w v^k`.
    pub fn moment(&self, k: i32) -> f64 {
        let s: CompensatedSum = self
            .values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| w * v.powi(k))
            .collect();
        s.total()
    }

    pub fn total_weight(&self) -> f64 {
        let s: CompensatedSum = self.weights.iter().copied().collect();
        s.total()
    }
}

/// Fast evaluator of coincidence probabilities for one JSA.
///
/// Equivalent to [`super::noon_coincidence`] and [`super::hom_coincidence`]
/// but works on the projected sum/difference spectra, which makes dense
/// delay scans cheap.
#[derive(Debug, Clone)]
pub struct Interferometer {
    sum: FrequencyProjection,
    difference: FrequencyProjection,
    carrier: f64,
}

impl Interferometer {
    pub fn new(jsa: &JsaGrid) -> Result<Self> {
        jsa.require_normalized()?;
        Ok(Self {
            sum: FrequencyProjection::new(jsa, InterferenceKind::Noon),
            difference: FrequencyProjection::new(jsa, InterferenceKind::Hom),
            carrier: jsa.sum_carrier_frequency(),
        })
    }

    pub fn projection(&self, kind: InterferenceKind) -> &FrequencyProjection {
        match kind {
            InterferenceKind::Noon => &self.sum,
            InterferenceKind::Hom => &self.difference,
        }
    }

    /// Sum-frequency carrier `2 w_deg`, rad/ps.
    pub fn carrier_frequency(&self) -> f64 {
        self.carrier
    }

    pub fn carrier_period(&self) -> f64 {
        std::f64::consts::TAU / self.carrier
    }

    pub fn probability(&self, kind: InterferenceKind, tau: f64) -> f64 {
        let p = self.projection(kind);
        0.5 * (p.total_weight() + kind.sign() * p.cosine_moment(tau))
    }

    /// Analytic `dP/dtau`.
    pub fn derivative(&self, kind: InterferenceKind, tau: f64) -> f64 {
        -0.5 * kind.sign() * self.projection(kind).sine_moment(tau)
    }

    pub fn probabilities(&self, kind: InterferenceKind, delays: &[f64]) -> Vec<f64> {
        delays
            .par_iter()
            .map(|&t| self.probability(kind, t))
            .collect()
    }
}
