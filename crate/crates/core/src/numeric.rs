//! Small numerical helpers shared across modules.

/// Neumaier-compensated running sum.
///
/// Every grid reduction in the crate goes through this accumulator in a fixed
/// row-major order, so results do not depend on thread count.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of an iterator of `f64`.
pub fn sum(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().collect::<CompensatedSum>().total()
}

/// Conversion factor from a Gaussian FWHM to its standard deviation.
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

/// Full width at half maximum of a sampled single-peaked curve, using linear
/// interpolation between the samples that bracket the half-maximum level on
/// each side of the peak. Returns `None` if the curve does not drop below half
/// maximum on both sides.
pub fn fwhm_linear(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 3 {
        return None;
    }
    let (peak, &ymax) = y.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    if !(ymax > 0.0) {
        return None;
    }
    let half = 0.5 * ymax;
    let left = (0..peak).rev().find(|&i| y[i] < half)?;
    let right = (peak + 1..y.len()).find(|&i| y[i] < half)?;
    let cross = |a: usize, b: usize| x[a] + (half - y[a]) * (x[b] - x[a]) / (y[b] - y[a]);
    Some(cross(right - 1, right) - cross(left, left + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut values = vec![1.0e16, 1.0, -1.0e16];
        values.extend(std::iter::repeat_n(1.0, 10));
        assert_eq!(sum(values), 11.0);
    }

    #[test]
    fn fwhm_of_sampled_gaussian() {
        let sigma = 1.3;
        let x: Vec<f64> = (-400..=400).map(|i| i as f64 * 0.01).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|t| (-t * t / (2.0 * sigma * sigma)).exp())
            .collect();
        let w = fwhm_linear(&x, &y).unwrap();
        assert!((w - FWHM_PER_SIGMA * sigma).abs() < 1e-4);
    }

    #[test]
    fn fwhm_requires_both_sides() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 0.9, 0.8, 0.1];
        assert!(fwhm_linear(&x, &y).is_none());
    }
}
