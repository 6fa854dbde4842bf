use super::EventList;
use crate::interference::{InterferenceKind, Interferometer};
use crate::spectral::JsaGrid;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    /// Golden-section stopping width (ps).
    pub tolerance_ps: f64,
    /// Equispaced points used to seed the search.
    pub prescan_points: usize,
    /// Windows whose log-likelihood varies by less than this many nats are
    /// reported as non-identifiable.
    pub min_spread_nats: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            tolerance_ps: 1e-5,
            prescan_points: 64,
            min_spread_nats: 0.5,
        }
    }
}

/// Log-likelihood of `events` as a function of delay, up to a constant.
pub struct LogLikelihood<'a> {
    it: &'a Interferometer,
    kind: Kind,
}

enum Kind {
    /// `(sum frequency, count)` of occupied sum-frequency bins.
    Spectral {
        bins: Vec<(f64, f64)>,
        n: f64,
    },
    Integrated {
        detections: f64,
        n: f64,
    },
}

/// Build the log-likelihood of `events` for `it`'s JSA.
///
/// Spectrally resolved events only enter through `ws + wi`, so they are
/// histogrammed onto the sum-frequency projection once.
pub fn log_likelihood<'a>(it: &'a Interferometer, events: &EventList) -> Result<LogLikelihood<'a>> {
    if events.is_empty() {
        return Err(Error::invalid("events", "no events to fit"));
    }
    let kind = match events {
        EventList::Spectral(cells) => {
            let proj = it.projection(InterferenceKind::Noon);
            let mut counts = vec![0u64; proj.len()];
            for &(i, j) in cells {
                counts[proj.bin_of(i, j)] += 1;
            }
            let bins = counts
                .iter()
                .zip(proj.values())
                .filter(|(c, _)| **c > 0)
                .map(|(&c, &v)| (v, c as f64))
                .collect();
            Kind::Spectral {
                bins,
                n: cells.len() as f64,
            }
        }
        EventList::Integrated(outcomes) => Kind::Integrated {
            detections: outcomes.iter().filter(|&&d| d).count() as f64,
            n: outcomes.len() as f64,
        },
    };
    Ok(LogLikelihood { it, kind })
}

impl LogLikelihood<'_> {
    pub fn eval(&self, tau: f64) -> f64 {
        let p = self.it.probability(InterferenceKind::Noon, tau);
        match &self.kind {
            Kind::Spectral { bins, n } => {
                // q(ws, wi | tau) = |f|^2 (1 + cos((ws + wi) tau)) / (2 P(tau))
                let mut s = 0.0;
                for &(v, c) in bins {
                    s += c * (1.0 + (v * tau).cos()).ln();
                }
                s - n * p.ln()
            }
            Kind::Integrated { detections, n } => {
                let mut s = 0.0;
                if *detections > 0.0 {
                    s += detections * p.ln();
                }
                if n - detections > 0.0 {
                    s += (n - detections) * (1.0 - p).ln();
                }
                s
            }
        }
    }
}

/// Maximum-likelihood delay within `window` with default options.
pub fn mle_delay(events: &EventList, jsa: &JsaGrid, window: (f64, f64)) -> Result<f64> {
    mle_delay_with(
        &Interferometer::new(jsa)?,
        events,
        window,
        &MleOptions::default(),
    )
}

/// Maximize the log-likelihood over `window`: an equispaced pre-scan picks
/// the best cell, golden-section search narrows it to `tolerance_ps`, and a
/// parabola through the final points refines the maximizer.
///
/// The NOON likelihood repeats every carrier period, so the window should
/// span less than one period around the expected delay.
pub fn mle_delay_with(
    it: &Interferometer,
    events: &EventList,
    window: (f64, f64),
    options: &MleOptions,
) -> Result<f64> {
    let (lo, hi) = window;
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(Error::invalid(
            "search_window",
            format!("invalid window ({lo}, {hi})"),
        ));
    }
    if options.prescan_points < 3 || !(options.tolerance_ps > 0.0) {
        return Err(Error::invalid(
            "mle",
            "need >= 3 pre-scan points and a positive tolerance",
        ));
    }
    let ll = log_likelihood(it, events)?;
    let f = |t: f64| {
        let v = ll.eval(t);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };

    let m = options.prescan_points;
    let xs: Vec<f64> = (0..m)
        .map(|k| lo + (hi - lo) * k as f64 / (m - 1) as f64)
        .collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let finite = ys.iter().copied().filter(|y| y.is_finite());
    let max = finite.clone().fold(f64::NEG_INFINITY, f64::max);
    let min = finite.fold(f64::INFINITY, f64::min);
    if !max.is_finite() {
        return Err(Error::NonIdentifiable { spread: 0.0 });
    }
    // a window of impossible delays but one point still has a huge spread
    let spread = if min.is_finite() {
        max - min
    } else {
        f64::INFINITY
    };
    if spread < options.min_spread_nats {
        return Err(Error::NonIdentifiable { spread });
    }
    let best = ys
        .iter()
        .enumerate()
        .fold(0, |b, (k, &y)| if y > ys[b] { k } else { b });

    let (mut a, mut b) = (xs[best.saturating_sub(1)], xs[(best + 1).min(m - 1)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > options.tolerance_ps {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let mut x = if fc >= fd { c } else { d };
    let mut fx = fc.max(fd);

    // parabolic refinement, kept only when it improves and stays in bounds
    let mut h = (b - a).max(f64::EPSILON * x.abs() * 64.0);
    for _ in 0..3 {
        let (fl, fr) = (f(x - h), f(x + h));
        let denom = fl - 2.0 * fx + fr;
        if !(denom < 0.0) {
            break;
        }
        let step = 0.5 * h * (fl - fr) / denom;
        let cand = (x + step).clamp(lo, hi);
        if step.abs() > h {
            break;
        }
        let fcand = f(cand);
        if fcand < fx {
            break;
        }
        x = cand;
        fx = fcand;
        h *= 0.1;
    }
    Ok(x)
}
