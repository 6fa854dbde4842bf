use std::f64::consts::PI;

use proptest::prelude::*;

use noonsi::fisher::{fisher_nsr, fisher_sr, SINGULAR_EPSILON};
use noonsi::interference::{
    carrier_period, delay_at_phase, hom_coincidence, noon_coincidence, noon_jsi,
};
use noonsi::spectral::{build_gaussian_jsa, FrequencyGrid, GaussianJsaParams, JsaGrid, PumpSpec};

fn jsa(along: f64, across: f64, angle: f64) -> JsaGrid {
    let pump = PumpSpec::new(792.0, 2.0).unwrap();
    let grid = FrequencyGrid::from_wavelength_window(1582.0, 1586.0, 96).unwrap();
    let params = GaussianJsaParams {
        along_bandwidth: along,
        across_bandwidth: across,
        correlation_angle: angle,
    };
    build_gaussian_jsa(&pump, &params, &grid).unwrap()
}

fn rms_sum_offset(f: &JsaGrid) -> f64 {
    let g = f.grid();
    let w0 = f.sum_carrier_frequency();
    let cell = g.signal.step() * g.idler.step();
    let m2: f64 = f
        .intensity()
        .indexed_iter()
        .map(|((i, j), p)| p * cell * (g.signal.value(i) + g.idler.value(j) - w0).powi(2))
        .sum();
    m2.sqrt()
}

fn source() -> impl Strategy<Value = JsaGrid> {
    (0.6f64..1.4, 0.6f64..1.4, 0.0f64..PI).prop_map(|(a, c, t)| jsa(a, c, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn jsi_marginalizes_to_coincidence(f in source(), tau in -12.0f64..12.0) {
        let p = noon_coincidence(&f, tau).unwrap();
        let total = noon_jsi(&f, tau).unwrap().total();
        prop_assert!((p - total).abs() < 1e-9, "{p} vs {total}");
    }

    #[test]
    fn probabilities_are_bounded(f in source(), tau in -12.0f64..12.0) {
        for p in [noon_coincidence(&f, tau).unwrap(), hom_coincidence(&f, tau).unwrap()] {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&p), "{p}");
        }
        prop_assert!(noon_jsi(&f, tau).unwrap().intensity.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn mirrored_phases_give_equal_maps(f in source(), phi in 0.0f64..PI) {
        // exact about the zero-order fringe; elsewhere only to O(dw / w0)
        let a = noon_jsi(&f, delay_at_phase(&f, 0.0, phi)).unwrap();
        let b = noon_jsi(&f, delay_at_phase(&f, 0.0, -phi)).unwrap();
        let worst = a
            .intensity
            .iter()
            .zip(b.intensity.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        prop_assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn fine_scan_repeats_each_carrier_period(f in source(), tau in -8.0f64..8.0) {
        let t = carrier_period(&f);
        let a = noon_coincidence(&f, tau).unwrap();
        let b = noon_coincidence(&f, tau + t).unwrap();
        // |cos(W(tau + T)) - cos(W tau)| <= |W - W0| T with W0 T = 2 pi, so the
        // residual is bounded by the rms sum-frequency offset from the carrier
        prop_assert!((a - b).abs() <= 0.5 * t * rms_sum_offset(&f) + 1e-12, "{a} vs {b}");
    }

    #[test]
    fn resolved_information_ignores_sum_frequency_phase(f in source(), tau in -20.0f64..20.0) {
        let base = fisher_sr(&f).unwrap();
        let rotated = fisher_sr(&f.with_sum_frequency_phase(tau)).unwrap();
        prop_assert!((base - rotated).abs() <= 1e-12 * base, "{base} vs {rotated}");
    }

    #[test]
    fn integrated_information_never_exceeds_resolved(f in source(), tau in -8.0f64..8.0) {
        let p = noon_coincidence(&f, tau).unwrap();
        prop_assume!(p > 10.0 * SINGULAR_EPSILON && p < 1.0 - 10.0 * SINGULAR_EPSILON);
        let step = carrier_period(&f) / 200.0;
        let nsr = fisher_nsr(&f, tau, step).unwrap();
        let sr = fisher_sr(&f).unwrap();
        prop_assert!(nsr <= sr * (1.0 + 1e-3), "{nsr} > {sr}");
    }
}
