use ndarray::Array2;
use num_complex::Complex64;

use super::{normalize, CrystalSpec, DispersionSource, FrequencyGrid, JsaGrid, PumpSpec};
use crate::{Error, Result};

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Phase mismatch `dk(ws, wi)` in rad/mm, including the poling grating.
///
/// For the Sellmeier source the grating vector is oriented to cancel the
/// material mismatch at degeneracy; the linearized source expands around
/// degeneracy with the configured residual mismatch there.
pub fn phase_mismatch(pump: &PumpSpec, crystal: &CrystalSpec) -> Result<impl Fn(f64, f64) -> f64> {
    crystal.validate()?;
    pump.validate()?;
    let center = pump.degenerate_frequency();
    let model: Box<dyn Fn(f64, f64) -> f64> = match &crystal.dispersion {
        DispersionSource::LinearizedGroupVelocity {
            inverse_group_velocities: v,
            phase_mismatch_rad_per_mm,
        } => {
            let (dk0, a_s, a_i) = (
                *phase_mismatch_rad_per_mm,
                v.pump - v.signal,
                v.pump - v.idler,
            );
            Box::new(move |ws, wi| dk0 + a_s * (ws - center) + a_i * (wi - center))
        }
        DispersionSource::SellmeierTable(None) => return Err(Error::MissingSellmeier),
        DispersionSource::SellmeierTable(Some(table)) => {
            let table = table.clone();
            let material = move |ws: f64, wi: f64| {
                table.pump.wavenumber(ws + wi)
                    - table.signal.wavenumber(ws)
                    - table.idler.wavenumber(wi)
            };
            let dk_center = material(center, center);
            if !dk_center.is_finite() {
                return Err(Error::NonFinite(
                    "Sellmeier phase mismatch at degeneracy".into(),
                ));
            }
            let grating =
                dk_center.signum() * 2.0 * std::f64::consts::PI / (crystal.poling_period_um * 1e-3);
            Box::new(move |ws, wi| material(ws, wi) - grating)
        }
    };
    Ok(model)
}

/// Pump envelope times the sinc phase-matching function, normalized.
pub fn build_phasematched_jsa(
    pump: &PumpSpec,
    crystal: &CrystalSpec,
    grid: &FrequencyGrid,
) -> Result<JsaGrid> {
    let dk = phase_mismatch(pump, crystal)?;
    let half_length = 0.5 * crystal.length_mm;
    let mut amplitude = Array2::zeros(grid.shape());
    for ((i, j), z) in amplitude.indexed_iter_mut() {
        let (ws, wi) = (grid.signal.value(i), grid.idler.value(j));
        let mismatch = dk(ws, wi);
        if !mismatch.is_finite() {
            return Err(Error::NonFinite(format!(
                "phase mismatch at ws = {ws} rad/ps, wi = {wi} rad/ps"
            )));
        }
        *z = Complex64::new(pump.amplitude(ws + wi) * sinc(mismatch * half_length), 0.0);
    }
    normalize(&JsaGrid::new(
        *grid,
        amplitude,
        pump.degenerate_frequency(),
    )?)
}

#[cfg(test)]
mod tests {
    use super::super::{InverseGroupVelocities, SellmeierCoefficients, SellmeierTable};
    use super::*;

    fn crystal(v: InverseGroupVelocities) -> CrystalSpec {
        CrystalSpec {
            length_mm: 30.0,
            poling_period_um: 46.1,
            dispersion: DispersionSource::LinearizedGroupVelocity {
                inverse_group_velocities: v,
                phase_mismatch_rad_per_mm: 0.0,
            },
            gvm_check: true,
            gvm_tolerance_ps_per_mm: 1e-2,
        }
    }

    fn grid(n: usize) -> FrequencyGrid {
        FrequencyGrid::from_wavelength_window(1582.0, 1586.0, n).unwrap()
    }

    #[test]
    fn exact_gvm_gives_exchange_symmetric_jsa() {
        let v = InverseGroupVelocities {
            pump: 6.03,
            signal: 5.88,
            idler: 6.18,
        };
        let jsa =
            build_phasematched_jsa(&PumpSpec::new(792.0, 2.0).unwrap(), &crystal(v), &grid(128))
                .unwrap();
        assert!(jsa.max_exchange_asymmetry().unwrap() < 1e-9);
        assert!((jsa.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn monochromatic_pump_confines_to_pump_line() {
        let v = InverseGroupVelocities {
            pump: 6.03,
            signal: 5.88,
            idler: 6.18,
        };
        let pump = PumpSpec::new(792.0, 1.0e4).unwrap();
        let g = grid(128);
        let jsa = build_phasematched_jsa(&pump, &crystal(v), &g).unwrap();
        let wp = pump.center_frequency();
        let mut on_line = 0.0;
        for ((i, j), z) in jsa.amplitude().indexed_iter() {
            if (g.signal.value(i) + g.idler.value(j) - wp).abs() <= g.signal.step() {
                on_line += z.norm_sqr() * g.cell_area();
            }
        }
        assert!(on_line > 1.0 - 1e-9, "mass on pump line {on_line}");
    }

    #[test]
    fn gvm_check_rejects_mismatched_velocities() {
        let v = InverseGroupVelocities {
            pump: 6.5,
            signal: 5.88,
            idler: 6.18,
        };
        let err =
            build_phasematched_jsa(&PumpSpec::new(792.0, 2.0).unwrap(), &crystal(v), &grid(64));
        assert!(matches!(err, Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn missing_table_is_reported() {
        let mut c = crystal(InverseGroupVelocities {
            pump: 1.0,
            signal: 1.0,
            idler: 1.0,
        });
        c.dispersion = DispersionSource::SellmeierTable(None);
        let err = build_phasematched_jsa(&PumpSpec::new(792.0, 2.0).unwrap(), &c, &grid(64));
        assert!(matches!(err, Err(Error::MissingSellmeier)));
    }

    #[test]
    fn sellmeier_grating_cancels_mismatch_at_degeneracy() {
        let flat = |n: f64| SellmeierCoefficients {
            a: n * n,
            terms: vec![],
            infrared: 0.0,
        };
        let table = SellmeierTable {
            provenance: "synthetic dispersionless indices".into(),
            pump: flat(1.8),
            signal: flat(1.7),
            idler: flat(1.75),
        };
        let pump = PumpSpec::new(792.0, 2.0).unwrap();
        let w = pump.degenerate_frequency();
        // choose the period that phase matches the flat indices exactly
        let c_mm = crate::SPEED_OF_LIGHT_NM_PER_PS * 1e-6;
        let dk_material = (1.8 * 2.0 * w - 1.7 * w - 1.75 * w) / c_mm;
        let period_um = 2.0 * std::f64::consts::PI / dk_material * 1e3;
        let mut c = crystal(InverseGroupVelocities {
            pump: 0.0,
            signal: 0.0,
            idler: 0.0,
        });
        c.poling_period_um = period_um;
        c.dispersion = DispersionSource::SellmeierTable(Some(table));
        let dk = phase_mismatch(&pump, &c).unwrap();
        assert!(dk(w, w).abs() < 1e-9);
    }
}
