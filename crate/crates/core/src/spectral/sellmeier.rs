use serde::{Deserialize, Serialize};

use super::{InverseGroupVelocities, PumpSpec};
use crate::{wavelength_from_omega, Error, Result, SPEED_OF_LIGHT_NM_PER_PS};

const SPEED_OF_LIGHT_MM_PER_PS: f64 = SPEED_OF_LIGHT_NM_PER_PS * 1e-6;

/// One Sellmeier equation, wavelength in micrometres:
///
/// `n^2 = a + sum_k b_k lambda^2 / (lambda^2 - c_k) - infrared * lambda^2`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SellmeierCoefficients {
    pub a: f64,
    /// `(b_k, c_k)` pairs; `c_k` in um^2.
    pub terms: Vec<[f64; 2]>,
    #[serde(default)]
    pub infrared: f64,
}

impl SellmeierCoefficients {
    pub fn refractive_index(&self, lambda_um: f64) -> f64 {
        let l2 = lambda_um * lambda_um;
        let n2 = self.a
            + self
                .terms
                .iter()
                .map(|[b, c]| b * l2 / (l2 - c))
                .sum::<f64>()
            - self.infrared * l2;
        n2.sqrt()
    }

    /// Wavenumber `n w / c` (rad/mm) at angular frequency `omega` (rad/ps).
    pub fn wavenumber(&self, omega: f64) -> f64 {
        let lambda_um = wavelength_from_omega(omega) * 1e-3;
        self.refractive_index(lambda_um) * omega / SPEED_OF_LIGHT_MM_PER_PS
    }

    /// Inverse group velocity `dk/dw` (ps/mm), by central difference.
    pub fn inverse_group_velocity(&self, omega: f64) -> f64 {
        let h = 1e-2;
        (self.wavenumber(omega + h) - self.wavenumber(omega - h)) / (2.0 * h)
    }
}

/// Refractive-index tables for the three interacting waves, each already
/// chosen for that wave's polarization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SellmeierTable {
    /// Where the coefficients come from. Required and must be non-empty.
    pub provenance: String,
    pub pump: SellmeierCoefficients,
    pub signal: SellmeierCoefficients,
    pub idler: SellmeierCoefficients,
}

impl SellmeierTable {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: Self = toml::from_str(text).map_err(|e| Error::parse("Sellmeier table", e))?;
        table.validate()?;
        Ok(table)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Inverse group velocities at the pump centre and at degeneracy, the
    /// inputs of the linearized phase-mismatch model.
    pub fn inverse_group_velocities(&self, pump: &PumpSpec) -> InverseGroupVelocities {
        let (wp, w0) = (pump.center_frequency(), pump.degenerate_frequency());
        InverseGroupVelocities {
            pump: self.pump.inverse_group_velocity(wp),
            signal: self.signal.inverse_group_velocity(w0),
            idler: self.idler.inverse_group_velocity(w0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.provenance.trim().is_empty() {
            return Err(Error::invalid(
                "sellmeier.provenance",
                "document where the coefficients come from",
            ));
        }
        for (name, c) in [
            ("pump", &self.pump),
            ("signal", &self.signal),
            ("idler", &self.idler),
        ] {
            let finite = c.a.is_finite()
                && c.infrared.is_finite()
                && c.terms.iter().all(|t| t[0].is_finite() && t[1].is_finite());
            if !finite {
                return Err(Error::invalid(
                    format!("sellmeier.{name}"),
                    "coefficients must be finite",
                ));
            }
        }
        Ok(())
    }
}
