//! Run configuration: a TOML document with explicit units in every key.
//! Unknown keys are rejected, and every block is validated before any
//! computation starts.

use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::fisher::{MleOptions, SamplingMode};
use crate::instrument::SpectrometerSpec;
use crate::spectral::{
    build_gaussian_jsa, build_phasematched_jsa, CrystalSpec, DispersionSource, FrequencyGrid,
    GaussianJsaParams, InverseGroupVelocities, JsaGrid, PumpSpec, SellmeierTable,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Fig1bEnvelope,
    FigPhaseSweep,
    FigJsiSweep,
    FisherComparison,
    EstimationStudy,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::Fig1bEnvelope,
        Scenario::FigPhaseSweep,
        Scenario::FigJsiSweep,
        Scenario::FisherComparison,
        Scenario::EstimationStudy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Fig1bEnvelope => "fig1b_envelope",
            Scenario::FigPhaseSweep => "fig_phase_sweep",
            Scenario::FigJsiSweep => "fig_jsi_sweep",
            Scenario::FisherComparison => "fisher_comparison",
            Scenario::EstimationStudy => "estimation_study",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Scenario::ALL.iter().map(|x| x.as_str()).collect();
                Error::invalid(
                    "scenario",
                    format!(
                        "unknown scenario {s:?}; expected one of {}",
                        names.join(", ")
                    ),
                )
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min_wavelength_nm: f64,
    pub max_wavelength_nm: f64,
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            min_wavelength_nm: 1582.0,
            max_wavelength_nm: 1586.0,
            points: 256,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceModel {
    Gaussian,
    PhaseMatched,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub model: SourceModel,
    /// Gaussian model: intensity FWHM along the correlation axis.
    pub along_bandwidth_rad_per_ps: Option<f64>,
    /// Gaussian model: intensity FWHM across the correlation axis.
    pub across_bandwidth_rad_per_ps: Option<f64>,
    pub correlation_angle_rad: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DispersionKind {
    LinearizedGroupVelocity,
    SellmeierTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalConfig {
    pub length_mm: f64,
    pub poling_period_um: f64,
    pub dispersion_source: DispersionKind,
    pub pump_inverse_group_velocity_ps_per_mm: Option<f64>,
    pub signal_inverse_group_velocity_ps_per_mm: Option<f64>,
    pub idler_inverse_group_velocity_ps_per_mm: Option<f64>,
    #[serde(default)]
    pub phase_mismatch_rad_per_mm: f64,
    /// Path to a Sellmeier table, relative to the config file.
    pub sellmeier_table: Option<PathBuf>,
    #[serde(default = "default_true")]
    pub gvm_check: bool,
    #[serde(default = "default_gvm_tolerance")]
    pub gvm_tolerance_ps_per_mm: f64,
}

fn default_true() -> bool {
    true
}

fn default_gvm_tolerance() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub envelope_start_ps: f64,
    pub envelope_stop_ps: f64,
    pub envelope_step_ps: f64,
    pub envelope_samples_per_period: usize,
    /// Fine scans cover this many carrier periods around each coarse delay.
    pub fine_periods: f64,
    pub fine_samples_per_period: usize,
    pub coarse_delays_ps: Vec<f64>,
    /// Fine phases of the JSI sweep, in units of pi.
    pub phases_over_pi: Vec<f64>,
    pub lobe_threshold: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            envelope_start_ps: -10.0,
            envelope_stop_ps: 10.0,
            envelope_step_ps: 0.02,
            envelope_samples_per_period: 16,
            fine_periods: 4.0,
            fine_samples_per_period: 64,
            coarse_delays_ps: vec![0.0, 5.0, 10.0],
            phases_over_pi: vec![0.0, 0.5, 1.0, 1.5, 2.0],
            lobe_threshold: crate::interference::DEFAULT_LOBE_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FisherConfig {
    /// One carrier period is swept at each of these coarse delays.
    pub coarse_delays_ps: Vec<f64>,
    pub samples_per_period: usize,
    /// Central-difference step as a fraction of the carrier period.
    pub derivative_step_fraction: f64,
    pub centered: bool,
}

impl Default for FisherConfig {
    fn default() -> Self {
        Self {
            coarse_delays_ps: vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 7.5, 10.0],
            samples_per_period: 400,
            derivative_step_fraction: crate::fisher::DEFAULT_STEP_FRACTION,
            centered: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimationSection {
    pub true_delay_ps: f64,
    pub n_events: usize,
    pub n_trials: usize,
    pub modes: Vec<SamplingMode>,
    pub tolerance_ps: f64,
    pub prescan_points: usize,
    pub min_spread_nats: f64,
    /// Defaults to a quarter carrier period.
    pub window_half_width_ps: Option<f64>,
}

impl Default for EstimationSection {
    fn default() -> Self {
        let mle = MleOptions::default();
        Self {
            true_delay_ps: 10.0,
            n_events: 10_000,
            n_trials: 200,
            modes: vec![SamplingMode::SpectrallyResolved, SamplingMode::Integrated],
            tolerance_ps: mle.tolerance_ps,
            prescan_points: mle.prescan_points,
            min_spread_nats: mle.min_spread_nats,
            window_half_width_ps: None,
        }
    }
}

impl EstimationSection {
    pub fn mle_options(&self) -> MleOptions {
        MleOptions {
            tolerance_ps: self.tolerance_ps,
            prescan_points: self.prescan_points,
            min_spread_nats: self.min_spread_nats,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AcquisitionConfig {
    pub duration_s: f64,
    pub pair_rate_cps: f64,
    /// Delay of the simulated measured map.
    pub delay_ps: f64,
    pub phase_over_pi: f64,
}

impl Default for AcquisitionConfig {
    fn default() -> Self {
        Self {
            duration_s: 60.0,
            pair_rate_cps: 7000.0,
            delay_ps: 10.0,
            phase_over_pi: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub scenario: Option<Scenario>,
    pub output_dir: Option<PathBuf>,
    pub pump: PumpSpec,
    #[serde(default)]
    pub grid: GridConfig,
    pub source: SourceConfig,
    pub crystal: Option<CrystalConfig>,
    #[serde(default)]
    pub spectrometer: SpectrometerSpec,
    /// Idler-channel override; both channels share `spectrometer` otherwise.
    pub spectrometer_idler: Option<SpectrometerSpec>,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub fisher: FisherConfig,
    #[serde(default)]
    pub estimation: EstimationSection,
    #[serde(default)]
    pub acquisition: AcquisitionConfig,
    /// Directory that relative paths resolve against (the config file's).
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: Self =
            toml::from_str(text).map_err(|e| Error::invalid("config", e.message().to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml_str(&text, &base)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config fields are plain values")
    }

    pub fn idler_spectrometer(&self) -> SpectrometerSpec {
        self.spectrometer_idler.unwrap_or(self.spectrometer)
    }

    pub fn frequency_grid(&self) -> Result<FrequencyGrid> {
        let g = &self.grid;
        if !(g.min_wavelength_nm > 0.0 && g.min_wavelength_nm < g.max_wavelength_nm) {
            return Err(Error::invalid(
                "grid.min_wavelength_nm",
                "need 0 < min < max",
            ));
        }
        if g.points < 2 {
            return Err(Error::invalid("grid.points", "need at least 2 points"));
        }
        FrequencyGrid::from_wavelength_window(g.min_wavelength_nm, g.max_wavelength_nm, g.points)
    }

    pub fn gaussian_params(&self) -> Result<GaussianJsaParams> {
        let s = &self.source;
        let get = |v: Option<f64>, field: &str| {
            v.ok_or_else(|| {
                Error::invalid(format!("source.{field}"), "required by the gaussian model")
            })
        };
        let params = GaussianJsaParams {
            along_bandwidth: get(s.along_bandwidth_rad_per_ps, "along_bandwidth_rad_per_ps")?,
            across_bandwidth: get(s.across_bandwidth_rad_per_ps, "across_bandwidth_rad_per_ps")?,
            correlation_angle: s.correlation_angle_rad.unwrap_or(FRAC_PI_4),
        };
        for (field, v) in [
            ("source.along_bandwidth_rad_per_ps", params.along_bandwidth),
            (
                "source.across_bandwidth_rad_per_ps",
                params.across_bandwidth,
            ),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(field, format!("must be positive, got {v}")));
            }
        }
        Ok(params)
    }

    pub fn crystal_spec(&self) -> Result<CrystalSpec> {
        let c = self
            .crystal
            .as_ref()
            .ok_or_else(|| Error::invalid("crystal", "required by the phase-matched model"))?;
        let dispersion = match c.dispersion_source {
            DispersionKind::LinearizedGroupVelocity => {
                let get = |v: Option<f64>, name: &str| {
                    v.ok_or_else(|| {
                        Error::invalid(
                            format!("crystal.{name}_inverse_group_velocity_ps_per_mm"),
                            "required by the linearized model",
                        )
                    })
                };
                DispersionSource::LinearizedGroupVelocity {
                    inverse_group_velocities: InverseGroupVelocities {
                        pump: get(c.pump_inverse_group_velocity_ps_per_mm, "pump")?,
                        signal: get(c.signal_inverse_group_velocity_ps_per_mm, "signal")?,
                        idler: get(c.idler_inverse_group_velocity_ps_per_mm, "idler")?,
                    },
                    phase_mismatch_rad_per_mm: c.phase_mismatch_rad_per_mm,
                }
            }
            DispersionKind::SellmeierTable => {
                DispersionSource::SellmeierTable(match &c.sellmeier_table {
                    Some(p) => Some(SellmeierTable::load(&self.base_dir.join(p))?),
                    None => None,
                })
            }
        };
        let spec = CrystalSpec {
            length_mm: c.length_mm,
            poling_period_um: c.poling_period_um,
            dispersion,
            gvm_check: c.gvm_check,
            gvm_tolerance_ps_per_mm: c.gvm_tolerance_ps_per_mm,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Check every block; nothing is computed.
    pub fn validate(&self) -> Result<()> {
        self.pump.validate()?;
        self.frequency_grid()?;
        match self.source.model {
            SourceModel::Gaussian => {
                self.gaussian_params()?;
            }
            SourceModel::PhaseMatched => {
                self.crystal_spec()?;
            }
        }
        // a crystal block present but unused must still be sound
        if self.crystal.is_some() {
            self.crystal_spec()?;
        }
        self.spectrometer.validate()?;
        self.idler_spectrometer().validate()?;

        let s = &self.scan;
        if !(s.envelope_start_ps < s.envelope_stop_ps && s.envelope_step_ps > 0.0) {
            return Err(Error::invalid(
                "scan.envelope_step_ps",
                "need start < stop and a positive step",
            ));
        }
        if s.envelope_samples_per_period < 4 {
            return Err(Error::invalid(
                "scan.envelope_samples_per_period",
                "need at least 4",
            ));
        }
        if !(s.fine_periods >= 1.0) {
            return Err(Error::invalid(
                "scan.fine_periods",
                "a fine scan must cover at least one period",
            ));
        }
        if (s.fine_samples_per_period as f64) < crate::interference::MIN_SAMPLES_PER_PERIOD {
            return Err(Error::invalid(
                "scan.fine_samples_per_period",
                "need at least 8 samples per period",
            ));
        }
        if !(s.lobe_threshold > 0.0 && s.lobe_threshold < 1.0) {
            return Err(Error::invalid("scan.lobe_threshold", "must lie in (0, 1)"));
        }
        if s.coarse_delays_ps
            .iter()
            .chain(&s.phases_over_pi)
            .any(|v| !v.is_finite())
        {
            return Err(Error::invalid(
                "scan.coarse_delays_ps",
                "values must be finite",
            ));
        }

        let f = &self.fisher;
        if f.samples_per_period < 8 {
            return Err(Error::invalid(
                "fisher.samples_per_period",
                "need at least 8",
            ));
        }
        if !(f.derivative_step_fraction > 0.0
            && f.derivative_step_fraction <= crate::fisher::MAX_STEP_FRACTION)
        {
            return Err(Error::invalid(
                "fisher.derivative_step_fraction",
                "must lie in (0, 1/8]",
            ));
        }

        let e = &self.estimation;
        if e.n_events == 0 || e.n_trials == 0 {
            return Err(Error::invalid(
                "estimation.n_events",
                "events and trials must be positive",
            ));
        }
        if !(e.tolerance_ps > 0.0) || e.prescan_points < 3 || !(e.min_spread_nats >= 0.0) {
            return Err(Error::invalid(
                "estimation.tolerance_ps",
                "invalid likelihood-search settings",
            ));
        }
        if e.window_half_width_ps.is_some_and(|w| !(w > 0.0)) {
            return Err(Error::invalid(
                "estimation.window_half_width_ps",
                "must be positive",
            ));
        }

        let a = &self.acquisition;
        if !(a.duration_s >= 0.0 && a.pair_rate_cps >= 0.0) {
            return Err(Error::invalid(
                "acquisition.duration_s",
                "duration and rate must be >= 0",
            ));
        }
        Ok(())
    }

    /// Build the configured JSA after validating the config.
    pub fn build_jsa(&self) -> Result<JsaGrid> {
        self.validate()?;
        let grid = self.frequency_grid()?;
        match self.source.model {
            SourceModel::Gaussian => {
                build_gaussian_jsa(&self.pump, &self.gaussian_params()?, &grid)
            }
            SourceModel::PhaseMatched => {
                build_phasematched_jsa(&self.pump, &self.crystal_spec()?, &grid)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 1
[pump]
center_wavelength_nm = 792.0
pulse_duration_ps = 2.0
[source]
model = "gaussian"
along_bandwidth_rad_per_ps = 0.93
across_bandwidth_rad_per_ps = 0.9
"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = RunConfig::from_toml_str(MINIMAL, Path::new(".")).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.grid.points, 256);
        assert_eq!(cfg.spectrometer.full_dispersion_ps_per_nm, 941.0);
        assert_eq!(cfg.gaussian_params().unwrap().correlation_angle, FRAC_PI_4);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("pulse_duration_ps", "pulse_duration_fs");
        assert!(matches!(
            RunConfig::from_toml_str(&text, Path::new(".")),
            Err(Error::InvalidParameter { .. })
        ));
        let text = format!("{MINIMAL}\n[grid]\npoints = 64\nspacing = 1\n");
        assert!(RunConfig::from_toml_str(&text, Path::new(".")).is_err());
    }

    #[test]
    fn zero_poling_period_names_the_field() {
        let text = format!(
            "{MINIMAL}\n[crystal]\nlength_mm = 30.0\npoling_period_um = 0.0\n\
             dispersion_source = \"linearized-group-velocity\"\n\
             pump_inverse_group_velocity_ps_per_mm = 6.0\n\
             signal_inverse_group_velocity_ps_per_mm = 5.9\n\
             idler_inverse_group_velocity_ps_per_mm = 6.1\n"
        );
        let cfg = RunConfig::from_toml_str(&text, Path::new(".")).unwrap();
        match cfg.validate() {
            Err(Error::InvalidParameter { field, .. }) => {
                assert_eq!(field, "crystal.poling_period_um")
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_sellmeier_table_is_reported() {
        let text = MINIMAL.replace("model = \"gaussian\"", "model = \"phase-matched\"")
            + "\n[crystal]\nlength_mm = 30.0\npoling_period_um = 46.1\ndispersion_source = \"sellmeier-table\"\n";
        let cfg = RunConfig::from_toml_str(&text, Path::new(".")).unwrap();
        assert!(matches!(cfg.validate(), Err(Error::MissingSellmeier)));
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = RunConfig::from_toml_str(MINIMAL, Path::new(".")).unwrap();
        let again = RunConfig::from_toml_str(&cfg.to_toml(), Path::new(".")).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn scenario_names_parse() {
        for s in Scenario::ALL {
            assert_eq!(s.as_str().parse::<Scenario>().unwrap(), s);
        }
        assert!("fig9".parse::<Scenario>().is_err());
    }
}
