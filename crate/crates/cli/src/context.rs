use std::path::{Path, PathBuf};

use noonsi::config::RunConfig;
use noonsi::spectral::{DispersionSource, JsaGrid};
use noonsi::{Error, Result};

use crate::{CommonArgs, Format};

const DEFAULT_CONFIG: &str = include_str!("../../../configs/default.toml");
const MANIFEST: &str = "manifest.toml";

/// One invocation: the effective config, where outputs go, and the manifest
/// that records them.
pub struct Context {
    pub cfg: RunConfig,
    pub out_dir: PathBuf,
    formats: Vec<Format>,
    command: String,
    files: Vec<toml::Table>,
    summary: toml::Table,
    jsa: Option<JsaGrid>,
}

impl Context {
    pub fn new(common: &CommonArgs, command: String) -> Result<Self> {
        let mut cfg = match &common.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::from_toml_str(DEFAULT_CONFIG, Path::new("."))?,
        };
        if let Some(seed) = common.seed {
            cfg.seed = seed;
        }
        if let Some(n) = common.grid_n {
            cfg.grid.points = n;
        }
        cfg.validate()?;
        let out_dir = common
            .out
            .clone()
            .or_else(|| cfg.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        std::fs::create_dir_all(&out_dir)?;
        let formats = if common.format.is_empty() {
            vec![Format::Csv, Format::Pgm]
        } else {
            common.format.clone()
        };
        Ok(Self {
            cfg,
            out_dir,
            formats,
            command,
            files: Vec::new(),
            summary: toml::Table::new(),
            jsa: None,
        })
    }

    pub fn wants(&self, format: Format) -> bool {
        self.formats.contains(&format)
    }

    pub fn jsa(&mut self) -> Result<&JsaGrid> {
        if self.jsa.is_none() {
            self.jsa = Some(self.cfg.build_jsa()?);
        }
        Ok(self.jsa.as_ref().expect("built above"))
    }

    /// Path of output `name`, registered in the manifest under `schema`.
    pub fn output(&mut self, name: &str, schema: &str) -> PathBuf {
        let mut entry = toml::Table::new();
        entry.insert("path".into(), name.into());
        entry.insert("schema".into(), schema.into());
        self.files.push(entry);
        self.out_dir.join(name)
    }

    /// Record a summary value in the manifest and echo it.
    pub fn note(&mut self, key: &str, value: impl Into<toml::Value>) {
        let value = value.into();
        println!("{key} = {value}");
        self.summary.insert(key.to_string(), value);
    }

    /// Write `manifest.toml`: everything needed to regenerate the outputs.
    pub fn finish(self) -> Result<()> {
        let mut m = toml::Table::new();
        m.insert("tool".into(), env!("CARGO_PKG_NAME").into());
        m.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        m.insert(
            "artifact_format_version".into(),
            noonsi::io::FORMAT_VERSION.into(),
        );
        m.insert("command".into(), self.command.into());
        m.insert("seed".into(), toml::Value::Integer(self.cfg.seed as i64));
        m.insert(
            "rng".into(),
            "ChaCha8 (rand_chacha) seeded with `seed`; Monte-Carlo trial k and histogram row k \
             use stream k, so outputs do not depend on the thread count"
                .into(),
        );
        m.insert(
            "tolerances".into(),
            toml::Value::Table(tolerances(&self.cfg)),
        );
        m.insert(
            "files".into(),
            toml::Value::Array(self.files.into_iter().map(toml::Value::Table).collect()),
        );
        m.insert("summary".into(), toml::Value::Table(self.summary));
        let config: toml::Table =
            toml::from_str(&self.cfg.to_toml()).map_err(|e| Error::Parse {
                context: "effective config".into(),
                message: e.to_string(),
            })?;
        m.insert("config".into(), toml::Value::Table(config));
        if self.cfg.crystal.is_some() {
            if let DispersionSource::SellmeierTable(Some(table)) =
                self.cfg.crystal_spec()?.dispersion
            {
                let text = toml::to_string(&table).expect("Sellmeier table is plain data");
                let table: toml::Table = toml::from_str(&text).expect("round trip");
                m.insert("sellmeier".into(), toml::Value::Table(table));
            }
        }
        let text = toml::to_string(&m).expect("manifest is plain data");
        std::fs::write(self.out_dir.join(MANIFEST), text)?;
        Ok(())
    }
}

fn tolerances(cfg: &RunConfig) -> toml::Table {
    let mut t = toml::Table::new();
    let mut put = |k: &str, v: f64| {
        t.insert(k.into(), v.into());
    };
    put(
        "jsa_normalization",
        noonsi::spectral::NORMALIZATION_TOLERANCE,
    );
    put("grid_uniformity", noonsi::spectral::UNIFORMITY_TOLERANCE);
    put(
        "min_samples_per_fwhm",
        noonsi::spectral::MIN_SAMPLES_PER_FWHM,
    );
    put(
        "min_samples_per_carrier_period",
        noonsi::interference::MIN_SAMPLES_PER_PERIOD,
    );
    put("lobe_threshold", cfg.scan.lobe_threshold);
    put("fisher_singular_epsilon", noonsi::fisher::SINGULAR_EPSILON);
    put(
        "fisher_derivative_step_fraction",
        cfg.fisher.derivative_step_fraction,
    );
    put("mle_tolerance_ps", cfg.estimation.tolerance_ps);
    put("mle_min_spread_nats", cfg.estimation.min_spread_nats);
    t
}
