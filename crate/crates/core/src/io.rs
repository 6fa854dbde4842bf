//! File formats: CSV artifacts and 8-bit portable graymaps.
//!
//! Grid artifacts (JSA, JSI, arrival-time maps, histograms) start with a
//! `schema,<name>,version,1` record, then `key,value` metadata records, then
//! one record per axis (`axis,name,v0,v1,...`), then a `data` marker followed by one
//! record per row of the matrix, led by the row index. Complex JSA cells are
//! written as `re,im` column pairs. Tables (scans, envelopes, Fisher curves)
//! are plain CSV with a header. Floats are written in shortest round-trip
//! form, so re-reading is exact and reruns are byte-identical.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;

use crate::fisher::FisherCurve;
use crate::instrument::{ArrivalTimeMap, CoincidenceHistogram};
use crate::interference::{DelayScan, EnvelopeScan, InterferenceKind, JsiMap};
use crate::spectral::{FrequencyGrid, JsaGrid, UniformAxis};
use crate::{wavelength_from_omega, Error, Result};

pub const FORMAT_VERSION: &str = "1";

/// A parsed grid artifact.
#[derive(Debug, Clone, PartialEq)]
pub struct GridArtifact {
    pub schema: String,
    pub metadata: Vec<(String, String)>,
    /// Axis name and values, in file order.
    pub axes: Vec<(String, Vec<f64>)>,
    /// Matrix rows as written (complex data has interleaved `re,im`).
    pub rows: Vec<Vec<f64>>,
}

impl GridArtifact {
    pub fn meta(&self, key: &str) -> Result<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::Schema(format!("{} artifact lacks `{key}`", self.schema)))
    }

    pub fn meta_f64(&self, key: &str) -> Result<f64> {
        let v = self.meta(key)?;
        v.parse()
            .map_err(|_| Error::parse(key, format!("not a number: {v:?}")))
    }

    pub fn axis(&self, name: &str) -> Result<&[f64]> {
        self.axes
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| Error::Schema(format!("{} artifact lacks axis `{name}`", self.schema)))
    }
}

/// Leading record of a CSV artifact: either a grid schema or a table header.
#[derive(Debug, Clone, PartialEq)]
pub enum Artifact {
    Grid(GridArtifact),
    Table {
        header: Vec<String>,
        rows: Vec<Vec<f64>>,
    },
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(csv::WriterBuilder::new()
        .flexible(true)
        .from_writer(BufWriter::new(File::create(path)?)))
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn write_grid<W: Write>(
    w: &mut csv::Writer<W>,
    schema: &str,
    metadata: &[(&str, String)],
    axes: &[(&str, Vec<f64>)],
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<()> {
    w.write_record(["schema", schema, "version", FORMAT_VERSION])?;
    for (k, v) in metadata {
        w.write_record([*k, v.as_str()])?;
    }
    for (name, values) in axes {
        let mut rec = vec!["axis".to_string(), name.to_string()];
        rec.extend(values.iter().map(|&v| fmt(v)));
        w.write_record(&rec)?;
    }
    w.write_record(["data"])?;
    for (i, row) in rows.enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(row.iter().map(|&v| fmt(v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn frequency_axes(grid: &FrequencyGrid) -> Vec<(&'static str, Vec<f64>)> {
    let nm = |a: &UniformAxis| a.values().into_iter().map(wavelength_from_omega).collect();
    vec![
        ("signal_rad_per_ps", grid.signal.values()),
        ("signal_nm", nm(&grid.signal)),
        ("idler_rad_per_ps", grid.idler.values()),
        ("idler_nm", nm(&grid.idler)),
    ]
}

pub fn write_jsa_csv(path: &Path, jsa: &JsaGrid) -> Result<()> {
    let mut w = writer(path)?;
    let rows = jsa
        .amplitude()
        .rows()
        .into_iter()
        .map(|r| r.iter().flat_map(|z| [z.re, z.im]).collect::<Vec<f64>>())
        .collect::<Vec<_>>();
    write_grid(
        &mut w,
        "jsa",
        &[
            (
                "degenerate_frequency_rad_per_ps",
                fmt(jsa.degenerate_frequency()),
            ),
            ("normalized", jsa.is_normalized().to_string()),
        ],
        &frequency_axes(jsa.grid()),
        rows.into_iter(),
    )
}

pub fn write_jsi_csv(path: &Path, map: &JsiMap) -> Result<()> {
    let mut w = writer(path)?;
    write_grid(
        &mut w,
        "jsi",
        &[
            ("kind", map.kind.as_str().to_string()),
            ("delay_ps", fmt(map.delay_ps)),
            ("phase_rad", fmt(map.phase_label)),
        ],
        &frequency_axes(&map.grid),
        map.intensity.rows().into_iter().map(|r| r.to_vec()),
    )
}

pub fn write_arrival_map_csv(path: &Path, map: &ArrivalTimeMap) -> Result<()> {
    let mut w = writer(path)?;
    write_grid(
        &mut w,
        "arrival_time_map",
        &[
            ("delay_ps", fmt(map.delay_ps)),
            ("phase_rad", fmt(map.phase_label)),
            ("source_mass", fmt(map.source_mass)),
        ],
        &[("t1_ps", map.t1.values()), ("t2_ps", map.t2.values())],
        map.intensity.rows().into_iter().map(|r| r.to_vec()),
    )
}

/// Histogram counts with bin edges and the acquisition metadata; `spec` is
/// written as extra metadata records.
pub fn write_histogram_csv(
    path: &Path,
    hist: &CoincidenceHistogram,
    spec: &[(&str, String)],
) -> Result<()> {
    let mut w = writer(path)?;
    let mut meta = vec![
        ("acquisition_seconds", fmt(hist.acquisition_seconds)),
        ("pair_rate_cps", fmt(hist.pair_rate_cps)),
        ("seed", hist.seed.to_string()),
        ("expected_total", fmt(hist.expected_total)),
        ("total", hist.total().to_string()),
        (
            "rng",
            "ChaCha8 (rand_chacha), stream = t1 row index".to_string(),
        ),
    ];
    meta.extend(spec.iter().cloned());
    write_grid(
        &mut w,
        "histogram",
        &meta,
        &[
            ("t1_edges_ps", hist.t1_edges.clone()),
            ("t2_edges_ps", hist.t2_edges.clone()),
        ],
        hist.counts
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|&c| c as f64).collect()),
    )
}

fn write_table(path: &Path, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header)?;
    let n = columns.first().map_or(0, |c| c.len());
    for i in 0..n {
        w.write_record(columns.iter().map(|c| fmt(c[i])))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_scan_csv(path: &Path, scan: &DelayScan) -> Result<()> {
    write_table(
        path,
        &["delay_ps", "probability"],
        &[scan.delays(), scan.probabilities()],
    )
}

pub fn write_envelope_csv(path: &Path, env: &EnvelopeScan) -> Result<()> {
    write_table(
        path,
        &["delay_ps", "upper", "lower", "contrast"],
        &[&env.delays, &env.upper, &env.lower, &env.contrast],
    )
}

pub fn write_fisher_csv(path: &Path, curve: &FisherCurve) -> Result<()> {
    let f_sr = vec![curve.f_sr; curve.delays.len()];
    write_table(
        path,
        &["delay_ps", "f_nsr", "f_sr"],
        &[&curve.delays, &curve.f_nsr, &f_sr],
    )
}

/// 8-bit binary graymap (P5), rows are signal/t1 bins top to bottom. Values
/// are scaled by `scale_max` (clamped at white) so that a sweep can share one
/// brightness scale.
pub fn write_pgm(path: &Path, intensity: &Array2<f64>, scale_max: f64) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let (rows, cols) = intensity.dim();
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "P5\n{cols} {rows}\n255\n")?;
    let bytes: Vec<u8> = intensity
        .iter()
        .map(|&v| {
            if scale_max > 0.0 {
                (255.0 * v / scale_max).round().clamp(0.0, 255.0) as u8
            } else {
                0
            }
        })
        .collect();
    out.write_all(&bytes)?;
    out.flush()?;
    Ok(())
}

fn parse_f64(context: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::parse(context, format!("not a number: {s:?}")))
}

/// Read any CSV artifact written by this module.
pub fn read_artifact(path: &Path) -> Result<Artifact> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)?;
    let records: Vec<csv::StringRecord> =
        reader.records().collect::<std::result::Result<_, _>>()?;
    let ctx = path.display().to_string();
    let first = records
        .first()
        .ok_or_else(|| Error::parse(&ctx, "empty file"))?;
    if first.get(0) != Some("schema") {
        let header: Vec<String> = first.iter().map(str::to_string).collect();
        let rows = records[1..]
            .iter()
            .map(|r| {
                r.iter()
                    .map(|s| parse_f64(&ctx, s))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if rows.iter().any(|r| r.len() != header.len()) {
            return Err(Error::parse(&ctx, "row length differs from header"));
        }
        return Ok(Artifact::Table { header, rows });
    }
    let schema = first
        .get(1)
        .ok_or_else(|| Error::parse(&ctx, "missing schema name"))?
        .to_string();
    if first.get(3) != Some(FORMAT_VERSION) {
        return Err(Error::Schema(format!(
            "unsupported {schema} version {:?}",
            first.get(3)
        )));
    }
    let data_at = records
        .iter()
        .position(|r| r.len() == 1 && r.get(0) == Some("data"))
        .ok_or_else(|| Error::parse(&ctx, "missing `data` marker"))?;
    let (mut metadata, mut axes) = (Vec::new(), Vec::new());
    for r in &records[1..data_at] {
        if r.get(0) == Some("axis") {
            let name = r
                .get(1)
                .ok_or_else(|| Error::parse(&ctx, "unnamed axis"))?
                .to_string();
            let values = r
                .iter()
                .skip(2)
                .map(|s| parse_f64(&ctx, s))
                .collect::<Result<Vec<_>>>()?;
            axes.push((name, values));
        } else if r.len() == 2 {
            metadata.push((r[0].to_string(), r[1].to_string()));
        } else {
            return Err(Error::parse(
                &ctx,
                format!("malformed header record {:?}", r.get(0)),
            ));
        }
    }
    let mut rows = Vec::with_capacity(records.len() - data_at - 1);
    for (i, r) in records[data_at + 1..].iter().enumerate() {
        let idx = r.get(0).unwrap_or_default();
        if idx.parse::<usize>().ok() != Some(i) {
            return Err(Error::parse(&ctx, format!("row {i} has index {idx:?}")));
        }
        rows.push(
            r.iter()
                .skip(1)
                .map(|s| parse_f64(&ctx, s))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(Artifact::Grid(GridArtifact {
        schema,
        metadata,
        axes,
        rows,
    }))
}

fn read_grid(path: &Path, schema: &str) -> Result<GridArtifact> {
    match read_artifact(path)? {
        Artifact::Grid(g) if g.schema == schema => Ok(g),
        Artifact::Grid(g) => Err(Error::Schema(format!(
            "expected a {schema} artifact, found {}",
            g.schema
        ))),
        Artifact::Table { .. } => Err(Error::Schema(format!(
            "expected a {schema} artifact, found a table"
        ))),
    }
}

fn grid_of(g: &GridArtifact) -> Result<FrequencyGrid> {
    Ok(FrequencyGrid::new(
        UniformAxis::from_values(g.axis("signal_rad_per_ps")?)?,
        UniformAxis::from_values(g.axis("idler_rad_per_ps")?)?,
    ))
}

fn check_rows(g: &GridArtifact, rows: usize, cols: usize) -> Result<()> {
    if g.rows.len() != rows || g.rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Shape(format!(
            "{} data is not {rows} rows of {cols} values",
            g.schema
        )));
    }
    Ok(())
}

pub fn read_jsa_csv(path: &Path) -> Result<JsaGrid> {
    let g = read_grid(path, "jsa")?;
    let grid = grid_of(&g)?;
    let (ns, ni) = grid.shape();
    check_rows(&g, ns, 2 * ni)?;
    let amp = Array2::from_shape_fn((ns, ni), |(i, j)| {
        Complex64::new(g.rows[i][2 * j], g.rows[i][2 * j + 1])
    });
    JsaGrid::new(grid, amp, g.meta_f64("degenerate_frequency_rad_per_ps")?)
}

pub fn read_jsi_csv(path: &Path) -> Result<JsiMap> {
    let g = read_grid(path, "jsi")?;
    let grid = grid_of(&g)?;
    let (ns, ni) = grid.shape();
    check_rows(&g, ns, ni)?;
    let intensity = Array2::from_shape_fn((ns, ni), |(i, j)| g.rows[i][j]);
    if intensity.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::NonFinite(
            "JSI values must be finite and >= 0".into(),
        ));
    }
    let kind: InterferenceKind = g.meta("kind")?.parse()?;
    Ok(JsiMap {
        grid,
        intensity,
        delay_ps: g.meta_f64("delay_ps")?,
        phase_label: g.meta_f64("phase_rad")?,
        kind,
    })
}

pub fn read_scan_csv(path: &Path, kind: InterferenceKind) -> Result<DelayScan> {
    match read_artifact(path)? {
        Artifact::Table { header, rows } if header == ["delay_ps", "probability"] => {
            DelayScan::new(
                rows.iter().map(|r| r[0]).collect(),
                rows.iter().map(|r| r[1]).collect(),
                kind,
            )
        }
        _ => Err(Error::Schema(
            "expected a delay_ps,probability table".into(),
        )),
    }
}
