//! Schema-aware comparison of CSV artifacts for regression checks.
//!
//! Tables are compared cell by cell and must share a header and row count.
//! Grid artifacts are compared on the axis points both files share, so a
//! refined-grid run can be checked against a default run.

use std::path::Path;

use crate::io::{read_artifact, Artifact, GridArtifact};
use crate::{Error, Result};

/// Relative tolerance for matching axis points, in units of the coarser step.
const AXIS_MATCH_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct DiffReport {
    pub schema: String,
    pub compared: usize,
    pub failures: usize,
    pub max_abs: f64,
    pub max_rel: f64,
    /// Where `max_rel` occurs.
    pub worst: Option<String>,
    pub tolerance: f64,
    pub floor: f64,
}

impl DiffReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.compared > 0
    }

    fn new(schema: &str, tolerance: f64, floor: f64) -> Self {
        Self {
            schema: schema.to_string(),
            compared: 0,
            failures: 0,
            max_abs: 0.0,
            max_rel: 0.0,
            worst: None,
            tolerance,
            floor,
        }
    }

    fn add(&mut self, a: f64, b: f64, location: impl FnOnce() -> String) {
        let abs = (a - b).abs();
        let scale = a.abs().max(b.abs()).max(self.floor);
        let rel = if abs == 0.0 {
            0.0
        } else if scale > 0.0 {
            abs / scale
        } else {
            f64::INFINITY
        };
        let rel = if rel.is_nan() { f64::INFINITY } else { rel };
        self.compared += 1;
        self.max_abs = self.max_abs.max(abs);
        if rel > self.tolerance {
            self.failures += 1;
        }
        if rel > self.max_rel || self.worst.is_none() && rel == self.max_rel && rel > 0.0 {
            self.max_rel = rel;
            self.worst = Some(location());
        }
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        format!(
            "{} {}: {} values compared, {} over tolerance {:e}; max rel diff {:e}{}, max abs diff {:e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.schema,
            self.compared,
            self.failures,
            self.tolerance,
            self.max_rel,
            self.worst.as_ref().map(|w| format!(" at {w}")).unwrap_or_default(),
            self.max_abs
        )
    }
}

/// Compare two artifacts cell by cell with relative differences
/// `|a - b| / max(|a|, |b|, floor)`.
pub fn diff_files(a: &Path, b: &Path, tolerance: f64, floor: f64) -> Result<DiffReport> {
    if !(tolerance >= 0.0) || !(floor >= 0.0) {
        return Err(Error::invalid(
            "tolerance",
            "tolerance and floor must be >= 0",
        ));
    }
    diff_artifacts(&read_artifact(a)?, &read_artifact(b)?, tolerance, floor)
}

pub fn diff_artifacts(
    a: &Artifact,
    b: &Artifact,
    tolerance: f64,
    floor: f64,
) -> Result<DiffReport> {
    match (a, b) {
        (
            Artifact::Table {
                header: ha,
                rows: ra,
            },
            Artifact::Table {
                header: hb,
                rows: rb,
            },
        ) => {
            if ha != hb {
                return Err(Error::Schema(format!(
                    "table headers differ: {ha:?} vs {hb:?}"
                )));
            }
            if ra.len() != rb.len() {
                return Err(Error::Schema(format!(
                    "row counts differ: {} vs {}",
                    ra.len(),
                    rb.len()
                )));
            }
            let mut report = DiffReport::new(&ha.join(","), tolerance, floor);
            for (i, (x, y)) in ra.iter().zip(rb).enumerate() {
                for (k, (p, q)) in x.iter().zip(y).enumerate() {
                    report.add(*p, *q, || format!("row {i}, column {}", ha[k]));
                }
            }
            Ok(report)
        }
        (Artifact::Grid(ga), Artifact::Grid(gb)) => diff_grids(ga, gb, tolerance, floor),
        _ => Err(Error::Schema(
            "cannot compare a table with a grid artifact".into(),
        )),
    }
}

/// Row axis, column axis and values per cell for each grid schema, and
/// whether the axes hold bin edges (cells are then keyed by lower edge).
fn layout(schema: &str) -> Result<(&'static str, &'static str, usize, bool)> {
    match schema {
        "jsa" => Ok(("signal_rad_per_ps", "idler_rad_per_ps", 2, false)),
        "jsi" => Ok(("signal_rad_per_ps", "idler_rad_per_ps", 1, false)),
        "arrival_time_map" => Ok(("t1_ps", "t2_ps", 1, false)),
        "histogram" => Ok(("t1_edges_ps", "t2_edges_ps", 1, true)),
        other => Err(Error::Schema(format!("unknown grid schema {other:?}"))),
    }
}

/// Pairs `(i, j)` of indices with `a[i] == b[j]` up to a fraction of the step.
fn shared_points(a: &[f64], b: &[f64]) -> Vec<(usize, usize)> {
    let step = |v: &[f64]| {
        if v.len() > 1 {
            (v[v.len() - 1] - v[0]).abs() / (v.len() - 1) as f64
        } else {
            0.0
        }
    };
    let tol = AXIS_MATCH_TOLERANCE * step(a).max(step(b)).max(f64::MIN_POSITIVE);
    let mut out = Vec::new();
    let mut j = 0;
    for (i, &x) in a.iter().enumerate() {
        while j < b.len() && b[j] < x - tol {
            j += 1;
        }
        if j < b.len() && (b[j] - x).abs() <= tol {
            out.push((i, j));
        }
    }
    out
}

fn diff_grids(
    a: &GridArtifact,
    b: &GridArtifact,
    tolerance: f64,
    floor: f64,
) -> Result<DiffReport> {
    if a.schema != b.schema {
        return Err(Error::Schema(format!(
            "schemas differ: {} vs {}",
            a.schema, b.schema
        )));
    }
    let (row_axis, col_axis, per_cell, edges) = layout(&a.schema)?;
    let mut report = DiffReport::new(&a.schema, tolerance, floor);

    let keys = |g: &GridArtifact| {
        g.metadata
            .iter()
            .map(|(k, _)| k.clone())
            .collect::<Vec<_>>()
    };
    if keys(a) != keys(b) {
        return Err(Error::Schema(format!(
            "metadata keys differ: {:?} vs {:?}",
            keys(a),
            keys(b)
        )));
    }
    for ((k, va), (_, vb)) in a.metadata.iter().zip(&b.metadata) {
        match (va.parse::<f64>(), vb.parse::<f64>()) {
            (Ok(x), Ok(y)) => report.add(x, y, || format!("metadata {k}")),
            _ if va == vb => {}
            _ => {
                return Err(Error::Schema(format!(
                    "metadata {k} differs: {va:?} vs {vb:?}"
                )))
            }
        }
    }

    let keys = |g: &'_ GridArtifact, name: &str| -> Result<Vec<f64>> {
        let v = g.axis(name)?;
        Ok(if edges {
            v[..v.len().saturating_sub(1)].to_vec()
        } else {
            v.to_vec()
        })
    };
    let rows = shared_points(&keys(a, row_axis)?, &keys(b, row_axis)?);
    let cols = shared_points(&keys(a, col_axis)?, &keys(b, col_axis)?);
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::Schema("the artifacts share no grid points".into()));
    }
    for &(ia, ib) in &rows {
        for &(ja, jb) in &cols {
            for c in 0..per_cell {
                let (x, y) = (
                    cell(a, ia, ja * per_cell + c)?,
                    cell(b, ib, jb * per_cell + c)?,
                );
                report.add(x, y, || format!("{row_axis}[{ia}], {col_axis}[{ja}]"));
            }
        }
    }
    Ok(report)
}

fn cell(g: &GridArtifact, i: usize, j: usize) -> Result<f64> {
    g.rows
        .get(i)
        .and_then(|r| r.get(j))
        .copied()
        .ok_or_else(|| Error::Shape(format!("{} data has no cell ({i}, {j})", g.schema)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interference::tests::test_jsa;
    use crate::interference::{noon_jsi, scan, InterferenceKind};
    use crate::io::{write_jsi_csv, write_scan_csv};

    #[test]
    fn identical_files_pass_with_zero_difference() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        write_jsi_csv(&p, &noon_jsi(&test_jsa(40), 5.0).unwrap()).unwrap();
        let r = diff_files(&p, &p, 0.0, 0.0).unwrap();
        assert!(r.passed());
        assert_eq!(r.max_rel, 0.0);
        assert_eq!(r.compared, 40 * 40 + 2);
    }

    #[test]
    fn histograms_compare_cell_by_cell() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.csv");
        let map = noon_jsi(&test_jsa(40), 5.0).unwrap();
        let (arrival, _) = crate::instrument::blur(&map, &Default::default()).unwrap();
        let hist = crate::instrument::acquire(&arrival, 1.0, 1000.0, 7).unwrap();
        crate::io::write_histogram_csv(&p, &hist, &[]).unwrap();
        let r = diff_files(&p, &p, 0.0, 0.0).unwrap();
        assert!(r.passed());
        assert_eq!(r.compared, 380 * 380 + 5);
    }

    #[test]
    fn shared_points_of_a_refined_axis() {
        let a: Vec<f64> = (0..5).map(|k| 1.0 + k as f64 * 0.5).collect();
        let b: Vec<f64> = (0..9).map(|k| 1.0 + k as f64 * 0.25).collect();
        assert_eq!(
            shared_points(&a, &b),
            vec![(0, 0), (1, 2), (2, 4), (3, 6), (4, 8)]
        );
    }

    #[test]
    fn different_tables_fail_and_schema_mismatch_errors() {
        let dir = tempfile::tempdir().unwrap();
        let jsa = test_jsa(40);
        let (p, q, r) = (
            dir.path().join("p.csv"),
            dir.path().join("q.csv"),
            dir.path().join("r.csv"),
        );
        write_scan_csv(
            &p,
            &scan(&jsa, 0.0, 1.0, 0.1, InterferenceKind::Hom).unwrap(),
        )
        .unwrap();
        write_scan_csv(
            &q,
            &scan(&jsa, 0.0, 1.0, 0.1, InterferenceKind::Hom).unwrap(),
        )
        .unwrap();
        std::fs::write(
            &q,
            std::fs::read_to_string(&q)
                .unwrap()
                .replacen("0.1,", "0.1000001,", 1),
        )
        .unwrap();
        let report = diff_files(&p, &q, 1e-12, 0.0).unwrap();
        assert!(!report.passed());
        assert_eq!(report.failures, 1);
        write_jsi_csv(&r, &noon_jsi(&jsa, 0.0).unwrap()).unwrap();
        assert!(matches!(
            diff_files(&p, &r, 1e-3, 0.0),
            Err(Error::Schema(_))
        ));
    }
}
