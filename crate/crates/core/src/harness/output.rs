use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{NetsyncError, Result};

use super::config::{ExperimentConfig, ExperimentId};

/// Value of the `cell` column on rows derived from the whole grid.
pub const SUMMARY_CELL: &str = "summary";

/// One CSV row. Parameters that do not apply to a row are left empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub cell: String,
    pub n_agents: Option<usize>,
    pub r_max: Option<f64>,
    pub n_p: Option<f64>,
    pub p_a: Option<f64>,
    pub side_b: Option<f64>,
    pub statistic: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub n_samples: usize,
    pub resample_count: usize,
}

/// Grid parameters shared by the rows of a cell.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CellParams {
    pub n_agents: Option<usize>,
    pub r_max: Option<f64>,
    pub n_p: Option<f64>,
    pub p_a: Option<f64>,
    pub side_b: Option<f64>,
}

impl CellParams {
    pub fn row(
        &self,
        cell: &str,
        statistic: &str,
        value: f64,
        stderr: Option<f64>,
        n_samples: usize,
    ) -> ResultRow {
        ResultRow {
            cell: cell.to_string(),
            n_agents: self.n_agents,
            r_max: self.r_max,
            n_p: self.n_p,
            p_a: self.p_a,
            side_b: self.side_b,
            statistic: statistic.to_string(),
            value,
            stderr,
            n_samples,
            resample_count: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
}

impl ExperimentResult {
    /// Rows of one statistic in emission order.
    pub fn statistic<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a ResultRow> + 'a {
        self.rows.iter().filter(move |r| r.statistic == name)
    }

    pub fn summary_rows(&self) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(|r| r.cell == SUMMARY_CELL)
    }

    pub fn completed_cells(&self) -> BTreeSet<usize> {
        self.rows
            .iter()
            .filter_map(|r| r.cell.parse().ok())
            .collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let rows = r
            .deserialize()
            .collect::<std::result::Result<Vec<ResultRow>, _>>()?;
        Ok(Self { rows })
    }
}

pub fn csv_path(out_dir: &Path, id: ExperimentId) -> PathBuf {
    out_dir.join(format!("{id}.csv"))
}

pub fn manifest_path(out_dir: &Path, id: ExperimentId) -> PathBuf {
    out_dir.join(format!("{id}.manifest.toml"))
}

/// Writes through a temporary file so an interrupted run never leaves a
/// truncated CSV behind.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub(crate) fn save_result(
    out_dir: &Path,
    id: ExperimentId,
    result: &ExperimentResult,
) -> Result<()> {
    let mut buf = Vec::new();
    result.write_csv(&mut buf)?;
    write_atomic(&csv_path(out_dir, id), &buf)
}

/// Rows left by an earlier run with the same configuration, or an empty
/// result when starting fresh. A manifest with a different config echo is
/// refused rather than mixed.
pub(crate) fn load_previous(out_dir: &Path, config: &ExperimentConfig) -> Result<ExperimentResult> {
    let manifest = manifest_path(out_dir, config.id);
    let csv = csv_path(out_dir, config.id);
    if !manifest.exists() {
        return Ok(ExperimentResult::default());
    }
    let text = fs::read_to_string(&manifest)?;
    let table: toml::Table = toml::from_str(&text)?;
    let echo = table
        .get("config")
        .and_then(|v| v.as_str())
        .unwrap_or_default();
    if echo != config.echo() {
        return Err(NetsyncError::InvalidParameter(format!(
            "{} was produced with a different configuration; choose another output directory",
            manifest.display()
        )));
    }
    if !csv.exists() {
        return Ok(ExperimentResult::default());
    }
    let mut result = ExperimentResult::read_csv(fs::File::open(&csv)?)?;
    result.rows.retain(|r| r.cell != SUMMARY_CELL);
    Ok(result)
}

#[derive(Debug, Clone, Serialize)]
pub(crate) struct Manifest<'a> {
    pub experiment: &'a str,
    pub version: &'a str,
    pub master_seed: u64,
    pub seed_scheme: &'a str,
    pub cells_total: usize,
    pub cells_completed: usize,
    pub wall_time_s: f64,
    pub config: String,
}

pub(crate) fn save_manifest(
    out_dir: &Path,
    id: ExperimentId,
    manifest: &Manifest<'_>,
) -> Result<()> {
    let text = toml::to_string(manifest).map_err(|e| NetsyncError::Parse(e.to_string()))?;
    write_atomic(&manifest_path(out_dir, id), text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_keeps_values_exact() {
        let p = CellParams {
            n_agents: Some(200),
            r_max: Some(20.0),
            ..Default::default()
        };
        let mut res = ExperimentResult::default();
        res.rows
            .push(p.row("0", "rseb", 0.1 + 0.2, Some(1.0 / 3.0), 200));
        res.rows
            .push(CellParams::default().row(SUMMARY_CELL, "r2", 0.987654321, None, 4));
        let mut buf = Vec::new();
        res.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "cell,n_agents,r_max,n_p,p_a,side_b,statistic,value,stderr,n_samples,resample_count\n"
        ));
        let back = ExperimentResult::read_csv(&buf[..]).unwrap();
        assert_eq!(back, res);
        assert_eq!(
            back.completed_cells().into_iter().collect::<Vec<_>>(),
            vec![0]
        );
    }
}
