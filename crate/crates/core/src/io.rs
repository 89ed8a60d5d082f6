//! Text formats: label and feature matrices as headerless CSV with a one-line
//! JSON sidecar, experiment tables, and evaluation rows.

use std::fmt::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Location, Result};
use crate::metrics::EvalResult;
use crate::quantize::{FrameGrid, LabelMatrix, LabelingFunction};
use crate::scalar::Scalar;
use crate::synth::FeatureMatrix;
use crate::trainer::ExperimentTable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixSidecar {
    pub fps: f64,
    pub num_frames: usize,
    pub num_labels: usize,
    pub labeling_function: Option<LabelingFunction>,
    pub seed: Option<u64>,
}

impl MatrixSidecar {
    pub fn for_matrix(
        m: &LabelMatrix,
        function: Option<LabelingFunction>,
        seed: Option<u64>,
    ) -> Self {
        MatrixSidecar {
            fps: m.grid().fps(),
            num_frames: m.num_frames(),
            num_labels: m.num_labels(),
            labeling_function: function,
            seed,
        }
    }

    pub fn grid(&self) -> Result<FrameGrid> {
        FrameGrid::new(self.fps, self.num_frames)
    }
}

/// `labels.csv` → `labels.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Per-event interval records stored next to a label matrix CSV.
pub fn intervals_path(csv: &Path) -> PathBuf {
    csv.with_extension("intervals.json")
}

pub fn label_matrix_to_csv(m: &LabelMatrix) -> String {
    let mut out = String::with_capacity(m.cells().len() * 2);
    for row in m.rows() {
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push(if *v != 0 { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

fn csv_rows(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.split(',').map(str::trim).collect()))
}

pub fn label_matrix_from_csv(text: &str, sidecar: &MatrixSidecar) -> Result<LabelMatrix> {
    let grid = sidecar.grid()?;
    let mut rows = Vec::with_capacity(sidecar.num_frames);
    for (line, fields) in csv_rows(text) {
        let at = Some(Location::Line(line));
        if sidecar.num_labels == 0 && fields == [""] {
            rows.push(Vec::new());
            continue;
        }
        if fields.len() != sidecar.num_labels {
            return Err(Error::format(
                at,
                format!(
                    "expected {} columns, found {}",
                    sidecar.num_labels,
                    fields.len()
                ),
            ));
        }
        let row = fields
            .iter()
            .map(|f| match *f {
                "0" => Ok(0u8),
                "1" => Ok(1u8),
                other => Err(Error::format(
                    at.clone(),
                    format!("non-binary cell {other:?}"),
                )),
            })
            .collect::<Result<Vec<u8>>>()?;
        rows.push(row);
    }
    if rows.len() != sidecar.num_frames {
        return Err(Error::format(
            None,
            format!(
                "sidecar promises {} rows, CSV has {}",
                sidecar.num_frames,
                rows.len()
            ),
        ));
    }
    LabelMatrix::from_rows(grid, sidecar.num_labels, &rows)
}

/// Reads `path` and its sidecar. A missing or incomplete sidecar is a contract error naming it.
pub fn read_label_matrix(path: &Path) -> Result<(LabelMatrix, MatrixSidecar)> {
    let side = sidecar_path(path);
    let side_text = std::fs::read_to_string(&side).map_err(|e| {
        Error::contract(format!(
            "cannot read frame-rate sidecar {}: {e}",
            side.display()
        ))
    })?;
    let sidecar: MatrixSidecar = serde_json::from_str(&side_text).map_err(|e| {
        Error::contract(format!(
            "sidecar {} lacks matrix metadata: {e}",
            side.display()
        ))
    })?;
    let text = std::fs::read_to_string(path)?;
    Ok((label_matrix_from_csv(&text, &sidecar)?, sidecar))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureSidecar {
    pub fps: f64,
    pub num_frames: usize,
    pub feature_dim: usize,
    pub noise_seed: u64,
}

pub fn feature_matrix_to_csv<T: Scalar>(f: &FeatureMatrix<T>) -> String {
    let mut out = String::new();
    for t in 0..f.num_frames() {
        for (j, v) in f.row(t).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

pub fn feature_matrix_from_csv<T: Scalar + std::str::FromStr>(
    text: &str,
    sidecar: &FeatureSidecar,
) -> Result<FeatureMatrix<T>> {
    let grid = FrameGrid::new(sidecar.fps, sidecar.num_frames)?;
    let mut values = Vec::with_capacity(sidecar.num_frames * sidecar.feature_dim);
    for (line, fields) in csv_rows(text) {
        if fields.len() != sidecar.feature_dim {
            return Err(Error::format(
                Some(Location::Line(line)),
                format!(
                    "expected {} columns, found {}",
                    sidecar.feature_dim,
                    fields.len()
                ),
            ));
        }
        for f in fields {
            values.push(f.parse::<T>().map_err(|_| {
                Error::format(Some(Location::Line(line)), format!("invalid number {f:?}"))
            })?);
        }
    }
    FeatureMatrix::from_vec(grid, sidecar.feature_dim, values)
}

pub const EXPERIMENT_CSV_HEADER: &str = "fn,seed,split,precision,recall,fmeasure";

pub fn experiment_table_csv(t: &ExperimentTable) -> String {
    let mut out = format!("{EXPERIMENT_CSV_HEADER}\n");
    for r in &t.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.function, r.seed, r.split, r.result.precision, r.result.recall, r.result.fmeasure
        );
    }
    out
}

pub fn experiment_summary_json(t: &ExperimentTable) -> Result<String> {
    Ok(serde_json::to_string_pretty(&t.summary)? + "\n")
}

pub const EVAL_CSV_HEADER: &str = "piece,fn,seed,fps,tp,fp,fn,precision,recall,fmeasure";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub piece: String,
    #[serde(rename = "fn")]
    pub function: Option<LabelingFunction>,
    pub seed: Option<u64>,
    pub fps: f64,
    pub result: EvalResult<f64>,
}

pub fn eval_rows_csv(rows: &[EvalRow]) -> String {
    let mut out = format!("{EVAL_CSV_HEADER}\n");
    for r in rows {
        let c = r.result.counts;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.piece,
            r.function.map(|f| f.to_string()).unwrap_or_default(),
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
            r.fps,
            c.tp,
            c.fp,
            c.fn_,
            r.result.precision,
            r.result.recall,
            r.result.fmeasure
        );
    }
    out
}
