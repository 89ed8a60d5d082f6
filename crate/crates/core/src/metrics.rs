//! Framewise precision, recall and f-measure, frame-rate conversion of label
//! matrices, the evaluation window, and disagreement statistics between two
//! labelings of the same annotation.
//!
//! Counts are totals over all frames and labels:
//!
//! ```text
//! P = ΣTP / (ΣTP + ΣFP)      R = ΣTP / (ΣTP + ΣFN)      F = 2PR / (P + R)
//! ```
//!
//! A zero denominator yields 0 with the matching `*_defined` flag cleared.

use std::collections::BTreeMap;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::annotation::Annotation;
use crate::error::{Error, Result};
use crate::quantize::{
    rasterize, FrameGrid, LabelMatrix, LabelingFunction, QuantizedInterval, Rasterized,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Add for EvalCounts {
    type Output = EvalCounts;

    fn add(self, rhs: Self) -> Self {
        EvalCounts {
            tp: self.tp + rhs.tp,
            fp: self.fp + rhs.fp,
            fn_: self.fn_ + rhs.fn_,
        }
    }
}

impl AddAssign for EvalCounts {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for EvalCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(EvalCounts::default(), Add::add)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult<T> {
    pub precision: T,
    pub recall: T,
    pub fmeasure: T,
    pub counts: EvalCounts,
    pub precision_defined: bool,
    pub recall_defined: bool,
    pub fmeasure_defined: bool,
}

fn check_same_shape(a: &LabelMatrix, b: &LabelMatrix) -> Result<()> {
    if a.num_frames() != b.num_frames() || a.num_labels() != b.num_labels() {
        return Err(Error::contract(format!(
            "shape mismatch: {}x{} vs {}x{}",
            a.num_frames(),
            a.num_labels(),
            b.num_frames(),
            b.num_labels()
        )));
    }
    if a.grid().fps() != b.grid().fps() {
        return Err(Error::contract(format!(
            "frame rate mismatch: {} vs {} fps",
            a.grid().fps(),
            b.grid().fps()
        )));
    }
    Ok(())
}

pub fn framewise_counts(pred: &LabelMatrix, reference: &LabelMatrix) -> Result<EvalCounts> {
    check_same_shape(pred, reference)?;
    let mut c = EvalCounts::default();
    for (&p, &r) in pred.cells().iter().zip(reference.cells()) {
        match (p != 0, r != 0) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => {}
        }
    }
    Ok(c)
}

fn ratio<T: Scalar>(num: u64, den: u64) -> (T, bool) {
    if den == 0 {
        (T::zero(), false)
    } else {
        (T::from_count(num) / T::from_count(den), true)
    }
}

pub fn prf<T: Scalar>(c: EvalCounts) -> EvalResult<T> {
    let (precision, precision_defined) = ratio::<T>(c.tp, c.tp + c.fp);
    let (recall, recall_defined) = ratio::<T>(c.tp, c.tp + c.fn_);
    let sum = precision + recall;
    let (fmeasure, fmeasure_defined) = if sum > T::zero() {
        ((T::one() + T::one()) * precision * recall / sum, true)
    } else {
        (T::zero(), false)
    };
    EvalResult {
        precision,
        recall,
        fmeasure,
        counts: c,
        precision_defined,
        recall_defined,
        fmeasure_defined,
    }
}

/// Sample-and-hold conversion to `target`'s frame rate and length.
///
/// Target row `t` copies source row `min(floor(t * src_fps / target_fps), T_src - 1)`.
pub fn resample(m: &LabelMatrix, target: FrameGrid) -> Result<LabelMatrix> {
    if m.is_empty() {
        return Err(Error::contract("cannot resample an empty label matrix"));
    }
    let src_fps = m.grid().fps();
    let last = m.num_frames() - 1;
    let mut out = LabelMatrix::zeros(target, m.num_labels());
    for t in 0..target.num_frames() {
        // Multiplying first keeps t * fps exact for the usual rates.
        let src = ((t as f64 * src_fps) / target.fps()).floor() as usize;
        let row = m.row(src.min(last));
        for (k, &v) in row.iter().enumerate() {
            if v != 0 {
                out.set(t, k, true);
            }
        }
    }
    Ok(out)
}

/// Tolerance for `seconds * fps` landing a hair below a whole frame count.
const WINDOW_FRAME_SLACK: f64 = 1e-9;

/// Keeps the frames that start within the first `seconds`.
pub fn truncate(m: &LabelMatrix, seconds: f64) -> Result<LabelMatrix> {
    if !(seconds.is_finite() && seconds > 0.0) {
        return Err(Error::contract(format!(
            "window must be positive, got {seconds}"
        )));
    }
    let frames = (seconds * m.grid().fps() + WINDOW_FRAME_SLACK).floor();
    if frames < 1.0 {
        return Err(Error::contract(format!(
            "window of {seconds} s is shorter than one frame"
        )));
    }
    let frames = if frames >= m.num_frames() as f64 {
        m.num_frames()
    } else {
        frames as usize
    };
    m.take_rows(frames)
}

/// How a ground truth is built for evaluation: kind A at `reference_fps`,
/// cut to the first `window_sec` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalProtocol {
    pub reference_fps: f64,
    pub window_sec: f64,
}

impl Default for EvalProtocol {
    fn default() -> Self {
        EvalProtocol {
            reference_fps: 100.0,
            window_sec: 30.0,
        }
    }
}

impl EvalProtocol {
    pub fn reference(&self, a: &Annotation) -> Result<LabelMatrix> {
        let grid = FrameGrid::covering(self.reference_fps, a.duration_sec())?;
        truncate(
            &rasterize(a, grid, LabelingFunction::A, 0)?,
            self.window_sec,
        )
    }

    /// Counts for `pred` (at any frame rate) against this protocol's reference for `a`.
    pub fn counts(&self, pred: &LabelMatrix, a: &Annotation) -> Result<EvalCounts> {
        let reference = self.reference(a)?;
        compare_resampled(pred, &reference, self.window_sec)
    }

    pub fn evaluate(&self, pred: &LabelMatrix, a: &Annotation) -> Result<EvalResult<f64>> {
        Ok(prf(self.counts(pred, a)?))
    }
}

/// Resamples `pred` onto `reference`'s grid, truncates both to `window_sec`, and counts.
pub fn compare_resampled(
    pred: &LabelMatrix,
    reference: &LabelMatrix,
    window_sec: f64,
) -> Result<EvalCounts> {
    let reference = truncate(reference, window_sec)?;
    let pred = truncate(&resample(pred, *reference.grid())?, window_sec)?;
    framewise_counts(&pred, &reference)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DisagreementStats {
    pub differing_frames: usize,
    /// `differing_frames / (T * K)`.
    pub frame_rate_of_disagreement: f64,
    /// Signed onset shift (second minus first labeling, in frames) → event count; zero shifts omitted.
    pub onset_shift_histogram: BTreeMap<i64, usize>,
    pub offset_shift_histogram: BTreeMap<i64, usize>,
}

/// Cellwise disagreement only; the histograms stay empty.
pub fn cell_disagreement(a: &LabelMatrix, b: &LabelMatrix) -> Result<DisagreementStats> {
    check_same_shape(a, b)?;
    let differing = a
        .cells()
        .iter()
        .zip(b.cells())
        .filter(|(x, y)| (**x != 0) != (**y != 0))
        .count();
    let total = a.cells().len();
    Ok(DisagreementStats {
        differing_frames: differing,
        frame_rate_of_disagreement: if total == 0 {
            0.0
        } else {
            differing as f64 / total as f64
        },
        ..Default::default()
    })
}

/// Cellwise disagreement plus per-event boundary shifts between two rasterizations of `events`.
pub fn disagreement(
    a: &Rasterized,
    b: &Rasterized,
    events: &Annotation,
) -> Result<DisagreementStats> {
    if a.intervals.len() != events.len() || b.intervals.len() != events.len() {
        return Err(Error::contract(format!(
            "interval records ({}, {}) do not match {} events",
            a.intervals.len(),
            b.intervals.len(),
            events.len()
        )));
    }
    interval_disagreement(&a.matrix, &b.matrix, &a.intervals, &b.intervals)
}

/// Like [`disagreement`], from matrices and their per-event interval records.
pub fn interval_disagreement(
    a: &LabelMatrix,
    b: &LabelMatrix,
    ia: &[QuantizedInterval],
    ib: &[QuantizedInterval],
) -> Result<DisagreementStats> {
    if ia.len() != ib.len() {
        return Err(Error::contract(format!(
            "interval records differ in length: {} vs {}",
            ia.len(),
            ib.len()
        )));
    }
    let mut stats = cell_disagreement(a, b)?;
    for (qa, qb) in ia.iter().zip(ib) {
        let onset = qb.t_s as i64 - qa.t_s as i64;
        let offset = qb.t_e as i64 - qa.t_e as i64;
        if onset != 0 {
            *stats.onset_shift_histogram.entry(onset).or_default() += 1;
        }
        if offset != 0 {
            *stats.offset_shift_histogram.entry(offset).or_default() += 1;
        }
    }
    Ok(stats)
}
