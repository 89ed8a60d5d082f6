use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A frame rate together with a frame count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameGrid {
    fps: f64,
    dt: f64,
    num_frames: usize,
}

impl FrameGrid {
    /// The lower of the two canonical frame rates.
    pub const FPS_LOW: f64 = 31.25;
    pub const FPS_HIGH: f64 = 100.0;

    pub fn new(fps: f64, num_frames: usize) -> Result<Self> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::contract(format!(
                "frame rate must be positive, got {fps}"
            )));
        }
        if num_frames == 0 {
            return Err(Error::contract("a frame grid needs at least one frame"));
        }
        Ok(FrameGrid {
            fps,
            dt: 1.0 / fps,
            num_frames,
        })
    }

    /// Smallest grid at `fps` whose frames cover `[0, seconds)`, at least one frame.
    pub fn covering(fps: f64, seconds: f64) -> Result<Self> {
        if !(seconds.is_finite() && seconds >= 0.0) {
            return Err(Error::contract(format!("invalid duration {seconds}")));
        }
        let frames = (seconds * fps).ceil();
        FrameGrid::new(fps, (frames as usize).max(1))
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    /// Frame length in seconds.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    pub fn duration_sec(&self) -> f64 {
        self.num_frames as f64 * self.dt
    }

    pub fn with_frames(&self, num_frames: usize) -> Result<Self> {
        FrameGrid::new(self.fps, num_frames)
    }
}

/// Binary T×K piano roll, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMatrix {
    cells: Vec<u8>,
    grid: FrameGrid,
    num_labels: usize,
}

impl LabelMatrix {
    pub fn zeros(grid: FrameGrid, num_labels: usize) -> Self {
        LabelMatrix {
            cells: vec![0; grid.num_frames() * num_labels],
            grid,
            num_labels,
        }
    }

    /// Builds a matrix from rows of 0/1 values; row count must equal the grid's frame count.
    pub fn from_rows<R: AsRef<[u8]>>(
        grid: FrameGrid,
        num_labels: usize,
        rows: &[R],
    ) -> Result<Self> {
        if rows.len() != grid.num_frames() {
            return Err(Error::contract(format!(
                "{} rows for a grid of {} frames",
                rows.len(),
                grid.num_frames()
            )));
        }
        let mut cells = Vec::with_capacity(rows.len() * num_labels);
        for (t, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != num_labels {
                return Err(Error::contract(format!(
                    "row {t} has {} columns, expected {num_labels}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|&&v| v > 1) {
                return Err(Error::contract(format!(
                    "row {t} holds non-binary value {v}"
                )));
            }
            cells.extend_from_slice(row);
        }
        Ok(LabelMatrix {
            cells,
            grid,
            num_labels,
        })
    }

    pub fn grid(&self) -> &FrameGrid {
        &self.grid
    }

    pub fn num_frames(&self) -> usize {
        self.grid.num_frames()
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn get(&self, t: usize, k: usize) -> bool {
        self.cells[t * self.num_labels + k] != 0
    }

    pub fn set(&mut self, t: usize, k: usize, on: bool) {
        self.cells[t * self.num_labels + k] = on as u8;
    }

    pub fn row(&self, t: usize) -> &[u8] {
        &self.cells[t * self.num_labels..(t + 1) * self.num_labels]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        // chunks_exact panics on zero; a K=0 matrix has empty rows.
        let k = self.num_labels.max(1);
        let n = self.num_frames();
        (0..n).map(move |t| {
            if self.num_labels == 0 {
                &self.cells[0..0]
            } else {
                &self.cells[t * k..(t + 1) * k]
            }
        })
    }

    /// Cells in row-major order, each 0 or 1.
    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn count_active(&self) -> usize {
        self.cells.iter().filter(|&&c| c != 0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Keeps the first `frames` rows.
    pub(crate) fn take_rows(&self, frames: usize) -> Result<Self> {
        let frames = frames.min(self.num_frames());
        Ok(LabelMatrix {
            cells: self.cells[..frames * self.num_labels].to_vec(),
            grid: self.grid.with_frames(frames)?,
            num_labels: self.num_labels,
        })
    }
}
