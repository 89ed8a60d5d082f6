//! Labeling functions: conversion of continuous-time intervals into frame
//! indices, and rasterization of whole annotations into label matrices.
//!
//! | kind | start index            | end index                               |
//! |------|------------------------|-----------------------------------------|
//! | A    | round(s / dt)          | round(e / dt)                           |
//! | B    | ceil(s / dt)           | ceil(e / dt)                            |
//! | C    | floor(s / dt)          | floor(e / dt)                           |
//! | D    | floor(s / dt)          | floor(s / dt) + floor((e - s) / dt)     |
//! | E    | A + R                  | A + R        (one joint draw R)         |
//! | F    | A + R_s                | A + R_e      (two independent draws)    |
//!
//! Draws are uniform over {-1, 0, 1}. Rounding is half-up, `floor(x + 0.5)`.
//! A note is active on frames `t_s <= t < t_e`.

mod matrix;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annotation::Annotation;
use crate::error::{Error, Result};
use crate::metrics::{framewise_counts, prf, EvalResult};

pub use matrix::{FrameGrid, LabelMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelingFunction {
    /// Round both boundaries; the reference.
    A,
    /// Ceil both boundaries.
    B,
    /// Floor both boundaries.
    C,
    /// Floor the onset, then add the floored duration.
    D,
    /// Reference shifted jointly by one random frame offset.
    E,
    /// Reference with onset and offset shifted independently.
    F,
}

impl LabelingFunction {
    pub const ALL: [LabelingFunction; 6] = [
        LabelingFunction::A,
        LabelingFunction::B,
        LabelingFunction::C,
        LabelingFunction::D,
        LabelingFunction::E,
        LabelingFunction::F,
    ];

    pub fn is_random(self) -> bool {
        matches!(self, LabelingFunction::E | LabelingFunction::F)
    }

    fn index(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for LabelingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = ['a', 'b', 'c', 'd', 'e', 'f'][*self as usize];
        write!(f, "{c}")
    }
}

impl FromStr for LabelingFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(LabelingFunction::A),
            "b" => Ok(LabelingFunction::B),
            "c" => Ok(LabelingFunction::C),
            "d" => Ok(LabelingFunction::D),
            "e" => Ok(LabelingFunction::E),
            "f" => Ok(LabelingFunction::F),
            other => Err(Error::contract(format!(
                "unknown labeling function {other:?}, expected one of a-f"
            ))),
        }
    }
}

/// Source of the random frame shifts used by kinds E and F.
pub trait ShiftSource {
    /// Returns -1, 0 or 1.
    fn draw(&mut self) -> i64;
}

/// Uniform shifts from a random generator.
#[derive(Debug, Clone)]
pub struct RandomShifts<R>(pub R);

impl<R: Rng> ShiftSource for RandomShifts<R> {
    fn draw(&mut self) -> i64 {
        self.0.random_range(-1..=1)
    }
}

/// Replays a fixed sequence of shifts, cycling when exhausted.
#[derive(Debug, Clone)]
pub struct ScriptedShifts {
    script: Vec<i64>,
    next: usize,
}

impl ScriptedShifts {
    pub fn new(script: Vec<i64>) -> Self {
        assert!(!script.is_empty(), "empty shift script");
        assert!(
            script.iter().all(|s| (-1..=1).contains(s)),
            "shifts must lie in -1..=1"
        );
        ScriptedShifts { script, next: 0 }
    }

    pub fn constant(shift: i64) -> Self {
        ScriptedShifts::new(vec![shift])
    }
}

impl ShiftSource for ScriptedShifts {
    fn draw(&mut self) -> i64 {
        let s = self.script[self.next % self.script.len()];
        self.next += 1;
        s
    }
}

/// The shift stream a rasterization with `seed` and `kind` consumes.
pub fn shift_stream(seed: u64, kind: LabelingFunction) -> RandomShifts<ChaCha8Rng> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(kind.index());
    RandomShifts(rng)
}

/// One interval after quantization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizedInterval {
    pub t_s: usize,
    pub t_e: usize,
    /// Onset rounding error in seconds, before shifting and clamping.
    pub eps_s: f64,
    /// Offset rounding error in seconds, before shifting and clamping.
    pub eps_e: f64,
    /// An index went negative and was clamped to 0.
    pub clamped: bool,
    /// `t_e <= t_s`: the interval covers no frame.
    pub degenerate: bool,
}

fn round_half_up(x: f64) -> f64 {
    (x + 0.5).floor()
}

pub fn quantize_interval(
    kind: LabelingFunction,
    onset_sec: f64,
    offset_sec: f64,
    dt: f64,
    shifts: Option<&mut dyn ShiftSource>,
) -> Result<QuantizedInterval> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::contract(format!(
            "frame length must be positive, got {dt}"
        )));
    }
    if !(onset_sec.is_finite() && offset_sec.is_finite() && onset_sec >= 0.0) {
        return Err(Error::contract(format!(
            "invalid interval [{onset_sec}, {offset_sec})"
        )));
    }
    if offset_sec <= onset_sec {
        return Err(Error::contract(format!(
            "offset {offset_sec} is not after onset {onset_sec}"
        )));
    }
    if kind.is_random() != shifts.is_some() {
        return Err(Error::contract(if kind.is_random() {
            format!("labeling function {kind} needs a shift source")
        } else {
            format!("labeling function {kind} is deterministic and takes no shift source")
        }));
    }

    let s = onset_sec / dt;
    let e = offset_sec / dt;
    let (start, end) = match kind {
        LabelingFunction::A | LabelingFunction::E | LabelingFunction::F => {
            (round_half_up(s), round_half_up(e))
        }
        LabelingFunction::B => (s.ceil(), e.ceil()),
        LabelingFunction::C => (s.floor(), e.floor()),
        LabelingFunction::D => {
            let start = s.floor();
            (start, start + ((offset_sec - onset_sec) / dt).floor())
        }
    };
    let eps_s = start * dt - onset_sec;
    let eps_e = end * dt - offset_sec;

    let (mut start, mut end) = (start as i64, end as i64);
    if let Some(src) = shifts {
        if kind == LabelingFunction::E {
            let r = src.draw();
            start += r;
            end += r;
        } else {
            start += src.draw();
            end += src.draw();
        }
    }

    let clamped = start < 0 || end < 0;
    let (t_s, t_e) = (start.max(0) as usize, end.max(0) as usize);
    Ok(QuantizedInterval {
        t_s,
        t_e,
        eps_s,
        eps_e,
        clamped,
        degenerate: t_e <= t_s,
    })
}

/// A label matrix with the per-event intervals that produced it, in annotation order.
#[derive(Debug, Clone, PartialEq)]
pub struct Rasterized {
    pub matrix: LabelMatrix,
    pub intervals: Vec<QuantizedInterval>,
}

/// Rasterizes with the shift stream derived from `seed`. The seed is ignored for kinds A-D.
pub fn rasterize(
    a: &Annotation,
    grid: FrameGrid,
    kind: LabelingFunction,
    seed: u64,
) -> Result<LabelMatrix> {
    rasterize_detailed(a, grid, kind, seed).map(|r| r.matrix)
}

pub fn rasterize_detailed(
    a: &Annotation,
    grid: FrameGrid,
    kind: LabelingFunction,
    seed: u64,
) -> Result<Rasterized> {
    if kind.is_random() {
        let mut stream = shift_stream(seed, kind);
        rasterize_with(a, grid, kind, Some(&mut stream))
    } else {
        rasterize_with(a, grid, kind, None)
    }
}

/// Rasterizes drawing shifts from an explicit source (required for kinds E and F).
pub fn rasterize_with(
    a: &Annotation,
    grid: FrameGrid,
    kind: LabelingFunction,
    mut shifts: Option<&mut dyn ShiftSource>,
) -> Result<Rasterized> {
    let k = a.num_labels();
    let t_max = grid.num_frames();
    let mut matrix = LabelMatrix::zeros(grid, k);
    let mut intervals = Vec::with_capacity(a.len());
    for (i, e) in a.events().iter().enumerate() {
        if e.label >= k {
            return Err(Error::contract(format!(
                "event {i} has label {} but the matrix has {k} labels",
                e.label
            )));
        }
        let q = quantize_interval(
            kind,
            e.onset_sec,
            e.offset_sec,
            grid.dt(),
            shifts.as_mut().map(|s| &mut **s as &mut dyn ShiftSource),
        )?;
        for t in q.t_s.min(t_max)..q.t_e.min(t_max) {
            matrix.set(t, e.label, true);
        }
        intervals.push(q);
    }
    Ok(Rasterized { matrix, intervals })
}

/// Scores labels produced by `kind` against the reference kind A on the same grid.
pub fn noise_ceiling(
    a: &Annotation,
    grid: FrameGrid,
    kind: LabelingFunction,
    seed: u64,
) -> Result<EvalResult<f64>> {
    let labels = rasterize(a, grid, kind, seed)?;
    let reference = rasterize(a, grid, LabelingFunction::A, 0)?;
    Ok(prf(framewise_counts(&labels, &reference)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::NoteEvent;
    use LabelingFunction::*;

    fn q(kind: LabelingFunction, s: f64, e: f64, dt: f64) -> QuantizedInterval {
        quantize_interval(kind, s, e, dt, None).unwrap()
    }

    #[test]
    fn reference_on_exact_grid_points() {
        let r = q(A, 0.10, 0.25, 0.01);
        assert_eq!((r.t_s, r.t_e), (10, 25));
        assert!(r.eps_s.abs() < 1e-15 && r.eps_e.abs() < 1e-15);
        assert!(!r.clamped && !r.degenerate);
    }

    #[test]
    fn ceil_and_floor_at_31_25_fps() {
        let r = q(B, 0.035, 0.100, 0.032);
        assert_eq!((r.t_s, r.t_e), (2, 4));
        let r = q(C, 0.035, 0.100, 0.032);
        assert_eq!((r.t_s, r.t_e), (1, 3));
    }

    #[test]
    fn floored_duration_can_vanish() {
        let r = q(D, 0.05, 0.07, 0.032);
        assert_eq!((r.t_s, r.t_e), (1, 1));
        assert!(r.degenerate);
    }

    #[test]
    fn joint_shift_preserves_duration() {
        let mut up = ScriptedShifts::constant(1);
        let r = quantize_interval(E, 0.10, 0.25, 0.01, Some(&mut up)).unwrap();
        assert_eq!((r.t_s, r.t_e), (11, 26));
        let a = q(A, 0.10, 0.25, 0.01);
        assert_eq!(r.t_e - r.t_s, a.t_e - a.t_s);
        assert_eq!((r.eps_s, r.eps_e), (a.eps_s, a.eps_e));
    }

    #[test]
    fn independent_shifts_consume_two_draws_in_order() {
        let mut script = ScriptedShifts::new(vec![-1, 1]);
        let r = quantize_interval(F, 0.10, 0.25, 0.01, Some(&mut script)).unwrap();
        assert_eq!((r.t_s, r.t_e), (9, 26));
        assert_eq!(script.next, 2);
    }

    #[test]
    fn negative_shift_clamps_to_zero() {
        let mut down = ScriptedShifts::constant(-1);
        let r = quantize_interval(E, 0.001, 0.004, 0.01, Some(&mut down)).unwrap();
        assert!(r.clamped);
        assert_eq!((r.t_s, r.t_e), (0, 0));
        assert!(r.degenerate);
    }

    #[test]
    fn contract_errors() {
        assert!(matches!(
            quantize_interval(E, 0.1, 0.2, 0.01, None),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            quantize_interval(F, 0.1, 0.2, 0.01, None),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            quantize_interval(A, 0.2, 0.2, 0.01, None),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            quantize_interval(A, 0.3, 0.2, 0.01, None),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            quantize_interval(A, 0.1, 0.2, 0.0, None),
            Err(Error::Contract(_))
        ));
        let mut s = ScriptedShifts::constant(0);
        assert!(matches!(
            quantize_interval(A, 0.1, 0.2, 0.01, Some(&mut s)),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn round_is_half_up() {
        assert_eq!(q(A, 0.5, 1.5, 1.0).t_s, 1);
        assert_eq!(q(A, 0.5, 1.5, 1.0).t_e, 2);
        assert_eq!(q(A, 0.0, 2.5, 1.0).t_e, 3);
    }

    #[test]
    fn labeling_function_names() {
        for k in LabelingFunction::ALL {
            assert_eq!(k.to_string().parse::<LabelingFunction>().unwrap(), k);
        }
        assert_eq!("F".parse::<LabelingFunction>().unwrap(), F);
        assert!("g".parse::<LabelingFunction>().is_err());
        assert_eq!(serde_json::to_string(&D).unwrap(), "\"d\"");
    }

    fn one_note() -> Annotation {
        Annotation::from_events(vec![NoteEvent::new(0.10, 0.25, 3)], 12).unwrap()
    }

    #[test]
    fn rasterize_empty_annotation() {
        let grid = FrameGrid::new(100.0, 30).unwrap();
        let m = rasterize(&Annotation::empty(12), grid, A, 0).unwrap();
        assert_eq!(m, LabelMatrix::zeros(grid, 12));
    }

    #[test]
    fn rasterize_single_note_half_open() {
        let grid = FrameGrid::new(100.0, 30).unwrap();
        let m = rasterize(&one_note(), grid, A, 0).unwrap();
        for t in 0..30 {
            for k in 0..12 {
                assert_eq!(
                    m.get(t, k),
                    k == 3 && (10..25).contains(&t),
                    "cell ({t}, {k})"
                );
            }
        }
    }

    #[test]
    fn rasterize_clips_to_grid_and_ors_overlaps() {
        let a = Annotation::from_events(
            vec![
                NoteEvent::new(0.0, 0.5, 0),
                NoteEvent::new(0.02, 0.04, 0),
                NoteEvent::new(0.05, 0.5, 1),
            ],
            2,
        )
        .unwrap();
        let grid = FrameGrid::new(100.0, 10).unwrap();
        let m = rasterize(&a, grid, A, 0).unwrap();
        assert_eq!(m.count_active(), 10 + 5);
    }

    #[test]
    fn rasterize_rejects_labels_beyond_k() {
        let a = Annotation::from_raw(vec![NoteEvent::new(0.0, 0.1, 5)], 4, 1.0);
        let grid = FrameGrid::new(100.0, 10).unwrap();
        assert!(matches!(rasterize(&a, grid, A, 0), Err(Error::Contract(_))));
    }

    #[test]
    fn independent_shift_outcomes_only_move_boundaries() {
        // Enumerate all nine (R_s, R_e) pairs for the single note.
        let grid = FrameGrid::new(100.0, 30).unwrap();
        for rs in -1..=1 {
            for re in -1..=1 {
                let mut src = ScriptedShifts::new(vec![rs, re]);
                let m = rasterize_with(&one_note(), grid, F, Some(&mut src))
                    .unwrap()
                    .matrix;
                let start = (10 + rs) as usize;
                let end = (25 + re) as usize;
                for t in 0..30 {
                    for k in 0..12 {
                        assert_eq!(m.get(t, k), k == 3 && (start..end).contains(&t));
                    }
                }
            }
        }
        let grid = FrameGrid::new(100.0, 30).unwrap();
        let seen: std::collections::BTreeSet<Vec<u8>> = (0..64)
            .map(|seed| {
                rasterize(&one_note(), grid, F, seed)
                    .unwrap()
                    .cells()
                    .to_vec()
            })
            .collect();
        assert_eq!(seen.len(), 9);
    }

    #[test]
    fn rasterize_is_deterministic_and_seed_ignored_for_deterministic_kinds() {
        let grid = FrameGrid::new(31.25, 20).unwrap();
        let a = one_note();
        for kind in LabelingFunction::ALL {
            assert_eq!(
                rasterize(&a, grid, kind, 7).unwrap(),
                rasterize(&a, grid, kind, 7).unwrap()
            );
        }
        for kind in [A, B, C, D] {
            assert_eq!(
                rasterize(&a, grid, kind, 1).unwrap(),
                rasterize(&a, grid, kind, 2).unwrap()
            );
        }
    }

    #[test]
    fn noise_ceiling_of_reference_is_one() {
        let grid = FrameGrid::new(100.0, 40).unwrap();
        let r = noise_ceiling(&one_note(), grid, A, 0).unwrap();
        assert_eq!((r.precision, r.recall, r.fmeasure), (1.0, 1.0, 1.0));
    }

    #[test]
    fn noise_ceiling_of_zero_draw_joint_shift_is_one() {
        let grid = FrameGrid::new(100.0, 40).unwrap();
        let seed = (0..100u64)
            .find(|&s| shift_stream(s, E).draw() == 0)
            .expect("some seed draws 0 first");
        let r = noise_ceiling(&one_note(), grid, E, seed).unwrap();
        assert_eq!(r.fmeasure, 1.0);
    }

    #[test]
    fn floor_on_round_up_side_loses_f_measure() {
        // Every boundary sits at .7 of a frame, where rounding goes up and flooring goes down.
        let a = Annotation::from_events(
            vec![
                NoteEvent::new(0.017, 0.107, 0),
                NoteEvent::new(0.207, 0.257, 1),
                NoteEvent::new(0.307, 0.397, 2),
            ],
            3,
        )
        .unwrap();
        let grid = FrameGrid::new(100.0, 45).unwrap();
        let r = noise_ceiling(&a, grid, C, 0).unwrap();
        // Brute force: reference covers 2..11, 21..26, 31..40; floor covers 1..10, 20..25, 30..39.
        // 23 reference cells, 23 predicted, 20 shared.
        assert_eq!((r.counts.tp, r.counts.fp, r.counts.fn_), (20, 3, 3));
        assert!(r.fmeasure < 1.0);
    }
}
