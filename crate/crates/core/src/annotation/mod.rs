//! High-resolution interval annotations and their parsers.
//!
//! An [`Annotation`] is a list of note intervals in continuous time (seconds),
//! each tagged with a label index in `[0, K)`. Both parsers map MIDI pitches
//! onto labels through a [`PitchMap`]; the default is the 88-key piano range
//! starting at A0 (pitch 21).

mod midi;
mod smf;
mod tsv;

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use midi::{parse_midi, parse_midi_with, read_vlq};
pub use smf::{SmfEvent, SmfTrack, SmfWriter};
pub use tsv::{parse_tsv, parse_tsv_with, to_tsv};

/// One labeled interval `[onset_sec, offset_sec)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoteEvent {
    pub onset_sec: f64,
    pub offset_sec: f64,
    pub label: usize,
}

impl NoteEvent {
    pub fn new(onset_sec: f64, offset_sec: f64, label: usize) -> Self {
        NoteEvent {
            onset_sec,
            offset_sec,
            label,
        }
    }

    pub fn duration_sec(&self) -> f64 {
        self.offset_sec - self.onset_sec
    }

    /// Annotation order: onset, then label, then offset.
    pub fn sort_cmp(&self, other: &Self) -> Ordering {
        self.onset_sec
            .total_cmp(&other.onset_sec)
            .then(self.label.cmp(&other.label))
            .then(self.offset_sec.total_cmp(&other.offset_sec))
    }
}

/// Maps MIDI pitches onto label indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PitchMap {
    /// Pitch that becomes label 0.
    pub lowest_pitch: u8,
    pub num_labels: usize,
}

impl PitchMap {
    /// A0 (21) through C8 (108).
    pub const PIANO: PitchMap = PitchMap {
        lowest_pitch: 21,
        num_labels: 88,
    };

    pub fn highest_pitch(&self) -> i64 {
        self.lowest_pitch as i64 + self.num_labels as i64 - 1
    }

    pub fn label(&self, pitch: i64) -> Option<usize> {
        if pitch < self.lowest_pitch as i64 || pitch > self.highest_pitch() {
            None
        } else {
            Some((pitch - self.lowest_pitch as i64) as usize)
        }
    }

    pub fn pitch(&self, label: usize) -> i64 {
        self.lowest_pitch as i64 + label as i64
    }
}

impl Default for PitchMap {
    fn default() -> Self {
        PitchMap::PIANO
    }
}

/// A complete high-resolution annotation of one piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    events: Vec<NoteEvent>,
    num_labels: usize,
    duration_sec: f64,
}

impl Annotation {
    /// Sorts `events` into annotation order and checks every invariant.
    pub fn new(mut events: Vec<NoteEvent>, num_labels: usize, duration_sec: f64) -> Result<Self> {
        events.sort_by(NoteEvent::sort_cmp);
        let a = Annotation {
            events,
            num_labels,
            duration_sec,
        };
        let report = validate(&a);
        match report.violations.first() {
            None => Ok(a),
            Some(v) => Err(Error::validation(None, v.to_string())),
        }
    }

    /// Like [`Annotation::new`] with the duration set to the latest offset.
    pub fn from_events(events: Vec<NoteEvent>, num_labels: usize) -> Result<Self> {
        let duration = events.iter().map(|e| e.offset_sec).fold(0.0, f64::max);
        Annotation::new(events, num_labels, duration)
    }

    /// Builds an annotation as given, without sorting or checks. Intended for
    /// tooling that inspects malformed data with [`validate`].
    pub fn from_raw(events: Vec<NoteEvent>, num_labels: usize, duration_sec: f64) -> Self {
        Annotation {
            events,
            num_labels,
            duration_sec,
        }
    }

    pub fn empty(num_labels: usize) -> Self {
        Annotation::from_raw(Vec::new(), num_labels, 0.0)
    }

    pub fn events(&self) -> &[NoteEvent] {
        &self.events
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn duration_sec(&self) -> f64 {
        self.duration_sec
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// A single broken invariant, identified by event index.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NotFinite {
        index: usize,
    },
    NegativeOnset {
        index: usize,
        onset_sec: f64,
    },
    NonPositiveDuration {
        index: usize,
        onset_sec: f64,
        offset_sec: f64,
    },
    LabelOutOfRange {
        index: usize,
        label: usize,
        num_labels: usize,
    },
    PastDuration {
        index: usize,
        offset_sec: f64,
        duration_sec: f64,
    },
    Unsorted {
        index: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotFinite { index } => write!(f, "event {index}: non-finite time"),
            Violation::NegativeOnset { index, onset_sec } => {
                write!(f, "event {index}: negative onset {onset_sec}")
            }
            Violation::NonPositiveDuration {
                index,
                onset_sec,
                offset_sec,
            } => write!(
                f,
                "event {index}: offset {offset_sec} is not after onset {onset_sec}"
            ),
            Violation::LabelOutOfRange {
                index,
                label,
                num_labels,
            } => write!(f, "event {index}: label {label} not below K={num_labels}"),
            Violation::PastDuration {
                index,
                offset_sec,
                duration_sec,
            } => write!(
                f,
                "event {index}: offset {offset_sec} exceeds duration {duration_sec}"
            ),
            Violation::Unsorted { index } => {
                write!(
                    f,
                    "event {index}: out of order relative to event {}",
                    index - 1
                )
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every invariant the annotation breaks. An empty report means well-formed.
pub fn validate(a: &Annotation) -> ValidationReport {
    let mut violations = Vec::new();
    for (index, e) in a.events.iter().enumerate() {
        if !e.onset_sec.is_finite() || !e.offset_sec.is_finite() {
            violations.push(Violation::NotFinite { index });
            continue;
        }
        if e.onset_sec < 0.0 {
            violations.push(Violation::NegativeOnset {
                index,
                onset_sec: e.onset_sec,
            });
        }
        if e.offset_sec <= e.onset_sec {
            violations.push(Violation::NonPositiveDuration {
                index,
                onset_sec: e.onset_sec,
                offset_sec: e.offset_sec,
            });
        }
        if e.label >= a.num_labels {
            violations.push(Violation::LabelOutOfRange {
                index,
                label: e.label,
                num_labels: a.num_labels,
            });
        }
        if e.offset_sec > a.duration_sec {
            violations.push(Violation::PastDuration {
                index,
                offset_sec: e.offset_sec,
                duration_sec: a.duration_sec,
            });
        }
        if index > 0 && a.events[index - 1].sort_cmp(e) == Ordering::Greater {
            violations.push(Violation::Unsorted { index });
        }
    }
    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_formed_annotation_has_empty_report() {
        let a = Annotation::from_events(
            vec![NoteEvent::new(0.5, 1.0, 3), NoteEvent::new(0.1, 0.4, 7)],
            88,
        )
        .unwrap();
        assert!(validate(&a).is_ok());
        assert_eq!(a.events()[0].onset_sec, 0.1);
        assert_eq!(a.duration_sec(), 1.0);
    }

    #[test]
    fn label_equal_to_k_is_one_violation() {
        let a = Annotation::from_raw(vec![NoteEvent::new(0.0, 1.0, 12)], 12, 2.0);
        let r = validate(&a);
        assert_eq!(r.violations.len(), 1);
        assert!(matches!(
            r.violations[0],
            Violation::LabelOutOfRange { label: 12, .. }
        ));
    }

    #[test]
    fn offset_past_duration_is_one_violation() {
        let a = Annotation::from_raw(vec![NoteEvent::new(0.0, 3.0, 1)], 12, 2.0);
        let r = validate(&a);
        assert_eq!(r.violations.len(), 1);
        assert!(matches!(r.violations[0], Violation::PastDuration { .. }));
    }

    #[test]
    fn unsorted_and_zero_duration_are_reported() {
        let a = Annotation::from_raw(
            vec![NoteEvent::new(1.0, 1.0, 1), NoteEvent::new(0.5, 0.7, 1)],
            12,
            2.0,
        );
        let r = validate(&a);
        assert_eq!(r.violations.len(), 2);
        assert!(matches!(
            r.violations[0],
            Violation::NonPositiveDuration { index: 0, .. }
        ));
        assert!(matches!(r.violations[1], Violation::Unsorted { index: 1 }));
    }

    #[test]
    fn ties_sort_by_label_then_offset() {
        let a = Annotation::from_events(
            vec![
                NoteEvent::new(0.0, 2.0, 5),
                NoteEvent::new(0.0, 1.0, 5),
                NoteEvent::new(0.0, 1.0, 2),
            ],
            12,
        )
        .unwrap();
        let order: Vec<_> = a.events().iter().map(|e| (e.label, e.offset_sec)).collect();
        assert_eq!(order, vec![(2, 1.0), (5, 1.0), (5, 2.0)]);
    }

    #[test]
    fn constructor_rejects_invalid_events() {
        assert!(matches!(
            Annotation::from_events(vec![NoteEvent::new(0.2, 0.1, 0)], 4),
            Err(Error::Validation { .. })
        ));
    }

    #[test]
    fn piano_pitch_map_covers_21_to_108() {
        let m = PitchMap::PIANO;
        assert_eq!(m.label(21), Some(0));
        assert_eq!(m.label(60), Some(39));
        assert_eq!(m.label(108), Some(87));
        assert_eq!(m.label(20), None);
        assert_eq!(m.label(109), None);
        assert_eq!(m.pitch(87), 108);
    }
}
