//! MAPS-style ground-truth text: a `OnsetTime OffsetTime MidiPitch` header
//! followed by one note per line.

use std::fmt::Write;

use super::{Annotation, NoteEvent, PitchMap};
use crate::error::{Error, Location, Result};

const COLUMNS: [&str; 3] = ["OnsetTime", "OffsetTime", "MidiPitch"];

pub fn parse_tsv(text: &str) -> Result<Annotation> {
    parse_tsv_with(text, PitchMap::PIANO)
}

pub fn parse_tsv_with(text: &str, pitches: PitchMap) -> Result<Annotation> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::format(Some(Location::Line(1)), "missing header line"))?;
    let names: Vec<&str> = header.split_whitespace().collect();
    let mut index = [0usize; 3];
    for (slot, col) in index.iter_mut().zip(COLUMNS) {
        *slot = names.iter().position(|n| *n == col).ok_or_else(|| {
            Error::format(
                Some(Location::Line(1)),
                format!("header {header:?} lacks column {col}"),
            )
        })?;
    }
    let width = names.len();

    let mut events = Vec::new();
    for (i, line) in lines {
        let at = Some(Location::Line(i + 1));
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != width {
            return Err(Error::format(
                at,
                format!("expected {width} fields, found {}", fields.len()),
            ));
        }
        let onset = parse_time(fields[index[0]], &at)?;
        let offset = parse_time(fields[index[1]], &at)?;
        let pitch = parse_pitch(fields[index[2]], &at)?;

        let label = pitches.label(pitch).ok_or_else(|| {
            Error::range(
                at.clone(),
                format!(
                    "pitch {pitch} outside [{}, {}]",
                    pitches.lowest_pitch,
                    pitches.highest_pitch()
                ),
            )
        })?;
        if onset < 0.0 {
            return Err(Error::validation(at, format!("negative onset {onset}")));
        }
        if offset <= onset {
            return Err(Error::validation(
                at,
                format!("offset {offset} is not after onset {onset}"),
            ));
        }
        events.push(NoteEvent::new(onset, offset, label));
    }

    Annotation::from_events(events, pitches.num_labels)
}

fn parse_time(field: &str, at: &Option<Location>) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::format(at.clone(), format!("invalid time {field:?}"))),
    }
}

fn parse_pitch(field: &str, at: &Option<Location>) -> Result<i64> {
    if let Ok(p) = field.parse::<i64>() {
        return Ok(p);
    }
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() && v.fract() == 0.0 && v.abs() < 1e9 => Ok(v as i64),
        _ => Err(Error::format(
            at.clone(),
            format!("invalid pitch {field:?}"),
        )),
    }
}

/// Serializes with the piano pitch map. Times use the shortest representation
/// that parses back to the same `f64`.
pub fn to_tsv(a: &Annotation) -> String {
    to_tsv_with(a, PitchMap::PIANO)
}

pub fn to_tsv_with(a: &Annotation, pitches: PitchMap) -> String {
    let mut out = String::from("OnsetTime\tOffsetTime\tMidiPitch\n");
    for e in a.events() {
        let _ = writeln!(
            out,
            "{}\t{}\t{}",
            e.onset_sec,
            e.offset_sec,
            pitches.pitch(e.label)
        );
    }
    out
}
