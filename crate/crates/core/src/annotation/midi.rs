//! Standard MIDI File ingestion (formats 0 and 1, metrical time division).
//!
//! Note-on/note-off pairs are matched per (channel, pitch) in FIFO order and
//! tick times are converted to seconds through the piecewise-constant tempo
//! map assembled from every Set Tempo event in the file.

use std::collections::{HashMap, VecDeque};

use super::{Annotation, NoteEvent, PitchMap};
use crate::error::{Error, Location, Result};

const DEFAULT_TEMPO: u32 = 500_000;

/// Reads a variable-length quantity (at most four bytes) starting at `*pos`.
pub fn read_vlq(bytes: &[u8], pos: &mut usize) -> Result<u32> {
    let mut value: u32 = 0;
    for _ in 0..4 {
        let b = *bytes.get(*pos).ok_or_else(|| {
            Error::format(
                Some(Location::Offset(*pos)),
                "truncated variable-length quantity",
            )
        })?;
        *pos += 1;
        value = (value << 7) | u32::from(b & 0x7f);
        if b & 0x80 == 0 {
            return Ok(value);
        }
    }
    Err(Error::format(
        Some(Location::Offset(*pos)),
        "variable-length quantity longer than four bytes",
    ))
}

pub fn parse_midi(bytes: &[u8]) -> Result<Annotation> {
    parse_midi_with(bytes, PitchMap::PIANO)
}

pub fn parse_midi_with(bytes: &[u8], pitches: PitchMap) -> Result<Annotation> {
    let header = read_header(bytes)?;
    let mut pos = header.end;

    let mut tracks = Vec::new();
    while pos < bytes.len() {
        if bytes.len() - pos < 8 {
            return Err(Error::format(
                Some(Location::Offset(pos)),
                "truncated chunk header",
            ));
        }
        let id = &bytes[pos..pos + 4];
        let len = u32::from_be_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let start = pos + 8;
        let end = start
            .checked_add(len)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| {
                Error::format(
                    Some(Location::Offset(pos)),
                    "chunk extends past end of file",
                )
            })?;
        if id == b"MTrk" {
            tracks.push(read_track(bytes, start, end)?);
        }
        pos = end;
    }
    if tracks.is_empty() {
        return Err(Error::format(None, "no MTrk chunk"));
    }

    let mut tempo_changes: Vec<(u64, u32)> = tracks
        .iter()
        .flat_map(|t| t.events.iter())
        .filter_map(|(tick, ev)| match ev {
            TrackEvent::Tempo(us) => Some((*tick, *us)),
            _ => None,
        })
        .collect();
    tempo_changes.sort_by_key(|(tick, _)| *tick);
    let tempo = TempoMap::new(header.ppqn, &tempo_changes);

    let mut events = Vec::new();
    let mut end_sec: f64 = 0.0;
    for (track_index, track) in tracks.iter().enumerate() {
        end_sec = end_sec.max(tempo.seconds(track.end_tick));
        let mut open: HashMap<(u8, u8), VecDeque<u64>> = HashMap::new();
        for &(tick, ref ev) in &track.events {
            match *ev {
                TrackEvent::NoteOn { channel, pitch } => {
                    open.entry((channel, pitch)).or_default().push_back(tick);
                }
                TrackEvent::NoteOff { channel, pitch } => {
                    let Some(on_tick) = open.get_mut(&(channel, pitch)).and_then(|q| q.pop_front())
                    else {
                        continue;
                    };
                    let at = Some(Location::Track {
                        track: track_index,
                        tick: on_tick,
                    });
                    let label = pitches.label(i64::from(pitch)).ok_or_else(|| {
                        Error::range(
                            at.clone(),
                            format!(
                                "pitch {pitch} outside [{}, {}]",
                                pitches.lowest_pitch,
                                pitches.highest_pitch()
                            ),
                        )
                    })?;
                    if tick <= on_tick {
                        return Err(Error::validation(
                            at,
                            format!("zero-duration note, pitch {pitch} on channel {channel}"),
                        ));
                    }
                    events.push(NoteEvent::new(
                        tempo.seconds(on_tick),
                        tempo.seconds(tick),
                        label,
                    ));
                }
                TrackEvent::Tempo(_) => {}
            }
        }
        let mut dangling: Vec<u8> = open
            .iter()
            .filter(|(_, q)| !q.is_empty())
            .map(|((_, pitch), _)| *pitch)
            .collect();
        if !dangling.is_empty() {
            dangling.sort_unstable();
            dangling.dedup();
            return Err(Error::validation(
                Some(Location::Track {
                    track: track_index,
                    tick: track.end_tick,
                }),
                format!("note-on without note-off at end of track for pitch(es) {dangling:?}"),
            ));
        }
    }

    let duration = events.iter().map(|e| e.offset_sec).fold(end_sec, f64::max);
    Annotation::new(events, pitches.num_labels, duration)
}

struct Header {
    ppqn: u16,
    end: usize,
}

fn read_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < 14 || &bytes[0..4] != b"MThd" {
        return Err(Error::format(
            Some(Location::Offset(0)),
            "missing MThd header",
        ));
    }
    let len = u32::from_be_bytes(bytes[4..8].try_into().unwrap()) as usize;
    if len < 6 || 8 + len > bytes.len() {
        return Err(Error::format(
            Some(Location::Offset(4)),
            format!("bad header length {len}"),
        ));
    }
    let format = u16::from_be_bytes([bytes[8], bytes[9]]);
    let division = u16::from_be_bytes([bytes[12], bytes[13]]);
    match format {
        0 | 1 => {}
        2 => return Err(Error::Unsupported("MIDI format 2".into())),
        f => {
            return Err(Error::format(
                Some(Location::Offset(8)),
                format!("unknown MIDI format {f}"),
            ))
        }
    }
    if division & 0x8000 != 0 {
        return Err(Error::Unsupported("SMPTE time division".into()));
    }
    if division == 0 {
        return Err(Error::format(
            Some(Location::Offset(12)),
            "zero ticks per quarter note",
        ));
    }
    Ok(Header {
        ppqn: division,
        end: 8 + len,
    })
}

#[derive(Debug)]
enum TrackEvent {
    NoteOn { channel: u8, pitch: u8 },
    NoteOff { channel: u8, pitch: u8 },
    Tempo(u32),
}

struct Track {
    events: Vec<(u64, TrackEvent)>,
    end_tick: u64,
}

fn read_track(bytes: &[u8], start: usize, end: usize) -> Result<Track> {
    let data = &bytes[..end];
    let mut pos = start;
    let mut tick: u64 = 0;
    let mut running: Option<u8> = None;
    let mut events = Vec::new();

    let need = |pos: usize, n: usize| -> Result<()> {
        if pos + n > end {
            Err(Error::format(
                Some(Location::Offset(pos)),
                "event runs past end of track",
            ))
        } else {
            Ok(())
        }
    };

    while pos < end {
        tick += u64::from(read_vlq(data, &mut pos)?);
        need(pos, 1)?;
        let first = data[pos];
        let status = if first & 0x80 != 0 {
            pos += 1;
            first
        } else {
            running.ok_or_else(|| {
                Error::format(
                    Some(Location::Offset(pos)),
                    "data byte without running status",
                )
            })?
        };

        match status {
            0xff => {
                running = None;
                need(pos, 1)?;
                let kind = data[pos];
                pos += 1;
                let len = read_vlq(data, &mut pos)? as usize;
                need(pos, len)?;
                let payload = &data[pos..pos + len];
                pos += len;
                match kind {
                    0x51 => {
                        if len != 3 {
                            return Err(Error::format(
                                Some(Location::Offset(pos - len)),
                                "Set Tempo payload must be three bytes",
                            ));
                        }
                        let us = u32::from_be_bytes([0, payload[0], payload[1], payload[2]]);
                        events.push((tick, TrackEvent::Tempo(us)));
                    }
                    0x2f => break,
                    _ => {}
                }
            }
            0xf0 | 0xf7 => {
                running = None;
                let len = read_vlq(data, &mut pos)? as usize;
                need(pos, len)?;
                pos += len;
            }
            0x80..=0xef => {
                running = Some(status);
                let channel = status & 0x0f;
                let n = match status & 0xf0 {
                    0xc0 | 0xd0 => 1,
                    _ => 2,
                };
                need(pos, n)?;
                let args = &data[pos..pos + n];
                pos += n;
                match status & 0xf0 {
                    0x90 if args[1] > 0 => events.push((
                        tick,
                        TrackEvent::NoteOn {
                            channel,
                            pitch: args[0],
                        },
                    )),
                    0x90 | 0x80 => events.push((
                        tick,
                        TrackEvent::NoteOff {
                            channel,
                            pitch: args[0],
                        },
                    )),
                    _ => {}
                }
            }
            s => {
                return Err(Error::format(
                    Some(Location::Offset(pos - 1)),
                    format!("unexpected status byte {s:#04x} in track"),
                ))
            }
        }
    }

    Ok(Track {
        events,
        end_tick: tick,
    })
}

/// Piecewise-constant tempo: each segment starts at a tick with a known time.
struct TempoMap {
    ppqn: f64,
    /// (start tick, start seconds, microseconds per quarter note)
    segments: Vec<(u64, f64, u32)>,
}

impl TempoMap {
    fn new(ppqn: u16, changes: &[(u64, u32)]) -> Self {
        let ppqn = f64::from(ppqn);
        let mut segments = vec![(0u64, 0.0f64, DEFAULT_TEMPO)];
        for &(tick, us) in changes {
            let &(t0, s0, us0) = segments.last().unwrap();
            let start = s0 + (tick - t0) as f64 * f64::from(us0) / (1e6 * ppqn);
            if tick == t0 {
                segments.pop();
            }
            segments.push((tick, start, us));
        }
        TempoMap { ppqn, segments }
    }

    fn seconds(&self, tick: u64) -> f64 {
        let i = self.segments.partition_point(|s| s.0 <= tick) - 1;
        let (t0, s0, us) = self.segments[i];
        s0 + (tick - t0) as f64 * f64::from(us) / (1e6 * self.ppqn)
    }
}
