use labelnoise::annotation::{to_tsv, SmfEvent, SmfTrack, SmfWriter};
use labelnoise::{parse_midi, parse_tsv, validate, Annotation, NoteEvent};
use proptest::prelude::*;

/// Times with at most six fractional digits, as the TSV format promises to keep exactly.
fn micro_annotation() -> impl Strategy<Value = Annotation> {
    prop::collection::vec((0..60_000_000u64, 1..5_000_000u64, 0..88usize), 1..60).prop_map(|raw| {
        let events = raw
            .into_iter()
            .map(|(s, d, k)| NoteEvent::new(s as f64 / 1e6, (s + d) as f64 / 1e6, k))
            .collect();
        Annotation::from_events(events, 88).unwrap()
    })
}

/// `(on_tick, off_tick, pitch)` notes at a fixed tempo, written as one track.
fn notes() -> impl Strategy<Value = Vec<(u32, u32, u8)>> {
    prop::collection::vec((0..20u8, 0..4000u32, 1..2000u32), 1..30).prop_map(|raw| {
        // One note per pitch avoids ambiguous overlaps of the same key.
        let mut seen = std::collections::BTreeMap::new();
        for (p, on, d) in raw {
            seen.entry(21 + p).or_insert((on, on + d));
        }
        seen.into_iter()
            .map(|(p, (on, off))| (on, off, p))
            .collect()
    })
}

fn write_track(notes: &[(u32, u32, u8)], zero_velocity_offs: bool) -> SmfTrack {
    let mut timeline: Vec<(u32, u8, bool)> = Vec::new();
    for &(on, off, p) in notes {
        timeline.push((on, p, true));
        timeline.push((off, p, false));
    }
    timeline.sort_by_key(|&(t, p, is_on)| (t, is_on, p));
    let mut track = SmfTrack::new();
    track.push(0, SmfEvent::Tempo(500_000));
    let mut now = 0;
    for (t, pitch, is_on) in timeline {
        let ev = match (is_on, zero_velocity_offs) {
            (true, _) => SmfEvent::NoteOn {
                channel: 0,
                pitch,
                velocity: 90,
            },
            (false, true) => SmfEvent::NoteOffZeroVelocity { channel: 0, pitch },
            (false, false) => SmfEvent::NoteOff { channel: 0, pitch },
        };
        track.push(t - now, ev);
        now = t;
    }
    track
}

proptest! {
    #[test]
    fn tsv_round_trip_is_exact(a in micro_annotation()) {
        let text = to_tsv(&a);
        let back = parse_tsv(&text).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn midi_writer_round_trip(notes in notes(), running in any::<bool>(), zero_vel in any::<bool>()) {
        let bytes = SmfWriter::new(480)
            .running_status(running)
            .track(write_track(&notes, zero_vel))
            .to_bytes();
        let a = parse_midi(&bytes).unwrap();
        prop_assert!(validate(&a).is_ok());
        prop_assert_eq!(a.len(), notes.len());
        let sec = |tick: u32| tick as f64 / 480.0 * 0.5;
        let mut expected: Vec<NoteEvent> = notes
            .iter()
            .map(|&(on, off, p)| NoteEvent::new(sec(on), sec(off), (p - 21) as usize))
            .collect();
        expected.sort_by(|x, y| x.sort_cmp(y));
        for (got, want) in a.events().iter().zip(&expected) {
            prop_assert_eq!(got.label, want.label);
            prop_assert!((got.onset_sec - want.onset_sec).abs() <= 1e-9);
            prop_assert!((got.offset_sec - want.offset_sec).abs() <= 1e-9);
        }
    }

    #[test]
    fn tsv_parser_output_validates(rows in prop::collection::vec((0.0..100.0f64, 0.001..10.0f64, 21..=108u8), 0..50)) {
        let mut text = String::from("OnsetTime\tOffsetTime\tMidiPitch\n");
        for (s, d, p) in rows {
            text.push_str(&format!("{s}\t{}\t{p}\n", s + d));
        }
        let a = parse_tsv(&text).unwrap();
        prop_assert!(validate(&a).is_ok());
    }

    #[test]
    fn midi_parser_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let mut fixture = b"MThd\x00\x00\x00\x06\x00\x00\x00\x01\x01\xe0MTrk".to_vec();
        fixture.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
        fixture.extend_from_slice(&bytes);
        if let Ok(a) = parse_midi(&fixture) {
            prop_assert!(validate(&a).is_ok());
        }
    }
}

#[test]
fn maps_dataset_style_tsv() {
    let text = "OnsetTime\tOffsetTime\tMidiPitch\n0.500000\t1.250000\t60\n0.500000\t0.750000\t64\n";
    let a = parse_tsv(text).unwrap();
    assert_eq!(a.len(), 2);
    assert_eq!(a.events()[0], NoteEvent::new(0.5, 1.25, 39));
    assert_eq!(a.events()[1], NoteEvent::new(0.5, 0.75, 43));
    assert_eq!(a.duration_sec(), 1.25);
}

#[test]
fn tsv_errors_carry_line_numbers() {
    let err =
        parse_tsv("OnsetTime\tOffsetTime\tMidiPitch\n0.1\t0.2\t60\n0.3\tx\t61\n").unwrap_err();
    assert!(err.to_string().contains("line 3"), "{err}");
}
