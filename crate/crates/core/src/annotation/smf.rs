//! A small Standard MIDI File writer, used to build parser fixtures.

/// Events the writer can emit. Deltas are given to [`SmfTrack::push`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SmfEvent {
    NoteOn {
        channel: u8,
        pitch: u8,
        velocity: u8,
    },
    /// Status 0x8n with release velocity 64.
    NoteOff {
        channel: u8,
        pitch: u8,
    },
    /// Note-off spelled as a note-on with velocity 0.
    NoteOffZeroVelocity {
        channel: u8,
        pitch: u8,
    },
    ControlChange {
        channel: u8,
        controller: u8,
        value: u8,
    },
    ProgramChange {
        channel: u8,
        program: u8,
    },
    /// Microseconds per quarter note.
    Tempo(u32),
    Text(String),
    SysEx(Vec<u8>),
}

#[derive(Debug, Clone, Default)]
pub struct SmfTrack {
    events: Vec<(u32, SmfEvent)>,
}

impl SmfTrack {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, delta: u32, event: SmfEvent) -> &mut Self {
        self.events.push((delta, event));
        self
    }
}

#[derive(Debug, Clone)]
pub struct SmfWriter {
    ppqn: u16,
    running_status: bool,
    tracks: Vec<SmfTrack>,
}

impl SmfWriter {
    pub fn new(ppqn: u16) -> Self {
        SmfWriter {
            ppqn,
            running_status: false,
            tracks: Vec::new(),
        }
    }

    /// Omit repeated channel status bytes.
    pub fn running_status(mut self, on: bool) -> Self {
        self.running_status = on;
        self
    }

    pub fn track(mut self, track: SmfTrack) -> Self {
        self.tracks.push(track);
        self
    }

    /// Format 0 for a single track, format 1 otherwise.
    pub fn to_bytes(&self) -> Vec<u8> {
        let format: u16 = if self.tracks.len() == 1 { 0 } else { 1 };
        let mut out = Vec::new();
        out.extend_from_slice(b"MThd");
        out.extend_from_slice(&6u32.to_be_bytes());
        out.extend_from_slice(&format.to_be_bytes());
        out.extend_from_slice(&(self.tracks.len() as u16).to_be_bytes());
        out.extend_from_slice(&self.ppqn.to_be_bytes());
        for track in &self.tracks {
            let body = self.encode_track(track);
            out.extend_from_slice(b"MTrk");
            out.extend_from_slice(&(body.len() as u32).to_be_bytes());
            out.extend_from_slice(&body);
        }
        out
    }

    fn encode_track(&self, track: &SmfTrack) -> Vec<u8> {
        let mut body = Vec::new();
        let mut last_status: Option<u8> = None;
        for (delta, event) in &track.events {
            write_vlq(&mut body, *delta);
            let (status, data): (u8, Vec<u8>) = match event {
                SmfEvent::NoteOn {
                    channel,
                    pitch,
                    velocity,
                } => (0x90 | channel, vec![*pitch, *velocity]),
                SmfEvent::NoteOff { channel, pitch } => (0x80 | channel, vec![*pitch, 64]),
                SmfEvent::NoteOffZeroVelocity { channel, pitch } => {
                    (0x90 | channel, vec![*pitch, 0])
                }
                SmfEvent::ControlChange {
                    channel,
                    controller,
                    value,
                } => (0xb0 | channel, vec![*controller, *value]),
                SmfEvent::ProgramChange { channel, program } => (0xc0 | channel, vec![*program]),
                SmfEvent::Tempo(us) => {
                    let b = us.to_be_bytes();
                    body.extend_from_slice(&[0xff, 0x51, 0x03, b[1], b[2], b[3]]);
                    last_status = None;
                    continue;
                }
                SmfEvent::Text(text) => {
                    body.extend_from_slice(&[0xff, 0x01]);
                    write_vlq(&mut body, text.len() as u32);
                    body.extend_from_slice(text.as_bytes());
                    last_status = None;
                    continue;
                }
                SmfEvent::SysEx(payload) => {
                    body.push(0xf0);
                    write_vlq(&mut body, payload.len() as u32);
                    body.extend_from_slice(payload);
                    last_status = None;
                    continue;
                }
            };
            if !(self.running_status && last_status == Some(status)) {
                body.push(status);
            }
            last_status = Some(status);
            body.extend_from_slice(&data);
        }
        body.extend_from_slice(&[0x00, 0xff, 0x2f, 0x00]);
        body
    }
}

fn write_vlq(out: &mut Vec<u8>, mut value: u32) {
    let mut buf = [0u8; 5];
    let mut i = buf.len() - 1;
    buf[i] = (value & 0x7f) as u8;
    value >>= 7;
    while value > 0 {
        i -= 1;
        buf[i] = 0x80 | (value & 0x7f) as u8;
        value >>= 7;
    }
    out.extend_from_slice(&buf[i..]);
}
