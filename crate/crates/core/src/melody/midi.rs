//! Standard MIDI File reading and writing, restricted to what melody
//! extraction needs: note on/off pairs, tempo, and lyric (or text) meta
//! events.
//!
//! Timing uses the first tempo event of the file for the whole file.

use std::collections::{BTreeMap, HashMap, VecDeque};

use super::attributes::NoteTriplet;
use crate::error::{Error, Result};

const DEFAULT_TEMPO_US: u32 = 500_000;

const META_TEXT: u8 = 0x01;
const META_LYRIC: u8 = 0x05;
const META_END_OF_TRACK: u8 = 0x2F;
const META_TEMPO: u8 = 0x51;

/// One melody note carrying a lyric syllable.
#[derive(Debug, Clone, PartialEq)]
pub struct LyricNote {
    /// Lyric event text exactly as stored in the file (lossy UTF-8).
    pub text: String,
    pub midi: u8,
    pub note_on: f64,
    pub note_off: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSong {
    pub bpm: f64,
    /// Notes with an attached lyric, in time order.
    pub notes: Vec<LyricNote>,
    /// False when the file contained no lyric (or usable text) events at all.
    pub has_lyrics: bool,
}

#[derive(Debug, Clone, Copy)]
enum Division {
    TicksPerQuarter(u16),
    /// Frames per second and ticks per frame.
    Smpte(u8, u8),
}

#[derive(Debug, Default)]
struct Track {
    notes: Vec<RawNote>,
    lyrics: Vec<(u64, u8, Vec<u8>)>,
    tempos: Vec<(u64, u32)>,
}

#[derive(Debug, Clone, Copy)]
struct RawNote {
    key: u8,
    on: u64,
    off: u64,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn fail(&self, reason: impl Into<String>) -> Error {
        Error::MidiParse {
            offset: self.pos,
            reason: reason.into(),
        }
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if n > self.remaining() {
            return Err(self.fail(format!("need {n} bytes, {} left", self.remaining())));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn peek(&self) -> Result<u8> {
        self.bytes
            .get(self.pos)
            .copied()
            .ok_or_else(|| self.fail("unexpected end of track"))
    }

    fn u16(&mut self) -> Result<u16> {
        let b = self.take(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn vlq(&mut self) -> Result<u32> {
        let start = self.pos;
        let mut value: u32 = 0;
        for _ in 0..4 {
            let b = self.u8()?;
            value = (value << 7) | u32::from(b & 0x7F);
            if b & 0x80 == 0 {
                return Ok(value);
            }
        }
        self.pos = start;
        Err(self.fail("variable-length quantity longer than 4 bytes"))
    }
}

fn parse_track(data: &[u8], base: usize) -> Result<Track> {
    let mut c = Cursor { bytes: data, pos: 0 };
    let fail_at = |c: &Cursor, reason: String| Error::MidiParse {
        offset: base + c.pos,
        reason,
    };
    let mut track = Track::default();
    let mut tick: u64 = 0;
    let mut running: Option<u8> = None;
    let mut open: HashMap<(u8, u8), VecDeque<u64>> = HashMap::new();
    let mut closed: Vec<(u64, RawNote)> = Vec::new();
    let mut order: u64 = 0;

    while c.remaining() > 0 {
        let delta = c.vlq().map_err(|e| rebase(e, base))?;
        tick += u64::from(delta);
        let first = c.peek().map_err(|e| rebase(e, base))?;
        let status = if first & 0x80 != 0 {
            c.pos += 1;
            first
        } else {
            running.ok_or_else(|| fail_at(&c, "data byte without running status".into()))?
        };

        match status {
            0xFF => {
                running = None;
                let kind = c.u8().map_err(|e| rebase(e, base))?;
                let len = c.vlq().map_err(|e| rebase(e, base))? as usize;
                let payload = c.take(len).map_err(|e| rebase(e, base))?;
                match kind {
                    META_END_OF_TRACK => break,
                    META_TEMPO if len == 3 => {
                        let us = u32::from_be_bytes([0, payload[0], payload[1], payload[2]]);
                        if us > 0 {
                            track.tempos.push((tick, us));
                        }
                    }
                    META_TEXT | META_LYRIC => track.lyrics.push((tick, kind, payload.to_vec())),
                    _ => {}
                }
            }
            0xF0 | 0xF7 => {
                running = None;
                let len = c.vlq().map_err(|e| rebase(e, base))? as usize;
                c.take(len).map_err(|e| rebase(e, base))?;
            }
            0x80..=0xEF => {
                running = Some(status);
                let channel = status & 0x0F;
                let data_len = match status & 0xF0 {
                    0xC0 | 0xD0 => 1,
                    _ => 2,
                };
                let data = c.take(data_len).map_err(|e| rebase(e, base))?;
                if data.iter().any(|b| b & 0x80 != 0) {
                    c.pos -= data_len;
                    return Err(fail_at(&c, format!("status byte inside data of event {status:#04x}")));
                }
                let kind = status & 0xF0;
                if kind == 0x90 && data[1] > 0 {
                    open.entry((channel, data[0])).or_default().push_back(tick);
                } else if kind == 0x80 || kind == 0x90 {
                    if let Some(on) = open.get_mut(&(channel, data[0])).and_then(|q| q.pop_front()) {
                        closed.push((
                            order,
                            RawNote {
                                key: data[0],
                                on,
                                off: tick,
                            },
                        ));
                        order += 1;
                    }
                }
            }
            other => {
                c.pos -= 1;
                return Err(fail_at(&c, format!("unsupported status byte {other:#04x}")));
            }
        }
    }

    // Notes still sounding at the end of the track end there.
    let mut dangling: Vec<_> = open.into_iter().collect();
    dangling.sort_by_key(|((ch, key), _)| (*ch, *key));
    for ((_, key), ons) in dangling {
        for on in ons {
            closed.push((order, RawNote { key, on, off: tick }));
            order += 1;
        }
    }
    closed.sort_by_key(|(ord, n)| (n.on, *ord));
    track.notes = closed.into_iter().map(|(_, n)| n).collect();
    Ok(track)
}

fn rebase(e: Error, base: usize) -> Error {
    match e {
        Error::MidiParse { offset, reason } => Error::MidiParse {
            offset: offset + base,
            reason,
        },
        other => other,
    }
}

/// Parses a Standard MIDI File (format 0 or 1) into lyric-carrying notes.
///
/// Lyric meta events (0x05) are used when present anywhere in the file, text
/// events (0x01) otherwise. A lyric attaches to the note that starts on the
/// same tick in the chosen melody track (the highest one when several start
/// together). The melody track is the track containing lyric events with the
/// most attached notes, or, when lyrics live in a note-less track, the track
/// with the most notes starting on lyric ticks.
pub fn parse_midi(bytes: &[u8]) -> Result<ParsedSong> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(4).map_err(|_| c.fail("file too short for a header"))? != b"MThd" {
        return Err(Error::MidiParse {
            offset: 0,
            reason: "missing MThd header".into(),
        });
    }
    let header_len = c.u32()? as usize;
    if header_len < 6 {
        return Err(c.fail(format!("header length {header_len} is shorter than 6")));
    }
    let header_start = c.pos;
    let format = c.u16()?;
    let track_count = c.u16()?;
    let raw_division = c.u16()?;
    c.pos = header_start;
    c.take(header_len)?;
    if format > 2 {
        return Err(Error::MidiParse {
            offset: header_start,
            reason: format!("unknown SMF format {format}"),
        });
    }
    let division = if raw_division & 0x8000 != 0 {
        let fps = (-((raw_division >> 8) as u8 as i8)) as u8;
        let tpf = (raw_division & 0xFF) as u8;
        if fps == 0 || tpf == 0 {
            return Err(Error::MidiParse {
                offset: header_start + 4,
                reason: "invalid SMPTE division".into(),
            });
        }
        Division::Smpte(fps, tpf)
    } else {
        if raw_division == 0 {
            return Err(Error::MidiParse {
                offset: header_start + 4,
                reason: "zero ticks per quarter note".into(),
            });
        }
        Division::TicksPerQuarter(raw_division)
    };

    let mut tracks = Vec::new();
    while c.remaining() >= 8 && tracks.len() < usize::from(track_count) {
        let chunk_start = c.pos;
        let id = c.take(4)?;
        let len = c.u32()? as usize;
        if len > c.remaining() {
            return Err(Error::MidiParse {
                offset: chunk_start,
                reason: format!("chunk length {len} exceeds the {} remaining bytes", c.remaining()),
            });
        }
        let data_start = c.pos;
        let data = c.take(len)?;
        if id == b"MTrk" {
            tracks.push(parse_track(data, data_start)?);
        }
    }

    let tempo_us = tracks
        .iter()
        .flat_map(|t| t.tempos.iter().copied())
        .min_by_key(|&(tick, _)| tick)
        .map(|(_, us)| us)
        .unwrap_or(DEFAULT_TEMPO_US);
    let bpm = 60_000_000.0 / f64::from(tempo_us);
    let seconds = |tick: u64| -> f64 {
        match division {
            Division::TicksPerQuarter(tpq) => tick as f64 / f64::from(tpq) * f64::from(tempo_us) / 1e6,
            Division::Smpte(fps, tpf) => tick as f64 / (f64::from(fps) * f64::from(tpf)),
        }
    };

    let has_lyric_meta = tracks.iter().any(|t| t.lyrics.iter().any(|l| l.1 == META_LYRIC));
    let wanted = if has_lyric_meta { META_LYRIC } else { META_TEXT };
    let track_lyrics: Vec<BTreeMap<u64, String>> = tracks
        .iter()
        .map(|t| {
            let mut by_tick: BTreeMap<u64, String> = BTreeMap::new();
            for (tick, kind, payload) in &t.lyrics {
                if *kind != wanted {
                    continue;
                }
                let text = String::from_utf8_lossy(payload).into_owned();
                // Karaoke headers such as "@TTitle" are not lyrics.
                if wanted == META_TEXT && text.starts_with('@') {
                    continue;
                }
                by_tick.entry(*tick).or_default().push_str(&text);
            }
            by_tick
        })
        .collect();
    let mut lyrics: BTreeMap<u64, String> = BTreeMap::new();
    for map in &track_lyrics {
        for (tick, text) in map {
            lyrics.entry(*tick).or_default().push_str(text);
        }
    }
    if lyrics.is_empty() {
        return Ok(ParsedSong {
            bpm,
            notes: Vec::new(),
            has_lyrics: false,
        });
    }

    let attached = |t: &Track| -> usize {
        let mut ons: Vec<u64> = t.notes.iter().map(|n| n.on).collect();
        ons.dedup();
        ons.iter().filter(|tick| lyrics.contains_key(tick)).count()
    };
    let pick = |candidates: &mut dyn Iterator<Item = usize>| -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        for i in candidates {
            let n = attached(&tracks[i]);
            if n > 0 && best.is_none_or(|(_, b)| n > b) {
                best = Some((i, n));
            }
        }
        best.map(|(i, _)| i)
    };
    let chosen = pick(&mut (0..tracks.len()).filter(|&i| !track_lyrics[i].is_empty()))
        .or_else(|| pick(&mut (0..tracks.len())));

    let mut notes = Vec::new();
    if let Some(ti) = chosen {
        let track = &tracks[ti];
        for (tick, text) in &lyrics {
            let note = track
                .notes
                .iter()
                .filter(|n| n.on == *tick)
                .max_by_key(|n| n.key);
            if let Some(n) = note {
                notes.push(LyricNote {
                    text: text.clone(),
                    midi: n.key,
                    note_on: seconds(n.on),
                    note_off: seconds(n.off),
                });
            }
        }
    }
    Ok(ParsedSong {
        bpm,
        notes,
        has_lyrics: true,
    })
}

/// Ticks per quarter note used by [`write_midi`].
pub const WRITER_TICKS_PER_QUARTER: u16 = 480;

fn put_vlq(out: &mut Vec<u8>, mut value: u32) {
    let mut buf = [0u8; 4];
    let mut i = 3;
    buf[i] = (value & 0x7F) as u8;
    value >>= 7;
    while value > 0 {
        i -= 1;
        buf[i] = ((value & 0x7F) as u8) | 0x80;
        value >>= 7;
    }
    out.extend_from_slice(&buf[i..]);
}

fn beats_to_ticks(beats: f64) -> u32 {
    (beats * f64::from(WRITER_TICKS_PER_QUARTER)).round().max(0.0) as u32
}

/// Writes a single-track (format 0) file: one tempo event, then for every
/// note its rest as silence, a lyric meta event and the note itself.
///
/// `lyrics[i]` is attached to `notes[i]`; pass non-final syllables of a word
/// with a trailing `-` so readers can rebuild the words.
pub fn write_midi(notes: &[NoteTriplet], lyrics: &[String], bpm: f64) -> Result<Vec<u8>> {
    if notes.len() != lyrics.len() {
        return Err(crate::error::shape(format!(
            "{} notes but {} lyric syllables",
            notes.len(),
            lyrics.len()
        )));
    }
    if !(bpm.is_finite() && bpm > 0.0) {
        return Err(crate::error::invalid(format!("tempo must be positive, got {bpm}")));
    }
    let tempo_us = (60_000_000.0 / bpm).round() as u32;
    if tempo_us == 0 || tempo_us > 0xFF_FFFF {
        return Err(crate::error::invalid(format!("tempo {bpm} BPM cannot be encoded")));
    }

    let mut track = Vec::new();
    put_vlq(&mut track, 0);
    track.extend_from_slice(&[0xFF, META_TEMPO, 3]);
    track.extend_from_slice(&tempo_us.to_be_bytes()[1..]);

    for (note, text) in notes.iter().zip(lyrics) {
        put_vlq(&mut track, beats_to_ticks(note.rest));
        track.extend_from_slice(&[0xFF, META_LYRIC]);
        put_vlq(&mut track, text.len() as u32);
        track.extend_from_slice(text.as_bytes());
        put_vlq(&mut track, 0);
        track.extend_from_slice(&[0x90, note.midi.min(127), 100]);
        put_vlq(&mut track, beats_to_ticks(note.duration));
        track.extend_from_slice(&[0x80, note.midi.min(127), 0]);
    }
    put_vlq(&mut track, 0);
    track.extend_from_slice(&[0xFF, META_END_OF_TRACK, 0]);

    let mut out = Vec::with_capacity(track.len() + 22);
    out.extend_from_slice(b"MThd");
    out.extend_from_slice(&6u32.to_be_bytes());
    out.extend_from_slice(&0u16.to_be_bytes());
    out.extend_from_slice(&1u16.to_be_bytes());
    out.extend_from_slice(&WRITER_TICKS_PER_QUARTER.to_be_bytes());
    out.extend_from_slice(b"MTrk");
    out.extend_from_slice(&(track.len() as u32).to_be_bytes());
    out.extend_from_slice(&track);
    Ok(out)
}
