//! Event files. Text: `x,y,t_us,p` lines. Binary: `EVT1`, u32 width,
//! u32 height, u64 count, then 16-byte records `{u16 x, u16 y, i8 p, pad,
//! u64 t_ns}`, all little-endian. Both keep sync markers in `<path>.sync`,
//! one integer microsecond per line.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::event::{Event, EventStream, Polarity};

pub const TEXT_HEADER: &str = "x,y,t_us,p";
pub const BINARY_MAGIC: &[u8; 4] = b"EVT1";
const RECORD_BYTES: usize = 16;
/// Sync spacing tolerance after microsecond quantization.
const QUANTIZED_SYNC_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventFormat {
    Text,
    Binary,
}

impl EventFormat {
    /// `.evt` and `.bin` are binary; anything else is text.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("evt") | Some("bin") => EventFormat::Binary,
            _ => EventFormat::Text,
        }
    }
}

pub fn sync_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".sync");
    PathBuf::from(s)
}

fn to_micros(t: f64) -> i64 {
    (t * 1e6).round() as i64
}

fn to_nanos(t: f64) -> u64 {
    (t * 1e9).round() as u64
}

/// Writes `stream` in the format implied by the extension.
pub fn write_events(path: &Path, stream: &EventStream) -> Result<()> {
    match EventFormat::from_path(path) {
        EventFormat::Text => write_events_text(path, stream),
        EventFormat::Binary => write_events_binary(path, stream),
    }
}

/// Reads events in the format implied by the extension. `size` fixes the
/// sensor size of text files, which do not store it.
pub fn read_events(path: &Path, size: Option<(usize, usize)>) -> Result<EventStream> {
    match EventFormat::from_path(path) {
        EventFormat::Text => read_events_text(path, size),
        EventFormat::Binary => {
            let stream = read_events_binary(path)?;
            if let Some((w, h)) = size {
                if (w, h) != (stream.width(), stream.height()) {
                    return Err(Error::config(format!(
                        "binary events are {}x{}, expected {w}x{h}",
                        stream.width(),
                        stream.height()
                    )));
                }
            }
            Ok(stream)
        }
    }
}

pub fn write_events_text(path: &Path, stream: &EventStream) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "{TEXT_HEADER}")?;
    for e in stream.events() {
        writeln!(
            out,
            "{},{},{},{}",
            e.x,
            e.y,
            to_micros(e.t),
            e.polarity.sign()
        )?;
    }
    out.flush()?;
    write_syncs(path, stream.cycle_syncs())
}

/// Reads a text event file. Without `size` the sensor is the bounding box of
/// the events.
pub fn read_events_text(path: &Path, size: Option<(usize, usize)>) -> Result<EventStream> {
    let file = fs::File::open(path)?;
    let name = path.display().to_string();
    let mut lines = BufReader::new(file).lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == TEXT_HEADER => {}
        Some(Ok(h)) => {
            return Err(Error::parse(
                format!("{name}:1"),
                format!("expected header {TEXT_HEADER:?}, found {h:?}"),
            ))
        }
        Some(Err(e)) => return Err(e.into()),
        None => return Err(Error::parse(format!("{name}:1"), "missing header")),
    }
    let mut events = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        let at = || format!("{name}:{lineno}");
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                at(),
                format!("expected 4 fields, found {}", fields.len()),
            ));
        }
        let x: u16 = fields[0]
            .parse()
            .map_err(|_| Error::parse(at(), format!("bad x {:?}", fields[0])))?;
        let y: u16 = fields[1]
            .parse()
            .map_err(|_| Error::parse(at(), format!("bad y {:?}", fields[1])))?;
        let t_us: u64 = fields[2]
            .parse()
            .map_err(|_| Error::parse(at(), format!("bad timestamp {:?}", fields[2])))?;
        let polarity = fields[3]
            .parse::<i64>()
            .ok()
            .and_then(Polarity::from_sign)
            .ok_or_else(|| Error::parse(at(), format!("bad polarity {:?}", fields[3])))?;
        let t = t_us as f64 / 1e6;
        if events.last().is_some_and(|p: &Event| p.t > t) {
            return Err(Error::parse(at(), "timestamps are not sorted"));
        }
        if let Some((w, h)) = size {
            if x as usize >= w || y as usize >= h {
                return Err(Error::parse(at(), format!("({x}, {y}) outside {w}x{h}")));
            }
        }
        events.push(Event::new(x, y, t, polarity));
    }
    let (w, h) = size.unwrap_or_else(|| {
        let w = events.iter().map(|e| e.x as usize + 1).max().unwrap_or(0);
        let h = events.iter().map(|e| e.y as usize + 1).max().unwrap_or(0);
        (w, h)
    });
    let syncs = read_syncs(path)?;
    EventStream::with_sync_tolerance(w, h, events, syncs, QUANTIZED_SYNC_TOLERANCE)
}

pub fn write_events_binary(path: &Path, stream: &EventStream) -> Result<()> {
    let width = u32::try_from(stream.width()).map_err(|_| Error::config("width exceeds u32"))?;
    let height = u32::try_from(stream.height()).map_err(|_| Error::config("height exceeds u32"))?;
    let mut out = BufWriter::new(fs::File::create(path)?);
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&width.to_le_bytes())?;
    out.write_all(&height.to_le_bytes())?;
    out.write_all(&(stream.len() as u64).to_le_bytes())?;
    for e in stream.events() {
        let mut rec = [0u8; RECORD_BYTES];
        rec[0..2].copy_from_slice(&e.x.to_le_bytes());
        rec[2..4].copy_from_slice(&e.y.to_le_bytes());
        rec[4] = e.polarity.sign() as u8;
        rec[8..16].copy_from_slice(&to_nanos(e.t).to_le_bytes());
        out.write_all(&rec)?;
    }
    out.flush()?;
    write_syncs(path, stream.cycle_syncs())
}

pub fn read_events_binary(path: &Path) -> Result<EventStream> {
    let name = path.display().to_string();
    let mut input = BufReader::new(fs::File::open(path)?);
    let mut header = [0u8; 20];
    input
        .read_exact(&mut header)
        .map_err(|_| Error::parse(format!("{name}: header"), "truncated header"))?;
    if &header[0..4] != BINARY_MAGIC {
        return Err(Error::parse(format!("{name}: header"), "bad magic"));
    }
    let width = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes")) as usize;
    let height = u32::from_le_bytes(header[8..12].try_into().expect("4 bytes")) as usize;
    let count = u64::from_le_bytes(header[12..20].try_into().expect("8 bytes"));
    let mut events = Vec::with_capacity(count.min(1 << 24) as usize);
    let mut rec = [0u8; RECORD_BYTES];
    for i in 0..count {
        let at = || format!("{name}: record {i}");
        input
            .read_exact(&mut rec)
            .map_err(|_| Error::parse(at(), "truncated record"))?;
        let x = u16::from_le_bytes([rec[0], rec[1]]);
        let y = u16::from_le_bytes([rec[2], rec[3]]);
        let polarity = Polarity::from_sign(i64::from(rec[4] as i8))
            .ok_or_else(|| Error::parse(at(), format!("bad polarity {}", rec[4] as i8)))?;
        let t = u64::from_le_bytes(rec[8..16].try_into().expect("8 bytes")) as f64 / 1e9;
        if x as usize >= width || y as usize >= height {
            return Err(Error::parse(
                at(),
                format!("({x}, {y}) outside {width}x{height}"),
            ));
        }
        if events.last().is_some_and(|p: &Event| p.t > t) {
            return Err(Error::parse(at(), "timestamps are not sorted"));
        }
        events.push(Event::new(x, y, t, polarity));
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(Error::parse(
            format!("{name}: trailer"),
            "bytes after the last record",
        ));
    }
    let syncs = read_syncs(path)?;
    EventStream::with_sync_tolerance(width, height, events, syncs, QUANTIZED_SYNC_TOLERANCE)
}

fn write_syncs(path: &Path, syncs: &[f64]) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(sync_path(path))?);
    for &s in syncs {
        writeln!(out, "{}", to_micros(s))?;
    }
    out.flush()?;
    Ok(())
}

/// Sync markers of an event file; a missing sidecar means no markers.
pub fn read_syncs(path: &Path) -> Result<Vec<f64>> {
    let sp = sync_path(path);
    let text = match fs::read_to_string(&sp) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let name = sp.display().to_string();
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<i64>()
                .map(|us| us as f64 / 1e6)
                .map_err(|_| Error::parse(format!("{name}:{}", i + 1), format!("bad sync {l:?}")))
        })
        .collect()
}
