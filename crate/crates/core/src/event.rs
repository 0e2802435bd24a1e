//! Events and event streams.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Tolerance on the spacing of consecutive cycle sync markers, in seconds.
pub const SYNC_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Negative,
    Positive,
}

impl Polarity {
    pub fn sign(self) -> i8 {
        match self {
            Polarity::Positive => 1,
            Polarity::Negative => -1,
        }
    }

    pub fn from_sign(sign: i64) -> Option<Self> {
        match sign {
            1 => Some(Polarity::Positive),
            -1 => Some(Polarity::Negative),
            _ => None,
        }
    }
}

/// A single triggered event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub x: u16,
    pub y: u16,
    /// Seconds.
    pub t: f64,
    pub polarity: Polarity,
}

impl Event {
    pub fn new(x: u16, y: u16, t: f64, polarity: Polarity) -> Self {
        Event { x, y, t, polarity }
    }

    /// Stream order: time, then row, column and polarity.
    pub fn stream_cmp(&self, other: &Event) -> Ordering {
        self.t
            .total_cmp(&other.t)
            .then(self.y.cmp(&other.y))
            .then(self.x.cmp(&other.x))
            .then(self.polarity.cmp(&other.polarity))
    }
}

/// A per-pixel event: time and polarity only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelEvent {
    pub t: f64,
    pub polarity: Polarity,
}

/// Time-sorted events of a whole sensor plus the light-cycle sync markers.
#[derive(Debug, Clone, PartialEq)]
pub struct EventStream {
    width: usize,
    height: usize,
    events: Vec<Event>,
    cycle_syncs: Vec<f64>,
}

impl EventStream {
    pub fn new(
        width: usize,
        height: usize,
        events: Vec<Event>,
        cycle_syncs: Vec<f64>,
    ) -> Result<Self> {
        Self::with_sync_tolerance(width, height, events, cycle_syncs, SYNC_TOLERANCE)
    }

    /// As [`new`](Self::new), with a custom tolerance on sync spacing. Readers of
    /// quantized formats use the quantum here.
    pub fn with_sync_tolerance(
        width: usize,
        height: usize,
        events: Vec<Event>,
        cycle_syncs: Vec<f64>,
        tolerance: f64,
    ) -> Result<Self> {
        if width > u16::MAX as usize + 1 || height > u16::MAX as usize + 1 {
            return Err(Error::config(format!(
                "sensor {width}x{height} exceeds 16-bit coordinates"
            )));
        }
        for (i, e) in events.iter().enumerate() {
            if e.x as usize >= width || e.y as usize >= height {
                return Err(Error::domain(format!(
                    "event {i} at ({}, {}) outside {width}x{height}",
                    e.x, e.y
                )));
            }
            if !(e.t.is_finite() && e.t >= 0.0) {
                return Err(Error::domain(format!("event {i} has invalid time {}", e.t)));
            }
            if i > 0 && events[i - 1].t > e.t {
                return Err(Error::domain(format!("event {i} is out of time order")));
            }
        }
        for w in cycle_syncs.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::domain("cycle syncs must be strictly increasing"));
            }
        }
        if cycle_syncs.len() > 2 {
            let period = cycle_syncs[1] - cycle_syncs[0];
            for w in cycle_syncs.windows(2) {
                if ((w[1] - w[0]) - period).abs() > tolerance {
                    return Err(Error::domain(format!(
                        "cycle sync spacing {} differs from period {period}",
                        w[1] - w[0]
                    )));
                }
            }
        }
        Ok(EventStream {
            width,
            height,
            events,
            cycle_syncs,
        })
    }

    /// Sorts `events` into stream order before validating.
    pub fn from_unsorted(
        width: usize,
        height: usize,
        mut events: Vec<Event>,
        cycle_syncs: Vec<f64>,
    ) -> Result<Self> {
        events.sort_by(Event::stream_cmp);
        Self::new(width, height, events, cycle_syncs)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn cycle_syncs(&self) -> &[f64] {
        &self.cycle_syncs
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    /// Number of complete cycles delimited by sync markers.
    pub fn cycle_count(&self) -> usize {
        self.cycle_syncs.len().saturating_sub(1)
    }

    /// Light period inferred from the first two syncs.
    pub fn period(&self) -> Option<f64> {
        match self.cycle_syncs.as_slice() {
            [a, b, ..] => Some(b - a),
            _ => None,
        }
    }

    /// Splits the stream into per-pixel event lists, row-major.
    pub fn per_pixel(&self) -> Vec<Vec<PixelEvent>> {
        let mut out = vec![Vec::new(); self.width * self.height];
        for e in &self.events {
            out[e.y as usize * self.width + e.x as usize].push(PixelEvent {
                t: e.t,
                polarity: e.polarity,
            });
        }
        out
    }
}
