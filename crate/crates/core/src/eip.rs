//! Event Interval Profile reconstruction.
//!
//! Each event with a neighbour on both sides yields a central-difference
//! estimate of `d(ln L)/dt`; these raw points are joined by straight lines on
//! the circular time axis and resampled at `N` uniform times.

use crate::error::{Error, Result};
use crate::event::{PixelEvent, Polarity};
use crate::profile::Profile;

/// Default samples per cycle.
pub const DEFAULT_SAMPLES: usize = 256;

/// A raw profile estimate at a folded event time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawProfilePoint {
    /// Event time folded into `[0, T)`.
    pub t: f64,
    /// Central-difference estimate of `d(ln L)/dt`.
    pub value: f64,
}

fn signed_threshold(p: Polarity, h_p: f64, h_n: f64) -> f64 {
    match p {
        Polarity::Positive => h_p,
        Polarity::Negative => h_n,
    }
}

/// Raw points of the events in `events[first..=last]`, using their outer
/// neighbours for the differences.
fn raw_points(
    events: &[PixelEvent],
    first: usize,
    last: usize,
    h_p: f64,
    h_n: f64,
    cycle_start: f64,
    period: f64,
) -> Vec<RawProfilePoint> {
    let mut raw = Vec::with_capacity(last + 1 - first);
    for i in first..=last {
        let (prev, cur, next) = (&events[i - 1], &events[i], &events[i + 1]);
        let span = next.t - prev.t;
        if !(span > 0.0) {
            continue;
        }
        // log change across [prev, next] is the sum of the two thresholds fired
        let rise =
            signed_threshold(cur.polarity, h_p, h_n) + signed_threshold(next.polarity, h_p, h_n);
        raw.push(RawProfilePoint {
            t: (cur.t - cycle_start).rem_euclid(period),
            value: rise / span,
        });
    }
    raw.sort_by(|a, b| a.t.total_cmp(&b.t));
    raw
}

/// Reconstructs the profile of one cycle from its own events only; the first
/// and last events serve as neighbours and get no estimate of their own.
///
/// Fewer than three events give an all-invalid profile.
pub fn reconstruct_eip(
    events: &[PixelEvent],
    h_p: f64,
    h_n: f64,
    period: f64,
    cycle_start: f64,
    samples: usize,
) -> Result<Profile> {
    check_thresholds(h_p, h_n)?;
    if events.len() < 3 {
        return Profile::invalid(period, samples);
    }
    let raw = raw_points(events, 1, events.len() - 2, h_p, h_n, cycle_start, period);
    resample(&raw, period, samples)
}

/// Reconstructs the profile of the cycle starting at `cycle_start` from a
/// pixel's whole event train. The events just outside the cycle act as
/// neighbours, so every event inside it contributes an estimate.
pub fn reconstruct_cycle(
    train: &[PixelEvent],
    h_p: f64,
    h_n: f64,
    period: f64,
    cycle_start: f64,
    samples: usize,
) -> Result<Profile> {
    check_thresholds(h_p, h_n)?;
    let begin = train.partition_point(|e| e.t < cycle_start);
    let end = train.partition_point(|e| e.t < cycle_start + period);
    if end <= begin {
        return Profile::invalid(period, samples);
    }
    let first = begin.max(1);
    let last = (end - 1).min(train.len().saturating_sub(2));
    if train.len() < 3 || last < first {
        return Profile::invalid(period, samples);
    }
    let raw = raw_points(train, first, last, h_p, h_n, cycle_start, period);
    resample(&raw, period, samples)
}

fn check_thresholds(h_p: f64, h_n: f64) -> Result<()> {
    if !(h_p > 0.0 && h_n < 0.0) || !h_p.is_finite() || !h_n.is_finite() {
        return Err(Error::config(format!(
            "thresholds must be finite with h_p > 0 > h_n, got ({h_p}, {h_n})"
        )));
    }
    Ok(())
}

/// Circular linear interpolation of sorted raw points at `samples` uniform
/// times. Samples further than `T/4` from every raw point are invalid.
pub fn resample(raw: &[RawProfilePoint], period: f64, samples: usize) -> Result<Profile> {
    if raw.is_empty() {
        return Profile::invalid(period, samples);
    }
    let radius = period / 4.0;
    let step = period / samples as f64;
    let n = raw.len();
    let mut values = Vec::with_capacity(samples);
    let mut valid = Vec::with_capacity(samples);
    for j in 0..samples {
        let s = j as f64 * step;
        let k = raw.partition_point(|p| p.t <= s);
        let (ta, va) = if k == 0 {
            (raw[n - 1].t - period, raw[n - 1].value)
        } else {
            (raw[k - 1].t, raw[k - 1].value)
        };
        let (tb, vb) = if k == n {
            (raw[0].t + period, raw[0].value)
        } else {
            (raw[k].t, raw[k].value)
        };
        let value = if tb > ta {
            va + (vb - va) * (s - ta) / (tb - ta)
        } else {
            va
        };
        let gap = (s - ta).min(tb - s);
        values.push(value);
        valid.push(gap <= radius && value.is_finite());
    }
    Profile::new(period, values, valid)
}

/// Per-sample mean over the profiles valid there. A sample of the result is
/// valid when at least half of the inputs (rounded up) are.
pub fn average_profiles(profiles: &[Profile]) -> Result<Profile> {
    let first = profiles
        .first()
        .ok_or_else(|| Error::config("cannot average zero profiles"))?;
    let (period, n) = (first.period(), first.len());
    for p in profiles {
        if p.len() != n || (p.period() - period).abs() > 1e-12 * period {
            return Err(Error::config("profiles differ in period or sample count"));
        }
    }
    if profiles.len() == 1 {
        return Ok(first.clone());
    }
    let quorum = profiles.len().div_ceil(2);
    let mut values = Vec::with_capacity(n);
    let mut valid = Vec::with_capacity(n);
    let mut bucket = Vec::with_capacity(profiles.len());
    for i in 0..n {
        bucket.clear();
        bucket.extend(
            profiles
                .iter()
                .filter(|p| p.is_valid(i))
                .map(|p| p.value(i)),
        );
        // summation order fixed by value so the mean ignores input order
        bucket.sort_by(f64::total_cmp);
        let mean = if bucket.is_empty() {
            0.0
        } else {
            bucket.iter().sum::<f64>() / bucket.len() as f64
        };
        values.push(mean);
        valid.push(bucket.len() >= quorum);
    }
    Profile::new(period, values, valid)
}

/// Times of the global maximum and minimum over valid samples, earliest on ties.
pub fn find_peaks(profile: &Profile) -> Result<(f64, f64)> {
    let mut top: Option<(usize, f64)> = None;
    let mut bottom: Option<(usize, f64)> = None;
    let mut count = 0;
    for i in 0..profile.len() {
        if !profile.is_valid(i) {
            continue;
        }
        count += 1;
        let v = profile.value(i);
        if top.is_none_or(|(_, best)| v > best) {
            top = Some((i, v));
        }
        if bottom.is_none_or(|(_, best)| v < best) {
            bottom = Some((i, v));
        }
    }
    if count < 2 {
        return Err(Error::DegenerateProfile(format!("{count} valid samples")));
    }
    let (ti, tv) = top.expect("count >= 2");
    let (bi, bv) = bottom.expect("count >= 2");
    if !(tv > bv) {
        return Err(Error::DegenerateProfile("profile is constant".into()));
    }
    Ok((profile.sample_time(ti), profile.sample_time(bi)))
}
