//! Threshold calibration from power-ramp recordings and event accumulation
//! images.

use rayon::prelude::*;

use crate::circuit::{simulate_pixel_events, CircuitConfig, STEPS_PER_PERIOD};
use crate::error::{Error, Result};
use crate::event::{Event, EventStream, Polarity};
use crate::geometry::Vec3;
use crate::image::{Image, PixelThresholds, ScalarMap};
use crate::scene::SceneSpec;

/// Per-pixel thresholds from a stream of `cycles` up-and-down power ramps of
/// ratio `k`: each ramp spans `ln k` of log radiance, so
/// `h_p = cycles·ln k / N_p` and `h_n = −cycles·ln k / N_n`.
///
/// A polarity with no events yields an infinite (flagged) threshold.
pub fn estimate_thresholds(stream: &EventStream, k: f64, cycles: usize) -> Result<PixelThresholds> {
    check_ramp(k, cycles)?;
    let (pos, neg) = polarity_counts(stream);
    let swing = cycles as f64 * k.ln();
    let estimate = |count: &u64| {
        if *count == 0 {
            f64::INFINITY
        } else {
            swing / *count as f64
        }
    };
    PixelThresholds::new(pos.map(estimate), neg.map(|c| -estimate(c)))
}

fn check_ramp(k: f64, cycles: usize) -> Result<()> {
    if !(k > 1.0 && k.is_finite()) {
        return Err(Error::config(format!("power ratio k = {k} must be > 1")));
    }
    if cycles < 1 {
        return Err(Error::config("at least one calibration cycle is required"));
    }
    Ok(())
}

/// Positive and negative event counts per pixel.
pub fn polarity_counts(stream: &EventStream) -> (Image<u64>, Image<u64>) {
    let (w, h) = (stream.width(), stream.height());
    let mut pos = Image::filled(w, h, 0u64);
    let mut neg = Image::filled(w, h, 0u64);
    for e in stream.events() {
        let target = match e.polarity {
            Polarity::Positive => &mut pos,
            Polarity::Negative => &mut neg,
        };
        *target.get_mut(e.x as usize, e.y as usize) += 1;
    }
    (pos, neg)
}

/// `ΔI = h_p · N_p` per pixel. Pixels without positive events are 0; a
/// flagged threshold with events gives NaN.
pub fn accumulation_image(stream: &EventStream, thresholds: &PixelThresholds) -> Result<ScalarMap> {
    check_shape(stream, thresholds)?;
    let (pos, _) = polarity_counts(stream);
    Ok(weighted(&pos, thresholds.positive()))
}

/// `h_p · N_p + h_n · N_n` per pixel, the net log-radiance change.
pub fn signed_accumulation_image(
    stream: &EventStream,
    thresholds: &PixelThresholds,
) -> Result<ScalarMap> {
    check_shape(stream, thresholds)?;
    let (pos, neg) = polarity_counts(stream);
    let p = weighted(&pos, thresholds.positive());
    let n = weighted(&neg, thresholds.negative());
    Image::from_vec(
        p.width(),
        p.height(),
        p.data().iter().zip(n.data()).map(|(a, b)| a + b).collect(),
    )
}

fn weighted(counts: &Image<u64>, thresholds: &ScalarMap) -> ScalarMap {
    let data = counts
        .data()
        .iter()
        .zip(thresholds.data())
        .map(|(&c, &h)| match (c, h.is_finite()) {
            (0, _) => 0.0,
            (_, true) => h * c as f64,
            (_, false) => f64::NAN,
        })
        .collect();
    Image::from_vec(counts.width(), counts.height(), data).expect("shape preserved")
}

fn check_shape(stream: &EventStream, thresholds: &PixelThresholds) -> Result<()> {
    if stream.width() != thresholds.width() || stream.height() != thresholds.height() {
        return Err(Error::config("threshold maps do not match the stream size"));
    }
    Ok(())
}

/// Light power at time `t` of a ramp that rises linearly from `s1` to `k·s1`
/// over the first half of each period and falls back over the second.
pub fn ramp_power(t: f64, s1: f64, k: f64, period: f64) -> f64 {
    let u = (t / period).rem_euclid(1.0);
    let tri = if u < 0.5 { 2.0 * u } else { 2.0 - 2.0 * u };
    s1 * (1.0 + (k - 1.0) * tri)
}

/// Calibration recording: the scene lit from the fixed direction `light`
/// with power ramped by [`ramp_power`] (`s1` = the scene's light power) and
/// no offset light. Syncs mark each ramp cycle.
pub fn simulate_ramp_stream(
    scene: &SceneSpec,
    light: &Vec3,
    k: f64,
    cycles: usize,
    period: f64,
    cfg: &CircuitConfig,
) -> Result<EventStream> {
    check_ramp(k, cycles)?;
    cfg.validate()?;
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::config(format!("period {period} must be positive")));
    }
    let light = light
        .try_normalize(0.0)
        .ok_or_else(|| Error::config("ramp light direction is zero"))?;
    let (width, height) = (scene.width(), scene.height());
    if cfg.thresholds.width() != width || cfg.thresholds.height() != height {
        return Err(Error::config("threshold maps do not match the scene size"));
    }
    let s1 = scene.light_power();
    let per_pixel: Vec<Result<Vec<Event>>> = (0..width * height)
        .into_par_iter()
        .map(|index| {
            let (x, y) = (index % width, index / width);
            let Some(point) = scene.point(x, y) else {
                return Ok(Vec::new());
            };
            // radiance per unit light power, offset excluded
            let unit = (scene.shade(point, &light) - scene.offset_light()) / s1;
            if unit <= 0.0 {
                return Ok(Vec::new());
            }
            let (h_p, h_n) = cfg.thresholds.at(x, y);
            let events = simulate_pixel_events(
                |t| unit * ramp_power(t, s1, k, period),
                cfg,
                h_p,
                h_n,
                0.0,
                cycles as f64 * period,
                period / STEPS_PER_PERIOD as f64,
                &mut cfg.pixel_rng(index),
            )
            .map_err(|e| e.at_pixel(x, y))?;
            Ok(events
                .into_iter()
                .map(|e| Event::new(x as u16, y as u16, e.t, e.polarity))
                .collect())
        })
        .collect();
    let mut events = Vec::new();
    for r in per_pixel {
        events.extend(r?);
    }
    events.par_sort_by(Event::stream_cmp);
    let syncs = (0..=cycles).map(|c| c as f64 * period).collect();
    EventStream::new(width, height, events, syncs)
}
