//! Event-camera pixel circuit: logarithmic photoreceptor, differencing
//! against the last event's reference level, and two comparators.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::event::{Event, EventStream, PixelEvent, Polarity};
use crate::geometry::LightTrajectory;
use crate::image::PixelThresholds;
use crate::scene::SceneSpec;

/// Crossing times are refined to this many seconds.
pub const BISECTION_TOLERANCE: f64 = 1e-9;

/// Grid steps per light period used to bracket crossings.
pub const STEPS_PER_PERIOD: usize = 4096;

/// Slack on the comparator inputs absorbing floating-point round-off.
const COMPARATOR_SLACK: f64 = 1e-12;

/// Perturbed thresholds are clamped to at least this fraction of the nominal magnitude.
const MIN_THRESHOLD_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitConfig {
    pub quantum_efficiency: f64,
    pub thresholds: PixelThresholds,
    /// Standard deviation of the per-event threshold perturbation.
    pub noise_sigma: f64,
    /// Radiance below this value is clamped before the logarithm.
    pub logamp_floor: f64,
    /// Seconds during which a pixel cannot fire after an event.
    pub dead_time: f64,
    pub rng_seed: u64,
}

impl CircuitConfig {
    /// Noiseless circuit with uniform thresholds.
    pub fn ideal(thresholds: PixelThresholds) -> Self {
        CircuitConfig {
            quantum_efficiency: 1.0,
            thresholds,
            noise_sigma: 0.0,
            logamp_floor: 0.0,
            dead_time: 0.0,
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.quantum_efficiency > 0.0) {
            return Err(Error::config("quantum efficiency must be > 0"));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::config("noise sigma must be >= 0"));
        }
        if !(self.logamp_floor >= 0.0) {
            return Err(Error::config("log-amp floor must be >= 0"));
        }
        if !(self.dead_time >= 0.0) {
            return Err(Error::config("dead time must be >= 0"));
        }
        Ok(())
    }

    /// Random source for pixel `index`; one independent stream per pixel.
    pub fn pixel_rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(index as u64);
        rng
    }
}

struct Comparator {
    nominal_pos: f64,
    nominal_neg: f64,
    noise: Option<Normal<f64>>,
    pos: f64,
    neg: f64,
}

impl Comparator {
    fn new(h_p: f64, h_n: f64, sigma: f64) -> Self {
        let noise = (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("sigma is finite"));
        Comparator {
            nominal_pos: h_p,
            nominal_neg: h_n,
            noise,
            pos: h_p,
            neg: h_n,
        }
    }

    fn redraw<R: Rng>(&mut self, rng: &mut R) {
        if let Some(noise) = &self.noise {
            let floor_pos = MIN_THRESHOLD_FRACTION * self.nominal_pos;
            let floor_neg = MIN_THRESHOLD_FRACTION * self.nominal_neg;
            self.pos = (self.nominal_pos + noise.sample(rng)).max(floor_pos);
            self.neg = (self.nominal_neg + noise.sample(rng)).min(floor_neg);
        }
    }

    fn fires(&self, diff: f64) -> Option<Polarity> {
        if diff >= self.pos - COMPARATOR_SLACK {
            Some(Polarity::Positive)
        } else if diff <= self.neg + COMPARATOR_SLACK {
            Some(Polarity::Negative)
        } else {
            None
        }
    }

    fn level(&self, polarity: Polarity) -> f64 {
        match polarity {
            Polarity::Positive => self.pos,
            Polarity::Negative => self.neg,
        }
    }
}

/// Simulates one pixel driven by `radiance` over `[t0, t1]`.
///
/// Grid nodes at `t0 + i·step` bracket crossings, which are then refined by
/// bisection.
/// After an event the reference advances by the threshold that fired, so a
/// jump spanning several thresholds yields a burst separated by the dead time.
#[allow(clippy::too_many_arguments)]
pub fn simulate_pixel_events<F, R>(
    radiance: F,
    cfg: &CircuitConfig,
    h_p: f64,
    h_n: f64,
    t0: f64,
    t1: f64,
    step: f64,
    rng: &mut R,
) -> Result<Vec<PixelEvent>>
where
    F: Fn(f64) -> f64,
    R: Rng,
{
    cfg.validate()?;
    if !(h_p > 0.0 && h_n < 0.0) {
        return Err(Error::config(format!(
            "thresholds must satisfy h_p > 0 > h_n, got ({h_p}, {h_n})"
        )));
    }
    if !(t1 > t0) || !(step > 0.0) {
        return Err(Error::config("need t1 > t0 and a positive step"));
    }
    let log_signal = |t: f64| -> Result<f64> {
        let l = radiance(t);
        let l = if l < cfg.logamp_floor {
            cfg.logamp_floor
        } else {
            l
        };
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::domain(format!(
                "radiance {l} is not positive at t = {t}"
            )));
        }
        Ok((cfg.quantum_efficiency * l).ln())
    };

    let mut comparator = Comparator::new(h_p, h_n, cfg.noise_sigma);
    comparator.redraw(rng);
    let mut reference = log_signal(t0)?;
    let mut events = Vec::new();
    let mut t = t0;
    let mut resumed = false;

    while t <= t1 {
        // a crossing that completed during the dead time fires on release
        if resumed {
            if let Some(p) = comparator.fires(log_signal(t)? - reference) {
                events.push(PixelEvent { t, polarity: p });
                reference += comparator.level(p);
                comparator.redraw(rng);
                t += cfg.dead_time.max(BISECTION_TOLERANCE);
                continue;
            }
        }
        if t >= t1 {
            break;
        }
        // grid nodes sit on the fixed lattice t0 + i·step so kinks of a
        // piecewise drive at lattice times are sampled exactly
        let mut node = ((t - t0) / step).floor() + 1.0;
        if t0 + node * step <= t {
            node += 1.0;
        }
        let next = (t0 + node * step).min(t1);
        let fired = comparator.fires(log_signal(next)? - reference);
        if fired.is_none() {
            t = next;
            resumed = false;
            continue;
        }
        let (mut lo, mut hi) = (t, next);
        let mut polarity = fired.unwrap();
        while hi - lo > BISECTION_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            match comparator.fires(log_signal(mid)? - reference) {
                Some(p) => {
                    hi = mid;
                    polarity = p;
                }
                None => lo = mid,
            }
        }
        events.push(PixelEvent { t: hi, polarity });
        reference += comparator.level(polarity);
        comparator.redraw(rng);
        t = hi + cfg.dead_time.max(BISECTION_TOLERANCE);
        resumed = true;
    }
    Ok(events)
}

/// Events of one scene pixel over `cycles` light periods starting at 0.
pub fn simulate_scene_pixel(
    scene: &SceneSpec,
    x: usize,
    y: usize,
    traj: &LightTrajectory,
    cycles: usize,
    cfg: &CircuitConfig,
) -> Result<Vec<PixelEvent>> {
    let point = scene
        .point(x, y)
        .ok_or_else(|| Error::domain(format!("pixel ({x}, {y}) is background")))?;
    let (h_p, h_n) = cfg.thresholds.at(x, y);
    let period = traj.period();
    let mut rng = cfg.pixel_rng(y * scene.width() + x);
    simulate_pixel_events(
        |t| scene.shade(point, &traj.direction(t)),
        cfg,
        h_p,
        h_n,
        0.0,
        cycles as f64 * period,
        period / STEPS_PER_PERIOD as f64,
        &mut rng,
    )
}

/// Simulates every foreground pixel of `scene` for `cycles` light periods.
///
/// Sync markers are placed at `0, T, …, cycles·T`. Pixels run in parallel;
/// the merged stream is sorted deterministically.
pub fn simulate_stream(
    scene: &SceneSpec,
    traj: &LightTrajectory,
    cycles: usize,
    cfg: &CircuitConfig,
) -> Result<EventStream> {
    if cycles < 1 {
        return Err(Error::config("at least one cycle is required"));
    }
    cfg.validate()?;
    let (width, height) = (scene.width(), scene.height());
    if cfg.thresholds.width() != width || cfg.thresholds.height() != height {
        return Err(Error::config("threshold maps do not match the scene size"));
    }
    let per_pixel: Vec<Result<Vec<Event>>> = (0..width * height)
        .into_par_iter()
        .map(|index| {
            let (x, y) = (index % width, index / width);
            if scene.point(x, y).is_none() {
                return Ok(Vec::new());
            }
            let events = simulate_scene_pixel(scene, x, y, traj, cycles, cfg)
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
    let syncs = (0..=cycles).map(|k| k as f64 * traj.period()).collect();
    EventStream::new(width, height, events, syncs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{make_sphere_scene, ScenePreset};
    use std::f64::consts::FRAC_PI_4;

    fn cfg(h_p: f64, h_n: f64) -> CircuitConfig {
        CircuitConfig::ideal(PixelThresholds::uniform(1, 1, h_p, h_n).unwrap())
    }

    fn run(radiance: impl Fn(f64) -> f64, c: &CircuitConfig, t1: f64) -> Result<Vec<PixelEvent>> {
        let (h_p, h_n) = c.thresholds.at(0, 0);
        simulate_pixel_events(
            radiance,
            c,
            h_p,
            h_n,
            0.0,
            t1,
            t1 / 4096.0,
            &mut c.pixel_rng(0),
        )
    }

    #[test]
    fn constant_radiance_is_silent() {
        let ev = run(|_| 0.7, &cfg(0.05, -0.05), 1.0).unwrap();
        assert!(ev.is_empty());
    }

    #[test]
    fn exponential_gives_equal_spacing() {
        let ev = run(f64::exp, &cfg(0.05, -0.05), 1.0).unwrap();
        assert_eq!(ev.len(), 20);
        for (k, e) in ev.iter().enumerate() {
            assert_eq!(e.polarity, Polarity::Positive);
            assert!((e.t - 0.05 * (k + 1) as f64).abs() < 1e-8, "{k}: {}", e.t);
        }
    }

    /// Brute-force oracle: walk a very fine grid and count level crossings of
    /// the log signal against the running reference.
    fn fine_grid_positive_count(f: impl Fn(f64) -> f64, h: f64, t1: f64) -> usize {
        let n = 2_000_000;
        let mut reference = f(0.0).ln();
        let mut count = 0;
        for i in 1..=n {
            let v = f(t1 * i as f64 / n as f64).ln();
            while v - reference >= h {
                reference += h;
                count += 1;
            }
        }
        count
    }

    #[test]
    fn ramp_by_six_crosses_twenty_two_times() {
        let ramp = |t: f64| 1.0 + 5.0 * t;
        let oracle = fine_grid_positive_count(ramp, 0.08, 1.0);
        assert_eq!(oracle, 22);
        let ev = run(ramp, &cfg(0.08, -0.08), 1.0).unwrap();
        assert_eq!(ev.len(), oracle);
        assert!(ev.iter().all(|e| e.polarity == Polarity::Positive));
    }

    #[test]
    fn times_strictly_increasing_with_step_input() {
        // a jump of 1.0 in log radiance at t = 0.5 fires a burst
        let f = |t: f64| if t < 0.5 { 1.0 } else { std::f64::consts::E };
        let mut c = cfg(0.1, -0.1);
        c.dead_time = 1e-3;
        let ev = run(f, &c, 1.0).unwrap();
        assert_eq!(ev.len(), 10);
        for w in ev.windows(2) {
            assert!(w[1].t - w[0].t >= 1e-3 - 1e-12);
        }
        assert!((ev[0].t - 0.5).abs() < 1e-8);
    }

    #[test]
    fn nonpositive_radiance_names_time() {
        let err = run(|t| 0.5 - t, &cfg(0.05, -0.05), 1.0).unwrap_err();
        match err {
            Error::Domain(msg) => assert!(msg.contains("t = ")),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn floor_clamps_dark_radiance() {
        let mut c = cfg(0.05, -0.05);
        c.logamp_floor = 0.1;
        let ev = run(|t| (0.5 - t).max(0.0), &c, 1.0).unwrap();
        // ln(0.5 / 0.1) / 0.05 ≈ 32.2 negative events, nothing after clamping
        assert_eq!(ev.len(), 32);
        assert!(ev
            .iter()
            .all(|e| e.polarity == Polarity::Negative && e.t <= 0.4 + 1e-6));
    }

    #[test]
    fn quantum_efficiency_cancels() {
        let f = |t: f64| 1.0 + 0.5 * (6.0 * t).sin();
        let a = run(f, &cfg(0.03, -0.04), 2.0).unwrap();
        let mut c = cfg(0.03, -0.04);
        c.quantum_efficiency = 17.0;
        let b = run(f, &c, 2.0).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x.t - y.t).abs() < 2.0 * BISECTION_TOLERANCE);
        }
    }

    #[test]
    fn monotone_segments_count() {
        // up then down, one segment each
        let f = |t: f64| {
            if t < 0.5 {
                (3.0 * t).exp()
            } else {
                (3.0 * (1.0 - t)).exp()
            }
        };
        let ev = run(f, &cfg(0.1, -0.1), 1.0).unwrap();
        let pos = ev
            .iter()
            .filter(|e| e.polarity == Polarity::Positive)
            .count() as i64;
        let neg = ev.len() as i64 - pos;
        assert!((pos - 15).abs() <= 1, "{pos}");
        assert!((neg - 15).abs() <= 1, "{neg}");
    }

    #[test]
    fn noisy_runs_are_deterministic() {
        let mut c = cfg(0.05, -0.05);
        c.noise_sigma = 0.02;
        c.rng_seed = 11;
        let f = |t: f64| 1.0 + 0.5 * (6.0 * t).sin();
        let a = run(f, &c, 3.0).unwrap();
        let b = run(f, &c, 3.0).unwrap();
        assert_eq!(a, b);
        c.rng_seed = 12;
        assert_ne!(a, run(f, &c, 3.0).unwrap());
    }

    #[test]
    fn stream_of_background_scene_is_empty() {
        let scene = crate::scene::SceneSpec::new(4, 3, vec![None; 12], 1.0, 0.0, vec![]).unwrap();
        let traj = LightTrajectory::circular(FRAC_PI_4, 0.5, 0.0).unwrap();
        let c = CircuitConfig::ideal(PixelThresholds::uniform(4, 3, 0.05, -0.05).unwrap());
        let s = simulate_stream(&scene, &traj, 3, &c).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.cycle_syncs(), &[0.0, 0.5, 1.0, 1.5]);
    }

    #[test]
    fn apex_pixel_is_silent() {
        let scene = make_sphere_scene(32, ScenePreset::Diffuse)
            .unwrap()
            .with_offset_light(0.1)
            .unwrap();
        let traj = LightTrajectory::circular(FRAC_PI_4, 1.0, 0.0).unwrap();
        let c = CircuitConfig::ideal(PixelThresholds::uniform(32, 32, 0.05, -0.05).unwrap());
        let ev = simulate_scene_pixel(&scene, 16, 16, &traj, 1, &c).unwrap();
        assert!(ev.is_empty());
    }

    #[test]
    fn albedo_cancels_in_event_times() {
        let traj = LightTrajectory::circular(FRAC_PI_4, 1.0, 0.0).unwrap();
        let c = CircuitConfig::ideal(PixelThresholds::uniform(32, 32, 0.05, -0.05).unwrap());
        let dark = make_sphere_scene(32, ScenePreset::Diffuse)
            .unwrap()
            .with_uniform_albedo(0.2)
            .unwrap();
        let bright = dark.clone().with_uniform_albedo(0.9).unwrap();
        // zenith about 24°, never in attached shadow under a 45° light
        let (x, y) = (21, 12);
        let a = simulate_scene_pixel(&dark, x, y, &traj, 1, &c).unwrap();
        let b = simulate_scene_pixel(&bright, x, y, &traj, 1, &c).unwrap();
        assert!(a.len() > 10);
        assert_eq!(a.len(), b.len());
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.polarity, q.polarity);
            assert!((p.t - q.t).abs() <= 2.0 * BISECTION_TOLERANCE);
        }
    }
}
