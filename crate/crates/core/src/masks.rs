//! Temporal masks that keep distorted parts of a profile out of the fit.
//!
//! All margins are fractions of the light period.

use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{LightTrajectory, SurfaceNormal};
use crate::profile::{forward_distance, TemporalMask};

/// Bisection tolerance for attached-shadow boundaries, seconds.
const ATTACHED_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskConfig {
    /// Specular margin Δt_s.
    pub specular_margin: f64,
    /// Cast-shadow margin Δt_c.
    pub cast_margin: f64,
    /// First-stage cost above which the second stage runs.
    pub cost_threshold: f64,
    /// Peak separation separating highlights from cast shadows.
    pub peak_separation: f64,
}

impl MaskConfig {
    /// Just above the largest first-stage cost on the noiseless 64×64 diffuse
    /// sphere (45° light, thresholds ±0.05, offset ratio 0.1, 256 samples),
    /// which is 0.384.
    pub const DEFAULT_COST_THRESHOLD: f64 = 0.40;

    pub fn validate(&self) -> Result<()> {
        let margin_ok = |m: f64| (0.0..0.5).contains(&m);
        if !margin_ok(self.specular_margin) || !margin_ok(self.cast_margin) {
            return Err(Error::config("mask margins must lie in [0, 0.5)"));
        }
        if !(self.peak_separation > 0.0 && self.peak_separation < 1.0) {
            return Err(Error::config("peak separation must lie in (0, 1)"));
        }
        if !(self.cost_threshold > 0.0) {
            return Err(Error::config("cost threshold must be > 0"));
        }
        Ok(())
    }
}

impl Default for MaskConfig {
    fn default() -> Self {
        MaskConfig {
            specular_margin: 0.14,
            cast_margin: 0.20,
            cost_threshold: Self::DEFAULT_COST_THRESHOLD,
            peak_separation: 0.25,
        }
    }
}

/// Which mask a pixel was finally fitted with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MaskLabel {
    Collapsed,
    Specular,
    Cast,
}

impl MaskLabel {
    /// Value written to label maps.
    pub fn code(self) -> u8 {
        match self {
            MaskLabel::Collapsed => 0,
            MaskLabel::Specular => 1,
            MaskLabel::Cast => 2,
        }
    }
}

impl fmt::Display for MaskLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaskLabel::Collapsed => "collapsed",
            MaskLabel::Specular => "specular",
            MaskLabel::Cast => "cast",
        })
    }
}

/// 1 on the arc travelled forward from the top peak to the bottom peak.
pub fn mask_collapsed(t_top: f64, t_bottom: f64, period: f64) -> Result<TemporalMask> {
    if t_top == t_bottom || forward_distance(t_top, t_bottom, period) == 0.0 {
        return Err(Error::DegeneratePeaks(t_top));
    }
    TemporalMask::forward_arc(period, t_top, t_bottom)
}

/// 0 on the forward arc `[first − margin·T, second + margin·T]`, 1 elsewhere.
fn zero_around(first: f64, second: f64, margin: f64, period: f64) -> Result<TemporalMask> {
    let pad = margin * period;
    let zeros = forward_distance(first, second, period) + 2.0 * pad;
    if zeros >= period {
        return Err(Error::AllMasked);
    }
    TemporalMask::from_arcs(period, [(second + pad, period - zeros)])
}

/// Removes a highlight: zeros from the top peak to the bottom peak, expanded by the margin.
pub fn mask_specular(t_top: f64, t_bottom: f64, margin: f64, period: f64) -> Result<TemporalMask> {
    zero_around(t_top, t_bottom, margin, period)
}

/// Removes a cast shadow: zeros from the bottom peak to the top peak, expanded by the margin.
pub fn mask_cast(t_top: f64, t_bottom: f64, margin: f64, period: f64) -> Result<TemporalMask> {
    zero_around(t_bottom, t_top, margin, period)
}

/// Second-stage mask choice for a pixel.
pub fn select_mask(
    first_cost: f64,
    t_top: f64,
    t_bottom: f64,
    cfg: &MaskConfig,
    period: f64,
) -> MaskLabel {
    if first_cost <= cfg.cost_threshold {
        MaskLabel::Collapsed
    } else if forward_distance(t_top, t_bottom, period) <= cfg.peak_separation * period {
        MaskLabel::Specular
    } else {
        MaskLabel::Cast
    }
}

/// Builds the mask for `label` from the peak times.
pub fn mask_for_label(
    label: MaskLabel,
    t_top: f64,
    t_bottom: f64,
    cfg: &MaskConfig,
    period: f64,
) -> Result<TemporalMask> {
    match label {
        MaskLabel::Collapsed => mask_collapsed(t_top, t_bottom, period),
        MaskLabel::Specular => mask_specular(t_top, t_bottom, cfg.specular_margin, period),
        MaskLabel::Cast => mask_cast(t_top, t_bottom, cfg.cast_margin, period),
    }
}

/// 1 where `nᵀl(t) > 0`. Sign changes between the `samples` uniform times are
/// located by bisection.
pub fn mask_attached(
    normal: &SurfaceNormal,
    traj: &LightTrajectory,
    samples: usize,
) -> Result<TemporalMask> {
    let period = traj.period();
    if samples < 2 {
        return Err(Error::config("attached mask needs at least 2 samples"));
    }
    let lit = |t: f64| normal.vector().dot(&traj.direction(t)) > 0.0;
    let step = period / samples as f64;
    let refine = |mut lo: f64, mut hi: f64, lo_state: bool| {
        while hi - lo > ATTACHED_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            if lit(mid) == lo_state {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };

    let states: Vec<bool> = (0..samples).map(|i| lit(i as f64 * step)).collect();
    if states.iter().all(|s| *s) {
        return Ok(TemporalMask::full(period));
    }
    if states.iter().all(|s| !*s) {
        return Ok(TemporalMask::empty(period));
    }
    let mut rises = Vec::new();
    let mut falls = Vec::new();
    for i in 0..samples {
        let (a, b) = (states[i], states[(i + 1) % samples]);
        if a == b {
            continue;
        }
        let t0 = i as f64 * step;
        let t = refine(t0, t0 + step, a);
        if b {
            rises.push(t);
        } else {
            falls.push(t);
        }
    }
    // each rise opens an arc closed by the next fall
    let mut arcs = Vec::with_capacity(rises.len());
    for &r in &rises {
        let close = falls
            .iter()
            .map(|&f| forward_distance(r, f, period))
            .fold(f64::INFINITY, f64::min);
        arcs.push((r, close));
    }
    TemporalMask::from_arcs(period, arcs)
}
