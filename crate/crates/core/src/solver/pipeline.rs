//! Frame-level two-stage solve.

use rayon::prelude::*;

use crate::eip::{average_profiles, find_peaks, reconstruct_cycle};
use crate::error::{Error, Result};
use crate::event::{EventStream, PixelEvent};
use crate::geometry::LightTrajectory;
use crate::image::{Image, NormalMap, PixelThresholds, ScalarMap};
use crate::masks::{mask_collapsed, mask_for_label, select_mask};
use crate::profile::Profile;

use super::fit::solve_with_geometry;
use super::ideal::SampleGeometry;
use super::{SolveResult, SolverConfig};

/// Label-map code for pixels outside the supplied foreground.
pub const LABEL_BACKGROUND: f64 = -2.0;
/// Label-map code for foreground pixels without a solution.
pub const LABEL_UNSOLVED: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnsolvedReason {
    /// Too few events to form a profile over the averaged cycles.
    NoObservations,
    /// A threshold of this pixel was never calibrated.
    FlaggedThreshold,
    /// Flat profile or coincident peaks.
    Degenerate,
    /// No grid cell had usable samples.
    Unsolvable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelSolution {
    /// Collapsed-mask fit.
    pub first: SolveResult,
    /// Final fit; equals `first` when no mask switch happened.
    pub last: SolveResult,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PixelOutcome {
    Background,
    Unsolved(UnsolvedReason),
    Solved(PixelSolution),
}

impl PixelOutcome {
    pub fn solution(&self) -> Option<&PixelSolution> {
        match self {
            PixelOutcome::Solved(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSolution {
    outcomes: Image<PixelOutcome>,
}

impl FrameSolution {
    pub fn width(&self) -> usize {
        self.outcomes.width()
    }

    pub fn height(&self) -> usize {
        self.outcomes.height()
    }

    pub fn outcomes(&self) -> &Image<PixelOutcome> {
        &self.outcomes
    }

    pub fn outcome(&self, x: usize, y: usize) -> &PixelOutcome {
        self.outcomes.get(x, y)
    }

    pub fn normal_map(&self) -> NormalMap {
        self.outcomes.map(|o| o.solution().map(|s| s.last.normal))
    }

    /// Normals of the collapsed-mask stage alone.
    pub fn first_stage_normal_map(&self) -> NormalMap {
        self.outcomes.map(|o| o.solution().map(|s| s.first.normal))
    }

    /// Final cost; NaN where unsolved.
    pub fn cost_map(&self) -> ScalarMap {
        self.outcomes
            .map(|o| o.solution().map_or(f64::NAN, |s| s.last.cost))
    }

    pub fn first_stage_cost_map(&self) -> ScalarMap {
        self.outcomes
            .map(|o| o.solution().map_or(f64::NAN, |s| s.first.cost))
    }

    /// Mask label code, or one of the sentinel codes.
    pub fn label_map(&self) -> ScalarMap {
        self.outcomes.map(|o| match o {
            PixelOutcome::Background => LABEL_BACKGROUND,
            PixelOutcome::Unsolved(_) => LABEL_UNSOLVED,
            PixelOutcome::Solved(s) => f64::from(s.last.label.code()),
        })
    }

    pub fn solved_count(&self) -> usize {
        self.outcomes
            .data()
            .iter()
            .filter(|o| o.solution().is_some())
            .count()
    }

    pub fn unsolved_count(&self) -> usize {
        self.outcomes
            .data()
            .iter()
            .filter(|o| matches!(o, PixelOutcome::Unsolved(_)))
            .count()
    }
}

/// Solves every pixel of `stream`.
///
/// Cycles `1..=k_cycles` are averaged, so the stream needs `k_cycles + 2`
/// cycles. The trajectory's time origin is taken to coincide with each cycle
/// sync. Pixels outside `foreground`, when given, are left as background.
pub fn solve_pixelwise(
    stream: &EventStream,
    thresholds: &PixelThresholds,
    traj: &LightTrajectory,
    cfg: &SolverConfig,
    k_cycles: usize,
    foreground: Option<&Image<bool>>,
) -> Result<FrameSolution> {
    cfg.validate()?;
    let (w, h) = (stream.width(), stream.height());
    if thresholds.width() != w || thresholds.height() != h {
        return Err(Error::config("threshold maps do not match the stream size"));
    }
    if let Some(fg) = foreground {
        if fg.width() != w || fg.height() != h {
            return Err(Error::config(
                "foreground mask does not match the stream size",
            ));
        }
    }
    if k_cycles == 0 {
        return Err(Error::config("at least one cycle must be averaged"));
    }
    let in_foreground = |x: usize, y: usize| foreground.is_none_or(|fg| *fg.get(x, y));

    if stream.is_empty() {
        let outcomes = (0..w * h)
            .map(|i| {
                if in_foreground(i % w, i / w) {
                    PixelOutcome::Unsolved(UnsolvedReason::NoObservations)
                } else {
                    PixelOutcome::Background
                }
            })
            .collect();
        return Ok(FrameSolution {
            outcomes: Image::from_vec(w, h, outcomes)?,
        });
    }

    let period = stream
        .period()
        .ok_or_else(|| Error::config("stream has no complete cycle"))?;
    if stream.cycle_count() < k_cycles + 2 {
        return Err(Error::config(format!(
            "stream has {} cycles, {} are needed to average {}",
            stream.cycle_count(),
            k_cycles + 2,
            k_cycles
        )));
    }
    if (period - traj.period()).abs() > 1e-6 * traj.period() {
        return Err(Error::config(format!(
            "stream period {period} differs from trajectory period {}",
            traj.period()
        )));
    }

    let geometry = SampleGeometry::new(traj, cfg.samples);
    let starts = &stream.cycle_syncs()[1..=k_cycles];
    let trains = stream.per_pixel();
    let outcomes = trains
        .par_iter()
        .enumerate()
        .map(|(i, train)| {
            let (x, y) = (i % w, i / w);
            if !in_foreground(x, y) {
                return Ok(PixelOutcome::Background);
            }
            if thresholds.is_flagged(x, y) {
                return Ok(PixelOutcome::Unsolved(UnsolvedReason::FlaggedThreshold));
            }
            let (h_p, h_n) = thresholds.at(x, y);
            solve_pixel(train, h_p, h_n, period, starts, &geometry, cfg)
                .map_err(|e| e.at_pixel(x, y))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FrameSolution {
        outcomes: Image::from_vec(w, h, outcomes)?,
    })
}

fn solve_pixel(
    train: &[PixelEvent],
    h_p: f64,
    h_n: f64,
    period: f64,
    starts: &[f64],
    geometry: &SampleGeometry,
    cfg: &SolverConfig,
) -> Result<PixelOutcome> {
    let profiles = starts
        .iter()
        .map(|&s| reconstruct_cycle(train, h_p, h_n, period, s, cfg.samples))
        .collect::<Result<Vec<Profile>>>()?;
    let profile = average_profiles(&profiles)?;
    if profile.valid_count() == 0 {
        return Ok(PixelOutcome::Unsolved(UnsolvedReason::NoObservations));
    }
    let (t_top, t_bottom) = match find_peaks(&profile) {
        Ok(p) => p,
        Err(Error::DegenerateProfile(_) | Error::DegeneratePeaks(_)) => {
            return Ok(PixelOutcome::Unsolved(UnsolvedReason::Degenerate))
        }
        Err(e) => return Err(e),
    };
    let collapsed = mask_collapsed(t_top, t_bottom, period)?;
    let first = match solve_with_geometry(geometry, &profile, &collapsed, cfg, None) {
        Ok(r) => r,
        Err(Error::Unsolvable) => return Ok(PixelOutcome::Unsolved(UnsolvedReason::Unsolvable)),
        Err(e) => return Err(e),
    };
    let label = select_mask(first.cost, t_top, t_bottom, &cfg.mask, period);
    let mut last = first;
    if label != first.label {
        // A mask covering the whole cycle or no usable samples keeps stage 1.
        if let Ok(mask) = mask_for_label(label, t_top, t_bottom, &cfg.mask, period) {
            if let Ok(r) = solve_with_geometry(geometry, &profile, &mask, cfg, None) {
                last = SolveResult {
                    label,
                    stage: 2,
                    ..r
                };
            }
        }
    }
    Ok(PixelOutcome::Solved(PixelSolution { first, last }))
}

/// `q`-quantile (nearest rank) of the first-stage costs of solved pixels.
pub fn cost_percentile(frame: &FrameSolution, q: f64) -> Option<f64> {
    let mut costs: Vec<f64> = frame
        .outcomes
        .data()
        .iter()
        .filter_map(|o| o.solution().map(|s| s.first.cost))
        .collect();
    if costs.is_empty() || !(0.0..=1.0).contains(&q) {
        return None;
    }
    costs.sort_by(f64::total_cmp);
    let rank = ((q * costs.len() as f64).ceil() as usize).clamp(1, costs.len());
    Some(costs[rank - 1])
}

/// Rotates every normal about the viewing axis by `offset` radians.
pub fn apply_azimuth_offset(map: &NormalMap, offset: f64) -> NormalMap {
    map.map(|n| n.map(|n| n.rotate_azimuth(offset)))
}
