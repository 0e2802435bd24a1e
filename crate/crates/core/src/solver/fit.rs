//! Least-squares fit of a normal to a reconstructed profile.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::{LightTrajectory, SurfaceNormal, Vec3};
use crate::masks::MaskLabel;
use crate::profile::{Profile, TemporalMask};

use super::ideal::SampleGeometry;
use super::{SolveResult, SolverConfig};

/// Mean squared residual over the samples that are valid, unmasked and
/// either lit or covered by the offset light.
pub struct CostFunction<'a> {
    geometry: &'a SampleGeometry,
    values: &'a [f64],
    support: Vec<usize>,
    offset_ratio: f64,
}

impl<'a> CostFunction<'a> {
    pub fn new(
        geometry: &'a SampleGeometry,
        profile: &'a Profile,
        mask: &TemporalMask,
        offset_ratio: f64,
    ) -> Result<Self> {
        if geometry.len() != profile.len() {
            return Err(Error::config(
                "profile and sample geometry differ in length",
            ));
        }
        if (geometry.period() - profile.period()).abs() > 1e-12 * profile.period() {
            return Err(Error::config("profile period differs from the trajectory"));
        }
        let inside = mask.sample(profile.len());
        let support = (0..profile.len())
            .filter(|&i| profile.is_valid(i) && inside[i])
            .collect();
        Ok(CostFunction {
            geometry,
            values: profile.values(),
            support,
            offset_ratio,
        })
    }

    /// `(cost, M)`, or `None` when no sample is usable for `n`.
    pub fn eval(&self, n: &Vec3) -> Option<(f64, usize)> {
        let mut sum = 0.0;
        let mut count = 0usize;
        for &i in &self.support {
            if let Some(p) = self.geometry.ideal(n, i, self.offset_ratio) {
                let r = p - self.values[i];
                sum += r * r;
                count += 1;
            }
        }
        (count > 0).then(|| (sum / count as f64, count))
    }

    pub fn eval_angles(&self, zenith: f64, azimuth: f64) -> Option<(f64, usize)> {
        self.eval(SurfaceNormal::from_angles(zenith, azimuth).vector())
    }
}

/// Cost of normal `n` against `profile` under `mask`.
pub fn cost(
    normal: &SurfaceNormal,
    profile: &Profile,
    mask: &TemporalMask,
    traj: &LightTrajectory,
    offset_ratio: f64,
) -> Result<f64> {
    let geometry = SampleGeometry::new(traj, profile.len());
    let f = CostFunction::new(&geometry, profile, mask, offset_ratio)?;
    f.eval(normal.vector())
        .map(|(c, _)| c)
        .ok_or(Error::EmptySupport)
}

/// Fits a normal with a single mask: exhaustive grid, then coordinate search.
pub fn solve_normal(
    profile: &Profile,
    mask: &TemporalMask,
    traj: &LightTrajectory,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    let geometry = SampleGeometry::new(traj, profile.len());
    solve_with_geometry(&geometry, profile, mask, cfg, None)
}

/// As [`solve_normal`], recording the cost after each accepted refinement move.
pub fn solve_normal_traced(
    profile: &Profile,
    mask: &TemporalMask,
    traj: &LightTrajectory,
    cfg: &SolverConfig,
) -> Result<(SolveResult, Vec<f64>)> {
    let geometry = SampleGeometry::new(traj, profile.len());
    let mut trace = Vec::new();
    let r = solve_with_geometry(&geometry, profile, mask, cfg, Some(&mut trace))?;
    Ok((r, trace))
}

pub(crate) fn solve_with_geometry(
    geometry: &SampleGeometry,
    profile: &Profile,
    mask: &TemporalMask,
    cfg: &SolverConfig,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<SolveResult> {
    cfg.validate()?;
    let f = CostFunction::new(geometry, profile, mask, cfg.offset_ratio)?;
    let az_step = TAU / cfg.grid_azimuth as f64;
    let zen_step = FRAC_PI_2 / (cfg.grid_zenith - 1) as f64;

    let mut best: Option<(f64, f64, f64, usize)> = None;
    let mut first_ring: Option<(f64, f64)> = None;
    for iz in 0..cfg.grid_zenith {
        let zen = iz as f64 * zen_step;
        for ia in 0..cfg.grid_azimuth {
            let az = ia as f64 * az_step;
            if let Some((c, m)) = f.eval_angles(zen, az) {
                if best.is_none_or(|b| c < b.2) {
                    best = Some((zen, az, c, m));
                }
                if iz == 1 && first_ring.is_none_or(|r| c < r.1) {
                    first_ring = Some((az, c));
                }
            }
        }
    }
    let (mut zen, mut az, mut best_cost, mut support) = best.ok_or(Error::Unsolvable)?;
    // azimuth is undefined at the pole; head towards the best neighbouring cell
    if zen == 0.0 {
        if let Some((a, _)) = first_ring {
            az = a;
        }
    }

    let (mut da, mut dz) = (az_step, zen_step);
    for _ in 0..cfg.refine_iters {
        if da < cfg.refine_tol && dz < cfg.refine_tol {
            break;
        }
        let candidates = [
            (zen, az + da),
            (zen, az - da),
            ((zen + dz).min(FRAC_PI_2), az),
            // stepping past the pole continues on the opposite meridian
            if zen >= dz {
                (zen - dz, az)
            } else {
                (dz - zen, az + PI)
            },
        ];
        let mut step: Option<(f64, f64, f64, usize)> = None;
        for (z, a) in candidates {
            if let Some((c, m)) = f.eval_angles(z, a) {
                if c < best_cost && step.is_none_or(|s| c < s.2) {
                    step = Some((z, a, c, m));
                }
            }
        }
        match step {
            Some((z, a, c, m)) => {
                zen = z;
                az = a;
                best_cost = c;
                support = m;
                if let Some(t) = trace.as_deref_mut() {
                    t.push(c);
                }
            }
            None => {
                da *= 0.5;
                dz *= 0.5;
            }
        }
    }

    Ok(SolveResult {
        normal: SurfaceNormal::from_angles(zen, az.rem_euclid(TAU)),
        cost: best_cost,
        label: MaskLabel::Collapsed,
        stage: 1,
        valid_sample_count: support,
    })
}
