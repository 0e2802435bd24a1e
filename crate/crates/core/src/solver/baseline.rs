//! Null-space baseline: each consecutive event pair gives one linear
//! constraint `nᵀ(l(t_i) − e^{h_i} l(t_{i−1})) = 0`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::event::{EventStream, PixelEvent, Polarity};
use crate::geometry::{LightTrajectory, SurfaceNormal, Vec3};
use crate::image::{NormalMap, PixelThresholds};

/// Relative singular-value floor below which a direction counts as missing.
const RANK_TOLERANCE: f64 = 1e-10;

pub fn eventps_baseline(
    events: &[PixelEvent],
    h_p: f64,
    h_n: f64,
    traj: &LightTrajectory,
) -> Result<SurfaceNormal> {
    let rows: Vec<Vec3> = events
        .windows(2)
        .filter(|w| w[1].t > w[0].t)
        .map(|w| {
            let h = match w[1].polarity {
                Polarity::Positive => h_p,
                Polarity::Negative => h_n,
            };
            traj.direction(w[1].t) - h.exp() * traj.direction(w[0].t)
        })
        .collect();
    null_direction(&rows)
}

/// Unit `n` minimizing `‖R n‖`, sign-fixed to `n_z ≥ 0`.
pub(crate) fn null_direction(rows: &[Vec3]) -> Result<SurfaceNormal> {
    if rows.len() < 2 {
        return Err(Error::AmbiguousNormal(format!(
            "{} constraint rows",
            rows.len()
        )));
    }
    // Zero padding keeps a full 3×3 right factor for two-row systems.
    let m = rows.len().max(3);
    let r = DMatrix::from_fn(m, 3, |i, j| rows.get(i).map_or(0.0, |row| row[j]));
    let svd = r.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::AmbiguousNormal("SVD did not converge".into()))?;
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    if !(sv[order[0]] > 0.0) || sv[order[1]] <= RANK_TOLERANCE * sv[order[0]] {
        return Err(Error::AmbiguousNormal(
            "constraint matrix has rank < 2".into(),
        ));
    }
    let row = v_t.row(order[2]);
    let v = Vec3::new(row[0], row[1], row[2]);
    let v = if v.z < 0.0 { -v } else { v };
    SurfaceNormal::new(v)
}

/// Runs the baseline on every pixel's full event train. Pixels where it fails
/// are `None`.
pub fn eventps_pixelwise(
    stream: &EventStream,
    thresholds: &PixelThresholds,
    traj: &LightTrajectory,
) -> Result<NormalMap> {
    let (w, h) = (stream.width(), stream.height());
    if thresholds.width() != w || thresholds.height() != h {
        return Err(Error::config("threshold maps do not match the stream size"));
    }
    let normals = stream
        .per_pixel()
        .par_iter()
        .enumerate()
        .map(|(i, train)| {
            let (x, y) = (i % w, i / w);
            if thresholds.is_flagged(x, y) {
                return None;
            }
            let (h_p, h_n) = thresholds.at(x, y);
            eventps_baseline(train, h_p, h_n, traj).ok()
        })
        .collect();
    crate::image::Image::from_vec(w, h, normals)
}
