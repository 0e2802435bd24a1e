//! Angular error of normal maps against ground truth.

use crate::error::{Error, Result};
use crate::image::{Image, NormalMap, ScalarMap};

#[derive(Debug, Clone, PartialEq)]
pub struct MaeReport {
    /// Mean angular error in degrees over evaluated pixels; NaN if none.
    pub mae_deg: f64,
    /// Foreground pixels with a result.
    pub evaluated: usize,
    /// Foreground pixels without a result.
    pub sentinel: usize,
    /// Per-pixel error in degrees; NaN outside the foreground or without a result.
    pub error_map: ScalarMap,
}

pub fn angular_error_deg(
    a: &crate::geometry::SurfaceNormal,
    b: &crate::geometry::SurfaceNormal,
) -> f64 {
    a.vector()
        .dot(b.vector())
        .clamp(-1.0, 1.0)
        .acos()
        .to_degrees()
}

pub fn evaluate_mae(
    result: &NormalMap,
    truth: &NormalMap,
    foreground: &Image<bool>,
) -> Result<MaeReport> {
    if !result.same_shape(truth) || !result.same_shape(foreground) {
        return Err(Error::config(format!(
            "map sizes differ: result {}x{}, truth {}x{}, mask {}x{}",
            result.width(),
            result.height(),
            truth.width(),
            truth.height(),
            foreground.width(),
            foreground.height()
        )));
    }
    if !foreground.data().iter().any(|&f| f) {
        return Err(Error::EmptyMask);
    }
    let mut sum = 0.0;
    let mut evaluated = 0;
    let mut sentinel = 0;
    let errors = result
        .data()
        .iter()
        .zip(truth.data())
        .zip(foreground.data())
        .map(|((r, t), &fg)| {
            if !fg {
                return f64::NAN;
            }
            match (r, t) {
                (Some(r), Some(t)) => {
                    let e = angular_error_deg(r, t);
                    sum += e;
                    evaluated += 1;
                    e
                }
                (None, _) => {
                    sentinel += 1;
                    f64::NAN
                }
                (Some(_), None) => f64::NAN,
            }
        })
        .collect();
    Ok(MaeReport {
        mae_deg: if evaluated > 0 {
            sum / evaluated as f64
        } else {
            f64::NAN
        },
        evaluated,
        sentinel,
        error_map: Image::from_vec(result.width(), result.height(), errors)?,
    })
}

/// Foreground of a truth map: pixels that carry a normal.
pub fn foreground_of(truth: &NormalMap) -> Image<bool> {
    truth.map(Option::is_some)
}
