//! Light trajectories and surface normals.
//!
//! Coordinates are camera-centred: x to the right, y up, z towards the
//! camera. The camera looks along −z, so visible normals have `z > 0`.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Unit surface normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceNormal(Vec3);

impl SurfaceNormal {
    pub const UP: SurfaceNormal = SurfaceNormal(Vector3::new(0.0, 0.0, 1.0));

    /// Normalizes `v`. Fails on zero or non-finite input.
    pub fn new(v: Vec3) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::domain(format!("cannot normalize {v:?}")));
        }
        Ok(SurfaceNormal(v / norm))
    }

    /// Builds a normal from its zenith angle (from +z) and azimuth (about z, from +x).
    pub fn from_angles(zenith: f64, azimuth: f64) -> Self {
        let (sz, cz) = zenith.sin_cos();
        let (sa, ca) = azimuth.sin_cos();
        SurfaceNormal(Vector3::new(sz * ca, sz * sa, cz))
    }

    pub fn vector(&self) -> &Vec3 {
        &self.0
    }

    pub fn zenith(&self) -> f64 {
        self.0.z.clamp(-1.0, 1.0).acos()
    }

    /// Azimuth in `[0, 2π)`.
    pub fn azimuth(&self) -> f64 {
        let a = self.0.y.atan2(self.0.x);
        if a < 0.0 {
            a + TAU
        } else {
            a
        }
    }

    /// Angle between two normals in radians.
    pub fn angle_to(&self, other: &SurfaceNormal) -> f64 {
        self.0.dot(&other.0).clamp(-1.0, 1.0).acos()
    }

    /// Rotates about the camera axis by `offset` radians.
    pub fn rotate_azimuth(&self, offset: f64) -> Self {
        let (s, c) = offset.sin_cos();
        let v = self.0;
        SurfaceNormal(Vector3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z))
    }
}

/// A tabulated direction sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub direction: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
enum TrajectoryKind {
    Circular { zenith: f64, phase: f64 },
    Tabulated { samples: Vec<TrajectorySample> },
}

/// Periodic path of a distant light on the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct LightTrajectory {
    period: f64,
    kind: TrajectoryKind,
}

impl LightTrajectory {
    /// Light circling the camera axis at a fixed zenith angle.
    ///
    /// The zenith must lie strictly inside `(0, π/2)`: at `π/2` the path is
    /// coplanar with the image plane and normals are no longer identifiable.
    pub fn circular(zenith: f64, period: f64, phase: f64) -> Result<Self> {
        if !(zenith > 0.0 && zenith < PI / 2.0) {
            return Err(Error::config(format!(
                "light zenith {zenith} rad outside (0, pi/2)"
            )));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::config(format!("period {period} must be positive")));
        }
        if !phase.is_finite() {
            return Err(Error::config("phase must be finite"));
        }
        Ok(LightTrajectory {
            period,
            kind: TrajectoryKind::Circular { zenith, phase },
        })
    }

    /// Piecewise great-circle path through `samples`, wrapping from the last
    /// sample back to the first after one period.
    pub fn tabulated(period: f64, samples: Vec<TrajectorySample>) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::config(format!(
                "tabulated trajectory needs at least 3 samples, got {}",
                samples.len()
            )));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::config(format!("period {period} must be positive")));
        }
        let mut normalized = Vec::with_capacity(samples.len());
        for (i, s) in samples.iter().enumerate() {
            if !(s.t >= 0.0 && s.t < period) {
                return Err(Error::config(format!(
                    "sample {i} time {} outside [0, T)",
                    s.t
                )));
            }
            if i > 0 && s.t <= samples[i - 1].t {
                return Err(Error::config(format!("sample {i} time not increasing")));
            }
            let n = s.direction.norm();
            if !(n > 0.0 && n.is_finite()) {
                return Err(Error::config(format!("sample {i} direction is degenerate")));
            }
            normalized.push(TrajectorySample {
                t: s.t,
                direction: s.direction / n,
            });
        }
        Ok(LightTrajectory {
            period,
            kind: TrajectoryKind::Tabulated {
                samples: normalized,
            },
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Zenith angle for circular trajectories.
    pub fn circular_zenith(&self) -> Option<f64> {
        match self.kind {
            TrajectoryKind::Circular { zenith, .. } => Some(zenith),
            TrajectoryKind::Tabulated { .. } => None,
        }
    }

    /// Initial azimuth for circular trajectories.
    pub fn circular_phase(&self) -> Option<f64> {
        match self.kind {
            TrajectoryKind::Circular { phase, .. } => Some(phase),
            TrajectoryKind::Tabulated { .. } => None,
        }
    }

    fn angular_rate(&self) -> f64 {
        TAU / self.period
    }

    /// Unit light direction at time `t`.
    pub fn direction(&self, t: f64) -> Vec3 {
        match &self.kind {
            TrajectoryKind::Circular { zenith, phase } => {
                let (sz, cz) = zenith.sin_cos();
                let (s, c) = (self.angular_rate() * t + phase).sin_cos();
                Vector3::new(sz * c, sz * s, cz)
            }
            TrajectoryKind::Tabulated { samples } => self.interpolate(samples, t),
        }
    }

    /// Time derivative of [`direction`](Self::direction).
    pub fn derivative(&self, t: f64) -> Vec3 {
        match &self.kind {
            TrajectoryKind::Circular { zenith, phase } => {
                let w = self.angular_rate();
                let sz = zenith.sin();
                let (s, c) = (w * t + phase).sin_cos();
                Vector3::new(-sz * w * s, sz * w * c, 0.0)
            }
            TrajectoryKind::Tabulated { samples } => {
                let h = 1e-6 * self.period;
                (self.interpolate(samples, t + h) - self.interpolate(samples, t - h)) / (2.0 * h)
            }
        }
    }

    fn interpolate(&self, samples: &[TrajectorySample], t: f64) -> Vec3 {
        let u = t.rem_euclid(self.period);
        // index of the last sample at or before u; wraps to the final sample
        let k = match samples.partition_point(|s| s.t <= u) {
            0 => samples.len() - 1,
            k => k - 1,
        };
        let a = &samples[k];
        let (b, tb) = if k + 1 < samples.len() {
            (&samples[k + 1], samples[k + 1].t)
        } else {
            (&samples[0], samples[0].t + self.period)
        };
        let ta = if u < a.t { a.t - self.period } else { a.t };
        let frac = (u - ta) / (tb - ta);
        slerp(&a.direction, &b.direction, frac)
    }
}

fn slerp(a: &Vec3, b: &Vec3, frac: f64) -> Vec3 {
    let cos = a.dot(b).clamp(-1.0, 1.0);
    let angle = cos.acos();
    if angle < 1e-12 {
        return (a + (b - a) * frac).normalize();
    }
    let s = angle.sin();
    let v = a * (((1.0 - frac) * angle).sin() / s) + b * ((frac * angle).sin() / s);
    v.normalize()
}
