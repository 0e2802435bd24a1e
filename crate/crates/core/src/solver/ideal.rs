//! Ideal profiles predicted by a hypothesized normal.

use crate::error::{Error, Result};
use crate::geometry::{LightTrajectory, SurfaceNormal, Vec3};

/// Ideal `d(ln L)/dt` for normal `n` at time `t`.
///
/// `offset_ratio` is the offset light in units of the main light's power.
/// In attached shadow the radiance is constant, so the profile is 0 when an
/// offset is present and undefined otherwise.
pub fn ideal_eip(
    normal: &SurfaceNormal,
    traj: &LightTrajectory,
    offset_ratio: f64,
    t: f64,
) -> Result<f64> {
    eval(
        normal.vector(),
        &traj.direction(t),
        &traj.derivative(t),
        offset_ratio,
    )
    .ok_or_else(|| {
        Error::domain(format!(
            "normal is in attached shadow at t = {t} with no offset light"
        ))
    })
}

#[inline]
pub(crate) fn eval(n: &Vec3, light: &Vec3, dlight: &Vec3, offset_ratio: f64) -> Option<f64> {
    let shading = n.dot(light);
    if shading > 0.0 {
        Some(n.dot(dlight) / (shading + offset_ratio))
    } else if offset_ratio > 0.0 {
        Some(0.0)
    } else {
        None
    }
}

/// Closed form of the ideal profile under a circular trajectory:
/// `nᵀl = A cos(ωt + φ0 − φn) + B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularClosedForm {
    /// `sin θn · sin θl`.
    pub a: f64,
    /// `cos θn · cos θl`.
    pub b: f64,
    pub omega: f64,
    /// `φ0 − φn`.
    pub phase: f64,
}

impl CircularClosedForm {
    pub fn shading(&self, t: f64) -> f64 {
        self.a * (self.omega * t + self.phase).cos() + self.b
    }

    pub fn shading_rate(&self, t: f64) -> f64 {
        -self.a * self.omega * (self.omega * t + self.phase).sin()
    }

    /// Profile value, `None` in attached shadow without offset light.
    pub fn profile(&self, t: f64, offset_ratio: f64) -> Option<f64> {
        let s = self.shading(t);
        if s > 0.0 {
            Some(self.shading_rate(t) / (s + offset_ratio))
        } else if offset_ratio > 0.0 {
            Some(0.0)
        } else {
            None
        }
    }
}

/// Closed form for a normal at zenith `theta_n` and azimuth `phi_n`; `None`
/// for tabulated trajectories.
pub fn closed_form_circular(
    theta_n: f64,
    phi_n: f64,
    traj: &LightTrajectory,
) -> Option<CircularClosedForm> {
    let zenith = traj.circular_zenith()?;
    let phase0 = traj.circular_phase()?;
    Some(CircularClosedForm {
        a: theta_n.sin() * zenith.sin(),
        b: theta_n.cos() * zenith.cos(),
        omega: std::f64::consts::TAU / traj.period(),
        phase: phase0 - phi_n,
    })
}

/// Light direction and its derivative at each profile sample time.
#[derive(Debug, Clone)]
pub struct SampleGeometry {
    period: f64,
    light: Vec<Vec3>,
    dlight: Vec<Vec3>,
}

impl SampleGeometry {
    pub fn new(traj: &LightTrajectory, samples: usize) -> Self {
        let step = traj.period() / samples as f64;
        let times = (0..samples).map(|i| i as f64 * step);
        SampleGeometry {
            period: traj.period(),
            light: times.clone().map(|t| traj.direction(t)).collect(),
            dlight: times.map(|t| traj.derivative(t)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.light.len()
    }

    pub fn is_empty(&self) -> bool {
        self.light.is_empty()
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn light(&self, i: usize) -> &Vec3 {
        &self.light[i]
    }

    #[inline]
    pub fn ideal(&self, n: &Vec3, i: usize, offset_ratio: f64) -> Option<f64> {
        eval(n, &self.light[i], &self.dlight[i], offset_ratio)
    }
}
