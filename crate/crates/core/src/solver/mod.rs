//! Normal estimation from event intensity profiles.

mod baseline;
mod fit;
mod ideal;
mod pipeline;

pub use baseline::{eventps_baseline, eventps_pixelwise};
pub use fit::{cost, solve_normal, solve_normal_traced, CostFunction};
pub use ideal::{closed_form_circular, ideal_eip, CircularClosedForm, SampleGeometry};
pub use pipeline::{
    apply_azimuth_offset, cost_percentile, solve_pixelwise, FrameSolution, PixelOutcome,
    PixelSolution, UnsolvedReason, LABEL_BACKGROUND, LABEL_UNSOLVED,
};

use crate::eip::DEFAULT_SAMPLES;
use crate::error::{Error, Result};
use crate::geometry::SurfaceNormal;
use crate::masks::{MaskConfig, MaskLabel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub grid_azimuth: usize,
    pub grid_zenith: usize,
    pub refine_iters: usize,
    /// Refinement stops once both angular steps fall below this, radians.
    pub refine_tol: f64,
    /// Offset light relative to the main light's power.
    pub offset_ratio: f64,
    /// Profile samples per cycle.
    pub samples: usize,
    pub mask: MaskConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            grid_azimuth: 36,
            grid_zenith: 18,
            refine_iters: 100,
            refine_tol: 1e-5,
            offset_ratio: 0.1,
            samples: DEFAULT_SAMPLES,
            mask: MaskConfig::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_azimuth < 1 || self.grid_zenith < 2 {
            return Err(Error::config(
                "grid needs >= 1 azimuth and >= 2 zenith steps",
            ));
        }
        if !(self.refine_tol > 0.0) {
            return Err(Error::config("refine_tol must be > 0"));
        }
        if !(self.offset_ratio >= 0.0) || !self.offset_ratio.is_finite() {
            return Err(Error::config("offset ratio must be finite and >= 0"));
        }
        if self.samples < crate::profile::MIN_SAMPLES {
            return Err(Error::config(format!(
                "profile needs at least {} samples",
                crate::profile::MIN_SAMPLES
            )));
        }
        self.mask.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveResult {
    pub normal: SurfaceNormal,
    pub cost: f64,
    pub label: MaskLabel,
    /// 1 for the collapsed-mask fit, 2 after a mask switch.
    pub stage: u8,
    /// Samples contributing to `cost`.
    pub valid_sample_count: usize,
}
