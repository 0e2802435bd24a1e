//! Photometric stereo from event-camera intensity profiles under a moving
//! point light.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calib;
pub mod circuit;
pub mod eip;
pub mod error;
pub mod eval;
pub mod event;
pub mod geometry;
pub mod image;
pub mod io;
pub mod masks;
pub mod profile;
pub mod scene;
pub mod solver;

pub use error::{Error, Result};
pub use event::{Event, EventStream, PixelEvent, Polarity};
pub use geometry::{LightTrajectory, SurfaceNormal, Vec3};
pub use image::{Image, NormalMap, PixelThresholds, ScalarMap};
pub use masks::{MaskConfig, MaskLabel};
pub use profile::{Profile, TemporalMask};
pub use scene::{ScenePreset, SceneSpec};
pub use solver::{SolveResult, SolverConfig};
