//! Flat `key = value` run configuration. `#` starts a comment. Every key is
//! required and unknown or repeated keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::circuit::CircuitConfig;
use crate::error::{Error, Result};
use crate::geometry::LightTrajectory;
use crate::image::PixelThresholds;
use crate::masks::MaskConfig;
use crate::scene::ScenePreset;
use crate::solver::SolverConfig;

#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdSource {
    /// `threshold_positive` / `threshold_negative` at every pixel.
    Uniform,
    /// Calibrated maps `<prefix>.pos.pfm` and `<prefix>.neg.pfm`.
    Files(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub light_zenith_deg: f64,
    pub period: f64,
    /// Light azimuth at t = 0, radians.
    pub phase: f64,

    pub scene: ScenePreset,
    pub resolution: usize,
    pub light_power: f64,
    pub offset_light: f64,

    pub threshold_source: ThresholdSource,
    pub threshold_positive: f64,
    pub threshold_negative: f64,
    pub quantum_efficiency: f64,
    pub noise_sigma: f64,
    pub logamp_floor: f64,
    pub dead_time: f64,
    pub seed: u64,

    pub grid_azimuth: usize,
    pub grid_zenith: usize,
    pub refine_iters: usize,
    pub refine_tol: f64,
    pub offset_ratio: f64,
    pub samples: usize,
    /// Post-solve rotation about the viewing axis, radians.
    pub azimuth_offset: f64,

    pub specular_margin: f64,
    pub cast_margin: f64,
    pub cost_threshold: f64,
    pub peak_separation: f64,

    pub cycles: usize,
    pub average_cycles: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let solver = SolverConfig::default();
        RunConfig {
            light_zenith_deg: 45.0,
            period: 1.0,
            phase: 0.0,
            scene: ScenePreset::Diffuse,
            resolution: 64,
            light_power: 1.0,
            offset_light: 0.1,
            threshold_source: ThresholdSource::Uniform,
            threshold_positive: 0.05,
            threshold_negative: -0.05,
            quantum_efficiency: 1.0,
            noise_sigma: 0.0,
            logamp_floor: 0.0,
            dead_time: 0.0,
            seed: 0,
            grid_azimuth: solver.grid_azimuth,
            grid_zenith: solver.grid_zenith,
            refine_iters: solver.refine_iters,
            refine_tol: solver.refine_tol,
            offset_ratio: solver.offset_ratio,
            samples: solver.samples,
            azimuth_offset: 0.0,
            specular_margin: solver.mask.specular_margin,
            cast_margin: solver.mask.cast_margin,
            cost_threshold: solver.mask.cost_threshold,
            peak_separation: solver.mask.peak_separation,
            cycles: 3,
            average_cycles: 1,
        }
    }
}

struct Entries {
    source: String,
    map: BTreeMap<String, (String, usize)>,
}

impl Entries {
    fn take<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let (raw, line) = self
            .map
            .remove(key)
            .ok_or_else(|| Error::parse(self.source.clone(), format!("missing key {key:?}")))?;
        raw.parse().map_err(|_| {
            Error::parse(
                format!("{}:{line}", self.source),
                format!("invalid value {raw:?} for {key:?}"),
            )
        })
    }
}

impl RunConfig {
    /// Parses config text; `base` resolves relative threshold paths.
    pub fn parse(text: &str, source: &str, base: Option<&Path>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = format!("{source}:{}", i + 1);
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(at.clone(), "expected key = value"))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(Error::parse(at, format!("unknown key {k:?}")));
            }
            if map.insert(k.to_string(), (v.to_string(), i + 1)).is_some() {
                return Err(Error::parse(at, format!("repeated key {k:?}")));
            }
        }
        let mut missing: Vec<&str> = KEYS
            .iter()
            .copied()
            .filter(|k| !map.contains_key(*k))
            .collect();
        if !missing.is_empty() {
            missing.sort_unstable();
            return Err(Error::parse(
                source.to_string(),
                format!("missing keys: {}", missing.join(", ")),
            ));
        }
        let mut e = Entries {
            source: source.to_string(),
            map,
        };
        let threshold_source = match e.take::<String>("threshold_source")?.as_str() {
            "uniform" => ThresholdSource::Uniform,
            p => {
                let p = PathBuf::from(p);
                ThresholdSource::Files(match base {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p,
                })
            }
        };
        let cfg = RunConfig {
            light_zenith_deg: e.take("light_zenith_deg")?,
            period: e.take("period")?,
            phase: e.take("phase")?,
            scene: e.take("scene")?,
            resolution: e.take("resolution")?,
            light_power: e.take("light_power")?,
            offset_light: e.take("offset_light")?,
            threshold_source,
            threshold_positive: e.take("threshold_positive")?,
            threshold_negative: e.take("threshold_negative")?,
            quantum_efficiency: e.take("quantum_efficiency")?,
            noise_sigma: e.take("noise_sigma")?,
            logamp_floor: e.take("logamp_floor")?,
            dead_time: e.take("dead_time")?,
            seed: e.take("seed")?,
            grid_azimuth: e.take("grid_azimuth")?,
            grid_zenith: e.take("grid_zenith")?,
            refine_iters: e.take("refine_iters")?,
            refine_tol: e.take("refine_tol")?,
            offset_ratio: e.take("offset_ratio")?,
            samples: e.take("samples")?,
            azimuth_offset: e.take("azimuth_offset")?,
            specular_margin: e.take("specular_margin")?,
            cast_margin: e.take("cast_margin")?,
            cost_threshold: e.take("cost_threshold")?,
            peak_separation: e.take("peak_separation")?,
            cycles: e.take("cycles")?,
            average_cycles: e.take("average_cycles")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string(), path.parent())
    }

    pub fn validate(&self) -> Result<()> {
        self.trajectory()?;
        self.solver_config().validate()?;
        if self.resolution < 16 {
            return Err(Error::config("resolution must be >= 16"));
        }
        if self.cycles < self.average_cycles + 2 {
            return Err(Error::config(format!(
                "cycles = {} cannot supply average_cycles = {} plus the two discarded cycles",
                self.cycles, self.average_cycles
            )));
        }
        if self.average_cycles < 1 {
            return Err(Error::config("average_cycles must be >= 1"));
        }
        if !(self.azimuth_offset.abs() < std::f64::consts::PI) {
            return Err(Error::config("azimuth_offset must lie in (-pi, pi)"));
        }
        if !(self.light_power > 0.0) || !(self.offset_light >= 0.0) {
            return Err(Error::config(
                "light power must be > 0 and offset light >= 0",
            ));
        }
        let thresholds = self.uniform_thresholds(1, 1)?;
        self.circuit_config(thresholds).validate()
    }

    pub fn trajectory(&self) -> Result<LightTrajectory> {
        LightTrajectory::circular(self.light_zenith_deg.to_radians(), self.period, self.phase)
    }

    pub fn uniform_thresholds(&self, width: usize, height: usize) -> Result<PixelThresholds> {
        PixelThresholds::uniform(
            width,
            height,
            self.threshold_positive,
            self.threshold_negative,
        )
    }

    pub fn circuit_config(&self, thresholds: PixelThresholds) -> CircuitConfig {
        CircuitConfig {
            quantum_efficiency: self.quantum_efficiency,
            thresholds,
            noise_sigma: self.noise_sigma,
            logamp_floor: self.logamp_floor,
            dead_time: self.dead_time,
            rng_seed: self.seed,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            grid_azimuth: self.grid_azimuth,
            grid_zenith: self.grid_zenith,
            refine_iters: self.refine_iters,
            refine_tol: self.refine_tol,
            offset_ratio: self.offset_ratio,
            samples: self.samples,
            mask: MaskConfig {
                specular_margin: self.specular_margin,
                cast_margin: self.cast_margin,
                cost_threshold: self.cost_threshold,
                peak_separation: self.peak_separation,
            },
        }
    }
}

const KEYS: [&str; 28] = [
    "light_zenith_deg",
    "period",
    "phase",
    "scene",
    "resolution",
    "light_power",
    "offset_light",
    "threshold_source",
    "threshold_positive",
    "threshold_negative",
    "quantum_efficiency",
    "noise_sigma",
    "logamp_floor",
    "dead_time",
    "seed",
    "grid_azimuth",
    "grid_zenith",
    "refine_iters",
    "refine_tol",
    "offset_ratio",
    "samples",
    "azimuth_offset",
    "specular_margin",
    "cast_margin",
    "cost_threshold",
    "peak_separation",
    "cycles",
    "average_cycles",
];

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let source = match &self.threshold_source {
            ThresholdSource::Uniform => "uniform".to_string(),
            ThresholdSource::Files(p) => p.display().to_string(),
        };
        writeln!(f, "# light trajectory")?;
        writeln!(f, "light_zenith_deg = {}", self.light_zenith_deg)?;
        writeln!(f, "period = {}", self.period)?;
        writeln!(f, "phase = {}", self.phase)?;
        writeln!(f, "\n# scene")?;
        writeln!(f, "scene = {}", self.scene)?;
        writeln!(f, "resolution = {}", self.resolution)?;
        writeln!(f, "light_power = {}", self.light_power)?;
        writeln!(f, "offset_light = {}", self.offset_light)?;
        writeln!(f, "\n# pixel circuit")?;
        writeln!(f, "threshold_source = {source}")?;
        writeln!(f, "threshold_positive = {}", self.threshold_positive)?;
        writeln!(f, "threshold_negative = {}", self.threshold_negative)?;
        writeln!(f, "quantum_efficiency = {}", self.quantum_efficiency)?;
        writeln!(f, "noise_sigma = {}", self.noise_sigma)?;
        writeln!(f, "logamp_floor = {}", self.logamp_floor)?;
        writeln!(f, "dead_time = {}", self.dead_time)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "\n# solver")?;
        writeln!(f, "grid_azimuth = {}", self.grid_azimuth)?;
        writeln!(f, "grid_zenith = {}", self.grid_zenith)?;
        writeln!(f, "refine_iters = {}", self.refine_iters)?;
        writeln!(f, "refine_tol = {}", self.refine_tol)?;
        writeln!(f, "offset_ratio = {}", self.offset_ratio)?;
        writeln!(f, "samples = {}", self.samples)?;
        writeln!(f, "azimuth_offset = {}", self.azimuth_offset)?;
        writeln!(f, "\n# masks")?;
        writeln!(f, "specular_margin = {}", self.specular_margin)?;
        writeln!(f, "cast_margin = {}", self.cast_margin)?;
        writeln!(f, "cost_threshold = {}", self.cost_threshold)?;
        writeln!(f, "peak_separation = {}", self.peak_separation)?;
        writeln!(f, "\n# cycles")?;
        writeln!(f, "cycles = {}", self.cycles)?;
        writeln!(f, "average_cycles = {}", self.average_cycles)
    }
}
