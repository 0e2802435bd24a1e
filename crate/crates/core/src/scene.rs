//! Synthetic ground-truth scenes and their time-varying radiance.

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::{LightTrajectory, SurfaceNormal, Vec3};
use crate::image::{Image, NormalMap, ScalarMap};

/// Viewing direction under the orthographic camera.
pub const VIEW: Vec3 = Vector3::new(0.0, 0.0, 1.0);

/// Blinn-style specular lobe parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub specular_strength: f64,
    pub specular_exponent: f64,
}

impl Material {
    pub const DIFFUSE: Material = Material {
        specular_strength: 0.0,
        specular_exponent: 1.0,
    };

    pub fn new(specular_strength: f64, specular_exponent: f64) -> Result<Self> {
        if !(specular_strength >= 0.0) || !(specular_exponent >= 1.0) {
            return Err(Error::config(format!(
                "material needs k_s >= 0 and alpha >= 1, got ({specular_strength}, {specular_exponent})"
            )));
        }
        Ok(Material {
            specular_strength,
            specular_exponent,
        })
    }
}

/// A vertical cylinder blocking the light; extends downward without bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cylinder {
    /// Axis position in scene coordinates (pixel units).
    pub center: (f64, f64),
    pub radius: f64,
    /// Height of the top cap above the sphere centre plane.
    pub height: f64,
}

impl Cylinder {
    /// Whether the ray `origin + s·dir`, `s > 0`, hits the cylinder.
    pub fn blocks(&self, origin: &Vec3, dir: &Vec3) -> bool {
        let ox = origin.x - self.center.0;
        let oy = origin.y - self.center.1;
        let a = dir.x * dir.x + dir.y * dir.y;
        if a < 1e-15 {
            return false;
        }
        let b = 2.0 * (ox * dir.x + oy * dir.y);
        let c = ox * ox + oy * oy - self.radius * self.radius;
        let disc = b * b - 4.0 * a * c;
        if disc <= 0.0 {
            return false;
        }
        let root = disc.sqrt();
        let s_out = (-b + root) / (2.0 * a);
        if s_out <= 0.0 {
            return false;
        }
        let s_in = ((-b - root) / (2.0 * a)).max(0.0);
        // the ray only climbs when dir.z > 0, so the entry point is its lowest
        origin.z + s_in * dir.z <= self.height
    }
}

/// One foreground pixel of a scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub normal: SurfaceNormal,
    pub albedo: f64,
    pub material: Material,
    /// Surface point in scene coordinates, used for shadow rays.
    pub position: Vec3,
}

/// Ground truth for simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    width: usize,
    height: usize,
    points: Vec<Option<SurfacePoint>>,
    light_power: f64,
    offset_light: f64,
    occluders: Vec<Cylinder>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenePreset {
    Diffuse,
    Glossy,
    Pole,
    TwoTone,
}

impl ScenePreset {
    pub const ALL: [ScenePreset; 4] = [
        ScenePreset::Diffuse,
        ScenePreset::Glossy,
        ScenePreset::Pole,
        ScenePreset::TwoTone,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenePreset::Diffuse => "diffuse",
            ScenePreset::Glossy => "glossy",
            ScenePreset::Pole => "pole",
            ScenePreset::TwoTone => "two-tone",
        }
    }
}

impl fmt::Display for ScenePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenePreset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::config(format!("unknown scene preset '{s}'")))
    }
}

/// Glossy preset lobe. Sharp enough that the highlight, not the attached
/// shadow boundary, dominates the profile of every highlight pixel.
pub const GLOSSY_MATERIAL: Material = Material {
    specular_strength: 1.0,
    specular_exponent: 1024.0,
};

/// Albedos of the two-tone preset (top half, bottom half).
pub const TWO_TONE_ALBEDO: (f64, f64) = (0.9, 0.4);

/// Radius in pixels of the sphere rendered at `resolution`.
pub fn sphere_radius(resolution: usize) -> f64 {
    resolution as f64 / 2.0 - 2.0
}

/// Scene coordinates of pixel `(x, y)`: x right, y up, origin at the image centre.
pub fn pixel_to_scene(x: usize, y: usize, width: usize, height: usize) -> (f64, f64) {
    (
        x as f64 - (width / 2) as f64,
        (height / 2) as f64 - y as f64,
    )
}

/// Orthographic sphere filling the image, with the material of `preset`.
pub fn make_sphere_scene(resolution: usize, preset: ScenePreset) -> Result<SceneSpec> {
    if resolution < 16 {
        return Err(Error::config(format!(
            "resolution {resolution} below the minimum of 16"
        )));
    }
    let radius = sphere_radius(resolution);
    let material = match preset {
        ScenePreset::Glossy => GLOSSY_MATERIAL,
        _ => Material::DIFFUSE,
    };
    let mut points = Vec::with_capacity(resolution * resolution);
    for y in 0..resolution {
        for x in 0..resolution {
            let (sx, sy) = pixel_to_scene(x, y, resolution, resolution);
            let r2 = (sx * sx + sy * sy) / (radius * radius);
            if r2 >= 1.0 {
                points.push(None);
                continue;
            }
            let nz = (1.0 - r2).sqrt();
            let normal = SurfaceNormal::new(Vector3::new(sx / radius, sy / radius, nz))?;
            let albedo = match preset {
                ScenePreset::TwoTone if y < resolution / 2 => TWO_TONE_ALBEDO.0,
                ScenePreset::TwoTone => TWO_TONE_ALBEDO.1,
                _ => 1.0,
            };
            points.push(Some(SurfacePoint {
                normal,
                albedo,
                material,
                position: Vector3::new(sx, sy, radius * nz),
            }));
        }
    }
    let occluders = match preset {
        ScenePreset::Pole => {
            let pole_radius = 0.12 * radius;
            let dist = radius + pole_radius + 1.0;
            let dir = std::f64::consts::FRAC_1_SQRT_2;
            vec![Cylinder {
                center: (dist * dir, dist * dir),
                radius: pole_radius,
                height: 2.5 * radius,
            }]
        }
        _ => Vec::new(),
    };
    Ok(SceneSpec {
        width: resolution,
        height: resolution,
        points,
        light_power: 1.0,
        offset_light: 0.0,
        occluders,
    })
}

impl SceneSpec {
    /// Builds a scene from explicit per-pixel points.
    pub fn new(
        width: usize,
        height: usize,
        points: Vec<Option<SurfacePoint>>,
        light_power: f64,
        offset_light: f64,
        occluders: Vec<Cylinder>,
    ) -> Result<Self> {
        if points.len() != width * height {
            return Err(Error::config("point count does not match scene size"));
        }
        if !(light_power > 0.0) {
            return Err(Error::config(format!(
                "light power {light_power} must be > 0"
            )));
        }
        if !(offset_light >= 0.0) {
            return Err(Error::config(format!(
                "offset light {offset_light} must be >= 0"
            )));
        }
        for p in points.iter().flatten() {
            if !(p.albedo > 0.0 && p.albedo <= 1.0) {
                return Err(Error::config(format!("albedo {} outside (0, 1]", p.albedo)));
            }
            Material::new(p.material.specular_strength, p.material.specular_exponent)?;
        }
        Ok(SceneSpec {
            width,
            height,
            points,
            light_power,
            offset_light,
            occluders,
        })
    }

    pub fn with_offset_light(mut self, offset_light: f64) -> Result<Self> {
        if !(offset_light >= 0.0) {
            return Err(Error::config(format!(
                "offset light {offset_light} must be >= 0"
            )));
        }
        self.offset_light = offset_light;
        Ok(self)
    }

    pub fn with_light_power(mut self, light_power: f64) -> Result<Self> {
        if !(light_power > 0.0) {
            return Err(Error::config(format!(
                "light power {light_power} must be > 0"
            )));
        }
        self.light_power = light_power;
        Ok(self)
    }

    /// Replaces every foreground albedo with `albedo`.
    pub fn with_uniform_albedo(mut self, albedo: f64) -> Result<Self> {
        if !(albedo > 0.0 && albedo <= 1.0) {
            return Err(Error::config(format!("albedo {albedo} outside (0, 1]")));
        }
        for p in self.points.iter_mut().flatten() {
            p.albedo = albedo;
        }
        Ok(self)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn light_power(&self) -> f64 {
        self.light_power
    }

    pub fn offset_light(&self) -> f64 {
        self.offset_light
    }

    pub fn occluders(&self) -> &[Cylinder] {
        &self.occluders
    }

    pub fn point(&self, x: usize, y: usize) -> Option<&SurfacePoint> {
        self.points[y * self.width + x].as_ref()
    }

    pub fn points(&self) -> &[Option<SurfacePoint>] {
        &self.points
    }

    pub fn foreground_count(&self) -> usize {
        self.points.iter().flatten().count()
    }

    pub fn normal_map(&self) -> NormalMap {
        Image::from_vec(
            self.width,
            self.height,
            self.points.iter().map(|p| p.map(|p| p.normal)).collect(),
        )
        .expect("scene dimensions are consistent")
    }

    /// Albedo per pixel; 0 on background.
    pub fn albedo_map(&self) -> ScalarMap {
        Image::from_vec(
            self.width,
            self.height,
            self.points
                .iter()
                .map(|p| p.map_or(0.0, |p| p.albedo))
                .collect(),
        )
        .expect("scene dimensions are consistent")
    }

    /// Cast-shadow visibility of `point` towards `light`.
    pub fn visible(&self, point: &SurfacePoint, light: &Vec3) -> bool {
        !self
            .occluders
            .iter()
            .any(|c| c.blocks(&point.position, light))
    }

    /// Specular term `s·k_s·max(hᵀn, 0)^α` without visibility.
    pub fn specular_term(&self, point: &SurfacePoint, light: &Vec3) -> f64 {
        let ks = point.material.specular_strength;
        if ks == 0.0 {
            return 0.0;
        }
        let half = (light + VIEW).normalize();
        let c = half.dot(point.normal.vector()).max(0.0);
        self.light_power * ks * c.powf(point.material.specular_exponent)
    }

    /// Diffuse term `s·ρ·max(nᵀl, 0)` without visibility.
    pub fn diffuse_term(&self, point: &SurfacePoint, light: &Vec3) -> f64 {
        self.light_power * point.albedo * point.normal.vector().dot(light).max(0.0)
    }

    /// Radiance of `point` lit from `light`.
    pub fn shade(&self, point: &SurfacePoint, light: &Vec3) -> f64 {
        let lit = if self.visible(point, light) {
            self.diffuse_term(point, light) + self.specular_term(point, light)
        } else {
            0.0
        };
        lit + self.offset_light
    }
}

/// Radiance observed at pixel `(x, y)` at time `t`.
pub fn render_radiance(
    scene: &SceneSpec,
    x: usize,
    y: usize,
    traj: &LightTrajectory,
    t: f64,
) -> Result<f64> {
    let point = scene
        .point(x, y)
        .ok_or_else(|| Error::domain(format!("pixel ({x}, {y}) is background")))?;
    Ok(scene.shade(point, &traj.direction(t)))
}
