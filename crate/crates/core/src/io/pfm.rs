//! Portable float maps: `PF` (3 channels) or `Pf` (1 channel), then
//! `width height`, then the scale whose sign gives the byte order (negative
//! is little-endian), then rows bottom-to-top.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{SurfaceNormal, Vec3};
use crate::image::{Image, NormalMap, ScalarMap};

#[derive(Debug, Clone, PartialEq)]
pub struct PfmImage {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    /// Row-major, top row first, channels interleaved.
    pub data: Vec<f32>,
}

impl PfmImage {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::config("PFM dimensions must be >= 1"));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::config(format!(
                "PFM needs 1 or 3 channels, got {channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::config("PFM data length does not match its shape"));
        }
        Ok(PfmImage {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[f32] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }
}

pub fn write_pfm(path: &Path, image: &PfmImage) -> Result<()> {
    let mut bytes = Vec::with_capacity(32 + image.data.len() * 4);
    let magic = if image.channels == 3 { "PF" } else { "Pf" };
    write!(bytes, "{magic}\n{} {}\n-1.0\n", image.width, image.height)?;
    let row = image.width * image.channels;
    for y in (0..image.height).rev() {
        for v in &image.data[y * row..(y + 1) * row] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_pfm(path: &Path) -> Result<PfmImage> {
    let bytes = fs::read(path)?;
    let name = path.display().to_string();
    let err = |msg: &str| Error::parse(name.clone(), msg.to_string());
    let mut cursor = 0usize;
    let mut token = || -> Result<String> {
        while cursor < bytes.len() && bytes[cursor].is_ascii_whitespace() {
            cursor += 1;
        }
        let start = cursor;
        while cursor < bytes.len() && !bytes[cursor].is_ascii_whitespace() {
            cursor += 1;
        }
        if start == cursor {
            return Err(err("truncated header"));
        }
        let t = String::from_utf8_lossy(&bytes[start..cursor]).into_owned();
        Ok(t)
    };
    let channels = match token()?.as_str() {
        "PF" => 3,
        "Pf" => 1,
        _ => return Err(err("bad magic")),
    };
    let width: usize = token()?.parse().map_err(|_| err("bad width"))?;
    let height: usize = token()?.parse().map_err(|_| err("bad height"))?;
    let scale: f64 = token()?.parse().map_err(|_| err("bad scale"))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(err("bad scale"));
    }
    // exactly one whitespace byte separates the header from the raster
    cursor += 1;
    let little = scale < 0.0;
    let row = width * channels;
    let expected = row * height * 4;
    if bytes.len() < cursor || bytes.len() - cursor != expected {
        return Err(err("raster size does not match the header"));
    }
    let raster = &bytes[cursor..];
    let mut data = vec![0f32; row * height];
    for (k, chunk) in raster.chunks_exact(4).enumerate() {
        let b: [u8; 4] = chunk.try_into().expect("4 bytes");
        let v = if little {
            f32::from_le_bytes(b)
        } else {
            f32::from_be_bytes(b)
        };
        let (file_row, col) = (k / row, k % row);
        data[(height - 1 - file_row) * row + col] = v;
    }
    PfmImage::new(width, height, channels, data)
}

/// One-channel PFM of a scalar map.
pub fn scalar_to_pfm(map: &ScalarMap) -> Result<PfmImage> {
    PfmImage::new(
        map.width(),
        map.height(),
        1,
        map.data().iter().map(|&v| v as f32).collect(),
    )
}

pub fn pfm_to_scalar(image: &PfmImage) -> Result<ScalarMap> {
    if image.channels != 1 {
        return Err(Error::config("expected a single-channel PFM"));
    }
    Image::from_vec(
        image.width,
        image.height,
        image.data.iter().map(|&v| f64::from(v)).collect(),
    )
}

/// Three-channel PFM of a normal map; absent normals are `(0, 0, 0)`.
pub fn normals_to_pfm(map: &NormalMap) -> Result<PfmImage> {
    let data = map
        .data()
        .iter()
        .flat_map(|n| match n {
            Some(n) => {
                let v = n.vector();
                [v.x as f32, v.y as f32, v.z as f32]
            }
            None => [0.0; 3],
        })
        .collect();
    PfmImage::new(map.width(), map.height(), 3, data)
}

/// Pixels with vector norm below 0.5 decode as absent.
pub fn pfm_to_normals(image: &PfmImage) -> Result<NormalMap> {
    if image.channels != 3 {
        return Err(Error::config("expected a three-channel PFM"));
    }
    let normals = image
        .data
        .chunks_exact(3)
        .map(|c| {
            let v = Vec3::new(f64::from(c[0]), f64::from(c[1]), f64::from(c[2]));
            if v.norm() < 0.5 {
                None
            } else {
                SurfaceNormal::new(v).ok()
            }
        })
        .collect();
    Image::from_vec(image.width, image.height, normals)
}
