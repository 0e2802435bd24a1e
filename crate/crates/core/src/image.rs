//! Row-major per-pixel maps.

use crate::error::{Error, Result};
use crate::geometry::SurfaceNormal;

#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Clone> Image<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Image {
            width,
            height,
            data: vec![value; width * height],
        }
    }
}

impl<T> Image<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::config(format!(
                "{} values for a {width}x{height} image",
                data.len()
            )));
        }
        Ok(Image {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.data[y * self.width + x]
    }

    pub fn get_mut(&mut self, x: usize, y: usize) -> &mut T {
        &mut self.data[y * self.width + x]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn same_shape<U>(&self, other: &Image<U>) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Image<U> {
        Image {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }
}

pub type ScalarMap = Image<f64>;

/// Normal map; `None` marks background or unsolved pixels.
pub type NormalMap = Image<Option<SurfaceNormal>>;

/// Per-pixel contrast thresholds.
///
/// Pixels whose threshold could not be estimated carry `+inf` / `-inf`,
/// which still satisfies the sign invariant but is reported by
/// [`is_flagged`](Self::is_flagged).
#[derive(Debug, Clone, PartialEq)]
pub struct PixelThresholds {
    positive: ScalarMap,
    negative: ScalarMap,
}

impl PixelThresholds {
    pub fn new(positive: ScalarMap, negative: ScalarMap) -> Result<Self> {
        if !positive.same_shape(&negative) {
            return Err(Error::config("threshold maps differ in size"));
        }
        if let Some(v) = positive.data().iter().find(|v| !(**v > 0.0)) {
            return Err(Error::config(format!("positive threshold {v} is not > 0")));
        }
        if let Some(v) = negative.data().iter().find(|v| !(**v < 0.0)) {
            return Err(Error::config(format!("negative threshold {v} is not < 0")));
        }
        Ok(PixelThresholds { positive, negative })
    }

    pub fn uniform(width: usize, height: usize, positive: f64, negative: f64) -> Result<Self> {
        Self::new(
            Image::filled(width, height, positive),
            Image::filled(width, height, negative),
        )
    }

    pub fn width(&self) -> usize {
        self.positive.width()
    }

    pub fn height(&self) -> usize {
        self.positive.height()
    }

    /// `(h_p, h_n)` at a pixel.
    pub fn at(&self, x: usize, y: usize) -> (f64, f64) {
        (*self.positive.get(x, y), *self.negative.get(x, y))
    }

    pub fn is_flagged(&self, x: usize, y: usize) -> bool {
        let (p, n) = self.at(x, y);
        !p.is_finite() || !n.is_finite()
    }

    pub fn positive(&self) -> &ScalarMap {
        &self.positive
    }

    pub fn negative(&self) -> &ScalarMap {
        &self.negative
    }
}
