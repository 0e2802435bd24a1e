//! Uniformly sampled profiles and periodic temporal masks.

use crate::error::{Error, Result};

/// Minimum number of samples per cycle.
pub const MIN_SAMPLES: usize = 8;

/// A per-pixel profile sampled at `i·T/N`, `i = 0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    period: f64,
    values: Vec<f64>,
    valid: Vec<bool>,
}

impl Profile {
    pub fn new(period: f64, values: Vec<f64>, valid: Vec<bool>) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::config(format!("period {period} must be positive")));
        }
        if values.len() < MIN_SAMPLES {
            return Err(Error::config(format!(
                "profile needs at least {MIN_SAMPLES} samples, got {}",
                values.len()
            )));
        }
        if values.len() != valid.len() {
            return Err(Error::config("values and validity flags differ in length"));
        }
        if let Some(i) = (0..values.len()).find(|&i| valid[i] && !values[i].is_finite()) {
            return Err(Error::domain(format!("valid sample {i} is not finite")));
        }
        Ok(Profile {
            period,
            values,
            valid,
        })
    }

    /// Builds a fully valid profile by evaluating `f` at the sample times.
    pub fn from_fn(period: f64, samples: usize, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        let step = period / samples as f64;
        let values: Vec<f64> = (0..samples).map(|i| f(i as f64 * step)).collect();
        let valid = values.iter().map(|v| v.is_finite()).collect();
        Self::new(period, values, valid)
    }

    /// A profile with no usable samples.
    pub fn invalid(period: f64, samples: usize) -> Result<Self> {
        Self::new(period, vec![0.0; samples], vec![false; samples])
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn is_valid(&self, i: usize) -> bool {
        self.valid[i]
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn sample_spacing(&self) -> f64 {
        self.period / self.values.len() as f64
    }

    pub fn sample_time(&self, i: usize) -> f64 {
        i as f64 * self.sample_spacing()
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    /// Valid `(time, value)` pairs.
    pub fn valid_samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.len())
            .filter(|&i| self.valid[i])
            .map(|i| (self.sample_time(i), self.values[i]))
    }

    /// Multiplies every value by `factor`.
    pub fn scaled(&self, factor: f64) -> Profile {
        Profile {
            period: self.period,
            values: self.values.iter().map(|v| v * factor).collect(),
            valid: self.valid.clone(),
        }
    }
}

/// `t` folded into `[0, period)`.
pub(crate) fn fold(t: f64, period: f64) -> f64 {
    let u = t.rem_euclid(period);
    if u >= period {
        0.0
    } else {
        u
    }
}

/// Forward distance from `a` to `b` on a circle of circumference `period`.
pub fn forward_distance(a: f64, b: f64, period: f64) -> f64 {
    fold(b - a, period)
}

/// A periodic {0, 1} function of time stored as the arcs where it is 1.
///
/// Arcs are half-open `[start, end)`; after normalization they are sorted,
/// disjoint and lie inside `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalMask {
    period: f64,
    arcs: Vec<(f64, f64)>,
}

impl TemporalMask {
    pub fn full(period: f64) -> Self {
        TemporalMask {
            period,
            arcs: vec![(0.0, period)],
        }
    }

    pub fn empty(period: f64) -> Self {
        TemporalMask {
            period,
            arcs: Vec::new(),
        }
    }

    /// Builds a mask from `(start, length)` arcs. Starts are folded onto the
    /// circle; lengths are clamped to `[0, T]`.
    pub fn from_arcs(period: f64, arcs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::config(format!("period {period} must be positive")));
        }
        let mut pieces = Vec::new();
        for (start, length) in arcs {
            if !start.is_finite() || !length.is_finite() {
                return Err(Error::domain("mask arc must be finite"));
            }
            let length = length.clamp(0.0, period);
            if length == 0.0 {
                continue;
            }
            if length >= period {
                pieces.push((0.0, period));
                continue;
            }
            let a = fold(start, period);
            let b = a + length;
            if b <= period {
                pieces.push((a, b));
            } else {
                pieces.push((a, period));
                pieces.push((0.0, b - period));
            }
        }
        pieces.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pieces.len());
        for (a, b) in pieces {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Ok(TemporalMask {
            period,
            arcs: merged,
        })
    }

    /// The arc travelled forward from `from` to `to`.
    pub fn forward_arc(period: f64, from: f64, to: f64) -> Result<Self> {
        if !from.is_finite() || !to.is_finite() {
            return Err(Error::domain("mask arc must be finite"));
        }
        let mask = Self::from_arcs(period, [])?;
        let (a, b) = (fold(from, period), fold(to, period));
        // endpoints are kept exact rather than rebuilt from a length
        let arcs = if a < b {
            vec![(a, b)]
        } else if a > b {
            if b > 0.0 {
                vec![(0.0, b), (a, period)]
            } else {
                vec![(a, period)]
            }
        } else {
            vec![]
        };
        Ok(TemporalMask { arcs, ..mask })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Normalized, non-wrapping arcs where the mask is 1.
    pub fn arcs(&self) -> &[(f64, f64)] {
        &self.arcs
    }

    pub fn contains(&self, t: f64) -> bool {
        let u = fold(t, self.period);
        self.arcs.iter().any(|&(a, b)| a <= u && u < b)
    }

    pub fn value(&self, t: f64) -> u8 {
        u8::from(self.contains(t))
    }

    pub fn ones_length(&self) -> f64 {
        self.arcs.iter().map(|(a, b)| b - a).sum()
    }

    pub fn zeros_length(&self) -> f64 {
        let mut covered = 0.0;
        let mut cursor = 0.0;
        for &(a, b) in &self.arcs {
            covered += a - cursor;
            cursor = b;
        }
        covered + (self.period - cursor)
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn complement(&self) -> TemporalMask {
        let mut arcs = Vec::new();
        let mut cursor = 0.0;
        for &(a, b) in &self.arcs {
            if a > cursor {
                arcs.push((cursor, a));
            }
            cursor = b;
        }
        if cursor < self.period {
            arcs.push((cursor, self.period));
        }
        TemporalMask {
            period: self.period,
            arcs,
        }
    }

    /// Mask evaluated at `samples` uniform times over one period.
    pub fn sample(&self, samples: usize) -> Vec<bool> {
        let step = self.period / samples as f64;
        (0..samples)
            .map(|i| self.contains(i as f64 * step))
            .collect()
    }
}
