use crate::error::{invalid, Result};
use crate::quadrature;

/// Real function on [0,1] sampled at `s_i = i / (n - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction1D {
    values: Vec<f64>,
}

impl SampledFunction1D {
    pub const MIN_SAMPLES: usize = 3;

    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < Self::MIN_SAMPLES {
            return Err(invalid(format!(
                "sampled function needs at least {} samples, got {}",
                Self::MIN_SAMPLES,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("sampled function contains non-finite values"));
        }
        Ok(Self { values })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < Self::MIN_SAMPLES {
            return Err(invalid(format!("sample count {n} below {}", Self::MIN_SAMPLES)));
        }
        let h = 1.0 / (n - 1) as f64;
        Self::new((0..n).map(|i| f(i as f64 * h)).collect())
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::from_fn(n, |_| c)
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::constant(n, 0.0)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.values.len() - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Piecewise-linear interpolation, clamped to [0,1].
    pub fn value_at(&self, s: f64) -> f64 {
        let n = self.values.len();
        let pos = s.clamp(0.0, 1.0) * (n - 1) as f64;
        let i = (pos.floor() as usize).min(n - 2);
        let frac = pos - i as f64;
        if frac == 0.0 {
            return self.values[i];
        }
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// Resample onto `n` uniform nodes by linear interpolation.
    pub fn resample(&self, n: usize) -> Result<Self> {
        if n == self.len() {
            return Ok(self.clone());
        }
        Self::from_fn(n, |s| self.value_at(s))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Pointwise combination; both operands must share the sample count.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.len() != other.len() {
            return Err(invalid(format!(
                "sample counts differ: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn integral(&self) -> f64 {
        quadrature::trapezoid(&self.values, self.spacing())
    }

    pub fn l2_norm_sq(&self) -> f64 {
        quadrature::trapezoid_product(&self.values, &self.values, self.spacing())
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// L2 norm restricted to `[0, upper]` (trapezoid over the nodes inside).
    pub fn l2_norm_on(&self, upper: f64) -> f64 {
        let h = self.spacing();
        let last = ((upper / h) + 1e-9).floor() as usize;
        let last = last.min(self.len() - 1);
        let sq: Vec<f64> = self.values[..=last].iter().map(|v| v * v).collect();
        quadrature::trapezoid(&sq, h).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}
