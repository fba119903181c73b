use std::io::{Read, Write};
use std::path::Path;

use super::norms::sobolev_norms;
use super::sampled::SampledFunction1D;
use crate::error::{invalid, Result};

/// Corner mismatch allowed for analytically specified coefficients.
pub const CORNER_TOL_EXACT: f64 = 1e-12;

/// Class parameters `(m, M, alpha)` of an admissible damping pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampingClass {
    pub m_lower: f64,
    pub m_upper: f64,
    pub holder_exponent: f64,
}

impl Default for DampingClass {
    fn default() -> Self {
        Self {
            m_lower: 0.0,
            m_upper: f64::INFINITY,
            holder_exponent: 1.0,
        }
    }
}

impl DampingClass {
    pub fn new(m_lower: f64, m_upper: f64, holder_exponent: f64) -> Result<Self> {
        if !(m_lower >= 0.0) {
            return Err(invalid(format!("m_lower must be >= 0, got {m_lower}")));
        }
        if !(m_upper > 0.0) {
            return Err(invalid(format!("M_upper must be > 0, got {m_upper}")));
        }
        if !(holder_exponent > 0.5 && holder_exponent <= 1.0) {
            return Err(invalid(format!(
                "Holder exponent must lie in (1/2, 1], got {holder_exponent}"
            )));
        }
        Ok(Self {
            m_lower,
            m_upper,
            holder_exponent,
        })
    }
}

/// Boundary damping `a = (a1, a2)`: `a1(x)` on `y = 0`, `a2(y)` on `x = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DampingPair {
    a1: SampledFunction1D,
    a2: SampledFunction1D,
    class: DampingClass,
}

impl DampingPair {
    pub fn new(a1: SampledFunction1D, a2: SampledFunction1D) -> Result<Self> {
        Self::with_corner_tolerance(a1, a2, CORNER_TOL_EXACT)
    }

    /// Construction with a caller-chosen corner tolerance, used for
    /// reconstructed profiles whose corner values carry interpolation error.
    pub fn with_corner_tolerance(
        a1: SampledFunction1D,
        a2: SampledFunction1D,
        corner_tol: f64,
    ) -> Result<Self> {
        if a1.len() != a2.len() {
            return Err(invalid(format!(
                "damping sides have different sample counts ({} vs {})",
                a1.len(),
                a2.len()
            )));
        }
        let mismatch = (a1.values()[0] - a2.values()[0]).abs();
        if mismatch > corner_tol {
            return Err(invalid(format!(
                "corner condition a1(0) = a2(0) violated by {mismatch:e}"
            )));
        }
        if a1.min() < 0.0 || a2.min() < 0.0 {
            return Err(invalid("damping coefficient must be nonnegative"));
        }
        Ok(Self {
            a1,
            a2,
            class: DampingClass::default(),
        })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::constant(n, 0.0)
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(
            SampledFunction1D::constant(n, c)?,
            SampledFunction1D::constant(n, c)?,
        )
    }

    /// `a1(s) = level (1 + slope s)`, `a2 = level`.
    pub fn affine(n: usize, level: f64, slope: f64) -> Result<Self> {
        Self::new(
            SampledFunction1D::from_fn(n, |s| level * (1.0 + slope * s))?,
            SampledFunction1D::constant(n, level)?,
        )
    }

    pub fn with_class(mut self, class: DampingClass) -> Self {
        self.class = class;
        self
    }

    pub fn a1(&self) -> &SampledFunction1D {
        &self.a1
    }

    pub fn a2(&self) -> &SampledFunction1D {
        &self.a2
    }

    pub fn side(&self, side: usize) -> &SampledFunction1D {
        match side {
            0 => &self.a1,
            _ => &self.a2,
        }
    }

    pub fn class(&self) -> DampingClass {
        self.class
    }

    pub fn len(&self) -> usize {
        self.a1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a1.is_empty()
    }

    /// Shared value at the vertex (0,0).
    pub fn corner_value(&self) -> f64 {
        0.5 * (self.a1.values()[0] + self.a2.values()[0])
    }

    pub fn scaled(&self, eps: f64) -> Result<Self> {
        Ok(Self::new(self.a1.scaled(eps), self.a2.scaled(eps))?.with_class(self.class))
    }

    /// Mirror image under exchanging the x and y axes.
    pub fn swapped(&self) -> Self {
        Self {
            a1: self.a2.clone(),
            a2: self.a1.clone(),
            class: self.class,
        }
    }

    pub fn resample(&self, n: usize) -> Result<Self> {
        Ok(Self {
            a1: self.a1.resample(n)?,
            a2: self.a2.resample(n)?,
            class: self.class,
        })
    }

    /// `(|a1|^2 + |a2|^2)^{1/2}` in L2(0,1).
    pub fn l2_norm(&self) -> f64 {
        (self.a1.l2_norm_sq() + self.a2.l2_norm_sq()).sqrt()
    }

    pub fn min_value(&self) -> f64 {
        self.a1.min().min(self.a2.min())
    }

    pub fn max_value(&self) -> f64 {
        self.a1.max_abs().max(self.a2.max_abs())
    }

    /// `max_j |a_j|^2_{H^1(0,1)}`.
    pub fn max_h1_sq(&self) -> f64 {
        let n1 = sobolev_norms(&self.a1).h1;
        let n2 = sobolev_norms(&self.a2).h1;
        (n1 * n1).max(n2 * n2)
    }

    pub fn is_zero(&self) -> bool {
        self.max_value() == 0.0
    }

    /// Membership in the admissible class `A_{m,M}` carried by this pair.
    pub fn in_class(&self) -> bool {
        self.min_value() >= self.class.m_lower && self.max_h1_sq() <= self.class.m_upper
    }

    /// CSV with columns `s,a1,a2` on the uniform nodes.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["s", "a1", "a2"])?;
        for i in 0..self.len() {
            out.write_record([
                self.a1.node(i).to_string(),
                self.a1.values()[i].to_string(),
                self.a2.values()[i].to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Inverse of [`DampingPair::write_csv`]. Rows must be uniform nodes of
    /// `[0, 1]` in increasing order.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["s", "a1", "a2"] {
            return Err(invalid("damping CSV header must be s,a1,a2"));
        }
        let mut s = Vec::new();
        let mut a1 = Vec::new();
        let mut a2 = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let field = |k: usize| -> Result<f64> {
                rec.get(k)
                    .and_then(|v| v.trim().parse::<f64>().ok())
                    .ok_or_else(|| invalid(format!("damping CSV row {}: bad number", row + 2)))
            };
            s.push(field(0)?);
            a1.push(field(1)?);
            a2.push(field(2)?);
        }
        let n = s.len();
        if n < 2 {
            return Err(invalid("damping CSV needs at least two rows"));
        }
        let h = 1.0 / (n - 1) as f64;
        if s.iter().enumerate().any(|(i, v)| (v - i as f64 * h).abs() > 1e-9) {
            return Err(invalid("damping CSV nodes must be uniform on [0, 1]"));
        }
        Self::new(SampledFunction1D::new(a1)?, SampledFunction1D::new(a2)?)
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}
