use super::modes::eval_phi1d;
use super::sampled::SampledFunction1D;
use crate::error::{Error, Result};
use crate::quadrature::trapezoid_product;

/// Which damped side a coefficient set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundarySide {
    /// `y = 0`, parametrised by `x`.
    Gamma11,
    /// `x = 0`, parametrised by `y`.
    Gamma12,
}

impl BoundarySide {
    pub const BOTH: [BoundarySide; 2] = [BoundarySide::Gamma11, BoundarySide::Gamma12];

    pub fn index(self) -> usize {
        match self {
            BoundarySide::Gamma11 => 0,
            BoundarySide::Gamma12 => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BoundarySide::Gamma11 => "gamma11",
            BoundarySide::Gamma12 => "gamma12",
        }
    }
}

/// Coefficients `c_k = int_0^1 f phi_k`, `k = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoeffs {
    pub side: BoundarySide,
    pub coeffs: Vec<f64>,
}

impl FourierCoeffs {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }
}

/// Smallest sample count resolving mode `order` with eight samples per period.
pub fn min_samples_for_order(order: usize) -> usize {
    (8.0 * (order as f64 + 0.5) / 2.0).ceil() as usize + 1
}

pub fn fourier_project(
    f: &SampledFunction1D,
    order: usize,
    side: BoundarySide,
) -> Result<FourierCoeffs> {
    let need = min_samples_for_order(order);
    if f.len() < need {
        return Err(Error::Resolution(format!(
            "order {order} needs at least {need} samples, got {}",
            f.len()
        )));
    }
    let h = f.spacing();
    let coeffs = (0..=order)
        .map(|k| {
            let phi: Vec<f64> = (0..f.len()).map(|i| eval_phi1d(k, f.node(i))).collect();
            trapezoid_product(f.values(), &phi, h)
        })
        .collect();
    Ok(FourierCoeffs { side, coeffs })
}

/// Truncated sum `sum_k c_k phi_k` on `n` uniform nodes.
pub fn fourier_synthesize(c: &FourierCoeffs, n: usize) -> Result<SampledFunction1D> {
    SampledFunction1D::from_fn(n, |s| {
        c.coeffs
            .iter()
            .enumerate()
            .map(|(k, ck)| ck * eval_phi1d(k, s))
            .sum()
    })
}
