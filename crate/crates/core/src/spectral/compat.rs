//! First-order corner compatibility: finiteness of `int_0^1 |g1 - g2|^2 dt / t`.

use super::damping::DampingPair;
use super::sampled::SampledFunction1D;
use crate::error::Result;

/// A dyadic window counts as non-decaying when it carries more than this
/// fraction of the largest window contribution.
pub const DYADIC_REL_TOL: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct CompatResult {
    /// Trapezoid value of the integral over `(h, 1)`.
    pub value: f64,
    pub divergent: bool,
    /// Contributions of the dyadic windows `(2^{-j-1}, 2^{-j}]`, `j = 0, 1, ...`.
    pub windows: Vec<f64>,
}

pub fn compat_integral(g1: &SampledFunction1D, g2: &SampledFunction1D) -> Result<CompatResult> {
    let diff = g1.zip_with(g2, |a, b| a - b)?;
    let h = diff.spacing();
    let v = diff.values();
    let integrand: Vec<f64> = (0..v.len())
        .map(|i| if i == 0 { 0.0 } else { v[i] * v[i] / (i as f64 * h) })
        .collect();

    // resolved windows: lower edge at least one cell above the excluded (0, h)
    let mut n_windows = 0;
    while 0.5f64.powi(n_windows as i32 + 1) >= 2.0 * h {
        n_windows += 1;
    }
    let mut windows = vec![0.0; n_windows];
    let mut value = 0.0;
    for i in 1..(v.len() - 1) {
        let cell = 0.5 * h * (integrand[i] + integrand[i + 1]);
        value += cell;
        let mid = (i as f64 + 0.5) * h;
        let j = (-mid.log2()).floor() as usize;
        if j < n_windows {
            windows[j] += cell;
        }
    }

    let max_w = windows.iter().copied().fold(0.0, f64::max);
    let divergent = max_w > 0.0
        && windows.len() >= 3
        && windows[windows.len() - 3..]
            .iter()
            .all(|&w| w > DYADIC_REL_TOL * max_w);

    Ok(CompatResult {
        value,
        divergent,
        windows,
    })
}

/// Whether `(a1 g1, a2 g2)` satisfies the first-order condition at (0,0).
pub fn damping_compat_check(
    a: &DampingPair,
    g1: &SampledFunction1D,
    g2: &SampledFunction1D,
) -> Result<bool> {
    let a1 = a.a1().resample(g1.len())?;
    let a2 = a.a2().resample(g2.len())?;
    let p1 = a1.zip_with(g1, |x, y| x * y)?;
    let p2 = a2.zip_with(g2, |x, y| x * y)?;
    Ok(!compat_integral(&p1, &p2)?.divergent)
}
