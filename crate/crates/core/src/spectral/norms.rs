//! Sobolev and Holder norms of sampled functions on (0,1).

use super::sampled::SampledFunction1D;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevNorms {
    pub l2: f64,
    pub h1: f64,
    pub h_half: f64,
}

/// L2, H1 and H^{1/2} norms.
///
/// The H1 seminorm is exact for the piecewise-linear interpolant. The
/// Gagliardo double integral uses cell midpoints and cell averages for
/// off-diagonal cell pairs; a diagonal cell contributes `slope^2 h^2`, its
/// exact value for a linear piece.
pub fn sobolev_norms(f: &SampledFunction1D) -> SobolevNorms {
    let l2_sq = f.l2_norm_sq();
    let h = f.spacing();
    let v = f.values();
    let cells = v.len() - 1;

    let slopes: Vec<f64> = v.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    let semi_h1_sq: f64 = slopes.iter().map(|s| s * s * h).sum();

    let avg: Vec<f64> = v.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let mut off = 0.0;
    for i in 0..cells {
        let mut row = 0.0;
        for j in (i + 1)..cells {
            let d = (j - i) as f64 * h;
            let diff = avg[i] - avg[j];
            row += diff * diff / (d * d);
        }
        off += row;
    }
    let diag: f64 = slopes.iter().map(|s| s * s).sum::<f64>() * h * h;
    let semi_half_sq = 2.0 * off * h * h + diag;

    SobolevNorms {
        l2: l2_sq.sqrt(),
        h1: (l2_sq + semi_h1_sq).sqrt(),
        h_half: (l2_sq + semi_half_sq).sqrt(),
    }
}

/// `max |f(x) - f(y)| / |x - y|^alpha` over all sample pairs.
pub fn holder_seminorm(f: &SampledFunction1D, alpha: f64) -> f64 {
    let v = f.values();
    let h = f.spacing();
    let n = v.len();
    let mut best: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (j - i) as f64 * h;
            best = best.max((v[j] - v[i]).abs() / d.powf(alpha));
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Compare `|a f|_{H^{1/2}}` against `(2 alpha - 1)^{-1} |a|_{C^alpha} |f|_{H^{1/2}}`.
pub fn multiplier_bound_check(
    a: &SampledFunction1D,
    f: &SampledFunction1D,
    alpha: f64,
) -> crate::Result<MultiplierCheck> {
    if !(alpha > 0.5 && alpha <= 1.0) {
        return Err(crate::Error::InvalidArgument(format!(
            "Holder exponent must lie in (1/2, 1], got {alpha}"
        )));
    }
    let af = a.zip_with(f, |x, y| x * y)?;
    let lhs = sobolev_norms(&af).h_half;
    let c_alpha = a.max_abs() + holder_seminorm(a, alpha);
    let rhs = c_alpha * sobolev_norms(f).h_half / (2.0 * alpha - 1.0);
    Ok(MultiplierCheck {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-12),
    })
}
