//! Truncation rule, logarithmic stability bound and the constant checks of
//! the stability argument.

use crate::error::{invalid, Error, Result};
use crate::spectral::{
    eigenpair, fourier_project, sobolev_norms, BoundarySide, DampingPair, ModeIndex,
    SampledFunction1D,
};
use crate::wave::Grid2D;

/// `alpha = tau^2 pi^2 + 2`.
pub fn trunc_rate(tau: f64) -> f64 {
    tau * tau * std::f64::consts::PI.powi(2) + 2.0
}

/// Slack for the equality case of the truncation inequality, in log space.
const LOG_TOL: f64 = 1e-12;

/// `(c / m) e^{alpha N^2} delta <= 1 / N^2`, evaluated in log space;
/// `N = 0` holds vacuously.
pub fn n0_inequality(c: f64, m: f64, alpha: f64, delta: f64, big_n: usize) -> bool {
    if big_n == 0 || delta == 0.0 {
        return true;
    }
    let nn = big_n as f64;
    (c / m).ln() + alpha * nn * nn + delta.ln() + 2.0 * nn.ln() <= LOG_TOL
}

/// Largest `N >= 0` satisfying [`n0_inequality`] by ascending scan.
pub fn n0_scan(c: f64, m: f64, alpha: f64, delta: f64) -> Result<usize> {
    if !(c > 0.0 && m > 0.0 && alpha > 0.0 && delta > 0.0) {
        return Err(invalid(format!(
            "truncation rule needs c, m, alpha, delta > 0 (got {c}, {m}, {alpha}, {delta})"
        )));
    }
    let mut big_n = 0;
    while n0_inequality(c, m, alpha, delta, big_n + 1) {
        big_n += 1;
    }
    Ok(big_n)
}

/// Greatest `N0 >= 1` with `(c/m) e^{alpha N0^2} delta <= 1/N0^2`, in the
/// small-gap regime `delta <= m e^{-alpha}`.
pub fn select_n0(c_cal: f64, m: f64, alpha: f64, delta: f64) -> Result<usize> {
    let limit = m * (-alpha).exp();
    if delta > limit * (1.0 + LOG_TOL) {
        return Err(Error::RegimeViolation { delta, limit });
    }
    match n0_scan(c_cal, m, alpha, delta)? {
        0 => Err(invalid(format!(
            "no N >= 1 satisfies the truncation rule for c = {c_cal}"
        ))),
        n => Ok(n),
    }
}

/// `|ln(delta/m)|^{-1/2} + delta/m`.
pub fn log_stability_profile(delta: f64, m: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(invalid(format!("lower bound m must be positive, got {m}")));
    }
    if delta < 0.0 || !delta.is_finite() {
        return Err(invalid(format!("gap must be finite and nonnegative, got {delta}")));
    }
    if delta == 0.0 {
        return Ok(0.0);
    }
    if delta == m {
        return Err(Error::SingularGap);
    }
    Ok((delta / m).ln().abs().powf(-0.5) + delta / m)
}

/// `c M (|ln(delta/m)|^{-1/2} + delta/m)`; a zero gap gives `+inf` (the
/// bound is vacuous).
pub fn stability_rhs(delta: f64, m: f64, big_m: f64, c_cal: f64) -> Result<f64> {
    if delta == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(c_cal * big_m * log_stability_profile(delta, m)?)
}

/// Smallest constant for which the coefficient bound
/// `(a_j^k)^2 <= C (M^2/m) e^{E_k} delta` holds for all `j` and `k <= order`,
/// with exponent `E_k` supplied per `k`. Computed in log space; returns 0
/// when all coefficients vanish.
pub fn coefficient_constant(
    a: &DampingPair,
    order: usize,
    m: f64,
    big_m: f64,
    delta: f64,
    exponent: impl Fn(usize) -> f64,
) -> Result<f64> {
    if !(delta > 0.0) {
        return Ok(0.0);
    }
    let mut worst = f64::NEG_INFINITY;
    for side in BoundarySide::BOTH {
        let f = a.side(side.index());
        let need = crate::spectral::min_samples_for_order(order);
        let f = if f.len() < need { f.resample(need)? } else { f.clone() };
        let c = fourier_project(&f, order, side)?;
        for (k, ck) in c.coeffs.iter().enumerate() {
            if *ck == 0.0 {
                continue;
            }
            let log_ratio = 2.0 * ck.abs().ln()
                - (2.0 * big_m.ln() - m.ln() + exponent(k) + delta.ln());
            worst = worst.max(log_ratio);
        }
    }
    Ok(if worst == f64::NEG_INFINITY { 0.0 } else { worst.exp() })
}

/// Exponent `k^2 (tau^2 pi^2 + 1)`.
pub fn exponent_k_squared(tau: f64) -> impl Fn(usize) -> f64 {
    move |k| (k * k) as f64 * (tau * tau * std::f64::consts::PI.powi(2) + 1.0)
}

/// Exponent `lambda_{k0} tau^2` (the form before folding the mode index).
pub fn exponent_lambda(tau: f64) -> impl Fn(usize) -> f64 {
    move |k| eigenpair(ModeIndex::new(k, 0)).lambda * tau * tau
}

/// Analytic constant of the product bound: `|phi| <= 2`, `|grad phi| <= 2 sqrt(lambda)`
/// and `lambda >= pi^2/2` give `2 sqrt(1 + 2/pi^2)`.
pub fn product_bound_constant() -> f64 {
    2.0 * (1.0 + 2.0 / std::f64::consts::PI.powi(2)).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductBoundCheck {
    /// `(mode, |grad((a1 x a2) phi)| / (sqrt(lambda) |a1 x a2|_{H1}))`
    pub ratios: Vec<(ModeIndex, f64)>,
    pub c0: f64,
    pub holds: bool,
}

/// `|(a1 x a2) phi_kl|_V <= C0 sqrt(lambda_kl) |a1 x a2|_{H1(Omega)}` over `modes`.
pub fn product_bound_check(
    grid: &Grid2D,
    a: &DampingPair,
    modes: &[ModeIndex],
) -> Result<ProductBoundCheck> {
    let n = grid.n();
    let a = a.resample(n)?;
    let (a1, a2) = (a.a1(), a.a2());
    let h1_norm = {
        let sq = |f: &SampledFunction1D| {
            let s = sobolev_norms(f);
            (s.l2 * s.l2, s.h1 * s.h1 - s.l2 * s.l2)
        };
        let (l1, d1) = sq(a1);
        let (l2, d2) = sq(a2);
        (l1 * l2 + d1 * l2 + l1 * d2).sqrt()
    };
    if h1_norm == 0.0 {
        return Ok(ProductBoundCheck {
            ratios: modes.iter().map(|&m| (m, 0.0)).collect(),
            c0: product_bound_constant(),
            holds: true,
        });
    }
    let c0 = product_bound_constant();
    let mut ratios = Vec::with_capacity(modes.len());
    for &mode in modes {
        let phi = grid.mode_field(mode);
        let mut f = grid.zeros();
        for j in 0..n {
            for i in 0..n {
                let p = grid.idx(i, j);
                f[p] = a1.values()[i] * a2.values()[j] * phi[p];
            }
        }
        let lhs = grid.grad_norm(&f);
        ratios.push((mode, lhs / (eigenpair(mode).omega * h1_norm)));
    }
    let holds = ratios.iter().all(|r| r.1 <= c0);
    Ok(ProductBoundCheck { ratios, c0, holds })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n0_examples() {
        // N = 2: e^8 e^-18 <= 1/4; N = 3: e^18 e^-18 = 1 > 1/9
        assert_eq!(select_n0(1.0, 1.0, 2.0, (-18.0f64).exp()).unwrap(), 2);
        assert_eq!(select_n0(1.0, 1.0, 2.0, (-2.0f64).exp()).unwrap(), 1);
        assert!(matches!(
            select_n0(1.0, 1.0, 2.0, 0.5),
            Err(Error::RegimeViolation { .. })
        ));
    }

    #[test]
    fn n0_brute_force_oracle() {
        for &(c, m, alpha, ld) in &[(1.0, 1.0, 2.0, -40.0), (0.3, 0.5, 3.0, -100.0), (2.0, 0.1, 1.5, -30.0)] {
            let delta = f64::exp(ld);
            let brute = (1..100)
                .filter(|&n| {
                    let n = n as f64;
                    c / m * (alpha * n * n).exp() * delta <= 1.0 / (n * n)
                })
                .max()
                .unwrap_or(0);
            assert_eq!(n0_scan(c, m, alpha, delta).unwrap(), brute);
        }
    }

    #[test]
    fn n0_grows_as_gap_shrinks() {
        let mut last = 0;
        for e in [10.0, 20.0, 50.0, 100.0, 300.0, 700.0] {
            let n0 = select_n0(1.0, 1.0, 2.0, (-e as f64).exp()).unwrap();
            assert!(n0 >= last);
            last = n0;
        }
        assert!(last >= 10);
    }

    #[test]
    fn rhs_examples() {
        let m = 0.3;
        let r = stability_rhs(m * (-4.0f64).exp(), m, 1.0, 1.0).unwrap();
        assert!((r - (0.5 + (-4.0f64).exp())).abs() < 1e-12);
        assert!((r - 0.5183).abs() < 1e-4);
        let r = stability_rhs(m * (-100.0f64).exp(), m, 1.0, 1.0).unwrap();
        assert!((r - 0.1).abs() < 1e-12);
        assert_eq!(stability_rhs(0.0, m, 1.0, 1.0).unwrap(), f64::INFINITY);
        assert!(matches!(stability_rhs(m, m, 1.0, 1.0), Err(Error::SingularGap)));
        // decreasing along the small-gap branch
        let vals: Vec<f64> = [1.0, 2.0, 5.0, 10.0, 50.0]
            .iter()
            .map(|l| stability_rhs(m * (-l as f64).exp(), m, 2.0, 0.5).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn trunc_rate_value() {
        assert!((trunc_rate(4.0) - (16.0 * std::f64::consts::PI.powi(2) + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn coefficient_constant_scales_inversely_with_gap() {
        let a = DampingPair::constant(129, 0.2).unwrap();
        let e = exponent_k_squared(4.0);
        let c1 = coefficient_constant(&a, 2, 0.2, 1.0, 1e-2, &e).unwrap();
        let c2 = coefficient_constant(&a, 2, 0.2, 1.0, 2e-2, &e).unwrap();
        assert!((c1 / c2 - 2.0).abs() < 1e-10);
        // dominated by k = 0: c_0^2 = (0.2 * 2 sqrt 2 / pi)^2
        let c00 = (0.2 * 2.0 * std::f64::consts::SQRT_2 / std::f64::consts::PI).powi(2);
        assert!((c1 - c00 * 0.2 / 1e-2).abs() / c1 < 1e-4);
    }

    #[test]
    fn product_bound_constant_pair() {
        let g = Grid2D::new(65).unwrap();
        let a = DampingPair::constant(65, 1.0).unwrap();
        let r = product_bound_check(&g, &a, &ModeIndex::square(2)).unwrap();
        assert!(r.holds);
        // constant a: ratio is |grad phi| / sqrt(lambda) = 1 up to discretization
        for (_, v) in &r.ratios {
            assert!((v - 1.0).abs() < 0.02, "{v}");
        }
    }
}
