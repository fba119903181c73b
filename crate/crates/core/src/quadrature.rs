//! Composite trapezoid rules on uniform nodes.

/// Trapezoid weights for `n` uniform nodes with spacing `h`.
pub fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    if n > 0 {
        w[0] *= 0.5;
        w[n - 1] *= 0.5;
    }
    if n == 1 {
        w[0] = 0.0;
    }
    w
}

/// Unit-spacing trapezoid end factor: 0.5 at the ends, 1 inside.
#[inline]
pub fn end_factor(i: usize, n: usize) -> f64 {
    if i == 0 || i + 1 == n {
        0.5
    } else {
        1.0
    }
}

pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..n - 1].iter().sum();
    h * (inner + 0.5 * (values[0] + values[n - 1]))
}

/// Trapezoid of the pointwise product `f * g`.
pub fn trapezoid_product(f: &[f64], g: &[f64], h: f64) -> f64 {
    debug_assert_eq!(f.len(), g.len());
    let n = f.len();
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = (1..n - 1).map(|i| f[i] * g[i]).sum();
    h * (inner + 0.5 * (f[0] * g[0] + f[n - 1] * g[n - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_linear_exactly() {
        let n = 11;
        let h = 0.1;
        let v: Vec<f64> = (0..n).map(|i| 3.0 * i as f64 * h + 1.0).collect();
        assert!((trapezoid(&v, h) - 2.5).abs() < 1e-14);
    }

    #[test]
    fn weights_sum_to_length() {
        let w = trapezoid_weights(65, 1.0 / 64.0);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }
}
