use dampwave::quadrature::trapezoid_product;
use dampwave::spectral::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn boundary_modes_orthonormal_on_fine_grid() {
    let n = 1025;
    let h = 1.0 / (n - 1) as f64;
    let tab: Vec<Vec<f64>> = (0..=8)
        .map(|k| (0..n).map(|i| eval_phi1d(k, i as f64 * h)).collect())
        .collect();
    for k in 0..=8 {
        for k2 in 0..=8 {
            let g = trapezoid_product(&tab[k], &tab[k2], h);
            let expect = if k == k2 { 1.0 } else { 0.0 };
            assert!((g - expect).abs() < 1e-5, "({k},{k2}): {g}");
        }
    }
}

#[test]
fn multiplier_bound_on_seeded_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 129;
    let mut violations = 0;
    for _ in 0..50 {
        let alpha: f64 = rng.random_range(0.55..=1.0);
        let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let base: f64 = rng.random_range(0.1..2.0);
        let a = SampledFunction1D::from_fn(n, |s| {
            base + 0.5 * c[0] * (3.0 * s).sin() + 0.3 * c[1] * s.powf(alpha)
        })
        .unwrap();
        let f = SampledFunction1D::from_fn(n, |s| {
            c[2] * eval_phi1d(0, s) + c[3] * eval_phi1d(2, s) + 0.2 * (7.0 * s).cos()
        })
        .unwrap();
        if !multiplier_bound_check(&a, &f, alpha).unwrap().holds {
            violations += 1;
        }
    }
    assert_eq!(violations, 0);
}

fn coeff_vec() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bessel_inequality_at_truncation(c in coeff_vec(), order in 0usize..6) {
        let n = 257;
        let f = SampledFunction1D::from_fn(n, |s| {
            c[0] + c[1] * s + c[2] * (4.0 * s).sin() + c[3] * s * s
                + c[4] * (9.0 * s).cos() + c[5] * (s - 0.3).abs()
        }).unwrap();
        let coeffs = fourier_project(&f, order, BoundarySide::Gamma11).unwrap();
        prop_assert!(coeffs.energy() <= f.l2_norm_sq() + 1e-8);
    }

    #[test]
    fn holder_one_is_max_slope(vals in prop::collection::vec(-5.0f64..5.0, 9..40)) {
        let f = SampledFunction1D::new(vals).unwrap();
        let h = f.spacing();
        let slope = f.values().windows(2).map(|w| ((w[1] - w[0]) / h).abs()).fold(0.0, f64::max);
        let got = holder_seminorm(&f, 1.0);
        prop_assert!((got - slope).abs() <= 1e-12 * slope.max(1.0));
    }

    #[test]
    fn synthesis_inverts_projection(c in prop::collection::vec(-1.0f64..1.0, 5)) {
        let fc = FourierCoeffs { side: BoundarySide::Gamma12, coeffs: c.clone() };
        let f = fourier_synthesize(&fc, 513).unwrap();
        let back = fourier_project(&f, 4, BoundarySide::Gamma12).unwrap();
        for (x, y) in back.coeffs.iter().zip(&c) {
            prop_assert!((x - y).abs() < 1e-5);
        }
    }

    #[test]
    fn norms_are_homogeneous(c in coeff_vec(), scale in -3.0f64..3.0) {
        let f = SampledFunction1D::from_fn(65, |s| c[0] + c[1] * (5.0 * s).sin() + c[2] * s).unwrap();
        let a = sobolev_norms(&f);
        let b = sobolev_norms(&f.scaled(scale));
        let k = scale.abs();
        prop_assert!((b.l2 - k * a.l2).abs() <= 1e-12 * (1.0 + k * a.l2));
        prop_assert!((b.h1 - k * a.h1).abs() <= 1e-12 * (1.0 + k * a.h1));
        prop_assert!((b.h_half - k * a.h_half).abs() <= 1e-12 * (1.0 + k * a.h_half));
        prop_assert!(a.l2 <= a.h_half + 1e-12 && a.l2 <= a.h1 + 1e-12);
    }

    #[test]
    fn smooth_differences_are_compatible(c in coeff_vec()) {
        let n = 513;
        let g1 = SampledFunction1D::from_fn(n, |s| c[0] + c[1] * s + c[2] * s * s).unwrap();
        let g2 = SampledFunction1D::from_fn(n, |s| c[0] + c[3] * s + c[4] * (2.0 * s).sin()).unwrap();
        prop_assert!(!compat_integral(&g1, &g2).unwrap().divergent);
    }
}
