use dampwave::inverse_source::Modulation;
use dampwave::spectral::*;
use dampwave::wave::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bump(grid: &Grid2D) -> Vec<f64> {
    let mut u = grid.field_from_fn(|x, y| (1.0 - x) * (1.0 - y) * (1.0 + x * y) * (2.0 * x + y).cos());
    grid.pin_dirichlet(&mut u);
    u
}

#[test]
fn undamped_energy_drift_small() {
    let g = Grid2D::new(129).unwrap();
    let t = TimeGrid::with_default_factor(&g, 4.0).unwrap();
    let tr = solve_free(&g, &bump(&g), &DampingPair::zero(129).unwrap(), t).unwrap();
    let e0 = tr.energy[0];
    let drift = tr.energy.iter().map(|e| (e - e0).abs() / e0).fold(0.0, f64::max);
    assert!(drift <= 1e-3, "drift {drift}");
    // the staggered energy is conserved to roundoff
    let s0 = tr.staggered_energy[0];
    assert!(tr.staggered_energy.iter().all(|s| (s - s0).abs() <= 1e-10 * s0));
}

#[test]
fn modal_exactness_second_order() {
    for mode in ModeIndex::square(1) {
        let omega = eigenpair(mode).omega;
        let mut errs = Vec::new();
        for n in [33, 65, 129] {
            let g = Grid2D::new(n).unwrap();
            let t = TimeGrid::with_default_factor(&g, 2.0).unwrap();
            let phi = g.mode_field(mode);
            let tr = solve_free(&g, &phi, &DampingPair::zero(n).unwrap(), t).unwrap();
            let c = (omega * t.tau()).cos();
            let diff: Vec<f64> = tr.final_state.u.iter().zip(&phi).map(|(u, p)| u - c * p).collect();
            errs.push(g.l2_norm(&diff));
        }
        let order = (errs[1] / errs[2]).log2();
        assert!(order >= 1.9, "{mode}: {errs:?}");
        assert!(errs[2] <= 1e-3, "{mode}: {errs:?}");
    }
}

#[test]
fn trace_check_converges_first_order() {
    let a = |n| DampingPair::affine(n, 0.5, 1.0).unwrap();
    let gaps: Vec<f64> = [65, 129]
        .iter()
        .map(|&n| {
            let g = Grid2D::new(n).unwrap();
            let t = TimeGrid::with_default_factor(&g, 1.0).unwrap();
            solve_free(&g, &g.mode_field(ModeIndex::new(0, 0)), &a(n), t)
                .unwrap()
                .trace
                .max_check_gap()
        })
        .collect();
    let ratio = gaps[0] / gaps[1];
    assert!(ratio > 1.7, "{gaps:?}");
}

#[test]
fn axis_swap_symmetry() {
    let n = 33;
    let g = Grid2D::new(n).unwrap();
    let t = TimeGrid::with_default_factor(&g, 1.0).unwrap();
    let a = DampingPair::affine(n, 0.4, 0.7).unwrap();
    let u0 = bump(&g);
    let r1 = solve_free(&g, &u0, &a, t).unwrap();
    let r2 = solve_free(&g, &g.transpose(&u0), &a.swapped(), t).unwrap();
    let back = g.transpose(&r2.final_state.u);
    let err = r1.final_state.u.iter().zip(&back).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(err < 1e-13, "{err}");
    for k in 0..=t.steps {
        assert_eq!(r1.trace.at(0, k), r2.trace.at(1, k));
    }
}

#[test]
fn riesz_dual_norm_characterization() {
    let n = 33;
    let g = Grid2D::new(n).unwrap();
    let w = SpatialFunctional::boundary(DampingPair::affine(n, 0.3, 0.5).unwrap(), ModeIndex::new(1, 0));
    let load = w.load(&g).unwrap();
    let sol = riesz_solve(&g, &w).unwrap();
    let apply = |psi: &[f64]| -> f64 { load.iter().zip(psi).map(|(a, b)| a * b).sum() };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let mut psi = g.field_from_fn(|x, y| {
            (1.0 - x) * (1.0 - y) * (c[0] + c[1] * x + c[2] * (3.0 * y).sin() + c[3] * x * y)
        });
        g.pin_dirichlet(&mut psi);
        assert!(apply(&psi).abs() <= sol.vprime_norm * g.grad_norm(&psi) * (1.0 + 1e-10));
    }
    let at_z = apply(&sol.z);
    let rhs = sol.vprime_norm * g.grad_norm(&sol.z);
    assert!((at_z - rhs).abs() <= 1e-6 * rhs);
}

#[test]
fn superposition_of_sources() {
    let n = 33;
    let g = Grid2D::new(n).unwrap();
    let t = TimeGrid::with_default_factor(&g, 1.0).unwrap();
    let a = DampingPair::constant(n, 0.3).unwrap();
    let lam = Modulation::on_time_grid(&t, |s| (2.0 * s).cos()).unwrap();
    let w1 = g.field_from_fn(|x, y| (1.0 - x) * (1.0 - y));
    let w2 = g.field_from_fn(|x, y| x * (1.0 - y) * (1.0 - x));
    let both: Vec<f64> = w1.iter().zip(&w2).map(|(p, q)| p + 2.0 * q).collect();
    let run = |w: &Vec<f64>| {
        let src = SourceSpec::new(lam.clone(), SpatialFunctional::Density(w.clone()));
        solve(&g, &g.zeros(), &g.zeros(), &a, Some(&src), t).unwrap().trace
    };
    let (t1, t2, t12) = (run(&w1), run(&w2), run(&both));
    for s in 0..2 {
        for ((x, y), z) in t1.normal(s).iter().zip(t2.normal(s)).zip(t12.normal(s)) {
            assert!((x + 2.0 * y - z).abs() <= 1e-12 * (1.0 + z.abs()));
        }
    }
}

#[test]
fn energy_csv_layout() {
    let g = Grid2D::new(17).unwrap();
    let t = TimeGrid::with_default_factor(&g, 0.1).unwrap();
    let tr = solve_free(&g, &bump(&g), &DampingPair::constant(17, 1.0).unwrap(), t).unwrap();
    let mut buf = Vec::new();
    tr.write_energy_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("t,energy,dissipation\n"));
    assert_eq!(text.lines().count(), t.steps + 2);
    assert!(!text.contains('\r'));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn damped_energy_never_increases(
        level in 0.0f64..3.0,
        slope in -0.9f64..2.0,
        curve in 0.0f64..1.0,
        amp in 0.1f64..2.0,
    ) {
        let n = 33;
        let g = Grid2D::new(n).unwrap();
        let t = TimeGrid::with_default_factor(&g, 1.5).unwrap();
        let a = DampingPair::new(
            SampledFunction1D::from_fn(n, |s| level * (1.0 + slope * s)).unwrap(),
            SampledFunction1D::from_fn(n, |s| level * (1.0 + curve * s * s)).unwrap(),
        ).unwrap();
        let u0: Vec<f64> = bump(&g).iter().map(|v| amp * v).collect();
        let tr = solve_free(&g, &u0, &a, t).unwrap();
        let e = &tr.staggered_energy;
        for w in e.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn trace_is_linear_in_data(c1 in -2.0f64..2.0, c2 in -2.0f64..2.0) {
        let n = 17;
        let g = Grid2D::new(n).unwrap();
        let t = TimeGrid::with_default_factor(&g, 0.5).unwrap();
        let a = DampingPair::affine(n, 0.7, 0.3).unwrap();
        let p = g.mode_field(ModeIndex::new(0, 1));
        let q = bump(&g);
        let mix: Vec<f64> = p.iter().zip(&q).map(|(x, y)| c1 * x + c2 * y).collect();
        let tp = solve_free(&g, &p, &a, t).unwrap().trace;
        let tq = solve_free(&g, &q, &a, t).unwrap().trace;
        let tm = solve_free(&g, &mix, &a, t).unwrap().trace;
        for s in 0..2 {
            for ((x, y), z) in tp.normal(s).iter().zip(tq.normal(s)).zip(tm.normal(s)) {
                prop_assert!((c1 * x + c2 * y - z).abs() <= 1e-10 * (1.0 + z.abs()));
            }
        }
    }
}
