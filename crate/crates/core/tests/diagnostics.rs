use dampwave::diagnostics::*;
use dampwave::spectral::{DampingPair, ModeIndex};
use dampwave::wave::{solve_free, Grid2D, TimeGrid};
use dampwave::Error;

#[test]
fn decay_rate_positive_for_constant_family() {
    let n = 65;
    let g = Grid2D::new(n).unwrap();
    let t = TimeGrid::with_default_factor(&g, 8.0).unwrap();
    let u0 = g.mode_field(ModeIndex::new(0, 0));
    for level in [0.5, 1.0, 2.0] {
        let a = DampingPair::constant(n, level).unwrap();
        let tr = solve_free(&g, &u0, &a, t).unwrap();
        let fit = fit_decay(&tr.energy, t.dt).unwrap();
        assert!(fit.omega_fit > 0.0, "a = {level}: {fit:?}");
        assert!(fit.relative_residual() <= 0.05, "a = {level}: {fit:?}");
    }
}

#[test]
fn observability_constant_non_increasing_in_tau() {
    let n = 33;
    let g = Grid2D::new(n).unwrap();
    let a = DampingPair::constant(n, 1.0).unwrap();
    let probes = ModeIndex::square(1);
    let kappas: Vec<f64> = [1.0, 2.0, 4.0]
        .iter()
        .map(|&tau| {
            let t = TimeGrid::with_default_factor(&g, tau).unwrap();
            estimate_observability(&g, &a, t, &probes).unwrap().kappa_est
        })
        .collect();
    assert!(kappas.windows(2).all(|w| w[1] <= w[0]), "{kappas:?}");
}

#[test]
fn observability_fails_without_damping() {
    let g = Grid2D::new(33).unwrap();
    let t = TimeGrid::with_default_factor(&g, 2.0).unwrap();
    let r = estimate_observability(&g, &DampingPair::zero(33).unwrap(), t, &default_probes());
    assert!(matches!(r, Err(Error::ZeroTrace(_))));
}
