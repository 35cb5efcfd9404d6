mod common;

use common::{cubic_oracle, sign_changes, sup_diff_up_to_sign};
use polypass_core::functional::{energy, riesz_gradient, weak_residual};
use polypass_core::nonlinearity::DEFAULT_OSCILLATION_SHIFT;
use polypass_core::solver::{
    continuation_solve, mountain_pass_solve, symmetric_mountain_pass, MultiConfig, Schedule,
    SolveConfig, SolveError,
};
use polypass_core::{Grid, Law, NonlinearitySpec, Order};

fn cubic() -> NonlinearitySpec {
    NonlinearitySpec::new(Law::Power { q: 3.0 }).unwrap()
}

fn m1() -> Order {
    Order::new(1).unwrap()
}

#[test]
fn ground_state_matches_shooting() {
    let grid = Grid::with_modes(1, 128).unwrap();
    let cfg = SolveConfig::default();
    let t = mountain_pass_solve(&cubic(), &grid, m1(), &cfg).unwrap();
    assert!(t.converged && t.residual <= cfg.tol);
    let oracle = cubic_oracle(0, grid.node_len());
    let err = sup_diff_up_to_sign(&t.solution.to_grid(), &oracle);
    assert!(err <= 1e-4, "sup error {err:e}");
    assert_eq!(sign_changes(&t.solution.to_grid()), 0);
}

#[test]
fn converged_point_is_stationary() {
    let grid = Grid::with_modes(1, 64).unwrap();
    let m = m1();
    let cfg = SolveConfig::default();
    let spec = cubic();
    let t = mountain_pass_solve(&spec, &grid, m, &cfg).unwrap();
    let u = &t.solution;
    assert!(weak_residual(u, &spec, m).unwrap() <= 10.0 * cfg.tol);
    let g = riesz_gradient(u, &spec, m).unwrap();
    let j0 = energy(u, &spec, m).unwrap();
    let h = 1e-3;
    for s in [h, -h] {
        let j = energy(&u.add_scaled(s, &g).unwrap(), &spec, m).unwrap();
        assert!(j >= j0 - h * cfg.tol, "{j} vs {j0}");
    }
    for w in t.path_max_energy.windows(2) {
        assert!(w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs()));
    }
}

#[test]
fn linear_at_first_eigenvalue_has_no_valley() {
    let grid = Grid::with_modes(1, 16).unwrap();
    let spec = NonlinearitySpec::new(Law::Linear { a: 1.0 }).unwrap();
    let r = mountain_pass_solve(&spec, &grid, m1(), &SolveConfig::default());
    assert!(matches!(r, Err(SolveError::ValleyNotFound { .. })));
}

#[test]
fn three_pairs_of_cubic() {
    let grid = Grid::with_modes(1, 64).unwrap();
    let m = m1();
    let spec = cubic();
    let res = symmetric_mountain_pass(&spec, &grid, m, &MultiConfig::default()).unwrap();
    assert_eq!(res.traces.len(), 3);
    assert!(res.energies_increasing);
    for (k, t) in res.traces.iter().enumerate() {
        let vals = t.solution.to_grid();
        assert_eq!(sign_changes(&vals), k);
        let err = sup_diff_up_to_sign(&vals, &cubic_oracle(k, grid.node_len()));
        assert!(err <= 1e-3, "pair {k}: {err:e}");
        let minus = t.solution.scaled(-1.0);
        let r_plus = riesz_gradient(&t.solution, &spec, m).unwrap().norm_m(m);
        let r_minus = riesz_gradient(&minus, &spec, m).unwrap().norm_m(m);
        assert_eq!(r_plus, r_minus);
        assert!(r_plus <= 1e-8, "{r_plus:e}");
    }
}

#[test]
fn oscillating_continuation_stops() {
    let grid = Grid::with_modes(1, 64).unwrap();
    let m = m1();
    let spec = NonlinearitySpec::new(Law::Oscillating {
        p: 2.0,
        gamma: 1.0,
        q: 1.5,
        c: DEFAULT_OSCILLATION_SHIFT,
    })
    .unwrap();
    let t = continuation_solve(&spec, &grid, m, 2.0, &Schedule::default(), &SolveConfig::default())
        .unwrap();
    let k = t.stopped_at.unwrap();
    assert!(t.stages[k].sup_norm <= t.stages[k].s_n);
    assert!(t.untruncated_residual.unwrap() <= 1e-6);
}


#[test]
fn low_start_records_blowup_diagnostics() {
    let grid = Grid::with_modes(1, 32).unwrap();
    let m = m1();
    let spec = NonlinearitySpec::new(Law::Oscillating {
        p: 2.0,
        gamma: 1.0,
        q: 1.5,
        c: DEFAULT_OSCILLATION_SHIFT,
    })
    .unwrap();
    let sched = Schedule {
        s1: 1e-2,
        ratio: 10.0,
        n_max: 6,
    };
    let t = continuation_solve(&spec, &grid, m, 2.0, &sched, &SolveConfig::default()).unwrap();
    let k = t.stopped_at.unwrap();
    assert!(k > 0);
    assert_eq!(t.blowup.len(), k);
    for b in &t.blowup {
        assert!(b.q0 >= 0.0);
        assert_eq!(b.beta1, 2.0);
    }
}
