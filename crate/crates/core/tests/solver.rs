mod common;

use common::*;
use nalgebra::DMatrix;
use rand::Rng;
use rglasso::solver::{
    check_convergence, update_f, update_s, update_theta, update_z, DualForm, IterationState, Termination,
};
use rglasso::{glasso_solve, rglasso_solve, SolverConfig, SymMatrix};

fn random_state(r: &mut impl Rng, p: usize) -> IterationState {
    let m = random_spd(r, p, 0.5);
    let mut s = IterationState::initial(&m, &SolverConfig::default());
    s.theta = random_spd(r, p, 0.2);
    s.z = random_sym(r, p, 1.0);
    s.f = random_spd(r, p, 0.0);
    s.s = random_sym(r, p, 1.0);
    s.u1 = random_sym(r, p, 0.5);
    s.u2 = random_sym(r, p, 0.5);
    s.mu1 = r.random_range(0.05..20.0);
    s.mu2 = r.random_range(0.05..20.0);
    s
}

/// Capped penalties so the two-block and three-block iterations both reach
/// tight tolerances.
fn capped() -> SolverConfig {
    SolverConfig {
        mu_max: Some(5.0),
        epsilon: 1e-10,
        max_iter: 20_000,
        ..SolverConfig::default()
    }
}

#[test]
fn theta_update_is_stationary() {
    let mut r = rng(100);
    for _ in 0..100 {
        let st = random_state(&mut r, 10);
        let theta = update_theta(&st).unwrap();
        let inv = theta.inverse().unwrap();
        let resid = inv.as_matrix() - st.f.as_matrix()
            - (theta.as_matrix() - st.z.as_matrix() + st.u1.as_matrix()) * st.mu1;
        assert!(resid.norm() / inv.frobenius() <= 1e-8);
        assert!(theta.min_eigenvalue().unwrap() > 0.0);
    }
}

#[test]
fn z_and_s_updates_match_scalar_prox_oracle() {
    let mut r = rng(101);
    for _ in 0..20 {
        let st = random_state(&mut r, 5);
        let m = random_spd(&mut r, 5, 0.5);
        let rho = r.random_range(0.0..1.0);
        let lambda = r.random_range(0.0..1.0);
        let z = update_z(&st, rho);
        let s = update_s(&st, &m, lambda);
        for i in 0..5 {
            for j in 0..5 {
                let a = st.theta.get(i, j) + st.u1.get(i, j);
                let oracle = golden_section(
                    |x| rho * x.abs() + 0.5 * st.mu1 * (x - a).powi(2),
                    a - 10.0,
                    a + 10.0,
                );
                assert!((z.get(i, j) - oracle).abs() < 1e-6);
                let b = m.get(i, j) - st.f.get(i, j) + st.u2.get(i, j);
                let oracle = golden_section(
                    |x| lambda * x.abs() + 0.5 * st.mu2 * (x - b).powi(2),
                    b - 10.0,
                    b + 10.0,
                );
                assert!((s.get(i, j) - oracle).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn z_update_trivial() {
    let mut st = random_state(&mut rng(102), 4);
    let sum = &st.theta + &st.u1;
    assert_eq!(update_z(&st, 0.0), sum);
    st.mu1 = 1.0;
    assert_eq!(update_z(&st, sum.max_abs() * 1.01), SymMatrix::zeros(4));
}

#[test]
fn f_update_trivial() {
    let m = random_spd(&mut rng(103), 4, 0.1);
    let mut st = IterationState::initial(&m, &SolverConfig::default());
    st.theta = SymMatrix::zeros(4);
    assert_eq!(update_f(&st, &m, DualForm::Scaled).unwrap(), SymMatrix::zeros(4));
    st.s = SymMatrix::zeros(4);
    let f = update_f(&st, &m, DualForm::Scaled).unwrap();
    assert!(rel_err(f.as_matrix(), m.as_matrix()) < 1e-10);
}

/// `F` minimizes `<Θ, F> + mu2/2 ‖M - F - S + U2‖²` over the PSD cone: the
/// gradient at `F` has a nonnegative inner product with every feasible direction.
#[test]
fn f_update_satisfies_cone_kkt() {
    let mut r = rng(104);
    for _ in 0..20 {
        let p = 6;
        let st = random_state(&mut r, p);
        let m = random_spd(&mut r, p, 0.5);
        let f = update_f(&st, &m, DualForm::Scaled).unwrap();
        assert!(f.min_eigenvalue().unwrap() > -1e-9);
        let target = m.as_matrix() - st.s.as_matrix() + st.u2.as_matrix();
        let grad = st.theta.as_matrix() + (f.as_matrix() - &target) * st.mu2;
        let objective = |x: &DMatrix<f64>| {
            st.theta.as_matrix().dot(x) + 0.5 * st.mu2 * (&target - x).norm_squared()
        };
        let base = objective(f.as_matrix());
        let scale = grad.norm().max(1.0);
        for _ in 0..50 {
            let b = random_matrix(&mut r, p, p, 1.0);
            let x = &b * b.transpose();
            let dir = &x - f.as_matrix();
            assert!(grad.dot(&dir) >= -1e-8 * scale * dir.norm());
            // projected-gradient style probe: no feasible step lowers the objective
            for t in [1e-3, 1e-2, 0.1] {
                let trial = f.as_matrix() + &dir * t;
                assert!(objective(&trial) >= base - 1e-9 * base.abs().max(1.0));
            }
        }
        // F and the gradient are complementary
        assert!(grad.dot(f.as_matrix()).abs() < 1e-8 * scale * f.frobenius().max(1.0));
    }
}

#[test]
fn convergence_check_cases() {
    let m = random_spd(&mut rng(105), 3, 0.5);
    let t = random_spd(&mut rng(106), 3, 0.5);
    let f = m.scale(0.25);
    let s = m.scale(0.75);
    let c = check_convergence(&t, &t, &m, &f, &s, 1e-7).unwrap();
    assert_eq!((c.delta1, c.converged), (0.0, true));
    assert!(c.delta2 < 1e-15);
    let c = check_convergence(&t, &t.scale(2.0), &m, &f, &s, 1e-7).unwrap();
    assert!((c.delta1 - 1.0).abs() < 1e-15);

    let prev = SymMatrix::from_row_slice(2, &[1.0, 0.0, 0.0, 1.0]).unwrap();
    let next = SymMatrix::from_row_slice(2, &[2.0, 1.0, 1.0, 1.0]).unwrap();
    let m = SymMatrix::from_row_slice(2, &[4.0, 0.0, 0.0, 3.0]).unwrap();
    let f = SymMatrix::from_row_slice(2, &[1.0, 0.0, 0.0, 1.0]).unwrap();
    let s = SymMatrix::from_row_slice(2, &[1.0, 0.0, 0.0, 2.0]).unwrap();
    let c = check_convergence(&prev, &next, &m, &f, &s, 1e-7).unwrap();
    // ‖[[1,1],[1,0]]‖ = √3, ‖I‖ = √2; ‖diag(2,0)‖ = 2, ‖diag(4,3)‖ = 5
    assert!((c.delta1 - (3f64 / 2.0).sqrt()).abs() < 1e-15);
    assert!((c.delta2 - 0.4).abs() < 1e-15);
    assert!(!c.converged);
}

#[test]
fn solve_identity() {
    let m = SymMatrix::identity(5);
    let cfg = SolverConfig {
        rho: 0.0,
        lambda: 1e6,
        ..capped()
    };
    let r = rglasso_solve(&m, &cfg).unwrap();
    assert_eq!(r.s, SymMatrix::zeros(5));
    assert!(rel_err(r.theta.as_matrix(), &DMatrix::identity(5, 5)) < 1e-6);
    let r = rglasso_solve(&m, &SolverConfig::with_penalties(0.3, 1e6)).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            if i != j {
                assert!(r.theta.get(i, j).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn glasso_large_rho_is_diagonal_scalar_solution() {
    let m = random_spd(&mut rng(107), 8, 1.0);
    let rho = 10.0 * m.max_abs();
    let theta = glasso_solve(&m, rho, &capped()).unwrap();
    for i in 0..8 {
        // minimizer of -log t + m_ii t + rho t on t > 0
        let mii = m.get(i, i);
        let oracle = golden_section(|t| -t.ln() + (mii + rho) * t, 1e-9, 10.0);
        assert!((theta.get(i, i) - oracle).abs() < 1e-6 * oracle.max(1.0));
        for j in 0..8 {
            if i != j {
                assert!(theta.get(i, j).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn glasso_rho_zero_inverts() {
    let m = random_spd(&mut rng(108), 6, 1.0);
    let theta = glasso_solve(&m, 0.0, &capped()).unwrap();
    assert!(rel_err(theta.as_matrix(), m.inverse().unwrap().as_matrix()) < 1e-6);
}

#[test]
fn reduction_to_glasso() {
    let mut r = rng(109);
    for p in [5, 20, 50] {
        for _ in 0..20 {
            let b = random_matrix(&mut r, p, 2 * p, 1.0);
            let m = SymMatrix::new(&b * b.transpose() / (2 * p) as f64 + DMatrix::identity(p, p) * 0.1).unwrap();
            let rho = r.random_range(0.01..0.2);
            let cfg = SolverConfig {
                rho,
                lambda: 1e6 * m.max_abs(),
                ..capped()
            };
            let res = rglasso_solve(&m, &cfg).unwrap();
            assert_eq!(res.s, SymMatrix::zeros(p));
            assert!(rel_err(res.f.as_matrix(), m.as_matrix()) < 1e-6);
            let g = glasso_solve(&m, rho, &cfg).unwrap();
            assert!(rel_err(res.theta.as_matrix(), g.as_matrix()) < 1e-6, "p={p}");
        }
    }
}

#[test]
fn result_invariants() {
    let mut r = rng(110);
    let m = random_spd(&mut r, 12, 0.5);
    let res = rglasso_solve(&m, &SolverConfig::with_penalties(0.05, 0.5)).unwrap();
    assert_eq!(res.delta1_history.len(), res.iterations);
    assert_eq!(res.delta2_history.len(), res.iterations);
    let resid = (m.as_matrix() - res.f.as_matrix() - res.s.as_matrix()).norm() / m.frobenius();
    assert!((resid - res.final_delta2()).abs() < 1e-12);
    assert!(res.theta.min_eigenvalue().unwrap() > 0.0);
    assert!(res.f.min_eigenvalue().unwrap() >= -1e-10);
    if res.termination == Termination::Converged {
        assert!(res.final_delta1() < 1e-7 && res.final_delta2() < 1e-7);
    }
}

#[test]
fn iterates_stay_symmetric() {
    let m = random_spd(&mut rng(111), 7, 0.5);
    let mut solver = rglasso::solver::Solver::new(&m, SolverConfig::with_penalties(0.1, 0.3)).unwrap();
    for _ in 0..30 {
        solver.step().unwrap();
        let st = solver.state();
        for x in [&st.theta, &st.z, &st.f, &st.s, &st.u1, &st.u2] {
            assert_eq!(x.as_matrix(), &x.as_matrix().transpose());
        }
    }
}

#[test]
fn rejects_bad_inputs() {
    assert!(rglasso_solve(&SymMatrix::zeros(3), &SolverConfig::default()).is_err());
    let bad = SolverConfig {
        beta: 0.5,
        ..SolverConfig::default()
    };
    assert!(rglasso_solve(&SymMatrix::identity(3), &bad).is_err());
    for cfg in [
        SolverConfig { rho: -1.0, ..SolverConfig::default() },
        SolverConfig { mu1_init: 0.0, ..SolverConfig::default() },
        SolverConfig { epsilon: 0.0, ..SolverConfig::default() },
        SolverConfig { max_iter: 0, ..SolverConfig::default() },
    ] {
        let e = cfg.validate().unwrap_err();
        assert_eq!(e.category(), rglasso::ErrorCategory::Usage);
    }
}

#[test]
fn planted_small_instance_recovers_support() {
    // 10×10 tridiagonal information matrix with three symmetric anomaly pairs of size 100
    let theta0 = SymMatrix::from_fn(10, |i, j| match i.abs_diff(j) {
        0 => 1.0,
        1 => 0.5,
        _ => 0.0,
    })
    .unwrap();
    let mut s0 = DMatrix::zeros(10, 10);
    for (i, j) in [(0, 5), (2, 8), (4, 9)] {
        s0[(i, j)] = 100.0;
        s0[(j, i)] = 100.0;
        s0[(i, i)] += 100.0;
        s0[(j, j)] += 100.0;
    }
    let s0 = SymMatrix::new(s0).unwrap();
    let m = &theta0.inverse().unwrap() + &s0;
    let mut exact = 0;
    for lambda in [0.5, 1.0, 2.0, 4.0] {
        let res = rglasso_solve(&m, &SolverConfig::with_penalties(0.05, lambda)).unwrap();
        let tol = rglasso::score::relative_support_tol(&res.s, 1e-4);
        let score = rglasso::f1_support_score(&res.s, &s0, tol).unwrap();
        if score.f1 == 1.0 {
            exact += 1;
        }
    }
    assert!(exact > 0, "no lambda in the sweep recovered the planted pairs");
}
