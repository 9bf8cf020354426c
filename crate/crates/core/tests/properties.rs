mod common;

use common::{dense, eig, instance, precond_kappa};
use precond_core::{
    extract_feasible, gaussian_rhs, parse_matrix_market, jacobi, lambda_min_lower_bound, lanczos_both, matvec, optimize_in_subspace,
    pcg_solve, pricing, random_subspace, ruiz, scaled_row_norms, solve_lp,
    solve_subspace_sdp, write_matrix_market_to, Basis, Block, ConstraintOperator, DiagonalVec, EntryDist,
    LanczosConfig, LinearOperator, LpProblem, LpStatus, PricingNorm, RowOrigin, SipConfig, SipStatus,
};
use proptest::prelude::*;

fn dist() -> impl Strategy<Value = EntryDist> {
    prop_oneof![Just(EntryDist::Uniform01), Just(EntryDist::StdNormal)]
}

fn small_instance() -> impl Strategy<Value = (usize, f64, f64, EntryDist, u64)> {
    (4usize..24, 0.2f64..1.0, 0.01f64..1.0, dist(), any::<u64>())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn matvec_is_symmetric((n, s, a, d, seed) in small_instance(), x in prop::collection::vec(-1.0f64..1.0, 24), y in prop::collection::vec(-1.0f64..1.0, 24)) {
        let m = instance(n, s, a, d, seed);
        let (x, y) = (&x[..n], &y[..n]);
        let mx = matvec(&m, x).unwrap();
        let my = matvec(&m, y).unwrap();
        let scale = m.inf_norm() * n as f64;
        prop_assert!((dot(&mx, y) - dot(x, &my)).abs() <= 1e-12 * scale);
    }

    #[test]
    fn generator_is_deterministic_and_spd((n, s, a, d, seed) in small_instance()) {
        let m1 = instance(n, s, a, d, seed);
        let m2 = instance(n, s, a, d, seed);
        prop_assert_eq!(m1.values(), m2.values());
        prop_assert_eq!(m1.col_idx(), m2.col_idx());
        let (vals, _) = eig(&dense(&m1));
        prop_assert!(vals[0] >= a * (1.0 - 1e-8));
    }

    #[test]
    fn matrix_market_round_trip((n, s, a, d, seed) in small_instance()) {
        let m = instance(n, s, a, d, seed);
        let mut buf = Vec::new();
        write_matrix_market_to(&m, &mut buf).unwrap();
        let back = parse_matrix_market(&buf[..]).unwrap();
        prop_assert_eq!(back.n(), m.n());
        prop_assert_eq!(back.values(), m.values());
        prop_assert_eq!(back.col_idx(), m.col_idx());
    }

    #[test]
    fn constraint_operator_matches_definition((n, s, a, d, seed) in small_instance(), tau in 0.0f64..2.0, z0 in 0.1f64..3.0, x in prop::collection::vec(-1.0f64..1.0, 24)) {
        let m = instance(n, s, a, d, seed);
        let x = &x[..n];
        let jac = jacobi(&m).unwrap();
        let basis = vec![DiagonalVec::ones(n), jac.clone()];
        let z = [z0, 0.5];
        let mx = matvec(&m, x).unwrap();
        let dx: Vec<f64> = (0..n).map(|i| (z[0] + z[1] * jac.as_slice()[i]) * x[i]).collect();
        let one = ConstraintOperator::new(&m, &basis, &z, tau, Block::One).unwrap();
        let two = ConstraintOperator::new(&m, &basis, &z, tau, Block::Two).unwrap();
        let (o1, o2) = (one.apply(x), two.apply(x));
        for i in 0..n {
            let tol = 1e-12 * (1.0 + mx[i].abs() + dx[i].abs());
            prop_assert!((o1[i] - (dx[i] - tau * mx[i])).abs() <= tol);
            prop_assert!((o2[i] - (mx[i] - dx[i])).abs() <= tol);
        }
    }

    #[test]
    fn ritz_values_stay_inside_spectrum((n, s, a, d, seed) in small_instance()) {
        let m = instance(n, s, a, d, seed);
        let (vals, _) = eig(&dense(&m));
        let p = lanczos_both(&m, &LanczosConfig { seed, ..LanczosConfig::default() }).unwrap();
        let tol = 1e-10 * vals[n - 1];
        prop_assert!(p.smallest.value >= vals[0] - tol);
        prop_assert!(p.largest.value <= vals[n - 1] + tol);
        prop_assert!((p.smallest.value - vals[0]).abs() <= 1e-8 * vals[n - 1]);
        prop_assert!((p.largest.value - vals[n - 1]).abs() <= 1e-8 * vals[n - 1]);
    }

    #[test]
    fn lambda_lower_bound_is_valid((n, s, a, d, seed) in small_instance()) {
        let m = instance(n, s, a, d, seed);
        let (vals, _) = eig(&dense(&m));
        let (lb, _) = lambda_min_lower_bound(&m, &LanczosConfig::default()).unwrap();
        prop_assert!(lb <= vals[0] * (1.0 + 1e-12));
    }

    #[test]
    fn pricing_attains_unit_norm_and_dual_value(g in prop::collection::vec(-5.0f64..5.0, 1..20)) {
        prop_assume!(g.iter().any(|x| x.abs() > 1e-6));
        let gd = DiagonalVec::new(g.clone()).unwrap();
        let l1 = g.iter().map(|x| x.abs()).sum::<f64>();
        let l2 = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        let linf = g.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        for (p, dual) in [(PricingNorm::L1, linf), (PricingNorm::L2, l2), (PricingNorm::Linf, l1)] {
            let d = pricing(&gd, p).unwrap();
            prop_assert!((dot(d.as_slice(), &g) - dual).abs() <= 1e-12 * (1.0 + dual));
        }
    }

    #[test]
    fn jacobi_gives_unit_diagonal_and_ruiz_balances_rows((n, s, a, d, seed) in small_instance()) {
        let m = instance(n, s, a, d, seed);
        let jac = jacobi(&m).unwrap();
        for (mi, di) in m.diagonal().iter().zip(jac.as_slice()) {
            prop_assert!((mi / di - 1.0).abs() <= 1e-14);
        }
        let rz = ruiz(&m, 50, 1e-6).unwrap();
        prop_assert!(rz.is_positive());
        let norms = scaled_row_norms(&m, rz.as_slice());
        prop_assert!(norms.iter().all(|r| (r - 1.0).abs() <= 1e-3));
    }

    #[test]
    fn random_subspaces_are_nested(n in 5usize..30, k in 0usize..4, seed in any::<u64>()) {
        let small = random_subspace(n, k, seed).unwrap();
        let big = random_subspace(n, k + 1, seed).unwrap();
        prop_assert_eq!(small.k() + 1, big.k());
        for (a, b) in small.vectors().iter().zip(big.vectors()) {
            prop_assert_eq!(a.as_slice(), b.as_slice());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_lps_satisfy_strong_duality(p in 2usize..5, extra in 1usize..8, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..p + extra).map(|_| (0..p).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let y0: Vec<f64> = rows.iter().map(|_| rng.random::<f64>()).collect();
        let c: Vec<f64> = (0..p).map(|j| rows.iter().zip(&y0).map(|(r, y)| r[j] * y).sum()).collect();
        let mut lp = LpProblem::new(c);
        for r in rows {
            lp.push_row(r, rng.random_range(0.1..1.0), RowOrigin::Auxiliary);
        }
        let sol = solve_lp(&lp, 1e-10).unwrap();
        prop_assert_eq!(sol.status, LpStatus::Optimal);
        let by = dot(&lp.b, &sol.y);
        prop_assert!((by - sol.objective).abs() <= 1e-8 * (1.0 + sol.objective.abs()));
        for (i, r) in lp.a.iter().enumerate() {
            let slack = lp.b[i] - dot(r, &sol.x);
            prop_assert!(slack >= -1e-8);
            prop_assert!(sol.y[i] >= 0.0);
            prop_assert!((sol.y[i] * slack).abs() <= 1e-8);
        }
    }

    #[test]
    fn extracted_bound_certifies_dense_condition_number((n, s, a, d, seed) in small_instance()) {
        let m = instance(n, s, a, d, seed);
        let cfg = SipConfig { seed, ..SipConfig::default() };
        let basis = Basis::new_dedup(vec![DiagonalVec::ones(n), jacobi(&m).unwrap()]).unwrap();
        let sol = solve_subspace_sdp(&m, &basis, &cfg).unwrap();
        prop_assert_eq!(sol.status, SipStatus::Converged);
        let (lb, _) = lambda_min_lower_bound(&m, &cfg.lanczos).unwrap();
        let ex = extract_feasible(&sol, &basis, &m, lb, &cfg.lanczos).unwrap();
        prop_assert!(ex.tau_prime > 0.0 && ex.tau_prime <= sol.tau_hat * (1.0 + 1e-12));
        let dd = basis.combine(&ex.z_prime);
        prop_assert!(precond_kappa(&m, &dd) <= (1.0 / ex.tau_prime) * (1.0 + 1e-6));
    }

    #[test]
    fn subspace_bound_never_beats_dense_value((n, s, a, d, seed) in small_instance()) {
        let m = instance(n, s, a, d, seed);
        let basis = Basis::new_dedup(vec![DiagonalVec::ones(n), jacobi(&m).unwrap()]).unwrap();
        let res = optimize_in_subspace(&m, &basis, &SipConfig { seed, ..SipConfig::default() }).unwrap();
        let dense_k = precond_kappa(&m, res.d.as_slice());
        prop_assert!(res.kappa_bound >= dense_k * (1.0 - 1e-8));
        if res.certified {
            prop_assert!(dense_k <= res.kappa_bound * (1.0 + 1e-6));
        }
    }

    #[test]
    fn pcg_reaches_tolerance((n, s, a, d, seed) in small_instance()) {
        let m = instance(n, s, a, d, seed);
        let b = gaussian_rhs(&m, seed);
        let jac = jacobi(&m).unwrap();
        let r = pcg_solve(&m, &b, &jac, 1e-10, 10_000, 0).unwrap();
        prop_assert!(r.converged);
        let ax = matvec(&m, &r.x).unwrap();
        let res: f64 = ax.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(res <= 1.1e-10 * nb);
    }
}
