mod common;

use common::{
    douglas_rachford_prox, gaussian, golden_min, joint_projected_gradient_dual, project_spectral_eig,
    prox_objective_ref, rng, soft_threshold_ref, svt_eig, trace_norm_eig, Matrix,
};
use proptest::prelude::*;
use rand::Rng;
use sptrace_core::prox::{
    composite_optimality_gap, dual_cd_solve, dual_cd_solve_with, project_linf_ball, project_spectral_ball,
    prox_composite, soft_threshold, svt, svt_optimality_gap, CdOptions, ProxInput,
};

const WEIGHTS: [f64; 3] = [0.1, 1.0, 5.0];

fn scaled_gaussian(rows: usize, cols: usize, scale: f64, seed: u64) -> Matrix {
    gaussian(rows, cols, &mut rng(seed)) * scale
}

#[test]
fn spectral_projection_matches_eigen_route_and_certificate() {
    let mut r = rng(11);
    for _ in 0..20 {
        let (rows, cols) = (r.random_range(1..=15), r.random_range(1..=15));
        let m = gaussian(rows, cols, &mut r) * r.random_range(0.1..3.0);
        let p = project_spectral_ball(&m).unwrap();
        assert!((&p - project_spectral_eig(&m)).norm() < 1e-8);
        // P is the projection iff ‖m − P‖_* ≤ ⟨m − P, P⟩ with P in the ball.
        let d = &m - &p;
        let cert = trace_norm_eig(&d) - d.dot(&p);
        assert!(cert <= 1e-8 * (1.0 + m.norm()), "certificate {cert:e}");
        assert!(common::singular_values_eig(&p)[0] <= 1.0 + 1e-8);
    }
}

#[test]
fn linf_projection_matches_per_entry_search() {
    let mut r = rng(12);
    for _ in 0..20 {
        let m = gaussian(6, 4, &mut r) * 2.0;
        let p = project_linf_ball(&m);
        for (x, px) in m.iter().zip(p.iter()) {
            let best = golden_min(|z| (z - x) * (z - x), -1.0, 1.0);
            assert!((best - px).abs() < 1e-6);
        }
    }
}

#[test]
fn soft_threshold_matches_scalar_search() {
    let mut r = rng(13);
    for _ in 0..200 {
        let v: f64 = r.random_range(-4.0..4.0);
        let tau: f64 = r.random_range(0.0..2.0);
        let out = soft_threshold(&Matrix::from_element(1, 1, v), tau).unwrap()[(0, 0)];
        let best = golden_min(
            |x| 0.5 * (x - v) * (x - v) + tau * x.abs(),
            -v.abs() - 1.0,
            v.abs() + 1.0,
        );
        assert!((out - best).abs() < 1e-6, "v={v} tau={tau}");
    }
}

#[test]
fn svt_matches_eigen_route_and_subgradient_test() {
    let mut r = rng(14);
    for _ in 0..20 {
        let m = gaussian(r.random_range(2..=10), r.random_range(2..=10), &mut r);
        let tau = r.random_range(0.05..2.0);
        let out = svt(&m, tau).unwrap();
        assert!((&out - svt_eig(&m, tau)).norm() < 1e-8);
        assert!(svt_optimality_gap(&m, tau, &out).unwrap() < 1e-9);
        // A shrunken but wrong candidate violates the condition.
        assert!(svt_optimality_gap(&m, tau, &(&out * 0.9)).unwrap() > 1e-6 || out.norm() == 0.0);
    }
}

#[test]
fn composite_prox_matches_douglas_rachford() {
    let mut r = rng(15);
    for i in 0..12 {
        let (rows, cols) = (r.random_range(2..=12), r.random_range(2..=10));
        let phi = gaussian(rows, cols, &mut r);
        let (ah, bh) = (WEIGHTS[i % 3], WEIGHTS[(i / 3) % 3]);
        let input = ProxInput::new(phi.clone(), ah, bh).unwrap();
        let out = prox_composite(&input, 1e-10, 10_000).unwrap();
        let ours = prox_objective_ref(&out.theta, &phi, ah, bh);
        let oracle = prox_objective_ref(&douglas_rachford_prox(&phi, ah, bh, 20_000), &phi, ah, bh);
        assert!(
            (ours - oracle).abs() <= 1e-6 * oracle.abs().max(1.0),
            "{ours} vs {oracle} at ({ah}, {bh})"
        );
    }
}

#[test]
fn dual_cd_matches_joint_projected_gradient_and_closes_gap() {
    let mut r = rng(16);
    for i in 0..6 {
        let phi = gaussian(r.random_range(2..=10), r.random_range(2..=8), &mut r);
        let (ah, bh) = (WEIGHTS[i % 3], WEIGHTS[(i + 1) % 3]);
        let input = ProxInput::new(phi.clone(), ah, bh).unwrap();
        let cd = dual_cd_solve(&input, 1e-13, 100_000).unwrap();
        let pg = joint_projected_gradient_dual(&phi, ah, bh, 20_000);
        assert!(
            (cd.objective - pg).abs() <= 1e-6 * pg.max(1.0),
            "{} vs {pg}",
            cd.objective
        );
        // Strong duality: primal optimum = ‖Φ̂‖² − dual optimum / 4.
        let primal = prox_objective_ref(&input.primal_from_dual(&cd.dual), &phi, ah, bh);
        let bound = phi.norm_squared() - cd.objective / 4.0;
        assert!(primal - bound <= 1e-5 * primal.max(1.0), "gap {}", primal - bound);
    }
}

#[test]
fn dual_cd_sweeps_on_two_to_one_gaussian_inputs() {
    for (seed, cols) in [15usize, 20, 30, 40, 60, 80].into_iter().enumerate() {
        let phi = gaussian(2 * cols, cols, &mut rng(100 + seed as u64));
        let input = ProxInput::new(phi, 1.0, 1.0).unwrap();
        let rel = dual_cd_solve_with(&input, CdOptions::relative(1e-8, 50)).unwrap();
        assert!(
            rel.converged && rel.sweeps <= 10,
            "{}x{cols}: {} sweeps",
            2 * cols,
            rel.sweeps
        );
    }
}

#[test]
fn dual_cd_converges_on_any_shape() {
    for seed in 0..8 {
        let mut r = rng(200 + seed);
        let phi = gaussian(r.random_range(10..=60), r.random_range(10..=40), &mut r);
        let input = ProxInput::new(phi, 1.0, 1.0).unwrap();
        let abs = dual_cd_solve(&input, 1e-8, 50).unwrap();
        assert!(abs.converged, "absolute rule hit the 50-sweep cap");
    }
}

#[test]
fn degenerate_weights_reduce_to_single_norm_maps() {
    let mut r = rng(17);
    for _ in 0..10 {
        let phi = gaussian(7, 5, &mut r);
        let tau = r.random_range(0.1..2.0);
        let trace_only = prox_composite(&ProxInput::new(phi.clone(), 2.0 * tau, 0.0).unwrap(), 1e-10, 50).unwrap();
        assert!((trace_only.theta - svt(&phi, tau).unwrap()).norm() < 1e-8);
        let l1_only = prox_composite(&ProxInput::new(phi.clone(), 0.0, 2.0 * tau).unwrap(), 1e-10, 50).unwrap();
        assert!((l1_only.theta - soft_threshold_ref(&phi, tau)).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn projections_idempotent(seed in any::<u64>(), scale in 0.1f64..5.0) {
        let m = scaled_gaussian(6, 4, scale, seed);
        let p = project_spectral_ball(&m).unwrap();
        prop_assert!((project_spectral_ball(&p).unwrap() - &p).norm() < 1e-12 * (1.0 + p.norm()) + 1e-12);
        let q = project_linf_ball(&m);
        prop_assert_eq!(project_linf_ball(&q), q);
    }

    #[test]
    fn projections_non_expansive(seed in any::<u64>(), scale in 0.1f64..5.0) {
        let a = scaled_gaussian(5, 5, scale, seed);
        let b = scaled_gaussian(5, 5, scale, seed.wrapping_add(1));
        let d = (&a - &b).norm();
        let ps = (project_spectral_ball(&a).unwrap() - project_spectral_ball(&b).unwrap()).norm();
        prop_assert!(ps <= d + 1e-10);
        prop_assert!((project_linf_ball(&a) - project_linf_ball(&b)).norm() <= d + 1e-10);
    }

    #[test]
    fn dual_objective_never_increases(seed in any::<u64>(), wa in 0usize..3, wb in 0usize..3) {
        let phi = scaled_gaussian(8, 6, 1.0, seed);
        let input = ProxInput::new(phi, WEIGHTS[wa], WEIGHTS[wb]).unwrap();
        let cd = dual_cd_solve(&input, 0.0, 40).unwrap();
        for w in cd.history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn prox_output_is_first_order_optimal(seed in any::<u64>(), wa in 0usize..3, wb in 0usize..3) {
        let phi = scaled_gaussian(8, 6, 1.0, seed);
        let input = ProxInput::new(phi.clone(), WEIGHTS[wa], WEIGHTS[wb]).unwrap();
        let out = prox_composite(&input, 1e-14, 200_000).unwrap();
        let gap = composite_optimality_gap(&out.theta, &out.dual).unwrap();
        prop_assert!(gap <= 1e-6 * (1.0 + phi.norm()), "gap {gap:e}");
    }
}
