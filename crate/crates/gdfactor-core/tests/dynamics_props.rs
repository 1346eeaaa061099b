//! Properties of the gradient dynamic: agreement of the update direction
//! with a finite-difference gradient of the objective, exact symmetry
//! preservation, equivariance under the target's orthogonal frame change,
//! objective invariance under factor rescaling, the initialization norm
//! bound at desk scale, and the overfitting shape of the test error.

use gdfactor_core::{
    gaussian_matrix, gd_step, init_factors, init_factors_symmetric, objective_value,
    operator_norm, run, select_early_stop, synth_matrix, FactorPair, GdConfig, Matrix64,
    RngStream,
};

fn cfg(eta: f64, rho: f64, k: usize, max_iters: u64, record_every: u64, seed: u64) -> GdConfig<f64> {
    GdConfig {
        eta,
        rho,
        k,
        max_iters,
        record_every,
        seed,
    }
}

/// Central finite differences of the quarter-normalized objective in every
/// entry of F (or G when `wrt_g`).
fn fd_gradient(pair: &FactorPair<f64>, x: &Matrix64, wrt_g: bool, h: f64) -> Matrix64 {
    let base = if wrt_g { &pair.g } else { &pair.f };
    Matrix64::from_fn(base.rows(), base.cols(), |i, j| {
        let mut plus = base.clone();
        plus.set(i, j, base.get(i, j) + h);
        let mut minus = base.clone();
        minus.set(i, j, base.get(i, j) - h);
        let (fp, fm) = if wrt_g {
            (
                FactorPair::new(pair.f.clone(), plus).unwrap(),
                FactorPair::new(pair.f.clone(), minus).unwrap(),
            )
        } else {
            (
                FactorPair::new(plus, pair.g.clone()).unwrap(),
                FactorPair::new(minus, pair.g.clone()).unwrap(),
            )
        };
        (objective_value(&fp, x) - objective_value(&fm, x)) / (2.0 * h)
    })
}

#[test]
fn step_direction_matches_finite_difference_gradient() {
    // The iteration moves by −2η·∇ of the quarter-normalized objective
    // (equivalently −η·∇ of the half-normalized one), so (F⁺−F)/η must equal
    // −2·∇_F within 1e-5 relative on small random instances; same for G.
    let mut dims = RngStream::new(60);
    for case in 0..50u64 {
        let m = 2 + (dims.next_u64() % 4) as usize;
        let n = 2 + (dims.next_u64() % 4) as usize;
        let k = 1 + (dims.next_u64() % 5) as usize;
        let mut rng = RngStream::new(9000 + case);
        let x = gaussian_matrix::<f64>(m, n, 1.0, &mut rng).unwrap();
        let pair = FactorPair::new(
            gaussian_matrix::<f64>(m, k, 1.0, &mut rng).unwrap(),
            gaussian_matrix::<f64>(n, k, 1.0, &mut rng).unwrap(),
        )
        .unwrap();
        let eta = 1e-3;
        let next = gd_step(&pair, &x, eta).unwrap();
        let dir_f = next.f.sub(&pair.f).scaled(1.0 / eta);
        let dir_g = next.g.sub(&pair.g).scaled(1.0 / eta);
        let grad_f = fd_gradient(&pair, &x, false, 1e-5);
        let grad_g = fd_gradient(&pair, &x, true, 1e-5);
        let dev_f = dir_f.add_scaled(&grad_f, 2.0).frobenius_norm();
        let dev_g = dir_g.add_scaled(&grad_g, 2.0).frobenius_norm();
        assert!(
            dev_f <= 1e-5 * dir_f.frobenius_norm(),
            "case {case} ({m}x{n}, k={k}): F deviation {dev_f}"
        );
        assert!(
            dev_g <= 1e-5 * dir_g.frobenius_norm(),
            "case {case} ({m}x{n}, k={k}): G deviation {dev_g}"
        );
    }
}

#[test]
fn symmetric_target_with_shared_draw_keeps_factors_bitwise_equal() {
    // X symmetric PSD and G̃₀ = F̃₀: both update expressions see the same
    // numbers in the same order, so the factors never separate, exactly.
    let n = 7;
    let k = 4;
    let mut rng = RngStream::new(11);
    let c = gaussian_matrix::<f64>(n, n, 1.0, &mut rng).unwrap();
    let x = c.matmul_transb(&c).scaled(1.0 / n as f64);
    let config = cfg(0.02, 1e-4, k, 0, 1, 23);
    let mut pair = init_factors_symmetric(n, n, &config, 1.0).unwrap();
    assert_eq!(pair.f, pair.g);
    for _ in 0..200 {
        pair = gd_step(&pair, &x, 0.02).unwrap();
        assert_eq!(pair.f, pair.g);
    }
}

#[test]
fn trajectory_is_equivariant_under_the_target_frame_rotation() {
    // Running on X versus running on its diagonal form Σ_X with the
    // correspondingly rotated start must give iterates related by the exact
    // frame rotation at every step.
    let (m, n, k) = (7, 6, 4);
    let mut rng = RngStream::new(301);
    let (x, frame) = synth_matrix::<f64>(m, n, &[1.5, 1.0, 0.5], &mut rng).unwrap();
    let diag = Matrix64::diagonal(m, n, frame.singular_values());
    let config = cfg(0.05, 1e-5, k, 0, 1, 8);
    let mut plain = init_factors(m, n, &config, 1.5).unwrap();
    let mut rotated = FactorPair::new(
        frame.left().tr_matmul(&plain.f),
        frame.right().tr_matmul(&plain.g),
    )
    .unwrap();
    for t in 0..80 {
        plain = gd_step(&plain, &x, config.eta).unwrap();
        rotated = gd_step(&rotated, &diag, config.eta).unwrap();
        let back_f = frame.left().matmul(&rotated.f);
        let back_g = frame.right().matmul(&rotated.g);
        let dev_f = plain.f.sub(&back_f).frobenius_norm();
        let dev_g = plain.g.sub(&back_g).frobenius_norm();
        assert!(
            dev_f <= 1e-8 * plain.f.frobenius_norm(),
            "step {t}: F deviation {dev_f}"
        );
        assert!(
            dev_g <= 1e-8 * plain.g.frobenius_norm(),
            "step {t}: G deviation {dev_g}"
        );
    }
}

#[test]
fn objective_is_invariant_under_random_reciprocal_rescalings() {
    let mut rng = RngStream::new(505);
    let x = gaussian_matrix::<f64>(5, 4, 1.0, &mut rng).unwrap();
    let f = gaussian_matrix::<f64>(5, 3, 1.0, &mut rng).unwrap();
    let g = gaussian_matrix::<f64>(4, 3, 1.0, &mut rng).unwrap();
    let pair = FactorPair::new(f.clone(), g.clone()).unwrap();
    let value = objective_value(&pair, &x);
    for _ in 0..20 {
        // c uniform in [0.1, 10] on a log scale
        let c = 10f64.powf(rng.next_uniform() * 2.0 - 1.0);
        let scaled = FactorPair::new(f.scaled(c), g.scaled(1.0 / c)).unwrap();
        let dev = (objective_value(&scaled, &x) - value).abs();
        assert!(dev <= 1e-12 * value, "c = {c}: deviation {dev}");
    }
}

#[test]
fn initialization_operator_norm_stays_below_rho_sqrt_sigma1_at_desk_scale() {
    // m=250, n=200, k=50, ρ=1e-6, unit σ₁: ‖F₀‖ ≤ ρ√σ₁ across 100 seeds
    // (the prefactor ρ/(3√(m+n+k)) absorbs the Gaussian matrix norm).
    let (m, n, k) = (250, 200, 50);
    let rho = 1e-6;
    let sigma1 = 1.0;
    for seed in 0..100 {
        let config = cfg(0.05, rho, k, 0, 1, seed);
        let pair = init_factors(m, n, &config, sigma1).unwrap();
        let bound = rho * sigma1.sqrt();
        let norm_f = operator_norm(&pair.f);
        let norm_g = operator_norm(&pair.g);
        assert!(norm_f <= bound, "seed {seed}: ‖F₀‖ = {norm_f} > {bound}");
        assert!(norm_g <= bound, "seed {seed}: ‖G₀‖ = {norm_g} > {bound}");
    }
}

#[test]
fn desk_scale_run_overfits_after_an_interior_test_error_minimum() {
    // 250×200 target with three singular values (2/3, 2/3, 1/3) — unit
    // Frobenius norm, relative gap 1/2 at rank 2 — fit with r=2, k=50,
    // ρ=1e-6, η=0.05: the rank-2 test error must dip and come back up.
    let (m, n, k) = (250, 200, 50);
    let values = [2.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0];
    let mut rng = RngStream::new(51);
    let (x, frame) = synth_matrix::<f64>(m, n, &values, &mut rng).unwrap();
    assert!((x.frobenius_norm() - 1.0).abs() < 1e-10);
    let config = cfg(0.05, 1e-6, k, 2000, 10, 7);
    let out = run(&x, &frame, 2, &config, false).unwrap();
    let test = &out.record.test_error_fro;
    let (min_idx, min_val) = test
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, &v)| (i, v))
        .unwrap();
    assert!(min_idx > 0, "test error should dip after the start");
    assert!(
        min_idx < test.len() - 1,
        "test error should rise again before the end"
    );
    assert!(min_val < test[0], "interior minimum must beat the start");
    assert!(
        min_val < *test.last().unwrap(),
        "interior minimum must beat the final record"
    );
    // the empirical stop agrees with the operator-norm record's minimizer
    let (stop_iter, stop_err) = select_early_stop(&out.record).unwrap();
    let best_op = out
        .record
        .test_error_op
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    assert_eq!(stop_err, best_op);
    assert!(out.record.iterations.contains(&stop_iter));
    // training error keeps descending to the full (rank-3) fit
    let train = &out.record.train_error_fro;
    assert!(*train.last().unwrap() < 1e-3 * x.frobenius_norm());
}
