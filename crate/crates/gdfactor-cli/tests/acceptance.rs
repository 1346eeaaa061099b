//! Acceptance battery: every release-gate criterion as one test, so the
//! harness prints exactly one pass/fail line per criterion. Each test also
//! prints a `criterion N PASS: …` summary with the measured values (visible
//! with `--nocapture`) and asserts its wall-clock budget.
//!
//! The experiment criteria (2–5) drive the same command functions the
//! binary dispatches to, compute-only (no artifact directory); the exact
//! identity suites (criterion 7) re-run the algebraic checks inline at the
//! stated instance counts and tolerances.

use std::time::{Duration, Instant};

use gdfactor_cli::commands::{demo, sweep};
use gdfactor_cli::config::ConfigMap;
use gdfactor_cli::RunContext;
use gdfactor_core::matrix::max_abs_diff;
use gdfactor_core::{
    gaussian_matrix, gd_step, iteration_counts_from_ln, objective_value, operator_norm,
    predicted_block_step, predicted_symmetrized_step, rho_cap, run_against, run_to_schedule,
    select_early_stop, singular_values, split, stepsize_cap, svd, symmetrize, synth_matrix,
    truncate_rank, window_trend, FactorPair, GdConfig, Matrix64, RngStream, ScheduleInput,
};

fn ctx_with(pairs: &[(&str, &str)]) -> RunContext {
    let mut config = ConfigMap::empty();
    for (k, v) in pairs {
        config.set(k, v);
    }
    RunContext {
        config,
        out_dir: None,
        parallel: 1,
    }
}

fn assert_budget(start: Instant, budget: Duration, what: &str) {
    let elapsed = start.elapsed();
    assert!(
        elapsed <= budget,
        "{what} exceeded its runtime budget: {elapsed:?} > {budget:?}"
    );
}

#[test]
fn criterion_1_psd_toy_exact_bound_at_the_scheduled_stop() {
    let start = Instant::now();
    let mut lambdas = vec![1.0, 0.9, 0.8, 0.7, 0.6];
    lambdas.extend(std::iter::repeat_n(0.05, 15));
    let (rho, eta, r) = (1e-4f64, 0.05f64, 5usize);

    let report = run_to_schedule(&lambdas, r, rho, eta).unwrap();
    // The guaranteed ceiling is √ρ·√λ₁ = 0.01 exactly; no extra tolerance.
    assert_eq!(report.bound, 0.01);
    for (i, (&f, &l)) in report
        .state
        .values()
        .iter()
        .zip(lambdas.iter())
        .enumerate()
    {
        if i < r {
            assert!(
                (f - l.sqrt()).abs() <= report.bound,
                "head coordinate {i}: |{f} - sqrt({l})| exceeds 0.01"
            );
        } else {
            assert!(f.abs() <= report.bound, "tail coordinate {i}: |{f}| > 0.01");
        }
    }
    assert!(report.within_bounds());
    assert_budget(start, Duration::from_secs(1), "criterion 1");
    println!(
        "criterion 1 PASS: T = {}, head max deviation {:e}, tail max {:e}, ceiling {:e}",
        report.steps, report.head_max_deviation, report.tail_max, report.bound
    );
}

#[test]
fn criterion_2_overfitting_curve_with_interior_minimum() {
    let start = Instant::now();
    // The exact-low-rank demo at its defaults: m=250, n=200, spectrum
    // (2/3, 2/3, 1/3) (unit Frobenius, rank 3, δ = 1/2 at r = 2), ρ = 1e-6,
    // η = 0.05, k = 50, 2000 iterations.
    let ctx = ctx_with(&[("variant", "clean")]);
    let outcome = demo::cmd_overfit_demo(&ctx).unwrap();
    let clean = outcome.clean.expect("clean variant requested");

    let te = &clean.record.test_error_fro;
    let (first, last) = (te[0], *te.last().unwrap());
    let min = te.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(
        min < first && min < last,
        "test error must attain an interior minimum: min {min:e}, ends {first:e}/{last:e}"
    );
    let sigma_3 = 1.0 / 3.0;
    assert!(
        clean.final_train < 1e-3 * clean.x_norm,
        "final train error {:e} must be below 1e-3 * |X|_F = {:e}",
        clean.final_train,
        1e-3 * clean.x_norm
    );
    assert!(
        clean.final_test >= 0.5 * sigma_3,
        "final test error {:e} must stay above half the rank-3 tail {:e}",
        clean.final_test,
        0.5 * sigma_3
    );
    assert_budget(start, Duration::from_secs(60), "criterion 2");
    println!(
        "criterion 2 PASS: min test {:e} at iteration {}, final train {:e}, final test {:e}",
        clean.min_test.1, clean.min_test.0, clean.final_train, clean.final_test
    );
}

#[test]
fn criterion_3_error_scales_as_a_power_law_in_rho() {
    let start = Instant::now();
    // Defaults: rho_list 1e-4…1e-12 (5 log-spaced points), δ = 0.5, κ = 1,
    // rank-4 spectrum with σ₃ = 1, m = n = 100, η = 0.25, k = 10,
    // 500 iterations, 10 trials.
    let outcome = sweep::cmd_sweep_rho(&ctx_with(&[])).unwrap();
    // Regressed on log10(1/ρ) so "slope in (−1, 0)" carries its plain
    // meaning: error shrinks sublinearly as the initialization shrinks.
    let fit = outcome.fit.expect("rho sweep fits the scaling law");
    assert!(
        fit.r_squared >= 0.95,
        "log-log fit R^2 {} below 0.95",
        fit.r_squared
    );
    assert!(
        fit.slope > -1.0 && fit.slope < 0.0,
        "slope {} outside (-1, 0)",
        fit.slope
    );
    assert_budget(start, Duration::from_secs(300), "criterion 3");
    println!(
        "criterion 3 PASS: slope {:.4}, R^2 {:.4} over rho = 1e-4 … 1e-12",
        fit.slope, fit.r_squared
    );
}

#[test]
fn criterion_4_gap_dependence_of_error_and_stopping_time() {
    let start = Instant::now();
    // Defaults: δ ∈ {0.1, 0.3, 0.5, 0.7, 0.9}, ρ = 1e-8, 10 trials.
    let outcome = sweep::cmd_sweep_gap(&ctx_with(&[])).unwrap();
    let floor = 1e-13f64;

    // Mean error strictly decreasing in δ above the precision floor.
    for pair in outcome.points.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        assert!(a.spec.delta < b.spec.delta);
        if a.eps_bar > floor && b.eps_bar > floor {
            assert!(
                b.eps_bar < a.eps_bar,
                "mean error must decrease with the gap: {:e} at delta {} vs {:e} at delta {}",
                a.eps_bar,
                a.spec.delta,
                b.eps_bar,
                b.spec.delta
            );
        }
    }

    // T0 ∝ (1/δ)·log(1/ε) trend: T0·δ normalized by the attained log(1/ε)
    // (floored at the precision floor) is near-constant across the grid.
    let normalized: Vec<f64> = outcome
        .points
        .iter()
        .map(|p| p.t0_bar * p.spec.delta / (1.0 / p.eps_bar.max(floor)).ln())
        .collect();
    let (lo, hi) = normalized
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    assert!(
        hi / lo <= 3.0,
        "normalized stopping-time ratio spread {hi:e}/{lo:e} = {} exceeds 3",
        hi / lo
    );
    assert_budget(start, Duration::from_secs(300), "criterion 4");
    let eps: Vec<String> = outcome
        .points
        .iter()
        .map(|p| format!("{:.2e}", p.eps_bar))
        .collect();
    println!(
        "criterion 4 PASS: mean errors [{}] decreasing, normalized T0*delta spread {:.3}",
        eps.join(", "),
        hi / lo
    );
}

#[test]
fn criterion_5_error_is_dimension_independent() {
    let start = Instant::now();
    // Defaults: m = n ∈ {50, 100, 200}, ρ = 1e-8, δ = 0.5, κ = 1, η = 0.25.
    let outcome = sweep::cmd_sweep_dim(&ctx_with(&[])).unwrap();
    let (lo, hi) = outcome
        .points
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), p| {
            (lo.min(p.eps_bar), hi.max(p.eps_bar))
        });
    assert!(
        hi / lo <= 3.0,
        "mean error spread across dimensions {} exceeds 3",
        hi / lo
    );
    assert_budget(start, Duration::from_secs(300), "criterion 5");
    println!(
        "criterion 5 PASS: mean errors across m = n = 50/100/200 spread by {:.3}",
        hi / lo
    );
}

/// First verified value of the criterion-6 run (operator-norm error at the
/// empirical-minimum iterate), frozen as a regression guard with 2x slack.
const CRITERION_6_FROZEN_MIN_OP: f64 = 3.486233581032845e-15;

#[test]
fn criterion_6_exact_rank_r_converges_in_operator_norm() {
    let start = Instant::now();
    // Exactly rank-3 target, σ = (2, 1.5, 1), m = n = 30, fit at k = 6 from
    // ρ = 1e-8 with the practical stepsize 0.02; the operator-norm error to
    // X itself must fall below 1e-4·σ₁ within 5000 iterations.
    let sigma = vec![2.0, 1.5, 1.0];
    let mut rng = RngStream::new(2024);
    let (x, frame) = synth_matrix(30, 30, &sigma, &mut rng).unwrap();
    let cfg = GdConfig {
        eta: 0.02,
        rho: 1e-8,
        k: 6,
        max_iters: 5000,
        record_every: 1,
        seed: 2025,
    };
    let out = run_against(&x, &x, frame.singular_values()[0], 3, &cfg).unwrap();
    let (stop_iter, min_op) = select_early_stop(&out.record).unwrap();
    let threshold = 1e-4 * sigma[0];
    assert!(
        min_op < threshold,
        "operator-norm error {min_op:e} at iteration {stop_iter} not below {threshold:e}"
    );
    assert!(
        min_op <= 2.0 * CRITERION_6_FROZEN_MIN_OP,
        "regression: min operator error {min_op:e} exceeds twice the frozen value {CRITERION_6_FROZEN_MIN_OP:e}"
    );
    assert_budget(start, Duration::from_secs(10), "criterion 6");
    println!(
        "criterion 6 PASS: min operator error {min_op:e} at iteration {stop_iter} (threshold {threshold:e}, frozen {CRITERION_6_FROZEN_MIN_OP:e})"
    );
}

// --- criterion 7: exact identity suites -----------------------------------

/// (a) The step moves by −2η·∇ of the quarter-normalized objective: check
/// every partial derivative against central finite differences.
fn suite_a_fd_gradient() {
    let mut dims = RngStream::new(0xFD);
    for case in 0..50u64 {
        let m = 2 + (dims.next_u64() % 4) as usize;
        let n = 2 + (dims.next_u64() % 4) as usize;
        let k = 1 + (dims.next_u64() % 5) as usize;
        let mut rng = RngStream::new(31000 + case);
        let x = gaussian_matrix::<f64>(m, n, 1.0, &mut rng).unwrap();
        let pair = FactorPair::new(
            gaussian_matrix::<f64>(m, k, 1.0, &mut rng).unwrap(),
            gaussian_matrix::<f64>(n, k, 1.0, &mut rng).unwrap(),
        )
        .unwrap();
        let eta = 1e-3;
        let next = gd_step(&pair, &x, eta).unwrap();
        for wrt_g in [false, true] {
            let base = if wrt_g { &pair.g } else { &pair.f };
            let moved = if wrt_g { &next.g } else { &next.f };
            let dir = moved.sub(base).scaled(1.0 / eta);
            let h = 1e-5;
            let grad = Matrix64::from_fn(base.rows(), base.cols(), |i, j| {
                let mut plus = base.clone();
                plus.set(i, j, base.get(i, j) + h);
                let mut minus = base.clone();
                minus.set(i, j, base.get(i, j) - h);
                let build = |mat: Matrix64| {
                    if wrt_g {
                        FactorPair::new(pair.f.clone(), mat).unwrap()
                    } else {
                        FactorPair::new(mat, pair.g.clone()).unwrap()
                    }
                };
                (objective_value(&build(plus), &x) - objective_value(&build(minus), &x))
                    / (2.0 * h)
            });
            let dev = dir.add_scaled(&grad, 2.0).frobenius_norm();
            assert!(
                dev <= 1e-5 * dir.frobenius_norm(),
                "case {case} (wrt_g = {wrt_g}): direction vs -2*gradient deviates by {dev:e}"
            );
        }
    }
}

fn random_diagonal_instance(seed: u64) -> (Matrix64, Vec<f64>, FactorPair<f64>, usize, f64) {
    let mut rng = RngStream::new(seed);
    let m = 3 + (rng.next_u64() % 4) as usize;
    let n = 3 + (rng.next_u64() % 4) as usize;
    let k = 1 + (rng.next_u64() % 4) as usize;
    let r = 1 + (rng.next_u64() % m.min(n) as u64) as usize;
    let t = m.min(n);
    let mut values: Vec<f64> = (0..t).map(|_| 0.5 + 1.5 * rng.next_uniform()).collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let x = Matrix64::diagonal(m, n, &values);
    let pair = FactorPair::new(
        gaussian_matrix::<f64>(m, k, 0.09, &mut rng).unwrap(),
        gaussian_matrix::<f64>(n, k, 0.09, &mut rng).unwrap(),
    )
    .unwrap();
    let eta = 0.01 + 0.04 * rng.next_uniform();
    (x, values, pair, r, eta)
}

/// (b) Predicted block and symmetrized one-step updates against the
/// monolithic step, and (c) the split Σ − UVᵀ = P + Q, on 100 instances.
fn suite_bc_block_identities() {
    let tol = 1e-10;
    for seed in 500..600u64 {
        let (x, values, pair, r, eta) = random_diagonal_instance(seed);
        let (m, n) = (x.rows(), x.cols());
        let blocks = split(&pair, r).unwrap();
        let sigma = Matrix64::diagonal(r, r, &values[..r]);
        let sigma_tilde = Matrix64::diagonal(m - r, n - r, &values[r..]);

        let predicted = predicted_block_step(&blocks, &sigma, &sigma_tilde, eta).unwrap();
        let actual = split(&gd_step(&pair, &x, eta).unwrap(), r).unwrap();
        for (name, have, want) in [
            ("U", &predicted.u, &actual.u),
            ("J", &predicted.j, &actual.j),
            ("V", &predicted.v, &actual.v),
            ("K", &predicted.k, &actual.k),
        ] {
            if have.is_empty() {
                continue;
            }
            let dev = max_abs_diff(have, want);
            assert!(
                dev <= tol * (1.0 + want.max_abs()),
                "seed {seed}: block {name} deviates by {dev:e}"
            );
        }

        // (c) Σ − UVᵀ = P + Q.
        let state = symmetrize(&blocks, &sigma).unwrap();
        let lhs = sigma.sub(&blocks.u.matmul_transb(&blocks.v));
        let rhs = state.p.add(&state.q);
        let dev_pq = max_abs_diff(&lhs, &rhs);
        assert!(
            dev_pq <= tol * (1.0 + lhs.max_abs()),
            "seed {seed}: P + Q misses Sigma - U V^T by {dev_pq:e}"
        );

        let predicted_sym = predicted_symmetrized_step(&state, &blocks, &sigma, eta).unwrap();
        let recomputed = symmetrize(&predicted, &sigma).unwrap();
        for (name, have, want) in [
            ("A", &predicted_sym.a, &recomputed.a),
            ("B", &predicted_sym.b, &recomputed.b),
            ("P", &predicted_sym.p, &recomputed.p),
            ("Q", &predicted_sym.q, &recomputed.q),
        ] {
            let dev = max_abs_diff(have, want);
            assert!(
                dev <= tol * (1.0 + want.max_abs()),
                "seed {seed}: symmetrized {name} deviates by {dev:e}"
            );
        }
    }
}

/// (d) Singular values of S(I − ηSᵀS) are exactly g(σᵢ) with g(x) = x − ηx³
/// while ‖S‖ stays under the monotonicity cap.
fn suite_d_cubic_map() {
    let eta = 0.1f64;
    let cap = (1.0 / (3.0 * eta)).sqrt();
    let shapes = [(1usize, 1usize), (2, 3), (3, 3), (2, 5), (4, 6), (5, 8)];
    for trial in 0..30u64 {
        let (r, k) = shapes[(trial as usize) % shapes.len()];
        let mut rng = RngStream::new(61000 + trial);
        let raw = gaussian_matrix::<f64>(r, k, 1.0, &mut rng).unwrap();
        let s = raw.scaled(0.8 * cap / operator_norm(&raw));
        let mapped = s.add_scaled(&s.matmul(&s.tr_matmul(&s)), -eta);
        let have = singular_values(&mapped).unwrap();
        for (i, (&h, w)) in have
            .iter()
            .zip(singular_values(&s).unwrap().iter().map(|&x| x - eta * x * x * x))
            .enumerate()
        {
            assert!(
                (h - w).abs() <= 1e-9,
                "trial {trial}, singular value {i}: {h} vs mapped {w}"
            );
        }
    }
}

/// (e) The rank-r truncation beats 200 random rank-r competitors per
/// instance and rank, including each competitor's optimal rescaling.
fn suite_e_eckart_young() {
    for (case, &(m, n)) in [(3usize, 3usize), (5, 4), (4, 7), (8, 8)].iter().enumerate() {
        let mut rng = RngStream::new(71000 + case as u64);
        let x = gaussian_matrix::<f64>(m, n, 1.0, &mut rng).unwrap();
        let frame = svd(&x).unwrap();
        for r in 1..=m.min(n) {
            let best = x.sub(&truncate_rank(&frame, r).unwrap()).frobenius_norm();
            let mut comp = RngStream::new(0xE1 ^ ((m * 100 + n * 10 + r) as u64));
            for _ in 0..200 {
                let c = gaussian_matrix::<f64>(m, r, 1.0, &mut comp).unwrap();
                let d = gaussian_matrix::<f64>(n, r, 1.0, &mut comp).unwrap();
                let p = c.matmul_transb(&d);
                assert!(best <= x.sub(&p).frobenius_norm() + 1e-9);
                let inner: f64 = x
                    .data()
                    .iter()
                    .zip(p.data())
                    .map(|(&xi, &pi)| xi * pi)
                    .sum();
                let alpha = inner / p.frobenius_norm().powi(2);
                assert!(best <= x.sub(&p.scaled(alpha)).frobenius_norm() + 1e-9);
            }
        }
    }
}

fn random_valid_input(rng: &mut RngStream) -> ScheduleInput<f64> {
    loop {
        let m = 2 + (rng.next_u64() % 39) as usize;
        let n = 2 + (rng.next_u64() % 39) as usize;
        let top = m.min(n);
        let r = 1 + (rng.next_u64() % top as u64) as usize;
        let k = r + (rng.next_u64() % 40) as usize;
        let sigma_r = 0.2 + 2.0 * rng.next_uniform();
        let mut values = Vec::with_capacity(top);
        for _ in 0..r {
            values.push(sigma_r + 2.0 * rng.next_uniform());
        }
        values.sort_by(|a, b| b.partial_cmp(a).unwrap());
        values[r - 1] = sigma_r;
        let tail_scale = 0.9 * rng.next_uniform();
        for _ in r..top {
            values.push(sigma_r * tail_scale * rng.next_uniform());
        }
        values[r..].sort_by(|a, b| b.partial_cmp(a).unwrap());
        let c_rho = 0.05 + 0.9 * rng.next_uniform();
        match ScheduleInput::with_default_cap(values, r, m, n, k, c_rho) {
            Ok(input) => return input,
            Err(_) => continue,
        }
    }
}

/// (f) The early-stop opening never exceeds the stopping time on admissible
/// (η, ρ) over 500 random valid spectra.
fn suite_f_t0_at_most_t() {
    let mut rng = RngStream::new(0x7007);
    for case in 0..500 {
        let input = random_valid_input(&mut rng);
        let eta = stepsize_cap(&input) * (0.05 + 0.95 * rng.next_uniform());
        let ln_rho = rho_cap(&input).ln() * (1.0 + 3.0 * rng.next_uniform());
        let schedule = iteration_counts_from_ln(&input, eta, ln_rho).unwrap();
        assert!(
            schedule.t0 <= schedule.t_final,
            "case {case}: T0 = {} exceeds T = {}",
            schedule.t0,
            schedule.t_final
        );
    }
}

/// (g) Along a family whose trailing singular value shrinks toward zero
/// (exact gaps: cap = 1.0), the stopping window grows, the convergence
/// fraction shrinks, and the fraction stays at or below 73γ.
fn suite_g_shrinking_window_trend() {
    let family: Vec<ScheduleInput<f64>> = [0.5, 0.1, 0.01, 0.001]
        .iter()
        .map(|&tail| {
            ScheduleInput::new(vec![1.0, tail], 1, 10, 10, 10, 0.5, 1.0).unwrap()
        })
        .collect();
    let trend = window_trend(&family).unwrap();
    for w in trend.t_finals.windows(2) {
        assert!(w[1] > w[0], "stopping windows must grow: {:?}", trend.t_finals);
    }
    for w in trend.window_fractions.windows(2) {
        assert!(
            w[1] < w[0],
            "convergence fractions must shrink: {:?}",
            trend.window_fractions
        );
    }
    for (f, g) in trend.window_fractions.iter().zip(trend.gammas.iter()) {
        assert!(f <= &(73.0 * g), "fraction {f} exceeds 73*gamma = {}", 73.0 * g);
    }
}

#[test]
fn criterion_7_exact_identity_suites() {
    let start = Instant::now();
    suite_a_fd_gradient();
    println!("criterion 7a PASS: gradient matches finite differences on 50 instances (1e-5 relative)");
    suite_bc_block_identities();
    println!("criterion 7b+7c PASS: block/symmetrized one-step identities and Sigma - UV^T = P + Q on 100 instances (1e-10)");
    suite_d_cubic_map();
    println!("criterion 7d PASS: singular values follow g(x) = x - eta*x^3 (1e-9)");
    suite_e_eckart_young();
    println!("criterion 7e PASS: truncation beats 200 random competitors per instance");
    suite_f_t0_at_most_t();
    println!("criterion 7f PASS: T0 <= T on 500 random valid inputs");
    suite_g_shrinking_window_trend();
    println!("criterion 7g PASS: windows grow, fractions shrink, fractions <= 73*gamma");
    assert_budget(start, Duration::from_secs(60), "criterion 7");
}
