//! Trajectory demo: train vs test error of the gradient dynamic from a
//! small random initialization, showing the early-stopping window.
//!
//! Two variants:
//!
//! * `clean` — an exactly rank-3 target with spectrum (2/3, 2/3, 1/3) and
//!   unit Frobenius norm, fit with inner dimension k = 50 and measured
//!   against the best rank-2 truncation. Training error keeps falling;
//!   the rank-2 deviation dips and then climbs as the dynamic picks up the
//!   trailing direction — the overfitting shape that motivates stopping
//!   early.
//! * `noisy` — a rank-10 unit-Frobenius signal plus dense Gaussian noise,
//!   fit at full inner dimension (k = 200, more parameters than data) from
//!   a small and from a moderate initialization. Test error is measured
//!   against the noiseless signal. The small initialization reaches a
//!   lower test error along its path than the moderate one.

use gdfactor_core::{
    gaussian_matrix, operator_norm, run, run_against, synth_matrix, GdConfig, RngStream,
    TrajectoryRecord,
};

use crate::config::ConfigMap;
use crate::csvout::{Cell, CsvTable};
use crate::error::{CliError, Result};
use crate::svg::{PlotSpec, Series};
use crate::{seeds, RunContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Clean,
    Noisy,
    Both,
}

#[derive(Debug, Clone)]
pub struct CleanOutcome {
    pub record: TrajectoryRecord<f64>,
    /// Recorded iteration minimizing the Frobenius test error, with value.
    pub min_test: (u64, f64),
    pub final_train: f64,
    pub final_test: f64,
    pub x_norm: f64,
}

#[derive(Debug, Clone)]
pub struct NoisyVariantOutcome {
    pub rho: f64,
    pub record: TrajectoryRecord<f64>,
    pub min_test: (u64, f64),
    pub final_test: f64,
}

#[derive(Debug, Clone)]
pub struct OverfitOutcome {
    pub clean: Option<CleanOutcome>,
    /// (small initialization, moderate initialization).
    pub noisy: Option<(NoisyVariantOutcome, NoisyVariantOutcome)>,
}

fn argmin_with_iter(iters: &[u64], values: &[f64]) -> (usize, u64, f64) {
    let mut best = 0;
    for i in 1..values.len() {
        if values[i] < values[best] {
            best = i;
        }
    }
    (best, iters[best], values[best])
}

pub fn cmd_overfit_demo(ctx: &RunContext) -> Result<OverfitOutcome> {
    let cfg = &ctx.config;
    cfg.check_known(&[
        "variant",
        "m",
        "n",
        "k",
        "eta",
        "rho",
        "iters",
        "record_every",
        "sigma",
        "rank",
        "noisy_k",
        "noisy_iters",
        "noisy_rank",
        "noise_sd",
        "rho_small",
        "rho_moderate",
        "noisy_record_every",
        "seed",
        "trials",
    ])?;
    let variant = match cfg.get_str("variant", "both").as_str() {
        "clean" => Variant::Clean,
        "noisy" => Variant::Noisy,
        "both" => Variant::Both,
        other => {
            return Err(CliError::config(format!(
                "variant must be one of clean, noisy, both; got '{other}'"
            )))
        }
    };
    let master = cfg.get_u64("seed", 17)?;
    let m = cfg.get_usize("m", 250)?;
    let n = cfg.get_usize("n", 200)?;

    let clean = if variant != Variant::Noisy {
        Some(run_clean(ctx, master, m, n)?)
    } else {
        None
    };
    let noisy = if variant != Variant::Clean {
        Some(run_noisy(ctx, master, m, n)?)
    } else {
        None
    };
    Ok(OverfitOutcome { clean, noisy })
}

fn run_clean(ctx: &RunContext, master: u64, m: usize, n: usize) -> Result<CleanOutcome> {
    let cfg = &ctx.config;
    let k = cfg.get_usize("k", 50)?;
    let eta = cfg.get_f64("eta", 0.05)?;
    let rho = cfg.get_f64("rho", 1e-6)?;
    let iters = cfg.get_u64("iters", 2000)?;
    let record_every = cfg.get_u64("record_every", 10)?;
    let sigma = cfg.get_f64_list("sigma", &[2.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0])?;
    let r = cfg.get_usize("rank", 2)?;

    let mut xrng = RngStream::new(seeds::fold(master, seeds::tag("clean-target")));
    let (x, frame) = synth_matrix(m, n, &sigma, &mut xrng)?;
    let x_norm = x.frobenius_norm();
    let gd = GdConfig {
        eta,
        rho,
        k,
        max_iters: iters,
        record_every,
        seed: seeds::fold(master, seeds::tag("clean-init")),
    };
    let out = run(&x, &frame, r, &gd, false)?;
    let record = out.record;

    let (mi, min_iter, min_val) = argmin_with_iter(&record.iterations, &record.test_error_fro);
    let last = record.test_error_fro.len() - 1;
    let final_train = record.train_error_fro[last];
    let final_test = record.test_error_fro[last];
    println!(
        "overfit-demo clean: min rank-{r} deviation {min_val:e} at iteration {min_iter}; final train {final_train:e}, final deviation {final_test:e}"
    );

    if let Some(dir) = ctx.out_dir.as_deref() {
        let mut echo = ConfigMap::empty();
        echo.set("variant", "clean");
        echo.set("m", m);
        echo.set("n", n);
        echo.set("k", k);
        echo.set("eta", eta);
        echo.set("rho", rho);
        echo.set("iters", iters);
        echo.set("record_every", record_every);
        echo.set("sigma", format!("{sigma:?}"));
        echo.set("rank", r);
        let mut t = CsvTable::for_run("overfit-demo", master, &echo);
        t.meta(
            "summary",
            format!("min rank-{r} deviation {min_val:e} at iteration {min_iter}"),
        );
        t.column("iteration", "gradient step count");
        t.column("train_error_fro", "Frobenius train error |F G^T - X|_F");
        t.column(
            "test_error_fro",
            "Frobenius deviation |F G^T - X_r|_F from the best rank-r truncation",
        );
        t.column(
            "test_error_op",
            "operator-norm deviation |F G^T - X_r|_2 from the best rank-r truncation",
        );
        let lead = record.leading_singulars.first().map_or(0, Vec::len);
        for j in 0..lead {
            t.column(
                &format!("sv{}", j + 1),
                &format!("singular value {} of the product iterate F G^T", j + 1),
            );
        }
        for (i, &it) in record.iterations.iter().enumerate() {
            let mut cells = vec![
                Cell::U64(it),
                Cell::F64(record.train_error_fro[i]),
                Cell::F64(record.test_error_fro[i]),
                Cell::F64(record.test_error_op[i]),
            ];
            for &sv in &record.leading_singulars[i] {
                cells.push(Cell::F64(sv));
            }
            t.row(cells);
        }
        t.write(&dir.join("overfit_clean.csv"))?;

        let iters_f: Vec<f64> = record.iterations.iter().map(|&t| t as f64).collect();
        let zip = |ys: &[f64]| -> Vec<(f64, f64)> {
            iters_f.iter().copied().zip(ys.iter().copied()).collect()
        };
        let floor = frame.singular_values().get(r).copied().unwrap_or(0.0);
        crate::svg::write_plot(
            &dir.join("overfit_clean_errors.svg"),
            &PlotSpec {
                title: "Exact low-rank target: train error vs rank-r deviation".into(),
                x_label: "iteration".into(),
                y_label: "error".into(),
                x_log10: false,
                y_log10: true,
                h_lines: vec![(floor, format!("sigma_{} (truncation floor)", r + 1))],
            },
            &[
                Series::new("train |FG^T - X|_F", zip(&record.train_error_fro)),
                Series::new("deviation |FG^T - X_r|_F", zip(&record.test_error_fro)),
                Series::new("deviation |FG^T - X_r|_2", zip(&record.test_error_op)),
            ],
        )?;

        let lead = record.leading_singulars.first().map_or(0, Vec::len);
        let mut sv_series = Vec::new();
        for j in 0..lead {
            let pts: Vec<(f64, f64)> = record
                .iterations
                .iter()
                .zip(record.leading_singulars.iter())
                .map(|(&t, svs)| (t as f64, svs[j]))
                .collect();
            sv_series.push(Series::new(format!("sv{}", j + 1), pts));
        }
        let mut targets: Vec<f64> = Vec::new();
        for &s in frame.singular_values() {
            if !targets.iter().any(|&t| (t - s).abs() < 1e-12) {
                targets.push(s);
            }
        }
        let h_lines = targets
            .into_iter()
            .map(|s| (s, format!("target sigma = {s:.4}")))
            .collect();
        crate::svg::write_plot(
            &dir.join("overfit_clean_singulars.svg"),
            &PlotSpec {
                title: "Leading singular values of the product iterate".into(),
                x_label: "iteration".into(),
                y_label: "singular value".into(),
                x_log10: false,
                y_log10: false,
                h_lines,
            },
            &sv_series,
        )?;
    }

    if !(mi > 0 && mi < last && min_val < record.test_error_fro[0] && min_val < final_test) {
        return Err(CliError::assertion(format!(
            "clean demo: rank-{r} deviation has no interior minimum (min {min_val:e} at record {mi} of {last})"
        )));
    }
    Ok(CleanOutcome {
        record,
        min_test: (min_iter, min_val),
        final_train,
        final_test,
        x_norm,
    })
}

fn run_noisy(
    ctx: &RunContext,
    master: u64,
    m: usize,
    n: usize,
) -> Result<(NoisyVariantOutcome, NoisyVariantOutcome)> {
    let cfg = &ctx.config;
    let k = cfg.get_usize("noisy_k", 200)?;
    let eta = cfg.get_f64("eta", 0.05)?;
    let iters = cfg.get_u64("noisy_iters", 1500)?;
    let record_every = cfg.get_u64("noisy_record_every", 20)?;
    let rank = cfg.get_usize("noisy_rank", 10)?;
    let noise_sd = cfg.get_f64("noise_sd", 0.05)?;
    let rho_small = cfg.get_f64("rho_small", 1e-6)?;
    let rho_moderate = cfg.get_f64("rho_moderate", 1.0)?;

    // One dataset for both initializations: a rank-`rank` signal with equal
    // singular values and unit Frobenius norm, plus dense Gaussian noise.
    let sigma = vec![(rank as f64).sqrt().recip(); rank];
    let mut xrng = RngStream::new(seeds::fold(master, seeds::tag("noisy-target")));
    let (x_signal, _frame) = synth_matrix(m, n, &sigma, &mut xrng)?;
    let mut nrng = RngStream::new(seeds::fold(master, seeds::tag("noisy-noise")));
    let noise = gaussian_matrix(m, n, noise_sd * noise_sd, &mut nrng)?;
    let x = x_signal.add(&noise);
    let sigma1 = operator_norm(&x);

    let run_one = |label: &str, rho: f64| -> Result<NoisyVariantOutcome> {
        let gd = GdConfig {
            eta,
            rho,
            k,
            max_iters: iters,
            record_every,
            seed: seeds::fold(master, seeds::tag(&format!("noisy-init-{label}"))),
        };
        let out = run_against(&x, &x_signal, sigma1, rank, &gd)?;
        let record = out.record;
        let (_, min_iter, min_val) =
            argmin_with_iter(&record.iterations, &record.test_error_fro);
        let final_test = *record.test_error_fro.last().unwrap();
        println!(
            "overfit-demo noisy ({label} init, rho={rho:e}): min test error {min_val:e} at iteration {min_iter}; final test error {final_test:e}"
        );
        Ok(NoisyVariantOutcome {
            rho,
            record,
            min_test: (min_iter, min_val),
            final_test,
        })
    };
    let small = run_one("small", rho_small)?;
    let moderate = run_one("moderate", rho_moderate)?;

    if let Some(dir) = ctx.out_dir.as_deref() {
        let mut echo = ConfigMap::empty();
        echo.set("variant", "noisy");
        echo.set("m", m);
        echo.set("n", n);
        echo.set("noisy_k", k);
        echo.set("eta", eta);
        echo.set("noisy_iters", iters);
        echo.set("noisy_record_every", record_every);
        echo.set("noisy_rank", rank);
        echo.set("noise_sd", noise_sd);
        echo.set("rho_small", rho_small);
        echo.set("rho_moderate", rho_moderate);
        let mut t = CsvTable::for_run("overfit-demo", master, &echo);
        t.meta(
            "summary",
            format!(
                "small init min test {:e} at {}; moderate init min test {:e} at {}",
                small.min_test.1, small.min_test.0, moderate.min_test.1, moderate.min_test.0
            ),
        );
        t.column("init", "initialization size label (small or moderate)");
        t.column("rho", "initialization size of this run");
        t.column("iteration", "gradient step count");
        t.column(
            "train_error_fro",
            "Frobenius error |F G^T - X|_F against the noisy observation",
        );
        t.column(
            "test_error_fro",
            "Frobenius error |F G^T - X_signal|_F against the noiseless signal",
        );
        t.column(
            "test_error_op",
            "operator-norm error |F G^T - X_signal|_2 against the noiseless signal",
        );
        for (label, v) in [("small", &small), ("moderate", &moderate)] {
            for (i, &it) in v.record.iterations.iter().enumerate() {
                t.row(vec![
                    Cell::Str(label.into()),
                    Cell::F64(v.rho),
                    Cell::U64(it),
                    Cell::F64(v.record.train_error_fro[i]),
                    Cell::F64(v.record.test_error_fro[i]),
                    Cell::F64(v.record.test_error_op[i]),
                ]);
            }
        }
        t.write(&dir.join("overfit_noisy.csv"))?;

        let curve = |rec: &TrajectoryRecord<f64>, ys: &[f64]| -> Vec<(f64, f64)> {
            rec.iterations
                .iter()
                .map(|&t| t as f64)
                .zip(ys.iter().copied())
                .collect()
        };
        crate::svg::write_plot(
            &dir.join("overfit_noisy_errors.svg"),
            &PlotSpec {
                title: "Noisy observations: small vs moderate initialization".into(),
                x_label: "iteration".into(),
                y_label: "Frobenius error".into(),
                x_log10: false,
                y_log10: true,
                h_lines: vec![],
            },
            &[
                Series::new(
                    "train, small init",
                    curve(&small.record, &small.record.train_error_fro),
                ),
                Series::new(
                    "test, small init",
                    curve(&small.record, &small.record.test_error_fro),
                ),
                Series::new(
                    "train, moderate init",
                    curve(&moderate.record, &moderate.record.train_error_fro),
                ),
                Series::new(
                    "test, moderate init",
                    curve(&moderate.record, &moderate.record.test_error_fro),
                ),
            ],
        )?;
    }

    if !(small.min_test.1 < moderate.min_test.1) {
        return Err(CliError::assertion(format!(
            "noisy demo: small initialization should reach a lower test error than the moderate one, got {:e} vs {:e}",
            small.min_test.1, moderate.min_test.1
        )));
    }
    Ok((small, moderate))
}
