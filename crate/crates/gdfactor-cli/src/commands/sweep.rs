//! Parameter sweeps: final relative error and empirical stopping time as a
//! function of initialization size, relative spectral gap, and dimension.
//!
//! Every sweep runs the same experiment per grid point: draw a rank-4
//! square target with spectrum (κ, √κ, 1, 1−δ) — condition ratio κ = σ₁/σ₃,
//! geometric-mean second value, σ₃ = 1 — run the gradient dynamic from a
//! small random initialization for a fixed iteration budget, and record the
//! smallest relative error ε = ‖F_tG_tᵀ − X_r‖_F/‖X_r‖_F over the run along
//! with the iteration T0 attaining it. Each point is repeated over
//! independent trials (fresh target and initialization per trial) and the
//! trial errors are averaged.

use std::path::Path;

use gdfactor_core::{init_factors, synth_matrix, truncate_rank, GdConfig, RngStream};

use crate::config::ConfigMap;
use crate::csvout::{Cell, CsvTable};
use crate::error::{CliError, Result};
use crate::svg::{PlotSpec, Series};
use crate::{jobs, seeds, RunContext};

/// One grid point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPointSpec {
    pub rho: f64,
    pub delta: f64,
    pub kappa: f64,
    /// Square dimension m = n.
    pub dim: usize,
    pub eta: f64,
    /// Series index for multi-setting sweeps (0 when there is one series).
    pub series: usize,
}

/// Result of one trial at one grid point.
#[derive(Debug, Clone, Copy)]
pub struct TrialRow {
    pub trial: u64,
    pub seed: u64,
    /// Iteration attaining the smallest relative error (earliest on ties).
    pub t0: u64,
    /// Smallest relative error ‖F_tG_tᵀ − X_r‖_F/‖X_r‖_F over the run.
    pub eps: f64,
    pub final_train: f64,
    pub final_test: f64,
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub spec: SweepPointSpec,
    pub rows: Vec<TrialRow>,
    /// Mean of the per-trial smallest relative errors.
    pub eps_bar: f64,
    /// Mean of the per-trial argmin iterations.
    pub t0_bar: f64,
}

/// Ordinary least squares of y on x with the coefficient of determination.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_line(points: &[(f64, f64)]) -> Result<LineFit> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return Err(CliError::numerical("need at least 2 points for a line fit"));
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(CliError::numerical("degenerate line fit: all x equal"));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Rho,
    Gap,
    Dim,
    StepDim,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::Rho => "sweep-rho",
            SweepKind::Gap => "sweep-gap",
            SweepKind::Dim => "sweep-dim",
            SweepKind::StepDim => "sweep-stepdim",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepParams {
    pub kind: SweepKind,
    pub points: Vec<SweepPointSpec>,
    /// Legend names per series index (one entry when single-series).
    pub series_names: Vec<String>,
    pub k: usize,
    pub r: usize,
    pub iters: u64,
    pub trials: u64,
    pub master_seed: u64,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub points: Vec<SweepPoint>,
    /// Log-log fit of mean error against 1/ρ (initialization sweep only).
    pub fit: Option<LineFit>,
}

/// The rank-4 sweep spectrum (κ, √κ, 1, 1−δ).
pub fn sweep_spectrum(kappa: f64, delta: f64) -> Result<Vec<f64>> {
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(CliError::config(format!(
            "condition ratio kappa must be >= 1, got {kappa}"
        )));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(CliError::config(format!(
            "relative gap delta must lie in [0, 1), got {delta}"
        )));
    }
    Ok(vec![kappa, kappa.sqrt(), 1.0, 1.0 - delta])
}

/// Runs the gradient dynamic for one trial, tracking train error and the
/// relative error to the best rank-r truncation every iteration. The loop
/// reuses the residual for both the error readings and the update, so each
/// iteration costs three m×n×k products.
fn sweep_trial(
    spec: &SweepPointSpec,
    k: usize,
    r: usize,
    iters: u64,
    trial: u64,
    seed: u64,
) -> Result<TrialRow> {
    let sigma = sweep_spectrum(spec.kappa, spec.delta)?;
    let mut xrng = RngStream::new(seeds::fold(seed, seeds::tag("target")));
    let (x, frame) = synth_matrix(spec.dim, spec.dim, &sigma, &mut xrng)?;
    let x_r = truncate_rank(&frame, r)?;
    let x_r_norm = x_r.frobenius_norm();
    let tail = x.sub(&x_r);
    let cfg = GdConfig {
        eta: spec.eta,
        rho: spec.rho,
        k,
        max_iters: iters,
        record_every: 1,
        seed: seeds::fold(seed, seeds::tag("init")),
    };
    let pair = init_factors(spec.dim, spec.dim, &cfg, frame.singular_values()[0])?;
    let (mut f, mut g) = (pair.f, pair.g);
    let (mut best_eps, mut best_t) = (f64::INFINITY, 0u64);
    let (mut train, mut test) = (0.0f64, 0.0f64);
    for t in 0..=iters {
        // R = X − FGᵀ; the rank-r deviation is FGᵀ − X_r = (X − X_r) − R.
        let residual = x.sub(&f.matmul_transb(&g));
        train = residual.frobenius_norm();
        test = tail.sub(&residual).frobenius_norm();
        let eps = test / x_r_norm;
        if eps < best_eps {
            best_eps = eps;
            best_t = t;
        }
        if t == iters {
            break;
        }
        let f_next = f.add_scaled(&residual.matmul(&g), spec.eta);
        let g_next = g.add_scaled(&residual.tr_matmul(&f), spec.eta);
        if !f_next.all_finite() || !g_next.all_finite() {
            return Err(CliError::numerical(format!(
                "dynamic diverged at iteration {t} (dim {}, eta {}, rho {:e})",
                spec.dim, spec.eta, spec.rho
            )));
        }
        f = f_next;
        g = g_next;
    }
    Ok(TrialRow {
        trial,
        seed,
        t0: best_t,
        eps: best_eps,
        final_train: train,
        final_test: test,
    })
}

/// Runs all grid points × trials (in parallel when requested), aggregates
/// per-point means, fits the error law for the initialization sweep, and
/// writes the long-format CSV plus the panel SVGs.
pub fn run_sweep(params: &SweepParams, ctx: &RunContext, echo: &ConfigMap) -> Result<SweepOutcome> {
    if params.points.is_empty() {
        return Err(CliError::config("sweep axis is empty"));
    }
    if params.trials == 0 {
        return Err(CliError::config("trials must be at least 1"));
    }
    let mut job_list = Vec::new();
    for (pi, spec) in params.points.iter().enumerate() {
        for trial in 0..params.trials {
            job_list.push((pi, *spec, trial));
        }
    }
    let kind_name = params.kind.name();
    let kcopy = params.k;
    let rcopy = params.r;
    let iters = params.iters;
    let master = params.master_seed;
    let results = jobs::run_jobs(&job_list, ctx.parallel, |(pi, spec, trial)| {
        let seed = seeds::job_seed(
            master,
            kind_name,
            &[
                spec.rho,
                spec.delta,
                spec.kappa,
                spec.dim as f64,
                spec.eta,
            ],
            *trial,
        );
        sweep_trial(spec, kcopy, rcopy, iters, *trial, seed).map(|row| (*pi, row))
    })?;

    let mut points: Vec<SweepPoint> = params
        .points
        .iter()
        .map(|spec| SweepPoint {
            spec: *spec,
            rows: Vec::new(),
            eps_bar: 0.0,
            t0_bar: 0.0,
        })
        .collect();
    for (pi, row) in results {
        points[pi].rows.push(row);
    }
    for p in &mut points {
        p.rows.sort_by_key(|row| row.trial);
        let n = p.rows.len() as f64;
        p.eps_bar = p.rows.iter().map(|r| r.eps).sum::<f64>() / n;
        p.t0_bar = p.rows.iter().map(|r| r.t0 as f64).sum::<f64>() / n;
    }

    let fit = if params.kind == SweepKind::Rho {
        let pts: Vec<(f64, f64)> = points
            .iter()
            .map(|p| ((1.0 / p.spec.rho).log10(), p.eps_bar.log10()))
            .collect();
        Some(fit_line(&pts)?)
    } else {
        None
    };

    let outcome = SweepOutcome { points, fit };
    report(params, &outcome);
    if let Some(dir) = ctx.out_dir.as_deref() {
        write_csv(params, &outcome, echo, dir)?;
        write_plots(params, &outcome, dir)?;
    }
    Ok(outcome)
}

fn report(params: &SweepParams, outcome: &SweepOutcome) {
    for p in &outcome.points {
        println!(
            "{}: rho={:e} delta={} kappa={} dim={} eta={} -> mean_min_rel_error={:e} mean_t0={}",
            params.kind.name(),
            p.spec.rho,
            p.spec.delta,
            p.spec.kappa,
            p.spec.dim,
            p.spec.eta,
            p.eps_bar,
            p.t0_bar
        );
    }
    if let Some(fit) = &outcome.fit {
        println!(
            "{}: fit of log10(mean error) on log10(1/rho): slope={} intercept={} r_squared={}",
            params.kind.name(),
            fit.slope,
            fit.intercept,
            fit.r_squared
        );
    }
}

fn write_csv(
    params: &SweepParams,
    outcome: &SweepOutcome,
    echo: &ConfigMap,
    dir: &Path,
) -> Result<()> {
    let mut t = CsvTable::for_run(params.kind.name(), params.master_seed, echo);
    for p in &outcome.points {
        t.meta(
            "point",
            format!(
                "rho={:e} delta={} kappa={} dim={} eta={}: mean_min_rel_error={:e}, mean_t0={}",
                p.spec.rho, p.spec.delta, p.spec.kappa, p.spec.dim, p.spec.eta, p.eps_bar, p.t0_bar
            ),
        );
    }
    if let Some(fit) = &outcome.fit {
        t.meta(
            "fit",
            format!(
                "log10(mean error) on log10(1/rho): slope={} intercept={} r_squared={}",
                fit.slope, fit.intercept, fit.r_squared
            ),
        );
    }
    t.column("rho", "initialization size of this run");
    t.column("delta", "relative spectral gap (sigma_r - sigma_r+1)/sigma_r of the target spectrum");
    t.column("kappa", "condition ratio sigma_1/sigma_r of the target spectrum");
    t.column("dim", "square dimension m = n of the target");
    t.column("eta", "gradient stepsize");
    t.column("trial", "trial index at this grid point (fresh target and initialization per trial)");
    t.column("seed", "derived job seed for this trial");
    t.column("t0", "iteration attaining the smallest relative error (earliest on ties)");
    t.column(
        "min_rel_error",
        "smallest relative error |F G^T - X_r|_F / |X_r|_F over the iteration budget",
    );
    t.column("final_train_fro", "Frobenius train error |F G^T - X|_F at the last iteration");
    t.column(
        "final_test_fro",
        "Frobenius deviation |F G^T - X_r|_F from the best rank-r truncation at the last iteration",
    );

    // Long format, one row per (grid point, trial), sorted by the flattened
    // config tuple then the trial index.
    let mut order: Vec<(usize, usize)> = Vec::new();
    for (pi, p) in outcome.points.iter().enumerate() {
        for (ri, _) in p.rows.iter().enumerate() {
            order.push((pi, ri));
        }
    }
    order.sort_by(|a, b| {
        let (pa, ra) = (&outcome.points[a.0], &outcome.points[a.0].rows[a.1]);
        let (pb, rb) = (&outcome.points[b.0], &outcome.points[b.0].rows[b.1]);
        let ka = (pa.spec.rho, pa.spec.delta, pa.spec.kappa, pa.spec.dim, pa.spec.eta);
        let kb = (pb.spec.rho, pb.spec.delta, pb.spec.kappa, pb.spec.dim, pb.spec.eta);
        ka.0
            .total_cmp(&kb.0)
            .then(ka.1.total_cmp(&kb.1))
            .then(ka.2.total_cmp(&kb.2))
            .then(ka.3.cmp(&kb.3))
            .then(ka.4.total_cmp(&kb.4))
            .then(ra.seed.cmp(&rb.seed))
    });
    for (pi, ri) in order {
        let p = &outcome.points[pi];
        let row = &p.rows[ri];
        t.row(vec![
            Cell::F64(p.spec.rho),
            Cell::F64(p.spec.delta),
            Cell::F64(p.spec.kappa),
            Cell::Usize(p.spec.dim),
            Cell::F64(p.spec.eta),
            Cell::U64(row.trial),
            Cell::U64(row.seed),
            Cell::U64(row.t0),
            Cell::F64(row.eps),
            Cell::F64(row.final_train),
            Cell::F64(row.final_test),
        ]);
    }
    let file = dir.join(format!("{}.csv", params.kind.name().replace('-', "_")));
    t.write(&file)
}

fn write_plots(params: &SweepParams, outcome: &SweepOutcome, dir: &Path) -> Result<()> {
    let base = params.kind.name().replace('-', "_");
    match params.kind {
        SweepKind::Rho => {
            let pts: Vec<(f64, f64)> = outcome
                .points
                .iter()
                .map(|p| (p.spec.rho, p.eps_bar))
                .collect();
            crate::svg::write_plot(
                &dir.join(format!("{base}.svg")),
                &PlotSpec {
                    title: "Smallest relative error vs initialization size".into(),
                    x_label: "initialization size rho".into(),
                    y_label: "mean min relative error".into(),
                    x_log10: true,
                    y_log10: true,
                    h_lines: vec![],
                },
                &[Series::new("mean over trials", pts)],
            )
        }
        SweepKind::Gap => {
            let eps: Vec<(f64, f64)> = outcome
                .points
                .iter()
                .map(|p| (p.spec.delta, p.eps_bar))
                .collect();
            let t0: Vec<(f64, f64)> = outcome
                .points
                .iter()
                .map(|p| (p.spec.delta, p.t0_bar))
                .collect();
            crate::svg::write_plot(
                &dir.join(format!("{base}_error.svg")),
                &PlotSpec {
                    title: "Smallest relative error vs relative gap".into(),
                    x_label: "relative gap delta".into(),
                    y_label: "mean min relative error".into(),
                    x_log10: false,
                    y_log10: true,
                    h_lines: vec![],
                },
                &[Series::new("mean over trials", eps)],
            )?;
            crate::svg::write_plot(
                &dir.join(format!("{base}_t0.svg")),
                &PlotSpec {
                    title: "Empirical stopping time vs relative gap".into(),
                    x_label: "relative gap delta".into(),
                    y_label: "mean argmin iteration T0".into(),
                    x_log10: false,
                    y_log10: false,
                    h_lines: vec![],
                },
                &[Series::new("mean over trials", t0)],
            )
        }
        SweepKind::Dim | SweepKind::StepDim => {
            let mut series: Vec<Series> = Vec::new();
            for (si, name) in params.series_names.iter().enumerate() {
                let pts: Vec<(f64, f64)> = outcome
                    .points
                    .iter()
                    .filter(|p| p.spec.series == si)
                    .map(|p| (p.spec.dim as f64, p.eps_bar))
                    .collect();
                if !pts.is_empty() {
                    series.push(Series::new(name.clone(), pts));
                }
            }
            crate::svg::write_plot(
                &dir.join(format!("{base}.svg")),
                &PlotSpec {
                    title: "Smallest relative error vs dimension".into(),
                    x_label: "dimension m = n".into(),
                    y_label: "mean min relative error".into(),
                    x_log10: false,
                    y_log10: true,
                    h_lines: vec![],
                },
                &series,
            )
        }
    }
}

const COMMON_KEYS: [&str; 6] = ["eta", "k", "rank", "iters", "trials", "seed"];

fn base_params(cfg: &ConfigMap) -> Result<(f64, usize, usize, u64, u64, u64)> {
    let eta = cfg.get_f64("eta", 0.25)?;
    let k = cfg.get_usize("k", 10)?;
    let r = cfg.get_usize("rank", 3)?;
    let iters = cfg.get_u64("iters", 500)?;
    let trials = cfg.get_u64("trials", 10)?;
    let seed = cfg.get_u64("seed", 17)?;
    if r == 0 {
        return Err(CliError::config("rank must be at least 1"));
    }
    Ok((eta, k, r, iters, trials, seed))
}

/// Echo map: the fully resolved parameters, so the CSV header alone
/// reproduces the run.
fn echo_common(eta: f64, k: usize, r: usize, iters: u64, trials: u64) -> ConfigMap {
    let mut echo = ConfigMap::empty();
    echo.set("eta", eta);
    echo.set("k", k);
    echo.set("rank", r);
    echo.set("iters", iters);
    echo.set("trials", trials);
    echo
}

pub fn cmd_sweep_rho(ctx: &RunContext) -> Result<SweepOutcome> {
    let cfg = &ctx.config;
    cfg.check_known(&[&COMMON_KEYS[..], &["rho_list", "delta", "kappa", "dim"]].concat())?;
    let (eta, k, r, iters, trials, seed) = base_params(cfg)?;
    let rho_list = cfg.get_f64_list("rho_list", &[1e-4, 1e-6, 1e-8, 1e-10, 1e-12])?;
    let delta = cfg.get_f64("delta", 0.5)?;
    let kappa = cfg.get_f64("kappa", 1.0)?;
    let dim = cfg.get_usize("dim", 100)?;
    if rho_list.is_empty() {
        return Err(CliError::config("rho_list must be nonempty"));
    }
    let points = rho_list
        .iter()
        .map(|&rho| SweepPointSpec {
            rho,
            delta,
            kappa,
            dim,
            eta,
            series: 0,
        })
        .collect();
    let mut echo = echo_common(eta, k, r, iters, trials);
    echo.set("rho_list", format!("{rho_list:?}"));
    echo.set("delta", delta);
    echo.set("kappa", kappa);
    echo.set("dim", dim);
    let params = SweepParams {
        kind: SweepKind::Rho,
        points,
        series_names: vec!["mean over trials".into()],
        k,
        r,
        iters,
        trials,
        master_seed: seed,
    };
    run_sweep(&params, ctx, &echo)
}

pub fn cmd_sweep_gap(ctx: &RunContext) -> Result<SweepOutcome> {
    let cfg = &ctx.config;
    cfg.check_known(&[&COMMON_KEYS[..], &["delta_list", "rho", "kappa", "dim"]].concat())?;
    let (eta, k, r, iters, trials, seed) = base_params(cfg)?;
    let delta_list = cfg.get_f64_list("delta_list", &[0.1, 0.3, 0.5, 0.7, 0.9])?;
    let rho = cfg.get_f64("rho", 1e-8)?;
    let kappa = cfg.get_f64("kappa", 1.0)?;
    let dim = cfg.get_usize("dim", 100)?;
    if delta_list.is_empty() {
        return Err(CliError::config("delta_list must be nonempty"));
    }
    let points = delta_list
        .iter()
        .map(|&delta| SweepPointSpec {
            rho,
            delta,
            kappa,
            dim,
            eta,
            series: 0,
        })
        .collect();
    let mut echo = echo_common(eta, k, r, iters, trials);
    echo.set("delta_list", format!("{delta_list:?}"));
    echo.set("rho", rho);
    echo.set("kappa", kappa);
    echo.set("dim", dim);
    let params = SweepParams {
        kind: SweepKind::Gap,
        points,
        series_names: vec!["mean over trials".into()],
        k,
        r,
        iters,
        trials,
        master_seed: seed,
    };
    run_sweep(&params, ctx, &echo)
}

pub fn cmd_sweep_dim(ctx: &RunContext) -> Result<SweepOutcome> {
    let cfg = &ctx.config;
    cfg.check_known(&[&COMMON_KEYS[..], &["dim_list", "rho", "delta", "kappa"]].concat())?;
    let (eta, k, r, iters, trials, seed) = base_params(cfg)?;
    let dim_list = cfg.get_usize_list("dim_list", &[50, 100, 200])?;
    let rho = cfg.get_f64("rho", 1e-8)?;
    let delta = cfg.get_f64("delta", 0.5)?;
    let kappa = cfg.get_f64("kappa", 1.0)?;
    if dim_list.is_empty() {
        return Err(CliError::config("dim_list must be nonempty"));
    }
    let points = dim_list
        .iter()
        .map(|&dim| SweepPointSpec {
            rho,
            delta,
            kappa,
            dim,
            eta,
            series: 0,
        })
        .collect();
    let mut echo = echo_common(eta, k, r, iters, trials);
    echo.set("dim_list", format!("{dim_list:?}"));
    echo.set("rho", rho);
    echo.set("delta", delta);
    echo.set("kappa", kappa);
    let params = SweepParams {
        kind: SweepKind::Dim,
        points,
        series_names: vec!["mean over trials".into()],
        k,
        r,
        iters,
        trials,
        master_seed: seed,
    };
    run_sweep(&params, ctx, &echo)
}

pub fn cmd_sweep_stepdim(ctx: &RunContext) -> Result<SweepOutcome> {
    let cfg = &ctx.config;
    cfg.check_known(&[
        &COMMON_KEYS[..],
        &["dim_list", "rho_list", "delta_list", "kappa_list"],
    ]
    .concat())?;
    let (eta, k, r, iters, trials, seed) = base_params(cfg)?;
    let dim_list = cfg.get_usize_list("dim_list", &[50, 100, 200])?;
    let rho_list = cfg.get_f64_list("rho_list", &[1e-8, 1e-20, 1e-40])?;
    let delta_list = cfg.get_f64_list("delta_list", &[0.5, 0.5, 0.1])?;
    let kappa_list = cfg.get_f64_list("kappa_list", &[1.0, 1.0, 1.0])?;
    if dim_list.is_empty() || rho_list.is_empty() {
        return Err(CliError::config("dim_list and rho_list must be nonempty"));
    }
    if rho_list.len() != delta_list.len() || rho_list.len() != kappa_list.len() {
        return Err(CliError::config(
            "rho_list, delta_list, and kappa_list must have equal lengths (they are zipped into settings)",
        ));
    }
    let mut points = Vec::new();
    let mut series_names = Vec::new();
    for (si, ((&rho, &delta), &kappa)) in rho_list
        .iter()
        .zip(delta_list.iter())
        .zip(kappa_list.iter())
        .enumerate()
    {
        series_names.push(format!("rho={rho:e} delta={delta} kappa={kappa}"));
        for &dim in &dim_list {
            points.push(SweepPointSpec {
                rho,
                delta,
                kappa,
                dim,
                eta,
                series: si,
            });
        }
    }
    let mut echo = echo_common(eta, k, r, iters, trials);
    echo.set("dim_list", format!("{dim_list:?}"));
    echo.set("rho_list", format!("{rho_list:?}"));
    echo.set("delta_list", format!("{delta_list:?}"));
    echo.set("kappa_list", format!("{kappa_list:?}"));
    let params = SweepParams {
        kind: SweepKind::StepDim,
        points,
        series_names,
        k,
        r,
        iters,
        trials,
        master_seed: seed,
    };
    run_sweep(&params, ctx, &echo)
}
