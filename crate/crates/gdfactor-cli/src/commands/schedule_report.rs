//! Closed-form schedule report: given a target spectrum and dimensions,
//! print the admissible stepsize and initialization-size caps, the phased
//! iteration counts, the early-stopping window, and the guaranteed error
//! bound at the stop. No dynamics are run — everything is a formula.

use gdfactor_core::{
    iteration_counts, iteration_counts_from_ln, rho_cap, stepsize_cap, Error, GdSchedule,
    ScheduleInput,
};

use crate::error::{CliError, Result};
use crate::RunContext;

#[derive(Debug, Clone)]
pub struct ScheduleOutcome {
    pub schedule: GdSchedule<f64>,
    pub report: String,
}

pub fn cmd_schedule(ctx: &RunContext) -> Result<ScheduleOutcome> {
    let cfg = &ctx.config;
    cfg.check_known(&[
        "sigma",
        "rank",
        "m",
        "n",
        "k",
        "c_rho",
        "delta_cap",
        "eta",
        "rho",
        "seed",
        "trials",
    ])?;
    let sigma = cfg.get_f64_list("sigma", &[3.0, 2.0, 1.0, 0.0])?;
    let r = cfg.get_usize("rank", 3)?;
    let m = cfg.get_usize("m", 100)?;
    let n = cfg.get_usize("n", 100)?;
    let k = cfg.get_usize("k", 10)?;
    let c_rho = cfg.get_f64("c_rho", 0.5)?;
    let delta_cap = cfg.get_f64("delta_cap", 0.9)?;

    let input = ScheduleInput::new(sigma.clone(), r, m, n, k, c_rho, delta_cap).map_err(
        |e| match e {
            Error::GapAbsent { r } => CliError::config(format!(
                "no relative spectral gap at rank {r}: sigma_{r} equals sigma_{}, so the best \
                 rank-{r} truncation is not uniquely defined and no schedule exists; pick a rank \
                 where the spectrum strictly drops",
                r + 1
            )),
            other => CliError::from(other),
        },
    )?;

    let eta_max = stepsize_cap(&input);
    let eta = if cfg.contains("eta") {
        let v = cfg.get_f64("eta", 0.0)?;
        if !(v > 0.0) {
            return Err(CliError::config("eta must be positive"));
        }
        if v > eta_max {
            return Err(CliError::config(format!(
                "eta = {v:e} exceeds the stepsize cap eta_max = {eta_max:e} for this spectrum; \
                 the schedule guarantees nothing above the cap"
            )));
        }
        v
    } else {
        eta_max
    };

    let cap = rho_cap(&input);
    let schedule = if cfg.contains("rho") {
        let v = cfg.get_f64("rho", 0.0)?;
        if !(v > 0.0 && v < 1.0) {
            return Err(CliError::config("rho must lie in (0, 1)"));
        }
        if !cap.admits(v) {
            return Err(CliError::config(format!(
                "rho = {v:e} exceeds the initialization cap log10(rho_max) = {}; the schedule \
                 guarantees nothing above the cap",
                cap.log10
            )));
        }
        iteration_counts(&input, eta, v)?
    } else {
        // Evaluate exactly at the cap (it can underflow f64 in linear form).
        iteration_counts_from_ln(&input, eta, cap.ln())?
    };

    let mut report = String::new();
    let mut line = |s: String| {
        report.push_str(&s);
        report.push('\n');
    };
    line(format!(
        "spectrum: {sigma:?}  rank r = {r}  dims m = {m}, n = {n}, inner k = {k}"
    ));
    line(format!(
        "relative gap delta = {} (cap {delta_cap}), window ratio gamma = {}, condition kappa_r = {}",
        schedule.delta, schedule.gamma, schedule.kappa_r
    ));
    line(format!("stepsize cap:        eta_max = {:e}", schedule.eta_max));
    line(format!(
        "initialization cap:  log10(rho_max) = {}",
        schedule.rho_max.log10
    ));
    line(format!("chosen stepsize:     eta = {:e}", schedule.eta));
    line(format!(
        "chosen initialization: log10(rho) = {}{}",
        schedule.rho_log10,
        if cfg.contains("rho") { "" } else { " (at the cap)" }
    ));
    line(format!(
        "phase counts: alignment T1 = {}, growth T2 = {}, refinement T3 = {}",
        schedule.t1, schedule.t2, schedule.t3
    ));
    line(format!(
        "early-stop window opens at T0 = {} and the schedule stops at T = {}",
        schedule.t0, schedule.t_final
    ));
    line(format!(
        "window check: T0 <= T {}",
        if schedule.t0 <= schedule.t_final {
            "holds"
        } else {
            "FAILS (initialization too large for the guarantee)"
        }
    ));
    line(format!(
        "guaranteed relative error bound at the stop: {:e}",
        schedule.error_bound
    ));
    print!("{report}");

    if let Some(dir) = ctx.out_dir.as_deref() {
        std::fs::write(dir.join("schedule.txt"), &report)
            .map_err(|e| CliError::config(format!("cannot write schedule.txt: {e}")))?;
    }
    Ok(ScheduleOutcome { schedule, report })
}
