//! Closed-form stepsize/initialization caps, stopping-time schedules, the
//! final error bound, the shrinking-window trend report, and the scalar-toy
//! stopping time.
//!
//! Everything here is a pure function of a small set of scalars. The caps and
//! counts involve powers like `(tiny)^{36(1+γ)/(1−γ)}` that underflow `f64`
//! at realistic dimensions, so all formulas evaluate in log space (natural
//! logs internally); callers get a `log₁₀` value plus a clamped linear value
//! where the linear one can degenerate.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Spectrum and dimension data from which every schedule quantity derives.
///
/// `singular_values` is the (nonincreasing) spectrum of the target matrix;
/// entries past position `r` may be omitted, in which case they are treated
/// as zero. `delta_cap` caps the relative gap used downstream (default 0.9);
/// set it to 1.0 to use the exact gap, which the shrinking-window trend
/// study requires.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleInput<T> {
    singular_values: Vec<T>,
    r: usize,
    m: usize,
    n: usize,
    k: usize,
    c_rho: T,
    delta_cap: T,
}

impl<T: Real> ScheduleInput<T> {
    /// Validates and stores the schedule inputs.
    ///
    /// Requirements: nonempty, finite, nonnegative, nonincreasing singular
    /// values; `1 ≤ r ≤ min(m, n, k, #values)`; `σ_r > 0`; a strict gap
    /// `σ_r > σ_{r+1}` (otherwise the rank-`r` truncation target is not
    /// uniquely defined); `c_rho ∈ (0,1)`; `delta_cap ∈ (0,1]`.
    pub fn new(
        singular_values: Vec<T>,
        r: usize,
        m: usize,
        n: usize,
        k: usize,
        c_rho: T,
        delta_cap: T,
    ) -> Result<Self> {
        if m == 0 || n == 0 || k == 0 {
            return Err(Error::invalid("matrix dimensions must be positive"));
        }
        if singular_values.is_empty() {
            return Err(Error::invalid("singular value list must be nonempty"));
        }
        for (i, &s) in singular_values.iter().enumerate() {
            if !s.is_finite() || s < T::zero() {
                return Err(Error::invalid(format!(
                    "singular value at position {i} must be finite and nonnegative"
                )));
            }
            if i > 0 && s > singular_values[i - 1] {
                return Err(Error::invalid(format!(
                    "singular values must be nonincreasing (position {i} increases)"
                )));
            }
        }
        if r == 0 {
            return Err(Error::invalid("target rank r must be at least 1"));
        }
        if r > k {
            return Err(Error::invalid(format!(
                "target rank r = {r} exceeds the factorization width k = {k}"
            )));
        }
        if r > m.min(n) {
            return Err(Error::invalid(format!(
                "target rank r = {r} exceeds min(m, n) = {}",
                m.min(n)
            )));
        }
        if r > singular_values.len() {
            return Err(Error::invalid(format!(
                "target rank r = {r} exceeds the number of provided singular values"
            )));
        }
        if !(c_rho > T::zero() && c_rho < T::one()) {
            return Err(Error::invalid("c_rho must lie strictly inside (0, 1)"));
        }
        if !(delta_cap > T::zero() && delta_cap <= T::one()) {
            return Err(Error::invalid("delta_cap must lie in (0, 1]"));
        }
        let sigma_r = singular_values[r - 1];
        if sigma_r <= T::zero() {
            return Err(Error::invalid("sigma_r must be positive"));
        }
        let sigma_next = singular_values.get(r).copied().unwrap_or_else(T::zero);
        if sigma_r == sigma_next {
            return Err(Error::GapAbsent { r });
        }
        Ok(Self {
            singular_values,
            r,
            m,
            n,
            k,
            c_rho,
            delta_cap,
        })
    }

    /// Same as [`ScheduleInput::new`] with the default gap cap of 0.9.
    pub fn with_default_cap(
        singular_values: Vec<T>,
        r: usize,
        m: usize,
        n: usize,
        k: usize,
        c_rho: T,
    ) -> Result<Self> {
        Self::new(singular_values, r, m, n, k, c_rho, T::from_f64(0.9))
    }

    pub fn singular_values(&self) -> &[T] {
        &self.singular_values
    }
    pub fn r(&self) -> usize {
        self.r
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn c_rho(&self) -> T {
        self.c_rho
    }
    pub fn delta_cap(&self) -> T {
        self.delta_cap
    }
    pub fn sigma_1(&self) -> T {
        self.singular_values[0]
    }
    pub fn sigma_r(&self) -> T {
        self.singular_values[self.r - 1]
    }
    /// σ_{r+1}, taken as zero when fewer than `r + 1` values were provided.
    pub fn sigma_r_plus_1(&self) -> T {
        self.singular_values
            .get(self.r)
            .copied()
            .unwrap_or_else(T::zero)
    }
    /// m + n + k as a scalar.
    pub fn dim_sum(&self) -> T {
        T::from_usize(self.m + self.n + self.k)
    }
    /// Effective relative gap δ = min(delta_cap, (σ_r − σ_{r+1})/σ_r).
    pub fn delta(&self) -> T {
        let gap = (self.sigma_r() - self.sigma_r_plus_1()) / self.sigma_r();
        if self.delta_cap < gap {
            self.delta_cap
        } else {
            gap
        }
    }
    /// γ = 1 − δ.
    pub fn gamma(&self) -> T {
        T::one() - self.delta()
    }
    /// Condition number of the target: κ_r = σ₁/σ_r.
    pub fn kappa_r(&self) -> T {
        self.sigma_1() / self.sigma_r()
    }
}

/// Relative singular value gap δ = min(delta_cap, (σ_r − σ_{r+1})/σ_r).
///
/// `σ_{r+1}` is taken as zero when the slice has exactly `r` entries (no
/// further singular values exist). An exact tie `σ_r == σ_{r+1}` means the
/// rank-`r` truncation is not uniquely defined and yields the gap-absent
/// error.
pub fn relative_gap<T: Real>(singular_values: &[T], r: usize, delta_cap: T) -> Result<T> {
    if r == 0 || r > singular_values.len() {
        return Err(Error::invalid(format!(
            "rank r = {r} must satisfy 1 <= r <= number of singular values ({})",
            singular_values.len()
        )));
    }
    if !(delta_cap > T::zero() && delta_cap <= T::one()) {
        return Err(Error::invalid("delta_cap must lie in (0, 1]"));
    }
    let sigma_r = singular_values[r - 1];
    if !(sigma_r > T::zero()) || !sigma_r.is_finite() {
        return Err(Error::invalid("sigma_r must be positive and finite"));
    }
    let sigma_next = singular_values.get(r).copied().unwrap_or_else(T::zero);
    if !sigma_next.is_finite() || sigma_next < T::zero() {
        return Err(Error::invalid("sigma_{r+1} must be finite and nonnegative"));
    }
    if sigma_next > sigma_r {
        return Err(Error::invalid(
            "singular values must be nonincreasing at position r",
        ));
    }
    if sigma_r == sigma_next {
        return Err(Error::GapAbsent { r });
    }
    let gap = (sigma_r - sigma_next) / sigma_r;
    Ok(if delta_cap < gap { delta_cap } else { gap })
}

/// Largest admissible stepsize: min{γσ_r²/(600σ₁³), (1−γ)σ_r/(20σ₁²)}.
pub fn stepsize_cap<T: Real>(input: &ScheduleInput<T>) -> T {
    let gamma = input.gamma();
    let s1 = input.sigma_1();
    let sr = input.sigma_r();
    let a = gamma * sr * sr / (T::from_f64(600.0) * s1 * s1 * s1);
    let b = (T::one() - gamma) * sr / (T::from_f64(20.0) * s1 * s1);
    if a < b {
        a
    } else {
        b
    }
}

/// Initialization-size cap, reported in log space.
///
/// `linear` is `10^log10` evaluated directly; at realistic dimensions it
/// underflows to zero (or a subnormal), which is why `log10` is the primary
/// representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoCap<T> {
    pub log10: T,
    pub linear: T,
}

impl<T: Real> RhoCap<T> {
    /// Natural-log value of the cap.
    pub fn ln(&self) -> T {
        self.log10 * T::from_f64(core::f64::consts::LN_10)
    }
    /// Whether a given initialization size is within the cap (compared in
    /// log space, so tiny `rho` values are handled exactly).
    pub fn admits(&self, rho: T) -> bool {
        rho > T::zero() && rho.ln() <= self.ln()
    }
}

/// Natural log of the four-way initialization cap.
fn rho_cap_ln<T: Real>(input: &ScheduleInput<T>) -> T {
    let gamma = input.gamma();
    let one = T::one();
    let s1 = input.sigma_1();
    let sr = input.sigma_r();
    let dim = input.dim_sum();
    let r = T::from_usize(input.r());
    let c_rho = input.c_rho();
    let half = T::from_f64(0.5);

    let ln_s1 = s1.ln();
    let ln_sr = sr.ln();
    let ln_dim = dim.ln();
    let ln_cr = c_rho.ln();
    let ln_gamma = gamma.ln();
    let ln_one_minus_gamma = (one - gamma).ln();
    let ratio = (one + gamma) / (one - gamma);

    // (1/3)^{6(1+γ)/(1−γ)} · ((1−γ)/24)^{36(1+γ)/(1−γ)}
    //   · (c_ρ√σ₁ / (12(m+n+k)√((1−γ)/24)√σ_r))^{12γ/(1−γ)}
    let ln_quarter_bracket = ln_cr + half * ln_s1
        - T::from_f64(12.0).ln()
        - ln_dim
        - half * (ln_one_minus_gamma - T::from_f64(24.0).ln())
        - half * ln_sr;
    let cap1 = T::from_f64(6.0) * ratio * (one / T::from_f64(3.0)).ln()
        + T::from_f64(36.0) * ratio * (ln_one_minus_gamma - T::from_f64(24.0).ln())
        + T::from_f64(12.0) * gamma / (one - gamma) * ln_quarter_bracket;

    // ((1−γ)c_ρσ_r / (1200(m+n+k)·r·σ₁))^{2(1+γ)/(1−γ)}
    let cap2 = T::from_f64(2.0)
        * ratio
        * (ln_one_minus_gamma + ln_cr + ln_sr - T::from_f64(1200.0).ln() - ln_dim - r.ln() - ln_s1);

    // (γσ_r² / (1600·r·σ₁²))^{(1+γ)/(1−γ)}
    let cap3 = ratio
        * (ln_gamma + T::from_f64(2.0) * ln_sr
            - T::from_f64(1600.0).ln()
            - r.ln()
            - T::from_f64(2.0) * ln_s1);

    // γσ_r√(2r) / (16σ₁√(m+n+k))
    let cap4 = ln_gamma + ln_sr + half * (T::from_f64(2.0) * r).ln()
        - T::from_f64(16.0).ln()
        - ln_s1
        - half * ln_dim;

    cap1.min(cap2).min(cap3).min(cap4)
}

/// Initialization-size cap: the minimum of the four admissibility bounds,
/// evaluated in log space to survive the astronomically small exponents.
pub fn rho_cap<T: Real>(input: &ScheduleInput<T>) -> RhoCap<T> {
    let ln = rho_cap_ln(input);
    RhoCap {
        log10: ln / T::from_f64(core::f64::consts::LN_10),
        linear: ln.exp(),
    }
}

/// Full schedule derived from a spectrum, a stepsize, and an init size.
///
/// Counts are stored saturating: a value that overflows `u64` pegs at
/// `u64::MAX`, and a (formula-level) negative count clamps to zero. Within
/// the admissible regime (`eta ≤ eta_max`, `rho ≤ rho_max`) all five counts
/// are positive and `t0 ≤ t_final`.
#[derive(Debug, Clone, PartialEq)]
pub struct GdSchedule<T> {
    /// Relative gap actually used (capped).
    pub delta: T,
    /// γ = 1 − δ.
    pub gamma: T,
    /// Condition number σ₁/σ_r of the target.
    pub kappa_r: T,
    /// Largest admissible stepsize for these inputs.
    pub eta_max: T,
    /// Largest admissible initialization size (log-space form).
    pub rho_max: RhoCap<T>,
    /// The stepsize these counts were evaluated at.
    pub eta: T,
    /// log₁₀ of the initialization size these counts were evaluated at.
    pub rho_log10: T,
    /// Iterations of the first (alignment) phase.
    pub t1: u64,
    /// Iterations of the second (growth saturation) phase.
    pub t2: u64,
    /// Iterations of the third (local refinement) phase.
    pub t3: u64,
    /// t1 + t2 + t3: total iterations until the error bound holds.
    pub t0: u64,
    /// Latest stopping time up to which the bound persists.
    pub t_final: u64,
    /// Operator-norm error bound (8 + 4√(2r))·ρ^{(1−γ)/(2(1+γ))}·σ₁.
    pub error_bound: T,
}

impl<T: Real> GdSchedule<T> {
    /// Whether the evaluated `rho` is within the initialization cap.
    pub fn rho_within_cap(&self) -> bool {
        self.rho_log10 <= self.rho_max.log10
    }
}

/// Floors a real-valued count into a saturating `u64` (negatives clamp to 0).
fn count_from_float<T: Real>(x: T) -> u64 {
    x.floor().to_f64() as u64
}

/// Stopping-time schedule for a given stepsize and initialization size.
///
/// Requires `0 < rho < 1` (at `rho ≥ 1` the logarithms change sign and the
/// phase counts lose meaning). See [`iteration_counts_from_ln`] for the
/// log-space entry point used when `rho` itself would underflow.
pub fn iteration_counts<T: Real>(input: &ScheduleInput<T>, eta: T, rho: T) -> Result<GdSchedule<T>> {
    if !(rho > T::zero()) || !rho.is_finite() {
        return Err(Error::invalid("initialization size rho must be positive"));
    }
    if rho >= T::one() {
        return Err(Error::invalid(
            "initialization size rho must be below 1 (the schedule logarithms change sign)",
        ));
    }
    iteration_counts_from_ln(input, eta, rho.ln())
}

/// Same as [`iteration_counts`] but takes `ln(rho)` directly, so callers can
/// evaluate schedules at initialization sizes far below the underflow
/// threshold (e.g. at the cap itself).
pub fn iteration_counts_from_ln<T: Real>(
    input: &ScheduleInput<T>,
    eta: T,
    ln_rho: T,
) -> Result<GdSchedule<T>> {
    if !(eta > T::zero()) || !eta.is_finite() {
        return Err(Error::invalid("stepsize eta must be positive and finite"));
    }
    if !(ln_rho < T::zero()) || !ln_rho.is_finite() {
        return Err(Error::invalid(
            "ln(rho) must be finite and negative (rho in (0, 1))",
        ));
    }
    let delta = input.delta();
    let gamma = input.gamma();
    if !(gamma > T::zero()) {
        return Err(Error::invalid(
            "relative gap saturates at 1 (gamma = 0); the schedule logarithms degenerate",
        ));
    }
    let one = T::one();
    let half = T::from_f64(0.5);
    let s1 = input.sigma_1();
    let sr = input.sigma_r();
    let eta_sr = eta * sr;
    let shrink = T::from_f64(1.5) * eta_sr;
    if shrink >= one {
        return Err(Error::invalid(
            "stepsize too large: 1 - 1.5*eta*sigma_r must stay positive",
        ));
    }

    // Phase 1: T₁ = ⌊ln(C₁/ρ)/ln(1 + ((1+γ)/2)ησ_r)⌋ + 1 with
    // C₁ = 12(m+n+k)√((1−γ)/24)√σ_r/(c_ρ√σ₁).
    let ln_c1 = T::from_f64(12.0).ln() + input.dim_sum().ln()
        + half * ((one - gamma).ln() - T::from_f64(24.0).ln())
        + half * sr.ln()
        - input.c_rho().ln()
        - half * s1.ln();
    let t1 = count_from_float((ln_c1 - ln_rho) / ((one + gamma) * half * eta_sr).ln_1p()) + 1;

    // Phase 2: T₂ = ⌊ln(√(24/(1−γ)))/ln(1 + 0.1ησ_r)⌋ + 1.
    let t2 = count_from_float(
        half * (T::from_f64(24.0).ln() - (one - gamma).ln()) / (T::from_f64(0.1) * eta_sr).ln_1p(),
    ) + 1;

    // Phase 3: T₃ = ⌊ln(ρ^x/3)/ln(1 − 1.5ησ_r)⌋ + 1 with x = (1−γ)/(2(1+γ)).
    let x = (one - gamma) / (T::from_f64(2.0) * (one + gamma));
    let t3 = count_from_float((x * ln_rho - T::from_f64(3.0).ln()) / (-shrink).ln_1p()) + 1;

    // Stopping window: T = ⌊ln(ρ^x/ρ)/ln(1 + γησ_r)⌋ (plain floor).
    let t_final = count_from_float((x - one) * ln_rho / (gamma * eta_sr).ln_1p());

    let error_bound =
        (T::from_f64(8.0) + T::from_f64(4.0) * (T::from_f64(2.0) * T::from_usize(input.r())).sqrt())
            * s1
            * (x * ln_rho).exp();

    Ok(GdSchedule {
        delta,
        gamma,
        kappa_r: input.kappa_r(),
        eta_max: stepsize_cap(input),
        rho_max: rho_cap(input),
        eta,
        rho_log10: ln_rho / T::from_f64(core::f64::consts::LN_10),
        t1,
        t2,
        t3,
        t0: t1.saturating_add(t2).saturating_add(t3),
        t_final,
        error_bound,
    })
}

/// Trend report for a family of inputs whose trailing singular value shrinks
/// toward zero: the stopping windows grow without bound while the fraction
/// of the window spent converging vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowTrend<T> {
    /// Effective γ per family member (strictly decreasing).
    pub gammas: Vec<T>,
    /// Shared stepsize the family was evaluated at (min of the members' caps).
    pub eta: T,
    /// log₁₀ of the shared initialization size (min of the members' caps and
    /// the trend corollary's extra bound).
    pub rho_log10: T,
    /// Stopping window T per member (strictly increasing).
    pub t_finals: Vec<u64>,
    /// Convergence fraction T0/T per member (strictly decreasing, ≤ 73γ).
    pub window_fractions: Vec<T>,
}

/// Natural log of the extra initialization bound the trend corollary needs:
/// ρ ≤ c₃·(c_ρ/((m+n+k)√δ))^{1/3} with c₃ = (1/3)¹⁰(1/48)⁶⁰.
fn trend_rho_bound_ln<T: Real>(input: &ScheduleInput<T>) -> T {
    let third = T::one() / T::from_f64(3.0);
    let ln_c3 = T::from_f64(10.0) * (T::one() / T::from_f64(3.0)).ln()
        + T::from_f64(60.0) * (T::one() / T::from_f64(48.0)).ln();
    ln_c3
        + third
            * (input.c_rho().ln() - input.dim_sum().ln() - T::from_f64(0.5) * input.delta().ln())
}

/// Evaluates the shrinking-window trend across a family of schedule inputs.
///
/// The family must hold everything fixed except σ_{r+1}, which must strictly
/// decrease (toward zero) along the family, and the effective relative gap
/// must strictly increase — build the members with `delta_cap = 1.0`,
/// otherwise the cap ties the gaps and the family is rejected. The stepsize
/// and initialization size are chosen internally: the stepsize is the
/// smallest member cap, and the initialization size is the smallest of the
/// member caps and the trend corollary's extra bound, so one (η, ρ) pair is
/// admissible for every member.
///
/// Returns the per-member stopping windows and convergence fractions after
/// asserting the three trend claims (windows strictly increase, fractions
/// strictly decrease, fractions stay below 73γ); a violated claim is
/// reported as a trend-violation error.
pub fn window_trend<T: Real>(family: &[ScheduleInput<T>]) -> Result<WindowTrend<T>> {
    if family.len() < 3 {
        return Err(Error::invalid(
            "trend family needs at least 3 members to exhibit a trend",
        ));
    }
    let first = &family[0];
    for (i, input) in family.iter().enumerate().skip(1) {
        if input.m() != first.m() || input.n() != first.n() || input.k() != first.k() {
            return Err(Error::invalid(format!(
                "trend family member {i} changes the dimensions"
            )));
        }
        if input.r() != first.r() {
            return Err(Error::invalid(format!(
                "trend family member {i} changes the target rank"
            )));
        }
        if input.c_rho() != first.c_rho() {
            return Err(Error::invalid(format!(
                "trend family member {i} changes c_rho"
            )));
        }
        if input.singular_values()[..input.r()] != first.singular_values()[..first.r()] {
            return Err(Error::invalid(format!(
                "trend family member {i} changes the leading singular values"
            )));
        }
        if !(input.sigma_r_plus_1() < family[i - 1].sigma_r_plus_1()) {
            return Err(Error::invalid(format!(
                "trend family must have strictly decreasing sigma_(r+1) (member {i} does not)"
            )));
        }
        if !(input.gamma() < family[i - 1].gamma()) {
            return Err(Error::invalid(format!(
                "trend family member {i} does not strictly decrease the effective gamma; \
                 build members with delta_cap = 1.0 so the exact gap is used"
            )));
        }
    }

    let mut eta = stepsize_cap(&family[0]);
    let mut ln_rho = rho_cap_ln(&family[0]).min(trend_rho_bound_ln(&family[0]));
    for input in &family[1..] {
        eta = eta.min(stepsize_cap(input));
        ln_rho = ln_rho
            .min(rho_cap_ln(input))
            .min(trend_rho_bound_ln(input));
    }

    let mut gammas = Vec::with_capacity(family.len());
    let mut t_finals = Vec::with_capacity(family.len());
    let mut fractions = Vec::with_capacity(family.len());
    for input in family {
        let schedule = iteration_counts_from_ln(input, eta, ln_rho)?;
        if schedule.t_final == 0 {
            return Err(Error::numerical(
                "trend evaluation produced an empty stopping window",
            ));
        }
        gammas.push(schedule.gamma);
        t_finals.push(schedule.t_final);
        fractions.push(T::from_f64(schedule.t0 as f64) / T::from_f64(schedule.t_final as f64));
    }

    for i in 1..family.len() {
        if !(t_finals[i] > t_finals[i - 1]) {
            return Err(Error::TrendViolation(format!(
                "stopping window fails to grow between members {} and {i} ({} vs {})",
                i - 1,
                t_finals[i - 1],
                t_finals[i]
            )));
        }
        if !(fractions[i] < fractions[i - 1]) {
            return Err(Error::TrendViolation(format!(
                "convergence fraction fails to shrink between members {} and {i}",
                i - 1
            )));
        }
    }
    for (i, (&f, &g)) in fractions.iter().zip(gammas.iter()).enumerate() {
        if !(f <= T::from_f64(73.0) * g) {
            return Err(Error::TrendViolation(format!(
                "convergence fraction exceeds 73*gamma at member {i} ({} > 73*{})",
                f.to_f64(),
                g.to_f64()
            )));
        }
    }

    Ok(WindowTrend {
        gammas,
        eta,
        rho_log10: ln_rho / T::from_f64(core::f64::consts::LN_10),
        t_finals,
        window_fractions: fractions,
    })
}

/// Stopping time for the diagonal positive-semidefinite toy dynamic:
/// `⌊log(√λ_r/(ρ√(2λ₁)))/log(1+ηλ_r/2)⌋ + ⌊log(√ρ)/log(1−ηλ_r/2)⌋ + 2`.
///
/// Requires `0 < λ_r ≤ λ₁` finite, `ρ ∈ (0, √λ_r/2)` (strict — at equality
/// the guarantee's premise fails), and `0 < η < 2/λ_r` so both logarithms
/// are finite. The two floors are evaluated literally and the total is
/// clamped at zero (parameter corners where the sum goes negative prescribe
/// no iterations).
pub fn psd_toy_stopping_time<T: Real>(lambda_1: T, lambda_r: T, rho: T, eta: T) -> Result<u64> {
    if !(lambda_r > T::zero()) || !lambda_1.is_finite() || !(lambda_r <= lambda_1) {
        return Err(Error::invalid(
            "need finite eigenvalues with 0 < lambda_r <= lambda_1",
        ));
    }
    if !(rho > T::zero()) || !rho.is_finite() {
        return Err(Error::invalid("initialization size rho must be positive"));
    }
    if !(rho < lambda_r.sqrt() / T::from_f64(2.0)) {
        return Err(Error::invalid(
            "initialization size rho must be strictly below sqrt(lambda_r)/2",
        ));
    }
    if !(eta > T::zero()) || !eta.is_finite() {
        return Err(Error::invalid("stepsize eta must be positive and finite"));
    }
    let half_step = eta * lambda_r / T::from_f64(2.0);
    if half_step >= T::one() {
        return Err(Error::invalid(
            "stepsize too large: 1 - eta*lambda_r/2 must stay positive",
        ));
    }
    let two = T::from_f64(2.0);
    let grow = (lambda_r.sqrt() / (rho * (two * lambda_1).sqrt())).ln() / half_step.ln_1p();
    let settle = (T::from_f64(0.5) * rho.ln()) / (-half_step).ln_1p();
    let total = grow.floor() + settle.floor() + two;
    Ok(if total > T::zero() {
        total.to_f64() as u64
    } else {
        0
    })
}
