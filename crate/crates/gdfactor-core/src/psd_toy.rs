//! Decoupled scalar eigenvalue dynamics: the pedagogical special case where
//! the target is symmetric positive semidefinite, the factorization is
//! square (m = n = k), and both the target and the initialization are
//! diagonal. Gradient descent then acts independently on each diagonal
//! entry, `f ← f·(1 + ηλᵢ − ηf²)`, which makes the early-stopping story
//! exactly checkable: every coordinate converges to √λᵢ at a rate set by
//! λᵢ, so large eigenvalues are fit long before small ones move.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::schedule::psd_toy_stopping_time;

/// Fixed seed for [`contraction_check`]'s internal sampler, so a given
/// (spectrum, stepsize, trial-count) triple always checks the same states.
const CONTRACTION_SAMPLER_SEED: u64 = 0x5053_4454_4f59_0001;

/// State of the decoupled scalar dynamics: one nonnegative value per
/// eigenvalue, advanced in lockstep.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarDynamicsState<T> {
    lambdas: Vec<T>,
    f: Vec<T>,
    eta: T,
    t: u64,
}

fn validate_lambdas<T: Real>(lambdas: &[T]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::invalid("eigenvalue list must be nonempty"));
    }
    for (i, &l) in lambdas.iter().enumerate() {
        if !l.is_finite() || l < T::zero() {
            return Err(Error::invalid(format!(
                "eigenvalue at position {i} must be finite and nonnegative"
            )));
        }
        if i > 0 && l > lambdas[i - 1] {
            return Err(Error::invalid(format!(
                "eigenvalues must be nonincreasing (position {i} increases)"
            )));
        }
    }
    Ok(())
}

/// The construction-time stepsize guard: η ≤ 1/(3λ₁). Inside the reachable
/// region f ≤ √(2λ₁) this keeps every multiplier 1 + ηλᵢ − ηf² at least
/// 1 − 2ηλ₁ ≥ 1/3 > 0, so the values stay nonnegative forever.
fn validate_stepsize<T: Real>(lambdas: &[T], eta: T) -> Result<()> {
    if !(eta > T::zero()) || !eta.is_finite() {
        return Err(Error::invalid("stepsize eta must be positive and finite"));
    }
    let lambda_1 = lambdas[0];
    if lambda_1 > T::zero() && eta > T::one() / (T::from_f64(3.0) * lambda_1) {
        return Err(Error::invalid(
            "stepsize guard violated: eta must not exceed 1/(3*lambda_1)",
        ));
    }
    Ok(())
}

impl<T: Real> ScalarDynamicsState<T> {
    /// Initializes every coordinate at `rho·√λ₁` (the diagonal small-random
    /// initialization specialized to its deterministic diagonal form).
    pub fn from_init_size(lambdas: Vec<T>, rho: T, eta: T) -> Result<Self> {
        validate_lambdas(&lambdas)?;
        validate_stepsize(&lambdas, eta)?;
        if !(rho > T::zero()) || !rho.is_finite() {
            return Err(Error::invalid("initialization size rho must be positive"));
        }
        let f0 = rho * lambdas[0].sqrt();
        let cap = (T::from_f64(2.0) * lambdas[0]).sqrt();
        if f0 > cap {
            return Err(Error::invalid(
                "initial value rho*sqrt(lambda_1) leaves the admissible region f <= sqrt(2*lambda_1)",
            ));
        }
        let m = lambdas.len();
        Ok(Self {
            lambdas,
            f: vec![f0; m],
            eta,
            t: 0,
        })
    }

    /// Builds a state with explicit per-coordinate values (for checking the
    /// one-step inequalities from arbitrary admissible states). Values must
    /// be nonnegative and stay within the admissible region f ≤ √(2λ₁).
    pub fn with_values(lambdas: Vec<T>, f: Vec<T>, eta: T) -> Result<Self> {
        validate_lambdas(&lambdas)?;
        validate_stepsize(&lambdas, eta)?;
        if f.len() != lambdas.len() {
            return Err(Error::invalid(format!(
                "value count {} does not match eigenvalue count {}",
                f.len(),
                lambdas.len()
            )));
        }
        let cap = (T::from_f64(2.0) * lambdas[0]).sqrt();
        for (i, &v) in f.iter().enumerate() {
            if !v.is_finite() || v < T::zero() || v > cap {
                return Err(Error::invalid(format!(
                    "value at position {i} must lie in [0, sqrt(2*lambda_1)]"
                )));
            }
        }
        Ok(Self {
            lambdas,
            f,
            eta,
            t: 0,
        })
    }

    pub fn lambdas(&self) -> &[T] {
        &self.lambdas
    }
    pub fn values(&self) -> &[T] {
        &self.f
    }
    pub fn eta(&self) -> T {
        self.eta
    }
    pub fn iteration(&self) -> u64 {
        self.t
    }

    /// Advances every coordinate once: f ← f·(1 + ηλᵢ − ηf²).
    pub fn step(&mut self) {
        for (f, &lambda) in self.f.iter_mut().zip(self.lambdas.iter()) {
            let v = *f;
            *f = v * (T::one() + self.eta * lambda - self.eta * v * v);
        }
        self.t += 1;
    }
}

/// One application of the scalar recursion to a copy of the state.
pub fn scalar_step<T: Real>(state: &ScalarDynamicsState<T>) -> ScalarDynamicsState<T> {
    let mut next = state.clone();
    next.step();
    next
}

/// Outcome of running the toy dynamics for exactly the scheduled number of
/// steps. The guarantee under test — every head coordinate lands within
/// √ρ·√λ₁ of its target √λᵢ while every tail coordinate is still below
/// √ρ·√λ₁ — is reported as data rather than enforced, so a violation
/// surfaces as a failed check instead of a crash.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleRunReport<T> {
    /// Final state after exactly `steps` iterations.
    pub state: ScalarDynamicsState<T>,
    /// The scheduled stopping time the run used.
    pub steps: u64,
    /// The guaranteed ceiling √ρ·√λ₁ both checks compare against.
    pub bound: T,
    /// max over i ≤ r of |f_i − √λᵢ| at the stopping time.
    pub head_max_deviation: T,
    /// max over i > r of f_i at the stopping time (zero when r = m).
    pub tail_max: T,
}

impl<T: Real> ScheduleRunReport<T> {
    /// Whether both displayed bounds hold at the stopping time.
    pub fn within_bounds(&self) -> bool {
        self.head_max_deviation <= self.bound && self.tail_max <= self.bound
    }
}

/// Runs the toy dynamics for exactly the scheduled stopping time with the
/// default eigengap assumption λ_{r+1} ≤ λ_r/10.
pub fn run_to_schedule<T: Real>(
    lambdas: &[T],
    r: usize,
    rho: T,
    eta: T,
) -> Result<ScheduleRunReport<T>> {
    run_to_schedule_with_gap(lambdas, r, rho, eta, T::from_f64(0.1))
}

/// Runs the toy dynamics for exactly the scheduled stopping time.
///
/// `gamma` is the eigengap ratio assumption: every tail eigenvalue must
/// satisfy λ_{r+1} ≤ γ·λ_r (default 1/10 via [`run_to_schedule`]). The
/// initialization is f_{i,0} = ρ·√λ₁ for every coordinate, and the run
/// length is exactly [`psd_toy_stopping_time`].
pub fn run_to_schedule_with_gap<T: Real>(
    lambdas: &[T],
    r: usize,
    rho: T,
    eta: T,
    gamma: T,
) -> Result<ScheduleRunReport<T>> {
    validate_lambdas(lambdas)?;
    if r == 0 || r > lambdas.len() {
        return Err(Error::invalid(format!(
            "rank r = {r} must satisfy 1 <= r <= number of eigenvalues ({})",
            lambdas.len()
        )));
    }
    if !(gamma > T::zero() && gamma < T::one()) {
        return Err(Error::invalid("eigengap ratio gamma must lie in (0, 1)"));
    }
    let lambda_1 = lambdas[0];
    let lambda_r = lambdas[r - 1];
    if !(lambda_r > T::zero()) {
        return Err(Error::invalid("lambda_r must be positive"));
    }
    if let Some(&lambda_next) = lambdas.get(r) {
        if lambda_next > gamma * lambda_r {
            return Err(Error::invalid(
                "eigengap assumption violated: lambda_(r+1) must not exceed gamma*lambda_r",
            ));
        }
    }
    let steps = psd_toy_stopping_time(lambda_1, lambda_r, rho, eta)?;
    let mut state = ScalarDynamicsState::from_init_size(lambdas.to_vec(), rho, eta)?;
    for _ in 0..steps {
        state.step();
    }

    let bound = rho.sqrt() * lambda_1.sqrt();
    let mut head_max_deviation = T::zero();
    let mut tail_max = T::zero();
    for (i, (&f, &lambda)) in state.f.iter().zip(state.lambdas.iter()).enumerate() {
        if i < r {
            let dev = (f - lambda.sqrt()).abs();
            if dev > head_max_deviation {
                head_max_deviation = dev;
            }
        } else if f > tail_max {
            tail_max = f;
        }
    }
    Ok(ScheduleRunReport {
        state,
        steps,
        bound,
        head_max_deviation,
        tail_max,
    })
}

/// Tally from [`contraction_check`]: how many coordinate-steps each
/// inequality was evaluated on and how many failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContractionReport {
    /// Number of sampled states (first one is the deterministic boundary
    /// state with every head coordinate at √(λᵢ/2)).
    pub trials: u64,
    /// Head coordinate-steps checked against the contraction inequality.
    pub contraction_checked: u64,
    /// Contraction inequality failures.
    pub contraction_violations: u64,
    /// Tail coordinate-steps checked against the slow-growth inequality.
    pub growth_checked: u64,
    /// Slow-growth inequality failures.
    pub growth_violations: u64,
    /// Tail coordinates skipped because their eigenvalue exceeds λ_r/10
    /// (the growth bound is only claimed below that threshold).
    pub growth_skipped: u64,
}

impl ContractionReport {
    pub fn is_clean(&self) -> bool {
        self.contraction_violations == 0 && self.growth_violations == 0
    }
}

/// Verifies the two one-step inequalities on randomly sampled admissible
/// states, coordinatewise, with zero tolerance:
///
/// * contraction, for head coordinates (i ≤ r) with f ≥ √(λᵢ/2):
///   `|f⁺ − √λᵢ| ≤ (1 − ηλ_r/2)·|f − √λᵢ|`;
/// * slow growth, for tail coordinates (i > r) with λᵢ ≤ λ_r/10:
///   `f⁺ ≤ (1 + ηλ_r/10)·f`.
///
/// Zero tolerance is sound because both claims carry real-arithmetic margin
/// in the admissible region (the slow-growth one is even exact under
/// floating-point rounding monotonicity: dropping the −ηf² term can only
/// shrink the multiplier). Head samples keep a small standoff from the
/// fixed point √λᵢ so cancellation noise cannot swamp the margin; the
/// boundary value f = √(λᵢ/2) itself is always included as the first trial.
/// The sampler is deterministic (fixed internal seed).
pub fn contraction_check<T: Real>(
    lambdas: &[T],
    r: usize,
    eta: T,
    trials: usize,
) -> Result<ContractionReport> {
    validate_lambdas(lambdas)?;
    validate_stepsize(lambdas, eta)?;
    if r == 0 || r > lambdas.len() {
        return Err(Error::invalid(format!(
            "rank r = {r} must satisfy 1 <= r <= number of eigenvalues ({})",
            lambdas.len()
        )));
    }
    if trials == 0 {
        return Err(Error::invalid("trial count must be at least 1"));
    }
    let lambda_1 = lambdas[0];
    let lambda_r = lambdas[r - 1];
    if !(lambda_r > T::zero()) {
        return Err(Error::invalid("lambda_r must be positive"));
    }

    let two = T::from_f64(2.0);
    let hi = (two * lambda_1).sqrt();
    let contraction_factor = T::one() - eta * lambda_r / two;
    let tail_threshold = lambda_r / T::from_f64(10.0);
    let growth_factor = T::one() + eta * tail_threshold;
    let standoff = T::from_f64(1e-9) * lambda_1.sqrt();

    let mut rng = crate::rng::RngStream::new(CONTRACTION_SAMPLER_SEED);
    let mut report = ContractionReport {
        trials: trials as u64,
        contraction_checked: 0,
        contraction_violations: 0,
        growth_checked: 0,
        growth_violations: 0,
        growth_skipped: 0,
    };

    let mut f = vec![T::zero(); lambdas.len()];
    for trial in 0..trials {
        for (i, &lambda) in lambdas.iter().enumerate() {
            if i < r {
                let lo = (lambda / two).sqrt();
                let target = lambda.sqrt();
                let mut v = if trial == 0 {
                    lo
                } else {
                    lo + T::from_f64(rng.next_uniform()) * (hi - lo)
                };
                // Keep a standoff from the fixed point so the difference
                // |f - √λᵢ| is far above cancellation noise.
                if (v - target).abs() < standoff {
                    v = hi;
                }
                // Rounding in lo + u·(hi − lo) can overshoot hi by an ulp,
                // which the admissible-region validation would reject.
                if v > hi {
                    v = hi;
                }
                f[i] = v;
            } else {
                f[i] = if trial == 0 {
                    hi
                } else {
                    T::from_f64(rng.next_uniform()) * hi
                };
            }
        }
        let state = ScalarDynamicsState::with_values(lambdas.to_vec(), f.clone(), eta)?;
        let next = scalar_step(&state);
        for (i, (&before, &after)) in state.f.iter().zip(next.f.iter()).enumerate() {
            let lambda = lambdas[i];
            if i < r {
                let target = lambda.sqrt();
                report.contraction_checked += 1;
                if (after - target).abs() > contraction_factor * (before - target).abs() {
                    report.contraction_violations += 1;
                }
            } else if lambda <= tail_threshold {
                report.growth_checked += 1;
                if after > growth_factor * before {
                    report.growth_violations += 1;
                }
            } else {
                report.growth_skipped += 1;
            }
        }
    }
    Ok(report)
}
