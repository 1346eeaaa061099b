//! The gradient dynamic on the factorized objective: initialization,
//! single step, trajectory runner with instrumentation, and empirical
//! early-stop selection.

use crate::diagnostics::{self, BlockNorms};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng::{gaussian_matrix, RngStream};
use crate::scalar::Real;
use crate::spectral::{operator_norm, product_singular_values, truncate_rank, SpectralFrame};

/// Factor iterate (F ∈ ℝ^{m×k}, G ∈ ℝ^{n×k}).
#[derive(Clone, Debug, PartialEq)]
pub struct FactorPair<T> {
    pub f: DenseMatrix<T>,
    pub g: DenseMatrix<T>,
}

impl<T: Real> FactorPair<T> {
    pub fn new(f: DenseMatrix<T>, g: DenseMatrix<T>) -> Result<Self> {
        if f.cols() != g.cols() {
            return Err(Error::invalid(format!(
                "factors must share the inner dimension, got {} and {}",
                f.cols(),
                g.cols()
            )));
        }
        Ok(Self { f, g })
    }

    pub fn k(&self) -> usize {
        self.f.cols()
    }

    /// Combined Frobenius scale √(‖F‖² + ‖G‖²).
    pub fn joint_norm(&self) -> T {
        let (nf, ng) = (self.f.frobenius_norm(), self.g.frobenius_norm());
        (nf * nf + ng * ng).sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct GdConfig<T> {
    /// Stepsize η.
    pub eta: T,
    /// Initialization size ρ.
    pub rho: T,
    /// Overspecified inner rank k (may exceed min(m,n); only k ≥ r matters).
    pub k: usize,
    pub max_iters: u64,
    /// Observer cadence (records also land on iterations 0 and max_iters).
    pub record_every: u64,
    pub seed: u64,
}

impl<T: Real> GdConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > T::zero()) || !self.eta.is_finite() {
            return Err(Error::invalid("stepsize must be positive and finite"));
        }
        if !(self.rho > T::zero()) || !self.rho.is_finite() {
            return Err(Error::invalid("initialization size must be positive and finite"));
        }
        if self.k == 0 {
            return Err(Error::invalid("inner rank k must be at least 1"));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record cadence must be at least 1"));
        }
        Ok(())
    }

    /// Default cadence keeps trajectory memory bounded on larger problems.
    pub fn default_record_every(m: usize, n: usize) -> u64 {
        if m + n <= 200 {
            1
        } else {
            10
        }
    }
}

/// Everything observed along one run. Vectors are index-aligned with
/// `iterations` (strictly increasing; entry 0 is the initial state).
#[derive(Clone, Debug)]
pub struct TrajectoryRecord<T> {
    pub iterations: Vec<u64>,
    pub train_error_fro: Vec<T>,
    pub test_error_fro: Vec<T>,
    pub test_error_op: Vec<T>,
    /// First min(r+2, min(m,n)) singular values of F_tG_tᵀ per record.
    pub leading_singulars: Vec<Vec<T>>,
    /// Block-norm diagnostics, present when requested at run time.
    pub block_norms: Option<Vec<BlockNorms<T>>>,
}

impl<T> Default for TrajectoryRecord<T> {
    fn default() -> Self {
        Self {
            iterations: Vec::new(),
            train_error_fro: Vec::new(),
            test_error_fro: Vec::new(),
            test_error_op: Vec::new(),
            leading_singulars: Vec::new(),
            block_norms: None,
        }
    }
}

impl<T: Real> TrajectoryRecord<T> {
    pub fn len(&self) -> usize {
        self.iterations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterations.is_empty()
    }
}

/// Trajectory record plus the final iterate.
#[derive(Clone, Debug)]
pub struct RunOutput<T> {
    pub record: TrajectoryRecord<T>,
    pub final_pair: FactorPair<T>,
}

/// Objective f(F,G) = ¼‖FGᵀ − X‖_F².
///
/// Note the dynamic's update F⁺ = F + η(X−FGᵀ)G is steepest descent on
/// ½‖FGᵀ−X‖_F², i.e. it moves by −2η∇f of this quarter-normalized value.
/// The bounds produced by the schedule module reference this f.
pub fn objective_value<T: Real>(pair: &FactorPair<T>, x: &DenseMatrix<T>) -> T {
    let r = pair.f.matmul_transb(&pair.g).sub(x).frobenius_norm();
    T::from_f64(0.25) * r * r
}

/// Small random initialization: F̃, G̃ with i.i.d. N(0, σ₁) entries (σ₁ is
/// the variance) from disjoint substreams of `cfg.seed`, scaled by
/// ρ/(3√(m+n+k)).
pub fn init_factors<T: Real>(
    m: usize,
    n: usize,
    cfg: &GdConfig<T>,
    sigma1: T,
) -> Result<FactorPair<T>> {
    init_impl(m, n, cfg, sigma1, false)
}

/// Symmetric variant: G̃ is the same draw as F̃ (so for m == n the factors
/// start bitwise-equal).
pub fn init_factors_symmetric<T: Real>(
    m: usize,
    n: usize,
    cfg: &GdConfig<T>,
    sigma1: T,
) -> Result<FactorPair<T>> {
    if m != n {
        return Err(Error::invalid("symmetric initialization needs m == n"));
    }
    init_impl(m, n, cfg, sigma1, true)
}

fn init_impl<T: Real>(
    m: usize,
    n: usize,
    cfg: &GdConfig<T>,
    sigma1: T,
    symmetric: bool,
) -> Result<FactorPair<T>> {
    cfg.validate()?;
    if cfg.rho.to_f64() < 1e-250 {
        // the squared scale must stay representable
        return Err(Error::invalid(format!(
            "initialization size {} below the 1e-250 representability guard",
            cfg.rho
        )));
    }
    if !(sigma1 > T::zero()) || !sigma1.is_finite() {
        return Err(Error::invalid("sigma1 must be positive and finite"));
    }
    let base = RngStream::new(cfg.seed);
    let scale = cfg.rho / (T::from_f64(3.0) * T::from_usize(m + n + cfg.k).sqrt());
    let f = gaussian_matrix::<T>(m, cfg.k, sigma1, &mut base.substream(0))?.scaled(scale);
    let g = if symmetric {
        f.clone()
    } else {
        gaussian_matrix::<T>(n, cfg.k, sigma1, &mut base.substream(1))?.scaled(scale)
    };
    Ok(FactorPair { f, g })
}

/// One step: (F,G) ← (F + ηRG, G + ηRᵀF) with R = X − FGᵀ taken at the
/// pre-update pair.
pub fn gd_step<T: Real>(
    pair: &FactorPair<T>,
    x: &DenseMatrix<T>,
    eta: T,
) -> Result<FactorPair<T>> {
    if pair.f.rows() != x.rows() || pair.g.rows() != x.cols() || pair.f.cols() != pair.g.cols() {
        return Err(Error::invalid(format!(
            "inconsistent shapes: X {}x{}, F {}x{}, G {}x{}",
            x.rows(),
            x.cols(),
            pair.f.rows(),
            pair.f.cols(),
            pair.g.rows(),
            pair.g.cols()
        )));
    }
    let residual = x.sub(&pair.f.matmul_transb(&pair.g));
    let f_next = pair.f.add_scaled(&residual.matmul(&pair.g), eta);
    let g_next = pair.g.add_scaled(&residual.tr_matmul(&pair.f), eta);
    if !f_next.all_finite() || !g_next.all_finite() {
        return Err(Error::Overflow { iteration: None });
    }
    Ok(FactorPair {
        f: f_next,
        g: g_next,
    })
}

/// Full trajectory from the standard initialization, instrumented against
/// the best rank-r truncation of `frame`.
pub fn run<T: Real>(
    x: &DenseMatrix<T>,
    frame: &SpectralFrame<T>,
    r: usize,
    cfg: &GdConfig<T>,
    with_block_diagnostics: bool,
) -> Result<RunOutput<T>> {
    let sigma1 = *frame
        .singular_values()
        .first()
        .ok_or_else(|| Error::invalid("frame has no singular values"))?;
    let pair = init_factors(x.rows(), x.cols(), cfg, sigma1)?;
    let target = truncate_rank(frame, r)?;
    run_from_pair(x, &target, Some(frame), r, pair, cfg, with_block_diagnostics)
}

/// Model-free variant: test errors measured against an explicit target
/// (e.g. a noiseless ground truth) and σ₁ supplied by the caller; no block
/// diagnostics, since those need the exact frame.
pub fn run_against<T: Real>(
    x: &DenseMatrix<T>,
    test_target: &DenseMatrix<T>,
    sigma1: T,
    r: usize,
    cfg: &GdConfig<T>,
) -> Result<RunOutput<T>> {
    let pair = init_factors(x.rows(), x.cols(), cfg, sigma1)?;
    run_from_pair(x, test_target, None, r, pair, cfg, false)
}

/// Trajectory from a caller-built iterate. `r` only sizes the recorded
/// leading singular values (and the block split when diagnostics are on).
pub fn run_from_pair<T: Real>(
    x: &DenseMatrix<T>,
    test_target: &DenseMatrix<T>,
    frame: Option<&SpectralFrame<T>>,
    r: usize,
    pair: FactorPair<T>,
    cfg: &GdConfig<T>,
    with_block_diagnostics: bool,
) -> Result<RunOutput<T>> {
    cfg.validate()?;
    if with_block_diagnostics && frame.is_none() {
        return Err(Error::invalid("block diagnostics require the spectral frame"));
    }
    if test_target.rows() != x.rows() || test_target.cols() != x.cols() {
        return Err(Error::invalid("test target shape differs from X"));
    }
    let lead_count = (r + 2).min(x.rows().min(x.cols()));
    // FGᵀ − X_r == E − R with E = X − X_r and R = X − FGᵀ: one subtraction
    // per record instead of a second full product.
    let e = x.sub(test_target);
    let mut record = TrajectoryRecord::<T> {
        block_norms: with_block_diagnostics.then(Vec::new),
        ..TrajectoryRecord::default()
    };
    let mut pair = pair;

    let observe = |t: u64, pair: &FactorPair<T>, record: &mut TrajectoryRecord<T>| -> Result<()> {
        let residual = x.sub(&pair.f.matmul_transb(&pair.g));
        let dev = e.sub(&residual);
        record.iterations.push(t);
        record.train_error_fro.push(residual.frobenius_norm());
        record.test_error_fro.push(dev.frobenius_norm());
        record.test_error_op.push(operator_norm(&dev));
        record
            .leading_singulars
            .push(product_singular_values(&pair.f, &pair.g, lead_count)?);
        if let (Some(rows), Some(frame)) = (record.block_norms.as_mut(), frame) {
            let aligned = diagnostics::align(frame, pair)?;
            let blocks = diagnostics::split(&aligned, r)?;
            let state = diagnostics::symmetrize(&blocks, &frame.sigma_head(r))?;
            rows.push(diagnostics::block_norms(&blocks, &state)?);
        }
        Ok(())
    };

    observe(0, &pair, &mut record)?;
    for t in 1..=cfg.max_iters {
        pair = gd_step(&pair, x, cfg.eta).map_err(|err| match err {
            Error::Overflow { .. } => Error::Overflow { iteration: Some(t) },
            other => other,
        })?;
        if t % cfg.record_every == 0 || t == cfg.max_iters {
            observe(t, &pair, &mut record)?;
        }
    }
    Ok(RunOutput {
        record,
        final_pair: pair,
    })
}

/// Recorded iteration minimizing the operator-norm test error (ties break
/// to the earliest iteration): the empirical stopping point.
pub fn select_early_stop<T: Real>(record: &TrajectoryRecord<T>) -> Result<(u64, T)> {
    if record.is_empty() {
        return Err(Error::invalid("cannot select a stop from an empty record"));
    }
    let mut best = 0;
    for i in 1..record.test_error_op.len() {
        if record.test_error_op[i] < record.test_error_op[best] {
            best = i;
        }
    }
    Ok((record.iterations[best], record.test_error_op[best]))
}
