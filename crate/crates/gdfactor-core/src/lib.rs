//! Core library for studying gradient descent on overparametrized low-rank
//! matrix factorization with small random initialization and early
//! stopping.
//!
//! The pieces fit together like this:
//!
//! * [`matrix`] — a small dense row-major matrix type with the handful of
//!   kernels everything else needs (products, transposed products, block
//!   slicing, compensated Frobenius norms).
//! * [`rng`] — a counter-free splittable PRNG with Gaussian sampling, so
//!   every experiment is exactly reproducible from one `u64` seed.
//! * [`spectral`] — dense SVD via one-sided Jacobi rotations, power
//!   iteration for operator norms, thin QR, Haar-random orthogonal frames,
//!   synthetic test matrices with a prescribed spectrum, and best rank-`r`
//!   truncation.
//! * [`dynamics`] — the factored gradient descent iteration
//!   `F ← F + η(X − FGᵀ)G`, `G ← G + η(X − FGᵀ)ᵀF` from a small random
//!   initialization, with trajectory instrumentation (train/test errors,
//!   leading singular values) and early-stopping selection.
//! * [`schedule`] — closed-form stepsize/initialization caps, the phased
//!   stopping-time counts, the final error bound, and trend reports, all
//!   evaluated in log space.
//! * [`diagnostics`] — frame alignment, signal/error block splitting, the
//!   symmetrized quantities and their exact one-step update identities,
//!   and the relative-signal metric.
//! * [`psd_toy`] — the decoupled scalar dynamics of the diagonal PSD
//!   special case, where every claim is exactly checkable.
//!
//! All numeric code is generic over [`scalar::Real`] (implemented for
//! `f32` and `f64`); the crate root exposes `f64`/`f32` aliases for the
//! common types.

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod matrix;
pub mod psd_toy;
pub mod rng;
pub mod scalar;
pub mod schedule;
pub mod spectral;

pub use diagnostics::{
    align, block_norms, predicted_block_step, predicted_symmetrized_step, signal_ratio, split,
    symmetrize, BlockNorms, BlockSplit, Signal, SymmetrizedState,
};
pub use dynamics::{
    gd_step, init_factors, init_factors_symmetric, objective_value, run, run_against,
    run_from_pair, select_early_stop, FactorPair, GdConfig, RunOutput, TrajectoryRecord,
};
pub use error::{Error, Result};
pub use matrix::DenseMatrix;
pub use psd_toy::{
    contraction_check, run_to_schedule, run_to_schedule_with_gap, scalar_step, ContractionReport,
    ScalarDynamicsState, ScheduleRunReport,
};
pub use rng::{gaussian_matrix, mix64, RngStream};
pub use scalar::Real;
pub use schedule::{
    iteration_counts, iteration_counts_from_ln, psd_toy_stopping_time, relative_gap, rho_cap,
    stepsize_cap, window_trend, GdSchedule, RhoCap, ScheduleInput, WindowTrend,
};
pub use spectral::{
    operator_norm, product_singular_values, random_orthogonal, singular_values, svd, synth_matrix,
    thin_qr_r, truncate_rank, SpectralFrame,
};

/// Dense `f64` matrix.
pub type Matrix64 = DenseMatrix<f64>;
/// Dense `f32` matrix.
pub type Matrix32 = DenseMatrix<f32>;
/// `f64` singular value decomposition frame.
pub type Frame64 = SpectralFrame<f64>;
/// `f32` singular value decomposition frame.
pub type Frame32 = SpectralFrame<f32>;
/// `f64` factor pair (F, G).
pub type Factors64 = FactorPair<f64>;
/// `f32` factor pair (F, G).
pub type Factors32 = FactorPair<f32>;
/// `f64` gradient-descent configuration.
pub type Config64 = GdConfig<f64>;
/// `f64` theory schedule.
pub type Schedule64 = GdSchedule<f64>;
/// `f64` schedule input.
pub type ScheduleInput64 = ScheduleInput<f64>;
