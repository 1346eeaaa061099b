//! Spectral factorizations: one-sided Jacobi SVD, power-iteration operator
//! norm, best rank-r truncation, and seeded synthesis of matrices with a
//! prescribed spectrum (returning the exact frame used to build them).

use crate::error::{Error, Result};
use crate::matrix::{compensated_sum, DenseMatrix};
use crate::rng::{gaussian_matrix, RngStream};
use crate::scalar::Real;

/// Jacobi sweep budget before reporting non-convergence.
const JACOBI_MAX_SWEEPS: usize = 60;

/// Fixed start seed for the power iteration (arbitrary constant; a seeded
/// start keeps the estimate deterministic).
const POWER_ITER_SEED: u64 = 0x853c_49e6_748f_ea9b;

/// Full SVD `M = Φ · diag(σ) · Ψᵀ`: `left` is m×m, `right` is n×n, both
/// orthogonal; `singular_values` has min(m,n) nonincreasing entries.
///
/// Sign convention: within each left singular vector the largest-magnitude
/// entry (smallest row index on ties) is nonnegative; paired right vectors
/// are flipped along with their left partner, and surplus null-space columns
/// of either frame are anchored the same way on their own.
#[derive(Clone, Debug)]
pub struct SpectralFrame<T> {
    left: DenseMatrix<T>,
    singular_values: Vec<T>,
    right: DenseMatrix<T>,
}

impl<T: Real> SpectralFrame<T> {
    pub fn new(
        left: DenseMatrix<T>,
        singular_values: Vec<T>,
        right: DenseMatrix<T>,
    ) -> Result<Self> {
        if left.rows() != left.cols() || right.rows() != right.cols() {
            return Err(Error::invalid("frame matrices must be square"));
        }
        if singular_values.len() != left.rows().min(right.rows()) {
            return Err(Error::invalid(
                "singular value count must be min(m, n)",
            ));
        }
        if singular_values
            .windows(2)
            .any(|w| !(w[0] >= w[1]))
            || singular_values.iter().any(|v| !(*v >= T::zero()))
        {
            return Err(Error::invalid(
                "singular values must be nonincreasing and nonnegative",
            ));
        }
        Ok(Self {
            left,
            singular_values,
            right,
        })
    }

    pub fn left(&self) -> &DenseMatrix<T> {
        &self.left
    }

    pub fn right(&self) -> &DenseMatrix<T> {
        &self.right
    }

    pub fn singular_values(&self) -> &[T] {
        &self.singular_values
    }

    pub fn rows(&self) -> usize {
        self.left.rows()
    }

    pub fn cols(&self) -> usize {
        self.right.rows()
    }

    /// Leading r×r diagonal Σ.
    pub fn sigma_head(&self, r: usize) -> DenseMatrix<T> {
        DenseMatrix::diagonal(r, r, &self.singular_values[..r.min(self.singular_values.len())])
    }

    /// Trailing (m−r)×(n−r) diagonal Σ̃ holding σ_{r+1}, σ_{r+2}, …
    pub fn sigma_tail(&self, r: usize) -> DenseMatrix<T> {
        let tail: Vec<T> = self.singular_values[r.min(self.singular_values.len())..].to_vec();
        DenseMatrix::diagonal(self.rows() - r, self.cols() - r, &tail)
    }

    /// `Φ · diag(σ) · Ψᵀ` (exact reconstruction up to rounding).
    pub fn reconstruct(&self) -> DenseMatrix<T> {
        scaled_outer(&self.left, &self.singular_values, &self.right)
    }
}

fn scaled_outer<T: Real>(
    left: &DenseMatrix<T>,
    values: &[T],
    right: &DenseMatrix<T>,
) -> DenseMatrix<T> {
    let t = values.len();
    let mut lt = left.left_cols(t);
    for j in 0..t {
        for i in 0..lt.rows() {
            lt.set(i, j, lt.get(i, j) * values[j]);
        }
    }
    lt.matmul_transb(&right.left_cols(t))
}

/// One-sided Jacobi core. Expects rows ≥ cols; works on A = Mᵀ so each
/// column of M is a contiguous row. Returns (U m×m, σ desc, V n×n),
/// unanchored signs.
fn jacobi_tall<T: Real>(m: &DenseMatrix<T>) -> Result<(DenseMatrix<T>, Vec<T>, DenseMatrix<T>)> {
    let (rows, cols) = (m.rows(), m.cols());
    debug_assert!(rows >= cols);
    let mut a = m.transpose(); // cols×rows: row j holds column j of M
    let mut vt = DenseMatrix::identity(cols);
    let tol = T::tol(1e-12, 8.0);

    let mut converged = cols < 2;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..cols.saturating_sub(1) {
            for q in p + 1..cols {
                let (app, aqq, apq) = column_moments(&a, p, q);
                if app == T::zero() || aqq == T::zero() {
                    continue;
                }
                if apq.abs() <= tol * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (aqq - app) / (T::from_f64(2.0) * apq);
                let t = if zeta >= T::zero() {
                    T::one() / (zeta + (T::one() + zeta * zeta).sqrt())
                } else {
                    -T::one() / (-zeta + (T::one() + zeta * zeta).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate_rows(&mut a, p, q, c, s);
                rotate_rows(&mut vt, p, q, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::numerical(format!(
            "jacobi svd did not converge within {JACOBI_MAX_SWEEPS} sweeps"
        )));
    }

    // Column norms are the singular values; sort descending, stable on ties.
    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<T> = (0..cols)
        .map(|j| compensated_sum(a.row(j).iter().map(|&v| v * v)).sqrt())
        .collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap().then(i.cmp(&j)));

    let values: Vec<T> = order.iter().map(|&j| norms[j]).collect();
    let mut left = DenseMatrix::zeros(rows, rows);
    let mut filled = Vec::with_capacity(rows);
    for (slot, &j) in order.iter().enumerate() {
        if values[slot] > T::zero() {
            let inv = T::one() / values[slot];
            for i in 0..rows {
                left.set(i, slot, a.get(j, i) * inv);
            }
            filled.push(slot);
        }
    }
    complete_basis(&mut left, &mut filled);

    let mut right = DenseMatrix::zeros(cols, cols);
    for (slot, &j) in order.iter().enumerate() {
        for i in 0..cols {
            right.set(i, slot, vt.get(j, i));
        }
    }
    Ok((left, values, right))
}

fn column_moments<T: Real>(a: &DenseMatrix<T>, p: usize, q: usize) -> (T, T, T) {
    let (rp, rq) = (a.row(p), a.row(q));
    let mut app = T::zero();
    let mut aqq = T::zero();
    let mut apq = T::zero();
    for (&x, &y) in rp.iter().zip(rq) {
        app = app + x * x;
        aqq = aqq + y * y;
        apq = apq + x * y;
    }
    (app, aqq, apq)
}

fn rotate_rows<T: Real>(a: &mut DenseMatrix<T>, p: usize, q: usize, c: T, s: T) {
    for i in 0..a.cols() {
        let x = a.get(p, i);
        let y = a.get(q, i);
        a.set(p, i, c * x - s * y);
        a.set(q, i, s * x + c * y);
    }
}

/// Fills every still-zero column of `basis` (those not in `filled`) with
/// orthonormal completions. Deterministic: each slot takes the coordinate
/// vector with the largest residual after projecting out the filled columns
/// (two Gram–Schmidt passes), smallest index on ties.
fn complete_basis<T: Real>(basis: &mut DenseMatrix<T>, filled: &mut Vec<usize>) {
    let n = basis.rows();
    let todo: Vec<usize> = (0..basis.cols()).filter(|j| !filled.contains(j)).collect();
    for slot in todo {
        let mut best: Option<(T, Vec<T>)> = None;
        for cand in 0..n {
            let mut v = vec![T::zero(); n];
            v[cand] = T::one();
            project_out(basis, filled, &mut v);
            let norm = compensated_sum(v.iter().map(|&x| x * x)).sqrt();
            if best.as_ref().map_or(true, |(b, _)| norm > *b) {
                best = Some((norm, v));
            }
        }
        let (norm, mut v) = best.expect("basis completion candidate");
        for x in v.iter_mut() {
            *x = *x / norm;
        }
        // second pass tightens orthogonality after normalization
        project_out(basis, filled, &mut v);
        let norm2 = compensated_sum(v.iter().map(|&x| x * x)).sqrt();
        for (i, x) in v.iter().enumerate() {
            basis.set(i, slot, *x / norm2);
        }
        filled.push(slot);
    }
}

fn project_out<T: Real>(basis: &DenseMatrix<T>, filled: &[usize], v: &mut [T]) {
    for _ in 0..2 {
        for &col in filled {
            let mut proj = T::zero();
            for i in 0..v.len() {
                proj = proj + basis.get(i, col) * v[i];
            }
            for i in 0..v.len() {
                v[i] = v[i] - proj * basis.get(i, col);
            }
        }
    }
}

/// Full SVD via one-sided Jacobi (relative off-diagonal tolerance 1e-12,
/// 60-sweep budget). Wide matrices go through the transposed problem.
pub fn svd<T: Real>(m: &DenseMatrix<T>) -> Result<SpectralFrame<T>> {
    let (left, values, right) = if m.rows() >= m.cols() {
        jacobi_tall(m)?
    } else {
        let (l, v, r) = jacobi_tall(&m.transpose())?;
        (r, v, l)
    };
    let mut frame = SpectralFrame {
        left,
        singular_values: values,
        right,
    };
    anchor_signs(&mut frame);
    Ok(frame)
}

fn anchor_signs<T: Real>(frame: &mut SpectralFrame<T>) {
    let nv = frame.singular_values.len();
    for j in 0..frame.left.cols() {
        if needs_flip(&frame.left, j) {
            flip_column(&mut frame.left, j);
            if j < nv {
                flip_column(&mut frame.right, j);
            }
        }
    }
    for j in nv..frame.right.cols() {
        if needs_flip(&frame.right, j) {
            flip_column(&mut frame.right, j);
        }
    }
}

fn needs_flip<T: Real>(m: &DenseMatrix<T>, j: usize) -> bool {
    let mut anchor = T::zero();
    let mut sign_negative = false;
    for i in 0..m.rows() {
        let v = m.get(i, j);
        if v.abs() > anchor {
            anchor = v.abs();
            sign_negative = v < T::zero();
        }
    }
    sign_negative
}

fn flip_column<T: Real>(m: &mut DenseMatrix<T>, j: usize) {
    for i in 0..m.rows() {
        m.set(i, j, -m.get(i, j));
    }
}

/// Singular values only (no frames, no basis completion): the cheap path
/// for diagnostics. Descending, min(m,n) entries.
pub fn singular_values<T: Real>(m: &DenseMatrix<T>) -> Result<Vec<T>> {
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(Vec::new());
    }
    let work = if m.rows() >= m.cols() {
        m.transpose()
    } else {
        m.clone()
    };
    // rows of `work` are the columns of the tall problem
    let mut a = work;
    let tol = T::tol(1e-12, 8.0);
    let n = a.rows();
    let mut converged = n < 2;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (app, aqq, apq) = column_moments(&a, p, q);
                if app == T::zero() || aqq == T::zero() {
                    continue;
                }
                if apq.abs() <= tol * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (aqq - app) / (T::from_f64(2.0) * apq);
                let t = if zeta >= T::zero() {
                    T::one() / (zeta + (T::one() + zeta * zeta).sqrt())
                } else {
                    -T::one() / (-zeta + (T::one() + zeta * zeta).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate_rows(&mut a, p, q, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::numerical(format!(
            "jacobi singular values did not converge within {JACOBI_MAX_SWEEPS} sweeps"
        )));
    }
    let mut values: Vec<T> = (0..n)
        .map(|j| compensated_sum(a.row(j).iter().map(|&v| v * v)).sqrt())
        .collect();
    values.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(values)
}

/// Spectral norm σ₁(M) by power iteration on MᵀM with a deterministic
/// seeded start and a Rayleigh-quotient stagnation test (relative 1e-9).
/// Total on every shape: empty or zero matrices return 0. Degenerate or
/// tied spectra are fine — the quotient stagnates even when the iterate
/// vector keeps rotating.
pub fn operator_norm<T: Real>(m: &DenseMatrix<T>) -> T {
    if m.rows() == 0 || m.cols() == 0 {
        return T::zero();
    }
    let mut rng = RngStream::new(POWER_ITER_SEED);
    let mut v = DenseMatrix::from_fn(m.cols(), 1, |_, _| T::from_f64(rng.next_gaussian()));
    let tol = T::tol(1e-9, 64.0);
    let mut rayleigh = T::zero();
    for iter in 0..100_000 {
        let vn = v.frobenius_norm();
        if vn == T::zero() {
            return T::zero();
        }
        v = v.scaled(T::one() / vn);
        let w = m.matmul(&v); // m×1
        let rq = {
            let n = w.frobenius_norm();
            n * n
        };
        if rq == T::zero() {
            return T::zero();
        }
        if iter > 0 && (rq - rayleigh).abs() <= tol * rq {
            return rq.sqrt();
        }
        rayleigh = rq;
        v = m.tr_matmul(&w); // MᵀMv
    }
    rayleigh.sqrt()
}

/// R factor of a thin Householder QR of `a` (min(rows,cols)×cols upper
/// trapezoid); Q is not formed.
pub fn thin_qr_r<T: Real>(a: &DenseMatrix<T>) -> DenseMatrix<T> {
    let mut r = a.clone();
    let (rows, cols) = (r.rows(), r.cols());
    let steps = rows.min(cols);
    for j in 0..steps {
        let mut norm_sq = T::zero();
        for i in j..rows {
            let x = r.get(i, j);
            norm_sq = norm_sq + x * x;
        }
        let norm = norm_sq.sqrt();
        if norm == T::zero() {
            continue;
        }
        let alpha = if r.get(j, j) >= T::zero() { -norm } else { norm };
        let mut v = vec![T::zero(); rows - j];
        v[0] = r.get(j, j) - alpha;
        for i in j + 1..rows {
            v[i - j] = r.get(i, j);
        }
        let vsq = compensated_sum(v.iter().map(|&x| x * x));
        if vsq == T::zero() {
            continue;
        }
        let two_over = T::from_f64(2.0) / vsq;
        for c in j..cols {
            let mut w = T::zero();
            for i in j..rows {
                w = w + v[i - j] * r.get(i, c);
            }
            let w = w * two_over;
            for i in j..rows {
                r.set(i, c, r.get(i, c) - w * v[i - j]);
            }
        }
        // clean the annihilated entries exactly
        r.set(j, j, alpha);
        for i in j + 1..rows {
            r.set(i, j, T::zero());
        }
    }
    r.top_rows(steps)
}

/// Orthogonal matrix from the QR factorization of an n×n standard Gaussian
/// draw, with the R-diagonal sign fix (columns flipped so R's diagonal is
/// nonnegative). With a seeded stream this is a deterministic
/// Haar-distributed rotation.
pub fn random_orthogonal<T: Real>(n: usize, rng: &mut RngStream) -> Result<DenseMatrix<T>> {
    let a = gaussian_matrix::<T>(n, n, T::one(), rng)?;
    let mut r = a;
    let mut reflectors: Vec<(usize, Vec<T>, T)> = Vec::with_capacity(n);
    let mut diag_sign = vec![false; n];
    for j in 0..n {
        let mut norm_sq = T::zero();
        for i in j..n {
            let x = r.get(i, j);
            norm_sq = norm_sq + x * x;
        }
        let norm = norm_sq.sqrt();
        if norm == T::zero() {
            continue;
        }
        let alpha = if r.get(j, j) >= T::zero() { -norm } else { norm };
        let mut v = vec![T::zero(); n - j];
        v[0] = r.get(j, j) - alpha;
        for i in j + 1..n {
            v[i - j] = r.get(i, j);
        }
        let vsq = compensated_sum(v.iter().map(|&x| x * x));
        if vsq == T::zero() {
            continue;
        }
        let two_over = T::from_f64(2.0) / vsq;
        for c in j..n {
            let mut w = T::zero();
            for i in j..n {
                w = w + v[i - j] * r.get(i, c);
            }
            let w = w * two_over;
            for i in j..n {
                r.set(i, c, r.get(i, c) - w * v[i - j]);
            }
        }
        diag_sign[j] = alpha < T::zero();
        reflectors.push((j, v, two_over));
    }
    let mut q = DenseMatrix::identity(n);
    for (j, v, two_over) in reflectors.iter().rev() {
        for c in 0..n {
            let mut w = T::zero();
            for i in *j..n {
                w = w + v[i - j] * q.get(i, c);
            }
            let w = w * *two_over;
            for i in *j..n {
                q.set(i, c, q.get(i, c) - w * v[i - j]);
            }
        }
    }
    // R's diagonal entry j is `alpha`; flip Q's column where it was negative
    for j in 0..n {
        if diag_sign[j] {
            flip_column(&mut q, j);
        }
    }
    Ok(q)
}

/// Best rank-r approximation from a frame (Eckart–Young truncation).
pub fn truncate_rank<T: Real>(frame: &SpectralFrame<T>, r: usize) -> Result<DenseMatrix<T>> {
    let max_r = frame.singular_values.len();
    if r == 0 || r > max_r {
        return Err(Error::invalid(format!(
            "truncation rank {r} out of range 1..={max_r}"
        )));
    }
    Ok(scaled_outer(
        &frame.left,
        &frame.singular_values[..r],
        &frame.right,
    ))
}

/// Builds an m×n matrix with exactly the given nonincreasing nonnegative
/// singular values: X = Q_L · diag(σ) · Q_Rᵀ with seeded Haar rotations.
/// Returns X together with the frame that generated it — diagnostics must
/// use this frame (re-running an SVD would lose the sign/order choices
/// whenever values repeat).
pub fn synth_matrix<T: Real>(
    m: usize,
    n: usize,
    values: &[T],
    rng: &mut RngStream,
) -> Result<(DenseMatrix<T>, SpectralFrame<T>)> {
    let t = m.min(n);
    if values.len() > t {
        return Err(Error::invalid(format!(
            "{} singular values exceed min(m, n) = {t}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite() || *v < T::zero()) {
        return Err(Error::invalid("singular values must be finite and nonnegative"));
    }
    if values.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::invalid("singular values must be nonincreasing"));
    }
    let left = random_orthogonal::<T>(m, rng)?;
    let right = random_orthogonal::<T>(n, rng)?;
    let mut padded = values.to_vec();
    padded.resize(t, T::zero());
    let x = scaled_outer(&left, &padded, &right);
    let frame = SpectralFrame {
        left,
        singular_values: padded,
        right,
    };
    Ok((x, frame))
}

/// Leading `count` singular values of F·Gᵀ without forming the m×n product:
/// thin-QR both factors and take the Jacobi values of R_F·R_Gᵀ (at most
/// k×k). Values beyond the inner rank are exact zeros.
pub fn product_singular_values<T: Real>(
    f: &DenseMatrix<T>,
    g: &DenseMatrix<T>,
    count: usize,
) -> Result<Vec<T>> {
    if f.cols() != g.cols() {
        return Err(Error::invalid("factor inner dimensions differ"));
    }
    if count > f.rows().min(g.rows()) {
        return Err(Error::invalid(format!(
            "requested {count} singular values of a {}x{} product",
            f.rows(),
            g.rows()
        )));
    }
    let rf = thin_qr_r(f);
    let rg = thin_qr_r(g);
    let mut vals = singular_values(&rf.matmul_transb(&rg))?;
    vals.resize(count.max(vals.len()), T::zero());
    vals.truncate(count);
    Ok(vals)
}
