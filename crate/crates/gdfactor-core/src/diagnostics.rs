//! Trajectory decomposition in the target's spectral coordinates: the
//! U/V/J/K block split of the aligned factors, the symmetrized quantities
//! A, B, P, Q, their exact one-step update identities, the relative-signal
//! metric, and the block norms used to bound ‖FGᵀ − X_r‖.
//!
//! Degenerate splits (r = m or r = n) produce 0-row blocks; every
//! operation is total on them.

use crate::dynamics::FactorPair;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Real;
use crate::spectral::{operator_norm, singular_values, SpectralFrame};

/// Aligned-factor blocks: U, J stack to ΦᵀF and V, K stack to ΨᵀG.
#[derive(Clone, Debug)]
pub struct BlockSplit<T> {
    /// Top r×k block of ΦᵀF (signal rows).
    pub u: DenseMatrix<T>,
    /// Bottom (m−r)×k block of ΦᵀF (error rows).
    pub j: DenseMatrix<T>,
    /// Top r×k block of ΨᵀG.
    pub v: DenseMatrix<T>,
    /// Bottom (n−r)×k block of ΨᵀG.
    pub k: DenseMatrix<T>,
}

/// Symmetrization of the signal blocks: A = (U+V)/2, B = (U−V)/2,
/// P = Σ − AAᵀ + BBᵀ, Q = ABᵀ − BAᵀ (so Σ − UVᵀ = P + Q).
#[derive(Clone, Debug)]
pub struct SymmetrizedState<T> {
    pub a: DenseMatrix<T>,
    pub b: DenseMatrix<T>,
    pub p: DenseMatrix<T>,
    pub q: DenseMatrix<T>,
}

/// Operator/Frobenius norms of the decomposition pieces; the four block
/// norms bound ‖FGᵀ − X_r‖ by the triangle inequality.
#[derive(Clone, Debug)]
pub struct BlockNorms<T> {
    pub uv_minus_sigma_op: T,
    pub uk_op: T,
    pub jv_op: T,
    pub jk_op: T,
    pub p_op: T,
    pub q_op: T,
    pub b_fro: T,
    pub a_sigma_r: T,
}

/// Relative signal: finite ratio, or the explicit infinity sentinel when
/// the complement energy vanishes (serializes cleanly, unlike IEEE inf).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Signal<T> {
    Finite(T),
    Infinite,
}

/// (ΦᵀF, ΨᵀG): rotates the iterate into the frame where X is diagonal.
pub fn align<T: Real>(frame: &SpectralFrame<T>, pair: &FactorPair<T>) -> Result<FactorPair<T>> {
    if frame.rows() != pair.f.rows() || frame.cols() != pair.g.rows() {
        return Err(Error::invalid(format!(
            "frame is {}x{} but factors are {}x{} and {}x{}",
            frame.rows(),
            frame.cols(),
            pair.f.rows(),
            pair.f.cols(),
            pair.g.rows(),
            pair.g.cols()
        )));
    }
    Ok(FactorPair {
        f: frame.left().tr_matmul(&pair.f),
        g: frame.right().tr_matmul(&pair.g),
    })
}

/// Pure slicing of an aligned pair into signal and error rows.
pub fn split<T: Real>(aligned: &FactorPair<T>, r: usize) -> Result<BlockSplit<T>> {
    let (m, n) = (aligned.f.rows(), aligned.g.rows());
    if r > m.min(n) {
        return Err(Error::invalid(format!(
            "split rank {r} exceeds min({m}, {n})"
        )));
    }
    Ok(BlockSplit {
        u: aligned.f.top_rows(r),
        j: aligned.f.bottom_rows(r),
        v: aligned.g.top_rows(r),
        k: aligned.g.bottom_rows(r),
    })
}

fn check_block_shapes<T: Real>(blocks: &BlockSplit<T>) -> Result<usize> {
    let r = blocks.u.rows();
    let k = blocks.u.cols();
    if blocks.v.rows() != r
        || blocks.v.cols() != k
        || blocks.j.cols() != k
        || blocks.k.cols() != k
    {
        return Err(Error::invalid("block shapes are inconsistent"));
    }
    Ok(r)
}

/// A, B, P, Q from the signal blocks and the leading diagonal Σ.
pub fn symmetrize<T: Real>(
    blocks: &BlockSplit<T>,
    sigma: &DenseMatrix<T>,
) -> Result<SymmetrizedState<T>> {
    let r = check_block_shapes(blocks)?;
    if sigma.rows() != r || sigma.cols() != r {
        return Err(Error::invalid(format!(
            "sigma must be {r}x{r}, got {}x{}",
            sigma.rows(),
            sigma.cols()
        )));
    }
    let half = T::from_f64(0.5);
    let a = blocks.u.add(&blocks.v).scaled(half);
    let b = blocks.u.sub(&blocks.v).scaled(half);
    let p = sigma.sub(&a.matmul_transb(&a)).add(&b.matmul_transb(&b));
    let q = a.matmul_transb(&b).sub(&b.matmul_transb(&a));
    Ok(SymmetrizedState { a, b, p, q })
}

/// One predicted step of the block dynamics (all products taken at the
/// pre-update blocks):
///   U⁺ = U + ηΣV − ηU(VᵀV+KᵀK)      J⁺ = J + ηΣ̃K − ηJ(VᵀV+KᵀK)
///   V⁺ = V + ηΣU − ηV(UᵀU+JᵀJ)      K⁺ = K + ηΣ̃ᵀJ − ηK(UᵀU+JᵀJ)
pub fn predicted_block_step<T: Real>(
    blocks: &BlockSplit<T>,
    sigma: &DenseMatrix<T>,
    sigma_tilde: &DenseMatrix<T>,
    eta: T,
) -> Result<BlockSplit<T>> {
    let r = check_block_shapes(blocks)?;
    if sigma.rows() != r || sigma.cols() != r {
        return Err(Error::invalid("sigma shape mismatch"));
    }
    if sigma_tilde.rows() != blocks.j.rows() || sigma_tilde.cols() != blocks.k.rows() {
        return Err(Error::invalid("sigma_tilde shape mismatch"));
    }
    let vv_kk = blocks.v.tr_matmul(&blocks.v).add(&blocks.k.tr_matmul(&blocks.k));
    let uu_jj = blocks.u.tr_matmul(&blocks.u).add(&blocks.j.tr_matmul(&blocks.j));
    let u = blocks
        .u
        .add_scaled(&sigma.matmul(&blocks.v).sub(&blocks.u.matmul(&vv_kk)), eta);
    let j = blocks
        .j
        .add_scaled(&sigma_tilde.matmul(&blocks.k).sub(&blocks.j.matmul(&vv_kk)), eta);
    let v = blocks
        .v
        .add_scaled(&sigma.matmul(&blocks.u).sub(&blocks.v.matmul(&uu_jj)), eta);
    let k = blocks
        .k
        .add_scaled(&sigma_tilde.tr_matmul(&blocks.j).sub(&blocks.k.matmul(&uu_jj)), eta);
    Ok(BlockSplit { u, j, v, k })
}

/// One predicted step of the symmetrized dynamics:
///   A⁺ = (I+ηP)A + ηC,  B⁺ = (I−ηP)B + ηD,
///   C = −ABᵀB + BAᵀB − A(KᵀK+JᵀJ)/2 − B(KᵀK−JᵀJ)/2,
///   D =  ABᵀA − BAᵀA − A(KᵀK−JᵀJ)/2 − B(KᵀK+JᵀJ)/2,
/// and P⁺ expanded from Σ − A⁺A⁺ᵀ + B⁺B⁺ᵀ:
///   P⁺ = P − ηP(Σ−P) − η(Σ−P)P + η²(PPP − PΣP) − 2ηPBBᵀ − 2ηBBᵀP
///        − η(A+ηPA)Cᵀ − ηC(A+ηPA)ᵀ − η²CCᵀ
///        + η(B−ηPB)Dᵀ + ηD(B−ηPB)ᵀ + η²DDᵀ.
/// Since B⁺ = (I−ηP)B + ηD, its cross terms carry B−ηPB (with the minus).
/// Q⁺ is recomputed from A⁺, B⁺.
pub fn predicted_symmetrized_step<T: Real>(
    state: &SymmetrizedState<T>,
    blocks: &BlockSplit<T>,
    sigma: &DenseMatrix<T>,
    eta: T,
) -> Result<SymmetrizedState<T>> {
    check_block_shapes(blocks)?;
    let (a, b, p) = (&state.a, &state.b, &state.p);
    if sigma.rows() != p.rows() || sigma.cols() != p.cols() {
        return Err(Error::invalid("sigma shape mismatch"));
    }
    let half = T::from_f64(0.5);
    let ktk = blocks.k.tr_matmul(&blocks.k);
    let jtj = blocks.j.tr_matmul(&blocks.j);
    let sum_half = ktk.add(&jtj).scaled(half);
    let diff_half = ktk.sub(&jtj).scaled(half);

    let btb = b.tr_matmul(b);
    let atb = a.tr_matmul(b);
    let bta = b.tr_matmul(a);
    let ata = a.tr_matmul(a);
    let c = b
        .matmul(&atb)
        .sub(&a.matmul(&btb))
        .sub(&a.matmul(&sum_half))
        .sub(&b.matmul(&diff_half));
    let d = a
        .matmul(&bta)
        .sub(&b.matmul(&ata))
        .sub(&a.matmul(&diff_half))
        .sub(&b.matmul(&sum_half));

    let a_next = a.add_scaled(&p.matmul(a), eta).add_scaled(&c, eta);
    let b_next = b.add_scaled(&p.matmul(b), -eta).add_scaled(&d, eta);

    let eta2 = eta * eta;
    let sig_minus_p = sigma.sub(p);
    let bbt = b.matmul_transb(b);
    let a_shift = a.add_scaled(&p.matmul(a), eta); // A + ηPA
    let b_shift = b.add_scaled(&p.matmul(b), -eta); // B − ηPB
    let p_next = p
        .add_scaled(&p.matmul(&sig_minus_p), -eta)
        .add_scaled(&sig_minus_p.matmul(p), -eta)
        .add_scaled(&p.matmul(p).matmul(p).sub(&p.matmul(sigma).matmul(p)), eta2)
        .add_scaled(&p.matmul(&bbt), -(eta + eta))
        .add_scaled(&bbt.matmul(p), -(eta + eta))
        .add_scaled(&a_shift.matmul_transb(&c), -eta)
        .add_scaled(&c.matmul_transb(&a_shift), -eta)
        .add_scaled(&c.matmul_transb(&c), -eta2)
        .add_scaled(&b_shift.matmul_transb(&d), eta)
        .add_scaled(&d.matmul_transb(&b_shift), eta)
        .add_scaled(&d.matmul_transb(&d), eta2);
    let q_next = a_next.matmul_transb(&b_next).sub(&b_next.matmul_transb(&a_next));
    Ok(SymmetrizedState {
        a: a_next,
        b: b_next,
        p: p_next,
        q: q_next,
    })
}

/// Relative signal of an iterate against the target's top-r subspaces:
/// min{σ_r(U_rᵀF), σ_r(V_rᵀG)} / max{σ₁((I−U_rU_rᵀ)F), σ₁((I−V_rV_rᵀ)G)}.
/// Returns the infinity sentinel when the denominator falls below
/// 1e-14·√(‖F‖²+‖G‖²).
pub fn signal_ratio<T: Real>(
    f: &DenseMatrix<T>,
    g: &DenseMatrix<T>,
    frame: &SpectralFrame<T>,
    r: usize,
) -> Result<Signal<T>> {
    if r > frame.rows().min(frame.cols()) {
        return Err(Error::invalid(format!("signal rank {r} out of range")));
    }
    if frame.rows() != f.rows() || frame.cols() != g.rows() {
        return Err(Error::invalid("frame and factor shapes differ"));
    }
    let ur = frame.left().left_cols(r);
    let vr = frame.right().left_cols(r);
    let num_f = smallest_of_r(&ur.tr_matmul(f), r)?;
    let num_g = smallest_of_r(&vr.tr_matmul(g), r)?;
    let comp_f = f.sub(&ur.matmul(&ur.tr_matmul(f)));
    let comp_g = g.sub(&vr.matmul(&vr.tr_matmul(g)));
    let den = operator_norm(&comp_f).max(operator_norm(&comp_g));
    let scale = {
        let (nf, ng) = (f.frobenius_norm(), g.frobenius_norm());
        (nf * nf + ng * ng).sqrt()
    };
    if den <= T::tol(1e-14, 4.0) * scale {
        Ok(Signal::Infinite)
    } else {
        Ok(Signal::Finite(num_f.min(num_g) / den))
    }
}

/// σ_r of an r×k matrix; zero when the rank cannot reach r (k < r).
fn smallest_of_r<T: Real>(m: &DenseMatrix<T>, r: usize) -> Result<T> {
    let vals = singular_values(m)?;
    Ok(vals.get(r.wrapping_sub(1)).copied().unwrap_or(T::zero()))
}

/// The norms of the §-wise decomposition. Σ is recovered from the state's
/// defining identity (Σ = P + AAᵀ − BBᵀ), so only blocks and state are
/// needed.
pub fn block_norms<T: Real>(
    blocks: &BlockSplit<T>,
    state: &SymmetrizedState<T>,
) -> Result<BlockNorms<T>> {
    let r = check_block_shapes(blocks)?;
    let sigma = state
        .p
        .add(&state.a.matmul_transb(&state.a))
        .sub(&state.b.matmul_transb(&state.b));
    let uv_minus_sigma = blocks.u.matmul_transb(&blocks.v).sub(&sigma);
    Ok(BlockNorms {
        uv_minus_sigma_op: operator_norm(&uv_minus_sigma),
        uk_op: operator_norm(&blocks.u.matmul_transb(&blocks.k)),
        jv_op: operator_norm(&blocks.j.matmul_transb(&blocks.v)),
        jk_op: operator_norm(&blocks.j.matmul_transb(&blocks.k)),
        p_op: operator_norm(&state.p),
        q_op: operator_norm(&state.q),
        b_fro: state.b.frobenius_norm(),
        a_sigma_r: smallest_of_r(&state.a, r)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::max_abs_diff;
    use crate::rng::{gaussian_matrix, RngStream};

    type M = DenseMatrix<f64>;

    fn random_blocks(m: usize, n: usize, r: usize, k: usize, seed: u64) -> BlockSplit<f64> {
        let mut rng = RngStream::new(seed);
        BlockSplit {
            u: gaussian_matrix(r, k, 0.04, &mut rng).unwrap(),
            j: gaussian_matrix(m - r, k, 0.04, &mut rng).unwrap(),
            v: gaussian_matrix(r, k, 0.04, &mut rng).unwrap(),
            k: gaussian_matrix(n - r, k, 0.04, &mut rng).unwrap(),
        }
    }

    #[test]
    fn split_round_trips_bitwise_including_empty_blocks() {
        let mut rng = RngStream::new(3);
        let f = gaussian_matrix::<f64>(5, 3, 1.0, &mut rng).unwrap();
        let g = gaussian_matrix::<f64>(4, 3, 1.0, &mut rng).unwrap();
        let pair = FactorPair::new(f.clone(), g.clone()).unwrap();
        let blocks = split(&pair, 2).unwrap();
        assert_eq!(M::vstack(&blocks.u, &blocks.j), f);
        assert_eq!(M::vstack(&blocks.v, &blocks.k), g);

        let all = split(&pair, 4).unwrap();
        assert_eq!(all.k.rows(), 0);
        assert_eq!(M::vstack(&all.v, &all.k), g);
        assert!(split(&pair, 5).is_err());
    }

    #[test]
    fn symmetrize_degenerate_cases() {
        let mut rng = RngStream::new(4);
        let u = gaussian_matrix::<f64>(3, 5, 1.0, &mut rng).unwrap();
        let sigma = M::diagonal(3, 3, &[2.0, 1.0, 0.5]);
        let zero_err = M::zeros(0, 5);
        // U == V → B = 0, Q = 0
        let balanced = BlockSplit {
            u: u.clone(),
            j: zero_err.clone(),
            v: u.clone(),
            k: zero_err.clone(),
        };
        let s = symmetrize(&balanced, &sigma).unwrap();
        assert_eq!(s.b, M::zeros(3, 5));
        assert!(s.q.max_abs() == 0.0);
        // U == −V → A = 0, P = Σ + BBᵀ ⪰ Σ on the diagonal
        let opposed = BlockSplit {
            u: u.clone(),
            j: zero_err.clone(),
            v: u.scaled(-1.0),
            k: zero_err,
        };
        let s = symmetrize(&opposed, &sigma).unwrap();
        assert_eq!(s.a, M::zeros(3, 5));
        for i in 0..3 {
            assert!(s.p.get(i, i) >= sigma.get(i, i));
        }
    }

    #[test]
    fn sigma_minus_uv_equals_p_plus_q() {
        for seed in 0..20 {
            let blocks = random_blocks(6, 5, 3, 4, seed);
            let sigma = M::diagonal(3, 3, &[1.5, 1.0, 0.7]);
            let s = symmetrize(&blocks, &sigma).unwrap();
            let lhs = sigma.sub(&blocks.u.matmul_transb(&blocks.v));
            let rhs = s.p.add(&s.q);
            let scale = lhs.frobenius_norm().max(1e-30);
            assert!(max_abs_diff(&lhs, &rhs) / scale < 1e-10);
            // symmetry structure
            assert!(max_abs_diff(&s.p, &s.p.transpose()) < 1e-12);
            assert!(max_abs_diff(&s.q, &s.q.transpose().scaled(-1.0)) < 1e-12);
        }
    }

    #[test]
    fn predicted_block_step_keeps_error_space_invariant() {
        // Σ̃ = 0 and J = K = 0 → the error blocks stay exactly zero
        let mut rng = RngStream::new(9);
        let blocks = BlockSplit {
            u: gaussian_matrix::<f64>(2, 3, 1.0, &mut rng).unwrap(),
            j: M::zeros(3, 3),
            v: gaussian_matrix::<f64>(2, 3, 1.0, &mut rng).unwrap(),
            k: M::zeros(2, 3),
        };
        let sigma = M::diagonal(2, 2, &[1.0, 0.5]);
        let sigma_tilde = M::zeros(3, 2);
        let next = predicted_block_step(&blocks, &sigma, &sigma_tilde, 0.05).unwrap();
        assert_eq!(next.j, M::zeros(3, 3));
        assert_eq!(next.k, M::zeros(2, 3));

        let zeros = BlockSplit {
            u: M::zeros(2, 3),
            j: M::zeros(3, 3),
            v: M::zeros(2, 3),
            k: M::zeros(2, 3),
        };
        let z = predicted_block_step(&zeros, &M::zeros(2, 2), &sigma_tilde, 0.1).unwrap();
        assert_eq!(z.u, M::zeros(2, 3));
    }

    #[test]
    fn symmetrized_step_reduces_correctly_when_balanced() {
        // B = 0, J = K = 0 → A⁺ = A + ηPA and the C/D terms vanish
        let mut rng = RngStream::new(12);
        let r = 3;
        let k = 4;
        let u = gaussian_matrix::<f64>(r, k, 0.1, &mut rng).unwrap();
        let sigma = M::diagonal(r, r, &[1.2, 1.0, 0.4]);
        let blocks = BlockSplit {
            u: u.clone(),
            j: M::zeros(0, k),
            v: u,
            k: M::zeros(0, k),
        };
        let state = symmetrize(&blocks, &sigma).unwrap();
        let eta = 0.03;
        let next = predicted_symmetrized_step(&state, &blocks, &sigma, eta).unwrap();
        let a_expected = state.a.add_scaled(&state.p.matmul(&state.a), eta);
        assert!(max_abs_diff(&next.a, &a_expected) < 1e-14);
        assert_eq!(next.b, M::zeros(r, k));
        let p = &state.p;
        let smp = sigma.sub(p);
        let p_expected = p
            .add_scaled(&p.matmul(&smp), -eta)
            .add_scaled(&smp.matmul(p), -eta)
            .add_scaled(
                &p.matmul(p).matmul(p).sub(&p.matmul(&sigma).matmul(p)),
                eta * eta,
            );
        assert!(max_abs_diff(&next.p, &p_expected) < 1e-14);
    }

    #[test]
    fn symmetrized_step_at_zero_state_returns_sigma() {
        // A = B = 0 → P = Σ and P⁺ = Σ (all update terms cancel)
        let sigma = M::diagonal(2, 2, &[1.0, 0.3]);
        let blocks = BlockSplit {
            u: M::zeros(2, 3),
            j: M::zeros(1, 3),
            v: M::zeros(2, 3),
            k: M::zeros(2, 3),
        };
        let state = symmetrize(&blocks, &sigma).unwrap();
        assert_eq!(state.p, sigma);
        let next = predicted_symmetrized_step(&state, &blocks, &sigma, 0.1).unwrap();
        // P⁺ = P − ηP(Σ−P) − ... with P = Σ: every term but P vanishes
        assert!(max_abs_diff(&next.p, &sigma) < 1e-15);
    }

    #[test]
    fn signal_ratio_sentinels() {
        let mut rng = RngStream::new(21);
        let (_, frame) =
            crate::spectral::synth_matrix::<f64>(6, 5, &[2.0, 1.0], &mut rng).unwrap();
        let r = 2;
        let ur = frame.left().left_cols(r);
        let vr = frame.right().left_cols(r);
        let coeff_f = gaussian_matrix::<f64>(r, 3, 1.0, &mut rng).unwrap();
        let coeff_g = gaussian_matrix::<f64>(r, 3, 1.0, &mut rng).unwrap();
        // factors entirely inside the top-r spans → infinite signal
        let f = ur.matmul(&coeff_f);
        let g = vr.matmul(&coeff_g);
        assert_eq!(signal_ratio(&f, &g, &frame, r).unwrap(), Signal::Infinite);
        // factor orthogonal to the span → zero signal
        let tail = M::from_fn(6, 3, |i, j| frame.left().get(i, r + j));
        let g_in = vr.matmul(&coeff_g);
        match signal_ratio(&tail, &g_in, &frame, r).unwrap() {
            Signal::Finite(v) => assert!(v.abs() < 1e-12),
            Signal::Infinite => panic!("expected finite zero"),
        }
    }

    #[test]
    fn block_norms_zero_blocks_give_sigma_norm() {
        let sigma = M::diagonal(3, 3, &[2.5, 1.0, 0.2]);
        let blocks = BlockSplit {
            u: M::zeros(3, 4),
            j: M::zeros(2, 4),
            v: M::zeros(3, 4),
            k: M::zeros(1, 4),
        };
        let state = symmetrize(&blocks, &sigma).unwrap();
        let norms = block_norms(&blocks, &state).unwrap();
        assert_eq!(norms.uk_op, 0.0);
        assert_eq!(norms.jv_op, 0.0);
        assert_eq!(norms.jk_op, 0.0);
        assert_eq!(norms.b_fro, 0.0);
        assert_eq!(norms.a_sigma_r, 0.0);
        assert!((norms.p_op - 2.5).abs() < 1e-9);
        assert!((norms.uv_minus_sigma_op - 2.5).abs() < 1e-9);
    }
}
