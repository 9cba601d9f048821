//! Dense complex matrix kernel: stacking, block-diagonal composition,
//! SVD-based numerical rank, and row-span containment.
//!
//! Matrices are `nalgebra` dynamic matrices over `Complex<f64>`. The rank
//! tolerance policy is relative: a singular value counts toward the rank
//! when it exceeds `tol_scale * max(rows, cols) * eps * sigma_max`. The
//! matrices produced by the simulation engine are small (at most a few
//! hundred rows/columns) and generically well-conditioned, so the default
//! `tol_scale = 1e3` leaves orders of magnitude of slack on both sides.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::{Error, Result};

/// Complex scalar used throughout the numeric layer.
pub type C64 = Complex<f64>;

/// Dense dynamically-sized complex matrix.
pub type CMatrix = DMatrix<C64>;

/// Default rank-tolerance multiplier.
pub const DEFAULT_TOL_SCALE: f64 = 1e3;

/// Vertical concatenation: rows of `a` on top of rows of `b`.
pub fn stack(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.ncols() != b.ncols() {
        return Err(Error::InvalidArgument(format!(
            "stack: column mismatch ({} vs {})",
            a.ncols(),
            b.ncols()
        )));
    }
    let mut out = CMatrix::zeros(a.nrows() + b.nrows(), a.ncols());
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out.view_mut((a.nrows(), 0), (b.nrows(), b.ncols()))
        .copy_from(b);
    Ok(out)
}

/// Block-diagonal composition of a list of matrices; off-block entries are
/// zero. An empty list yields the 0 x 0 matrix.
pub fn bdiag(blocks: &[CMatrix]) -> CMatrix {
    let rows = blocks.iter().map(CMatrix::nrows).sum();
    let cols = blocks.iter().map(CMatrix::ncols).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for block in blocks {
        out.view_mut((r0, c0), (block.nrows(), block.ncols()))
            .copy_from(block);
        r0 += block.nrows();
        c0 += block.ncols();
    }
    out
}

fn ensure_finite(a: &CMatrix) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numeric("matrix contains non-finite entries".into()))
    }
}

fn singular_values(a: &CMatrix) -> Result<Vec<f64>> {
    ensure_finite(a)?;
    let svd = nalgebra::SVD::try_new(a.clone(), false, false, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric("SVD did not converge".into()))?;
    Ok(svd.singular_values.iter().copied().collect())
}

fn rank_threshold(a: &CMatrix, tol_scale: f64, sigma_max: f64) -> f64 {
    tol_scale * a.nrows().max(a.ncols()) as f64 * f64::EPSILON * sigma_max
}

/// Numerical rank: the number of singular values above the relative
/// threshold. Empty matrices have rank 0.
pub fn numerical_rank(a: &CMatrix, tol_scale: f64) -> Result<usize> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0);
    }
    let sigma = singular_values(a)?;
    let sigma_max = sigma.iter().cloned().fold(0.0f64, f64::max);
    if sigma_max == 0.0 {
        return Ok(0);
    }
    let tol = rank_threshold(a, tol_scale, sigma_max);
    Ok(sigma.iter().filter(|&&s| s > tol).count())
}

/// True iff every row of `a` lies in the row span of `b`:
/// `rank(stack(b, a)) == rank(b)`.
pub fn rowspan_contained(a: &CMatrix, b: &CMatrix, tol_scale: f64) -> Result<bool> {
    if a.ncols() != b.ncols() {
        return Err(Error::InvalidArgument(format!(
            "rowspan_contained: column mismatch ({} vs {})",
            a.ncols(),
            b.ncols()
        )));
    }
    if a.nrows() == 0 {
        return Ok(true);
    }
    let joint = numerical_rank(&stack(b, a)?, tol_scale)?;
    let base = numerical_rank(b, tol_scale)?;
    Ok(joint == base)
}

/// Orthonormal rows spanning the row space of `a`: the right singular
/// vectors whose singular values clear the rank threshold. The result has
/// `numerical_rank(a)` rows and the same column count as `a`.
pub fn row_basis(a: &CMatrix, tol_scale: f64) -> Result<CMatrix> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(CMatrix::zeros(0, a.ncols()));
    }
    ensure_finite(a)?;
    let svd = nalgebra::SVD::try_new(a.clone(), false, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric("SVD did not converge".into()))?;
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::Numeric("SVD produced no right singular vectors".into()))?;
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    if sigma_max == 0.0 {
        return Ok(CMatrix::zeros(0, a.ncols()));
    }
    let tol = rank_threshold(a, tol_scale, sigma_max);
    let kept: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > tol)
        .map(|(i, _)| i)
        .collect();
    let mut out = CMatrix::zeros(kept.len(), a.ncols());
    for (row, &i) in kept.iter().enumerate() {
        out.row_mut(row).copy_from(&v_t.row(i));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Deterministic complex test matrix with pseudo-Gaussian entries
    /// (sum of scaled LCG uniforms); generic full rank with probability 1.
    fn test_matrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        CMatrix::from_fn(rows, cols, |_, _| {
            C64::new(
                next() + next() + next() + next(),
                next() + next() + next() + next(),
            )
        })
    }

    #[test]
    fn stack_shapes_and_order() {
        let a = test_matrix(1, 4, 1);
        let b = test_matrix(1, 4, 2);
        let s = stack(&a, &b).unwrap();
        assert_eq!((s.nrows(), s.ncols()), (2, 4));
        assert_eq!(s.row(0), a.row(0));
        assert_eq!(s.row(1), b.row(0));
        let empty = CMatrix::zeros(0, 4);
        assert_eq!(stack(&a, &empty).unwrap(), a);
        assert!(stack(&a, &test_matrix(1, 3, 3)).is_err());
    }

    #[test]
    fn bdiag_shapes() {
        let blocks: Vec<CMatrix> = (0..6).map(|i| test_matrix(5, 30, i)).collect();
        let d = bdiag(&blocks);
        assert_eq!((d.nrows(), d.ncols()), (30, 180));
        // Off-block entries are zero.
        assert_eq!(d[(0, 30)], C64::new(0.0, 0.0));
        assert_eq!(d[(29, 0)], C64::new(0.0, 0.0));
        let single = bdiag(std::slice::from_ref(&blocks[0]));
        assert_eq!(single, blocks[0]);
        assert_eq!(bdiag(&[]).nrows(), 0);
    }

    #[test]
    fn rank_basics() {
        let eye = CMatrix::identity(3, 3);
        assert_eq!(numerical_rank(&eye, DEFAULT_TOL_SCALE).unwrap(), 3);
        let zero = CMatrix::zeros(4, 7);
        assert_eq!(numerical_rank(&zero, DEFAULT_TOL_SCALE).unwrap(), 0);
        let empty = CMatrix::zeros(0, 9);
        assert_eq!(numerical_rank(&empty, DEFAULT_TOL_SCALE).unwrap(), 0);
    }

    #[test]
    fn random_wide_matrices_have_full_row_rank() {
        for seed in 0..100 {
            let m = test_matrix(5, 30, seed);
            assert_eq!(
                numerical_rank(&m, DEFAULT_TOL_SCALE).unwrap(),
                5,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn rank_equals_rank_of_adjoint() {
        for seed in 0..20 {
            let m = test_matrix(6, 11, seed);
            let rank = numerical_rank(&m, DEFAULT_TOL_SCALE).unwrap();
            assert_eq!(numerical_rank(&m.adjoint(), DEFAULT_TOL_SCALE).unwrap(), rank);
        }
    }

    #[test]
    fn rank_is_stable_under_row_permutation_and_phase_scaling() {
        let m = test_matrix(5, 9, 7);
        let rank = numerical_rank(&m, DEFAULT_TOL_SCALE).unwrap();
        let mut permuted = m.clone();
        permuted.swap_rows(0, 4);
        permuted.swap_rows(1, 3);
        assert_eq!(numerical_rank(&permuted, DEFAULT_TOL_SCALE).unwrap(), rank);
        let phase = C64::from_polar(1.0, 1.234_567);
        let scaled = CMatrix::from_fn(5, 9, |i, j| m[(i, j)] * phase);
        assert_eq!(numerical_rank(&scaled, DEFAULT_TOL_SCALE).unwrap(), rank);
    }

    #[test]
    fn rank_subadditive_and_bdiag_additive() {
        let a = test_matrix(3, 8, 11);
        let b = test_matrix(4, 8, 12);
        let ra = numerical_rank(&a, DEFAULT_TOL_SCALE).unwrap();
        let rb = numerical_rank(&b, DEFAULT_TOL_SCALE).unwrap();
        let rs = numerical_rank(&stack(&a, &b).unwrap(), DEFAULT_TOL_SCALE).unwrap();
        assert!(rs <= ra + rb);
        let rd = numerical_rank(&bdiag(&[a, b]), DEFAULT_TOL_SCALE).unwrap();
        assert_eq!(rd, ra + rb);
    }

    #[test]
    fn rowspan_containment() {
        let a = test_matrix(3, 10, 21);
        let b = test_matrix(4, 10, 22);
        let joint = stack(&a, &b).unwrap();
        assert!(rowspan_contained(&a, &joint, DEFAULT_TOL_SCALE).unwrap());
        assert!(rowspan_contained(&a, &a, DEFAULT_TOL_SCALE).unwrap());
        // A fresh random row is outside a 5-dimensional span of a
        // 10-column space with probability 1.
        let fresh = test_matrix(1, 10, 23);
        assert!(!rowspan_contained(&fresh, &b, DEFAULT_TOL_SCALE).unwrap());
        // Scalar multiples of a row of b stay inside.
        let scaled = CMatrix::from_fn(1, 10, |_, j| b[(2, j)] * C64::new(-2.5, 0.75));
        assert!(rowspan_contained(&scaled, &b, DEFAULT_TOL_SCALE).unwrap());
        // Transitivity on nested spans.
        let sub = b.rows(0, 2).into_owned();
        assert!(rowspan_contained(&sub, &b, DEFAULT_TOL_SCALE).unwrap());
        assert!(rowspan_contained(&sub, &joint, DEFAULT_TOL_SCALE).unwrap());
        // Dimension mismatch is an error.
        assert!(rowspan_contained(&a, &test_matrix(2, 9, 24), DEFAULT_TOL_SCALE).is_err());
        // Nothing is contained in an empty span except emptiness.
        let none = CMatrix::zeros(0, 10);
        assert!(!rowspan_contained(&a, &none, DEFAULT_TOL_SCALE).unwrap());
        assert!(rowspan_contained(&none, &a, DEFAULT_TOL_SCALE).unwrap());
    }

    #[test]
    fn row_basis_spans_the_row_space() {
        let m = test_matrix(6, 12, 31);
        let basis = row_basis(&m, DEFAULT_TOL_SCALE).unwrap();
        assert_eq!(basis.nrows(), numerical_rank(&m, DEFAULT_TOL_SCALE).unwrap());
        assert!(rowspan_contained(&m, &basis, DEFAULT_TOL_SCALE).unwrap());
        assert!(rowspan_contained(&basis, &m, DEFAULT_TOL_SCALE).unwrap());
        // Rank-deficient input: duplicate rows collapse.
        let dup = stack(&m, &m).unwrap();
        let basis2 = row_basis(&dup, DEFAULT_TOL_SCALE).unwrap();
        assert_eq!(basis2.nrows(), basis.nrows());
        assert_eq!(row_basis(&CMatrix::zeros(3, 5), DEFAULT_TOL_SCALE).unwrap().nrows(), 0);
    }

    #[test]
    fn non_finite_entries_are_rejected() {
        let mut m = test_matrix(2, 2, 41);
        m[(0, 0)] = C64::new(f64::NAN, 0.0);
        assert!(numerical_rank(&m, DEFAULT_TOL_SCALE).is_err());
    }
}
