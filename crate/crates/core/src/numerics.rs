//! Dense complex linear-algebra kernels: Hermitian solves, positive
//! semidefiniteness certification, Stein equation solving, and
//! range-membership tests.

use crate::{CMatrix, CVector};
use num_complex::Complex64;
use thiserror::Error;

/// Default relative threshold separating numerical zero eigenvalues from
/// genuinely positive ones.
pub const PSD_THRESHOLD: f64 = 1e-10;

/// Above this dimension the Stein equation is solved by the doubled series
/// instead of the vectorized linear system, whose size grows as dim².
const STEIN_DIRECT_DIM: usize = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("matrix is numerically singular (min eigenvalue {min_eigenvalue:.3e})")]
    SingularMatrix { min_eigenvalue: f64 },
    #[error("spectral radius {0} is too close to or beyond the unit circle")]
    SpectralRadiusTooLarge(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("eigenvalue computation failed to converge")]
    EigendecompositionFailed,
}

/// Hermitian matrix, symmetrized as `(M + M*)/2` on construction so the
/// eigensolver below always sees exact Hermitian structure.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    data: CMatrix,
}

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self, NumericsError> {
        if !m.is_square() {
            return Err(NumericsError::DimensionMismatch(format!(
                "expected square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let sym = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(HermitianMatrix { data: sym })
    }

    pub fn identity(dim: usize) -> Self {
        HermitianMatrix { data: CMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.data
    }

    /// Real eigenvalues in ascending order with the unitary eigenbasis.
    fn eigen(&self) -> (Vec<f64>, CMatrix) {
        if self.dim() == 0 {
            return (Vec::new(), CMatrix::zeros(0, 0));
        }
        let se = self.data.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
        let values: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
        let vectors = CMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            se.eigenvectors[(i, order[j])]
        });
        (values, vectors)
    }

    /// Spectral norm (largest eigenvalue magnitude).
    pub fn spectral_norm(&self) -> f64 {
        self.eigen().0.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }
}

/// Summary of an eigenvalue scan: smallest eigenvalue and the count above
/// the relative threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCertificate {
    pub min_eigenvalue: f64,
    pub rank: usize,
    pub threshold: f64,
}

/// Solves `P v = b` for strictly positive definite `P`.
pub fn solve_hermitian(p: &HermitianMatrix, b: &CVector) -> Result<CVector, NumericsError> {
    if b.len() != p.dim() {
        return Err(NumericsError::DimensionMismatch(format!(
            "matrix dim {} vs rhs len {}",
            p.dim(),
            b.len()
        )));
    }
    let (values, vectors) = p.eigen();
    let scale = values.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let min = values[0];
    if min <= PSD_THRESHOLD * scale.max(f64::MIN_POSITIVE) {
        return Err(NumericsError::SingularMatrix { min_eigenvalue: min });
    }
    let apply_inverse = |rhs: &CVector| -> CVector {
        let coords = vectors.adjoint() * rhs;
        let scaled = CVector::from_fn(coords.len(), |k, _| coords[k] / Complex64::new(values[k], 0.0));
        &vectors * scaled
    };
    let mut v = apply_inverse(b);
    // one step of iterative refinement
    let residual = b - p.as_matrix() * &v;
    v += apply_inverse(&residual);
    Ok(v)
}

/// Eigenvalue scan of a Hermitian matrix: smallest eigenvalue plus the count
/// of eigenvalues exceeding `threshold · ‖M‖`.
pub fn certify_psd(m: &HermitianMatrix, threshold: f64) -> SpectralCertificate {
    debug_assert!(threshold >= 0.0);
    let (values, _) = m.eigen();
    let scale = values.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let cut = threshold * scale;
    SpectralCertificate {
        min_eigenvalue: values.first().copied().unwrap_or(0.0),
        rank: values.iter().filter(|&&x| x > cut).count(),
        threshold,
    }
}

/// Largest eigenvalue modulus of a general complex matrix.
pub fn spectral_radius(t: &CMatrix) -> Result<f64, NumericsError> {
    if t.nrows() == 0 {
        return Ok(0.0);
    }
    let eigs = t
        .clone()
        .eigenvalues()
        .ok_or(NumericsError::EigendecompositionFailed)?;
    Ok(eigs.iter().map(|x| x.norm()).fold(0.0, f64::max))
}

/// Eigenvalues of a general complex matrix.
pub fn eigenvalues(t: &CMatrix) -> Result<Vec<Complex64>, NumericsError> {
    if t.nrows() == 0 {
        return Ok(Vec::new());
    }
    let eigs = t
        .clone()
        .eigenvalues()
        .ok_or(NumericsError::EigendecompositionFailed)?;
    Ok(eigs.iter().copied().collect())
}

/// Solves the Stein equation `P − T* P T = Q` for strongly stable `T`.
///
/// Small systems go through the vectorized linear solve; larger ones use the
/// doubled partial sums `P_j = Σ_{k < 2^j} T*^k Q T^k`, whose tail is
/// controlled by the decay of `T^(2^j)`.
pub fn solve_stein(t: &CMatrix, q: &HermitianMatrix) -> Result<HermitianMatrix, NumericsError> {
    let n = q.dim();
    if t.nrows() != n || t.ncols() != n {
        return Err(NumericsError::DimensionMismatch(format!(
            "T is {}x{}, Q is {}x{}",
            t.nrows(),
            t.ncols(),
            n,
            n
        )));
    }
    let radius = spectral_radius(t)?;
    if radius >= 1.0 - 1e-8 {
        return Err(NumericsError::SpectralRadiusTooLarge(radius));
    }
    if n <= STEIN_DIRECT_DIM {
        solve_stein_direct(t, q)
    } else {
        solve_stein_series(t, q)
    }
}

fn solve_stein_direct(t: &CMatrix, q: &HermitianMatrix) -> Result<HermitianMatrix, NumericsError> {
    let n = q.dim();
    let tt = t.transpose();
    let tadj = t.adjoint();
    // vec(T* P T) = (T^T ⊗ T*) vec(P), column-major stacking
    let mut system = CMatrix::identity(n * n, n * n);
    for col_out in 0..n {
        for row_out in 0..n {
            for col_in in 0..n {
                for row_in in 0..n {
                    system[(col_out * n + row_out, col_in * n + row_in)] -=
                        tt[(col_out, col_in)] * tadj[(row_out, row_in)];
                }
            }
        }
    }
    let rhs = CVector::from_fn(n * n, |idx, _| q.entry(idx % n, idx / n));
    let sol = system
        .lu()
        .solve(&rhs)
        .ok_or(NumericsError::SingularMatrix { min_eigenvalue: 0.0 })?;
    let p = CMatrix::from_fn(n, n, |i, j| sol[j * n + i]);
    HermitianMatrix::new(p)
}

fn solve_stein_series(t: &CMatrix, q: &HermitianMatrix) -> Result<HermitianMatrix, NumericsError> {
    let mut p = q.as_matrix().clone();
    let mut s = t.clone();
    for _ in 0..128 {
        p = &p + s.adjoint() * &p * &s;
        s = &s * &s;
        // remaining tail is S* P_inf S, relative size ~ ‖S‖²
        let decay = s.norm();
        if decay * decay <= 1e-14 {
            break;
        }
    }
    HermitianMatrix::new(p)
}

/// Tests whether `v` lies in the range of a positive semidefinite matrix
/// by projecting onto its numerical kernel. Returns the verdict together
/// with the kernel-projection norm.
pub fn range_membership(p: &HermitianMatrix, v: &CVector, threshold: f64) -> (bool, f64) {
    debug_assert_eq!(p.dim(), v.len());
    let (values, vectors) = p.eigen();
    let scale = values.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let cut = threshold * scale;
    let mut kernel_norm_sq = 0.0;
    for (k, &lambda) in values.iter().enumerate() {
        if lambda <= cut {
            let component: Complex64 = (vectors.column(k).adjoint() * v)[(0, 0)];
            kernel_norm_sq += component.norm_sqr();
        }
    }
    let residual = kernel_norm_sq.sqrt();
    (residual <= threshold * v.norm(), residual)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn herm(rows: &[&[Complex64]]) -> HermitianMatrix {
        let n = rows.len();
        HermitianMatrix::new(CMatrix::from_fn(n, n, |i, j| rows[i][j])).unwrap()
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let p = HermitianMatrix::identity(2);
        let b = CVector::from_vec(vec![cx(3.0, 0.0), cx(0.0, 5.0)]);
        let v = solve_hermitian(&p, &b).unwrap();
        assert!((v - b).norm() < 1e-14);
    }

    #[test]
    fn two_by_two_solve_matches_hand_inverse() {
        // P = [[1,1],[1,4/3]], b = (1,1): inverse is [[4,-3],[-3,3]], v = (1,0)
        let p = herm(&[
            &[cx(1.0, 0.0), cx(1.0, 0.0)],
            &[cx(1.0, 0.0), cx(4.0 / 3.0, 0.0)],
        ]);
        let b = CVector::from_vec(vec![cx(1.0, 0.0), cx(1.0, 0.0)]);
        let v = solve_hermitian(&p, &b).unwrap();
        assert!((v[0] - cx(1.0, 0.0)).norm() < 1e-12);
        assert!(v[1].norm() < 1e-12);
    }

    #[test]
    fn rank_deficient_solve_is_refused() {
        let p = herm(&[
            &[cx(1.0, 0.0), cx(1.0, 0.0)],
            &[cx(1.0, 0.0), cx(1.0, 0.0)],
        ]);
        let b = CVector::from_vec(vec![cx(1.0, 0.0), cx(0.0, 0.0)]);
        assert!(matches!(
            solve_hermitian(&p, &b),
            Err(NumericsError::SingularMatrix { .. })
        ));
    }

    #[test]
    fn certify_psd_on_identity_and_ones() {
        let cert = certify_psd(&HermitianMatrix::identity(3), 1e-10);
        assert!((cert.min_eigenvalue - 1.0).abs() < 1e-12);
        assert_eq!(cert.rank, 3);

        let ones = herm(&[
            &[cx(1.0, 0.0), cx(1.0, 0.0)],
            &[cx(1.0, 0.0), cx(1.0, 0.0)],
        ]);
        let cert = certify_psd(&ones, 1e-10);
        assert!(cert.min_eigenvalue.abs() < 1e-12);
        assert_eq!(cert.rank, 1);
    }

    #[test]
    fn certify_psd_reports_negative_eigenvalue_of_swap() {
        let swap = herm(&[
            &[cx(0.0, 0.0), cx(1.0, 0.0)],
            &[cx(1.0, 0.0), cx(0.0, 0.0)],
        ]);
        let cert = certify_psd(&swap, 1e-10);
        assert!((cert.min_eigenvalue + 1.0).abs() < 1e-12);
        assert_eq!(cert.rank, 1);
    }

    #[test]
    fn stein_with_zero_t_returns_q() {
        let q = herm(&[
            &[cx(2.0, 0.0), cx(0.3, 0.1)],
            &[cx(0.3, -0.1), cx(1.0, 0.0)],
        ]);
        let t = CMatrix::zeros(2, 2);
        let p = solve_stein(&t, &q).unwrap();
        assert!((p.as_matrix() - q.as_matrix()).norm() < 1e-13);
    }

    #[test]
    fn stein_for_nilpotent_jordan_block_closes_in_two_steps() {
        let t = CMatrix::from_row_slice(2, 2, &[
            cx(0.0, 0.0), cx(1.0, 0.0),
            cx(0.0, 0.0), cx(0.0, 0.0),
        ]);
        let q = herm(&[
            &[cx(1.0, 0.0), cx(0.0, 0.0)],
            &[cx(0.0, 0.0), cx(0.0, 0.0)],
        ]);
        let p = solve_stein(&t, &q).unwrap();
        assert!((p.as_matrix() - CMatrix::identity(2, 2)).norm() < 1e-13);
    }

    #[test]
    fn stein_scalar_case_is_a_geometric_series() {
        let t = CMatrix::from_row_slice(1, 1, &[cx(0.3, 0.4)]);
        let q = herm(&[&[cx(2.0, 0.0)]]);
        let p = solve_stein(&t, &q).unwrap();
        let expected = 2.0 / (1.0 - 0.25);
        assert!((p.entry(0, 0) - cx(expected, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn stein_rejects_unstable_t() {
        let t = CMatrix::from_row_slice(1, 1, &[cx(1.0, 0.0)]);
        let q = herm(&[&[cx(1.0, 0.0)]]);
        assert!(matches!(
            solve_stein(&t, &q),
            Err(NumericsError::SpectralRadiusTooLarge(_))
        ));
    }

    #[test]
    fn stein_series_path_matches_direct_path() {
        // exercised via an explicitly large-ish matrix with block structure
        let n = 40;
        let mut t = CMatrix::zeros(n, n);
        for k in 0..n {
            t[(k, k)] = cx(0.5 * ((k % 7) as f64 / 7.0), 0.3 * ((k % 5) as f64 / 5.0));
            if k + 1 < n {
                t[(k, k + 1)] = cx(0.1, 0.0);
            }
        }
        let q = HermitianMatrix::identity(n);
        let p = solve_stein(&t, &q).unwrap();
        let residual = (p.as_matrix() - t.adjoint() * p.as_matrix() * &t - q.as_matrix()).norm();
        assert!(residual <= 1e-10 * (p.as_matrix().norm() + q.as_matrix().norm()));
    }

    #[test]
    fn range_membership_distinguishes_kernel_components() {
        let p = herm(&[
            &[cx(1.0, 0.0), cx(1.0, 0.0)],
            &[cx(1.0, 0.0), cx(1.0, 0.0)],
        ]);
        let inside = CVector::from_vec(vec![cx(0.7, 0.2), cx(0.7, 0.2)]);
        let (ok, residual) = range_membership(&p, &inside, 1e-8);
        assert!(ok);
        assert!(residual < 1e-12);

        let outside = CVector::from_vec(vec![cx(1.0, 0.0), cx(2.0, 0.0)]);
        let (ok, residual) = range_membership(&p, &outside, 1e-8);
        assert!(!ok);
        assert!((residual - 1.0 / 2.0f64.sqrt()).abs() < 1e-12);

        let full = HermitianMatrix::identity(2);
        let (ok, residual) = range_membership(&full, &outside, 1e-8);
        assert!(ok);
        assert!(residual == 0.0);
    }
}
