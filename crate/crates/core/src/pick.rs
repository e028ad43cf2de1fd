//! The Pick system of an interpolation problem: the auxiliary row obtained
//! by tangential evaluation of the Schur function, the Pick matrix solving
//! the Stein equation, its spectral certificate, and the solvability
//! verdict.

use crate::numerics::{
    certify_psd, range_membership, solve_stein, HermitianMatrix, NumericsError,
    SpectralCertificate, PSD_THRESHOLD,
};
use crate::rational::Rational;
use crate::realization::{tangential_eval, NodeSpec, ProblemData, RealizationError};
use crate::rkhs;
use crate::{CMatrix, CRow, CVector};
use num_complex::Complex64;
use thiserror::Error;

/// Relative threshold of the range-membership solvability test.
pub const SOLVABILITY_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PickError {
    #[error(transparent)]
    Realization(#[from] RealizationError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("Stein residual {residual:.3e} exceeds its certification bound")]
    SteinResidual { residual: f64 },
    #[error("nodes {0} and {1} coincide")]
    CoincidentNodes(Complex64, Complex64),
}

/// Derived quantities of the problem: `N`, `P`, spectral data of `P`, and
/// the solvability status of the target column.
#[derive(Debug, Clone)]
pub struct PickSystem {
    schur_row: CRow,
    matrix: HermitianMatrix,
    certificate: SpectralCertificate,
    solvable: bool,
    solvability_residual: f64,
    stein_residual: f64,
}

impl PickSystem {
    /// The row `N` with `N* = s(T*)E*`.
    pub fn schur_row(&self) -> &CRow {
        &self.schur_row
    }

    /// The Pick matrix `P`.
    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn certificate(&self) -> &SpectralCertificate {
        &self.certificate
    }

    pub fn solvable(&self) -> bool {
        self.solvable
    }

    pub fn solvability_residual(&self) -> f64 {
        self.solvability_residual
    }

    pub fn stein_residual(&self) -> f64 {
        self.stein_residual
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.certificate.rank == self.matrix.dim()
    }
}

/// Tangential evaluation of the Schur function: returns the row `N` such
/// that `N*` is the column `s(T*)E*`.
pub fn schur_row(data: &ProblemData) -> Result<CRow, PickError> {
    let column = tangential_eval(data.schur(), data.pair())?;
    Ok(column.adjoint())
}

/// Assembles the full Pick system: `P` from the Stein equation with right
/// side `E*E − N*N`, its PSD certificate, and the solvability verdict for
/// the target column.
pub fn build_system(data: &ProblemData) -> Result<PickSystem, PickError> {
    let n_row = schur_row(data)?;
    build_system_with_row(data, n_row)
}

pub(crate) fn build_system_with_row(
    data: &ProblemData,
    n_row: CRow,
) -> Result<PickSystem, PickError> {
    let e = data.pair().e();
    let q_raw = e.adjoint() * e - n_row.adjoint() * &n_row;
    let q = HermitianMatrix::new(q_raw)?;
    let p = solve_stein(data.pair().t(), &q)?;

    let stein_residual =
        (p.as_matrix() - data.pair().t().adjoint() * p.as_matrix() * data.pair().t()
            - q.as_matrix())
        .norm();
    let bound = 1e-9 * (1.0 + p.as_matrix().norm());
    if stein_residual > bound {
        return Err(PickError::SteinResidual { residual: stein_residual });
    }

    let certificate = certify_psd(&p, PSD_THRESHOLD);
    let (solvable, solvability_residual) =
        range_membership(&p, data.x_star(), SOLVABILITY_THRESHOLD);

    Ok(PickSystem {
        schur_row: n_row,
        matrix: p,
        certificate,
        solvable,
        solvability_residual,
        stein_residual,
    })
}

/// Range-membership verdict for an arbitrary column against the system's
/// Pick matrix.
pub fn solvability_verdict(system: &PickSystem, x_star: &CVector) -> (bool, f64) {
    range_membership(&system.matrix, x_star, SOLVABILITY_THRESHOLD)
}

/// The matrix of scaled mixed kernel derivatives
/// `(1/(l! r!)) ∂_z^l ∂_conj(ζ)^r K_s(z, ζ)` at the node points: an
/// independent derivative-route cross-check of the Stein-route Pick matrix.
pub fn schwarz_pick_matrix(
    s: &Rational,
    nodes: &[NodeSpec],
) -> Result<HermitianMatrix, PickError> {
    for (i, a) in nodes.iter().enumerate() {
        for b in nodes.iter().skip(i + 1) {
            if (a.point() - b.point()).norm() <= crate::realization::NODE_COINCIDENCE_TOL {
                return Err(PickError::CoincidentNodes(a.point(), b.point()));
            }
        }
    }
    let dim: usize = nodes.iter().map(|n| n.multiplicity()).sum();
    let mut out = CMatrix::zeros(dim, dim);
    let factorial = |k: usize| (1..=k).product::<usize>() as f64;

    let mut row_off = 0;
    for node_i in nodes {
        let mut col_off = 0;
        for node_j in nodes {
            let table = rkhs::kernel_derivatives(
                s,
                node_i.point(),
                node_j.point(),
                node_i.multiplicity() - 1,
                node_j.multiplicity() - 1,
            );
            for l in 0..node_i.multiplicity() {
                for r in 0..node_j.multiplicity() {
                    out[(row_off + l, col_off + r)] =
                        table[l][r] / Complex64::new(factorial(l) * factorial(r), 0.0);
                }
            }
            col_off += node_j.multiplicity();
        }
        row_off += node_i.multiplicity();
    }
    Ok(HermitianMatrix::new(out)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::blaschke;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_simple_nodes() -> Vec<NodeSpec> {
        vec![
            NodeSpec::simple(Complex64::ZERO, cx(1.0, 0.0)).unwrap(),
            NodeSpec::simple(cx(0.5, 0.0), cx(1.0, 0.0)).unwrap(),
        ]
    }

    #[test]
    fn schur_row_vanishes_for_the_zero_function() {
        let data = ProblemData::from_nodes(&two_simple_nodes(), Rational::zero()).unwrap();
        let n = schur_row(&data).unwrap();
        assert!(n.norm() < 1e-15);
    }

    #[test]
    fn schur_row_of_z_at_the_origin_node() {
        let node = NodeSpec::simple(Complex64::ZERO, cx(1.0, 0.0)).unwrap();
        let data = ProblemData::from_nodes(&[node], Rational::identity()).unwrap();
        let n = schur_row(&data).unwrap();
        assert!(n.norm() < 1e-15);
    }

    #[test]
    fn schur_row_of_z_squared_at_a_double_node() {
        let node = NodeSpec::new(Complex64::ZERO, 2, vec![Complex64::ZERO; 2]).unwrap();
        let z2 = Rational::identity().mul(&Rational::identity()).unwrap();
        let data = ProblemData::from_nodes(&[node], z2).unwrap();
        let n = schur_row(&data).unwrap();
        assert!(n.norm() < 1e-15);
    }

    #[test]
    fn pick_matrix_for_zero_schur_function_is_the_szego_gram() {
        let data = ProblemData::from_nodes(&two_simple_nodes(), Rational::zero()).unwrap();
        let system = build_system(&data).unwrap();
        let p = system.matrix();
        assert!((p.entry(0, 0) - cx(1.0, 0.0)).norm() < 1e-12);
        assert!((p.entry(0, 1) - cx(1.0, 0.0)).norm() < 1e-12);
        assert!((p.entry(1, 1) - cx(4.0 / 3.0, 0.0)).norm() < 1e-12);
        assert!(system.is_strictly_positive());
        assert!(system.solvable());
    }

    #[test]
    fn pick_matrix_for_degree_one_blaschke_has_rank_one() {
        let s = Rational::identity(); // the Blaschke factor z
        let data = ProblemData::from_nodes(&two_simple_nodes(), s).unwrap();
        let system = build_system(&data).unwrap();
        let p = system.matrix();
        for i in 0..2 {
            for j in 0..2 {
                assert!((p.entry(i, j) - cx(1.0, 0.0)).norm() < 1e-12);
            }
        }
        assert_eq!(system.certificate().rank, 1);
        assert!(!system.is_strictly_positive());
    }

    #[test]
    fn single_node_zero_schur_gives_unit_pick_matrix() {
        let node = NodeSpec::simple(Complex64::ZERO, cx(0.3, 0.0)).unwrap();
        let data = ProblemData::from_nodes(&[node], Rational::zero()).unwrap();
        let system = build_system(&data).unwrap();
        assert!((system.matrix().entry(0, 0) - cx(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn schwarz_pick_matrix_matches_hand_kernels() {
        // szego kernel at nodes 0 and 1/2
        let nodes = two_simple_nodes();
        let sp = schwarz_pick_matrix(&Rational::zero(), &nodes).unwrap();
        assert!((sp.entry(0, 0) - cx(1.0, 0.0)).norm() < 1e-12);
        assert!((sp.entry(1, 1) - cx(4.0 / 3.0, 0.0)).norm() < 1e-12);

        // double node at the origin: identity for both s = 0 and s = z^2
        let double = [NodeSpec::new(Complex64::ZERO, 2, vec![Complex64::ZERO; 2]).unwrap()];
        let sp0 = schwarz_pick_matrix(&Rational::zero(), &double).unwrap();
        let z2 = Rational::identity().mul(&Rational::identity()).unwrap();
        let sp2 = schwarz_pick_matrix(&z2, &double).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expected = if i == j { cx(1.0, 0.0) } else { Complex64::ZERO };
                assert!((sp0.entry(i, j) - expected).norm() < 1e-12);
                assert!((sp2.entry(i, j) - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn stein_route_and_derivative_route_agree_on_a_mixed_instance() {
        let nodes = vec![
            NodeSpec::new(cx(0.3, 0.4), 2, vec![Complex64::ZERO; 2]).unwrap(),
            NodeSpec::simple(cx(-0.5, 0.1), Complex64::ZERO).unwrap(),
        ];
        let s = blaschke(&[cx(0.2, -0.1), cx(-0.4, 0.3)], cx(1.0, 0.0)).unwrap();
        let data = ProblemData::from_nodes(&nodes, s.clone()).unwrap();
        let system = build_system(&data).unwrap();
        let sp = schwarz_pick_matrix(&s, &nodes).unwrap();
        let diff = (system.matrix().as_matrix() - sp.as_matrix()).norm();
        assert!(diff < 1e-10, "routes differ by {diff}");
    }

    #[test]
    fn solvability_verdict_follows_range_membership() {
        let s = Rational::identity();
        let data = ProblemData::from_nodes(&two_simple_nodes(), s).unwrap();
        let system = build_system(&data).unwrap();
        // rank-one all-ones P: (w, w) inside, (1, 2) outside
        let inside = CVector::from_vec(vec![cx(0.4, 0.1), cx(0.4, 0.1)]);
        let (ok, residual) = solvability_verdict(&system, &inside);
        assert!(ok);
        assert!(residual < 1e-10);
        let outside = CVector::from_vec(vec![cx(1.0, 0.0), cx(2.0, 0.0)]);
        let (ok, _) = solvability_verdict(&system, &outside);
        assert!(!ok);
    }
}
