//! Output-stable observable pairs `(E, T)`, the tangential functional
//! calculus `f(T*)E*`, and the observability operator `x ↦ E(I − zT)⁻¹x`.
//!
//! Jordan-layout pairs carry their node structure so evaluation reduces to
//! scaled derivatives at the nodes; free-form pairs are evaluated through
//! exact rational functional calculus on `T*`.

use crate::numerics::{self, NumericsError};
use crate::poly::Polynomial;
use crate::rational::{schur_check, Rational, RationalError};
use crate::{CMatrix, CRow, CVector};
use num_complex::Complex64;
use thiserror::Error;

/// Node points must keep this margin to the unit circle.
pub const NODE_RADIUS_BOUND: f64 = 1.0 - 1e-8;

/// Nodes closer than this must be merged into one higher-multiplicity node
/// by the caller.
pub const NODE_COINCIDENCE_TOL: f64 = 1e-10;

/// Relative singular-value threshold for the observability rank test.
const OBSERVABILITY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RealizationError {
    #[error("node point {0} lies outside the allowed disk radius")]
    NodeOutsideDisk(Complex64),
    #[error("node {0} duplicates node {1} within tolerance")]
    DuplicateNode(Complex64, Complex64),
    #[error("multiplicity {multiplicity} does not match {targets} targets")]
    MultiplicityMismatch { multiplicity: usize, targets: usize },
    #[error("node list is empty")]
    EmptyData,
    #[error("T has spectral radius {0} >= 1")]
    Unstable(f64),
    #[error("pair (E, T) is not observable (numerical rank {rank} of {dim})")]
    NotObservable { rank: usize, dim: usize },
    #[error("function has a pole at node or spectrum point {0}")]
    PoleAtNode(Complex64),
    #[error("state dimension {dim} does not match vector length {len}")]
    DimensionMismatch { dim: usize, len: usize },
    #[error("function fails the Schur check (boundary sup {boundary_sup})")]
    NotSchur { boundary_sup: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Rational(#[from] RationalError),
}

/// One interpolation node: point, multiplicity, and the target values for
/// `f^(j)(point)/j!`, `j = 0 .. multiplicity-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    point: Complex64,
    multiplicity: usize,
    targets: Vec<Complex64>,
}

impl NodeSpec {
    pub fn new(
        point: Complex64,
        multiplicity: usize,
        targets: Vec<Complex64>,
    ) -> Result<Self, RealizationError> {
        if point.norm() > NODE_RADIUS_BOUND {
            return Err(RealizationError::NodeOutsideDisk(point));
        }
        if multiplicity == 0 || targets.len() != multiplicity {
            return Err(RealizationError::MultiplicityMismatch {
                multiplicity,
                targets: targets.len(),
            });
        }
        Ok(NodeSpec { point, multiplicity, targets })
    }

    pub fn simple(point: Complex64, target: Complex64) -> Result<Self, RealizationError> {
        NodeSpec::new(point, 1, vec![target])
    }

    pub fn point(&self) -> Complex64 {
        self.point
    }

    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    pub fn targets(&self) -> &[Complex64] {
        &self.targets
    }

    /// The same node with only the first `keep` conditions.
    pub fn truncated(&self, keep: usize) -> Option<NodeSpec> {
        if keep == 0 || keep > self.multiplicity {
            return None;
        }
        Some(NodeSpec {
            point: self.point,
            multiplicity: keep,
            targets: self.targets[..keep].to_vec(),
        })
    }
}

/// An output-stable observable pair `(E, T)` with an optional Jordan node
/// layout describing the block structure of `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationPair {
    t: CMatrix,
    e: CRow,
    /// `(point, multiplicity)` per Jordan block; empty for free-form pairs.
    node_layout: Vec<(Complex64, usize)>,
    eigenvalues: Vec<Complex64>,
}

impl RealizationPair {
    /// Free-form constructor; checks stability and observability.
    pub fn new(t: CMatrix, e: CRow) -> Result<Self, RealizationError> {
        if !t.is_square() || t.nrows() != e.len() {
            return Err(RealizationError::DimensionMismatch { dim: t.nrows(), len: e.len() });
        }
        if t.nrows() == 0 {
            return Err(RealizationError::EmptyData);
        }
        let eigenvalues = numerics::eigenvalues(&t)?;
        let pair = RealizationPair { t, e, node_layout: Vec::new(), eigenvalues };
        pair.validate()?;
        Ok(pair)
    }

    fn validate(&self) -> Result<(), RealizationError> {
        let radius = self.eigenvalues.iter().map(|x| x.norm()).fold(0.0, f64::max);
        if radius >= 1.0 {
            return Err(RealizationError::Unstable(radius));
        }
        let n = self.dim();
        let mut obs = CMatrix::zeros(n, n);
        let mut row = self.e.clone();
        for k in 0..n {
            obs.set_row(k, &row);
            row = &row * &self.t;
        }
        let svd = nalgebra::linalg::SVD::new(obs, false, false);
        let smax = svd.singular_values.iter().copied().fold(0.0f64, f64::max);
        let rank = svd
            .singular_values
            .iter()
            .filter(|&&s| s > OBSERVABILITY_TOL * smax)
            .count();
        if rank < n {
            return Err(RealizationError::NotObservable { rank, dim: n });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    pub fn t(&self) -> &CMatrix {
        &self.t
    }

    pub fn e(&self) -> &CRow {
        &self.e
    }

    pub fn node_layout(&self) -> &[(Complex64, usize)] {
        &self.node_layout
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// `det(I − zT)` together with the matching adjugate polynomial, so that
    /// `(I − zT)⁻¹ = adj(z) / det(z)` exactly.
    pub fn resolvent_form(&self) -> ResolventForm {
        ResolventForm::new(&self.t, &self.eigenvalues)
    }
}

/// Polynomial form of the resolvent of a stable matrix.
#[derive(Debug, Clone)]
pub struct ResolventForm {
    det: Polynomial,
    adj: Vec<CMatrix>,
}

impl ResolventForm {
    fn new(t: &CMatrix, eigenvalues: &[Complex64]) -> Self {
        let n = t.nrows();
        let mut det = Polynomial::one();
        for &lambda in eigenvalues {
            det = det.mul(&Polynomial::new(vec![Complex64::new(1.0, 0.0), -lambda]));
        }
        // adjugate recursion: B_0 = I, B_m = T B_{m-1} + det_m I,
        // giving (I - zT) Σ z^m B_m = det(z) I
        let mut adj = Vec::with_capacity(n);
        let mut current = CMatrix::identity(n, n);
        adj.push(current.clone());
        for m in 1..n {
            current = t * &current + CMatrix::identity(n, n) * det.coeff(m);
            adj.push(current.clone());
        }
        ResolventForm { det, adj }
    }

    pub fn det(&self) -> &Polynomial {
        &self.det
    }

    /// Entry `(i, j)` of the adjugate as a polynomial in `z`.
    pub fn adj_entry(&self, i: usize, j: usize) -> Polynomial {
        Polynomial::new(self.adj.iter().map(|b| b[(i, j)]).collect())
    }

    /// `row · adj(z)` as a vector of polynomials.
    pub fn row_through_adjugate(&self, row: &CRow) -> Vec<Polynomial> {
        let n = row.len();
        (0..n)
            .map(|j| {
                Polynomial::new(
                    self.adj
                        .iter()
                        .map(|b| (0..n).map(|i| row[i] * b[(i, j)]).sum())
                        .collect(),
                )
            })
            .collect()
    }
}

/// Builds the block-diagonal Jordan realization for a list of nodes:
/// upper-triangular blocks with `conj(point)` on the diagonal, ones on the
/// superdiagonal, `E = [1 0 .. 0 | 1 0 .. 0 | ..]`, and the stacked targets.
pub fn jordan_realization(
    nodes: &[NodeSpec],
) -> Result<(RealizationPair, CVector), RealizationError> {
    if nodes.is_empty() {
        return Err(RealizationError::EmptyData);
    }
    for (i, a) in nodes.iter().enumerate() {
        for b in nodes.iter().skip(i + 1) {
            if (a.point - b.point).norm() <= NODE_COINCIDENCE_TOL {
                return Err(RealizationError::DuplicateNode(a.point, b.point));
            }
        }
    }

    let n: usize = nodes.iter().map(|node| node.multiplicity).sum();
    let mut t = CMatrix::zeros(n, n);
    let mut e = CRow::zeros(n);
    let mut x_star = CVector::zeros(n);
    let mut layout = Vec::with_capacity(nodes.len());
    let mut eigenvalues = Vec::with_capacity(n);

    let mut offset = 0;
    for node in nodes {
        let m = node.multiplicity;
        for k in 0..m {
            t[(offset + k, offset + k)] = node.point.conj();
            if k + 1 < m {
                t[(offset + k, offset + k + 1)] = Complex64::new(1.0, 0.0);
            }
            x_star[offset + k] = node.targets[k];
            eigenvalues.push(node.point.conj());
        }
        e[offset] = Complex64::new(1.0, 0.0);
        layout.push((node.point, m));
        offset += m;
    }

    let pair = RealizationPair { t, e, node_layout: layout, eigenvalues };
    pair.validate()?;
    Ok((pair, x_star))
}

/// Full input of an interpolation problem: the pair, the target column, and
/// the Schur function carried by the kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemData {
    realization: RealizationPair,
    x_star: CVector,
    schur_function: Rational,
}

impl ProblemData {
    pub fn new(
        realization: RealizationPair,
        x_star: CVector,
        schur_function: Rational,
    ) -> Result<Self, RealizationError> {
        if x_star.len() != realization.dim() {
            return Err(RealizationError::DimensionMismatch {
                dim: realization.dim(),
                len: x_star.len(),
            });
        }
        let report = schur_check(&schur_function, 512);
        if !report.is_schur {
            return Err(RealizationError::NotSchur { boundary_sup: report.boundary_sup });
        }
        Ok(ProblemData { realization, x_star, schur_function })
    }

    pub fn from_nodes(nodes: &[NodeSpec], schur_function: Rational) -> Result<Self, RealizationError> {
        let (pair, x_star) = jordan_realization(nodes)?;
        ProblemData::new(pair, x_star, schur_function)
    }

    pub fn pair(&self) -> &RealizationPair {
        &self.realization
    }

    pub fn x_star(&self) -> &CVector {
        &self.x_star
    }

    pub fn schur(&self) -> &Rational {
        &self.schur_function
    }

    pub fn dim(&self) -> usize {
        self.realization.dim()
    }
}

/// `f(T*)E*` for rational `f`.
///
/// Jordan layouts reduce to stacked scaled derivatives `f^(j)(z_i)/j!`;
/// free-form pairs go through matrix functional calculus
/// `num(T*) · den(T*)⁻¹ E*`.
pub fn tangential_eval(f: &Rational, pair: &RealizationPair) -> Result<CVector, RealizationError> {
    if !pair.node_layout.is_empty() {
        let mut out = CVector::zeros(pair.dim());
        let mut offset = 0;
        let factorial = |j: usize| -> f64 { (1..=j).product::<usize>() as f64 };
        for &(point, mult) in &pair.node_layout {
            for j in 0..mult {
                let value = f.evaluate(point, j).map_err(|_| RealizationError::PoleAtNode(point))?;
                out[offset + j] = value / Complex64::new(factorial(j), 0.0);
            }
            offset += mult;
        }
        return Ok(out);
    }

    let adjoint = pair.t.adjoint();
    let estar = pair.e.adjoint();
    let num_applied = apply_polynomial(f.numerator(), &adjoint) * &estar;
    let den_matrix = apply_polynomial(f.denominator(), &adjoint);
    // den(T*) is singular exactly when f has a pole on the spectrum of T*
    let lu = den_matrix.clone().lu();
    let solved = lu.solve(&num_applied).ok_or_else(|| {
        RealizationError::PoleAtNode(pair.eigenvalues.first().copied().unwrap_or_default().conj())
    })?;
    let residual = (&den_matrix * &solved - &num_applied).norm();
    if !residual.is_finite() || residual > 1e-6 * (1.0 + num_applied.norm()) {
        let witness = pair
            .eigenvalues
            .iter()
            .map(|lambda| lambda.conj())
            .min_by(|a, b| {
                let fa = f.denominator().eval(*a).norm();
                let fb = f.denominator().eval(*b).norm();
                fa.partial_cmp(&fb).unwrap()
            })
            .unwrap_or_default();
        return Err(RealizationError::PoleAtNode(witness));
    }
    Ok(solved)
}

fn apply_polynomial(p: &Polynomial, m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let mut acc = CMatrix::zeros(n, n);
    for k in (0..p.coeffs().len()).rev() {
        acc = &acc * m + CMatrix::identity(n, n) * p.coeff(k);
    }
    acc
}

/// `E (I − zT)⁻¹ x`.
pub fn observability_eval(
    pair: &RealizationPair,
    x: &CVector,
    z: Complex64,
) -> Result<Complex64, RealizationError> {
    if x.len() != pair.dim() {
        return Err(RealizationError::DimensionMismatch { dim: pair.dim(), len: x.len() });
    }
    let n = pair.dim();
    let system = CMatrix::identity(n, n) - pair.t() * z;
    let solved = system
        .lu()
        .solve(x)
        .ok_or(RealizationError::Unstable(pair.spectral_radius()))?;
    Ok((&pair.e * solved)[(0, 0)])
}
