//! Interpolant assembly: the data-determined row function, the minimal-norm
//! solution, the full parametrization by a free kernel-side parameter, and
//! the truncation procedure for the degenerate inner case.

use crate::numerics::{solve_hermitian, NumericsError};
use crate::pick::{self, PickError, PickSystem};
use crate::poly::Polynomial;
use crate::rational::{schur_check, Rational, RationalError};
use crate::realization::{tangential_eval, NodeSpec, ProblemData, RealizationError};
use crate::rkhs::{self, RkhsError};
use crate::theta::{ThetaError, ThetaFunction};
use crate::{CMatrix, CRow, CVector};
use num_complex::Complex64;
use thiserror::Error;

/// Interpolation conditions of any returned interpolant must hold to this
/// absolute tolerance.
pub const INTERPOLATION_TOL: f64 = 1e-8;

/// Parameter points this close to a zero of the multiplier are rejected.
pub const U_ZERO_TOL: f64 = 1e-10;

/// Boundary modulus window within which a Schur function counts as inner.
const INNER_BOUNDARY_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("Pick matrix is singular (rank {rank} of {dim}); use the degenerate solver")]
    SingularPick { rank: usize, dim: usize },
    #[error("target column lies outside the range of the Pick matrix (residual {residual:.3e})")]
    Unsolvable { residual: f64 },
    #[error("parameter sigma differs from the extracted parameter by {distance:.3e}")]
    ParameterSigmaMismatch { distance: f64 },
    #[error("parameter point {point} sits on a zero of the multiplier (|u| = {magnitude:.3e})")]
    ParameterPointOnZeroOfU { point: Complex64, magnitude: f64 },
    #[error("parameter point {0} lies outside the open unit disk")]
    ParameterPointOutsideDisk(Complex64),
    #[error("parameter points {0} and {1} coincide")]
    DuplicateParameterPoints(Complex64, Complex64),
    #[error("truncated Pick matrix is singular (rank {rank} of {dim})")]
    TruncationSingular { rank: usize, dim: usize },
    #[error("truncated solution violates the full conditions (residual {residual:.3e})")]
    InconsistentData { residual: f64 },
    #[error("degenerate case needs an inner function of degree rank(P): {reason}")]
    UnsupportedDegenerate { reason: String },
    #[error("assembled interpolant misses the conditions by {residual:.3e}")]
    InterpolationCheckFailed { residual: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Rational(#[from] RationalError),
    #[error(transparent)]
    Realization(#[from] RealizationError),
    #[error(transparent)]
    Pick(#[from] PickError),
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error(transparent)]
    Rkhs(#[from] RkhsError),
}

// ---------------------------------------------------------------------------
// The data-determined row function F(z) = (E − s(z)N)(I − zT)^{-1}
// ---------------------------------------------------------------------------

/// Row function whose columns span the minimal-solution space. Columns are
/// kept both normalized and in raw polynomial form over the common
/// denominator `det(I − zT) · q(z)`, with `q` the denominator of `s`.
#[derive(Debug, Clone)]
pub struct InterpolantBasis {
    columns: Vec<Rational>,
    raw_cols: Vec<Polynomial>,
    raw_den: Polynomial,
    t: CMatrix,
    e: CRow,
    n_row: CRow,
    s: Rational,
}

impl InterpolantBasis {
    pub fn new(data: &ProblemData, system: &PickSystem) -> Result<Self, RationalError> {
        let resolvent = data.pair().resolvent_form();
        let s = data.schur();
        let e_polys = resolvent.row_through_adjugate(data.pair().e());
        let n_polys = resolvent.row_through_adjugate(system.schur_row());
        let raw_den = resolvent.det().mul(s.denominator());
        let raw_cols: Vec<Polynomial> = e_polys
            .iter()
            .zip(&n_polys)
            .map(|(ep, np)| s.denominator().mul(ep).sub(&s.numerator().mul(np)))
            .collect();
        let columns = raw_cols
            .iter()
            .map(|num| Rational::new(num.clone(), raw_den.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(InterpolantBasis {
            columns,
            raw_cols,
            raw_den,
            t: data.pair().t().clone(),
            e: data.pair().e().clone(),
            n_row: system.schur_row().clone(),
            s: s.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    /// Column `j` as an exact rational function.
    pub fn column(&self, j: usize) -> &Rational {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Rational] {
        &self.columns
    }

    pub(crate) fn raw_parts(&self) -> (&[Polynomial], &Polynomial) {
        (&self.raw_cols, &self.raw_den)
    }

    /// Numeric row evaluation `(E − s(z)N)(I − zT)⁻¹`.
    pub fn eval_row(&self, z: Complex64) -> Result<CRow, SolverError> {
        let n = self.dim();
        let s_val = self.s.evaluate(z, 0)?;
        let lhs = CVector::from_fn(n, |k, _| (self.e[k] - s_val * self.n_row[k]).conj());
        // row solve: r (I − zT) = E − s(z)N  <=>  (I − zT)* r* = (E − s(z)N)*
        let system = (CMatrix::identity(n, n) - &self.t * z).adjoint();
        let solved = system
            .lu()
            .solve(&lhs)
            .ok_or(SolverError::InterpolationCheckFailed { residual: f64::INFINITY })?;
        Ok(solved.adjoint())
    }

    /// Linear combination `Σ coeffs[j] · column_j` assembled over the common
    /// denominator with a single final normalization.
    pub fn combine(&self, coeffs: &CVector) -> Result<Rational, RationalError> {
        let mut num = Polynomial::zero();
        for (j, col) in self.raw_cols.iter().enumerate() {
            num = num.add(&col.scale(coeffs[j]));
        }
        Rational::new(num, self.raw_den.clone())
    }
}

// ---------------------------------------------------------------------------
// Free parameter and interpolant
// ---------------------------------------------------------------------------

/// Free parameter `h = Σ α_i K_σ(·, w_i)` over the extracted Schur
/// parameter σ. An empty term list is the zero parameter.
#[derive(Debug, Clone)]
pub struct FreeParameter {
    sigma: Rational,
    terms: Vec<(Complex64, Complex64)>,
    norm_squared: f64,
}

impl FreeParameter {
    pub fn new(
        sigma: Rational,
        terms: Vec<(Complex64, Complex64)>,
    ) -> Result<Self, SolverError> {
        for (i, (w, _)) in terms.iter().enumerate() {
            if w.norm() >= 1.0 {
                return Err(SolverError::ParameterPointOutsideDisk(*w));
            }
            for (v, _) in terms.iter().skip(i + 1) {
                if (w - v).norm() <= 1e-10 {
                    return Err(SolverError::DuplicateParameterPoints(*w, *v));
                }
            }
        }
        let mut norm_squared = Complex64::ZERO;
        for (wi, ai) in &terms {
            for (wj, aj) in &terms {
                norm_squared += ai * aj.conj() * rkhs::kernel_eval(&sigma, *wj, *wi, 0, 0)?;
            }
        }
        debug_assert!(norm_squared.im.abs() <= 1e-9 * (1.0 + norm_squared.re.abs()));
        debug_assert!(norm_squared.re >= -1e-12);
        Ok(FreeParameter { sigma, terms, norm_squared: norm_squared.re.max(0.0) })
    }

    pub fn empty(sigma: Rational) -> Self {
        FreeParameter { sigma, terms: Vec::new(), norm_squared: 0.0 }
    }

    pub fn sigma(&self) -> &Rational {
        &self.sigma
    }

    pub fn terms(&self) -> &[(Complex64, Complex64)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn norm_squared(&self) -> f64 {
        self.norm_squared
    }
}

/// A solution `f = F P⁻¹x* + u·h` with its norm decomposition.
#[derive(Debug, Clone)]
pub struct Interpolant {
    f: Rational,
    min_part_coeffs: CVector,
    parameter: Option<FreeParameter>,
    min_norm_squared: f64,
    parameter_norm_squared: f64,
}

impl Interpolant {
    pub fn function(&self) -> &Rational {
        &self.f
    }

    /// The coefficient column `P⁻¹ x*` of the minimal part.
    pub fn min_part_coeffs(&self) -> &CVector {
        &self.min_part_coeffs
    }

    pub fn parameter(&self) -> Option<&FreeParameter> {
        self.parameter.as_ref()
    }

    pub fn min_norm_squared(&self) -> f64 {
        self.min_norm_squared
    }

    pub fn parameter_norm_squared(&self) -> f64 {
        self.parameter_norm_squared
    }

    pub fn norm_squared(&self) -> f64 {
        self.min_norm_squared + self.parameter_norm_squared
    }
}

/// `(minimal part, parameter part, total)` of the squared norm.
pub fn norm_decomposition(interp: &Interpolant) -> (f64, f64, f64) {
    (
        interp.min_norm_squared,
        interp.parameter_norm_squared,
        interp.min_norm_squared + interp.parameter_norm_squared,
    )
}

fn interpolation_residual(
    f: &Rational,
    data: &ProblemData,
) -> Result<f64, RealizationError> {
    let achieved = tangential_eval(f, data.pair())?;
    Ok((achieved - data.x_star())
        .iter()
        .map(|x| x.norm())
        .fold(0.0, f64::max))
}

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------

/// The unique minimal-norm solution `F P⁻¹ x*`, with squared norm
/// `x P⁻¹ x*`. Requires a strictly positive Pick matrix.
pub fn minimal_interpolant(
    data: &ProblemData,
    system: &PickSystem,
) -> Result<Interpolant, SolverError> {
    if !system.is_strictly_positive() {
        return Err(SolverError::SingularPick {
            rank: system.certificate().rank,
            dim: data.dim(),
        });
    }
    if !system.solvable() {
        return Err(SolverError::Unsolvable { residual: system.solvability_residual() });
    }
    let coeffs = solve_hermitian(system.matrix(), data.x_star())?;
    let basis = InterpolantBasis::new(data, system)?;
    let f = basis.combine(&coeffs)?;

    let norm = data.x_star().dotc(&coeffs);
    debug_assert!(norm.im.abs() <= 1e-9 * (1.0 + norm.re.abs()));
    let min_norm_squared = norm.re.max(0.0);

    let residual = interpolation_residual(&f, data)?;
    if residual > INTERPOLATION_TOL {
        return Err(SolverError::InterpolationCheckFailed { residual });
    }

    Ok(Interpolant {
        f,
        min_part_coeffs: coeffs,
        parameter: None,
        min_norm_squared,
        parameter_norm_squared: 0.0,
    })
}

/// The solution attached to a free parameter `h`: `f = F P⁻¹x* + u·h` with
/// `u = a − c·s`. Each kernel-section factor `u·K_σ(·,w)` is realized
/// through the coupling identity as
/// `(K_s(·,w) − F P⁻¹ F(w)*) / conj(u(w))`, which is why parameter points
/// must stay away from zeros of `u`.
pub fn parametrize(
    data: &ProblemData,
    system: &PickSystem,
    theta: &ThetaFunction,
    h: &FreeParameter,
) -> Result<Interpolant, SolverError> {
    if !system.is_strictly_positive() {
        return Err(SolverError::SingularPick {
            rank: system.certificate().rank,
            dim: data.dim(),
        });
    }
    if !system.solvable() {
        return Err(SolverError::Unsolvable { residual: system.solvability_residual() });
    }

    let sigma_ref = theta.extract_schur_parameter(data.schur())?;
    let distance = sigma_ref.coefficient_distance(h.sigma());
    if distance > 1e-8 {
        return Err(SolverError::ParameterSigmaMismatch { distance });
    }

    let u = theta.multiplier(data.schur())?;
    let mut u_values = Vec::with_capacity(h.terms().len());
    for (w, _) in h.terms() {
        if w.norm() >= 1.0 {
            return Err(SolverError::ParameterPointOutsideDisk(*w));
        }
        let val = u.evaluate(*w, 0)?;
        if val.norm() <= U_ZERO_TOL {
            return Err(SolverError::ParameterPointOnZeroOfU { point: *w, magnitude: val.norm() });
        }
        u_values.push(val);
    }

    let coeffs = solve_hermitian(system.matrix(), data.x_star())?;
    let basis = InterpolantBasis::new(data, system)?;
    let (raw_cols, raw_den) = basis.raw_parts();
    let s = data.schur();

    // section factors (1 − z·conj(w_i)) joining the common denominator
    let section_dens: Vec<Polynomial> = h
        .terms()
        .iter()
        .map(|(w, _)| Polynomial::new(vec![Complex64::new(1.0, 0.0), -w.conj()]))
        .collect();

    // minimal part numerator over raw_den
    let mut fmin_num = Polynomial::zero();
    for (j, col) in raw_cols.iter().enumerate() {
        fmin_num = fmin_num.add(&col.scale(coeffs[j]));
    }

    // total numerator over raw_den · Π section_dens
    let product_all = section_dens
        .iter()
        .fold(Polynomial::one(), |acc, p| acc.mul(p));
    let mut total = fmin_num.mul(&product_all);
    let det = data.pair().resolvent_form().det().clone();

    for (idx, ((w, alpha), u_val)) in h.terms().iter().zip(&u_values).enumerate() {
        // K_s(z,w) = (q(z) − conj(s(w)) p(z)) / (q(z)(1 − z conj(w)))
        //          = (q(z) − conj(s(w)) p(z)) · det(z) / (raw_den · (1 − z conj(w)))
        let s_at_w = s.evaluate(*w, 0)?;
        let k_num = s
            .denominator()
            .sub(&s.numerator().scale(s_at_w.conj()))
            .mul(&det);

        // F(z) P^{-1} F(w)* numerator over raw_den
        let fw = basis.eval_row(*w)?;
        let v = solve_hermitian(system.matrix(), &fw.adjoint())?;
        let mut fpart = Polynomial::zero();
        for (j, col) in raw_cols.iter().enumerate() {
            fpart = fpart.add(&col.scale(v[j]));
        }

        // g_i over raw_den · section_den_i, scaled by alpha / conj(u(w))
        let g_num = k_num.sub(&fpart.mul(&section_dens[idx]));
        let scale = alpha / u_val.conj();

        // bring to the global denominator
        let mut others = Polynomial::constant(scale);
        for (k, sd) in section_dens.iter().enumerate() {
            if k != idx {
                others = others.mul(sd);
            }
        }
        total = total.add(&g_num.mul(&others));
    }

    let f = Rational::new(total, raw_den.mul(&product_all))?;

    let residual = interpolation_residual(&f, data)?;
    if residual > INTERPOLATION_TOL {
        return Err(SolverError::InterpolationCheckFailed { residual });
    }

    let norm = data.x_star().dotc(&coeffs);
    Ok(Interpolant {
        f,
        min_part_coeffs: coeffs,
        parameter: Some(h.clone()),
        min_norm_squared: norm.re.max(0.0),
        parameter_norm_squared: h.norm_squared(),
    })
}

/// Truncation solver for the degenerate case: an inner `s` of degree
/// `m = rank P < dim`. Keeps the first conditions per node in the given
/// order until `m` conditions are retained, solves the truncated problem,
/// and re-verifies every original condition.
pub fn degenerate_solve(
    data: &ProblemData,
    system: &PickSystem,
) -> Result<Interpolant, SolverError> {
    let order: Vec<usize> = (0..data.pair().node_layout().len()).collect();
    degenerate_solve_with_order(data, system, &order)
}

/// [`degenerate_solve`] with an explicit node-priority permutation for the
/// greedy truncation; the solution itself does not depend on it.
pub fn degenerate_solve_with_order(
    data: &ProblemData,
    system: &PickSystem,
    order: &[usize],
) -> Result<Interpolant, SolverError> {
    if system.is_strictly_positive() {
        return minimal_interpolant(data, system);
    }
    if !system.solvable() {
        return Err(SolverError::Unsolvable { residual: system.solvability_residual() });
    }

    let nodes = problem_nodes(data).ok_or_else(|| SolverError::UnsupportedDegenerate {
        reason: "free-form pairs are not supported by the truncation procedure".into(),
    })?;
    let rank = system.certificate().rank;

    // the degenerate case is the inner one; verify the degree matches
    let s = data.schur();
    let report = schur_check(s, 512);
    let boundary_min = boundary_modulus_min(s, 512);
    if !report.is_schur
        || boundary_min < 1.0 - INNER_BOUNDARY_TOL
        || report.boundary_sup > 1.0 + INNER_BOUNDARY_TOL
    {
        return Err(SolverError::UnsupportedDegenerate {
            reason: format!(
                "Pick matrix singular but s is not inner (boundary modulus in [{boundary_min:.6}, {:.6}])",
                report.boundary_sup
            ),
        });
    }
    if s.degree() != rank {
        return Err(SolverError::UnsupportedDegenerate {
            reason: format!("inner degree {} differs from rank {}", s.degree(), rank),
        });
    }

    // greedy multiplicity budget in the requested node order
    let mut keep = vec![0usize; nodes.len()];
    let mut remaining = rank;
    for &idx in order {
        let take = remaining.min(nodes[idx].multiplicity());
        keep[idx] = take;
        remaining -= take;
        if remaining == 0 {
            break;
        }
    }
    if remaining > 0 {
        return Err(SolverError::TruncationSingular { rank, dim: data.dim() });
    }
    let truncated_nodes: Vec<NodeSpec> = nodes
        .iter()
        .zip(&keep)
        .filter_map(|(node, &k)| node.truncated(k))
        .collect();

    let truncated = ProblemData::from_nodes(&truncated_nodes, s.clone())?;
    let truncated_system = pick::build_system(&truncated)?;
    if !truncated_system.is_strictly_positive() {
        return Err(SolverError::TruncationSingular {
            rank: truncated_system.certificate().rank,
            dim: truncated.dim(),
        });
    }

    let solution = minimal_interpolant(&truncated, &truncated_system)?;

    let residual = interpolation_residual(solution.function(), data)?;
    if residual > INTERPOLATION_TOL {
        return Err(SolverError::InconsistentData { residual });
    }
    Ok(solution)
}

/// Recovers the node list of a Jordan-layout problem.
pub fn problem_nodes(data: &ProblemData) -> Option<Vec<NodeSpec>> {
    let layout = data.pair().node_layout();
    if layout.is_empty() {
        return None;
    }
    let mut nodes = Vec::with_capacity(layout.len());
    let mut offset = 0;
    for &(point, mult) in layout {
        let targets: Vec<Complex64> =
            (0..mult).map(|k| data.x_star()[offset + k]).collect();
        nodes.push(NodeSpec::new(point, mult, targets).ok()?);
        offset += mult;
    }
    Some(nodes)
}

fn boundary_modulus_min(s: &Rational, grid: usize) -> f64 {
    crate::sampling::boundary_grid(grid)
        .into_iter()
        .map(|t| {
            let den = s.denominator().eval(t).norm();
            if den == 0.0 {
                f64::INFINITY
            } else {
                s.numerator().eval(t).norm() / den
            }
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pick::build_system;
    use crate::theta::MuChoice;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn basis_for_zero_schur_single_node_is_constant_one() {
        let node = NodeSpec::simple(Complex64::ZERO, cx(0.7, 0.0)).unwrap();
        let data = ProblemData::from_nodes(&[node], Rational::zero()).unwrap();
        let system = build_system(&data).unwrap();
        let basis = InterpolantBasis::new(&data, &system).unwrap();
        assert!(basis.column(0).coefficient_distance(&Rational::one()) < 1e-14);
    }

    #[test]
    fn basis_for_double_node_is_one_and_z() {
        let node = NodeSpec::new(Complex64::ZERO, 2, vec![cx(1.0, 0.0), cx(2.0, 0.0)]).unwrap();
        let data = ProblemData::from_nodes(&[node], Rational::zero()).unwrap();
        let system = build_system(&data).unwrap();
        let basis = InterpolantBasis::new(&data, &system).unwrap();
        assert!(basis.column(0).coefficient_distance(&Rational::one()) < 1e-14);
        assert!(basis.column(1).coefficient_distance(&Rational::identity()) < 1e-14);
    }

    #[test]
    fn basis_columns_are_kernel_sections_for_simple_nodes() {
        let nodes = [
            NodeSpec::simple(cx(0.3, 0.2), cx(1.0, 0.0)).unwrap(),
            NodeSpec::simple(cx(-0.4, 0.1), cx(0.0, 1.0)).unwrap(),
        ];
        let s = crate::rational::blaschke(&[cx(0.5, 0.0), cx(0.1, -0.6), cx(-0.2, 0.3)], cx(1.0, 0.0))
            .unwrap();
        let data = ProblemData::from_nodes(&nodes, s.clone()).unwrap();
        let system = build_system(&data).unwrap();
        let basis = InterpolantBasis::new(&data, &system).unwrap();
        for (j, node) in nodes.iter().enumerate() {
            for z in [cx(0.2, 0.1), cx(-0.5, -0.3), cx(0.0, 0.6)] {
                let col = basis.column(j).evaluate(z, 0).unwrap();
                let kernel = rkhs::kernel_eval(&s, z, node.point(), 0, 0).unwrap();
                assert!((col - kernel).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn minimal_interpolant_for_one_node_is_the_constant_target() {
        let node = NodeSpec::simple(Complex64::ZERO, cx(0.7, -0.2)).unwrap();
        let data = ProblemData::from_nodes(&[node], Rational::zero()).unwrap();
        let system = build_system(&data).unwrap();
        let interp = minimal_interpolant(&data, &system).unwrap();
        assert!(interp
            .function()
            .coefficient_distance(&Rational::constant(cx(0.7, -0.2)))
            < 1e-12);
        assert!((interp.norm_squared() - cx(0.7, -0.2).norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn minimal_interpolant_for_double_node_is_the_taylor_jet() {
        let w0 = cx(0.4, 0.1);
        let w1 = cx(-0.3, 0.5);
        let node = NodeSpec::new(Complex64::ZERO, 2, vec![w0, w1]).unwrap();
        let data = ProblemData::from_nodes(&[node], Rational::zero()).unwrap();
        let system = build_system(&data).unwrap();
        let interp = minimal_interpolant(&data, &system).unwrap();
        let expected = Rational::from_polynomial(Polynomial::new(vec![w0, w1]));
        assert!(interp.function().coefficient_distance(&expected) < 1e-12);
        assert!((interp.norm_squared() - (w0.norm_sqr() + w1.norm_sqr())).abs() < 1e-12);
    }

    #[test]
    fn minimal_interpolant_with_z_squared_schur_function() {
        let w0 = cx(0.4, 0.1);
        let w1 = cx(-0.3, 0.5);
        let node = NodeSpec::new(Complex64::ZERO, 2, vec![w0, w1]).unwrap();
        let z2 = Rational::identity().mul(&Rational::identity()).unwrap();
        let data = ProblemData::from_nodes(&[node], z2).unwrap();
        let system = build_system(&data).unwrap();
        let interp = minimal_interpolant(&data, &system).unwrap();
        let expected = Rational::from_polynomial(Polynomial::new(vec![w0, w1]));
        assert!(interp.function().coefficient_distance(&expected) < 1e-12);
        assert!((interp.norm_squared() - (w0.norm_sqr() + w1.norm_sqr())).abs() < 1e-12);
    }

    #[test]
    fn parametrize_with_empty_parameter_reproduces_the_minimal_solution() {
        let node = NodeSpec::simple(cx(0.5, 0.0), cx(0.7, 0.0)).unwrap();
        let data = ProblemData::from_nodes(&[node], Rational::zero()).unwrap();
        let system = build_system(&data).unwrap();
        let theta = ThetaFunction::build(&data, &system, MuChoice::Fixed(cx(1.0, 0.0))).unwrap();
        let sigma = theta.extract_schur_parameter(data.schur()).unwrap();
        let h = FreeParameter::empty(sigma);
        let via_param = parametrize(&data, &system, &theta, &h).unwrap();
        let minimal = minimal_interpolant(&data, &system).unwrap();
        assert!(via_param.function().coefficient_distance(minimal.function()) < 1e-10);
        assert!((via_param.norm_squared() - minimal.norm_squared()).abs() < 1e-12);
    }

    #[test]
    fn parameter_point_on_zero_of_u_is_rejected() {
        // node at the origin with s = 0 gives u = z, whose zero is the origin
        let node = NodeSpec::simple(Complex64::ZERO, cx(0.7, 0.0)).unwrap();
        let data = ProblemData::from_nodes(&[node], Rational::zero()).unwrap();
        let system = build_system(&data).unwrap();
        let theta = ThetaFunction::build(&data, &system, MuChoice::Fixed(cx(1.0, 0.0))).unwrap();
        let sigma = theta.extract_schur_parameter(data.schur()).unwrap();
        let h = FreeParameter::new(sigma, vec![(Complex64::ZERO, cx(1.0, 0.0))]).unwrap();
        assert!(matches!(
            parametrize(&data, &system, &theta, &h),
            Err(SolverError::ParameterPointOnZeroOfU { .. })
        ));
    }

    #[test]
    fn direct_construction_covers_the_origin_parameter_content() {
        // with u = z and sigma = 0, the parameter section at the origin is
        // u·K_sigma(·,0) = z, so f = w + alpha·z with norms |w|² and |alpha|²
        let w = cx(0.7, 0.0);
        let alpha = cx(0.3, -0.4);
        let node = NodeSpec::simple(Complex64::ZERO, w).unwrap();
        let data = ProblemData::from_nodes(&[node], Rational::zero()).unwrap();
        let system = build_system(&data).unwrap();
        let theta = ThetaFunction::build(&data, &system, MuChoice::Fixed(cx(1.0, 0.0))).unwrap();
        let u = theta.multiplier(data.schur()).unwrap();
        assert!(u.coefficient_distance(&Rational::identity()) < 1e-12);

        let minimal = minimal_interpolant(&data, &system).unwrap();
        let section = u.scale(alpha); // u·K_sigma(·,0)·alpha with K_sigma(·,0) ≡ 1
        let f = minimal.function().add(&section).unwrap();
        let expected = Rational::from_polynomial(Polynomial::new(vec![w, alpha]));
        assert!(f.coefficient_distance(&expected) < 1e-12);

        let h2 = crate::rkhs::h2_norm(&f, 64).unwrap();
        assert!((h2.value * h2.value - (w.norm_sqr() + alpha.norm_sqr())).abs() < 1e-10);
    }

    #[test]
    fn parametrize_away_from_zeros_of_u() {
        let node = NodeSpec::simple(cx(0.5, 0.0), cx(0.7, 0.0)).unwrap();
        let data = ProblemData::from_nodes(&[node], Rational::zero()).unwrap();
        let system = build_system(&data).unwrap();
        let theta = ThetaFunction::build(&data, &system, MuChoice::Fixed(cx(1.0, 0.0))).unwrap();
        let sigma = theta.extract_schur_parameter(data.schur()).unwrap();
        let alpha = cx(0.2, 0.1);
        let h = FreeParameter::new(sigma, vec![(Complex64::ZERO, alpha)]).unwrap();
        let interp = parametrize(&data, &system, &theta, &h).unwrap();

        // interpolation condition survives the parameter
        let at_node = interp.function().evaluate(cx(0.5, 0.0), 0).unwrap();
        assert!((at_node - cx(0.7, 0.0)).norm() < 1e-10);
        // norm decomposition: u = b_{1/2} is inner, K_sigma(0,0) = 1
        let (min_sq, param_sq, total) = norm_decomposition(&interp);
        assert!((param_sq - alpha.norm_sqr()).abs() < 1e-10);
        assert!((total - (min_sq + param_sq)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_equal_targets_solve_to_the_constant() {
        let nodes = [
            NodeSpec::simple(Complex64::ZERO, cx(0.6, 0.2)).unwrap(),
            NodeSpec::simple(cx(0.5, 0.0), cx(0.6, 0.2)).unwrap(),
        ];
        let data = ProblemData::from_nodes(&nodes, Rational::identity()).unwrap();
        let system = build_system(&data).unwrap();
        assert!(!system.is_strictly_positive());
        let interp = degenerate_solve(&data, &system).unwrap();
        assert!(interp
            .function()
            .coefficient_distance(&Rational::constant(cx(0.6, 0.2)))
            < 1e-10);
    }

    #[test]
    fn degenerate_distinct_targets_are_unsolvable() {
        let nodes = [
            NodeSpec::simple(Complex64::ZERO, cx(1.0, 0.0)).unwrap(),
            NodeSpec::simple(cx(0.5, 0.0), cx(2.0, 0.0)).unwrap(),
        ];
        let data = ProblemData::from_nodes(&nodes, Rational::identity()).unwrap();
        let system = build_system(&data).unwrap();
        assert!(matches!(
            degenerate_solve(&data, &system),
            Err(SolverError::Unsolvable { .. })
        ));
    }

    #[test]
    fn degenerate_single_node_falls_back_to_the_nondegenerate_path() {
        let node = NodeSpec::simple(Complex64::ZERO, cx(0.4, 0.0)).unwrap();
        let data = ProblemData::from_nodes(&[node], Rational::identity()).unwrap();
        let system = build_system(&data).unwrap();
        assert!(system.is_strictly_positive());
        let interp = degenerate_solve(&data, &system).unwrap();
        assert!(interp
            .function()
            .coefficient_distance(&Rational::constant(cx(0.4, 0.0)))
            < 1e-12);
    }

    #[test]
    fn degenerate_solution_is_independent_of_the_truncation_order() {
        let nodes = [
            NodeSpec::simple(Complex64::ZERO, cx(0.6, 0.2)).unwrap(),
            NodeSpec::simple(cx(0.5, 0.0), cx(0.6, 0.2)).unwrap(),
        ];
        let data = ProblemData::from_nodes(&nodes, Rational::identity()).unwrap();
        let system = build_system(&data).unwrap();
        let a = degenerate_solve_with_order(&data, &system, &[0, 1]).unwrap();
        let b = degenerate_solve_with_order(&data, &system, &[1, 0]).unwrap();
        assert!(a.function().coefficient_distance(b.function()) < 1e-10);
    }

    #[test]
    fn degenerate_rejects_non_inner_schur_functions() {
        // force a singular P with a non-inner s is not possible through the
        // Jordan route, so emulate the check directly: a half-scaled Blaschke
        // factor is a valid Schur function whose P stays invertible, and the
        // solver must refuse to treat an invertible system as degenerate only
        // through the minimal path (sanity guard for the routing logic).
        let node = NodeSpec::simple(Complex64::ZERO, cx(0.4, 0.0)).unwrap();
        let half_b = crate::rational::blaschke(&[cx(0.5, 0.0)], cx(1.0, 0.0))
            .unwrap()
            .scale(cx(0.5, 0.0));
        let data = ProblemData::from_nodes(&[node], half_b).unwrap();
        let system = build_system(&data).unwrap();
        assert!(system.is_strictly_positive());
        assert!(degenerate_solve(&data, &system).is_ok());
    }
}
