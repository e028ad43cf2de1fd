//! Kernel-side machinery of the space attached to a Schur function `s`:
//! exact mixed derivatives of the kernel, an inner-product engine on the
//! span of kernel sections and basis columns, verifiers for orthogonality
//! and isometric multiplication, a kernel-positivity certificate, and a
//! Hardy-space norm oracle.
//!
//! The inner product is computed only through the reproducing identities
//! on representable elements, never through the operator-range norm, which
//! has no closed computational form.

use crate::numerics::{
    certify_psd, solve_hermitian, HermitianMatrix, NumericsError, SpectralCertificate,
    PSD_THRESHOLD,
};
use crate::pick::PickSystem;
use crate::poly::Polynomial;
use crate::rational::{Rational, RationalError, POLE_DISK_TOL};
use crate::realization::ProblemData;
use crate::sampling;
use crate::solver::{FreeParameter, InterpolantBasis, U_ZERO_TOL};
use crate::theta::{ThetaError, ThetaFunction};
use crate::{CMatrix, CVector};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RkhsError {
    #[error("point {0} lies outside the open unit disk")]
    PointOutsideDisk(Complex64),
    #[error("span vectors come from different kernel contexts")]
    ContextMismatch,
    #[error("Pick matrix is singular (rank {rank} of {dim}); engine unavailable")]
    SingularPick { rank: usize, dim: usize },
    #[error("point {point} sits on a zero of the multiplier (|u| = {magnitude:.3e})")]
    PointOnZeroOfU { point: Complex64, magnitude: f64 },
    #[error("function has a pole at {0} in the closed unit disk")]
    PoleInClosedDisk(Complex64),
    #[error("sample points {0} and {1} coincide")]
    DuplicateSamplePoints(Complex64, Complex64),
    #[error(transparent)]
    Rational(#[from] RationalError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Theta(#[from] ThetaError),
}

// ---------------------------------------------------------------------------
// Kernel evaluation
// ---------------------------------------------------------------------------

/// Table of mixed derivatives `∂_z^l ∂_conj(ζ)^r K_s(z, ζ)` for
/// `l ≤ lmax`, `r ≤ rmax`, at the point `(z, ζ)`.
///
/// Writing `s = p/q` and `w = conj(ζ)`, the kernel is the two-variable
/// rational `N/D` with separable numerator and denominator
/// `N = q(z)q#(w) − p(z)p#(w)`, `D = (1 − zw) q(z) q#(w)`; all partials of
/// `N`, `D` are exact products of univariate derivatives, and the partials
/// of the quotient follow from the two-dimensional Leibniz recurrence.
pub fn kernel_derivatives(
    s: &Rational,
    z: Complex64,
    zeta: Complex64,
    lmax: usize,
    rmax: usize,
) -> Vec<Vec<Complex64>> {
    let w = zeta.conj();
    let p = s.numerator();
    let q = s.denominator();
    let pb = p.conj_coeffs();
    let qb = q.conj_coeffs();
    let zq = Polynomial::identity().mul(q);
    let wqb = Polynomial::identity().mul(&qb);

    // derivative tables per constituent polynomial
    let table = |poly: &Polynomial, at: Complex64, upto: usize| -> Vec<Complex64> {
        (0..=upto).map(|k| poly.derivative_at(at, k)).collect()
    };
    let q_z = table(q, z, lmax);
    let p_z = table(p, z, lmax);
    let zq_z = table(&zq, z, lmax);
    let qb_w = table(&qb, w, rmax);
    let pb_w = table(&pb, w, rmax);
    let wqb_w = table(&wqb, w, rmax);

    let num_part = |i: usize, j: usize| q_z[i] * qb_w[j] - p_z[i] * pb_w[j];
    let den_part = |i: usize, j: usize| q_z[i] * qb_w[j] - zq_z[i] * wqb_w[j];

    let binom = |n: usize, k: usize| -> f64 {
        let mut acc = 1.0;
        for i in 0..k {
            acc = acc * (n - i) as f64 / (i + 1) as f64;
        }
        acc
    };

    let d00 = den_part(0, 0);
    let mut out = vec![vec![Complex64::ZERO; rmax + 1]; lmax + 1];
    for l in 0..=lmax {
        for r in 0..=rmax {
            let mut acc = num_part(l, r);
            for i in 0..=l {
                for j in 0..=r {
                    if i == l && j == r {
                        continue;
                    }
                    acc -= Complex64::new(binom(l, i) * binom(r, j), 0.0)
                        * out[i][j]
                        * den_part(l - i, r - j);
                }
            }
            out[l][r] = acc / d00;
        }
    }
    out
}

/// One mixed derivative of the kernel at an interior point pair.
pub fn kernel_eval(
    s: &Rational,
    z: Complex64,
    zeta: Complex64,
    dz_order: usize,
    dzeta_bar_order: usize,
) -> Result<Complex64, RkhsError> {
    if z.norm() >= 1.0 {
        return Err(RkhsError::PointOutsideDisk(z));
    }
    if zeta.norm() >= 1.0 {
        return Err(RkhsError::PointOutsideDisk(zeta));
    }
    Ok(kernel_derivatives(s, z, zeta, dz_order, dzeta_bar_order)[dz_order][dzeta_bar_order])
}

// ---------------------------------------------------------------------------
// Span elements and the inner-product engine
// ---------------------------------------------------------------------------

/// What a span element is built from.
#[derive(Debug, Clone)]
pub enum ElementKind {
    /// `∂_conj(ζ)^order K_s(·, ζ)` at `ζ = point`; pairing a function
    /// against it reads off the `order`-th derivative at the point.
    Section { point: Complex64, order: usize },
    /// `F P⁻¹ v` for the stored column `v`.
    Column(CVector),
}

#[derive(Debug, Clone)]
pub struct KernelElement {
    pub kind: ElementKind,
    pub coefficient: Complex64,
}

impl KernelElement {
    pub fn section(point: Complex64, order: usize, coefficient: Complex64) -> Self {
        KernelElement { kind: ElementKind::Section { point, order }, coefficient }
    }

    pub fn column(v: CVector, coefficient: Complex64) -> Self {
        KernelElement { kind: ElementKind::Column(v), coefficient }
    }
}

/// A finite linear combination of representable elements, tagged with the
/// context it was built in.
#[derive(Debug, Clone)]
pub struct SpanVector {
    elements: Vec<KernelElement>,
    context_id: u64,
}

impl SpanVector {
    pub fn elements(&self) -> &[KernelElement] {
        &self.elements
    }
}

/// Inner-product engine over one problem context. Requires a strictly
/// positive Pick matrix since basis columns enter through `P⁻¹`.
#[derive(Debug, Clone)]
pub struct KernelEngine {
    s: Rational,
    basis: InterpolantBasis,
    matrix: HermitianMatrix,
    x_star: CVector,
    context_id: u64,
}

impl KernelEngine {
    pub fn new(data: &ProblemData, system: &PickSystem) -> Result<Self, RkhsError> {
        if !system.is_strictly_positive() {
            return Err(RkhsError::SingularPick {
                rank: system.certificate().rank,
                dim: data.dim(),
            });
        }
        let basis = InterpolantBasis::new(data, system)?;
        let context_id = context_hash(data, system);
        Ok(KernelEngine {
            s: data.schur().clone(),
            basis,
            matrix: system.matrix().clone(),
            x_star: data.x_star().clone(),
            context_id,
        })
    }

    pub fn schur(&self) -> &Rational {
        &self.s
    }

    pub fn basis(&self) -> &InterpolantBasis {
        &self.basis
    }

    pub fn span(&self, elements: Vec<KernelElement>) -> SpanVector {
        SpanVector { elements, context_id: self.context_id }
    }

    /// The span of the minimal interpolant `F P⁻¹ x*`.
    pub fn minimal_span(&self) -> SpanVector {
        self.span(vec![KernelElement::column(self.x_star.clone(), Complex64::new(1.0, 0.0))])
    }

    /// Expands `u·h` for `h = Σ α_i K_σ(·, w_i)` into representable
    /// elements through the coupling identity
    /// `u(z) K_σ(z, w) conj(u(w)) = K_s(z, w) − F(z) P⁻¹ F(w)*`.
    pub fn multiplied_parameter_span(
        &self,
        theta: &ThetaFunction,
        h: &FreeParameter,
    ) -> Result<SpanVector, RkhsError> {
        let u = theta.multiplier(&self.s)?;
        let mut elements = Vec::with_capacity(2 * h.terms().len());
        for (w, alpha) in h.terms() {
            let u_val = u.evaluate(*w, 0)?;
            if u_val.norm() <= U_ZERO_TOL {
                return Err(RkhsError::PointOnZeroOfU { point: *w, magnitude: u_val.norm() });
            }
            let gamma = alpha / u_val.conj();
            elements.push(KernelElement::section(*w, 0, gamma));
            let row = self
                .basis
                .eval_row(*w)
                .map_err(|_| RkhsError::PointOutsideDisk(*w))?;
            elements.push(KernelElement::column(row.adjoint(), -gamma));
        }
        Ok(self.span(elements))
    }

    /// Sesquilinear extension of the elementary reproducing identities.
    pub fn inner_product(&self, x: &SpanVector, y: &SpanVector) -> Result<Complex64, RkhsError> {
        if x.context_id != self.context_id || y.context_id != self.context_id {
            return Err(RkhsError::ContextMismatch);
        }
        let mut acc = Complex64::ZERO;
        for a in &x.elements {
            for b in &y.elements {
                acc += a.coefficient * b.coefficient.conj() * self.elementary(&a.kind, &b.kind)?;
            }
        }
        Ok(acc)
    }

    pub fn norm_squared(&self, x: &SpanVector) -> Result<f64, RkhsError> {
        let value = self.inner_product(x, x)?;
        debug_assert!(value.im.abs() <= 1e-8 * (1.0 + value.re.abs()));
        Ok(value.re)
    }

    fn elementary(&self, a: &ElementKind, b: &ElementKind) -> Result<Complex64, RkhsError> {
        match (a, b) {
            (
                ElementKind::Section { point: w1, order: d1 },
                ElementKind::Section { point: w2, order: d2 },
            ) => kernel_eval(&self.s, *w2, *w1, *d2, *d1),
            (ElementKind::Column(v), ElementKind::Section { point: w, order: d }) => {
                let solved = solve_hermitian(&self.matrix, v)?;
                let mut acc = Complex64::ZERO;
                for (j, col) in self.basis.columns().iter().enumerate() {
                    acc += solved[j] * col.evaluate(*w, *d)?;
                }
                Ok(acc)
            }
            (ElementKind::Section { .. }, ElementKind::Column(_)) => {
                Ok(self.elementary(b, a)?.conj())
            }
            (ElementKind::Column(v), ElementKind::Column(u)) => {
                let solved = solve_hermitian(&self.matrix, u)?;
                Ok(solved.dotc(v))
            }
        }
    }
}

fn context_hash(data: &ProblemData, system: &PickSystem) -> u64 {
    let mut state: u64 = 0xcbf29ce484222325;
    let mut eat = |x: f64| {
        for byte in x.to_bits().to_le_bytes() {
            state ^= byte as u64;
            state = state.wrapping_mul(0x100000001b3);
        }
    };
    for c in data.schur().numerator().coeffs().iter().chain(data.schur().denominator().coeffs()) {
        eat(c.re);
        eat(c.im);
    }
    for v in data.x_star().iter() {
        eat(v.re);
        eat(v.im);
    }
    let p = system.matrix();
    for i in 0..p.dim() {
        for j in 0..p.dim() {
            eat(p.entry(i, j).re);
            eat(p.entry(i, j).im);
        }
    }
    state
}

// ---------------------------------------------------------------------------
// Verifiers
// ---------------------------------------------------------------------------

/// |⟨u·h, F P⁻¹x*⟩| through the engine: the two parts of the solution
/// formula are orthogonal, so this must vanish up to round-off.
pub fn verify_orthogonality(
    engine: &KernelEngine,
    theta: &ThetaFunction,
    h: &FreeParameter,
) -> Result<f64, RkhsError> {
    let uh = engine.multiplied_parameter_span(theta, h)?;
    let fmin = engine.minimal_span();
    Ok(engine.inner_product(&uh, &fmin)?.norm())
}

/// Both sides of the isometry statement for multiplication by `u`: the
/// parameter-side squared norm of `h(z) = Σ α_i K_σ(z, z_i) conj(u(z_i))`
/// and the solution-side squared norm of `u·h`.
pub fn verify_isometry(
    engine: &KernelEngine,
    theta: &ThetaFunction,
    combo: &[(Complex64, Complex64)],
) -> Result<(f64, f64), RkhsError> {
    let sigma = theta.extract_schur_parameter(&engine.s)?;
    let u = theta.multiplier(&engine.s)?;

    let mut u_vals = Vec::with_capacity(combo.len());
    for (z, _) in combo {
        let val = u.evaluate(*z, 0)?;
        if val.norm() <= U_ZERO_TOL {
            return Err(RkhsError::PointOnZeroOfU { point: *z, magnitude: val.norm() });
        }
        u_vals.push(val);
    }

    // parameter side, with the conj(u) weights folded into the coefficients
    let mut lhs = Complex64::ZERO;
    for ((zi, ai), ui) in combo.iter().zip(&u_vals) {
        for ((zj, aj), uj) in combo.iter().zip(&u_vals) {
            let beta_i = ai * ui.conj();
            let beta_j = aj * uj.conj();
            lhs += beta_i * beta_j.conj() * kernel_eval(&sigma, *zj, *zi, 0, 0)?;
        }
    }

    // solution side: u(z) K_sigma(z, z_i) conj(u(z_i)) expands to
    // K_s(z, z_i) − F(z) P⁻¹ F(z_i)*, no division required
    let mut elements = Vec::with_capacity(2 * combo.len());
    for (zi, ai) in combo {
        elements.push(KernelElement::section(*zi, 0, *ai));
        let row = engine
            .basis
            .eval_row(*zi)
            .map_err(|_| RkhsError::PointOutsideDisk(*zi))?;
        elements.push(KernelElement::column(row.adjoint(), -ai));
    }
    let uh = engine.span(elements);
    let rhs = engine.norm_squared(&uh)?;

    debug_assert!(lhs.im.abs() <= 1e-8 * (1.0 + lhs.re.abs()));
    Ok((lhs.re, rhs))
}

// ---------------------------------------------------------------------------
// Positivity certificate
// ---------------------------------------------------------------------------

/// Assembles the full test matrix of the solution criterion over the given
/// sample points and certifies it: blocks
/// `[[γ, x, conj(f(ζ))], [x*, P, F(ζ)*], [f(z), F(z), K_s(z, ζ)]]` indexed
/// over all sample pairs. Positive semidefiniteness for every sample is
/// equivalent to `f` solving the problem with `‖f‖² ≤ γ`.
pub fn positivity_certificate(
    data: &ProblemData,
    system: &PickSystem,
    f: &Rational,
    gamma: f64,
    sample_points: &[Complex64],
) -> Result<SpectralCertificate, RkhsError> {
    Ok(positivity_matrix(data, system, f, gamma, sample_points)?.1)
}

fn positivity_matrix(
    data: &ProblemData,
    system: &PickSystem,
    f: &Rational,
    gamma: f64,
    sample_points: &[Complex64],
) -> Result<(f64, SpectralCertificate), RkhsError> {
    for (i, z) in sample_points.iter().enumerate() {
        if z.norm() >= 1.0 {
            return Err(RkhsError::PointOutsideDisk(*z));
        }
        for v in sample_points.iter().skip(i + 1) {
            if (z - v).norm() <= 1e-12 {
                return Err(RkhsError::DuplicateSamplePoints(*z, *v));
            }
        }
    }
    let basis = InterpolantBasis::new(data, system)?;
    let n = data.dim();
    let r = sample_points.len();
    let block = n + 2;
    let mut big = CMatrix::zeros(r * block, r * block);

    let f_vals = sample_points
        .iter()
        .map(|&z| f.evaluate(z, 0))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = sample_points
        .iter()
        .map(|&z| basis.eval_row(z).map_err(|_| RkhsError::PointOutsideDisk(z)))
        .collect::<Result<Vec<_>, _>>()?;

    for bj in 0..r {
        for bl in 0..r {
            let (zj, zl) = (sample_points[bj], sample_points[bl]);
            let (oj, ol) = (bj * block, bl * block);
            big[(oj, ol)] = Complex64::new(gamma, 0.0);
            for k in 0..n {
                big[(oj, ol + 1 + k)] = data.x_star()[k].conj();
                big[(oj + 1 + k, ol)] = data.x_star()[k];
                big[(oj + 1 + k, ol + block - 1)] = rows[bl][k].conj();
                big[(oj + block - 1, ol + 1 + k)] = rows[bj][k];
                for k2 in 0..n {
                    big[(oj + 1 + k, ol + 1 + k2)] = system.matrix().entry(k, k2);
                }
            }
            big[(oj, ol + block - 1)] = f_vals[bl].conj();
            big[(oj + block - 1, ol)] = f_vals[bj];
            big[(oj + block - 1, ol + block - 1)] = kernel_eval(&data.schur(), zj, zl, 0, 0)?;
        }
    }

    let matrix = HermitianMatrix::new(big)?;
    let scale = matrix.spectral_norm();
    Ok((scale, certify_psd(&matrix, PSD_THRESHOLD)))
}

/// One enrichment round of the positivity scan.
#[derive(Debug, Clone)]
pub struct PositivityRound {
    pub sample_count: usize,
    pub min_eigenvalue: f64,
    pub scale: f64,
    pub passed: bool,
}

/// Result of the sample-enrichment loop.
#[derive(Debug, Clone)]
pub struct PositivityScan {
    pub rounds: Vec<PositivityRound>,
    pub verdict: bool,
}

/// Runs the certificate over quasi-random disk samples of growing size
/// (20, 40, .., 320), stopping once the verdict is stable across two
/// consecutive rounds.
pub fn positivity_scan(
    data: &ProblemData,
    system: &PickSystem,
    f: &Rational,
    gamma: f64,
) -> Result<PositivityScan, RkhsError> {
    let mut rounds: Vec<PositivityRound> = Vec::new();
    for count in [20usize, 40, 80, 160, 320] {
        let points = sampling::golden_spiral(count, 0.9);
        let (scale, cert) = positivity_matrix(data, system, f, gamma, &points)?;
        let passed = cert.min_eigenvalue >= -1e-9 * scale.max(1.0);
        rounds.push(PositivityRound {
            sample_count: count,
            min_eigenvalue: cert.min_eigenvalue,
            scale,
            passed,
        });
        let len = rounds.len();
        if len >= 2 && rounds[len - 1].passed == rounds[len - 2].passed {
            break;
        }
    }
    let verdict = rounds.last().map(|r| r.passed).unwrap_or(false);
    Ok(PositivityScan { rounds, verdict })
}

// ---------------------------------------------------------------------------
// Hardy-space norm oracle
// ---------------------------------------------------------------------------

/// Truncated Hardy-space norm with its geometric tail bound.
#[derive(Debug, Clone, PartialEq)]
pub struct H2Norm {
    pub value: f64,
    pub tail_bound: f64,
}

/// Square root of the sum of squared moduli of the first `truncation`
/// Taylor coefficients, for `f` pole-free in the closed disk. The tail
/// bound comes from the Cauchy estimate on a circle between the unit
/// circle and the closest pole.
pub fn h2_norm(f: &Rational, truncation: usize) -> Result<H2Norm, RkhsError> {
    let poles = f.poles();
    let mut min_radius = f64::INFINITY;
    for (pole, _) in &poles {
        if pole.norm() <= 1.0 + POLE_DISK_TOL {
            return Err(RkhsError::PoleInClosedDisk(*pole));
        }
        min_radius = min_radius.min(pole.norm());
    }

    let coeffs = f.taylor(truncation).map_err(RkhsError::Rational)?;
    let value = coeffs.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();

    let tail_bound = if f.denominator().degree() == 0 {
        // entire (polynomial) case: the tail is exactly the rest of the
        // coefficients
        let lead = f.denominator().coeff(0);
        (truncation..=f.numerator().degree())
            .map(|k| (f.numerator().coeff(k) / lead).norm_sqr())
            .sum::<f64>()
            .sqrt()
    } else {
        let r = min_radius.sqrt();
        let peak = sampling::boundary_grid(128)
            .into_iter()
            .map(|t| {
                let z = t * r;
                let den = f.denominator().eval(z).norm();
                if den == 0.0 {
                    f64::INFINITY
                } else {
                    f.numerator().eval(z).norm() / den
                }
            })
            .fold(0.0, f64::max);
        let ratio = r.powi(-2);
        (peak * peak * ratio.powi(truncation as i32) / (1.0 - ratio)).sqrt()
    };

    Ok(H2Norm { value, tail_bound })
}
