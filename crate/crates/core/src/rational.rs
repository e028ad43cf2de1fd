//! Scalar complex rational functions in normal form: monic denominator and
//! no common numerator/denominator roots within the cancellation tolerance.
//!
//! Arithmetic is exact on coefficients; normalization afterwards cancels
//! near-common factors by root clustering, which is what removes the
//! removable singularities produced by the linear-fractional algebra
//! downstream.

use crate::poly::{PolyError, Polynomial, CANCEL_TOL};
use num_complex::Complex64;
use thiserror::Error;

/// Relative magnitude below which leading coefficients are treated as
/// round-off residue during normalization.
const TRIM_REL: f64 = 1e-11;

/// Denominator magnitude below which evaluation is refused as a pole hit.
const POLE_EVAL_TOL: f64 = 1e-12;

/// A pole with modulus at or below `1 + POLE_DISK_TOL` counts as lying in
/// the closed unit disk.
pub const POLE_DISK_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RationalError {
    #[error("division by the identically-zero function")]
    DivisionByZeroFunction,
    #[error("evaluation at z = {at} hits a pole (|den| = {den_norm:.3e})")]
    PoleEvaluation { at: Complex64, den_norm: f64 },
    #[error("denominator is identically zero")]
    ZeroDenominator,
    #[error("Blaschke zero {0} lies outside the open unit disk")]
    ZeroOutsideDisk(Complex64),
    #[error("constant {0} is not unimodular")]
    NonUnimodularConstant(Complex64),
    #[error("Taylor expansion requested at a pole of the function")]
    TaylorAtPole,
    #[error(transparent)]
    Degree(#[from] PolyError),
}

/// Arithmetic selector for [`rational_arithmetic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RationalOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// A rational function `numerator / denominator` in normal form.
#[derive(Debug, Clone, PartialEq)]
pub struct Rational {
    num: Polynomial,
    den: Polynomial,
}

impl Rational {
    /// Builds and normalizes. Fails only on an identically zero denominator
    /// or a degree-cap violation.
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self, RationalError> {
        if den.is_zero() {
            return Err(RationalError::ZeroDenominator);
        }
        num.check_degree_cap()?;
        den.check_degree_cap()?;
        Ok(normalize(num, den))
    }

    pub fn zero() -> Self {
        Rational { num: Polynomial::zero(), den: Polynomial::one() }
    }

    pub fn one() -> Self {
        Rational { num: Polynomial::one(), den: Polynomial::one() }
    }

    pub fn constant(value: Complex64) -> Self {
        Rational { num: Polynomial::constant(value), den: Polynomial::one() }
    }

    /// The function `z`.
    pub fn identity() -> Self {
        Rational { num: Polynomial::identity(), den: Polynomial::one() }
    }

    pub fn from_polynomial(p: Polynomial) -> Self {
        Rational { num: p, den: Polynomial::one() }
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// max(deg num, deg den); the degree of the function as a map on the
    /// sphere.
    pub fn degree(&self) -> usize {
        self.num.degree().max(self.den.degree())
    }

    pub fn add(&self, rhs: &Rational) -> Result<Rational, RationalError> {
        let num = self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den));
        Rational::new(num, self.den.mul(&rhs.den))
    }

    pub fn sub(&self, rhs: &Rational) -> Result<Rational, RationalError> {
        let num = self.num.mul(&rhs.den).sub(&rhs.num.mul(&self.den));
        Rational::new(num, self.den.mul(&rhs.den))
    }

    pub fn mul(&self, rhs: &Rational) -> Result<Rational, RationalError> {
        Rational::new(self.num.mul(&rhs.num), self.den.mul(&rhs.den))
    }

    pub fn div(&self, rhs: &Rational) -> Result<Rational, RationalError> {
        if rhs.is_zero() {
            return Err(RationalError::DivisionByZeroFunction);
        }
        Rational::new(self.num.mul(&rhs.den), self.den.mul(&rhs.num))
    }

    pub fn scale(&self, factor: Complex64) -> Rational {
        normalize(self.num.scale(factor), self.den.clone())
    }

    /// Value of the `order`-th derivative at `z` (not divided by factorial).
    ///
    /// Derivatives are symbolic: with `f = n/d`, the recurrence
    /// `g_{k+1} = g_k' d − (k+1) g_k d'` gives `f^(k) = g_k / d^(k+1)`.
    pub fn evaluate(&self, z: Complex64, order: usize) -> Result<Complex64, RationalError> {
        let den_val = self.den.eval(z);
        if den_val.norm() <= POLE_EVAL_TOL {
            return Err(RationalError::PoleEvaluation { at: z, den_norm: den_val.norm() });
        }
        if order == 0 {
            return Ok(self.num.eval(z) / den_val);
        }
        let dprime = self.den.derivative();
        let mut g = self.num.clone();
        for k in 0..order {
            g = g
                .derivative()
                .mul(&self.den)
                .sub(&g.mul(&dprime).scale(Complex64::new((k + 1) as f64, 0.0)));
        }
        Ok(g.eval(z) / den_val.powu(order as u32 + 1))
    }

    /// Poles with multiplicity (clustered roots of the denominator).
    pub fn poles(&self) -> Vec<(Complex64, usize)> {
        if self.den.degree() == 0 {
            return Vec::new();
        }
        self.den.clustered_roots()
    }

    /// First `count` Taylor coefficients at the origin.
    pub fn taylor(&self, count: usize) -> Result<Vec<Complex64>, RationalError> {
        let d0 = self.den.coeff(0);
        if d0.norm() <= POLE_EVAL_TOL {
            return Err(RationalError::TaylorAtPole);
        }
        let mut out = Vec::with_capacity(count);
        for k in 0..count {
            let mut acc = self.num.coeff(k);
            for j in 1..=k.min(self.den.degree()) {
                acc -= self.den.coeff(j) * out[k - j];
            }
            out.push(acc / d0);
        }
        Ok(out)
    }

    /// L-infinity distance between aligned numerator and denominator
    /// coefficients; both sides are already in normal form.
    pub fn coefficient_distance(&self, rhs: &Rational) -> f64 {
        let piece = |a: &Polynomial, b: &Polynomial| {
            let n = a.coeffs().len().max(b.coeffs().len());
            (0..n)
                .map(|k| (a.coeff(k) - b.coeff(k)).norm())
                .fold(0.0, f64::max)
        };
        piece(&self.num, &rhs.num).max(piece(&self.den, &rhs.den))
    }
}

impl std::fmt::Display for Rational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let show = |p: &Polynomial| {
            p.coeffs()
                .iter()
                .enumerate()
                .map(|(k, c)| format!("({:.6}{:+.6}i)z^{}", c.re, c.im, k))
                .collect::<Vec<_>>()
                .join(" + ")
        };
        write!(f, "[{}] / [{}]", show(&self.num), show(&self.den))
    }
}

/// Dispatch form of the four arithmetic operations.
pub fn rational_arithmetic(
    lhs: &Rational,
    rhs: &Rational,
    op: RationalOp,
) -> Result<Rational, RationalError> {
    match op {
        RationalOp::Add => lhs.add(rhs),
        RationalOp::Sub => lhs.sub(rhs),
        RationalOp::Mul => lhs.mul(rhs),
        RationalOp::Div => lhs.div(rhs),
    }
}

fn normalize(num: Polynomial, den: Polynomial) -> Rational {
    let num = num.trim_relative(TRIM_REL);
    let mut den = den.trim_relative(TRIM_REL);
    if num.is_zero() {
        return Rational { num: Polynomial::zero(), den: Polynomial::one() };
    }
    let mut num = num;

    // cancel near-common roots
    if num.degree() >= 1 && den.degree() >= 1 {
        let mut num_roots = num.clustered_roots();
        let mut den_roots = den.clustered_roots();
        let mut cancelled = false;
        for dr in den_roots.iter_mut() {
            for nr in num_roots.iter_mut() {
                if nr.1 == 0 || dr.1 == 0 {
                    continue;
                }
                if (nr.0 - dr.0).norm() <= CANCEL_TOL {
                    let k = nr.1.min(dr.1);
                    nr.1 -= k;
                    dr.1 -= k;
                    cancelled = true;
                }
            }
        }
        if cancelled {
            num = rebuild(&num_roots, num.leading());
            den = rebuild(&den_roots, den.leading());
        }
    }

    // monic denominator
    let lead = den.leading();
    let inv = Complex64::new(1.0, 0.0) / lead;
    Rational { num: num.scale(inv), den: den.scale(inv) }
}

fn rebuild(roots: &[(Complex64, usize)], leading: Complex64) -> Polynomial {
    let expanded: Vec<Complex64> = roots
        .iter()
        .flat_map(|(r, m)| std::iter::repeat(*r).take(*m))
        .collect();
    Polynomial::from_roots(&expanded, leading)
}

// ---------------------------------------------------------------------------
// Schur-class diagnostics
// ---------------------------------------------------------------------------

/// Result of sampling `|r|` over the boundary circle and an interior grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurReport {
    /// max |r| over the boundary grid
    pub boundary_sup: f64,
    /// max |r| over the radial-angular interior grid
    pub interior_max: f64,
    pub grid_size: usize,
    pub is_schur: bool,
}

/// Samples `|r|` on `grid_size` equispaced boundary points and a
/// radial-angular interior grid and flags poles in the closed disk.
/// Total on any input; grids smaller than 64 are widened to 64.
pub fn schur_check(r: &Rational, grid_size: usize) -> SchurReport {
    let grid_size = grid_size.max(64);
    let modulus = |z: Complex64| {
        let d = r.denominator().eval(z).norm();
        let n = r.numerator().eval(z).norm();
        if d == 0.0 {
            f64::INFINITY
        } else {
            n / d
        }
    };

    let mut boundary_sup = 0.0f64;
    for k in 0..grid_size {
        let angle = 2.0 * std::f64::consts::PI * (k as f64) / (grid_size as f64);
        boundary_sup = boundary_sup.max(modulus(Complex64::from_polar(1.0, angle)));
    }

    let rings = (grid_size as f64).sqrt().ceil() as usize;
    let mut interior_max = 0.0f64;
    for i in 0..rings {
        let radius = (i + 1) as f64 / (rings + 1) as f64;
        for j in 0..rings {
            let angle = 2.0 * std::f64::consts::PI * (j as f64) / (rings as f64);
            interior_max = interior_max.max(modulus(Complex64::from_polar(radius, angle)));
        }
    }

    let pole_in_disk = r
        .poles()
        .iter()
        .any(|(p, _)| p.norm() <= 1.0 + POLE_DISK_TOL);

    SchurReport {
        boundary_sup,
        interior_max,
        grid_size,
        is_schur: boundary_sup <= 1.0 + 1e-8 && !pole_in_disk,
    }
}

/// `constant · Π_k (z − zeros[k]) / (1 − conj(zeros[k]) z)`.
pub fn blaschke(zeros: &[Complex64], constant: Complex64) -> Result<Rational, RationalError> {
    if (constant.norm() - 1.0).abs() > 1e-12 {
        return Err(RationalError::NonUnimodularConstant(constant));
    }
    let mut num = Polynomial::constant(constant);
    let mut den = Polynomial::one();
    for &zero in zeros {
        if zero.norm() >= 1.0 {
            return Err(RationalError::ZeroOutsideDisk(zero));
        }
        num = num.mul(&Polynomial::new(vec![-zero, Complex64::new(1.0, 0.0)]));
        den = den.mul(&Polynomial::new(vec![
            Complex64::new(1.0, 0.0),
            -zero.conj(),
        ]));
    }
    Rational::new(num, den)
}
