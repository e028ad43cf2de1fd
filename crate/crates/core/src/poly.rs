//! Dense complex polynomials in one variable, plus a simultaneous root
//! finder (Aberth-Ehrlich) with multiplicity-aware cluster polishing.
//!
//! Coefficients are stored in ascending degree order. The zero polynomial
//! is represented by a single zero coefficient.

use num_complex::Complex64;
use thiserror::Error;

/// Hard cap on polynomial degree; guards runaway growth from repeated
/// arithmetic without normalization.
pub const DEGREE_CAP: usize = 4096;

/// Roots of numerator and denominator closer than this are treated as a
/// common factor and cancelled during rational normalization.
pub const CANCEL_TOL: f64 = 1e-9;

/// Radius used to merge root approximations into a multiple-root cluster.
/// A numerical m-fold root scatters its approximations on a ring of radius
/// roughly eps^(1/m); 5e-4 covers multiplicities up to four at desk scale
/// while staying well below the separation of distinct roots in practice.
const CLUSTER_RADIUS: f64 = 5e-4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("polynomial degree {0} exceeds cap {DEGREE_CAP}")]
    DegreeCapExceeded(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl Polynomial {
    /// Builds a polynomial from ascending coefficients, trimming exactly-zero
    /// leading terms.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Polynomial { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![Complex64::ZERO] }
    }

    pub fn one() -> Self {
        Polynomial { coeffs: vec![c(1.0)] }
    }

    pub fn constant(value: Complex64) -> Self {
        Polynomial::new(vec![value])
    }

    /// The monomial `z`.
    pub fn identity() -> Self {
        Polynomial { coeffs: vec![Complex64::ZERO, c(1.0)] }
    }

    /// `leading · Π_k (z − roots[k])`, with multiple roots repeated.
    pub fn from_roots(roots: &[Complex64], leading: Complex64) -> Self {
        let mut p = Polynomial::constant(leading);
        for &r in roots {
            p = p.mul(&Polynomial::new(vec![-r, c(1.0)]));
        }
        p
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && *self.coeffs.last().unwrap() == Complex64::ZERO {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(Complex64::ZERO);
        }
    }

    /// Drops leading coefficients below `rel_tol` times the largest
    /// coefficient magnitude. Used by rational normalization to remove
    /// round-off residue that would otherwise fabricate spurious far-away
    /// roots.
    pub fn trim_relative(&self, rel_tol: f64) -> Polynomial {
        let scale = self.max_coeff_norm();
        if scale == 0.0 {
            return Polynomial::zero();
        }
        let mut coeffs = self.coeffs.clone();
        while coeffs.len() > 1 && coeffs.last().unwrap().norm() <= rel_tol * scale {
            coeffs.pop();
        }
        Polynomial::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(Complex64::ZERO)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|x| *x == Complex64::ZERO)
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().unwrap()
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::ZERO, |acc, &ck| acc * z + ck)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial::zero();
        }
        Polynomial::new(
            (1..self.coeffs.len())
                .map(|k| self.coeffs[k] * c(k as f64))
                .collect(),
        )
    }

    pub fn derivative_n(&self, order: usize) -> Polynomial {
        let mut p = self.clone();
        for _ in 0..order {
            p = p.derivative();
        }
        p
    }

    /// Value of the `order`-th derivative at `z` (not divided by factorial).
    pub fn derivative_at(&self, z: Complex64, order: usize) -> Complex64 {
        self.derivative_n(order).eval(z)
    }

    pub fn add(&self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }

    pub fn sub(&self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }

    pub fn scale(&self, factor: Complex64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|&x| x * factor).collect())
    }

    pub fn mul(&self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Complex64::ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    /// Coefficient-wise conjugation: `p#(z) = Σ conj(p_k) z^k`, so that
    /// `conj(p(z)) = p#(conj(z))`.
    pub fn conj_coeffs(&self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|x| x.conj()).collect())
    }

    pub fn check_degree_cap(&self) -> Result<(), PolyError> {
        if self.degree() > DEGREE_CAP {
            return Err(PolyError::DegreeCapExceeded(self.degree()));
        }
        Ok(())
    }

    /// All roots with multiplicity, as `(location, multiplicity)` pairs.
    /// Locations of multiple roots are polished to full accuracy via Newton
    /// on the appropriate derivative.
    pub fn clustered_roots(&self) -> Vec<(Complex64, usize)> {
        cluster_roots(self, &raw_roots(self))
    }

    /// All roots, one entry per multiplicity, unpolished.
    pub fn raw_roots(&self) -> Vec<Complex64> {
        raw_roots(self)
    }
}

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

/// Aberth-Ehrlich simultaneous iteration. Returns `degree` approximations;
/// multiple roots come back as a tight cloud around the true location.
fn raw_roots(p: &Polynomial) -> Vec<Complex64> {
    let mut coeffs: Vec<Complex64> = p.coeffs.clone();
    while coeffs.len() > 1 && coeffs.last().unwrap() == &Complex64::ZERO {
        coeffs.pop();
    }
    if coeffs.len() <= 1 {
        return Vec::new();
    }

    // peel off exact roots at the origin first
    let mut zero_roots = 0;
    while coeffs.len() > 1 && coeffs[0] == Complex64::ZERO {
        coeffs.remove(0);
        zero_roots += 1;
    }

    let d = coeffs.len() - 1;
    let mut roots: Vec<Complex64> = Vec::with_capacity(d + zero_roots);
    roots.extend(std::iter::repeat(Complex64::ZERO).take(zero_roots));
    if d == 0 {
        return roots;
    }
    if d == 1 {
        roots.push(-coeffs[0] / coeffs[1]);
        return roots;
    }

    let lead = *coeffs.last().unwrap();
    let monic: Vec<Complex64> = coeffs.iter().map(|&x| x / lead).collect();
    let poly = Polynomial { coeffs: monic.clone() };
    let deriv = poly.derivative();

    // initial guesses on the Cauchy bound circle, phase offset breaks symmetry
    let radius = 1.0 + monic.iter().take(d).map(|x| x.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * (k as f64) / (d as f64) + 0.7;
            Complex64::from_polar(radius.min(4.0 + 0.1 * k as f64), angle)
        })
        .collect();

    let mut converged = vec![false; d];
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..d {
            if converged[i] {
                continue;
            }
            let pv = poly.eval(z[i]);
            // adaptive stop: |p(z)| at round-off level for this argument
            let scale: f64 = monic
                .iter()
                .enumerate()
                .map(|(k, ck)| ck.norm() * z[i].norm().powi(k as i32))
                .sum();
            if pv.norm() <= 1e-15 * scale.max(1e-300) {
                converged[i] = true;
                continue;
            }
            let dv = deriv.eval(z[i]);
            let newton = if dv.norm() > 0.0 {
                pv / dv
            } else {
                Complex64::new(1e-8, 1e-8)
            };
            let mut repulsion = Complex64::ZERO;
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    let diff = z[i] - zj;
                    if diff.norm() > 1e-300 {
                        repulsion += Complex64::new(1.0, 0.0) / diff;
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * repulsion;
            let step = if denom.norm() > 1e-300 { newton / denom } else { newton };
            z[i] -= step;
            moved = moved.max(step.norm() / (1.0 + z[i].norm()));
        }
        if moved <= 1e-15 && converged.iter().all(|&x| x) {
            break;
        }
        if moved <= 5e-16 {
            break;
        }
    }

    roots.extend(z);
    roots
}

/// Groups raw root approximations into clusters and polishes each cluster
/// center. A size-m cluster is refined by Newton iteration on the (m−1)-st
/// derivative, which sees the m-fold root as simple.
fn cluster_roots(p: &Polynomial, raw: &[Complex64]) -> Vec<(Complex64, usize)> {
    let n = raw.len();
    if n == 0 {
        return Vec::new();
    }
    // connected components under the cluster radius
    let mut assign: Vec<Option<usize>> = vec![None; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if assign[i].is_some() {
            continue;
        }
        let id = clusters.len();
        let mut stack = vec![i];
        assign[i] = Some(id);
        let mut members = Vec::new();
        while let Some(k) = stack.pop() {
            members.push(k);
            for j in 0..n {
                if assign[j].is_none() && (raw[k] - raw[j]).norm() <= CLUSTER_RADIUS {
                    assign[j] = Some(id);
                    stack.push(j);
                }
            }
        }
        clusters.push(members);
    }

    clusters
        .into_iter()
        .map(|members| {
            let m = members.len();
            let mean = members.iter().map(|&k| raw[k]).sum::<Complex64>() / c(m as f64);
            if m == 1 {
                return (mean, 1);
            }
            // polish: the cluster mean is already second-order accurate,
            // Newton on p^(m-1) drives it to round-off
            let q = p.derivative_n(m - 1);
            let qd = q.derivative();
            let mut center = mean;
            for _ in 0..60 {
                let qv = q.eval(center);
                let dv = qd.eval(center);
                if dv.norm() <= 1e-300 {
                    break;
                }
                let step = qv / dv;
                if step.norm() > 10.0 * CLUSTER_RADIUS {
                    // diverging; keep the mean
                    center = mean;
                    break;
                }
                center -= step;
                if step.norm() <= 1e-16 * (1.0 + center.norm()) {
                    break;
                }
            }
            if (center - mean).norm() > 10.0 * CLUSTER_RADIUS {
                center = mean;
            }
            (center, m)
        })
        .collect()
}
