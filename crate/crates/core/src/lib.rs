//! Interpolation with operator argument in de Branges-Rovnyak spaces.
//!
//! Given a rational Schur-class function `s` and tangential interpolation
//! data `(E, T, x*)`, this crate computes the minimal-norm interpolant in
//! the reproducing kernel Hilbert space with kernel
//! `K_s(z, ζ) = (1 − s(z)·conj(s(ζ))) / (1 − z·conj(ζ))`, parametrizes all
//! solutions through a J-inner 2×2 coefficient matrix, and numerically
//! certifies the structural identities the construction rests on (Stein
//! equation, kernel coupling identity, boundary J-unitarity, isometric
//! multiplication, norm additivity).
//!
//! Pipeline: [`realization`] builds the data set, [`pick`] derives the Pick
//! matrix and solvability verdict, [`theta`] constructs the coefficient
//! matrix, [`solver`] assembles interpolants, and [`rkhs`] provides the
//! kernel-side inner-product engine and verifiers. [`numerics`] and
//! [`rational`] carry the dense complex linear algebra and exact rational
//! arithmetic underneath.
//!
//! All values are immutable after construction and all operations are pure,
//! so everything here can be shared freely across threads.

pub mod numerics;
pub mod pick;
pub mod poly;
pub mod rational;
pub mod realization;
pub mod rkhs;
pub mod sampling;
pub mod solver;
pub mod theta;

pub use num_complex::Complex64;

/// Shorthand used throughout: dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
/// Shorthand used throughout: dense complex column vector.
pub type CVector = nalgebra::DVector<Complex64>;
/// Shorthand used throughout: dense complex row vector.
pub type CRow = nalgebra::RowDVector<Complex64>;
