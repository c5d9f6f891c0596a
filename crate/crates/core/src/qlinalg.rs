//! Small dense complex linear algebra: state vectors, orthogonal projectors,
//! spectral families, the Born rule and collapse.
//!
//! Everything here is sized for the handful of dimensions the concept models
//! need (three, occasionally up to six), so operators are plain row-major
//! `Vec`s and every product is the textbook triple loop.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type ComplexScalar = Complex64;

/// Tolerance for structural checks: hermiticity, idempotency, commutation,
/// normalization and spectral-family closure.
pub const STRUCTURAL_TOL: f64 = 1e-10;

/// Tolerance for pure arithmetic identities (round trips, global phase).
pub const ARITHMETIC_TOL: f64 = 1e-12;

/// Orthogonality tolerance demanded by [`superpose`].
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("vector has zero norm and cannot be normalized")]
    DegenerateState,
    #[error("operator is not an orthogonal projector")]
    NotProjector,
    #[error("operator is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("state is not a unit vector (norm^2 = {0})")]
    NotUnit(f64),
    #[error("states are not orthogonal (|<a|b>| = {0})")]
    NotOrthogonal(f64),
    #[error("outcome has zero probability for this state")]
    ImpossibleOutcome,
    #[error("empty vector or operator")]
    Empty,
}

/// A vector in `C^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    components: Vec<ComplexScalar>,
}

impl StateVector {
    pub fn new(components: Vec<ComplexScalar>) -> Result<Self, LinalgError> {
        if components.is_empty() {
            return Err(LinalgError::Empty);
        }
        Ok(Self { components })
    }

    pub fn from_real(components: &[f64]) -> Result<Self, LinalgError> {
        Self::new(components.iter().map(|&x| ComplexScalar::new(x, 0.0)).collect())
    }

    /// The `index`-th canonical basis vector of `C^dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dimension {dim}");
        let mut components = vec![ComplexScalar::new(0.0, 0.0); dim];
        components[index] = ComplexScalar::new(1.0, 0.0);
        Self { components }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[ComplexScalar] {
        &self.components
    }

    pub fn norm_sqr(&self) -> f64 {
        self.components.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_unit(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= STRUCTURAL_TOL
    }

    pub fn scale(&self, factor: ComplexScalar) -> Self {
        Self {
            components: self.components.iter().map(|&c| c * factor).collect(),
        }
    }

    /// Multiplies by `e^{i theta}`.
    pub fn with_phase(&self, theta_radians: f64) -> Self {
        self.scale(ComplexScalar::from_polar(1.0, theta_radians))
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, LinalgError> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Largest componentwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, LinalgError> {
        check_dims(self.dim(), other.dim())?;
        Ok(self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// A square `d x d` complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Operator {
    dim: usize,
    entries: Vec<ComplexScalar>,
}

impl Operator {
    pub fn new(dim: usize, entries: Vec<ComplexScalar>) -> Result<Self, LinalgError> {
        if dim == 0 {
            return Err(LinalgError::Empty);
        }
        if entries.len() != dim * dim {
            return Err(LinalgError::NotSquare {
                rows: dim,
                cols: entries.len() / dim,
            });
        }
        Ok(Self { dim, entries })
    }

    /// Builds an operator from rows; every row must have as many entries as
    /// there are rows.
    pub fn from_rows(rows: &[Vec<ComplexScalar>]) -> Result<Self, LinalgError> {
        let dim = rows.len();
        if dim == 0 {
            return Err(LinalgError::Empty);
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(LinalgError::NotSquare {
                rows: dim,
                cols: bad.len(),
            });
        }
        Ok(Self {
            dim,
            entries: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let rows: Vec<Vec<ComplexScalar>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| ComplexScalar::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut entries = vec![ComplexScalar::new(0.0, 0.0); dim * dim];
        for (i, &d) in diag.iter().enumerate() {
            entries[i * dim + i] = ComplexScalar::new(d, 0.0);
        }
        Self { dim, entries }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn zero(dim: usize) -> Self {
        Self::diagonal(&vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> ComplexScalar {
        self.entries[row * self.dim + col]
    }

    pub fn diagonal_entries(&self) -> Vec<ComplexScalar> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut entries = Vec::with_capacity(d * d);
        for r in 0..d {
            for c in 0..d {
                entries.push(self.get(c, r).conj());
            }
        }
        Self { dim: d, entries }
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, LinalgError> {
        check_dims(self.dim, other.dim)?;
        let d = self.dim;
        let mut entries = vec![ComplexScalar::new(0.0, 0.0); d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.get(r, k);
                if a == ComplexScalar::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..d {
                    entries[r * d + c] += a * other.get(k, c);
                }
            }
        }
        Ok(Self { dim: d, entries })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, LinalgError> {
        check_dims(self.dim, other.dim)?;
        Ok(Self {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, LinalgError> {
        check_dims(self.dim, other.dim)?;
        Ok(Self {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        })
    }

    /// `1 - self`.
    pub fn complement(&self) -> Self {
        Self::identity(self.dim) - self
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector, LinalgError> {
        check_dims(self.dim, v.dim())?;
        let d = self.dim;
        let components = (0..d)
            .map(|r| (0..d).map(|c| self.get(r, c) * v.components[c]).sum::<ComplexScalar>())
            .collect();
        Ok(StateVector { components })
    }

    /// Largest entry modulus, `max |a_ij|`.
    pub fn max_norm(&self) -> f64 {
        self.entries.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `max |self_ij - other_ij|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, LinalgError> {
        Ok(self.checked_sub(other)?.max_norm())
    }
}

impl Add<&Operator> for &Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        self.checked_add(rhs).expect("operator dimensions differ")
    }
}

impl Sub<&Operator> for Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        self.checked_sub(rhs).expect("operator dimensions differ")
    }
}

impl Mul<&Operator> for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        self.checked_mul(rhs).expect("operator dimensions differ")
    }
}

/// Mutually orthogonal projectors summing to the identity: the outcomes of
/// one measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFamily {
    pub projectors: Vec<Operator>,
}

impl SpectralFamily {
    pub fn new(projectors: Vec<Operator>) -> Self {
        Self { projectors }
    }

    /// The two-outcome family `{m, 1 - m}`.
    pub fn yes_no(m: &Operator) -> Self {
        Self::new(vec![m.clone(), m.complement()])
    }
}

fn check_dims(left: usize, right: usize) -> Result<(), LinalgError> {
    if left == right {
        Ok(())
    } else {
        Err(LinalgError::DimensionMismatch { left, right })
    }
}

/// `<bra|ket>`: anti-linear in the bra, linear in the ket.
pub fn inner_product(bra: &StateVector, ket: &StateVector) -> Result<ComplexScalar, LinalgError> {
    check_dims(bra.dim(), ket.dim())?;
    Ok(bra
        .components
        .iter()
        .zip(&ket.components)
        .map(|(b, k)| b.conj() * k)
        .sum())
}

/// `<bra|op|ket>`.
pub fn matrix_element(bra: &StateVector, op: &Operator, ket: &StateVector) -> Result<ComplexScalar, LinalgError> {
    inner_product(bra, &op.apply(ket)?)
}

pub fn normalize(v: &StateVector) -> Result<StateVector, LinalgError> {
    let norm = v.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(LinalgError::DegenerateState);
    }
    Ok(v.scale(ComplexScalar::new(1.0 / norm, 0.0)))
}

/// `(a + b) / sqrt(2)` for orthogonal unit vectors `a` and `b`.
pub fn superpose(a: &StateVector, b: &StateVector) -> Result<StateVector, LinalgError> {
    check_dims(a.dim(), b.dim())?;
    for v in [a, b] {
        if (v.norm_sqr() - 1.0).abs() > ORTHOGONALITY_TOL {
            return Err(LinalgError::NotUnit(v.norm_sqr()));
        }
    }
    let overlap = inner_product(a, b)?.norm();
    if overlap > ORTHOGONALITY_TOL {
        return Err(LinalgError::NotOrthogonal(overlap));
    }
    Ok(a.checked_add(b)?
        .scale(ComplexScalar::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)))
}

/// Hermitian and idempotent, entrywise within [`STRUCTURAL_TOL`].
pub fn is_projector(m: &Operator) -> bool {
    let hermitian = m.max_abs_diff(&m.adjoint()).is_ok_and(|d| d <= STRUCTURAL_TOL);
    hermitian
        && m.checked_mul(m)
            .and_then(|sq| sq.max_abs_diff(m))
            .is_ok_and(|d| d <= STRUCTURAL_TOL)
}

/// Commutator residual `max |(MN - NM)_ij|`.
pub fn commutator_norm(m: &Operator, n: &Operator) -> Result<f64, LinalgError> {
    m.checked_mul(n)?.max_abs_diff(&n.checked_mul(m)?)
}

pub fn commutes(m: &Operator, n: &Operator) -> bool {
    commutator_norm(m, n).is_ok_and(|r| r <= STRUCTURAL_TOL)
}

pub fn validate_spectral_family(family: &SpectralFamily) -> bool {
    let Some(first) = family.projectors.first() else {
        return false;
    };
    let dim = first.dim();
    if family.projectors.iter().any(|p| p.dim() != dim || !is_projector(p)) {
        return false;
    }
    for (i, p) in family.projectors.iter().enumerate() {
        for q in &family.projectors[i + 1..] {
            if (p * q).max_norm() > STRUCTURAL_TOL {
                return false;
            }
        }
    }
    let sum = family.projectors.iter().fold(Operator::zero(dim), |acc, p| &acc + p);
    sum.max_abs_diff(&Operator::identity(dim))
        .is_ok_and(|d| d <= STRUCTURAL_TOL)
}

/// Born probability `<A|M|A> = ||M|A>||^2` of the outcome `m`.
pub fn born_probability(state: &StateVector, m: &Operator) -> Result<f64, LinalgError> {
    check_dims(state.dim(), m.dim())?;
    if !state.is_unit() {
        return Err(LinalgError::NotUnit(state.norm_sqr()));
    }
    if !is_projector(m) {
        return Err(LinalgError::NotProjector);
    }
    Ok(m.apply(state)?.norm_sqr())
}

/// Post-measurement state `M|A> / ||M|A>||`.
pub fn collapse(state: &StateVector, m: &Operator) -> Result<StateVector, LinalgError> {
    check_dims(state.dim(), m.dim())?;
    if !state.is_unit() {
        return Err(LinalgError::NotUnit(state.norm_sqr()));
    }
    if !is_projector(m) {
        return Err(LinalgError::NotProjector);
    }
    let projected = m.apply(state)?;
    if projected.norm() <= STRUCTURAL_TOL {
        return Err(LinalgError::ImpossibleOutcome);
    }
    normalize(&projected)
}
