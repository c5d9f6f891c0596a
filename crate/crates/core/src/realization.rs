//! Explicit `C^3` models of a concept pair.
//!
//! The decision measurement is `M = diag(1, 0, 0)` and the item context is
//! `N = diag(1, 1, 0)`. For fitted `(n, n', phi)`:
//!
//! ```text
//! |A> = (n sqrt(mu_a), n sqrt(1 - mu_a), sqrt(1 - n^2))
//! |B> = e^{i phi} (n' sqrt(mu_b), -n' sqrt(1 - mu_b), tau sqrt(1 - n'^2))
//! ```
//!
//! with `tau = +1` when `r > 0` and `-1` otherwise, which makes `<A|B> = 0`
//! exactly when the `n`/`n'` constraint holds. Membership weights are then
//! read off through collapse by `N` followed by the Born rule for `M`; the
//! closed-form prediction in [`crate::interference_fit`] is never consulted,
//! which is what makes this module an independent check of it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classicality::MembershipTriple;
use crate::interference_fit::{compute_r, FitError, FitParameters, CONSTRAINT_TOL};
use crate::qlinalg::{
    born_probability, collapse, commutator_norm, inner_product, is_projector, superpose, ComplexScalar, LinalgError,
    Operator, StateVector, ORTHOGONALITY_TOL, STRUCTURAL_TOL,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RealizationError {
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error("parameter r = {given} does not match the weights (expected {expected})")]
    RMismatch { given: f64, expected: f64 },
    #[error("context projector annihilates the {0:?} state")]
    ImpossibleContext(Target),
    #[error("model invariant violated: {0}")]
    InvalidModel(&'static str),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    A,
    B,
    Combined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptPairModel {
    pub vec_a: StateVector,
    pub vec_b: StateVector,
    /// Decision ("is a member") projector.
    pub m_proj: Operator,
    /// Item-context projector.
    pub n_proj: Operator,
    pub phi_degrees: f64,
}

impl ConceptPairModel {
    /// Assembles a model from parts, checking unit length, orthogonality,
    /// projector structure and commutation.
    pub fn new(
        vec_a: StateVector,
        vec_b: StateVector,
        m_proj: Operator,
        n_proj: Operator,
        phi_degrees: f64,
    ) -> Result<Self, RealizationError> {
        let model = Self {
            vec_a,
            vec_b,
            m_proj,
            n_proj,
            phi_degrees,
        };
        let r = model.residuals()?;
        if r.unit > STRUCTURAL_TOL {
            return Err(RealizationError::InvalidModel("concept states are not unit vectors"));
        }
        if r.orthogonality > ORTHOGONALITY_TOL {
            return Err(RealizationError::InvalidModel("concept states are not orthogonal"));
        }
        if !is_projector(&model.m_proj) || !is_projector(&model.n_proj) {
            return Err(RealizationError::InvalidModel("M or N is not a projector"));
        }
        if r.commutation > STRUCTURAL_TOL {
            return Err(RealizationError::InvalidModel("M and N do not commute"));
        }
        Ok(model)
    }

    /// `(|A> + |B>) / sqrt(2)`, the state of the combined concept.
    pub fn combined_state(&self) -> Result<StateVector, LinalgError> {
        superpose(&self.vec_a, &self.vec_b)
    }

    pub fn state(&self, target: Target) -> Result<StateVector, LinalgError> {
        match target {
            Target::A => Ok(self.vec_a.clone()),
            Target::B => Ok(self.vec_b.clone()),
            Target::Combined => self.combined_state(),
        }
    }

    pub fn residuals(&self) -> Result<StructuralResiduals, LinalgError> {
        Ok(StructuralResiduals {
            unit: (self.vec_a.norm_sqr() - 1.0)
                .abs()
                .max((self.vec_b.norm_sqr() - 1.0).abs()),
            orthogonality: inner_product(&self.vec_a, &self.vec_b)?.norm(),
            commutation: commutator_norm(&self.m_proj, &self.n_proj)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructuralResiduals {
    /// `max | ||v||^2 - 1 |` over both concept states.
    pub unit: f64,
    /// `|<A|B>|`.
    pub orthogonality: f64,
    /// `max |(MN - NM)_ij|`.
    pub commutation: f64,
}

pub fn decision_projector() -> Operator {
    Operator::diagonal(&[1.0, 0.0, 0.0])
}

pub fn context_projector() -> Operator {
    Operator::diagonal(&[1.0, 1.0, 0.0])
}

/// Builds the `C^3` model for fitted parameters and the two component
/// weights.
pub fn build_model(params: &FitParameters, mu_a: f64, mu_b: f64) -> Result<ConceptPairModel, RealizationError> {
    params.check_constraint()?;
    let expected = compute_r(mu_a, mu_b);
    if (params.r - expected).abs() > CONSTRAINT_TOL {
        return Err(RealizationError::RMismatch {
            given: params.r,
            expected,
        });
    }
    let (n, np) = (params.n, params.n_prime);
    let tau = if params.r > 0.0 { 1.0 } else { -1.0 };
    let vec_a = StateVector::from_real(&[n * mu_a.sqrt(), n * (1.0 - mu_a).sqrt(), (1.0 - n * n).max(0.0).sqrt()])?;
    let vec_b = StateVector::from_real(&[
        np * mu_b.sqrt(),
        -np * (1.0 - mu_b).sqrt(),
        tau * (1.0 - np * np).max(0.0).sqrt(),
    ])?
    .scale(ComplexScalar::from_polar(1.0, params.phi_degrees.to_radians()));
    ConceptPairModel::new(
        vec_a,
        vec_b,
        decision_projector(),
        context_projector(),
        params.phi_degrees,
    )
}

/// `<psi|NMN|psi> / <psi|N|psi>`, evaluated as collapse by `N` followed by
/// the Born rule for `M`.
pub fn contextualized_weight(model: &ConceptPairModel, target: Target) -> Result<f64, RealizationError> {
    let psi = model.state(target)?;
    let contextualized = collapse(&psi, &model.n_proj).map_err(|e| match e {
        LinalgError::ImpossibleOutcome => RealizationError::ImpossibleContext(target),
        other => other.into(),
    })?;
    Ok(born_probability(&contextualized, &model.m_proj)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    /// Weights for `A`, `B` and the combination; `None` where the context
    /// annihilates the state.
    pub weights: [Option<f64>; 3],
    pub deviations: [Option<f64>; 3],
    pub residuals: StructuralResiduals,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares a model against measured weights. Structural residuals are held
/// to the fixed module tolerances; `tol` applies to the weights only.
pub fn verify_model(model: &ConceptPairModel, t: &MembershipTriple, tol: f64) -> VerificationReport {
    let measured = [t.mu_a, t.mu_b, t.mu_combined];
    let weights = [Target::A, Target::B, Target::Combined].map(|tgt| contextualized_weight(model, tgt).ok());
    let mut deviations = [None; 3];
    for i in 0..3 {
        deviations[i] = weights[i].map(|w| (w - measured[i]).abs());
    }
    let residuals = model.residuals().unwrap_or(StructuralResiduals {
        unit: f64::INFINITY,
        orthogonality: f64::INFINITY,
        commutation: f64::INFINITY,
    });
    let passed = deviations.iter().all(|d| d.is_some_and(|d| d <= tol))
        && residuals.unit <= STRUCTURAL_TOL
        && residuals.orthogonality <= ORTHOGONALITY_TOL
        && residuals.commutation <= STRUCTURAL_TOL;
    VerificationReport {
        weights,
        deviations,
        residuals,
        tolerance: tol,
        passed,
    }
}
