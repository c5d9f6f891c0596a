//! State-context-property description of a conceptual entity: labelled
//! states, labelled contexts, and for each `(state, context)` pair a
//! probability distribution over the states the context can produce.
//!
//! A membership weight is the probability of passing through two contexts
//! in a row: the item context `e_X` takes the concept from `p_A` to `p_X`,
//! and the decision context `e` then lands on the "member" state `p`.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classicality::{ClassicalityError, MembershipTriple};
use crate::qlinalg::{born_probability, LinalgError, SpectralFamily, StateVector};

pub const DISTRIBUTION_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScopError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown context `{0}`")]
    UnknownContext(String),
    #[error("label `{0}` declared twice")]
    DuplicateLabel(String),
    #[error("no transition defined for state `{source_state}` under context `{context}`")]
    UndefinedTransition { source_state: String, context: String },
    #[error("distribution for (`{source_state}`, `{context}`) is invalid: {reason}")]
    InvalidDistribution {
        source_state: String,
        context: String,
        reason: String,
    },
    #[error("sample count must be positive")]
    EmptySample,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Weights(#[from] ClassicalityError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScopEntity {
    states: Vec<String>,
    contexts: Vec<String>,
    /// `(source, context) -> [(target, probability)]`, indices into the
    /// label tables.
    transitions: BTreeMap<(usize, usize), Vec<(usize, f64)>>,
}

/// `(source, context, [(target, probability)])` by label.
type LabelledTransition = (String, String, Vec<(String, f64)>);

#[derive(Debug, Default, Clone)]
pub struct ScopEntityBuilder {
    states: Vec<String>,
    contexts: Vec<String>,
    transitions: Vec<LabelledTransition>,
}

impl ScopEntityBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(mut self, label: impl Into<String>) -> Self {
        self.states.push(label.into());
        self
    }

    pub fn context(mut self, label: impl Into<String>) -> Self {
        self.contexts.push(label.into());
        self
    }

    pub fn transition<S: Into<String>>(
        mut self,
        source: impl Into<String>,
        context: impl Into<String>,
        distribution: impl IntoIterator<Item = (S, f64)>,
    ) -> Self {
        self.transitions.push((
            source.into(),
            context.into(),
            distribution.into_iter().map(|(s, p)| (s.into(), p)).collect(),
        ));
        self
    }

    /// Deterministic context: `source` goes to `target` with certainty.
    pub fn deterministic(
        self,
        source: impl Into<String>,
        context: impl Into<String>,
        target: impl Into<String>,
    ) -> Self {
        self.transition(source, context, [(target.into(), 1.0)])
    }

    /// Transition whose outcome probabilities are Born probabilities of
    /// `state` for each projector of `family`, outcome `k` landing on
    /// `targets[k]`.
    pub fn born_transition(
        self,
        source: impl Into<String>,
        context: impl Into<String>,
        state: &StateVector,
        family: &SpectralFamily,
        targets: &[&str],
    ) -> Result<Self, ScopError> {
        let probabilities = family
            .projectors
            .iter()
            .map(|p| born_probability(state, p))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.transition(source, context, targets.iter().copied().zip(probabilities)))
    }

    pub fn build(self) -> Result<ScopEntity, ScopError> {
        fn index(labels: &[String]) -> Result<BTreeMap<&str, usize>, ScopError> {
            let mut map = BTreeMap::new();
            for (i, l) in labels.iter().enumerate() {
                if map.insert(l.as_str(), i).is_some() {
                    return Err(ScopError::DuplicateLabel(l.clone()));
                }
            }
            Ok(map)
        }
        let state_ix = index(&self.states)?;
        let context_ix = index(&self.contexts)?;
        let lookup_state = |s: &str| {
            state_ix
                .get(s)
                .copied()
                .ok_or_else(|| ScopError::UnknownState(s.to_owned()))
        };

        let mut transitions = BTreeMap::new();
        for (source, context, dist) in &self.transitions {
            let src = lookup_state(source)?;
            let ctx = context_ix
                .get(context.as_str())
                .copied()
                .ok_or_else(|| ScopError::UnknownContext(context.clone()))?;
            let invalid = |reason: String| ScopError::InvalidDistribution {
                source_state: source.clone(),
                context: context.clone(),
                reason,
            };
            let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
            for (target, p) in dist {
                if !(p.is_finite() && *p >= 0.0) {
                    return Err(invalid(format!("probability {p} for `{target}`")));
                }
                *merged.entry(lookup_state(target)?).or_default() += p;
            }
            let total: f64 = merged.values().sum();
            if (total - 1.0).abs() > DISTRIBUTION_TOL {
                return Err(invalid(format!("probabilities sum to {total}")));
            }
            if transitions.insert((src, ctx), merged.into_iter().collect()).is_some() {
                return Err(invalid("defined twice".to_owned()));
            }
        }
        Ok(ScopEntity {
            states: self.states,
            contexts: self.contexts,
            transitions,
        })
    }
}

/// Outcome counts of repeated context applications, in state declaration
/// order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyTable {
    pub counts: Vec<(String, u64)>,
    pub total: u64,
}

impl FrequencyTable {
    pub fn count(&self, state: &str) -> u64 {
        self.counts.iter().find(|(s, _)| s == state).map_or(0, |(_, c)| *c)
    }

    pub fn relative_frequency(&self, state: &str) -> f64 {
        self.count(state) as f64 / self.total as f64
    }
}

impl ScopEntity {
    pub fn builder() -> ScopEntityBuilder {
        ScopEntityBuilder::new()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn contexts(&self) -> &[String] {
        &self.contexts
    }

    fn state_index(&self, label: &str) -> Result<usize, ScopError> {
        self.states
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| ScopError::UnknownState(label.to_owned()))
    }

    fn context_index(&self, label: &str) -> Result<usize, ScopError> {
        self.contexts
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| ScopError::UnknownContext(label.to_owned()))
    }

    fn distribution(&self, source: &str, context: &str) -> Result<&[(usize, f64)], ScopError> {
        let key = (self.state_index(source)?, self.context_index(context)?);
        self.transitions
            .get(&key)
            .map(Vec::as_slice)
            .ok_or_else(|| ScopError::UndefinedTransition {
                source_state: source.to_owned(),
                context: context.to_owned(),
            })
    }

    /// `mu(target, context, source)`: probability that `context` takes
    /// `source` to `target`.
    pub fn transition_probability(&self, target: &str, context: &str, source: &str) -> Result<f64, ScopError> {
        let t = self.state_index(target)?;
        Ok(self
            .distribution(source, context)?
            .iter()
            .find(|(s, _)| *s == t)
            .map_or(0.0, |(_, p)| *p))
    }

    /// A context is deterministic at `source` when its distribution there is
    /// a point mass.
    pub fn is_deterministic(&self, source: &str, context: &str) -> Result<bool, ScopError> {
        Ok(self
            .distribution(source, context)?
            .iter()
            .any(|(_, p)| (p - 1.0).abs() <= DISTRIBUTION_TOL))
    }

    /// `mu(p_x, e_x, p_a) * mu(p, e, p_x)`.
    pub fn membership_weight(&self, p_a: &str, e_x: &str, p_x: &str, e: &str, p: &str) -> Result<f64, ScopError> {
        Ok(self.transition_probability(p_x, e_x, p_a)? * self.transition_probability(p, e, p_x)?)
    }

    /// Applies `context` to `source` `count` times with a ChaCha8 stream
    /// seeded from `seed`.
    pub fn sample_outcomes(
        &self,
        source: &str,
        context: &str,
        count: u64,
        seed: u64,
    ) -> Result<FrequencyTable, ScopError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(source, context, count, &mut rng)
    }

    fn sample_with(
        &self,
        source: &str,
        context: &str,
        count: u64,
        rng: &mut ChaCha8Rng,
    ) -> Result<FrequencyTable, ScopError> {
        if count == 0 {
            return Err(ScopError::EmptySample);
        }
        let dist = self.distribution(source, context)?;
        let sampler = WeightedIndex::new(dist.iter().map(|(_, p)| *p)).map_err(|e| ScopError::InvalidDistribution {
            source_state: source.to_owned(),
            context: context.to_owned(),
            reason: e.to_string(),
        })?;
        let mut counts = vec![0u64; self.states.len()];
        for _ in 0..count {
            counts[dist[sampler.sample(rng)].0] += 1;
        }
        Ok(FrequencyTable {
            counts: self.states.iter().cloned().zip(counts).collect(),
            total: count,
        })
    }
}

/// Labels used by [`item_entity`].
pub mod labels {
    pub const CONCEPTS: [&str; 3] = ["A", "B", "A*B"];
    pub const CONTEXTUALIZED: [&str; 3] = ["A|X", "B|X", "A*B|X"];
    pub const ITEM_CONTEXT: &str = "item";
    pub const DECISION: &str = "decide";
    pub const YES: &str = "yes";
    pub const NO: &str = "no";
}

/// Entity for one item judged against `A`, `B` and their combination: the
/// item context moves each concept deterministically to its contextualized
/// state, and the decision context answers "yes" with the triple's weight.
pub fn item_entity(t: &MembershipTriple) -> Result<ScopEntity, ScopError> {
    use labels::*;
    t.validate()?;
    let weights = [t.mu_a, t.mu_b, t.mu_combined];
    let mut b = ScopEntity::builder()
        .context(ITEM_CONTEXT)
        .context(DECISION)
        .state(YES)
        .state(NO);
    for i in 0..3 {
        b = b
            .state(CONCEPTS[i])
            .state(CONTEXTUALIZED[i])
            .deterministic(CONCEPTS[i], ITEM_CONTEXT, CONTEXTUALIZED[i])
            .transition(CONTEXTUALIZED[i], DECISION, [(YES, weights[i]), (NO, 1.0 - weights[i])]);
    }
    b.build()
}

/// Simulates `draws` participants per concept for the item behind `t` and
/// returns the triple of observed relative frequencies.
pub fn synthesize_triple(t: &MembershipTriple, draws: u64, seed: u64) -> Result<MembershipTriple, ScopError> {
    use labels::*;
    let entity = item_entity(t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut observed = [0.0; 3];
    for i in 0..3 {
        let table = entity.sample_with(CONTEXTUALIZED[i], DECISION, draws, &mut rng)?;
        observed[i] = table.relative_frequency(YES);
    }
    Ok(MembershipTriple::new(
        t.item.clone(),
        t.concept_a.clone(),
        t.concept_b.clone(),
        t.connective,
        observed[0],
        observed[1],
        observed[2],
    )?)
}
