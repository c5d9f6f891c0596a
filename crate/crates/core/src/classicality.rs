//! Kolmogorovian representability and Hampton-style extension checks for a
//! single membership triple.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Connective {
    #[serde(rename = "and")]
    Conjunction,
    #[serde(rename = "or")]
    Disjunction,
}

impl Connective {
    /// The token used in CSV files, `and` / `or`.
    pub fn token(self) -> &'static str {
        match self {
            Connective::Conjunction => "and",
            Connective::Disjunction => "or",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token.trim().to_ascii_lowercase().as_str() {
            "and" => Some(Connective::Conjunction),
            "or" => Some(Connective::Disjunction),
            _ => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassicalityError {
    #[error("expected a {expected:?} triple, got {actual:?}")]
    WrongConnective { expected: Connective, actual: Connective },
    #[error("weight {field} = {value} is outside [0, 1]")]
    WeightOutOfRange { field: &'static str, value: f64 },
}

/// Measured membership weights of one item for `A`, `B` and `A and/or B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipTriple {
    pub item: String,
    pub concept_a: String,
    pub concept_b: String,
    pub connective: Connective,
    pub mu_a: f64,
    pub mu_b: f64,
    pub mu_combined: f64,
}

impl MembershipTriple {
    pub fn new(
        item: impl Into<String>,
        concept_a: impl Into<String>,
        concept_b: impl Into<String>,
        connective: Connective,
        mu_a: f64,
        mu_b: f64,
        mu_combined: f64,
    ) -> Result<Self, ClassicalityError> {
        let triple = Self {
            item: item.into(),
            concept_a: concept_a.into(),
            concept_b: concept_b.into(),
            connective,
            mu_a,
            mu_b,
            mu_combined,
        };
        triple.validate()?;
        Ok(triple)
    }

    /// Unlabelled triple, handy for numeric work.
    pub fn bare(connective: Connective, mu_a: f64, mu_b: f64, mu_combined: f64) -> Result<Self, ClassicalityError> {
        Self::new("", "A", "B", connective, mu_a, mu_b, mu_combined)
    }

    pub fn validate(&self) -> Result<(), ClassicalityError> {
        for (field, value) in [
            ("mu_a", self.mu_a),
            ("mu_b", self.mu_b),
            ("mu_combined", self.mu_combined),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ClassicalityError::WeightOutOfRange { field, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtensionClass {
    Classical,
    Overextended,
    DoubleOverextended,
    Underextended,
    DoubleUnderextended,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalityVerdict {
    pub deficit_1: f64,
    pub deficit_2: f64,
    pub kolmogorovian: bool,
    pub extension_class: ExtensionClass,
}

/// A weight as `mantissa / 10^scale`, taken from the shortest decimal string
/// that round-trips to the same `f64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Decimal {
    mantissa: i128,
    scale: u32,
}

/// Widest decimal expansion handled exactly; 10^30 leaves headroom in i128
/// for sums of three weights.
const MAX_EXACT_SCALE: u32 = 30;

impl Decimal {
    fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        let text = format!("{x}");
        let (negative, digits) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text.as_str()),
        };
        let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
        let scale = u32::try_from(frac_part.len()).ok()?;
        if scale > MAX_EXACT_SCALE || int_part.len() > 6 {
            return None;
        }
        let mut mantissa: i128 = 0;
        for b in int_part.bytes().chain(frac_part.bytes()) {
            mantissa = mantissa * 10 + i128::from(b - b'0');
        }
        Some(Self {
            mantissa: if negative { -mantissa } else { mantissa },
            scale,
        })
    }

    fn rescale(self, scale: u32) -> i128 {
        self.mantissa * 10_i128.pow(scale - self.scale)
    }
}

/// Evaluates `sum(coef_i * x_i) + constant` exactly in decimal and rounds
/// the result once to `f64`. Falls back to float arithmetic when some input
/// has no short decimal expansion.
fn exact_linear(terms: &[(i128, f64)], constant: i128) -> f64 {
    let decimals: Option<Vec<Decimal>> = terms.iter().map(|&(_, x)| Decimal::from_f64(x)).collect();
    let Some(decimals) = decimals else {
        return terms.iter().map(|&(c, x)| c as f64 * x).sum::<f64>() + constant as f64;
    };
    let scale = decimals.iter().map(|d| d.scale).max().unwrap_or(0);
    let total: i128 = terms
        .iter()
        .zip(&decimals)
        .map(|(&(c, _), d)| c * d.rescale(scale))
        .sum::<i128>()
        + constant * 10_i128.pow(scale);
    if scale <= 22 && total.unsigned_abs() < (1u128 << 53) {
        // both operands exact, so the quotient is correctly rounded
        total as f64 / 10f64.powi(scale as i32)
    } else {
        let s = format!("{total}e-{scale}");
        s.parse().expect("integer mantissa with exponent parses")
    }
}

fn expect(t: &MembershipTriple, expected: Connective) -> Result<(), ClassicalityError> {
    if t.connective == expected {
        Ok(())
    } else {
        Err(ClassicalityError::WrongConnective {
            expected,
            actual: t.connective,
        })
    }
}

/// Deficits are exact on the decimal values of the weights, so `0.90 - 0.81`
/// is `0.09` and boundary cases land exactly on zero.
///
/// `(mu(A and B) - min, mu(A) + mu(B) - mu(A and B) - 1)`; both must be
/// `<= 0` for a classical probability model to exist.
pub fn conjunction_deficits(t: &MembershipTriple) -> Result<(f64, f64), ClassicalityError> {
    expect(t, Connective::Conjunction)?;
    Ok((
        exact_linear(&[(1, t.mu_combined), (-1, t.mu_a.min(t.mu_b))], 0),
        exact_linear(&[(1, t.mu_a), (1, t.mu_b), (-1, t.mu_combined)], -1),
    ))
}

/// `(max - mu(A or B), mu(A) + mu(B) - mu(A or B))`; classical iff the first
/// is `<= 0` and the second `>= 0`.
pub fn disjunction_deficits(t: &MembershipTriple) -> Result<(f64, f64), ClassicalityError> {
    expect(t, Connective::Disjunction)?;
    Ok((
        exact_linear(&[(1, t.mu_a.max(t.mu_b)), (-1, t.mu_combined)], 0),
        exact_linear(&[(1, t.mu_a), (1, t.mu_b), (-1, t.mu_combined)], 0),
    ))
}

/// Deficits plus extension class. Comparisons are strict; ties are
/// `Classical`.
pub fn classify(t: &MembershipTriple) -> ClassicalityVerdict {
    let lo = t.mu_a.min(t.mu_b);
    let hi = t.mu_a.max(t.mu_b);
    let x = t.mu_combined;
    match t.connective {
        Connective::Conjunction => {
            let (deficit_1, deficit_2) = conjunction_deficits(t).expect("connective checked");
            let extension_class = if x > hi {
                ExtensionClass::DoubleOverextended
            } else if x > lo {
                ExtensionClass::Overextended
            } else {
                ExtensionClass::Classical
            };
            ClassicalityVerdict {
                deficit_1,
                deficit_2,
                kolmogorovian: deficit_1 <= 0.0 && deficit_2 <= 0.0,
                extension_class,
            }
        }
        Connective::Disjunction => {
            let (deficit_1, deficit_2) = disjunction_deficits(t).expect("connective checked");
            let extension_class = if x < lo {
                ExtensionClass::DoubleUnderextended
            } else if x < hi {
                ExtensionClass::Underextended
            } else {
                ExtensionClass::Classical
            };
            ClassicalityVerdict {
                deficit_1,
                deficit_2,
                kolmogorovian: deficit_1 <= 0.0 && deficit_2 >= 0.0,
                extension_class,
            }
        }
    }
}
