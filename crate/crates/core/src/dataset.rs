//! CSV ingestion, batch orchestration and report emission.
//!
//! Input schema (UTF-8, `.` decimal separator):
//!
//! ```text
//! item,concept_a,concept_b,connective,mu_a,mu_b,mu_combined
//! Mint,Food,Plant,and,0.87,0.81,0.90
//! ```

use std::collections::HashSet;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classicality::{classify, ClassicalityVerdict, Connective, MembershipTriple};
use crate::interference_fit::{
    compute_r, fit, nprime_from_n, predict_mu, FitError, FitParameters, FitResult, DEFAULT_GRID_STEPS,
};
use crate::realization::{build_model, verify_model, ConceptPairModel, VerificationReport};

pub const COLUMNS: [&str; 7] = [
    "item",
    "concept_a",
    "concept_b",
    "connective",
    "mu_a",
    "mu_b",
    "mu_combined",
];

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// The four items used throughout the tests: Mint, Sunglasses,
/// Refrigerator and TV.
pub const FIXTURE_CSV: &str = include_str!("../data/fixture.csv");
pub const FIXTURE_NAME: &str = "bundled:fixture.csv";

#[derive(Debug, Error)]
pub enum DatasetError {
    /// `row` counts data rows from 1; row 0 is the header.
    #[error("row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },
    #[error("missing header row")]
    MissingHeader,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Fit(#[from] FitError),
}

impl DatasetError {
    fn at(row: usize, column: &str, message: impl Into<String>) -> Self {
        DatasetError::Parse {
            row,
            column: column.to_owned(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub source_name: String,
    pub rows: Vec<MembershipTriple>,
}

impl Dataset {
    pub fn fixture() -> Self {
        parse_dataset(FIXTURE_CSV, FIXTURE_NAME).expect("bundled fixture parses")
    }

    /// Keeps only rows whose item label equals `item`.
    pub fn filter_item(mut self, item: &str) -> Self {
        self.rows.retain(|t| t.item == item);
        self
    }
}

/// Parses CSV text into a validated dataset. Columns are located by header
/// name; extra columns are ignored.
pub fn parse_dataset(text: &str, source_name: &str) -> Result<Dataset, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(DatasetError::MissingHeader);
    }
    let mut positions = [0usize; 7];
    for (slot, name) in positions.iter_mut().zip(COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DatasetError::at(0, name, "column missing from header"))?;
    }

    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| DatasetError::at(row, "*", e.to_string()))?;
        let field = |k: usize| -> Result<&str, DatasetError> {
            record
                .get(positions[k])
                .ok_or_else(|| DatasetError::at(row, COLUMNS[k], "missing value"))
        };
        let connective = Connective::from_token(field(3)?).ok_or_else(|| {
            DatasetError::at(
                row,
                "connective",
                format!("unknown connective `{}`", field(3).unwrap_or("")),
            )
        })?;
        let mut weights = [0.0; 3];
        for (w, k) in weights.iter_mut().zip(4..7) {
            let raw = field(k)?;
            let value: f64 = raw
                .parse()
                .map_err(|_| DatasetError::at(row, COLUMNS[k], format!("malformed number `{raw}`")))?;
            if !(0.0..=1.0).contains(&value) {
                return Err(DatasetError::at(
                    row,
                    COLUMNS[k],
                    format!("weight {value} outside [0, 1]"),
                ));
            }
            *w = value;
        }
        let triple = MembershipTriple {
            item: field(0)?.to_owned(),
            concept_a: field(1)?.to_owned(),
            concept_b: field(2)?.to_owned(),
            connective,
            mu_a: weights[0],
            mu_b: weights[1],
            mu_combined: weights[2],
        };
        let key = (
            triple.item.clone(),
            triple.concept_a.clone(),
            triple.concept_b.clone(),
            connective,
        );
        if !seen.insert(key) {
            return Err(DatasetError::at(
                row,
                "item",
                format!("duplicate row for `{}`", triple.item),
            ));
        }
        rows.push(triple);
    }
    Ok(Dataset {
        source_name: source_name.to_owned(),
        rows,
    })
}

/// Writes rows in the input schema. Numbers use the shortest
/// representation that reads back to the same value.
pub fn write_dataset<W: Write>(rows: &[MembershipTriple], out: W) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for t in rows {
        w.write_record([
            t.item.as_str(),
            t.concept_a.as_str(),
            t.concept_b.as_str(),
            t.connective.token(),
            &t.mu_a.to_string(),
            &t.mu_b.to_string(),
            &t.mu_combined.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// How far down the audit, fit, realize, verify chain to go.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Audit,
    Fit,
    Realize,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    pub stage: Stage,
    pub grid_steps: usize,
    pub tolerance: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            stage: Stage::Verify,
            grid_steps: DEFAULT_GRID_STEPS,
            tolerance: 1e-3,
        }
    }
}

/// Flattened view of a [`ConceptPairModel`] for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    /// `[re, im]` per component.
    pub vec_a: Vec<[f64; 2]>,
    pub vec_b: Vec<[f64; 2]>,
    pub phi_degrees: f64,
    pub m_diagonal: Vec<f64>,
    pub n_diagonal: Vec<f64>,
}

impl From<&ConceptPairModel> for ModelSummary {
    fn from(m: &ConceptPairModel) -> Self {
        let parts = |v: &crate::qlinalg::StateVector| v.components().iter().map(|c| [c.re, c.im]).collect();
        let diag = |op: &crate::qlinalg::Operator| op.diagonal_entries().iter().map(|c| c.re).collect();
        Self {
            vec_a: parts(&m.vec_a),
            vec_b: parts(&m.vec_b),
            phi_degrees: m.phi_degrees,
            m_diagonal: diag(&m.m_proj),
            n_diagonal: diag(&m.n_proj),
        }
    }
}

/// One row's results. Stages that were not run, or could not run, are
/// `null` so every report has the same field set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemReport {
    pub triple: MembershipTriple,
    pub verdict: ClassicalityVerdict,
    pub fit: Option<FitResult>,
    pub model: Option<ModelSummary>,
    pub verification: Option<VerificationReport>,
    pub error: Option<String>,
}

impl ItemReport {
    /// A feasible fit that does not reproduce its triple, a model that cannot
    /// be built from it, or a built model that fails verification.
    pub fn invariant_failure(&self) -> bool {
        self.error.is_some() || self.verification.as_ref().is_some_and(|v| !v.passed)
    }
}

fn process_row(t: &MembershipTriple, opts: &PipelineOptions) -> ItemReport {
    let mut report = ItemReport {
        triple: t.clone(),
        verdict: classify(t),
        fit: None,
        model: None,
        verification: None,
        error: None,
    };
    if opts.stage < Stage::Fit {
        return report;
    }
    let fitted = match fit(t, opts.grid_steps) {
        Ok(f) => f,
        Err(e) => {
            report.error = Some(e.to_string());
            return report;
        }
    };
    let params = fitted.params;
    report.fit = Some(fitted);
    let Some(params) = params else {
        return report;
    };
    if opts.stage < Stage::Realize {
        return report;
    }
    let model = match build_model(&params, t.mu_a, t.mu_b) {
        Ok(m) => m,
        Err(e) => {
            report.error = Some(e.to_string());
            return report;
        }
    };
    report.model = Some(ModelSummary::from(&model));
    if opts.stage >= Stage::Verify {
        report.verification = Some(verify_model(&model, t, opts.tolerance));
    }
    report
}

/// Runs every row through the requested stages in parallel. Output order
/// matches input order.
pub fn run_pipeline(d: &Dataset, opts: &PipelineOptions) -> Vec<ItemReport> {
    d.rows.par_iter().map(|t| process_row(t, opts)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub source: String,
    pub tool_version: String,
    pub stage: Stage,
    pub tolerance: f64,
    pub grid_steps: usize,
    /// Over-/under-extension uses strict comparisons; ties count as
    /// classical.
    pub extension_rule: String,
    pub items: Vec<ItemReport>,
}

impl Report {
    pub fn new(d: &Dataset, opts: &PipelineOptions, items: Vec<ItemReport>) -> Self {
        Self {
            source: d.source_name.clone(),
            tool_version: TOOL_VERSION.to_owned(),
            stage: opts.stage,
            tolerance: opts.tolerance,
            grid_steps: opts.grid_steps,
            extension_rule: "strict".to_owned(),
            items,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub phi_degrees: f64,
    /// `None` where the model denominator vanishes.
    pub mu: Option<f64>,
}

/// Samples the predicted combined weight over a uniform `phi` grid on
/// `[0, 180]` degrees.
pub fn emit_curve(mu_a: f64, mu_b: f64, n: f64, samples: usize) -> Result<Vec<CurvePoint>, DatasetError> {
    if samples < 2 {
        return Err(DatasetError::at(0, "samples", "need at least two samples"));
    }
    let r = compute_r(mu_a, mu_b);
    let n_prime = nprime_from_n(n, r)?;
    Ok((0..samples)
        .map(|i| {
            let phi_degrees = 180.0 * i as f64 / (samples - 1) as f64;
            let params = FitParameters {
                n,
                n_prime,
                phi_degrees,
                r,
                connective: Connective::Disjunction,
            };
            CurvePoint {
                phi_degrees,
                mu: predict_mu(mu_a, mu_b, &params).ok(),
            }
        })
        .collect())
}

/// Two-column CSV `phi_degrees,mu`; singular rows carry an empty `mu`.
pub fn write_curve<W: Write>(points: &[CurvePoint], out: W) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["phi_degrees", "mu"])?;
    for p in points {
        w.write_record([
            p.phi_degrees.to_string(),
            p.mu.map(|m| m.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
