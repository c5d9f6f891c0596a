//! The two-concept interference model: forward prediction of the combined
//! membership weight from `(n, n', phi)` and the inverse fit of those
//! parameters from a measured triple.
//!
//! With `s = sqrt(mu_a mu_b)`, `q = sqrt((1 - mu_a)(1 - mu_b))` and `r = q - s`
//! the combined weight is
//!
//! ```text
//!            n^2 mu_a + n'^2 mu_b + 2 n n' s cos(phi)
//! mu_ab = -------------------------------------------
//!             n^2 + n'^2 - 2 n n' r cos(phi)
//! ```
//!
//! subject to `sqrt((1 - n^2)(1 - n'^2)) = n n' |r|`. That leaves one free
//! parameter; [`fit`] resolves it by picking the `n` that needs the least
//! interference, i.e. the smallest `|cos(phi)|`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classicality::{Connective, MembershipTriple};

/// Tolerance on the `n`, `n'` coupling constraint.
pub const CONSTRAINT_TOL: f64 = 1e-8;
/// Denominators smaller than this are treated as singular.
pub const SINGULAR_TOL: f64 = 1e-12;
pub const DEFAULT_GRID_STEPS: usize = 1024;
pub const MIN_GRID_STEPS: usize = 16;
/// Width of the final golden-section bracket, in `n`.
pub const REFINE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("n = {0} must lie in the open interval (0, 1)")]
    NOutOfRange(f64),
    #[error("singular configuration: denominator {0:e} vanishes")]
    Singular(f64),
    #[error("no cos(phi) solves the model at n = {n}: denominator {denominator:e}")]
    InfeasibleAtN { n: f64, denominator: f64 },
    #[error("parameters violate the n/n' constraint by {0:e}")]
    ConstraintViolated(f64),
    #[error("grid needs at least {MIN_GRID_STEPS} steps, got {0}")]
    GridTooCoarse(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitParameters {
    pub n: f64,
    pub n_prime: f64,
    pub phi_degrees: f64,
    pub r: f64,
    pub connective: Connective,
}

impl FitParameters {
    /// Fills in `r` from the weights and `n'` from the constraint.
    pub fn from_n(mu_a: f64, mu_b: f64, n: f64, phi_degrees: f64, connective: Connective) -> Result<Self, FitError> {
        let r = compute_r(mu_a, mu_b);
        Ok(Self {
            n,
            n_prime: nprime_from_n(n, r)?,
            phi_degrees,
            r,
            connective,
        })
    }

    /// `sqrt((1 - n^2)(1 - n'^2)) - n n' |r|`.
    pub fn constraint_residual(&self) -> f64 {
        ((1.0 - self.n * self.n) * (1.0 - self.n_prime * self.n_prime))
            .max(0.0)
            .sqrt()
            - self.n * self.n_prime * self.r.abs()
    }

    pub fn check_constraint(&self) -> Result<(), FitError> {
        let residual = self.constraint_residual();
        if residual.abs() <= CONSTRAINT_TOL {
            Ok(())
        } else {
            Err(FitError::ConstraintViolated(residual))
        }
    }

    pub fn cos_phi(&self) -> f64 {
        self.phi_degrees.to_radians().cos()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: Option<FitParameters>,
    pub feasible: bool,
    /// Connected range of feasible `n` around the chosen one.
    pub feasible_n_interval: Option<(f64, f64)>,
    pub predicted_mu: Option<f64>,
    pub residual: Option<f64>,
}

impl FitResult {
    fn infeasible() -> Self {
        Self {
            params: None,
            feasible: false,
            feasible_n_interval: None,
            predicted_mu: None,
            residual: None,
        }
    }
}

/// `r = sqrt((1 - mu_a)(1 - mu_b)) - sqrt(mu_a mu_b)`.
pub fn compute_r(mu_a: f64, mu_b: f64) -> f64 {
    ((1.0 - mu_a) * (1.0 - mu_b)).max(0.0).sqrt() - (mu_a * mu_b).max(0.0).sqrt()
}

/// Solves the coupling constraint for `n'`:
/// `n'^2 = (1 - n^2) / ((1 - n^2) + n^2 r^2)`.
pub fn nprime_from_n(n: f64, r: f64) -> Result<f64, FitError> {
    if !(n > 0.0 && n < 1.0) {
        return Err(FitError::NOutOfRange(n));
    }
    let slack = 1.0 - n * n;
    Ok((slack / (slack + n * n * r * r)).sqrt())
}

/// Pieces of the closed form that do not depend on the angle:
/// `mu = (base_num + amp_num c) / (base_den + amp_den c)`.
#[derive(Debug, Clone, Copy)]
struct ClosedForm {
    base_num: f64,
    amp_num: f64,
    base_den: f64,
    amp_den: f64,
}

impl ClosedForm {
    fn new(mu_a: f64, mu_b: f64, n: f64, n_prime: f64) -> Self {
        let s = (mu_a * mu_b).max(0.0).sqrt();
        let r = compute_r(mu_a, mu_b);
        let nn = 2.0 * (n * n_prime);
        Self {
            base_num: n * n * mu_a + n_prime * n_prime * mu_b,
            amp_num: nn * s,
            base_den: n * n + n_prime * n_prime,
            amp_den: -nn * r,
        }
    }

    fn denominator(&self, cos_phi: f64) -> f64 {
        self.base_den + self.amp_den * cos_phi
    }

    fn eval(&self, cos_phi: f64) -> Result<f64, FitError> {
        let den = self.denominator(cos_phi);
        if den.abs() <= SINGULAR_TOL {
            return Err(FitError::Singular(den));
        }
        Ok((self.base_num + self.amp_num * cos_phi) / den)
    }

    /// `d mu / d cos(phi)`.
    fn slope(&self, cos_phi: f64) -> f64 {
        let den = self.denominator(cos_phi);
        (self.amp_num * self.base_den - self.base_num * self.amp_den) / (den * den)
    }
}

/// Combined weight predicted by the interference model.
pub fn predict_mu(mu_a: f64, mu_b: f64, params: &FitParameters) -> Result<f64, FitError> {
    ClosedForm::new(mu_a, mu_b, params.n, params.n_prime).eval(params.cos_phi())
}

/// Analytic `d mu / d phi`, with `phi` in radians.
pub fn predict_mu_dphi(mu_a: f64, mu_b: f64, params: &FitParameters) -> f64 {
    let phi = params.phi_degrees.to_radians();
    -phi.sin() * ClosedForm::new(mu_a, mu_b, params.n, params.n_prime).slope(phi.cos())
}

/// Inverts the closed form for `cos(phi)` at a given `n`. The caller decides
/// feasibility from `|cos(phi)| <= 1`.
pub fn solve_cos_phi(mu_a: f64, mu_b: f64, mu_target: f64, n: f64) -> Result<f64, FitError> {
    let n_prime = nprime_from_n(n, compute_r(mu_a, mu_b))?;
    cos_phi_for_pair(mu_a, mu_b, mu_target, n, n_prime)
}

/// `cos(phi)` for an explicit `(n, n')` pair, or `None` where the model is
/// singular or no real angle exists.
fn feasible_cos_for_pair(mu_a: f64, mu_b: f64, mu_target: f64, n: f64, n_prime: f64) -> Option<f64> {
    let c = cos_phi_for_pair(mu_a, mu_b, mu_target, n, n_prime).ok()?;
    if !c.is_finite() || c.abs() > 1.0 {
        return None;
    }
    let form = ClosedForm::new(mu_a, mu_b, n, n_prime);
    (form.denominator(c).abs() > SINGULAR_TOL).then_some(c)
}

fn cos_phi_for_pair(mu_a: f64, mu_b: f64, mu_target: f64, n: f64, n_prime: f64) -> Result<f64, FitError> {
    let r = compute_r(mu_a, mu_b);
    let s = (mu_a * mu_b).max(0.0).sqrt();
    let n2 = n * n;
    let np2 = n_prime * n_prime;
    let denominator = 2.0 * (n * n_prime) * (s + r * mu_target);
    if denominator.abs() <= SINGULAR_TOL {
        return Err(FitError::InfeasibleAtN { n, denominator });
    }
    Ok((mu_target * (n2 + np2) - (n2 * mu_a + np2 * mu_b)) / denominator)
}

/// The constraint is symmetric in `n` and `n'`, so the solution curve can be
/// walked either by `n` or by `n'`. At `r = 0` the curve splits into the two
/// branches `n' = 1` and `n = 1` and only the pair of walks covers both.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Walk {
    ByN,
    ByNPrime,
}

impl Walk {
    fn pair(self, g: f64, r: f64) -> Option<(f64, f64)> {
        let partner = nprime_from_n(g, r).ok()?;
        Some(match self {
            Walk::ByN => (g, partner),
            Walk::ByNPrime => (partner, g),
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    n: f64,
    n_prime: f64,
    cos_phi: f64,
    interval: (f64, f64),
}

/// Golden-section minimization of `f` on `[lo, hi]` down to a bracket of
/// width `tol`. Returns the better of the two final interior points.
pub(crate) fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        // ties keep the left half, which favors smaller x
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Pushes a feasibility boundary between a feasible `inside` and an
/// infeasible `outside` point.
fn bisect_boundary<F: Fn(f64) -> bool>(feasible: F, mut inside: f64, mut outside: f64) -> f64 {
    for _ in 0..60 {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if feasible(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

fn walk_curve(walk: Walk, mu_a: f64, mu_b: f64, target: f64, grid_steps: usize) -> Option<Candidate> {
    let r = compute_r(mu_a, mu_b);
    let step = 1.0 / (grid_steps as f64 + 1.0);
    let grid = |i: usize| i as f64 * step;
    let cos_at = |g: f64| {
        let (n, n_prime) = walk.pair(g, r)?;
        feasible_cos_for_pair(mu_a, mu_b, target, n, n_prime)
    };

    let scan: Vec<Option<f64>> = (1..=grid_steps).map(|i| cos_at(grid(i))).collect();
    let mut best: Option<(usize, f64)> = None;
    for (k, c) in scan.iter().enumerate() {
        if let Some(c) = c {
            if best.is_none_or(|(_, b)| c.abs() < b) {
                best = Some((k, c.abs()));
            }
        }
    }
    let (k, grid_best) = best?;
    let idx = k + 1;

    let objective = |g: f64| cos_at(g).map_or(f64::INFINITY, f64::abs);
    let (refined, refined_abs) = golden_section(objective, grid(idx - 1), grid(idx + 1), REFINE_TOL);
    let g = if refined_abs <= grid_best { refined } else { grid(idx) };
    let cos_phi = cos_at(g)?;
    let (n, n_prime) = walk.pair(g, r)?;

    let feasible_at = |x: f64| cos_at(x).is_some();
    let mut left = idx;
    while left > 1 && scan[left - 2].is_some() {
        left -= 1;
    }
    let mut right = idx;
    while right < grid_steps && scan[right].is_some() {
        right += 1;
    }
    let g_lo = bisect_boundary(feasible_at, grid(left).min(g), grid(left - 1));
    let g_hi = bisect_boundary(feasible_at, grid(right).max(g), grid(right + 1));
    let interval = match walk {
        Walk::ByN => (g_lo, g_hi),
        Walk::ByNPrime => {
            // n decreases along the walk in n'
            let a = walk.pair(g_hi, r)?.0;
            let b = walk.pair(g_lo, r)?.0;
            (a.min(n), b.max(n))
        }
    };
    Some(Candidate {
        n,
        n_prime,
        cos_phi,
        interval,
    })
}

/// Fits `(n, n', phi)` to a triple.
///
/// Walks the constraint curve on a uniform grid of `grid_steps` interior
/// points, once parameterized by `n` and once by `n'`. On each walk the grid
/// point needing the smallest `|cos(phi)|` is polished by golden-section
/// search between its grid neighbours (grid ties go to the smaller
/// parameter). The better of the two walks wins. An empty feasible set is reported as
/// `feasible = false`, not an error.
pub fn fit(t: &MembershipTriple, grid_steps: usize) -> Result<FitResult, FitError> {
    if grid_steps < MIN_GRID_STEPS {
        return Err(FitError::GridTooCoarse(grid_steps));
    }
    let (mu_a, mu_b, target) = (t.mu_a, t.mu_b, t.mu_combined);
    let chosen = [Walk::ByN, Walk::ByNPrime]
        .into_iter()
        .filter_map(|w| walk_curve(w, mu_a, mu_b, target, grid_steps))
        .reduce(|a, b| {
            let (ca, cb) = (a.cos_phi.abs(), b.cos_phi.abs());
            // exact ties go to the point nearer n = n', which is unchanged by
            // swapping the two concepts
            let (da, db) = ((a.n - a.n_prime).abs(), (b.n - b.n_prime).abs());
            if cb < ca || (cb == ca && (db < da || (db == da && b.n < a.n))) {
                b
            } else {
                a
            }
        });
    let Some(best) = chosen else {
        return Ok(FitResult::infeasible());
    };

    let params = FitParameters {
        n: best.n,
        n_prime: best.n_prime,
        phi_degrees: best.cos_phi.acos().to_degrees(),
        r: compute_r(mu_a, mu_b),
        connective: t.connective,
    };
    let predicted = predict_mu(mu_a, mu_b, &params)?;
    Ok(FitResult {
        params: Some(params),
        feasible: true,
        feasible_n_interval: Some(best.interval),
        predicted_mu: Some(predicted),
        residual: Some((predicted - target).abs()),
    })
}
