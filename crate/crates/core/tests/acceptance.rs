//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::Value;

use conceptq::classicality::{
    classify, conjunction_deficits, disjunction_deficits, Connective, ExtensionClass, MembershipTriple,
};
use conceptq::dataset::Dataset;
use conceptq::interference_fit::{
    compute_r, fit, nprime_from_n, predict_mu, solve_cos_phi, FitParameters, DEFAULT_GRID_STEPS,
};
use conceptq::qlinalg::{
    born_probability, collapse, is_projector, normalize, validate_spectral_family, ComplexScalar, Operator,
    SpectralFamily, StateVector,
};
use conceptq::realization::{build_model, contextualized_weight, Target};
use conceptq::scop::ScopEntity;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn triple(conn: Connective, a: f64, b: f64, x: f64) -> MembershipTriple {
    MembershipTriple::bare(conn, a, b, x).unwrap()
}

fn ac01_classicality() -> Outcome {
    let d = Dataset::fixture();
    let get = |name: &str| d.rows.iter().find(|t| t.item == name).unwrap();

    let mint = get("Mint");
    let (d1, _) = conjunction_deficits(mint).map_err(|e| e.to_string())?;
    ensure(d1 == 0.09, || format!("Mint d1 = {d1:?}, want exactly 0.09"))?;
    ensure(
        classify(mint).extension_class == ExtensionClass::DoubleOverextended,
        || "Mint class".into(),
    )?;

    let sun = get("Sunglasses");
    let (d1, _) = disjunction_deficits(sun).map_err(|e| e.to_string())?;
    ensure(d1 == 0.30, || format!("Sunglasses d1 = {d1:?}, want exactly 0.30"))?;
    ensure(
        classify(sun).extension_class == ExtensionClass::DoubleUnderextended,
        || "Sunglasses class".into(),
    )?;

    ensure(
        classify(get("Refrigerator")).extension_class == ExtensionClass::DoubleUnderextended,
        || "Refrigerator class".into(),
    )?;
    ensure(
        classify(get("TV")).extension_class == ExtensionClass::DoubleOverextended,
        || "TV class".into(),
    )?;
    Ok("Mint d1=0.09, Sunglasses d1=0.3 exactly; classes match".into())
}

fn printed(n: f64, n_prime: f64, phi: f64) -> FitParameters {
    FitParameters {
        n,
        n_prime,
        phi_degrees: phi,
        r: -0.6205,
        connective: Connective::Disjunction,
    }
}

fn ac02_forward() -> Outcome {
    let fridge = predict_mu(0.9, 0.7, &printed(0.7331, 0.8312, 119.3535)).map_err(|e| e.to_string())?;
    let tv = predict_mu(0.7, 0.9, &printed(0.5370, 0.9301, 66.79)).map_err(|e| e.to_string())?;
    ensure((fridge - 0.575).abs() <= 1e-3, || format!("Refrigerator {fridge}"))?;
    ensure((tv - 0.925).abs() <= 1e-3, || format!("TV {tv}"))?;
    Ok(format!("Refrigerator {fridge:.5}, TV {tv:.5} (tol 1e-3)"))
}

fn ac03_constraint() -> Outcome {
    let r = compute_r(0.9, 0.7);
    let np1 = nprime_from_n(0.7331, -0.6205).map_err(|e| e.to_string())?;
    let np2 = nprime_from_n(0.5370, -0.6205).map_err(|e| e.to_string())?;
    ensure((r + 0.6205).abs() <= 1e-4, || format!("r = {r}"))?;
    ensure((np1 - 0.8312).abs() <= 5e-4, || format!("n' = {np1}"))?;
    ensure((np2 - 0.9301).abs() <= 5e-4, || format!("n' = {np2}"))?;
    Ok(format!("r={r:.5}, n'={np1:.5}, n'={np2:.5}"))
}

fn ac04_angles() -> Outcome {
    let phi_d = solve_cos_phi(0.9, 0.7, 0.575, 0.7331)
        .map_err(|e| e.to_string())?
        .acos()
        .to_degrees();
    let phi_c = solve_cos_phi(0.7, 0.9, 0.925, 0.5370)
        .map_err(|e| e.to_string())?
        .acos()
        .to_degrees();
    ensure((phi_d - 119.3535).abs() <= 0.1, || format!("phi_d = {phi_d}"))?;
    ensure((phi_c - 66.79).abs() <= 0.05, || format!("phi_c = {phi_c}"))?;
    Ok(format!("phi_d={phi_d:.4} deg, phi_c={phi_c:.4} deg"))
}

fn max_dev(v: &StateVector, printed: &[f64], phi: f64) -> f64 {
    let expected = StateVector::from_real(printed).unwrap().with_phase(phi.to_radians());
    v.max_abs_diff(&expected).unwrap()
}

fn ac05_vectors() -> Outcome {
    let p = FitParameters::from_n(0.9, 0.7, 0.7331, 119.3535, Connective::Disjunction).map_err(|e| e.to_string())?;
    let fridge = build_model(&p, 0.9, 0.7).map_err(|e| e.to_string())?;
    let p = FitParameters::from_n(0.7, 0.9, 0.5370, 66.79, Connective::Conjunction).map_err(|e| e.to_string())?;
    let tv = build_model(&p, 0.7, 0.9).map_err(|e| e.to_string())?;
    let f = max_dev(&fridge.vec_a, &[0.6955, 0.2318, 0.6801], 0.0).max(max_dev(
        &fridge.vec_b,
        &[0.6955, -0.4553, -0.5559],
        119.3535,
    ));
    let t = max_dev(&tv.vec_a, &[0.45, 0.29, 0.84], 0.0).max(max_dev(&tv.vec_b, &[0.88, -0.29, -0.37], 66.79));
    ensure(f <= 5e-4, || format!("Refrigerator deviation {f}"))?;
    ensure(t <= 5e-3, || format!("TV deviation {t}"))?;
    Ok(format!(
        "max component deviation: Refrigerator {f:.2e} (tol 5e-4), TV {t:.2e} (tol 5e-3)"
    ))
}

fn ac06_oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let mut accepted = 0;
    let mut attempts = 0;
    let (mut worst_combined, mut worst_components) = (0.0f64, 0.0f64);
    while accepted < 1000 {
        attempts += 1;
        ensure(attempts < 100_000, || {
            "could not draw 1000 feasible configurations".into()
        })?;
        let mu_a = rng.gen_range(0.02..=0.98);
        let mu_b = rng.gen_range(0.02..=0.98);
        let target = rng.gen_range(0.0..=1.0);
        let conn = if rng.gen_bool(0.5) {
            Connective::Conjunction
        } else {
            Connective::Disjunction
        };
        let Ok(res) = fit(&triple(conn, mu_a, mu_b, target), 256) else {
            continue;
        };
        let Some((lo, hi)) = res.feasible_n_interval else {
            continue;
        };
        let n = rng.gen_range(lo..=hi);
        if !(n > 0.0 && n < 1.0) {
            continue;
        }
        let Ok(c) = solve_cos_phi(mu_a, mu_b, target, n) else {
            continue;
        };
        if c.abs() > 1.0 {
            continue;
        }
        let params = FitParameters::from_n(mu_a, mu_b, n, c.acos().to_degrees(), conn).map_err(|e| e.to_string())?;
        let closed = predict_mu(mu_a, mu_b, &params).map_err(|e| e.to_string())?;
        let model = build_model(&params, mu_a, mu_b).map_err(|e| e.to_string())?;
        let w = |t| contextualized_weight(&model, t).map_err(|e| e.to_string());
        worst_combined = worst_combined.max((w(Target::Combined)? - closed).abs());
        worst_components = worst_components
            .max((w(Target::A)? - mu_a).abs())
            .max((w(Target::B)? - mu_b).abs());
        accepted += 1;
    }
    ensure(worst_combined <= 1e-10, || {
        format!("combined mismatch {worst_combined:e}")
    })?;
    ensure(worst_components <= 1e-10, || {
        format!("component mismatch {worst_components:e}")
    })?;
    Ok(format!(
        "1000 configs: |Born - closed form| <= {worst_combined:.1e}, components <= {worst_components:.1e} (tol 1e-10)"
    ))
}

fn ac07_fit_roundtrip() -> Outcome {
    let grid: Vec<f64> = (1..=19).map(|i| i as f64 * 0.05).collect();
    let mut cells = Vec::new();
    for conn in [Connective::Conjunction, Connective::Disjunction] {
        for &a in &grid {
            for &b in &grid {
                for &x in &grid {
                    cells.push(triple(conn, a, b, x));
                }
            }
        }
    }
    let results: Vec<_> = cells.par_iter().map(|t| fit(t, DEFAULT_GRID_STEPS)).collect();
    let mut worst = 0.0f64;
    let mut infeasible = 0;
    for (t, r) in cells.iter().zip(&results) {
        let r = r.as_ref().map_err(|e| format!("{t:?}: {e}"))?;
        if r.feasible {
            worst = worst.max(r.residual.unwrap());
        } else {
            infeasible += 1;
        }
    }
    ensure(worst <= 1e-9, || format!("worst residual {worst:e}"))?;
    Ok(format!(
        "{} cells, {infeasible} infeasible, worst residual {worst:.1e} (tol 1e-9)",
        cells.len()
    ))
}

/// Exact 4-atom feasibility in units of 1/10: masses for A&B, A&!B, !A&B,
/// !A&!B are enumerated over all non-negative integer splits of 10.
fn four_atom_feasible(conn: Connective, a: i32, b: i32, x: i32) -> bool {
    for ab in 0..=10 {
        for a_only in 0..=(10 - ab) {
            for b_only in 0..=(10 - ab - a_only) {
                if ab + a_only != a || ab + b_only != b {
                    continue;
                }
                let combined = match conn {
                    Connective::Conjunction => ab,
                    Connective::Disjunction => ab + a_only + b_only,
                };
                if combined == x {
                    return true;
                }
            }
        }
    }
    false
}

fn ac08_kolmogorov_oracle() -> Outcome {
    let mut checked = 0;
    let mut representable = 0;
    for conn in [Connective::Conjunction, Connective::Disjunction] {
        for a in 0..=10 {
            for b in 0..=10 {
                for x in 0..=10 {
                    let t = triple(conn, a as f64 / 10.0, b as f64 / 10.0, x as f64 / 10.0);
                    let verdict = classify(&t).kolmogorovian;
                    let oracle = four_atom_feasible(conn, a, b, x);
                    ensure(verdict == oracle, || {
                        format!("{t:?}: verdict {verdict}, oracle {oracle}")
                    })?;
                    checked += 1;
                    representable += usize::from(oracle);
                }
            }
        }
    }
    Ok(format!(
        "{checked} triples agree exactly ({representable} representable)"
    ))
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> StateVector {
    loop {
        let v = StateVector::new(
            (0..dim)
                .map(|_| ComplexScalar::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap();
        if v.norm() > 1e-3 {
            return normalize(&v).unwrap();
        }
    }
}

/// Either a random 0/1 diagonal or the rank-one projector `|u><u|`.
fn random_projector(rng: &mut ChaCha8Rng, dim: usize) -> Operator {
    if rng.gen_bool(0.5) {
        let diag: Vec<f64> = (0..dim).map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 }).collect();
        Operator::diagonal(&diag)
    } else {
        let u = random_unit(rng, dim);
        let c = u.components();
        let rows: Vec<Vec<ComplexScalar>> = (0..dim)
            .map(|i| (0..dim).map(|j| c[i] * c[j].conj()).collect())
            .collect();
        Operator::from_rows(&rows).unwrap()
    }
}

fn ac09_structural() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
    let mut checks = 0;
    for _ in 0..2500 {
        let dim = rng.gen_range(1..=6);
        let psi = random_unit(&mut rng, dim);
        let m = random_projector(&mut rng, dim);
        ensure(is_projector(&m), || format!("generated non-projector {m:?}"))?;

        let p = born_probability(&psi, &m).map_err(|e| e.to_string())?;
        let q = born_probability(&psi, &m.complement()).map_err(|e| e.to_string())?;
        ensure((-1e-10..=1.0 + 1e-10).contains(&p), || format!("Born probability {p}"))?;
        ensure((p + q - 1.0).abs() <= 1e-10, || format!("complementarity {p} + {q}"))?;

        if p > 1e-6 {
            let once = collapse(&psi, &m).map_err(|e| e.to_string())?;
            let twice = collapse(&once, &m).map_err(|e| e.to_string())?;
            let d = once.max_abs_diff(&twice).unwrap();
            ensure(d <= 1e-12, || format!("collapse idempotency {d:e}"))?;
        }

        let theta = rng.gen_range(0.0..std::f64::consts::TAU);
        let shifted = born_probability(&psi.with_phase(theta), &m).map_err(|e| e.to_string())?;
        ensure((shifted - p).abs() <= 1e-12, || {
            format!("phase invariance {p} vs {shifted}")
        })?;

        ensure(validate_spectral_family(&SpectralFamily::yes_no(&m)), || {
            "yes/no family rejected".into()
        })?;
        let broken = SpectralFamily::new(vec![m.clone(), m.clone()]);
        let nonzero = m.max_norm() > 0.5;
        ensure(!nonzero || !validate_spectral_family(&broken), || {
            "duplicated family accepted".into()
        })?;
        checks += 4;
    }
    Ok(format!("{checks} randomized checks passed"))
}

fn ac10_end_to_end() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_conceptq");
    let run = |sub: &str| -> Result<Value, String> {
        let out = Command::new(bin).arg(sub).output().map_err(|e| e.to_string())?;
        ensure(out.status.success(), || {
            format!("`{sub}` exited with {:?}", out.status.code())
        })?;
        serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())
    };
    let audit = run("audit")?;
    let fitted = run("fit")?;
    let verified = run("verify")?;
    for report in [&audit, &fitted, &verified] {
        let items = report["items"].as_array().ok_or("no items array")?;
        ensure(items.len() == 4, || format!("{} items", items.len()))?;
        for it in items {
            ensure(it["verdict"]["kolmogorovian"] == Value::Bool(false), || {
                format!("{} flagged classical", it["triple"]["item"])
            })?;
        }
    }
    for report in [&fitted, &verified] {
        for it in report["items"].as_array().unwrap() {
            ensure(it["fit"]["feasible"] == Value::Bool(true), || {
                format!("{} infeasible", it["triple"]["item"])
            })?;
        }
    }
    for it in verified["items"].as_array().unwrap() {
        ensure(it["verification"]["passed"] == Value::Bool(true), || {
            format!("{} failed verification", it["triple"]["item"])
        })?;
        ensure(it["verification"]["tolerance"].as_f64() == Some(1e-3), || {
            "tolerance not 1e-3".into()
        })?;
    }
    Ok("audit/fit/verify: 4 items non-Kolmogorovian, fits feasible, models pass at 1e-3".into())
}

fn ac11_scop() -> Outcome {
    let e = ScopEntity::builder()
        .state("p_A")
        .state("p_X")
        .state("p")
        .state("q")
        .context("e_X")
        .context("e")
        .deterministic("p_A", "e_X", "p_X")
        .transition("p_X", "e", [("p", 0.9), ("q", 0.1)])
        .build()
        .map_err(|e| e.to_string())?;
    let table = e
        .sample_outcomes("p_X", "e", 100_000, 2024)
        .map_err(|e| e.to_string())?;
    let freq = table.relative_frequency("p");
    ensure((freq - 0.9).abs() <= 0.01, || format!("relative frequency {freq}"))?;
    let w = e
        .membership_weight("p_A", "e_X", "p_X", "e", "p")
        .map_err(|e| e.to_string())?;
    ensure(w == 0.9, || format!("product formula gave {w}"))?;
    Ok(format!("sampled frequency {freq:.4} (tol 0.01); product formula exact"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("AC-01 classicality reproduction", ac01_classicality),
        ("AC-02 forward model reproduction", ac02_forward),
        ("AC-03 n/n' constraint reproduction", ac03_constraint),
        ("AC-04 interference angle recovery", ac04_angles),
        ("AC-05 C^3 vector reconstruction", ac05_vectors),
        ("AC-06 Born-rule oracle equivalence", ac06_oracle_equivalence),
        ("AC-07 fit roundtrip over grid", ac07_fit_roundtrip),
        ("AC-08 Kolmogorov brute-force oracle", ac08_kolmogorov_oracle),
        ("AC-09 structural invariants", ac09_structural),
        ("AC-10 end-to-end CLI", ac10_end_to_end),
        ("AC-11 SCoP sampling", ac11_scop),
    ];
    let start = Instant::now();
    let mut failures = 0;
    for (name, check) in criteria {
        let t = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let ms = t.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} [{ms} ms]"),
            Err(detail) => {
                failures += 1;
                println!("FAIL {name}: {detail} [{ms} ms]");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed in {:.1} s",
        criteria.len() - failures,
        start.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
