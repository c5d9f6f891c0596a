#![no_main]

use conceptq::classicality::{Connective, MembershipTriple};
use conceptq::interference_fit::{fit, MIN_GRID_STEPS};
use libfuzzer_sys::fuzz_target;

// 25 bytes: connective flag plus three little-endian f64 weights.
fuzz_target!(|data: &[u8]| {
    let Some((&flag, rest)) = data.split_first() else {
        return;
    };
    if rest.len() < 24 {
        return;
    }
    let w = |i: usize| f64::from_le_bytes(rest[8 * i..8 * i + 8].try_into().unwrap());
    let conn = if flag & 1 == 0 {
        Connective::Conjunction
    } else {
        Connective::Disjunction
    };
    let Ok(t) = MembershipTriple::bare(conn, w(0), w(1), w(2)) else {
        return;
    };
    if let Ok(res) = fit(&t, MIN_GRID_STEPS) {
        if let Some(p) = res.params {
            assert!(p.constraint_residual().abs() <= 1e-8);
        }
    }
});
