#![no_main]

use conceptq::classicality::classify;
use conceptq::dataset::{parse_dataset, write_dataset};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(dataset) = parse_dataset(text, "fuzz") else {
        return;
    };
    for row in &dataset.rows {
        let _ = classify(row);
    }
    // Anything accepted must survive a write/parse cycle unchanged.
    let mut buf = Vec::new();
    write_dataset(&dataset.rows, &mut buf).unwrap();
    let again = parse_dataset(std::str::from_utf8(&buf).unwrap(), "fuzz").unwrap();
    assert_eq!(again.rows, dataset.rows);
});
