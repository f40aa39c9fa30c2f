#![no_main]

//! Fuzz the observational CSV parser: arbitrary bytes must either parse into
//! a dataset that survives a write/parse round trip or fail with a schema
//! error, never panic.

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(obs) = och::csv_io::parse_observational_csv(text) {
        let rewritten = och::csv_io::write_observational_csv(&obs);
        let reparsed =
            och::csv_io::parse_observational_csv(&rewritten).expect("rewrite must parse");
        assert_eq!(obs, reparsed, "round trip changed the dataset");
    }
});
