#![no_main]

//! Fuzz the trial CSV parser: parse, and round-trip whatever parses.

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(rct) = och::csv_io::parse_trial_csv(text) {
        let rewritten = och::csv_io::write_trial_csv(&rct);
        let reparsed = och::csv_io::parse_trial_csv(&rewritten).expect("rewrite must parse");
        assert_eq!(rct, reparsed, "round trip changed the dataset");
    }
});
