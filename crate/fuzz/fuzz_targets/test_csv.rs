#![no_main]

//! Fuzz the test-point CSV parser.

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(points) = och::csv_io::parse_test_csv(text) {
        let rewritten = och::csv_io::write_test_csv(&points);
        let reparsed = och::csv_io::parse_test_csv(&rewritten).expect("rewrite must parse");
        assert_eq!(points, reparsed, "round trip changed the matrix");
    }
});
