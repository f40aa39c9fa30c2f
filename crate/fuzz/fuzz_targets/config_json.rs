#![no_main]

//! Fuzz the benchmark-config deserializer: arbitrary JSON must either
//! deserialize (and then re-serialize losslessly) or error, never panic.

use libfuzzer_sys::fuzz_target;
use och::bench::BenchmarkConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(cfg) = serde_json::from_slice::<BenchmarkConfig>(data) {
        let json = serde_json::to_string(&cfg).expect("config serializes");
        let back: BenchmarkConfig = serde_json::from_str(&json).expect("rewrite must parse");
        assert_eq!(cfg, back, "round trip changed the config");
        // Validation must classify, not panic.
        let _ = cfg.validate();
    }
});
