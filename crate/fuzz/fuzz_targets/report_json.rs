#![no_main]

//! Fuzz the saved-report reader used by the `report` subcommand, including
//! the table renderers downstream of a successful parse.

use libfuzzer_sys::fuzz_target;
use och::bench::{emit_table, RunReport, TableKind};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(report) = RunReport::from_json(text) {
        for kind in [
            TableKind::AccuracyByRate,
            TableKind::AccuracyByP,
            TableKind::StabilityCurves,
        ] {
            // Rendering may reject incomplete reports but must not panic.
            let _ = emit_table(&report, kind);
        }
    }
});
