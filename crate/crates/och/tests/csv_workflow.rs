//! End-to-end checks of the file workflow: dataset CSVs written by the
//! generator are bit-exact after re-ingestion, and the fit-on-files path
//! reproduces the library-level fit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use och::csv_io::{
    fit_from_csv, parse_trial_csv, write_observational_csv, write_test_csv, write_trial_csv,
    FitOptions,
};
use och::error::Error;
use och::estimators::{fit_cate, fit_cdte, CateEstimator, CdteEstimator};
use och::density::{OutcomeGrid, OutcomeKind};
use och::kernel::DEFAULT_LAMBDA_GRID;
use och::simgen::{gen_observational, gen_scenario, gen_test_points, gen_trial, SimConfig};

fn write_temp(dir: &std::path::Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn csv_fit_matches_library_fit() {
    let cfg = SimConfig {
        p: 2,
        n_obs: 200,
        n_rct: 40,
        seed: 99,
        ..SimConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let scenario = gen_scenario(&cfg, &mut rng);
    let obs = gen_observational(&cfg, &scenario, &mut rng).unwrap();
    let rct = gen_trial(&cfg, &scenario, &mut rng).unwrap();
    let test = gen_test_points(cfg.p, 60, &mut rng);

    let dir = std::env::temp_dir().join(format!("och-csv-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let obs_path = write_temp(&dir, "obs.csv", &write_observational_csv(&obs));
    let rct_path = write_temp(&dir, "trial.csv", &write_trial_csv(&rct));
    let test_path = write_temp(&dir, "test.csv", &write_test_csv(&test));

    for estimator in ["och2", "unc1", "sdd", "cdd", "olt", "2step", "rct-only", "obs-only"] {
        let out = fit_from_csv(
            &obs_path,
            &rct_path,
            &test_path,
            estimator,
            &FitOptions::default(),
        )
        .unwrap();
        let kind: CateEstimator = estimator.parse().unwrap();
        let direct = fit_cate(kind, &obs, &rct, &DEFAULT_LAMBDA_GRID)
            .unwrap()
            .predict(&test)
            .unwrap();
        assert_eq!(
            out.cate.unwrap().predictions,
            direct,
            "file path and library path disagree for {estimator}"
        );
    }

    // Density route.
    let options = FitOptions {
        densities: true,
        grid_size: 101,
        ..FitOptions::default()
    };
    let out = fit_from_csv(&obs_path, &rct_path, &test_path, "ochd", &options).unwrap();
    let grid = OutcomeGrid::from_outcomes(obs.outcomes(), 101).unwrap();
    let direct = fit_cdte(
        CdteEstimator::OchD,
        &obs,
        &rct,
        &grid,
        OutcomeKind::Continuous,
    )
    .unwrap();
    let cdte = out.cdte.unwrap();
    assert_eq!(cdte.mu, direct.mu());
    assert_eq!(cdte.densities, direct.predict(&test).unwrap());

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn schema_violations_name_row_and_column() {
    // A non-binary treatment label.
    match parse_trial_csv("t,x1,y\n0,0.1,0.2\n2,0.1,0.2\n") {
        Err(Error::CsvSchema { row, column, .. }) => {
            assert_eq!((row, column.as_str()), (3, "t"));
        }
        other => panic!("expected schema error, got {other:?}"),
    }
    // Wrong field count.
    match parse_trial_csv("t,x1,y\n0,0.1\n") {
        Err(Error::CsvSchema { row, .. }) => assert_eq!(row, 2),
        other => panic!("expected schema error, got {other:?}"),
    }
}

#[test]
fn missing_cell_is_reported_for_csv_inputs() {
    // Observational file with no m=0 rows cannot support the two-step hull.
    let obs_text = "m,t,x1,y\n1,0,0.0,0.1\n1,0,0.5,0.2\n1,1,0.25,0.3\n1,1,0.75,0.4\n";
    let rct_text = "t,x1,y\n0,0.1,0.0\n0,0.3,0.1\n1,0.2,0.5\n1,0.4,0.6\n";
    let test_text = "x1\n0.5\n";
    let dir = std::env::temp_dir().join(format!("och-csv-miss-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let obs_path = write_temp(&dir, "obs.csv", obs_text);
    let rct_path = write_temp(&dir, "trial.csv", rct_text);
    let test_path = write_temp(&dir, "test.csv", test_text);
    let err = fit_from_csv(
        &obs_path,
        &rct_path,
        &test_path,
        "och2",
        &FitOptions::default(),
    );
    assert!(matches!(err, Err(Error::MissingCell(_))), "{err:?}");
    // The one-step variant needs no pre-treatment rows.
    let ok = fit_from_csv(
        &obs_path,
        &rct_path,
        &test_path,
        "och1",
        &FitOptions::default(),
    );
    assert!(ok.is_ok(), "{ok:?}");
    std::fs::remove_dir_all(&dir).ok();
}
