//! Command-line runner: synthetic data emission, fit-on-CSV, the full
//! benchmark, and table re-derivation from a saved report.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use och::bench::{emit_table, run_benchmark, BenchmarkConfig, RunReport, TableKind, Targets};
use och::csv_io::{
    fit_from_csv, write_observational_csv, write_test_csv, write_trial_csv, FitOptions,
};
use och::error::{Error, Result};
use och::simgen::{
    gen_observational, gen_scenario, gen_test_points, gen_trial, true_cate, Regime, SimConfig,
};

fn usage() -> &'static str {
    "\
och - cross-design synthesis treatment-effect estimators

USAGE:
  och simulate [OPTIONS]             Emit synthetic observational/trial/test CSVs
  och fit [OPTIONS]                  Fit one estimator on CSV inputs
  och benchmark [OPTIONS]            Run the synthetic benchmark and emit tables
  och report [OPTIONS]               Re-derive tables from a saved JSON report

SIMULATE OPTIONS:
  --seed N            RNG seed (default 0)
  --p N               covariate count (default 2)
  --n-obs N           observational rows, multiple of 4 (default 1000)
  --n-rct N           trial rows, multiple of 2 (default 100)
  --rate R            exclusion percent in [0, 100) (default 0)
  --regime NAME       holds | violated (default holds)
  --noise V           outcome noise (default 0.1, read as a variance)
  --noise-as-std      read --noise as a standard deviation
  --n-test N          test points to emit (default 1000)
  --out DIR           output directory (default .)
                      writes obs.csv, trial.csv, test.csv, truth.csv, scenario.json

FIT OPTIONS:
  --obs FILE          observational CSV (m,t,x1..xp,y)       [required]
  --rct FILE          trial CSV (t,x1..xp,y)                 [required]
  --test FILE         test-point CSV (x1..xp)                [required]
  --estimator ID      och2|och1|unc2|unc1|rct-only|obs-only|olt|2step|sdd|cdd
                      (with --densities: ochd|uncd|rct-only|obs-only)
  --densities         fit conditional densities instead of point effects
  --discrete          treat outcomes as discrete grid points
  --grid-size N       outcome grid resolution (default 201)
  --sdd-ridge         ridge-regularize the sdd coefficients (off by default)
  --out FILE          output JSON path (default predictions.json)

BENCHMARK OPTIONS:
  --config FILE       JSON BenchmarkConfig; flags below override it
  --seed N            base seed
  --regimes LIST      comma list of holds,violated
  --rates LIST        comma list of percents (default 0,25,50,75,90,95)
  --dims LIST         comma list of covariate counts (default 1,2)
  --reps N            replications per cell (default 100)
  --targets NAME      cate | cdte | both (default cate)
  --roster LIST       comma list of CATE estimator ids
  --cdte-roster LIST  comma list of CDTE estimator ids
  --n-obs N, --n-rct N, --n-test N, --grid-size N
  --sdd-ridge         ridge-regularize the sdd coefficients (off by default)
  --jobs N            worker threads (default: all cores)
  --out DIR           output directory (default .)
                      writes report.json, accuracy_by_rate.csv,
                      accuracy_by_p.csv, stability_curves.csv

REPORT OPTIONS:
  --report FILE       saved report.json                       [required]
  --table NAME        accuracy-by-rate | accuracy-by-p | stability-curves
  --out FILE          output CSV path (default stdout)

EXIT CODES:
  0 success, 1 runtime error, 2 usage error
"
}

struct Args {
    positional: Vec<String>,
    flags: Vec<(String, Option<String>)>,
}

impl Args {
    fn parse(raw: &[String]) -> Self {
        let mut positional = Vec::new();
        let mut flags = Vec::new();
        let mut i = 0;
        while i < raw.len() {
            let arg = &raw[i];
            if let Some(name) = arg.strip_prefix("--") {
                let takes_value = i + 1 < raw.len() && !raw[i + 1].starts_with("--");
                if takes_value {
                    flags.push((name.to_string(), Some(raw[i + 1].clone())));
                    i += 2;
                } else {
                    flags.push((name.to_string(), None));
                    i += 1;
                }
            } else {
                positional.push(arg.clone());
                i += 1;
            }
        }
        Self { positional, flags }
    }

    fn value(&self, name: &str) -> Option<&str> {
        self.flags
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .and_then(|(_, v)| v.as_deref())
    }

    fn present(&self, name: &str) -> bool {
        self.flags.iter().any(|(n, _)| n == name)
    }

    fn parsed<T: std::str::FromStr>(&self, name: &str) -> Result<Option<T>> {
        match self.value(name) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("bad value '{raw}' for --{name}"))),
        }
    }

    fn list(&self, name: &str) -> Option<Vec<String>> {
        self.value(name)
            .map(|v| v.split(',').map(|s| s.trim().to_string()).collect())
    }

    /// Reject flags the subcommand does not understand. The common trio
    /// `--seed`, `--out`, `--jobs` is accepted everywhere.
    fn check_known(&self, known: &[&str]) -> Result<()> {
        for (name, _) in &self.flags {
            if !known.contains(&name.as_str())
                && !["seed", "out", "jobs"].contains(&name.as_str())
            {
                return Err(Error::Config(format!("unknown flag --{name}")));
            }
        }
        Ok(())
    }
}

fn cmd_simulate(args: &Args) -> Result<()> {
    args.check_known(&[
        "p",
        "n-obs",
        "n-rct",
        "rate",
        "regime",
        "noise",
        "noise-as-std",
        "n-test",
    ])?;
    let cfg = SimConfig {
        p: args.parsed("p")?.unwrap_or(2),
        n_obs: args.parsed("n-obs")?.unwrap_or(1000),
        n_rct: args.parsed("n-rct")?.unwrap_or(100),
        exclusion_rate: args.parsed("rate")?.unwrap_or(0.0),
        regime: args.parsed::<Regime>("regime")?.unwrap_or(Regime::Holds),
        noise: args.parsed("noise")?.unwrap_or(0.1),
        noise_is_std: args.present("noise-as-std"),
        seed: args.parsed("seed")?.unwrap_or(0),
    };
    cfg.validate()?;
    let n_test: usize = args.parsed("n-test")?.unwrap_or(1000);
    let out_dir = PathBuf::from(args.value("out").unwrap_or("."));
    std::fs::create_dir_all(&out_dir)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let scenario = gen_scenario(&cfg, &mut rng);
    let obs = gen_observational(&cfg, &scenario, &mut rng)?;
    let rct = gen_trial(&cfg, &scenario, &mut rng)?;
    let test = gen_test_points(cfg.p, n_test, &mut rng);

    std::fs::write(out_dir.join("obs.csv"), write_observational_csv(&obs))?;
    std::fs::write(out_dir.join("trial.csv"), write_trial_csv(&rct))?;
    std::fs::write(out_dir.join("test.csv"), write_test_csv(&test))?;
    let mut truth = String::from("cate\n");
    for i in 0..test.rows() {
        truth.push_str(&format!("{:.16e}\n", true_cate(&scenario, test.row(i))));
    }
    std::fs::write(out_dir.join("truth.csv"), truth)?;
    std::fs::write(
        out_dir.join("scenario.json"),
        serde_json::to_string_pretty(&scenario)?,
    )?;
    println!(
        "wrote obs.csv ({} rows), trial.csv ({} rows), test.csv ({} rows), truth.csv, scenario.json to {}",
        obs.len(),
        rct.len(),
        test.rows(),
        out_dir.display()
    );
    Ok(())
}

fn required<'a>(args: &'a Args, name: &str) -> Result<&'a str> {
    args.value(name)
        .ok_or_else(|| Error::Config(format!("--{name} is required")))
}

fn cmd_fit(args: &Args) -> Result<()> {
    args.check_known(&[
        "obs",
        "rct",
        "test",
        "estimator",
        "densities",
        "discrete",
        "grid-size",
        "sdd-ridge",
    ])?;
    let obs = PathBuf::from(required(args, "obs")?);
    let rct = PathBuf::from(required(args, "rct")?);
    let test = PathBuf::from(required(args, "test")?);
    let estimator = required(args, "estimator")?.to_string();
    let options = FitOptions {
        densities: args.present("densities"),
        grid_size: args.parsed("grid-size")?.unwrap_or(201),
        discrete_outcomes: args.present("discrete"),
        sdd_ridge: args.present("sdd-ridge"),
        ..FitOptions::default()
    };
    let out = PathBuf::from(args.value("out").unwrap_or("predictions.json"));
    let result = fit_from_csv(&obs, &rct, &test, &estimator, &options)?;
    std::fs::write(&out, serde_json::to_string_pretty(&result)?)?;
    if let Some(cate) = &result.cate {
        println!(
            "fit {estimator}: {} predictions -> {}",
            cate.predictions.len(),
            out.display()
        );
        if let (Some(mu0), Some(mu1)) = (cate.mu0, cate.mu1) {
            println!("  mu = ({mu0:.6}, {mu1:.6}), degenerate: {}", cate.degenerate_mix);
        }
    }
    if let Some(cdte) = &result.cdte {
        println!(
            "fit {estimator}: densities over {} grid points -> {}",
            cdte.grid.len(),
            out.display()
        );
        println!(
            "  mu = ({:.6}, {:.6}), degenerate: {:?}",
            cdte.mu[0], cdte.mu[1], cdte.degenerate
        );
    }
    Ok(())
}

fn parse_id_list<T: std::str::FromStr<Err = Error>>(items: &[String]) -> Result<Vec<T>> {
    items.iter().map(|s| s.parse()).collect()
}

fn benchmark_config(args: &Args) -> Result<BenchmarkConfig> {
    let mut cfg = match args.value("config") {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        None => BenchmarkConfig::default(),
    };
    if let Some(seed) = args.parsed("seed")? {
        cfg.base_seed = seed;
    }
    if let Some(items) = args.list("regimes") {
        cfg.regimes = items
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<_>>>()?;
    }
    if let Some(items) = args.list("rates") {
        cfg.rates = items
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad rate '{s}'")))
            })
            .collect::<Result<Vec<_>>>()?;
    }
    if let Some(items) = args.list("dims") {
        cfg.dims = items
            .iter()
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad dimension '{s}'")))
            })
            .collect::<Result<Vec<_>>>()?;
    }
    if let Some(reps) = args.parsed("reps")? {
        cfg.replications = reps;
    }
    if let Some(targets) = args.parsed::<Targets>("targets")? {
        cfg.targets = targets;
    }
    if let Some(items) = args.list("roster") {
        cfg.cate_roster = parse_id_list(&items)?;
    }
    if let Some(items) = args.list("cdte-roster") {
        cfg.cdte_roster = parse_id_list(&items)?;
    }
    if let Some(v) = args.parsed("n-obs")? {
        cfg.n_obs = v;
    }
    if let Some(v) = args.parsed("n-rct")? {
        cfg.n_rct = v;
    }
    if let Some(v) = args.parsed("n-test")? {
        cfg.n_test = v;
    }
    if let Some(v) = args.parsed("grid-size")? {
        cfg.grid_size = v;
    }
    if args.present("sdd-ridge") {
        cfg.sdd_ridge = true;
    }
    if let Some(v) = args.parsed("jobs")? {
        cfg.jobs = v;
    }
    if let Some(dir) = args.value("out") {
        cfg.out_dir = Some(dir.to_string());
    }
    Ok(cfg)
}

fn cmd_benchmark(args: &Args) -> Result<()> {
    args.check_known(&[
        "config",
        "regimes",
        "rates",
        "dims",
        "reps",
        "targets",
        "roster",
        "cdte-roster",
        "n-obs",
        "n-rct",
        "n-test",
        "grid-size",
        "sdd-ridge",
    ])?;
    let cfg = benchmark_config(args)?;
    let out_dir = PathBuf::from(cfg.out_dir.clone().unwrap_or_else(|| ".".into()));
    std::fs::create_dir_all(&out_dir)?;
    eprintln!(
        "running benchmark: {} regimes x {} rates x {} dims x {} replications",
        cfg.regimes.len(),
        cfg.rates.len(),
        cfg.dims.len(),
        cfg.replications
    );
    let report = run_benchmark(&cfg)?;
    std::fs::write(out_dir.join("report.json"), report.to_json()?)?;
    for (kind, name) in [
        (TableKind::AccuracyByRate, "accuracy_by_rate.csv"),
        (TableKind::AccuracyByP, "accuracy_by_p.csv"),
        (TableKind::StabilityCurves, "stability_curves.csv"),
    ] {
        match emit_table(&report, kind) {
            Ok(table) => std::fs::write(out_dir.join(name), table)?,
            Err(err) => eprintln!("skipping {name}: {err}"),
        }
    }
    println!(
        "benchmark finished in {:.1}s; report and tables written to {}",
        report.wall_clock_seconds,
        out_dir.display()
    );
    Ok(())
}

fn cmd_report(args: &Args) -> Result<()> {
    args.check_known(&["report", "table"])?;
    let path = PathBuf::from(required(args, "report")?);
    let table: TableKind = required(args, "table")?.parse()?;
    let report = RunReport::from_json(&std::fs::read_to_string(&path)?)?;
    let text = emit_table(&report, table)?;
    match args.value("out") {
        Some(out) => {
            std::fs::write(Path::new(out), &text)?;
            println!("wrote table to {out}");
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let raw: Vec<String> = std::env::args().skip(1).collect();
    if raw.is_empty() || raw[0] == "--help" || raw[0] == "help" {
        print!("{}", usage());
        return ExitCode::from(2);
    }
    let command = raw[0].clone();
    let args = Args::parse(&raw[1..]);
    if !args.positional.is_empty() {
        eprintln!("unexpected argument '{}'", args.positional[0]);
        return ExitCode::from(2);
    }
    let result = match command.as_str() {
        "simulate" => cmd_simulate(&args),
        "fit" => cmd_fit(&args),
        "benchmark" => cmd_benchmark(&args),
        "report" => cmd_report(&args),
        other => {
            eprintln!("unknown subcommand '{other}'\n\n{}", usage());
            return ExitCode::from(2);
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
