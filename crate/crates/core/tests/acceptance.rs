//! Acceptance criteria, one PASS/FAIL/SKIP line each. Runs without the
//! libtest harness so the lines always reach the terminal.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use common::props::{self, distinct_column, matrix_set, series, signed_diffs, small_forest_input};
use common::synthetic::{random_dataset, sine_split, sines, to_ts};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use redcomets::bench::stats::{friedman_ranks, holm_adjust_matrix, holm_cliques, wilcoxon_signed_rank};
use redcomets::bench::{cli, read_ts_file, run_benchmark};
use redcomets::forest::ForestConfig;
use redcomets::multivariate::run_variant;
use redcomets::PipelineConfig;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Box<dyn FnOnce() -> Optional>);

const PROPERTY_CASES: u32 = 1000;
const PROPERTY_BUDGET: Duration = Duration::from_secs(120);
const SEPARABILITY_THRESHOLD: f64 = 0.95;
const SEPARABILITY_BUDGET: Duration = Duration::from_secs(60);
const HMD_TARGET: f64 = 0.5530;
const HMD_TOLERANCE: f64 = 0.050;
const HMD_ENV: &str = "REDCOMETS_HMD_DIR";

fn check<T: std::fmt::Debug>(
    name: &str,
    strategy: impl Strategy<Value = T>,
    test: impl Fn(T) -> Result<(), proptest::test_runner::TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases: PROPERTY_CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| format!("{name}: {e}"))
}

fn property_suite() -> Outcome {
    let start = Instant::now();
    check("z-normalize idempotence", series(2, 64), |x| {
        props::z_normalize_idempotent(&x)
    })?;
    check("PAA shape/identity", (series(1, 80), 0.0f64..1.0), |(x, f)| {
        props::paa_shape_identity_mean(&x, f)
    })?;
    check(
        "DFT vs quadratic oracle",
        (prop::collection::vec(-10.0f64..10.0, 1..=96), 0.0f64..1.0),
        |(x, f)| props::dft_matches_oracle(&x, f),
    )?;
    check("MCB balance", (distinct_column(), 2usize..=10), |(c, a)| {
        props::mcb_balanced(&c, a)
    })?;
    check("probability rows", small_forest_input(), |(rows, ls, s)| {
        props::forest_rows_sum_to_one(&rows, ls, s)
    })?;
    check(
        "sum-rule scale/permutation",
        (
            matrix_set(6, 5, 4),
            prop::collection::vec(0.05f64..2.0, 6),
            0.01f64..100.0,
            0usize..6,
        ),
        |(raw, w, s, r)| props::sum_rule_scale_permutation(&raw, &w, s, r),
    )?;
    check("uniform sum-rule oracle", matrix_set(6, 5, 4), |raw| {
        props::uniform_matches_brute_force(&raw)
    })?;
    check("exact Wilcoxon enumeration", signed_diffs(), |d| {
        props::wilcoxon_matches_enumeration(&d)
    })?;
    let elapsed = start.elapsed();
    if elapsed > PROPERTY_BUDGET {
        return Err(format!(
            "properties held but took {elapsed:.1?} (budget {PROPERTY_BUDGET:?})"
        ));
    }
    Ok(format!("8 properties x {PROPERTY_CASES} cases in {elapsed:.1?}"))
}

fn synthetic_separability() -> Outcome {
    let (train, test) = sine_split(2024);
    let config = PipelineConfig::default();
    let start = Instant::now();
    let mut means = Vec::new();
    for v in 1..=9u8 {
        let result = run_benchmark(&train, &test, v, 5, &config).map_err(|e| e.to_string())?;
        means.push(result.mean_accuracy);
    }
    let elapsed = start.elapsed();
    let summary = means
        .iter()
        .enumerate()
        .map(|(i, m)| format!("{}:{m:.3}", i + 1))
        .collect::<Vec<_>>()
        .join(" ");
    if let Some((i, m)) = means.iter().enumerate().find(|(_, m)| **m < SEPARABILITY_THRESHOLD) {
        return Err(format!(
            "variant {} mean {m:.3} < {SEPARABILITY_THRESHOLD} [{summary}]",
            i + 1
        ));
    }
    if elapsed > SEPARABILITY_BUDGET {
        return Err(format!("accuracies met but took {elapsed:.1?} [{summary}]"));
    }
    Ok(format!("[{summary}] in {elapsed:.1?}"))
}

fn variant_algebra() -> Outcome {
    let config = PipelineConfig::default();
    for seed in 0..10u64 {
        let dims = 1 + (seed as usize % 4);
        let length = 12 + 3 * seed as usize;
        let classes = 2 + (seed as usize % 2);
        let train = random_dataset(seed, 30, dims, length, classes);
        let test = random_dataset(seed + 100, 20, dims, length, classes);
        let config = PipelineConfig { seed, ..config };
        let v4 = run_variant(4, &train, &test, &config).map_err(|e| e.to_string())?;
        let v6 = run_variant(6, &train, &test, &config).map_err(|e| e.to_string())?;
        if v4.labels != v6.labels {
            return Err(format!("variants 4 and 6 differ on random dataset {seed} (d={dims})"));
        }
    }
    for seed in 0..5u64 {
        let train = random_dataset(seed + 50, 30, 1, 40, 3);
        let test = random_dataset(seed + 150, 20, 1, 40, 3);
        let config = PipelineConfig { seed, ..config };
        let labels: Vec<Vec<usize>> = [1u8, 4, 6]
            .iter()
            .map(|&v| run_variant(v, &train, &test, &config).map(|r| r.labels))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        if labels[0] != labels[1] || labels[1] != labels[2] {
            return Err(format!("variants 1, 4, 6 differ on univariate dataset {seed}"));
        }
    }
    Ok("4 = 6 on 10 random datasets; 1 = 4 = 6 on 5 univariate datasets".into())
}

fn lens_budget() -> Outcome {
    let config = PipelineConfig {
        forest: ForestConfig {
            trees: 5,
            ..ForestConfig::default()
        },
        ..PipelineConfig::default()
    };
    let mut seen = Vec::new();
    for dims in 1..=5 {
        let train = sines(dims as u64, 20, dims, 100, 0.1);
        let test = sines(dims as u64 + 7, 6, dims, 100, 0.1);
        for v in [1u8, 2, 3] {
            let report = run_variant(v, &train, &test, &config).map_err(|e| e.to_string())?;
            if report.lens_models_fitted != 10 {
                return Err(format!(
                    "variant {v}, d={dims}: {} lens models fitted, expected 10",
                    report.lens_models_fitted
                ));
            }
            seen.push(report.lens_models_fitted);
        }
    }
    Ok(format!(
        "10 lens models for d=1..5 over {} concatenating runs",
        seen.len()
    ))
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(
        std::iter::once("redcomets").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    if code == 0 {
        Ok(())
    } else {
        Err(format!("exit {code}: {}", String::from_utf8_lossy(&err)))
    }
}

fn thread_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (train, test) = sine_split(7);
    let train_path = dir.path().join("Sines_TRAIN.ts");
    let test_path = dir.path().join("Sines_TEST.ts");
    std::fs::write(&train_path, to_ts(&train)).map_err(|e| e.to_string())?;
    std::fs::write(&test_path, to_ts(&test)).map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for threads in ["1", "8"] {
        let output = dir.path().join(format!("results_{threads}.csv"));
        run_cli(&[
            "benchmark",
            "--train",
            train_path.to_str().unwrap(),
            "--test",
            test_path.to_str().unwrap(),
            "--variant",
            "1,2,3,4,5,6,7,8,9",
            "--resamples",
            "3",
            "--threads",
            threads,
            "--output",
            output.to_str().unwrap(),
        ])?;
        files.push(std::fs::read(&output).map_err(|e| e.to_string())?);
    }
    if files[0] != files[1] {
        return Err("results files differ between --threads 1 and --threads 8".into());
    }
    let rows = files[0].iter().filter(|&&b| b == b'\n').count() - 1;
    Ok(format!("{rows} result rows byte-identical across 1 and 8 threads"))
}

enum Optional {
    Ran(Outcome),
    Skipped(String),
}

fn hand_movement_direction() -> Optional {
    let Ok(dir) = std::env::var(HMD_ENV) else {
        return Optional::Skipped(format!(
            "set {HMD_ENV} to a directory with HandMovementDirection_TRAIN.ts/_TEST.ts"
        ));
    };
    let dir = Path::new(&dir);
    let load = |suffix: &str| read_ts_file(dir.join(format!("HandMovementDirection_{suffix}.ts")));
    let outcome = (|| {
        let train = load("TRAIN").map_err(|e| e.to_string())?;
        let test = load("TEST").map_err(|e| e.to_string())?;
        let result = run_benchmark(&train, &test, 3, 30, &PipelineConfig::default()).map_err(|e| e.to_string())?;
        let mean = result.mean_accuracy;
        let detail = format!(
            "variant 3 mean {:.2}% vs {:.2}% +/- {:.1}pp",
            mean * 100.0,
            HMD_TARGET * 100.0,
            HMD_TOLERANCE * 100.0
        );
        if (mean - HMD_TARGET).abs() <= HMD_TOLERANCE {
            Ok(detail)
        } else {
            Err(detail)
        }
    })();
    Optional::Ran(outcome)
}

fn statistics_oracle() -> Outcome {
    let table = friedman_ranks(&[vec![0.9, 0.8], vec![0.8, 0.9], vec![0.7, 0.7]]).map_err(|e| e.to_string())?;
    if table.mean_ranks != vec![1.5, 1.5, 3.0] {
        return Err(format!("mean ranks {:?}, expected [1.5, 1.5, 3.0]", table.mean_ranks));
    }
    let tied = friedman_ranks(&[vec![0.9], vec![0.9], vec![0.1]]).map_err(|e| e.to_string())?;
    if tied.ranks[0][0] != 1.5 || tied.ranks[1][0] != 1.5 {
        return Err("tied best classifiers do not share rank 1.5".into());
    }

    let names: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
    let raw = vec![vec![1.0, 0.04, 0.01], vec![0.04, 1.0, 0.50], vec![0.01, 0.50, 1.0]];
    let adjusted = holm_adjust_matrix(&raw);
    let expected = [(0, 2, 0.03), (0, 1, 0.08), (1, 2, 0.50)];
    for (i, j, p) in expected {
        if (adjusted[i][j] - p).abs() > 1e-12 {
            return Err(format!("Holm-adjusted p[{i}][{j}] = {}, expected {p}", adjusted[i][j]));
        }
    }
    let cliques: Vec<Vec<String>> = holm_cliques(&names, &raw, 0.05)
        .into_iter()
        .map(|c| c.members)
        .collect();
    if cliques
        != vec![
            vec!["A".to_string(), "B".to_string()],
            vec!["B".to_string(), "C".to_string()],
        ]
    {
        return Err(format!("cliques {cliques:?}, expected [[A, B], [B, C]]"));
    }
    let ones = vec![vec![1.0; 3]; 3];
    if holm_cliques(&names, &ones, 0.05).len() != 1 {
        return Err("all p = 1 should give one clique".into());
    }

    let p = wilcoxon_signed_rank(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &[0.0; 6]).map_err(|e| e.to_string())?;
    if (p - 0.03125).abs() > 1e-15 {
        return Err(format!("Wilcoxon n=6 all positive: p = {p}, expected 0.03125"));
    }
    Ok("mean ranks [1.5, 1.5, 3.0]; Holm {AC 0.03, AB 0.08, BC 0.50}; cliques {A,B} {B,C}; p = 0.03125".into())
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|panic| {
        let msg = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(format!("panicked: {msg}"))
    })
}

fn main() {
    // `cargo test -- --list` and similar harness probes have nothing to run.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: Vec<Criterion> = vec![
        ("1 property suite", Box::new(|| Optional::Ran(guarded(property_suite)))),
        (
            "2 synthetic separability",
            Box::new(|| Optional::Ran(guarded(synthetic_separability))),
        ),
        (
            "3 variant algebra",
            Box::new(|| Optional::Ran(guarded(variant_algebra))),
        ),
        ("4 lens budget", Box::new(|| Optional::Ran(guarded(lens_budget)))),
        (
            "5 thread determinism",
            Box::new(|| Optional::Ran(guarded(thread_determinism))),
        ),
        ("6 HandMovementDirection", Box::new(hand_movement_direction)),
        (
            "7 statistics oracle",
            Box::new(|| Optional::Ran(guarded(statistics_oracle))),
        ),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Optional::Ran(Ok(detail)) => println!("PASS criterion {name}: {detail}"),
            Optional::Ran(Err(detail)) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
            Optional::Skipped(why) => println!("SKIP criterion {name}: {why}"),
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
