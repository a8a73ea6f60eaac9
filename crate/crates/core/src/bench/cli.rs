//! Command-line front end: `classify`, `benchmark` and `ranks`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::data::align_encodings;
use crate::error::{Error, Result};
use crate::forest::ForestConfig;
use crate::lenses::LensSelectionConfig;
use crate::multivariate::{self, PipelineConfig, Variant};

use super::{accuracy, read_ts_file, results, run_benchmark, stats};

#[derive(Debug, Parser)]
#[command(
    name = "redcomets",
    version,
    about = "Symbolic lens ensembles for multivariate time-series classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit on a training file and label every instance of a test file.
    Classify {
        #[command(flatten)]
        data: DataArgs,
        /// Variant 1..9.
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=9))]
        variant: u8,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Evaluate variants over seeded stratified resamples.
    Benchmark {
        #[command(flatten)]
        data: DataArgs,
        /// Variants 1..9, comma separated.
        #[arg(long, default_value = "3", value_delimiter = ',', value_parser = clap::value_parser!(u8).range(1..=9))]
        variant: Vec<u8>,
        #[arg(long, default_value_t = 30)]
        resamples: usize,
        /// Results file; standard output when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Rank variants across datasets from one or more results files.
    Ranks {
        #[arg(required = true)]
        results: Vec<PathBuf>,
        /// Significance level for the pairwise tests.
        #[arg(long, default_value_t = 0.05)]
        significance: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct DataArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    /// Lenses per representation as a proportion of the series length.
    #[arg(long, default_value_t = 0.05)]
    p: f64,
    #[arg(long, default_value_t = 100)]
    trees: usize,
    /// Cross-validation folds for validation voting.
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    alpha_min: usize,
    #[arg(long, default_value_t = 10)]
    alpha_max: usize,
    /// Worker threads, 0 for all cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

impl PipelineArgs {
    fn config(&self) -> Result<PipelineConfig> {
        let lenses = LensSelectionConfig {
            p: self.p,
            alpha_min: self.alpha_min,
            alpha_max: self.alpha_max,
            ..Default::default()
        };
        lenses.validate()?;
        if self.trees == 0 {
            return Err(Error::invalid_input("--trees must be at least 1"));
        }
        if self.folds < 2 {
            return Err(Error::invalid_input("--folds must be at least 2"));
        }
        Ok(PipelineConfig {
            lenses,
            forest: ForestConfig {
                trees: self.trees,
                bootstrap: true,
            },
            folds: self.folds,
            seed: self.seed,
        })
    }
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid_input(format!("cannot start thread pool: {e}")))?;
    pool.install(f)
}

fn load_pair(data: &DataArgs) -> Result<(crate::Dataset, crate::Dataset)> {
    let train = read_ts_file(&data.train)?;
    let test = read_ts_file(&data.test)?;
    align_encodings(&train, &test)
}

fn emit(output: Option<&PathBuf>, text: &str, out: &mut dyn Write) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn classify(data: &DataArgs, variant: u8, pipeline: &PipelineArgs, out: &mut dyn Write) -> Result<()> {
    let config = pipeline.config()?;
    let (train, test) = load_pair(data)?;
    let variant = Variant::from_id(variant)?;
    let report = with_threads(pipeline.threads, || multivariate::run(variant, &train, &test, &config))?;
    let enc = train.encoding();
    writeln!(out, "instance,predicted,actual")?;
    for (i, (&p, &a)) in report.labels.iter().zip(test.labels()).enumerate() {
        writeln!(
            out,
            "{i},{},{}",
            enc.decode(p).unwrap_or("?"),
            enc.decode(a).unwrap_or("?")
        )?;
    }
    writeln!(out, "accuracy,{:.6}", accuracy(&report.labels, test.labels()))?;
    Ok(())
}

fn benchmark(
    data: &DataArgs,
    variants: &[u8],
    resamples: usize,
    output: Option<&PathBuf>,
    pipeline: &PipelineArgs,
    out: &mut dyn Write,
) -> Result<()> {
    let config = pipeline.config()?;
    let (train, test) = load_pair(data)?;
    let results = with_threads(pipeline.threads, || {
        variants
            .iter()
            .map(|&v| run_benchmark(&train, &test, v, resamples, &config))
            .collect::<Result<Vec<_>>>()
    })?;
    let text = results::render_results(&results)?;
    emit(output, &text, out)?;
    if output.is_some() {
        for r in &results {
            writeln!(
                out,
                "{} RED CoMETS-{}: mean accuracy {:.6} over {} resamples",
                r.dataset,
                r.variant_id,
                r.mean_accuracy,
                r.accuracies.len()
            )?;
        }
    }
    Ok(())
}

fn ranks(files: &[PathBuf], significance: f64, output: Option<&PathBuf>, out: &mut dyn Write) -> Result<()> {
    if !(significance > 0.0 && significance < 1.0) {
        return Err(Error::invalid_input("--significance must be in (0, 1)"));
    }
    // (variant, dataset) -> resample -> accuracy
    let mut cells: BTreeMap<(u8, String), BTreeMap<usize, f64>> = BTreeMap::new();
    for file in files {
        for row in results::read_results(file)? {
            let cell = cells.entry((row.variant, row.dataset.clone())).or_default();
            if cell.insert(row.resample, row.accuracy).is_some() {
                return Err(Error::invalid_input(format!(
                    "duplicate result for {} variant {} resample {}",
                    row.dataset, row.variant, row.resample
                )));
            }
        }
    }
    let variants: Vec<u8> = cells
        .keys()
        .map(|(v, _)| *v)
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let datasets: Vec<String> = cells
        .keys()
        .map(|(_, d)| d.clone())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut grid = Vec::with_capacity(variants.len());
    for &v in &variants {
        let mut row = Vec::with_capacity(datasets.len());
        for d in &datasets {
            let cell = cells
                .get(&(v, d.clone()))
                .ok_or_else(|| Error::invalid_input(format!("variant {v} has no results for dataset {d}")))?;
            row.push(cell.values().sum::<f64>() / cell.len() as f64);
        }
        grid.push(row);
    }
    let names: Vec<String> = variants.iter().map(|v| format!("RED CoMETS-{v}")).collect();
    let cmp = stats::compare(&names, &grid, significance)?;
    let (chi2, p) = cmp.table.friedman_test();

    let mut text = String::new();
    text.push_str(&format!(
        "friedman chi2 {chi2:.6} p {p:.6} ({} classifiers, {} datasets)\n",
        names.len(),
        datasets.len()
    ));
    text.push_str("position,classifier,mean_rank,mean_accuracy\n");
    for (pos, &c) in cmp.order.iter().enumerate() {
        let mean_acc = grid[c].iter().sum::<f64>() / grid[c].len() as f64;
        text.push_str(&format!(
            "{},{},{:.6},{:.6}\n",
            pos + 1,
            names[c],
            cmp.table.mean_ranks[c],
            mean_acc
        ));
    }
    text.push_str(&format!("cliques (holm-adjusted wilcoxon, alpha {significance})\n"));
    for clique in &cmp.cliques {
        text.push_str(&clique.members.join(" | "));
        text.push('\n');
    }
    emit(output, &text, out)
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Classify {
            data,
            variant,
            pipeline,
        } => classify(&data, variant, &pipeline, out),
        Command::Benchmark {
            data,
            variant,
            resamples,
            output,
            pipeline,
        } => benchmark(&data, &variant, resamples, output.as_ref(), &pipeline, out),
        Command::Ranks {
            results,
            significance,
            output,
        } => ranks(&results, significance, output.as_ref(), out),
    }
}

/// Runs the command line `args` (program name first), writing normal output
/// to `out` and diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

/// Entry point used by the binary.
pub fn cli_main() -> i32 {
    // Unlocked handles: worker threads log to stderr while a command runs.
    run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}
