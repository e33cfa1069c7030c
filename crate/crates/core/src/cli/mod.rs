//! The `rpflm` command line: `test`, `simulate` and `bench`.
//!
//! Exit status is 0 on success, 2 for usage and input errors and 3 for
//! numerical failures such as a sample without variability.

pub mod io;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rptest::{test_flm, test_significance, Null, Sampler, StatKind, TestConfig, TestReport, DEFAULT_MAX_RANK};
use crate::simlab::{
    fdr_discretization_experiment, parse_scenario, run_study, scenario, trial_data,
    trial_test_seed, FdrRow, MonteCarloResult, StudyConfig, ALPHAS,
};

/// JSON schema of the `test` report.
pub const TEST_REPORT_SCHEMA: &str = include_str!("../../schema/test_report.schema.json");
/// JSON schema of a `simulate` result table.
pub const STUDY_SCHEMA: &str = include_str!("../../schema/monte_carlo_result.schema.json");

#[derive(Debug, Parser)]
#[command(name = "rpflm", version, about = "Goodness-of-fit tests for the functional linear model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test a dataset for linearity (or significance with --null simple).
    Test(TestArgs),
    /// Monte Carlo size/power study or the FDR discretization experiment.
    Simulate(SimulateArgs),
    /// Time the composite test over a range of sample sizes.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankArg {
    Auto,
    Fixed(usize),
}

impl FromStr for RankArg {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(RankArg::Auto);
        }
        match s.parse::<usize>() {
            Ok(d) if d >= 1 => Ok(RankArg::Fixed(d)),
            _ => Err(format!("expected a positive integer or 'auto', got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    FdrDiscretization,
}

/// Options shared by every command.
#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = StatKind::Cvm)]
    pub stat: StatKind,
    /// dₙ as an integer, or `auto` for SICc selection.
    #[arg(long, default_value = "auto")]
    pub rank: RankArg,
    #[arg(long, default_value_t = DEFAULT_MAX_RANK)]
    pub max_rank: usize,
    #[arg(long, default_value_t = 0.95)]
    pub variance_threshold: f64,
    #[arg(long, value_enum, default_value_t = Sampler::DataDriven)]
    pub sampler: Sampler,
    /// Use (count + 1)/(B + 1) for bootstrap p-values.
    #[arg(long)]
    pub positive_correction: bool,
    /// Draw separate bootstrap multipliers for every projection.
    #[arg(long)]
    pub independent_multipliers: bool,
    #[arg(long, value_enum)]
    pub output: Option<Output>,
    /// Write the (first) dataset to this path as CSV with a grid header row.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

impl CommonArgs {
    fn test_config(&self, projections: usize, bootstrap: usize) -> TestConfig {
        TestConfig {
            projections,
            bootstrap,
            stat: self.stat,
            variance_threshold: self.variance_threshold,
            rank: match self.rank {
                RankArg::Auto => None,
                RankArg::Fixed(d) => Some(d),
            },
            max_rank: self.max_rank,
            sampler: self.sampler,
            seed: self.seed,
            positive_correction: self.positive_correction,
            independent_multipliers: self.independent_multipliers,
        }
    }
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// n×G curve values, one curve per row.
    #[arg(long)]
    pub data: PathBuf,
    /// n responses, one per line.
    #[arg(long)]
    pub response: PathBuf,
    /// G abscissae, one per line.
    #[arg(long)]
    pub grid_file: Option<PathBuf>,
    /// The first row of the data file holds the abscissae.
    #[arg(long)]
    pub grid_header: bool,
    #[arg(long, value_enum, default_value_t = Null::Flm)]
    pub null: Null,
    #[arg(long, visible_alias = "K", default_value_t = 5)]
    pub projections: usize,
    #[arg(long, visible_alias = "B", default_value_t = 1000)]
    pub bootstrap: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub experiment: Option<Experiment>,
    /// Scenario ids such as S1,S7.
    #[arg(long, value_delimiter = ',', default_value = "S1")]
    pub scenario: Vec<String>,
    /// Deviation indices in {0,1,2}.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub d: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "50")]
    pub n: Vec<usize>,
    /// Monte Carlo trials per cell.
    #[arg(long = "M", visible_alias = "trials", default_value_t = 500)]
    pub trials: usize,
    #[arg(long = "projections", visible_alias = "K", value_delimiter = ',', default_value = "5")]
    pub projections: Vec<usize>,
    #[arg(long = "bootstrap", visible_alias = "B", value_delimiter = ',', default_value = "500")]
    pub bootstrap: Vec<usize>,
    /// Levels of the FDR discretization experiment.
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.05,0.1")]
    pub alpha: Vec<f64>,
    /// Add the wall time of every cell.
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Sample sizes, powers of two.
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,64,128,256,512,1024,2048")]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    pub trials: usize,
    #[arg(long, default_value = "S1")]
    pub scenario: String,
    #[arg(long, visible_alias = "K", default_value_t = 5)]
    pub projections: usize,
    #[arg(long, visible_alias = "B", default_value_t = 1000)]
    pub bootstrap: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// One row of `bench`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    /// Mean wall time of one composite test.
    pub seconds: f64,
    pub min_seconds: f64,
    /// p-value of the last trial, identical across runs with the same seed.
    pub p_fdr: f64,
    pub rank: usize,
}

/// Times [`test_flm`] on scenario data (d = 0) of each size.
pub fn run_bench(
    sizes: &[usize],
    trials: usize,
    scenario_id: usize,
    cfg: &TestConfig,
) -> Result<Vec<BenchRow>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    if let Some(&n) = sizes.iter().find(|n| !n.is_power_of_two() || **n < 4) {
        return Err(Error::InvalidArgument(format!("sizes must be powers of two >= 4, got {n}")));
    }
    let spec = scenario(scenario_id)?;
    sizes
        .iter()
        .map(|&n| {
            let mut total = 0.0;
            let mut min = f64::INFINITY;
            let mut last = None;
            for m in 0..trials {
                let (x, y) = trial_data(&spec, 0, n, m, cfg.seed)?;
                let test = TestConfig {
                    seed: trial_test_seed(scenario_id, 0, n, m, cfg.seed),
                    ..cfg.clone()
                };
                let start = Instant::now();
                let report = test_flm(&x, &y, &test)?;
                let secs = start.elapsed().as_secs_f64();
                total += secs;
                min = min.min(secs);
                last = Some(report);
            }
            let report = last.expect("at least one trial");
            Ok(BenchRow {
                n,
                seconds: total / trials as f64,
                min_seconds: min,
                p_fdr: report.p_fdr,
                rank: report.settings.rank.unwrap_or(0),
            })
        })
        .collect()
}

/// Parses `args` (program name first), runs the command and returns the exit
/// status. Results go to `out`, diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            if code == 0 {
                let _ = write!(out, "{}", e.render());
            } else {
                let _ = write!(err, "{}", e.render());
            }
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "rpflm: {e}");
            if e.is_numerical() {
                3
            } else {
                2
            }
        }
    }
}

/// [`run_with`] on the process's stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = run_with(args, &mut out, &mut err);
    let _ = out.flush();
    code
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let run = |cli: Cli| -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        execute(cli, &mut buf)?;
        Ok(buf)
    };
    let threads = match &cli.command {
        Command::Test(a) => a.common.threads,
        Command::Simulate(a) => a.common.threads,
        Command::Bench(a) => a.common.threads,
    };
    match threads {
        Some(0) => Err(Error::InvalidArgument("--threads must be positive".into())),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            pool.install(|| run(cli))
        }
        None => run(cli),
    }
    .and_then(|buf| Ok(out.write_all(&buf)?))
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Test(a) => cmd_test(&a, out),
        Command::Simulate(a) => cmd_simulate(&a, out),
        Command::Bench(a) => cmd_bench(&a, out),
    }
}

fn cmd_test(a: &TestArgs, out: &mut dyn Write) -> Result<()> {
    let x = io::read_sample(&a.data, a.grid_file.as_deref(), a.grid_header)?;
    let y = io::read_vector_file(&a.response)?;
    if y.len() != x.n() {
        return Err(Error::LengthMismatch {
            what: "response",
            expected: x.n(),
            got: y.len(),
        });
    }
    if let Some(path) = &a.common.dump {
        dump(path, &x, &y)?;
    }
    let cfg = a.common.test_config(a.projections, a.bootstrap);
    let report = match a.null {
        Null::Flm => test_flm(&x, &y, &cfg)?,
        Null::Simple => test_significance(&x, &y, &cfg)?,
    };
    match a.common.output.unwrap_or(Output::Json) {
        Output::Json => write_json(out, &report),
        Output::Csv => write_report_csv(out, &report),
    }
}

fn dump(path: &Path, x: &crate::funspace::FunctionalSample, y: &[f64]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    io::write_sample(&mut f, x)?;
    f.flush()?;
    let mut name = path.as_os_str().to_owned();
    name.push(".response");
    let mut f = std::io::BufWriter::new(std::fs::File::create(PathBuf::from(name))?);
    io::write_vector(&mut f, y)?;
    f.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| Error::Parse(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn write_csv<T: Serialize>(out: &mut dyn Write, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Parse(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn write_report_csv(out: &mut dyn Write, report: &TestReport) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        index: usize,
        statistic: f64,
        p: f64,
        p_fdr: f64,
    }
    let rows: Vec<Row> = report
        .per_projection
        .iter()
        .map(|r| Row {
            index: r.index,
            statistic: r.statistic,
            p: r.p,
            p_fdr: report.p_fdr,
        })
        .collect();
    write_csv(out, &rows)
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let output = a.common.output.unwrap_or(Output::Csv);
    if let Some(Experiment::FdrDiscretization) = a.experiment {
        let rows: Vec<FdrRow> =
            fdr_discretization_experiment(&a.projections, &a.bootstrap, a.trials, &a.alpha, a.common.seed)?;
        return match output {
            Output::Json => write_json(out, &rows),
            Output::Csv => write_csv(out, &rows),
        };
    }
    let scenarios = a
        .scenario
        .iter()
        .map(|s| parse_scenario(s))
        .collect::<Result<Vec<_>>>()?;
    if let Some(path) = &a.common.dump {
        let (x, y) = trial_data(&scenario(scenarios[0])?, a.d[0], a.n[0], 0, a.common.seed)?;
        dump(path, &x, &y)?;
    }
    let mut rows: Vec<MonteCarloResult> = Vec::new();
    for &k in &a.projections {
        for &b in &a.bootstrap {
            let cfg = StudyConfig {
                scenarios: scenarios.clone(),
                deviations: a.d.clone(),
                sizes: a.n.clone(),
                trials: a.trials,
                test: a.common.test_config(k, b),
                seed: a.common.seed,
                timing: a.timing,
            };
            rows.extend(run_study(&cfg)?);
        }
    }
    debug_assert!(rows.iter().all(|r| ALPHAS.iter().all(|&al| r.rejection(al).is_some())));
    match output {
        Output::Json => write_json(out, &rows),
        Output::Csv => write_csv(out, &rows),
    }
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    let k = parse_scenario(&a.scenario)?;
    let cfg = a.common.test_config(a.projections, a.bootstrap);
    let rows = run_bench(&a.n, a.trials, k, &cfg)?;
    match a.common.output.unwrap_or(Output::Csv) {
        Output::Json => write_json(out, &rows),
        Output::Csv => write_csv(out, &rows),
    }
}
