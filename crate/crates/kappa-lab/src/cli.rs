//! Subcommand front-end. Every subcommand is a thin binding: resolve
//! flags against an optional config file and the environment, call one
//! library operation, render through the report module. Results go to
//! stdout or `--out`; diagnostics go to stderr.
//!
//! Precedence for every setting: explicit flag, then config file, then
//! environment (threads only, via KAPPA_LAB_THREADS), then built-in
//! defaults (seed 0, q 0.01, alpha 1.1, x-min 1, format table,
//! threads 0 = library default).
//!
//! Exit codes: 0 success, 2 usage or domain error, 1 runtime failure
//! (io, root finding, a failed run).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::distributions::{
    kappa_pareto, sample, theoretical_threshold, DistributionSpec, MixtureSpec, ParetoParams,
    Sample,
};
use crate::error::{Error, Result};
use crate::estimators::stochastic_alpha_kappa;
use crate::montecarlo::{
    fit_bias_scaling, mc_kappa_bias, mc_kappa_sum_dependence, mc_mixture_bias,
    mc_monotone_convergence, mc_superadditivity,
};
use crate::report::{format_sig, ConfigEcho, ExperimentReport, ReportRows};

#[derive(Parser, Debug)]
#[command(
    name = "kappa-lab",
    version,
    about = "Top-share measurement for heavy-tailed samples: closed forms, estimators, and Monte Carlo experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the closed-form top-q share of a Pareto law.
    Kappa(CommonArgs),
    /// Draw one Pareto sample and print its values.
    Sample(CommonArgs),
    /// Monte Carlo mean/median/std of the naive share over an --n grid.
    BiasTable(CommonArgs),
    /// Merged-sample share versus the weighted average over parts.
    Superadd(SuperaddArgs),
    /// Mean frozen-threshold share over an increasing --n grid.
    Converge(ConvergeArgs),
    /// Estimated versus exact shares for a unit-mean Pareto mixture.
    Mixture(MixtureArgs),
    /// Correlation between the estimated share and the sample total.
    Corr(CommonArgs),
    /// Power-law fit of the estimator bias against sample size.
    ScalingFit(CommonArgs),
    /// Print the closed-form share under a randomized tail index.
    Stochalpha(MixtureArgs),
}

#[derive(Args, Debug, Default, Clone)]
struct CommonArgs {
    /// Master seed for all randomness.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo run count.
    #[arg(long)]
    runs: Option<usize>,
    /// Sample size; repeat the flag (or comma-separate) for grids.
    #[arg(long = "n", value_delimiter = ',')]
    n: Vec<usize>,
    /// Tail probability: the top fraction of interest.
    #[arg(long)]
    q: Option<f64>,
    /// Pareto tail index.
    #[arg(long)]
    alpha: Option<f64>,
    /// Pareto scale, the lower support bound.
    #[arg(long = "x-min")]
    x_min: Option<f64>,
    /// Output path; an existing directory gets the default file name.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Worker threads; 0 picks the library default.
    #[arg(long)]
    threads: Option<usize>,
    /// Config file of `key = value` lines supplying flag defaults.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SuperaddArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Per-part tail indexes; defaults to --alpha for every part.
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Frozen threshold; defaults to the closed-form threshold at --q.
    #[arg(long)]
    h: Option<f64>,
}

#[derive(Args, Debug)]
struct MixtureArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Component weights, comma separated, summing to 1.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Component tail indexes, comma separated.
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
}

/// Output rendering for results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Csv,
    Json,
}

impl OutputFormat {
    fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Table => "txt",
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Settings read from a config file; `None` means the file did not
/// mention the key.
#[derive(Debug, Default, PartialEq)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub n: Option<Vec<usize>>,
    pub q: Option<f64>,
    pub alpha: Option<f64>,
    pub x_min: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub threads: Option<usize>,
}

fn bad_value(lineno: usize, key: &str, value: &str) -> Error {
    Error::Invalid(format!(
        "config line {lineno}: invalid value `{value}` for key `{key}`"
    ))
}

fn parse_cfg<T: std::str::FromStr>(lineno: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad_value(lineno, key, value))
}

fn parse_cfg_list<T: std::str::FromStr>(lineno: usize, key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|item| parse_cfg(lineno, key, item.trim()))
        .collect()
}

/// Reads a `key = value` config file. `#` starts a comment, blank
/// lines are skipped, keys match the long flag names, and `n` takes a
/// comma-separated list. Unknown keys and malformed values report
/// their line number.
pub fn parse_config_file(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut cfg = FileConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Invalid(format!(
                "config line {lineno}: expected `key = value`, got `{line}`"
            )));
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "seed" => cfg.seed = Some(parse_cfg(lineno, key, value)?),
            "runs" => cfg.runs = Some(parse_cfg(lineno, key, value)?),
            "n" => cfg.n = Some(parse_cfg_list(lineno, key, value)?),
            "q" => cfg.q = Some(parse_cfg(lineno, key, value)?),
            "alpha" => cfg.alpha = Some(parse_cfg(lineno, key, value)?),
            "x-min" => cfg.x_min = Some(parse_cfg(lineno, key, value)?),
            "out" => cfg.out = Some(PathBuf::from(value)),
            "format" => {
                cfg.format = Some(
                    OutputFormat::from_str(value, true).map_err(|_| bad_value(lineno, key, value))?,
                )
            }
            "threads" => cfg.threads = Some(parse_cfg(lineno, key, value)?),
            other => {
                return Err(Error::Invalid(format!(
                    "config line {lineno}: unknown key `{other}`"
                )))
            }
        }
    }
    Ok(cfg)
}

fn parse_threads_env(value: Option<&str>) -> Result<Option<usize>> {
    match value {
        None => Ok(None),
        Some(v) => v.parse().map(Some).map_err(|_| {
            Error::Invalid(format!("KAPPA_LAB_THREADS must be a thread count, got `{v}`"))
        }),
    }
}

/// Flags with precedence applied and defaults filled in.
#[derive(Debug, Clone)]
struct Resolved {
    seed: u64,
    runs: Option<usize>,
    n: Vec<usize>,
    q: f64,
    alpha: f64,
    x_min: f64,
    out: Option<PathBuf>,
    format: OutputFormat,
    threads: usize,
}

fn resolve(common: &CommonArgs) -> Result<Resolved> {
    let file = match &common.config {
        Some(path) => parse_config_file(path)?,
        None => FileConfig::default(),
    };
    let env = std::env::var("KAPPA_LAB_THREADS").ok();
    let env_threads = parse_threads_env(env.as_deref())?;
    Ok(Resolved {
        seed: common.seed.or(file.seed).unwrap_or(0),
        runs: common.runs.or(file.runs),
        n: if common.n.is_empty() {
            file.n.unwrap_or_default()
        } else {
            common.n.clone()
        },
        q: common.q.or(file.q).unwrap_or(0.01),
        alpha: common.alpha.or(file.alpha).unwrap_or(1.1),
        x_min: common.x_min.or(file.x_min).unwrap_or(1.0),
        out: common.out.clone().or(file.out),
        format: common.format.or(file.format).unwrap_or(OutputFormat::Table),
        threads: common.threads.or(file.threads).or(env_threads).unwrap_or(0),
    })
}

impl Resolved {
    fn pareto(&self) -> Result<ParetoParams> {
        ParetoParams::new(self.alpha, self.x_min)
    }

    fn spec(&self) -> Result<DistributionSpec> {
        Ok(DistributionSpec::Pareto(self.pareto()?))
    }

    fn runs(&self) -> Result<usize> {
        self.runs
            .ok_or_else(|| Error::Invalid("`--runs` is required for this subcommand".into()))
    }

    fn single_n(&self) -> Result<usize> {
        match self.n.as_slice() {
            [n] => Ok(*n),
            [] => Err(Error::Invalid("`--n` is required for this subcommand".into())),
            _ => Err(Error::Invalid("this subcommand takes exactly one `--n`".into())),
        }
    }

    fn n_grid(&self) -> Result<&[usize]> {
        if self.n.is_empty() {
            return Err(Error::Invalid(
                "`--n` is required for this subcommand (repeat it for a grid)".into(),
            ));
        }
        Ok(&self.n)
    }
}

/// Runs the closure inside a dedicated pool of `threads` workers, or
/// on the caller's pool when `threads` is 0. Results never depend on
/// the choice; this only sets the parallelism budget.
fn with_pool<T, F>(threads: usize, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> Result<T> + Send,
{
    if threads == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Invalid(format!("cannot build a {threads}-thread pool: {e}")))?;
    pool.install(f)
}

fn io_err(path: &str, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_string(),
        message: e.to_string(),
    }
}

/// Writes a scalar or preformatted text result to --out or stdout.
fn emit_text(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| io_err("stdout", e)),
        Some(path) => {
            std::fs::write(path, text).map_err(|e| io_err(&path.display().to_string(), e))
        }
    }
}

/// Renders a report in the chosen format and writes it to --out or
/// stdout. An --out that names an existing directory receives the
/// report's default file name inside it.
fn emit_report(
    report: &ExperimentReport,
    format: OutputFormat,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<()> {
    let rendered = match format {
        OutputFormat::Table => report.render_table(),
        OutputFormat::Csv => report.to_csv()?,
        OutputFormat::Json => report.to_json()?,
    };
    let target = match out {
        None => return emit_text(&rendered, None, stdout),
        Some(path) if path.is_dir() => {
            path.join(format!("{}.{}", report.file_stem(), format.extension()))
        }
        Some(path) => path.to_path_buf(),
    };
    emit_text(&rendered, Some(&target), stdout)
}

fn render_sample(smp: &Sample, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Table => {
            let mut text = String::new();
            for v in smp.values() {
                text.push_str(&format!("{v}\n"));
            }
            Ok(text)
        }
        OutputFormat::Csv => {
            let mut wtr = csv::WriterBuilder::new()
                .terminator(csv::Terminator::CRLF)
                .from_writer(Vec::new());
            let as_err = |e: csv::Error| Error::Invalid(format!("csv render failed: {e}"));
            wtr.write_record(["value"]).map_err(as_err)?;
            for v in smp.values() {
                wtr.write_record([format!("{v}")]).map_err(as_err)?;
            }
            let bytes = wtr
                .into_inner()
                .map_err(|e| Error::Invalid(format!("csv render failed: {e}")))?;
            String::from_utf8(bytes).map_err(|e| Error::Invalid(format!("non-utf8 csv: {e}")))
        }
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(smp)
                .map_err(|e| Error::Invalid(format!("json render failed: {e}")))?;
            s.push('\n');
            Ok(s)
        }
    }
}

fn echo(r: &Resolved) -> ConfigEcho {
    let mut e = ConfigEcho::new(r.seed);
    e.q = Some(r.q);
    e.runs = r.runs;
    e
}

fn cmd_kappa(r: &Resolved, stdout: &mut dyn Write) -> Result<()> {
    let value = kappa_pareto(r.alpha, r.q)?;
    emit_text(&format!("{}\n", format_sig(value)), r.out.as_deref(), stdout)
}

fn cmd_stochalpha(args: &MixtureArgs, stdout: &mut dyn Write) -> Result<()> {
    let r = resolve(&args.common)?;
    let alphas = args
        .alphas
        .as_deref()
        .ok_or_else(|| Error::Invalid("`--alphas` is required for stochalpha".into()))?;
    let weights = args
        .weights
        .as_deref()
        .ok_or_else(|| Error::Invalid("`--weights` is required for stochalpha".into()))?;
    let est = stochastic_alpha_kappa(alphas, weights, r.q)?;
    emit_text(&format!("{}\n", format_sig(est.value)), r.out.as_deref(), stdout)
}

fn cmd_sample(r: &Resolved, stdout: &mut dyn Write) -> Result<()> {
    let n = r.single_n()?;
    let smp = sample(&r.spec()?, n, r.seed)?;
    emit_text(&render_sample(&smp, r.format)?, r.out.as_deref(), stdout)
}

fn cmd_bias_table(r: &Resolved, stdout: &mut dyn Write) -> Result<()> {
    let runs = r.runs()?;
    let grid = r.n_grid()?;
    let spec = r.spec()?;
    let summaries = with_pool(r.threads, || {
        grid.iter()
            .map(|&n| mc_kappa_bias(&spec, r.q, n, runs, r.seed))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut config = echo(r);
    config.n = Some(grid.to_vec());
    config.spec = Some(spec);
    let report = ExperimentReport::new(config, ReportRows::BiasTable(summaries))?;
    emit_report(&report, r.format, r.out.as_deref(), stdout)
}

fn cmd_superadd(args: &SuperaddArgs, stdout: &mut dyn Write) -> Result<()> {
    let r = resolve(&args.common)?;
    let runs = r.runs()?;
    let sizes = r.n_grid()?;
    let alphas: Vec<f64> = match &args.alphas {
        Some(list) => list.clone(),
        None => vec![r.alpha; sizes.len()],
    };
    if alphas.len() != sizes.len() {
        return Err(Error::Invalid(format!(
            "--alphas must match the part count, got {} alphas for {} parts",
            alphas.len(),
            sizes.len()
        )));
    }
    let specs = alphas
        .iter()
        .map(|&a| Ok(DistributionSpec::Pareto(ParetoParams::new(a, r.x_min)?)))
        .collect::<Result<Vec<_>>>()?;
    let record = with_pool(r.threads, || {
        mc_superadditivity(&specs, sizes, r.q, runs, r.seed)
    })?;
    let mut config = echo(&r);
    config.n = Some(sizes.to_vec());
    config.specs = Some(specs);
    let report = ExperimentReport::new(config, ReportRows::SuperAdd(record))?;
    emit_report(&report, r.format, r.out.as_deref(), stdout)
}

fn cmd_converge(args: &ConvergeArgs, stdout: &mut dyn Write) -> Result<()> {
    let r = resolve(&args.common)?;
    let runs = r.runs()?;
    let sizes = r.n_grid()?;
    let spec = r.spec()?;
    let h = match args.h {
        Some(h) => h,
        None => theoretical_threshold(&r.pareto()?, r.q)?,
    };
    let result = with_pool(r.threads, || {
        mc_monotone_convergence(&spec, h, sizes, runs, r.seed)
    })?;
    let mut config = echo(&r);
    config.n = Some(sizes.to_vec());
    config.spec = Some(spec);
    config.threshold = Some(h);
    let report = ExperimentReport::new(config, ReportRows::Convergence(result))?;
    emit_report(&report, r.format, r.out.as_deref(), stdout)
}

fn cmd_mixture(args: &MixtureArgs, stdout: &mut dyn Write) -> Result<()> {
    let r = resolve(&args.common)?;
    let runs = r.runs()?;
    let n = r.single_n()?;
    let weights = args
        .weights
        .clone()
        .ok_or_else(|| Error::Invalid("`--weights` is required for mixture".into()))?;
    let alphas = args
        .alphas
        .clone()
        .ok_or_else(|| Error::Invalid("`--alphas` is required for mixture".into()))?;
    let mix = MixtureSpec::new(weights.clone(), alphas.clone())?;
    let record = with_pool(r.threads, || mc_mixture_bias(&mix, r.q, n, runs, r.seed))?;
    let mut config = echo(&r);
    config.n = Some(vec![n]);
    config.spec = Some(DistributionSpec::Mixture(mix));
    config.weights = Some(weights);
    config.alphas = Some(alphas);
    let report = ExperimentReport::new(config, ReportRows::MixtureBias(record))?;
    emit_report(&report, r.format, r.out.as_deref(), stdout)
}

fn cmd_corr(r: &Resolved, stdout: &mut dyn Write) -> Result<()> {
    let runs = r.runs()?;
    let n = r.single_n()?;
    let spec = r.spec()?;
    let record = with_pool(r.threads, || {
        mc_kappa_sum_dependence(&spec, r.q, n, runs, r.seed)
    })?;
    let mut config = echo(r);
    config.n = Some(vec![n]);
    config.spec = Some(spec);
    let report = ExperimentReport::new(config, ReportRows::Correlation(record))?;
    emit_report(&report, r.format, r.out.as_deref(), stdout)
}

fn cmd_scaling_fit(r: &Resolved, stdout: &mut dyn Write) -> Result<()> {
    let runs = r.runs()?;
    let grid = r.n_grid()?;
    let spec = r.spec()?;
    let population = kappa_pareto(r.alpha, r.q)?;
    let points = with_pool(r.threads, || {
        grid.iter()
            .map(|&n| {
                let summary = mc_kappa_bias(&spec, r.q, n, runs, r.seed)?;
                Ok((n, population - summary.mean))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let fit = fit_bias_scaling(&points)?;
    let mut config = echo(r);
    config.n = Some(grid.to_vec());
    config.spec = Some(spec);
    let report = ExperimentReport::new(config, ReportRows::ScalingFit(fit))?;
    emit_report(&report, r.format, r.out.as_deref(), stdout)
}

fn dispatch(command: &Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Kappa(c) => cmd_kappa(&resolve(c)?, stdout),
        Command::Sample(c) => cmd_sample(&resolve(c)?, stdout),
        Command::BiasTable(c) => cmd_bias_table(&resolve(c)?, stdout),
        Command::Superadd(a) => cmd_superadd(a, stdout),
        Command::Converge(a) => cmd_converge(a, stdout),
        Command::Mixture(a) => cmd_mixture(a, stdout),
        Command::Corr(c) => cmd_corr(&resolve(c)?, stdout),
        Command::ScalingFit(c) => cmd_scaling_fit(&resolve(c)?, stdout),
        Command::Stochalpha(a) => cmd_stochalpha(a, stdout),
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Io { .. } | Error::RootFind(_) | Error::McRun { .. } => 1,
        _ => 2,
    }
}

/// Testable entry point writing to the given streams.
fn run_cli_to<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful output, not errors.
            return if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                2
            } else {
                let _ = write!(stdout, "{e}");
                0
            };
        }
    };
    match dispatch(&cli.command, stdout) {
        Ok(()) => 0,
        Err(err) => {
            let _ = writeln!(stderr, "error: {err}");
            exit_code_for(&err)
        }
    }
}

/// Parses argv, runs the selected subcommand, and returns the process
/// exit code: 0 success, 2 usage or domain error, 1 runtime failure.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr().lock();
    run_cli_to(argv, &mut stdout, &mut stderr)
}
