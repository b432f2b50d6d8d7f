use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use graphdiv::baselines::BinningRule;
use graphdiv::experiments::{run_experiment, InferenceMode, NoiseScale, RunOptions, Variant};
use graphdiv::gdm::resolve_k;
use graphdiv::measures::{self, TimeSeries};
use graphdiv::{parse_dataset, sniff_header, Dataset, DagSpec, Estimator, EstimatorConfig, EstimatorKind, KChoice};

#[derive(Parser, Debug)]
#[command(name = "graphdiv", version, about = "Estimate graph divergence measures from samples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate the divergence of a dataset from a graph given as JSON.
    Estimate(EstimateArgs),
    /// Estimate a named information measure between column groups.
    Measure {
        #[command(subcommand)]
        measure: Measure,
    },
    /// Run one of the benchmark experiments and write a CSV report.
    Experiment(ExperimentArgs),
}

#[derive(Args, Debug)]
struct DataArgs {
    /// CSV file with one sample per row.
    #[arg(long)]
    data: PathBuf,
    /// Treat the first row as column names.
    #[arg(long, conflicts_with = "no_header")]
    header: bool,
    /// Treat the first row as data.
    #[arg(long)]
    no_header: bool,
}

#[derive(Args, Debug)]
struct EstimatorArgs {
    /// One of gdm, ksg, bin, sigma_h, oracle.
    #[arg(long, default_value = "gdm")]
    estimator: EstimatorKind,
    /// Neighbor count, or "auto" for clamp(sqrt(N)/5, 3, N-1).
    #[arg(long)]
    k: Option<KArg>,
    /// Target samples per bin.
    #[arg(long)]
    m: Option<usize>,
    /// Seed of the tie-breaking noise.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Graph JSON: {"nodes": [{"id", "columns", "parents"}]}.
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    est: EstimatorArgs,
}

#[derive(Subcommand, Debug)]
enum Measure {
    /// Mutual information I(A; B).
    Mi {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[command(flatten)]
        est: EstimatorArgs,
    },
    /// Conditional mutual information I(A; B | C).
    Cmi {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        c: String,
        #[command(flatten)]
        est: EstimatorArgs,
    },
    /// Total correlation of two or more groups.
    Tc {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long = "group", required = true)]
        groups: Vec<String>,
        #[command(flatten)]
        est: EstimatorArgs,
    },
    /// Multivariate mutual information, minimized over partitions.
    Mmi {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long = "group", required = true)]
        groups: Vec<String>,
        #[command(flatten)]
        est: EstimatorArgs,
    },
    /// Directed information rate from X to Y, rows being time steps.
    Di {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long, default_value_t = 1)]
        order: usize,
        #[command(flatten)]
        est: EstimatorArgs,
    },
    /// Restricted directed information, optionally conditioned on a third series.
    Rdi {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        source: String,
        #[arg(long)]
        target: String,
        #[arg(long)]
        cond: Option<String>,
        #[command(flatten)]
        est: EstimatorArgs,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NoiseReading {
    Variance,
    Stddev,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=6))]
    id: u8,
    /// Ascending sample sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    n_list: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, value_delimiter = ',', default_value = "gdm,ksg,bin")]
    estimators: Vec<EstimatorKind>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    k: Option<KArg>,
    #[arg(long)]
    m: Option<usize>,
    /// How the dynamics noise parameter 0.03 is read.
    #[arg(long, value_enum, default_value_t = NoiseReading::Variance)]
    noise: NoiseReading,
    /// Network scoring for experiment 5: rdi or crdi.
    #[arg(long, default_value = "crdi")]
    mode: InferenceMode,
    /// Selection rule for experiment 6: cmim or cmim2.
    #[arg(long, default_value = "cmim2")]
    variant: Variant,
}

#[derive(Clone, Copy, Debug)]
struct KArg(KChoice);

impl std::str::FromStr for KArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Self(KChoice::Auto));
        }
        match s.parse::<usize>() {
            Ok(k) if k > 0 => Ok(Self(KChoice::Fixed(k))),
            _ => Err(format!("expected a positive integer or \"auto\", got {s:?}")),
        }
    }
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<graphdiv::Error> for Failure {
    fn from(e: graphdiv::Error) -> Self {
        Self::Data(e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// `%.17g`: 17 significant digits, trailing zeros dropped.
fn g17(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..17).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        trim(&format!("{:.*}", (16 - exp) as usize, v))
    }
}

fn load_data(args: &DataArgs) -> Outcome<Dataset<f64>> {
    let text = fs::read_to_string(&args.data)
        .map_err(|e| Failure::Data(format!("{}: {e}", args.data.display())))?;
    let header = if args.header {
        true
    } else if args.no_header {
        false
    } else {
        sniff_header(&text)
    };
    Ok(parse_dataset(&text, header)?)
}

fn column(ds: &Dataset<f64>, token: &str) -> Outcome<usize> {
    let token = token.trim();
    if let Ok(i) = token.parse::<usize>() {
        if i >= ds.n_cols() {
            return Err(Failure::Data(format!("column {i} out of range for {} columns", ds.n_cols())));
        }
        return Ok(i);
    }
    ds.column_index(token)
        .ok_or_else(|| Failure::Data(format!("no column named {token:?}")))
}

fn group(ds: &Dataset<f64>, spec: &str) -> Outcome<Vec<usize>> {
    if spec.trim().is_empty() {
        return Err(usage("empty column group"));
    }
    spec.split(',').map(|t| column(ds, t)).collect()
}

fn config_of(k: Option<KArg>) -> EstimatorConfig {
    match k {
        Some(KArg(KChoice::Fixed(k))) => EstimatorConfig::with_k(k),
        _ => EstimatorConfig::auto(),
    }
}

fn estimator_of(args: &EstimatorArgs) -> Outcome<Estimator> {
    let kind = args.estimator;
    if args.k.is_some() && !kind.uses_k() {
        return Err(usage(format!("--k does not apply to the {kind} estimator")));
    }
    if args.m.is_some() && kind != EstimatorKind::Binning {
        return Err(usage(format!("--m does not apply to the {kind} estimator")));
    }
    if args.seed.is_some() && kind != EstimatorKind::SigmaH {
        return Err(usage(format!("--seed does not apply to the {kind} estimator")));
    }
    if args.m == Some(0) {
        return Err(usage("--m must be positive"));
    }
    let rule = args.m.map_or_else(BinningRule::default, |m| BinningRule { target_per_bin: m });
    Ok(Estimator::from_kind(kind, config_of(args.k), rule, args.seed.unwrap_or(0)))
}

fn k_for(args: &EstimatorArgs, n: usize) -> Outcome<usize> {
    if args.estimator.uses_k() {
        Ok(resolve_k(&config_of(args.k), n)?)
    } else {
        Ok(0)
    }
}

fn result_line(value: f64, k: usize, n: usize) -> String {
    format!("value_nats={}\tk={k}\tn={n}", g17(value))
}

fn cmd_estimate(args: &EstimateArgs) -> Outcome<String> {
    let est = estimator_of(&args.est)?;
    let ds = load_data(&args.data)?;
    let dag = DagSpec::load(&args.graph)?;
    let r = est.estimate(&ds, &dag)?;
    Ok(result_line(r.value, r.k.unwrap_or(0), r.n))
}

fn series(ds: Dataset<f64>) -> Outcome<TimeSeries<f64>> {
    Ok(TimeSeries::new(ds)?)
}

fn groups_of(ds: &Dataset<f64>, specs: &[String]) -> Outcome<Vec<Vec<usize>>> {
    specs.iter().map(|g| group(ds, g)).collect()
}

fn cmd_measure(measure: &Measure) -> Outcome<String> {
    match measure {
        Measure::Mi { data, a, b, est } => {
            let e = estimator_of(est)?;
            let ds = load_data(data)?;
            let v = measures::mi(&ds, &group(&ds, a)?, &group(&ds, b)?, &e)?;
            Ok(result_line(v, k_for(est, ds.n_rows())?, ds.n_rows()))
        }
        Measure::Cmi { data, a, b, c, est } => {
            let e = estimator_of(est)?;
            let ds = load_data(data)?;
            let v = measures::cmi(&ds, &group(&ds, a)?, &group(&ds, b)?, &group(&ds, c)?, &e)?;
            Ok(result_line(v, k_for(est, ds.n_rows())?, ds.n_rows()))
        }
        Measure::Tc { data, groups, est } => {
            let e = estimator_of(est)?;
            let ds = load_data(data)?;
            let v = measures::total_correlation(&ds, &groups_of(&ds, groups)?, &e)?;
            Ok(result_line(v, k_for(est, ds.n_rows())?, ds.n_rows()))
        }
        Measure::Mmi { data, groups, est } => {
            let e = estimator_of(est)?;
            let ds = load_data(data)?;
            let (v, partition) = measures::mmi(&ds, &groups_of(&ds, groups)?, &e)?;
            Ok(format!(
                "{}\tpartition={}",
                result_line(v, k_for(est, ds.n_rows())?, ds.n_rows()),
                partition.rgs_string()
            ))
        }
        Measure::Di { data, x, y, order, est } => {
            let e = estimator_of(est)?;
            let ds = load_data(data)?;
            let (x, y) = (column(&ds, x)?, column(&ds, y)?);
            let ts = series(ds)?;
            let v = measures::directed_information(&ts, x, y, *order, &e)?;
            let n = ts.n_steps() - order;
            Ok(result_line(v, k_for(est, n)?, n))
        }
        Measure::Rdi { data, source, target, cond, est } => {
            let e = estimator_of(est)?;
            let ds = load_data(data)?;
            let (s, t) = (column(&ds, source)?, column(&ds, target)?);
            let c = cond.as_deref().map(|c| column(&ds, c)).transpose()?;
            let ts = series(ds)?;
            let v = match c {
                Some(c) => measures::crdi(&ts, s, t, c, &e)?,
                None => measures::rdi(&ts, s, t, &e)?,
            };
            let n = ts.n_steps() - 1;
            Ok(result_line(v, k_for(est, n)?, n))
        }
    }
}

fn cmd_experiment(args: &ExperimentArgs) -> Outcome<Option<String>> {
    if args.k.is_some() && !args.estimators.iter().any(|e| e.uses_k()) {
        return Err(usage("--k does not apply to any selected estimator"));
    }
    if args.m.is_some() && !args.estimators.contains(&EstimatorKind::Binning) {
        return Err(usage("--m applies only with the bin estimator"));
    }
    if args.m == Some(0) {
        return Err(usage("--m must be positive"));
    }
    if args.trials == 0 {
        return Err(usage("--trials must be positive"));
    }
    if args.n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(usage("--n-list must be strictly ascending"));
    }
    let opts = RunOptions {
        config: config_of(args.k),
        binning: args.m.map_or_else(BinningRule::default, |m| BinningRule { target_per_bin: m }),
        noise: match args.noise {
            NoiseReading::Variance => NoiseScale::Variance(0.03),
            NoiseReading::Stddev => NoiseScale::StdDev(0.03),
        },
        mode: args.mode,
        variant: args.variant,
    };
    let report = run_experiment(args.id, &args.n_list, args.trials, &args.estimators, args.seed, &opts)?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    match &args.out {
        Some(path) => {
            write_file(path, &buf)?;
            Ok(None)
        }
        None => Ok(Some(String::from_utf8_lossy(&buf).trim_end().to_string())),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Outcome<()> {
    fs::write(path, bytes).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn configure_threads() -> Outcome<()> {
    let Ok(raw) = std::env::var("GRAPHDIV_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("GRAPHDIV_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| usage(e.to_string()))
}

fn run(cli: &Cli) -> Outcome<Option<String>> {
    configure_threads()?;
    match &cli.command {
        Command::Estimate(args) => cmd_estimate(args).map(Some),
        Command::Measure { measure } => cmd_measure(measure).map(Some),
        Command::Experiment(args) => cmd_experiment(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(out) => {
            if let Some(text) = out {
                let mut stdout = std::io::stdout().lock();
                if writeln!(stdout, "{text}").is_err() {
                    return ExitCode::from(3);
                }
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
