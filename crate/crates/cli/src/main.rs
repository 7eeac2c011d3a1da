//! `csint`: batch front end. Results go to standard output as JSON lines (CSV
//! for `shrink`); errors go to standard error with exit code 2 for bad input
//! and 3 for numerical failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use csint::anomaly::{check_vanishing_filters, estimate_alpha1, AnomalyError};
use csint::csint::{
    degree2_invariant, distance_mod1, gauss_linking, shrink_limit, shrink_prediction, writhe_integral, CsintError,
    SamplerConfig,
};
use csint::geom::{presets, Curve, LinkEmbedding};
use csint::sampling::{with_threads, Method};
use serde::Serialize;
use serde_json::{json, Value};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "csint", version, about = "Knot and link invariants from configuration-space integrals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Linking number, writhe integral or degree-two invariant.
    Invariant {
        kind: Kind,
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        sampler: SamplerArgs,
        /// Components for `lk`.
        #[arg(long, value_delimiter = ',', default_value = "0,1")]
        pair: Vec<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Vanishing filters for two-strand anomaly diagrams, and the degree-one coefficient.
    Anomaly {
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long)]
        alpha1: bool,
        /// Random configurations per diagram.
        #[arg(long, default_value_t = 200)]
        configurations: usize,
        #[command(flatten)]
        sampler: SamplerArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Writhe integrals of horizontally shrunk copies of a knot, as CSV.
    Shrink {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_delimiter = ',', default_value = "1,0.1,0.01,0.001")]
        lambdas: Vec<f64>,
        #[command(flatten)]
        sampler: SamplerArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Lk,
    Writhe,
    V2,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Built-in link, e.g. hopf, trefoil, figure-eight.
    #[arg(long)]
    preset: Option<String>,
    /// Link embedding as JSON.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct SamplerArgs {
    /// Sample or evaluation budget; accepts forms like 2e7.
    #[arg(long, value_parser = parse_count)]
    samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// monte_carlo (mc), quasi_mc (qmc) or quadrature.
    #[arg(long)]
    method: Option<Method>,
    #[arg(long, default_value_t = 15)]
    blocks: usize,
}

#[derive(Args)]
struct OutArgs {
    /// Also append the JSON record to this file.
    #[arg(long)]
    json_out: Option<PathBuf>,
    /// Record a wall time of zero so that reruns are byte-identical.
    #[arg(long)]
    deterministic: bool,
}

fn parse_count(s: &str) -> Result<u64, String> {
    let x: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if !(x >= 1.0 && x.fract() == 0.0 && x < 1e19) {
        return Err(format!("{s:?} is not a positive integer"));
    }
    Ok(x as u64)
}

#[derive(Serialize)]
struct RunRecord {
    command: String,
    source: Option<String>,
    config: Value,
    result: Value,
    wall_time: f64,
    version: &'static str,
}

enum Failure {
    Input(String),
    Numerical(String),
}

impl From<CsintError> for Failure {
    fn from(e: CsintError) -> Self {
        match e {
            CsintError::DegenerateConfiguration(_) => Failure::Numerical(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<AnomalyError> for Failure {
    fn from(e: AnomalyError) -> Self {
        match e {
            AnomalyError::DegenerateConfiguration(_) | AnomalyError::Csint(CsintError::DegenerateConfiguration(_)) => {
                Failure::Numerical(e.to_string())
            }
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn json_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

impl SamplerArgs {
    fn config(&self, default_method: Method, quadrature_samples: u64, mc_samples: u64) -> SamplerConfig {
        let method = self.method.unwrap_or(default_method);
        let samples = self.samples.unwrap_or(if method == Method::Quadrature { quadrature_samples } else { mc_samples });
        SamplerConfig { method, samples, seed: self.seed, blocks: self.blocks.max(1), reject_delta: 1e-9 }
    }
}

fn load(source: &Source) -> Result<(String, LinkEmbedding), Failure> {
    match (&source.preset, &source.file) {
        (Some(name), _) => presets::by_name(name)
            .map(|l| (format!("preset:{name}"), l))
            .ok_or_else(|| Failure::Input(format!("unknown preset {name:?}; known: {}", presets::NAMES.join(", ")))),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            let link = LinkEmbedding::from_json(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            link.validate().map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            Ok((format!("file:{}", path.display()), link))
        }
        (None, None) => Err(Failure::Input("one of --preset or --file is required".into())),
    }
}

fn knot(link: &LinkEmbedding) -> Result<&Curve, Failure> {
    match link.components.as_slice() {
        [k] => Ok(k),
        _ => Err(Failure::Input(format!("expected a knot, got {} components", link.len()))),
    }
}

fn check_finite(v: f64) -> Result<(), Failure> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Failure::Numerical("estimate is not finite".into()))
    }
}

/// The JSON record, and CSV text for `shrink`.
fn run(command: &Command) -> Result<(RunRecord, Option<String>), Failure> {
    let version = env!("CARGO_PKG_VERSION");
    match command {
        Command::Invariant { kind, source, sampler, pair, .. } => {
            let (name, link) = load(source)?;
            let (label, cfg, result) = match kind {
                Kind::Lk => {
                    let cfg = sampler.config(Method::Quadrature, 512 * 512, 1_000_000);
                    let [i, j] = pair[..] else {
                        return Err(Failure::Input("--pair takes two component indices".into()));
                    };
                    let est = gauss_linking(&link, i, j, &cfg)?;
                    check_finite(est.value)?;
                    ("invariant lk", cfg, json_value(&est))
                }
                Kind::Writhe => {
                    let cfg = sampler.config(Method::Quadrature, 1_000_000, 1_000_000);
                    let est = writhe_integral(knot(&link)?, &cfg)?;
                    check_finite(est.value)?;
                    ("invariant writhe", cfg, json_value(&est))
                }
                Kind::V2 => {
                    let cfg = sampler.config(Method::MonteCarlo, 1_000_000, 1_000_000);
                    let est = degree2_invariant(knot(&link)?, &cfg)?;
                    check_finite(est.invariant.value)?;
                    ("invariant v2", cfg, json_value(&est))
                }
            };
            Ok((record(label, Some(name), json_value(&cfg), result, version), None))
        }
        Command::Anomaly { degree, alpha1, configurations, sampler, .. } => {
            if degree.is_none() && !alpha1 {
                return Err(Failure::Input("give --degree, --alpha1 or both".into()));
            }
            let cfg = sampler.config(Method::MonteCarlo, 1_000_000, 1_000_000);
            let report = match degree {
                Some(n) => Some(check_vanishing_filters(*n, *configurations, sampler.seed)?),
                None => None,
            };
            let a1 = if *alpha1 {
                let est = estimate_alpha1(&cfg)?;
                check_finite(est.value)?;
                Some(est)
            } else {
                None
            };
            let result = json!({ "report": report, "alpha1": a1 });
            let mut config = json_value(&cfg);
            config["configurations"] = json!(configurations);
            Ok((record("anomaly", None, config, result, version), None))
        }
        Command::Shrink { source, lambdas, sampler, .. } => {
            let (name, link) = load(source)?;
            let k = knot(&link)?;
            if lambdas.is_empty() || lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
                return Err(Failure::Input("--lambdas must be positive".into()));
            }
            let prediction = shrink_prediction(k).map_err(|e| Failure::Input(format!("no Morse data: {e}")))?;
            let cfg = sampler.config(Method::Quadrature, 100_000_000, 1_000_000);
            let rows = shrink_limit(k, lambdas, &cfg)?;
            let mut csv = String::from("lambda,estimate,std_error\n");
            for (l, e) in &rows {
                check_finite(e.value)?;
                csv.push_str(&format!("{l},{},{}\n", e.value, e.std_error));
            }
            let last = rows.last().map(|(_, e)| e.value).unwrap_or(f64::NAN);
            csv.push_str(&format!("# prediction_mod1,{prediction}\n# distance_mod1,{}\n", distance_mod1(last, prediction)));
            let table: Vec<Value> = rows.iter().map(|(l, e)| json!({ "lambda": l, "estimate": e })).collect();
            let result = json!({ "rows": table, "prediction_mod1": prediction, "distance_mod1": distance_mod1(last, prediction) });
            Ok((record("shrink", Some(name), json_value(&cfg), result, version), Some(csv)))
        }
    }
}

fn record(command: &str, source: Option<String>, config: Value, result: Value, version: &'static str) -> RunRecord {
    RunRecord { command: command.into(), source, config, result, wall_time: 0.0, version }
}

fn out_args(command: &Command) -> &OutArgs {
    match command {
        Command::Invariant { out, .. } | Command::Anomaly { out, .. } | Command::Shrink { out, .. } => out,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = match std::env::var("CSINT_THREADS") {
        Ok(s) => match s.parse::<usize>() {
            Ok(k) if k > 0 => Some(k),
            _ => {
                eprintln!("error: CSINT_THREADS must be a positive integer, got {s:?}");
                return ExitCode::from(2);
            }
        },
        Err(_) => None,
    };
    let start = Instant::now();
    let outcome = match threads {
        Some(k) => with_threads(k, || run(&cli.command)),
        None => run(&cli.command),
    };
    let (mut rec, csv) = match outcome {
        Ok(x) => x,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(2);
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            return ExitCode::from(3);
        }
    };
    let out = out_args(&cli.command);
    if !out.deterministic {
        rec.wall_time = start.elapsed().as_secs_f64();
    }
    let line = serde_json::to_string(&rec).expect("serializable");
    let mut stdout = std::io::stdout().lock();
    let written = match &csv {
        Some(text) => stdout.write_all(text.as_bytes()),
        None => writeln!(stdout, "{line}"),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if let Some(path) = &out.json_out {
        let appended = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .and_then(|mut f| writeln!(f, "{line}"));
        if let Err(e) = appended {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::SUCCESS
}
