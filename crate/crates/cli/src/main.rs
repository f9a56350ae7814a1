use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use subquad::counting::{fpras, saw_delta, Calibration, CountingModel, CountingOptions, CountingTask, Mode};
use subquad::graph::{load_graph, Graph, GraphFormat, Loaded, Pinning, Spin};
use subquad::models::{HyperIs, PolymerModel, TwoSpinModel, TwoSpinParams};
use subquad::rng::RngStream;
use subquad::sampling::sample_spin_counts;
use subquad::samplers::{AjOptions, AjSampler};
use subquad::saw::estimate_marginal_saw;
use subquad::stats::mean_var;
use subquad::verify::{aggregate_aj_scaling, run_suite, saw_scaling, Check, SawScope, VerifyConfig, SUITES};
use subquad::Error;

#[derive(Parser, Debug)]
#[command(name = "subquad", version, about = "Approximate counting and perfect marginal sampling for spin systems")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate the partition function.
    Count(CountArgs),
    /// Draw perfect samples of one vertex's spin.
    Sample(SampleArgs),
    /// Run the oracle-equivalence suites.
    Verify(VerifyArgs),
    /// Measure work against problem size and fit the scaling exponent.
    Bench(BenchArgs),
    /// Fit the SAW-mode budget constant on a synthetic instance.
    Calibrate(CalibrateArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ModelKind {
    Hardcore,
    Ising,
    TwoSpin,
    Polymer,
    HyperIs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Saw,
    Aggregate,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Saw => Mode::Saw,
            ModeArg::Aggregate => Mode::Aggregate,
        }
    }
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ModelArgs {
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Edge list ("n" then "u v" lines), or "n k" then hyperedges for hyper-is.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Polymer spin count.
    #[arg(long, default_value_t = 2)]
    q: usize,
    /// Polymer weight decay: w = exp(-theta |gamma|).
    #[arg(long, default_value_t = 10.0)]
    theta: f64,
    /// Run outside the proven regimes.
    #[arg(long = "override")]
    override_regime: bool,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CountArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Boundary gap; the uniqueness gap of the parameters by default.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_enum, default_value = "aggregate")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Samples per coordinate estimate, overriding the budget rule.
    #[arg(long)]
    budget: Option<u64>,
    /// Median of independent estimates reaching failure probability ETA.
    #[arg(long, value_name = "ETA")]
    amplify: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    calibration_saw: f64,
    #[arg(long, default_value_t = 16.0)]
    calibration_aggregate: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Test hook: relative bias on the hardcore occupation coin.
    #[arg(long, default_value_t = 0.0, hide = true)]
    inject_coin_skew: f64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SampleArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    vertex: usize,
    /// Number of draws.
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    /// Pins as v=c, comma separated.
    #[arg(long, value_delimiter = ',')]
    pin: Vec<String>,
    /// Draw all trials as one batch through the aggregate sampler.
    #[arg(long)]
    batch: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct VerifyArgs {
    /// Suites to run (default: all).
    #[arg(long, value_delimiter = ',')]
    suite: Vec<String>,
    /// Draws per instance for the marginal suite.
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 1e-3)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// FPRAS runs per coverage case.
    #[arg(long, default_value_t = 40)]
    trials: usize,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 200)]
    batch_reps: usize,
    /// Whole corpus and every pinning in the SAW suite.
    #[arg(long)]
    full: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0, hide = true)]
    inject_coin_skew: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum BenchKind {
    /// SAW-mode counting work against n on random cubic graphs.
    Saw,
    /// Aggregate-AJ recursive calls against the batch size N.
    AggregateAj,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct BenchArgs {
    #[arg(long, value_enum, default_value = "aggregate-aj")]
    what: BenchKind,
    /// log2 of the sizes (n for saw, N for aggregate-aj).
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<u32>,
    #[arg(long, default_value_t = 3)]
    degree: usize,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 0.2)]
    eps: f64,
    /// Coordinates sampled per size in saw mode; work is scaled up to n.
    #[arg(long, default_value_t = 4)]
    coords: usize,
    #[arg(long, default_value_t = 1)]
    repeat: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CalibrateArgs {
    #[arg(long, default_value_t = 0.25)]
    lambda: f64,
    #[arg(long, default_value_t = 3)]
    degree: usize,
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 0.2)]
    eps: f64,
    /// Estimator runs per budget.
    #[arg(long, default_value_t = 2000)]
    runs: usize,
    /// Budgets to fit over.
    #[arg(long, value_delimiter = ',', default_values_t = vec![16.0, 64.0, 256.0])]
    budgets: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Lib(Error),
    Suite,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Suite => 1,
            Failure::Lib(e) => match e {
                Error::Parse { .. } | Error::DuplicateEdge { .. } | Error::SelfLoop { .. } | Error::Io(_) | Error::InvalidParams(_) => 2,
                Error::Regime(_) => 3,
                Error::RecursionBudget { .. } | Error::LevelCap { .. } | Error::Capacity { .. } | Error::TreeTooLarge { .. } => 4,
                _ => 1,
            },
        }
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn need(x: Option<f64>, flag: &str, model: ModelKind) -> Res<f64> {
    x.ok_or_else(|| Failure::Config(format!("--{flag} is required for --model {model:?}")))
}

fn build_model(a: &ModelArgs) -> Res<CountingModel> {
    let format = if a.model == ModelKind::HyperIs { GraphFormat::HyperList } else { GraphFormat::EdgeList };
    let loaded = load_graph(&a.graph, format)?;
    let graph = |l: Loaded| match l {
        Loaded::Graph(g) => g,
        Loaded::Hyper(_) => unreachable!(),
    };
    let params = match a.model {
        ModelKind::Hardcore => Some(TwoSpinParams::hardcore(need(a.lambda, "lambda", a.model)?)),
        ModelKind::Ising => Some(TwoSpinParams::ising(need(a.beta, "beta", a.model)?, a.lambda.unwrap_or(1.0))),
        ModelKind::TwoSpin => Some(TwoSpinParams {
            beta: need(a.beta, "beta", a.model)?,
            gamma: need(a.gamma, "gamma", a.model)?,
            lambda: need(a.lambda, "lambda", a.model)?,
        }),
        _ => None,
    };
    Ok(match (a.model, loaded) {
        (ModelKind::HyperIs, Loaded::Hyper(h)) => CountingModel::HyperIs(HyperIs::new(h)),
        (ModelKind::Polymer, l) => CountingModel::Polymer(PolymerModel::geometric(graph(l), a.q, a.theta)?),
        (_, l) => CountingModel::TwoSpin(TwoSpinModel::new(graph(l), params.unwrap())?),
    })
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Res<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Config(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_count(a: &CountArgs) -> Res<()> {
    let model = build_model(&a.model)?;
    let task = CountingTask::new(model, a.eps, a.seed)?;
    let mut opts = CountingOptions::new(a.mode.into());
    opts.override_regime = a.model.override_regime;
    opts.delta = a.delta;
    opts.budget = a.budget;
    opts.amplify = a.amplify;
    opts.calibration = Calibration { saw: a.calibration_saw, aggregate: a.calibration_aggregate };
    opts.coin_skew = a.inject_coin_skew;
    let report = fpras(&task, &opts)?;
    let mut v = serde_json::to_value(&report).expect("report serializes");
    v["config"] = serde_json::to_value(a).expect("config serializes");
    write_out(&a.out, &serde_json::to_string_pretty(&v).unwrap())
}

fn parse_pins(pins: &[String]) -> Res<Pinning> {
    let mut p = Pinning::new();
    for s in pins.iter().filter(|s| !s.is_empty()) {
        let (v, c) = s.split_once('=').ok_or_else(|| Failure::Config(format!("pin {s:?} is not v=c")))?;
        let v: usize = v.trim().parse().map_err(|_| Failure::Config(format!("bad vertex in pin {s:?}")))?;
        let c: Spin = c.trim().parse().map_err(|_| Failure::Config(format!("bad spin in pin {s:?}")))?;
        p.set(v, c);
    }
    Ok(p)
}

fn cmd_sample(a: &SampleArgs) -> Res<()> {
    let model = build_model(&a.model)?;
    let pins = parse_pins(&a.pin)?;
    let mut rng = RngStream::new(a.seed);
    let start = Instant::now();
    let r = sample_spin_counts(&model, a.vertex, &pins, a.trials, a.batch, a.model.override_regime, &mut rng)?;
    let v = json!({
        "schema": 1,
        "command": "sample",
        "config": a,
        "counts": r.counts,
        "frequencies": r.counts.iter().map(|&c| c as f64 / a.trials.max(1) as f64).collect::<Vec<_>>(),
        "batch_calls": r.batch_calls,
        "timing": { "wall_ms": start.elapsed().as_secs_f64() * 1e3 },
    });
    write_out(&a.out, &serde_json::to_string_pretty(&v).unwrap())
}

fn cmd_verify(a: &VerifyArgs) -> Res<()> {
    let cfg = VerifyConfig {
        samples: a.samples,
        alpha: a.alpha,
        seed: a.seed,
        coin_skew: a.inject_coin_skew,
        batch_reps: a.batch_reps,
        batch_n: 1000,
        trials: a.trials,
        epsilon: a.eps,
        saw_scope: if a.full { SawScope::Full } else { SawScope::Quick },
    };
    let suites: Vec<String> = if a.suite.is_empty() { SUITES.iter().map(|s| s.to_string()).collect() } else { a.suite.clone() };
    for s in &suites {
        if !SUITES.contains(&s.as_str()) {
            return Err(Failure::Config(format!("unknown suite {s:?}; expected one of {}", SUITES.join(", "))));
        }
    }
    let mut checks: Vec<Check> = Vec::new();
    for s in &suites {
        let cs = run_suite(s, &cfg)?;
        for c in &cs {
            eprintln!("{:<5} {:<10} {:<34} {}", if c.passed { "PASS" } else { "FAIL" }, c.suite, c.name, c.detail);
        }
        checks.extend(cs);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    let v = json!({ "schema": 1, "command": "verify", "config": a, "checks": checks, "failed": failed });
    write_out(&a.out, &serde_json::to_string_pretty(&v).unwrap())?;
    if failed > 0 {
        return Err(Failure::Suite);
    }
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> Res<()> {
    if a.repeat == 0 {
        return Err(Failure::Config("--repeat must be positive".into()));
    }
    let rep = match a.what {
        BenchKind::AggregateAj => {
            let sizes: Vec<u32> = if a.sizes.is_empty() { (10..=20).collect() } else { a.sizes.clone() };
            aggregate_aj_scaling(&sizes, a.degree, a.lambda, a.repeat, a.seed)?
        }
        BenchKind::Saw => {
            let sizes: Vec<u32> = if a.sizes.is_empty() { (8..=13).collect() } else { a.sizes.clone() };
            saw_scaling(&sizes, a.degree, a.lambda.unwrap_or(0.25), a.eps, a.coords, a.repeat, a.seed)?
        }
    };
    eprintln!("fitted log-log slope of calls: {:.4} (target <= {:.4})", rep.slope, rep.bound);
    write_out(&a.out, rep.to_csv().trim_end())
}

fn cmd_calibrate(a: &CalibrateArgs) -> Res<()> {
    let mut grng = RngStream::new(a.seed).derive_str("graph");
    let g = Graph::random_regular(a.n, a.degree, &mut grng)?;
    let params = TwoSpinParams::hardcore(a.lambda);
    let model = TwoSpinModel::new(g.clone(), params)?;
    let delta = saw_delta(&model, &CountingOptions::new(Mode::Saw))?;
    let b = CountingModel::TwoSpin(model).marginal_bound(Mode::Saw);
    let sampler = AjSampler { lambda: a.lambda, opts: AjOptions::default() };
    let tau = Pinning::new();
    let mut fits = Vec::new();
    for &budget in &a.budgets {
        let mut ps = Vec::with_capacity(a.runs);
        for r in 0..a.runs {
            let mut rng = RngStream::new(a.seed).derive(budget.to_bits()).derive(r as u64);
            ps.push(estimate_marginal_saw(&g, 0, &tau, &params, delta, budget, &sampler, &mut rng)?.p);
        }
        let (m, v) = mean_var(&ps);
        fits.push(json!({ "budget": budget, "mean": m, "rel_var": v / (m * m), "k": v / (m * m) * budget }));
    }
    // Var/E² ≈ K/N; meeting ε²/n needs N = K n/ε², i.e. Ĉ = K b⁴ / log n
    let k = fits.iter().map(|f| f["k"].as_f64().unwrap()).fold(0.0, f64::max);
    let c_hat = k * b.powi(4) / (a.n as f64).ln().max(1.0);
    let v = json!({ "schema": 1, "command": "calibrate", "config": a, "delta": delta, "b": b, "fits": fits, "k": k, "c_hat": c_hat });
    write_out(&None, &serde_json::to_string_pretty(&v).unwrap())
}

fn init_threads() {
    if let Some(k) = std::env::var("SUBQUAD_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    let res = match &cli.cmd {
        Command::Count(a) => cmd_count(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Calibrate(a) => cmd_calibrate(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(m) => eprintln!("error: {m}"),
                Failure::Lib(e) => eprintln!("error: {e}"),
                Failure::Suite => eprintln!("verification failed"),
            }
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count_args(argv: &[&str]) -> CountArgs {
        match Cli::try_parse_from(argv).unwrap().cmd {
            Command::Count(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn config_round_trips() {
        let a = count_args(&[
            "subquad", "count", "--model", "ising", "--beta", "0.9", "--graph", "g.txt", "--eps", "0.05", "--mode", "saw", "--seed", "3",
            "--amplify", "0.01", "--override",
        ]);
        let back: CountArgs = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(a, back);
        assert_eq!(a.mode, ModeArg::Saw);
        assert!(a.model.override_regime);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Failure::Config("x".into()).code(), 2);
        assert_eq!(Failure::Lib(Error::InvalidParams("x".into())).code(), 2);
        assert_eq!(Failure::Lib(Error::Regime("x".into())).code(), 3);
        assert_eq!(Failure::Lib(Error::TreeTooLarge { nodes: 1 }).code(), 4);
        assert_eq!(Failure::Suite.code(), 1);
    }

    #[test]
    fn pins_parse() {
        let p = parse_pins(&["0=1".into(), " 3 = 0".into()]).unwrap();
        assert_eq!(p.get(0), Some(1));
        assert_eq!(p.get(3), Some(0));
        assert!(parse_pins(&["3".into()]).is_err());
    }
}
