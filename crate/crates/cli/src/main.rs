//! Command-line front end for the MoE game laboratory: winning-probability
//! tables, the sum-of-squares check, rigidity extraction, the string-erasure
//! and randomness-expansion simulators, and the tail-bound tables.
//!
//! Exit codes: 0 on pass, 1 on assertion failure, 2 on usage error. All
//! randomness flows from the explicit `--seed` (default 0), which is logged
//! in every artifact. Relative `--output` paths land in `$MOE_LAB_OUTDIR`
//! when that is set.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use moe_core::games::{self, MoeGame, PureStrategy, OPTIMAL_WIN};
use moe_core::matrix::sample;
use moe_core::protocols::{
    run_randexp, run_wse, Adversary, AdversaryKind, QuestionSampling, RandExpParams,
    RandExpTranscript, WseParams, WseSummary, WseTranscript,
};
use moe_core::rigidity::{self, RigidityReport};
use moe_core::stats;

#[derive(Parser)]
#[command(
    name = "moe-lab",
    about = "Numerical laboratory for monogamy-of-entanglement games",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Winning probability, per-round values, and bias of a strategy.
    Winprob(WinprobArgs),
    /// Verify the sum-of-squares certificate on random projective strategies.
    SosCheck(SosArgs),
    /// Run a rigidity extraction and report the decomposition and bounds.
    Rigidity(RigidityArgs),
    /// Simulate the three-party weak string erasure protocol.
    Wse(WseArgs),
    /// Simulate the randomness-expansion protocol.
    Randexp(RandexpArgs),
    /// Tail-bound tables: the parameter regime, the coupled-Bernoulli
    /// simulation, and the guessing-probability identity.
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct WinprobArgs {
    /// canonical:SS, random, product-canonical\[:SS,SS,...\], or file:PATH.
    #[arg(long)]
    strategy: String,
    /// Rounds for product strategies or file-loaded parallel strategies.
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dimensions A,B,C for random strategies.
    #[arg(long, default_value = "2,2,2")]
    dims: String,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SosArgs {
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Bob,Charlie dimensions of the sampled strategies.
    #[arg(long, default_value = "2,2")]
    dims: String,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RigidityArgs {
    /// exact, robust, exact-parallel, or robust-parallel.
    #[arg(long, default_value = "robust")]
    mode: String,
    /// canonical:SS, mixture, perturbed\[:SS\], product-canonical:SS,SS...,
    /// random, or file:PATH.
    #[arg(long, default_value = "perturbed")]
    strategy: String,
    /// Perturbation angle for the perturbed family.
    #[arg(long, default_value_t = 0.05)]
    perturb: f64,
    /// Rounds for the parallel modes.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Claimed per-round bound for robust-parallel (measured when absent).
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Bob,Charlie dimensions for random strategies.
    #[arg(long, default_value = "2,2")]
    dims: String,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Clone)]
struct WseArgs {
    /// JSON file with these same fields; explicit flags override it.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    n_qubits: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    adversary: Option<String>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    allow_isolation_violation: Option<bool>,
    /// json or csv; batches default to csv summaries.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    #[serde(skip)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Clone)]
struct RandexpArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    n_qubits: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    adversary: Option<String>,
    #[arg(long)]
    runs: Option<usize>,
    /// prg or uniform question sampling.
    #[arg(long)]
    sampling: Option<String>,
    #[arg(long)]
    allow_isolation_violation: Option<bool>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    #[serde(skip)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Emit the parameter-regime table for a range of n ("2..10" or "4").
    #[arg(long)]
    regime: bool,
    #[arg(long, default_value = "2..10")]
    n: String,
    /// Run the coupled-Bernoulli simulation of the observed-statistics lemma.
    #[arg(long)]
    obs: bool,
    #[arg(long, default_value_t = 500)]
    obs_n: usize,
    #[arg(long, default_value_t = 0.1)]
    obs_eps: f64,
    #[arg(long, default_value_t = 0.3)]
    obs_eta: f64,
    #[arg(long, default_value_t = 0.01)]
    obs_delta: f64,
    #[arg(long, default_value_t = 300)]
    obs_e_size: usize,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    /// Print the guessing-probability identity table up to this n.
    #[arg(long)]
    guessing: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Winprob(args) => cmd_winprob(args),
        Command::SosCheck(args) => cmd_sos_check(args),
        Command::Rigidity(args) => cmd_rigidity(args),
        Command::Wse(args) => cmd_wse(args),
        Command::Randexp(args) => cmd_randexp(args),
        Command::Bounds(args) => cmd_bounds(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn resolve_output(path: &std::path::Path) -> PathBuf {
    if path.is_relative() {
        if let Ok(dir) = std::env::var("MOE_LAB_OUTDIR") {
            return PathBuf::from(dir).join(path);
        }
    }
    path.to_path_buf()
}

/// Write an artifact, or print it when no output path was given. JSON
/// artifacts are round-tripped through their own loader before leaving.
fn emit<T: Serialize + DeserializeOwned>(
    value: &T,
    output: Option<&PathBuf>,
) -> Result<(), String> {
    let json = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    let reparsed: T = serde_json::from_str(&json)
        .map_err(|e| format!("output failed to round-trip through its loader: {e}"))?;
    let rejson = serde_json::to_string_pretty(&reparsed).map_err(|e| e.to_string())?;
    if rejson != json {
        return Err("output JSON is not stable under reload".into());
    }
    match output {
        Some(path) => {
            let path = resolve_output(path);
            std::fs::write(&path, json).map_err(|e| format!("writing {}: {e}", path.display()))?;
            println!("wrote {}", path.display());
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn emit_text(text: &str, output: Option<&PathBuf>) -> Result<(), String> {
    match output {
        Some(path) => {
            let path = resolve_output(path);
            std::fs::write(&path, text).map_err(|e| format!("writing {}: {e}", path.display()))?;
            println!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn parse_dims(spec: &str, want: usize) -> Result<Vec<usize>, String> {
    let dims: Vec<usize> = spec
        .split(',')
        .map(|d| d.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("bad dims '{spec}': {e}"))?;
    if dims.len() != want || dims.contains(&0) {
        return Err(format!("dims '{spec}' must be {want} positive integers"));
    }
    Ok(dims)
}

fn parse_sector(s: &str) -> Result<(u8, u8), String> {
    let b = moe_core::bits::from_string(s).ok_or_else(|| format!("bad sector '{s}'"))?;
    if b.len() != 2 {
        return Err(format!("sector '{s}' must be two bits"));
    }
    Ok((b[0], b[1]))
}

/// Build the (game, strategy) pair a strategy spec describes.
fn build_strategy(
    spec: &str,
    n: usize,
    seed: u64,
    dims: &str,
    perturb: f64,
) -> Result<(MoeGame, PureStrategy, String), String> {
    let base = games::make_tfkw();
    let to_err = |e: moe_core::Error| e.to_string();

    if let Some(rest) = spec.strip_prefix("canonical:") {
        let (s0, s1) = parse_sector(rest)?;
        return Ok((
            base,
            games::canonical_pure(s0, s1),
            format!("canonical:{rest}"),
        ));
    }
    if spec == "mixture" {
        let mix = games::canonical_mixture();
        let pure = games::purify_strategy(&base, &mix).map_err(to_err)?;
        return Ok((base, pure, "mixture".into()));
    }
    if spec == "perturbed" || spec.starts_with("perturbed:") {
        let sector = spec.strip_prefix("perturbed:").unwrap_or("00");
        let (s0, s1) = parse_sector(sector)?;
        let mut s = games::canonical_pure(s0, s1);
        let alice = moe_core::quantum::wb_state(s0, s1);
        let orth = {
            let z = moe_core::quantum::pauli(moe_core::quantum::Pauli::Z).apply(&alice);
            moe_core::quantum::pauli(moe_core::quantum::Pauli::X).apply(&z)
        };
        s.state = alice
            .scale(moe_core::matrix::c64(perturb.cos(), 0.0))
            .add(&orth.scale(moe_core::matrix::c64(perturb.sin(), 0.0)));
        return Ok((base, s, format!("perturbed:{sector} angle {perturb}")));
    }
    if spec == "random" {
        let parts = dims.matches(',').count() + 1;
        let d = parse_dims(dims, parts)?;
        let (b, c) = match d.len() {
            3 => {
                if d[0] != 2 {
                    return Err("Alice's dimension is fixed at 2 for the TFKW game".into());
                }
                (d[1], d[2])
            }
            2 => (d[0], d[1]),
            _ => return Err("dims must be A,B,C or B,C".into()),
        };
        let game = parallel_game(&base, n)?;
        let mut rng = sample::rng(seed);
        let s = games::sampler::random_pure_strategy(&game, b, c, &mut rng);
        return Ok((game, s, format!("random seed {seed} dims {b},{c}")));
    }
    if spec == "product-canonical" || spec.starts_with("product-canonical:") {
        let sectors: Vec<(u8, u8)> = match spec.strip_prefix("product-canonical:") {
            Some(list) => list
                .split(',')
                .map(parse_sector)
                .collect::<Result<_, _>>()?,
            None => vec![(0, 0); n.max(1)],
        };
        let game = parallel_game(&base, sectors.len())?;
        let parts: Vec<PureStrategy> = sectors
            .iter()
            .map(|&(s0, s1)| games::canonical_pure(s0, s1))
            .collect();
        let s = games::product_pure_strategies(&base, &parts).map_err(to_err)?;
        let label = sectors
            .iter()
            .map(|(a, b)| format!("{a}{b}"))
            .collect::<Vec<_>>()
            .join(",");
        return Ok((game, s, format!("product-canonical:{label}")));
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(path).map_err(|e| format!("reading {path}: {e}"))?;
        let s: PureStrategy =
            serde_json::from_str(&text).map_err(|e| format!("malformed strategy file: {e}"))?;
        let game = parallel_game(&base, n)?;
        s.validate(&game).map_err(to_err)?;
        return Ok((game, s, format!("file:{path}")));
    }
    Err(format!("unknown strategy spec '{spec}'"))
}

fn parallel_game(base: &MoeGame, n: usize) -> Result<MoeGame, String> {
    if n <= 1 {
        Ok(base.clone())
    } else {
        games::parallel_repeat(base, n).map_err(|e| e.to_string())
    }
}

#[derive(Serialize, Deserialize)]
struct WinprobReport {
    strategy: String,
    seed: u64,
    rounds: usize,
    winning_probability: f64,
    bias: Option<f64>,
    per_round: Vec<f64>,
}

fn cmd_winprob(args: WinprobArgs) -> Result<bool, String> {
    let (game, strategy, label) =
        build_strategy(&args.strategy, args.n, args.seed, &args.dims, 0.0)?;
    let w = games::winning_probability_pure(&game, &strategy).map_err(|e| e.to_string())?;
    let per_round: Vec<f64> = (0..game.rounds())
        .map(|i| games::ith_winning_probability_pure(&game, &strategy, i))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let bias = if game.rounds() == 1 {
        Some(4.0 * w - 2.0)
    } else {
        None
    };
    let report = WinprobReport {
        strategy: label,
        seed: args.seed,
        rounds: game.rounds(),
        winning_probability: w,
        bias,
        per_round: per_round.clone(),
    };

    println!("strategy          {}", report.strategy);
    println!("winning prob      {w:.9}");
    if let Some(b) = bias {
        println!("bias              {b:.9}");
    }
    for (i, wi) in per_round.iter().enumerate() {
        println!("round {i} value     {wi:.9}");
    }
    if args.output.is_some() {
        emit(&report, args.output.as_ref())?;
    }
    Ok(true)
}

#[derive(Serialize, Deserialize)]
struct SosCheckReport {
    trials: usize,
    seed: u64,
    dims: String,
    max_operator_residual: f64,
    max_gap_error: f64,
    tolerance: f64,
    passed: bool,
}

fn cmd_sos_check(args: SosArgs) -> Result<bool, String> {
    let d = parse_dims(&args.dims, 2)?;
    let game = games::make_tfkw();
    let mut rng = sample::rng(args.seed);
    let mut max_residual = 0.0f64;
    let mut max_gap = 0.0f64;
    for _ in 0..args.trials {
        let s = games::sampler::random_pure_strategy(&game, d[0], d[1], &mut rng);
        let report = games::sos_residual(&game, &s).map_err(|e| e.to_string())?;
        max_residual = max_residual.max(report.operator_residual);
        let w = games::winning_probability_pure(&game, &s).map_err(|e| e.to_string())?;
        max_gap = max_gap.max((report.gap - 4.0 * (OPTIMAL_WIN - w)).abs());
    }
    let tolerance = 1e-9;
    let passed = max_residual <= tolerance && max_gap <= tolerance;
    let report = SosCheckReport {
        trials: args.trials,
        seed: args.seed,
        dims: args.dims.clone(),
        max_operator_residual: max_residual,
        max_gap_error: max_gap,
        tolerance,
        passed,
    };
    println!(
        "sos-check: {} trials, max residual {max_residual:.3e}, max gap error {max_gap:.3e} → {}",
        args.trials,
        if passed { "PASS" } else { "FAIL" }
    );
    if args.output.is_some() {
        emit(&report, args.output.as_ref())?;
    }
    Ok(passed)
}

fn cmd_rigidity(args: RigidityArgs) -> Result<bool, String> {
    let (game, strategy, label) =
        build_strategy(&args.strategy, args.n, args.seed, &args.dims, args.perturb)?;
    let to_err = |e: moe_core::Error| e.to_string();
    let report: RigidityReport = match args.mode.as_str() {
        "exact" => rigidity::extract_exact(&game, &strategy).map_err(to_err)?,
        "robust" => rigidity::extract_robust(&game, &strategy).map_err(to_err)?,
        "exact-parallel" => rigidity::extract_exact_parallel(&game, &strategy).map_err(to_err)?,
        "robust-parallel" => {
            let eps = match args.eps {
                Some(e) => e,
                None => {
                    (0..game.rounds())
                        .map(|i| {
                            games::ith_winning_probability_pure(&game, &strategy, i)
                                .map(|w| (OPTIMAL_WIN - w).max(0.0))
                        })
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(to_err)?
                        .into_iter()
                        .fold(0.0f64, f64::max)
                        + 1e-12
                }
            };
            let (_good, report) =
                rigidity::extract_robust_parallel(&game, &strategy, eps).map_err(to_err)?;
            report
        }
        other => return Err(format!("unknown mode '{other}'")),
    };
    println!(
        "rigidity [{label}] mode {}: ε = {:.3e}, residual {:.3e} ≤ bound {:.3e}, \
         {} components → {}",
        args.mode,
        report.epsilon,
        report.residual_distance,
        report.theorem_bound,
        report.components.len(),
        if report.passed { "PASS" } else { "FAIL" }
    );
    let passed = report.passed;
    emit(&report, args.output.as_ref())?;
    Ok(passed)
}

/// Merge an optional JSON config under explicit flags.
fn merged<T, U>(flag: Option<U>, cfg: &Option<T>, get: impl Fn(&T) -> Option<U>) -> Option<U> {
    flag.or_else(|| cfg.as_ref().and_then(get))
}

fn load_config<T: DeserializeOwned>(path: &Option<PathBuf>) -> Result<Option<T>, String> {
    match path {
        None => Ok(None),
        Some(p) => {
            let text =
                std::fs::read_to_string(p).map_err(|e| format!("reading {}: {e}", p.display()))?;
            serde_json::from_str(&text)
                .map(Some)
                .map_err(|e| format!("malformed config: {e}"))
        }
    }
}

fn parse_adversary(name: &str, allow_violation: bool) -> Result<Adversary, String> {
    let kind =
        AdversaryKind::from_name(name).ok_or_else(|| format!("unknown adversary '{name}'"))?;
    Adversary::new(kind, allow_violation).map_err(|e| e.to_string())
}

fn with_pool<R: Send>(workers: Option<usize>, body: impl FnOnce() -> R + Send) -> R {
    match workers {
        Some(k) if k > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .expect("worker pool")
            .install(body),
        _ => body(),
    }
}

fn cmd_wse(args: WseArgs) -> Result<bool, String> {
    let cfg: Option<WseArgs> = load_config(&args.config)?;
    let params = WseParams {
        n_qubits: merged(args.n_qubits, &cfg, |c| c.n_qubits).unwrap_or(1000),
        n: merged(args.n, &cfg, |c| c.n).unwrap_or(50),
        delta: merged(args.delta, &cfg, |c| c.delta).unwrap_or(0.05),
        seed: merged(args.seed, &cfg, |c| c.seed).unwrap_or(0),
    };
    let adversary_name = merged(args.adversary.clone(), &cfg, |c| c.adversary.clone())
        .unwrap_or_else(|| "honest".into());
    let allow = merged(args.allow_isolation_violation, &cfg, |c| {
        c.allow_isolation_violation
    })
    .unwrap_or(false);
    let runs = merged(args.runs, &cfg, |c| c.runs).unwrap_or(1);
    let format = merged(args.format.clone(), &cfg, |c| c.format.clone());
    let workers = merged(args.workers, &cfg, |c| c.workers);
    let adversary = parse_adversary(&adversary_name, allow)?;

    if runs <= 1 {
        let t = run_wse(&params, &adversary).map_err(|e| e.to_string())?;
        println!(
            "wse [{adversary_name}] seed {}: {} ({} wins / threshold {:.1}), |ι| = {}",
            params.seed,
            if t.accepted { "accepted" } else { "rejected" },
            t.wins,
            t.threshold,
            t.bob_out.iota.len()
        );
        emit::<WseTranscript>(&t, args.output.as_ref())?;
        return Ok(true);
    }

    use rayon::prelude::*;
    if format.as_deref() == Some("json") {
        let transcripts: Vec<WseTranscript> = with_pool(workers, || {
            (0..runs)
                .into_par_iter()
                .map(|k| {
                    run_wse(
                        &WseParams {
                            seed: params.seed.wrapping_add(k as u64),
                            ..params
                        },
                        &adversary,
                    )
                    .map_err(|e| e.to_string())
                })
                .collect::<Result<_, _>>()
        })?;
        let accepted = transcripts.iter().filter(|t| t.accepted).count();
        println!("wse [{adversary_name}]: {accepted}/{runs} accepted");
        emit(&transcripts, args.output.as_ref())?;
    } else {
        let summaries: Vec<WseSummary> = with_pool(workers, || {
            (0..runs)
                .into_par_iter()
                .map(|k| {
                    let seeded = WseParams {
                        seed: params.seed.wrapping_add(k as u64),
                        ..params
                    };
                    let start = std::time::Instant::now();
                    run_wse(&seeded, &adversary)
                        .map(|t| WseSummary {
                            seed: seeded.seed,
                            accepted: t.accepted,
                            wins: t.wins,
                            iota_size: t.bob_out.iota.len(),
                            run_ms: start.elapsed().as_secs_f64() * 1e3,
                        })
                        .map_err(|e| e.to_string())
                })
                .collect::<Result<_, _>>()
        })?;
        let accepted = summaries.iter().filter(|s| s.accepted).count();
        println!("wse [{adversary_name}]: {accepted}/{runs} accepted");
        let mut csv = String::from(WseSummary::csv_header());
        csv.push('\n');
        for s in &summaries {
            csv.push_str(&s.csv_row());
            csv.push('\n');
        }
        emit_text(&csv, args.output.as_ref())?;
    }
    Ok(true)
}

fn cmd_randexp(args: RandexpArgs) -> Result<bool, String> {
    let cfg: Option<RandexpArgs> = load_config(&args.config)?;
    let params = RandExpParams {
        n_qubits: merged(args.n_qubits, &cfg, |c| c.n_qubits).unwrap_or(1000),
        n: merged(args.n, &cfg, |c| c.n).unwrap_or(50),
        delta: merged(args.delta, &cfg, |c| c.delta).unwrap_or(0.05),
        seed: merged(args.seed, &cfg, |c| c.seed).unwrap_or(0),
    };
    let adversary_name = merged(args.adversary.clone(), &cfg, |c| c.adversary.clone())
        .unwrap_or_else(|| "breidbart".into());
    let allow = merged(args.allow_isolation_violation, &cfg, |c| {
        c.allow_isolation_violation
    })
    .unwrap_or(false);
    let sampling = match merged(args.sampling.clone(), &cfg, |c| c.sampling.clone())
        .unwrap_or_else(|| "prg".into())
        .as_str()
    {
        "prg" => QuestionSampling::ToyPrg,
        "uniform" => QuestionSampling::Uniform,
        other => return Err(format!("unknown sampling '{other}' (prg|uniform)")),
    };
    let runs = merged(args.runs, &cfg, |c| c.runs).unwrap_or(1);
    let workers = merged(args.workers, &cfg, |c| c.workers);
    let adversary = parse_adversary(&adversary_name, allow)?;

    if runs <= 1 {
        let t = run_randexp(&params, &adversary, sampling).map_err(|e| e.to_string())?;
        println!(
            "randexp [{adversary_name}] seed {}: {} - output {} bits, consumed {} seed bits \
             (expansion {:.3})",
            params.seed,
            if t.accepted { "accepted" } else { "rejected" },
            t.output.len(),
            t.seed_bits_consumed,
            t.expansion_factor
        );
        emit::<RandExpTranscript>(&t, args.output.as_ref())?;
        return Ok(true);
    }

    use rayon::prelude::*;
    let transcripts: Vec<RandExpTranscript> = with_pool(workers, || {
        (0..runs)
            .into_par_iter()
            .map(|k| {
                run_randexp(
                    &RandExpParams {
                        seed: params.seed.wrapping_add(k as u64),
                        ..params
                    },
                    &adversary,
                    sampling,
                )
                .map_err(|e| e.to_string())
            })
            .collect::<Result<_, _>>()
    })?;
    let accepted = transcripts.iter().filter(|t| t.accepted).count();
    println!("randexp [{adversary_name}]: {accepted}/{runs} accepted");
    emit(&transcripts, args.output.as_ref())?;
    Ok(true)
}

fn parse_range(spec: &str) -> Result<(usize, usize), String> {
    if let Some((a, b)) = spec.split_once("..") {
        let lo = a.trim().parse::<usize>().map_err(|e| e.to_string())?;
        let hi = b.trim().parse::<usize>().map_err(|e| e.to_string())?;
        if lo > hi {
            return Err(format!("empty range '{spec}'"));
        }
        Ok((lo, hi))
    } else {
        let v = spec.trim().parse::<usize>().map_err(|e| e.to_string())?;
        Ok((v, v))
    }
}

fn cmd_bounds(args: BoundsArgs) -> Result<bool, String> {
    if args.regime {
        let (lo, hi) = parse_range(&args.n)?;
        let mut csv = String::from(stats::RegimeTable::csv_header());
        csv.push('\n');
        let mut all_exact = true;
        for n in lo..=hi {
            let row = stats::regime(n).map_err(|e| e.to_string())?;
            all_exact &= row.identities_exact;
            csv.push_str(&row.csv_row());
            csv.push('\n');
        }
        emit_text(&csv, args.output.as_ref())?;
        return Ok(all_exact);
    }
    if args.obs {
        let p = stats::ObsParams::new(args.obs_n, args.obs_eps, args.obs_eta, args.obs_delta)
            .map_err(|e| e.to_string())?;
        let report = stats::obs_coupling_simulation(&p, args.obs_e_size, args.trials, args.seed)
            .map_err(|e| e.to_string())?;
        println!(
            "obs: empirical {:.4} vs bound {:.4} (+3σ = {:.4}) → {}",
            report.empirical,
            report.bound,
            report.bound + 3.0 * report.sigma,
            if report.within { "PASS" } else { "FAIL" }
        );
        let within = report.within;
        emit(&report, args.output.as_ref())?;
        return Ok(within);
    }
    if let Some(n_max) = args.guessing {
        let mut text = String::from("n,binomial_sum,closed_form,entropy_bound\n");
        let mut ok = true;
        for n in 1..=n_max {
            let v = stats::guessing_expectation(n).map_err(|e| e.to_string())?;
            let closed = 0.75f64.powi(n as i32);
            ok &= (v - closed).abs() <= 1e-12;
            text.push_str(&format!(
                "{n},{v:.15e},{closed:.15e},{:.12}\n",
                stats::wse_entropy_bound(n)
            ));
        }
        emit_text(&text, args.output.as_ref())?;
        return Ok(ok);
    }
    Err("choose one of --regime, --obs, or --guessing N".into())
}
