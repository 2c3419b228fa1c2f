//! Subcommands of the `avrs` binary.
//!
//! All randomness comes from `--seed`: each subsystem gets its own stream
//! through `seed::derive(seed, label, index)`, so rerunning one part of an
//! experiment reproduces it exactly.

use std::path::PathBuf;

use avrs_core::adversary::{worst_case_search, BlockMap, JammerStrategy, SearchSettings};
use avrs_core::coding::{
    default_delta0, max_distortion_estimate, sample_sources, CodeDesign, CodeParams,
    EstimateSettings, DEFAULT_SIZE_CAP,
};
use avrs_core::derandomize::{
    alpha_max, bernstein_bound, build_stochastic_code, certify_ensemble, sample_ensemble,
    union_bound, union_bound_ln, CertifySettings,
};
use avrs_core::game::{GameConfig, GameResult};
use avrs_core::lemmas::{self, HarnessResult, Trend, Verdict};
use avrs_core::singleletter::{BoundValue, GridConfig, Solver};
use avrs_core::typeclass::{nominal_counts, TypeTable};
use avrs_core::{
    seed, AuxiliaryPolicy, CondDistribution, Distribution, Executor, ProblemSpec, SymbolVector,
};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::files::{load_jammers, load_policy, load_spec, InputError, JammerSource, NamedJammer};
use crate::output::{num, write_file, write_json, Csv, Invocation};
use crate::parallel::Rayon;

#[derive(Debug, Parser)]
#[command(
    name = "avrs",
    version,
    about = "Adversarial remote-source rate-distortion bounds and coding simulations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// D0, D1 and the upper/lower rate bounds over a distortion grid.
    Bounds(BoundsArgs),
    /// Monte Carlo of the randomized binned code against jammers.
    Simulate(SimulateArgs),
    /// Certify an n²-member ensemble and report the stochastic-encoder rate.
    Derandomize(DerandomizeArgs),
    /// Statistical checks of the typicality lemmas.
    Lemmas(LemmasArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Problem spec (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: one per core). Does not affect outputs.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CodeArgs {
    /// Auxiliary policy (JSON).
    #[arg(long)]
    pub policy: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Encoder threshold (default 2·eps).
    #[arg(long)]
    pub delta2: Option<f64>,
    /// Decoder threshold (default 4·eps).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Jammer-type tolerance f(eps) (default eps).
    #[arg(long = "f-eps")]
    pub f_eps: Option<f64>,
    /// Codewords per type before truncation.
    #[arg(long, default_value_t = DEFAULT_SIZE_CAP)]
    pub cap: u64,
}

impl CodeArgs {
    fn params(&self) -> CodeParams {
        let base = CodeParams::from_eps(self.eps);
        CodeParams {
            delta2: self.delta2.unwrap_or(base.delta2),
            gamma: self.gamma.unwrap_or(base.gamma),
            f_eps: self.f_eps.unwrap_or(base.f_eps),
            size_cap: self.cap,
            ..base
        }
    }

    fn to_json(&self) -> Value {
        let p = self.params();
        json!({ "eps": p.eps, "delta2": p.delta2, "gamma": p.gamma, "f_eps": p.f_eps, "cap": p.size_cap })
    }
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Distortion levels, comma separated; `--d` alone gives an empty grid.
    /// Without it, `--points` levels spread between D0 and D1.
    #[arg(long, num_args = 0.., value_delimiter = ',', allow_negative_numbers = true)]
    pub d: Option<Vec<f64>>,
    #[arg(long, default_value_t = 5)]
    pub points: usize,
    /// Coarse grid divisions per simplex.
    #[arg(long, default_value_t = 20)]
    pub divisions: usize,
    #[arg(long, default_value_t = 0.005)]
    pub fine_step: f64,
    /// |U| for the upper bound.
    #[arg(long)]
    pub u_upper: Option<usize>,
    /// |U| for the lower bound.
    #[arg(long)]
    pub u_lower: Option<usize>,
    /// Local refinements per search, from the best coarse points.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    pub starts: u64,
    /// Duality-gap tolerance of the D0/D1 game solver.
    #[arg(long, default_value_t = 1e-6)]
    pub game_tol: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub code: CodeArgs,
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    /// Sessions per (source block, jammer) cell.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Number of sampled typical source blocks.
    #[arg(long, default_value_t = 1)]
    pub sources: usize,
    /// Source typicality slack (default n^(-1/3)).
    #[arg(long)]
    pub delta0: Option<f64>,
    /// Jammer file, or one of: trivial, all-deterministic, greedy-search.
    #[arg(long, default_value = "trivial")]
    pub jammers: String,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Candidate blocks per source for greedy-search.
    #[arg(long, default_value_t = 64)]
    pub search_budget: usize,
    /// Sessions per candidate for greedy-search.
    #[arg(long, default_value_t = 16)]
    pub search_draws: usize,
    /// Let greedy-search see the realized codebook.
    #[arg(long)]
    pub knows_codebook: bool,
}

#[derive(Debug, Args)]
pub struct DerandomizeArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub code: CodeArgs,
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    /// Ensemble size (default n²).
    #[arg(long = "K")]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0.02)]
    pub mu: f64,
    /// Sessions per cell; members are visited round-robin.
    #[arg(long, default_value_t = 1024)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub sources: usize,
    #[arg(long)]
    pub delta0: Option<f64>,
    #[arg(long, default_value = "all-deterministic")]
    pub jammers: String,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Range b of the centered distortions (default: largest distortion).
    #[arg(long)]
    pub b: Option<f64>,
    /// Bernstein parameter (default: largest admissible for b).
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LemmasArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub code: CodeArgs,
    /// Blocklength ladder for the code-based harnesses.
    #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
    pub ladder: Vec<usize>,
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    /// Jammer for packing, Markov and encoder-failure runs (first entry).
    #[arg(long, default_value = "trivial")]
    pub jammers: String,
    #[arg(long)]
    pub conditional_typicality: bool,
    #[arg(long)]
    pub covering: bool,
    #[arg(long)]
    pub packing: bool,
    #[arg(long)]
    pub markov: bool,
    #[arg(long)]
    pub encoder_failure: bool,
    #[arg(long)]
    pub exact: bool,
    /// Blocklength of the conditional typicality check.
    #[arg(long, default_value_t = 200)]
    pub ct_n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub ct_delta0: f64,
    /// Typicality slack of the Markov-lemma conclusion.
    #[arg(long, default_value_t = 0.1)]
    pub delta4: f64,
    /// Blocklength of the exact codeword distribution.
    #[arg(long, default_value_t = 6)]
    pub exact_n: usize,
}

/// Failure of a command, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Exit code 2.
    #[error("{0}")]
    Input(String),
    /// Exit code 3.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<InputError> for CliError {
    fn from(e: InputError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<avrs_core::Error> for CliError {
    fn from(e: avrs_core::Error) -> Self {
        match e {
            avrs_core::Error::Config(_) | avrs_core::Error::Usage(_) => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("cannot write output: {e}"))
    }
}

type Outcome = Result<(), CliError>;

/// Runs a parsed command; `raw_args` (without the program name) is recorded
/// in every output.
pub fn execute(cli: Cli, raw_args: &[String]) -> Outcome {
    match cli.command {
        Command::Bounds(a) => bounds(&a, raw_args),
        Command::Simulate(a) => simulate(&a, raw_args),
        Command::Derandomize(a) => derandomize(&a, raw_args),
        Command::Lemmas(a) => lemmas(&a, raw_args),
    }
}

fn executor(common: &Common) -> Result<Rayon, CliError> {
    if common.threads == Some(0) {
        return Err(CliError::Input("--threads must be at least 1".into()));
    }
    Rayon::new(common.threads)
        .map_err(|e| CliError::Runtime(format!("cannot start worker threads: {e}")))
}

// --- bounds ------------------------------------------------------------------

fn game_json(g: &GameResult) -> Value {
    json!({
        "value": g.value,
        "lower": g.lower,
        "upper": g.upper,
        "duality_gap": g.duality_gap,
        "min_strategy": g.min_strategy,
        "max_strategy": g.max_strategy,
        "iterations": g.iterations,
    })
}

fn policy_json(p: &AuxiliaryPolicy) -> Value {
    json!({ "p_u_given_y": p.p_uy().rows(), "zeta": p.zeta() })
}

fn cond_json(q: &CondDistribution) -> Value {
    json!(q.rows())
}

fn bound_json(b: &Result<BoundValue, avrs_core::Error>) -> Value {
    match b {
        Ok(v) => json!({
            "value": v.value,
            "uncertainty": v.uncertainty,
            "policy": v.policy.as_ref().map(policy_json),
            "jammer": v.jammer.as_ref().map(cond_json),
        }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

/// CSV fields of one bound; infeasible levels have infinite rate.
fn bound_fields(b: &Result<BoundValue, avrs_core::Error>) -> Result<(String, String), CliError> {
    match b {
        Ok(v) => Ok((num(v.value), num(v.uncertainty))),
        Err(avrs_core::Error::Infeasible(_)) => Ok(("inf".into(), String::new())),
        Err(e) => Err(e.clone().into()),
    }
}

fn bounds(a: &BoundsArgs, raw: &[String]) -> Outcome {
    let exec = executor(&a.common)?;
    let spec = load_spec(&a.common.spec)?;
    let grid = GridConfig {
        divisions: a.divisions,
        fine_step: a.fine_step,
        u_upper: a.u_upper,
        u_lower: a.u_lower,
        starts: a.starts as usize,
        ..GridConfig::default()
    };
    let game = GameConfig {
        tolerance: a.game_tol,
        ..GameConfig::default()
    };
    let solver = Solver::new(&spec, grid, &game)?;
    let ds: Vec<f64> = match &a.d {
        Some(ds) => ds.clone(),
        None => {
            let (lo, hi) = (solver.d0().value, solver.d1().value);
            (0..a.points)
                .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / a.points as f64)
                .collect()
        }
    };
    if let Some(d) = ds.iter().find(|d| !(**d >= 0.0 && d.is_finite())) {
        return Err(CliError::Input(format!(
            "distortion levels must be finite and non-negative, got {d}"
        )));
    }
    let report = solver.report(&ds, &exec);
    let inv = Invocation::new(raw, a.common.seed);
    let mut csv = Csv::new(
        &inv,
        &[
            "D",
            "R_upper",
            "R_lower",
            "uncertainty_upper",
            "uncertainty_lower",
        ],
    );
    for p in &report.curve {
        let (ru, uu) = bound_fields(&p.upper)?;
        let (rl, ul) = bound_fields(&p.lower)?;
        csv.row([num(p.d), ru, rl, uu, ul]);
    }
    let curve: Vec<Value> = report
        .curve
        .iter()
        .map(|p| json!({ "D": p.d, "upper": bound_json(&p.upper), "lower": bound_json(&p.lower) }))
        .collect();
    let doc = json!({
        "invocation": inv.to_json(),
        "grid": { "divisions": grid.divisions, "fine_step": grid.fine_step, "u_upper": grid.u_upper, "u_lower": grid.u_lower, "starts": grid.starts },
        "D0": game_json(&report.d0),
        "D1": game_json(&report.d1),
        "curve": curve,
    });
    write_file(&a.common.out_dir, "bounds.csv", &csv.into_string())?;
    write_json(&a.common.out_dir, "bounds.json", &doc)?;
    Ok(())
}

// --- simulate ------------------------------------------------------------------

fn seq(s: &SymbolVector) -> String {
    let sep = if s.alphabet_size() <= 10 { "" } else { "," };
    s.symbols()
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

fn delta0_of(n: usize, arg: Option<f64>) -> Result<f64, CliError> {
    let d = arg.unwrap_or_else(|| default_delta0(n));
    if !(d > 0.0) {
        return Err(CliError::Input(format!("delta0 must be positive, got {d}")));
    }
    Ok(d)
}

struct Resolved {
    jammers: Vec<NamedJammer>,
    search: Option<Value>,
}

/// Turns `--jammers` into concrete strategies; `greedy-search` searches a
/// worst jamming block for each source block and bundles them into one block
/// map (symbolwise `j = 0` elsewhere).
fn resolve_jammers<E: Executor>(
    source: JammerSource,
    design: &CodeDesign,
    sources: &[SymbolVector],
    search: &SearchArgs,
    seed_value: u64,
    exec: &E,
) -> Result<Resolved, CliError> {
    match source {
        JammerSource::Fixed(jammers) => Ok(Resolved {
            jammers,
            search: None,
        }),
        JammerSource::GreedySearch => {
            let mut entries = Vec::with_capacity(sources.len());
            let mut found = Vec::with_capacity(sources.len());
            for (i, x) in sources.iter().enumerate() {
                let settings = SearchSettings {
                    budget: search.search_budget,
                    draws: search.search_draws,
                    knows_codebook: search.knows_codebook,
                    seed: seed::derive(seed_value, "search", i as u64),
                };
                let w = worst_case_search(design, x, settings, exec)?;
                found.push(json!({
                    "x_index": i,
                    "jamming": w.jamming.iter().map(|v| v.to_string()).collect::<String>(),
                    "estimate": w.estimate,
                    "std_err": w.std_err,
                    "evaluations": w.evaluations,
                    "exhaustive": w.exhaustive,
                }));
                entries.push((x.symbols().to_vec(), w.jamming));
            }
            let strategy = JammerStrategy::Block(BlockMap {
                entries,
                fallback: vec![0; design.spec().x_size()],
            });
            Ok(Resolved {
                jammers: vec![NamedJammer {
                    id: "greedy-search".into(),
                    strategy,
                }],
                search: Some(
                    json!({ "note": "heuristic search: a lower bound on the worst case", "results": found }),
                ),
            })
        }
    }
}

fn build_design<E: Executor>(
    spec: &ProblemSpec,
    policy: &AuxiliaryPolicy,
    n: usize,
    code: &CodeArgs,
    exec: &E,
) -> Result<CodeDesign, CliError> {
    Ok(CodeDesign::new(
        spec,
        policy,
        n,
        code.params(),
        &GridConfig::default(),
        exec,
    )?)
}

fn rates_json(design: &CodeDesign) -> Value {
    let n = design.n() as f64;
    json!({
        "max_bin_rate": design.max_bin_rate(),
        "rate_budget": design.max_bin_rate() + design.params().eps / 4.0,
        "message_bits": design.max_message_bits(),
        "message_rate": design.max_message_bits() as f64 / n,
        "truncated": design.any_truncated(),
    })
}

fn simulate(a: &SimulateArgs, raw: &[String]) -> Outcome {
    let exec = executor(&a.common)?;
    let spec = load_spec(&a.common.spec)?;
    let policy = load_policy(&a.code.policy, &spec)?;
    let jammer_source = load_jammers(&a.jammers, &spec)?;
    let delta0 = delta0_of(a.n, a.delta0)?;
    let design = build_design(&spec, &policy, a.n, &a.code, &exec)?;
    let seed_value = a.common.seed;
    let sources = sample_sources(&spec, a.n, delta0, seed_value, a.sources)?;
    let resolved = resolve_jammers(
        jammer_source,
        &design,
        &sources,
        &a.search,
        seed_value,
        &exec,
    )?;
    let strategies: Vec<JammerStrategy> = resolved
        .jammers
        .iter()
        .map(|j| j.strategy.clone())
        .collect();
    let settings = EstimateSettings {
        sources: a.sources,
        trials: a.trials,
        delta0: Some(delta0),
        seed: seed_value,
        code_seed: None,
    };
    let report = max_distortion_estimate(&design, &strategies, &settings, &exec)?;

    let inv = Invocation::new(raw, seed_value);
    let mut csv = Csv::new(
        &inv,
        &["n", "jammer_id", "distortion", "E_enc", "E_dec1", "E_dec2"],
    );
    let flag = |b: bool| if b { "1".to_string() } else { "0".to_string() };
    for c in &report.cells {
        let id = &resolved.jammers[c.jammer_index].id;
        for (d, f) in c.distortions.iter().zip(&c.flags) {
            csv.row([
                a.n.to_string(),
                id.clone(),
                num(*d),
                flag(f.0),
                flag(f.1),
                flag(f.2),
            ]);
        }
    }
    let cells: Vec<Value> = report
        .cells
        .iter()
        .map(|c| {
            json!({
                "x_index": c.x_index,
                "jammer_id": resolved.jammers[c.jammer_index].id,
                "mean": c.mean,
                "std_err": c.std_err,
                "E_enc": c.e_enc,
                "E_dec1": c.e_dec1,
                "E_dec2": c.e_dec2,
            })
        })
        .collect();
    let doc = json!({
        "invocation": inv.to_json(),
        "n": a.n,
        "trials": a.trials,
        "delta0": delta0,
        "params": a.code.to_json(),
        "rates": rates_json(&design),
        "jammers": resolved.jammers.iter().map(|j| json!({ "id": j.id, "description": j.strategy.describe() })).collect::<Vec<_>>(),
        "search": resolved.search,
        "sources": report.sources.iter().map(seq).collect::<Vec<_>>(),
        "cells": cells,
        "max": report.max,
        "max_std_err": report.max_std_err,
        "argmax": report.argmax.map(|(x, j)| json!({ "x_index": x, "jammer_id": resolved.jammers[j].id })),
    });
    write_file(&a.common.out_dir, "simulate.csv", &csv.into_string())?;
    write_json(&a.common.out_dir, "simulate.json", &doc)?;
    Ok(())
}

// --- derandomize ---------------------------------------------------------------

fn derandomize(a: &DerandomizeArgs, raw: &[String]) -> Outcome {
    let exec = executor(&a.common)?;
    let spec = load_spec(&a.common.spec)?;
    let policy = load_policy(&a.code.policy, &spec)?;
    let jammer_source = load_jammers(&a.jammers, &spec)?;
    let delta0 = delta0_of(a.n, a.delta0)?;
    let design = build_design(&spec, &policy, a.n, &a.code, &exec)?;
    let seed_value = a.common.seed;
    let certify_seed = seed::derive(seed_value, "certify", 0);
    let ensemble = sample_ensemble(&design, a.k, seed::derive(seed_value, "ensemble", 0))?;
    let sources = sample_sources(&spec, a.n, delta0, certify_seed, a.sources)?;
    let resolved = resolve_jammers(
        jammer_source,
        &design,
        &sources,
        &a.search,
        seed_value,
        &exec,
    )?;
    let strategies: Vec<JammerStrategy> = resolved
        .jammers
        .iter()
        .map(|j| j.strategy.clone())
        .collect();
    let settings = CertifySettings {
        sources: a.sources,
        trials: a.trials,
        delta0: Some(delta0),
        mu: a.mu,
        seed: certify_seed,
    };
    let report = certify_ensemble(&ensemble, &design, &strategies, &settings, &exec)?;
    let k = ensemble.k();
    let code = build_stochastic_code(ensemble, &design);

    let b = a.b.unwrap_or_else(|| spec.distortion().d_max());
    let bounds = if b > 0.0 {
        let alpha = a.alpha.unwrap_or_else(|| alpha_max(b));
        let (n, k64) = (a.n as u64, k as u64);
        json!({
            "b": b,
            "alpha": alpha,
            "bernstein_bound": bernstein_bound(a.mu, b, alpha, k64)?,
            "union_bound_ln": union_bound_ln(n, k64, a.mu, b, alpha, spec.x_size(), spec.j_size())?,
            "union_bound": union_bound(n, k64, a.mu, b, alpha, spec.x_size(), spec.j_size())?,
        })
    } else {
        Value::Null
    };
    let cells: Vec<Value> = report
        .cells
        .iter()
        .map(|c| {
            json!({
                "x_index": c.x_index,
                "jammer_id": resolved.jammers[c.jammer_index].id,
                "ensemble_mean": c.ensemble_mean,
                "ensemble_std_err": c.ensemble_std_err,
                "parent_mean": c.parent_mean,
                "parent_std_err": c.parent_std_err,
                "excess": c.excess,
                "excess_std_err": c.excess_std_err,
            })
        })
        .collect();
    let inv = Invocation::new(raw, seed_value);
    let doc = json!({
        "invocation": inv.to_json(),
        "n": a.n,
        "K": k,
        "mu": a.mu,
        "trials": a.trials,
        "delta0": delta0,
        "params": a.code.to_json(),
        "rates": {
            "parent_rate": code.parent_rate(),
            "rate": code.rate(),
            "overhead": code.rate() - code.parent_rate(),
            "index_bits": code.index_bits(),
            "transmitted_rate": code.transmitted_rate(),
        },
        "jammers": resolved.jammers.iter().map(|j| json!({ "id": j.id, "description": j.strategy.describe() })).collect::<Vec<_>>(),
        "search": resolved.search,
        "certification": {
            "sources": report.sources.iter().map(seq).collect::<Vec<_>>(),
            "cells": cells,
            "max_excess": report.max_excess,
            "max_excess_std_err": report.max_excess_std_err,
            "passed": report.passed,
            "note": report.note,
        },
        "bounds": bounds,
    });
    write_json(&a.common.out_dir, "derandomize.json", &doc)?;
    Ok(())
}

// --- lemmas ----------------------------------------------------------------------

fn harness_row(csv: &mut Csv, r: &HarnessResult) {
    csv.row([
        r.harness.to_string(),
        r.n.to_string(),
        num(r.empirical),
        r.bound.map(num).unwrap_or_default(),
        num(r.sigma),
        r.verdict.as_str().into(),
    ]);
}

fn harness_json(r: &HarnessResult) -> Value {
    json!({
        "harness": r.harness,
        "n": r.n,
        "trials": r.trials,
        "empirical": r.empirical,
        "bound": r.bound,
        "sigma": r.sigma,
        "verdict": r.verdict.as_str(),
        "exponent": r.exponent,
    })
}

/// One summary row per trend: change from the first to the last rung and its
/// combined `σ`.
fn trend_row(csv: &mut Csv, name: &str, t: &Trend) {
    if let (Some(a), Some(b)) = (t.points.first(), t.points.last()) {
        let sigma = (a.sigma * a.sigma + b.sigma * b.sigma).sqrt();
        csv.row([
            format!("{name}-trend"),
            b.n.to_string(),
            num(b.empirical - a.empirical),
            String::new(),
            num(sigma),
            t.verdict.as_str().into(),
        ]);
    }
}

fn trend_json(name: &str, decreasing: bool, t: &Trend) -> Value {
    json!({
        "harness": name,
        "direction": if decreasing { "decreasing" } else { "increasing" },
        "ladder": t.points.iter().map(|p| p.n).collect::<Vec<_>>(),
        "verdict": t.verdict.as_str(),
    })
}

/// `Y`-marginal under the jammer that always sends 0.
fn trivial_y(spec: &ProblemSpec) -> Vec<f64> {
    let (xs, js) = (spec.x_size(), spec.j_size());
    let q: Vec<f64> = (0..xs * js)
        .map(|i| if i % js == 0 { 1.0 } else { 0.0 })
        .collect();
    spec.induced_y(&q)
}

struct LadderOut<'a> {
    csv: &'a mut Csv,
    results: &'a mut Vec<Value>,
    trends: &'a mut Vec<Value>,
}

type Harness<'h> = dyn Fn(&CodeDesign, u64) -> Result<HarnessResult, CliError> + 'h;

impl LadderOut<'_> {
    /// Runs a harness on every rung and records the rungs and the trend.
    fn ladder(
        &mut self,
        designs: &[CodeDesign],
        name: &str,
        decreasing: bool,
        seed_of: &dyn Fn(&str, usize) -> u64,
        run: &Harness,
    ) -> Outcome {
        let mut points = Vec::with_capacity(designs.len());
        for d in designs {
            let r = run(d, seed_of(name, d.n()))?;
            harness_row(self.csv, &r);
            self.results.push(harness_json(&r));
            points.push(r);
        }
        let t = lemmas::trend(points, decreasing);
        trend_row(self.csv, name, &t);
        self.trends.push(trend_json(name, decreasing, &t));
        Ok(())
    }
}

fn lemmas(a: &LemmasArgs, raw: &[String]) -> Outcome {
    let exec = executor(&a.common)?;
    let spec = load_spec(&a.common.spec)?;
    let policy = load_policy(&a.code.policy, &spec)?;
    let jammer = match load_jammers(&a.jammers, &spec)? {
        JammerSource::Fixed(mut v) => v.swap_remove(0),
        JammerSource::GreedySearch => {
            return Err(CliError::Input(
                "lemmas needs a fixed jammer, not greedy-search".into(),
            ))
        }
    };
    if a.ladder.iter().any(|&n| n == 0) {
        return Err(CliError::Input(
            "ladder blocklengths must be positive".into(),
        ));
    }
    let all = !(a.conditional_typicality
        || a.covering
        || a.packing
        || a.markov
        || a.encoder_failure
        || a.exact);
    let seed_value = a.common.seed;
    let harness_seed =
        |name: &str, n: usize| seed::derive(seed::derive(seed_value, name, 0), "n", n as u64);

    let inv = Invocation::new(raw, seed_value);
    let mut csv = Csv::new(
        &inv,
        &["harness", "n", "empirical", "bound", "sigma", "verdict"],
    );
    let mut results = Vec::new();
    let mut trends = Vec::new();
    let mut exact_doc = Value::Null;

    if all || a.conditional_typicality {
        let (xs, ys, zs) = (spec.x_size(), spec.y_size(), spec.z_size());
        let rows: Vec<Vec<f64>> = (0..xs)
            .map(|x| {
                (0..ys)
                    .map(|y| (0..zs).map(|z| spec.channel().prob(x, 0, y, z)).sum())
                    .collect()
            })
            .collect();
        let w = CondDistribution::new(rows)?;
        let r = lemmas::conditional_typicality(
            spec.p_x(),
            &w,
            a.ct_n,
            a.ct_delta0,
            a.trials,
            harness_seed("conditional-typicality", a.ct_n),
            &exec,
        )?;
        harness_row(&mut csv, &r);
        results.push(harness_json(&r));
    }

    let ladder_designs = if all || a.covering || a.packing || a.markov || a.encoder_failure {
        a.ladder
            .iter()
            .map(|&n| build_design(&spec, &policy, n, &a.code, &exec))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        Vec::new()
    };
    let p_y = trivial_y(&spec);

    let mut out = LadderOut {
        csv: &mut csv,
        results: &mut results,
        trends: &mut trends,
    };
    if all || a.covering {
        out.ladder(
            &ladder_designs,
            "covering",
            false,
            &harness_seed,
            &|d, s| {
                let t = TypeTable::from_counts(
                    vec![spec.y_size()],
                    nominal_counts(&p_y, d.n() as u64),
                )?;
                Ok(lemmas::covering(d, &t, a.trials, s, &exec)?)
            },
        )?;
    }
    if all || a.packing {
        let any = std::cell::RefCell::new(Vec::new());
        out.ladder(&ladder_designs, "packing", true, &harness_seed, &|d, s| {
            let r = lemmas::packing(d, &jammer.strategy, a.trials, s, &exec)?;
            any.borrow_mut().push(r.any_candidate);
            Ok(r.per_candidate)
        })?;
        for r in any.into_inner() {
            harness_row(out.csv, &r);
            out.results.push(harness_json(&r));
        }
    }
    if all || a.markov {
        if !(a.delta4 >= 0.0) {
            return Err(CliError::Input("delta4 must be non-negative".into()));
        }
        out.ladder(&ladder_designs, "markov", true, &harness_seed, &|d, s| {
            Ok(lemmas::markov_conclusion(
                d,
                &jammer.strategy,
                a.delta4,
                a.trials,
                s,
                &exec,
            )?)
        })?;
    }
    if all || a.encoder_failure {
        out.ladder(
            &ladder_designs,
            "encoder-failure",
            true,
            &harness_seed,
            &|d, s| {
                Ok(lemmas::encoder_failure(
                    d,
                    &jammer.strategy,
                    a.trials,
                    s,
                    &exec,
                )?)
            },
        )?;
    }
    if all || a.exact {
        let d = build_design(&spec, &policy, a.exact_n, &a.code, &exec)?;
        let y = lemmas::nominal_block(&Distribution::new(p_y.clone())?, a.exact_n, 1.0)?;
        let e = lemmas::exact_codeword_conditional(&d, &y)?;
        let r = HarnessResult {
            harness: "exact-conditional",
            n: a.exact_n,
            trials: 0,
            empirical: e.max_ratio,
            bound: None,
            sigma: 0.0,
            verdict: Verdict::Info,
            exponent: e.g.is_finite().then_some(e.g),
        };
        harness_row(out.csv, &r);
        out.results.push(harness_json(&r));
        let rows: Vec<Value> = e
            .rows
            .iter()
            .map(|(u, p, ok)| json!({ "u": u.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","), "probability": p, "meets_condition": ok }))
            .collect();
        exact_doc = json!({
            "y": seq(&y),
            "codewords": e.codewords,
            "h_u_given_y": e.h_u_given_y,
            "max_ratio": e.max_ratio,
            "g": if e.g.is_finite() { json!(e.g) } else { Value::Null },
            "rows": rows,
        });
    }

    let doc = json!({
        "invocation": inv.to_json(),
        "params": a.code.to_json(),
        "trials": a.trials,
        "jammer": { "id": jammer.id, "description": jammer.strategy.describe() },
        "results": results,
        "trends": trends,
        "exact_conditional": exact_doc,
        "notes": [
            "covering is checked only for an increasing success rate (a singly exponential claim), not the doubly exponential rate",
            "bounds at least 1 are reported as vacuous",
        ],
    });
    write_file(&a.common.out_dir, "lemmas.csv", &csv.into_string())?;
    write_json(&a.common.out_dir, "lemmas.json", &doc)?;
    Ok(())
}
