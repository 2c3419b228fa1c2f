//! Turning the randomized code into a code with a stochastic encoder.
//!
//! Draw `K` deterministic codes from the randomized code's distribution. For
//! a typical source block and a jamming sequence, the `K` distortions are
//! i.i.d. and bounded, so a Bernstein-type inequality makes their average
//! concentrate; a union bound over the `|X|^n |J|^n` pairs survives when
//! `K = n²`. The encoder then picks one of the `K` codes privately and sends
//! its index, which costs `log₂ K / n` extra bits per symbol.

use alloc::string::String;
use alloc::vec::Vec;

use crate::adversary::JammerStrategy;
use crate::coding::{
    ceil_log2, decode, default_delta0, mean_and_std_err, reconstruct, sample_sources,
    simulate_session, CodeDesign, SessionReport,
};
use crate::error::usage_err;
use crate::exec::Executor;
use crate::math;
use crate::seed;
use crate::typeclass::{SymbolVector, TypeTable};
use crate::Result;

/// `K` deterministic codes drawn from a randomized code.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    n: usize,
    master_seed: u64,
    seeds: Vec<u64>,
}

impl Ensemble {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.seeds.len()
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Code seed of every member; member `i` is the deterministic code the
    /// randomized code produces under that seed.
    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }
}

/// `K = n²`.
pub fn default_k(n: usize) -> usize {
    n.saturating_mul(n)
}

/// Draws `k` member codes (default `n²`) for the randomized code `design`.
pub fn sample_ensemble(
    design: &CodeDesign,
    k: Option<usize>,
    master_seed: u64,
) -> Result<Ensemble> {
    let k = k.unwrap_or_else(|| default_k(design.n()));
    if k == 0 {
        return Err(usage_err!("ensemble size K must be at least 1"));
    }
    let seeds = (0..k as u64)
        .map(|i| seed::derive(master_seed, "member", i))
        .collect();
    Ok(Ensemble {
        n: design.n(),
        master_seed,
        seeds,
    })
}

/// Settings of [`certify_ensemble`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifySettings {
    /// Number of sampled `δ₀`-typical source blocks.
    pub sources: usize,
    /// Sessions per cell. Members are visited round-robin, so a multiple of
    /// `K` weights every member equally.
    pub trials: usize,
    pub delta0: Option<f64>,
    pub mu: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyCell {
    pub x_index: usize,
    pub jammer_index: usize,
    /// Estimate of `(1/K) Σ_i D(x, j, C_i)`.
    pub ensemble_mean: f64,
    pub ensemble_std_err: f64,
    /// Estimate of the randomized code's expected distortion.
    pub parent_mean: f64,
    pub parent_std_err: f64,
    /// `ensemble_mean - parent_mean`.
    pub excess: f64,
    /// Standard error of the paired difference.
    pub excess_std_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyReport {
    pub n: usize,
    pub k: usize,
    pub mu: f64,
    pub delta0: f64,
    pub trials: usize,
    pub sources: Vec<SymbolVector>,
    pub cells: Vec<CertifyCell>,
    /// Largest excess over all cells (0 without cells or trials).
    pub max_excess: f64,
    pub max_excess_std_err: f64,
    pub passed: bool,
    pub note: String,
}

const CERTIFY_NOTE: &str = "spot check over sampled typical source blocks and the given jammers, not the full maximum over all typical blocks; the union bound computed here is the pair-based one, whereas a bound over all jamming functions of the source block would grow doubly exponentially in n";

/// Compares the ensemble average distortion with the randomized code's on
/// sampled typical blocks and the given jammers. Both estimates reuse the
/// same jamming and channel draws; only the code differs. Passes when the
/// largest excess is at most `mu`.
pub fn certify_ensemble<E: Executor>(
    ensemble: &Ensemble,
    design: &CodeDesign,
    jammers: &[JammerStrategy],
    settings: &CertifySettings,
    exec: &E,
) -> Result<CertifyReport> {
    if !(settings.mu > 0.0) {
        return Err(usage_err!("mu must be positive"));
    }
    if ensemble.n != design.n() {
        return Err(usage_err!(
            "ensemble has n = {}, code has n = {}",
            ensemble.n,
            design.n()
        ));
    }
    for j in jammers {
        j.check(design.spec())?;
    }
    let n = design.n();
    let delta0 = settings.delta0.unwrap_or_else(|| default_delta0(n));
    let sources = sample_sources(design.spec(), n, delta0, settings.seed, settings.sources)?;
    let trials = settings.trials;
    let cells_n = sources.len() * jammers.len();
    let k = ensemble.k();
    let pairs = exec.map_indexed(cells_n * trials, |i| -> Result<(f64, f64)> {
        let (cell, t) = (i / trials, i % trials);
        let (xi, ji) = (cell / jammers.len(), cell % jammers.len());
        let session = seed::derive(
            seed::derive(settings.seed, "x", xi as u64),
            "trial",
            t as u64,
        );
        let member = ensemble.seeds[t % k];
        let fresh = seed::derive(session, "code", 0);
        let e = simulate_session(&sources[xi], &jammers[ji], design, member, session)?.distortion;
        let p = simulate_session(&sources[xi], &jammers[ji], design, fresh, session)?.distortion;
        Ok((e, p))
    });
    let pairs = pairs.into_iter().collect::<Result<Vec<_>>>()?;
    let mut cells = Vec::with_capacity(cells_n);
    for cell in 0..cells_n {
        let chunk = &pairs[cell * trials..(cell + 1) * trials];
        let ens: Vec<f64> = chunk.iter().map(|p| p.0).collect();
        let par: Vec<f64> = chunk.iter().map(|p| p.1).collect();
        let diff: Vec<f64> = chunk.iter().map(|p| p.0 - p.1).collect();
        let (ensemble_mean, ensemble_std_err) = mean_and_std_err(&ens);
        let (parent_mean, parent_std_err) = mean_and_std_err(&par);
        let (excess, excess_std_err) = mean_and_std_err(&diff);
        cells.push(CertifyCell {
            x_index: cell / jammers.len(),
            jammer_index: cell % jammers.len(),
            ensemble_mean,
            ensemble_std_err,
            parent_mean,
            parent_std_err,
            excess,
            excess_std_err,
        });
    }
    let (mut max_excess, mut max_excess_std_err) = (0.0, 0.0);
    if trials > 0 {
        if let Some(c) = cells
            .iter()
            .reduce(|a, b| if b.excess > a.excess { b } else { a })
        {
            max_excess = c.excess;
            max_excess_std_err = c.excess_std_err;
        }
    }
    Ok(CertifyReport {
        n,
        k,
        mu: settings.mu,
        delta0,
        trials,
        sources,
        cells,
        max_excess,
        max_excess_std_err,
        passed: max_excess <= settings.mu,
        note: String::from(CERTIFY_NOTE),
    })
}

/// Largest admissible `α` for range `b`: `min(1, (b/2) e^{-2b})`.
pub fn alpha_max(b: f64) -> f64 {
    (0.5 * b * math::exp(-2.0 * b)).min(1.0)
}

fn check_bound_args(mu: f64, b: f64, alpha: f64) -> Result<()> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(usage_err!("mu must be positive and finite, got {mu}"));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(usage_err!("b must be in (0, inf), got {b}"));
    }
    let hi = alpha_max(b);
    if !(alpha > 0.0 && alpha <= hi) {
        return Err(usage_err!("alpha = {alpha} outside (0, {hi}] for b = {b}"));
    }
    Ok(())
}

/// `e^{-(αμ + α²b²) N}`.
pub fn bernstein_bound(mu: f64, b: f64, alpha: f64, samples: u64) -> Result<f64> {
    check_bound_args(mu, b, alpha)?;
    Ok(math::exp(
        -(alpha * mu + alpha * alpha * b * b) * samples as f64,
    ))
}

/// Natural log of the uncapped union bound,
/// `-(K(αμ + α²b²) - n ln(|J||X|))`.
pub fn union_bound_ln(
    n: u64,
    k: u64,
    mu: f64,
    b: f64,
    alpha: f64,
    x_size: usize,
    j_size: usize,
) -> Result<f64> {
    check_bound_args(mu, b, alpha)?;
    if x_size == 0 || j_size == 0 {
        return Err(usage_err!("alphabets must be non-empty"));
    }
    let per = alpha * mu + alpha * alpha * b * b;
    Ok(-(k as f64 * per - n as f64 * math::ln((x_size * j_size) as f64)))
}

/// `|X|^n |J|^n e^{-(αμ + α²b²) K}`, capped at 1.
pub fn union_bound(
    n: u64,
    k: u64,
    mu: f64,
    b: f64,
    alpha: f64,
    x_size: usize,
    j_size: usize,
) -> Result<f64> {
    let l = union_bound_ln(n, k, mu, b, alpha, x_size, j_size)?;
    Ok(if l >= 0.0 { 1.0 } else { math::exp(l) })
}

/// The code that picks one of the ensemble's members at random per block and
/// sends its index ahead of the message.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticEncoderCode {
    ensemble: Ensemble,
    parent_rate: f64,
}

/// One block of the stochastic-encoder code.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticSession {
    /// Privately drawn member index.
    pub index: usize,
    pub report: SessionReport,
}

impl StochasticEncoderCode {
    /// Wraps an ensemble whose members each have rate `parent_rate`.
    pub fn new(ensemble: Ensemble, parent_rate: f64) -> Self {
        Self {
            ensemble,
            parent_rate,
        }
    }

    pub fn ensemble(&self) -> &Ensemble {
        &self.ensemble
    }

    pub fn parent_rate(&self) -> f64 {
        self.parent_rate
    }

    /// `R + log₂(K)/n`; for `K = n²` the overhead is `2 log₂(n)/n`.
    pub fn rate(&self) -> f64 {
        self.parent_rate + math::log2(self.ensemble.k() as f64) / self.ensemble.n as f64
    }

    /// Bits spent on the member index, `⌈log₂ K⌉`.
    pub fn index_bits(&self) -> u32 {
        ceil_log2(self.ensemble.k() as u64)
    }

    /// `R + ⌈log₂ K⌉/n`, what an integer-bit index actually costs.
    pub fn transmitted_rate(&self) -> f64 {
        self.parent_rate + self.index_bits() as f64 / self.ensemble.n as f64
    }

    /// Draws the member index from the session seed and runs that member.
    pub fn simulate(
        &self,
        x: &SymbolVector,
        jammer: &JammerStrategy,
        design: &CodeDesign,
        session_seed: u64,
    ) -> Result<StochasticSession> {
        let mut rng = seed::rng_from_seed(seed::derive(session_seed, "member-index", 0));
        let index = seed::uniform_index(&mut rng, self.ensemble.k() as u64) as usize;
        let report = simulate_session(x, jammer, design, self.ensemble.seeds[index], session_seed)?;
        Ok(StochasticSession { index, report })
    }

    /// Decoder: dispatches on the index, then runs that member's decoder.
    pub fn decode(
        &self,
        design: &CodeDesign,
        index: usize,
        t_y: &TypeTable,
        bin: u64,
        z: &SymbolVector,
    ) -> Result<SymbolVector> {
        let seed =
            *self.ensemble.seeds.get(index).ok_or_else(|| {
                usage_err!("member index {index} outside K = {}", self.ensemble.k())
            })?;
        let cb = design.codebook(t_y, seed)?;
        let dec = decode(bin, z, &cb, design.params().gamma)?;
        reconstruct(&dec.codeword, z, design.policy(), design.spec().xhat_size())
    }
}

/// Parent rate from the rate accounting: `max_T R(T) + ε/4`.
pub fn build_stochastic_code(ensemble: Ensemble, design: &CodeDesign) -> StochasticEncoderCode {
    let rate = design.max_bin_rate() + design.params().eps / 4.0;
    StochasticEncoderCode::new(ensemble, rate)
}
