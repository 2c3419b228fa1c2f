//! Monte Carlo checks of the typicality lemmas behind the coding scheme.
//!
//! Every harness reports the empirical rate, the bound it is compared with
//! (when the lemma gives one), the sample size and `σ = sqrt(p(1-p)/trials)`.
//! Bounds that exceed 1 at the chosen `n` are reported as vacuous instead of
//! trivially passing. Lemmas that only assert "vanishes as `n` grows" are
//! checked as trends over a ladder of blocklengths.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand_core::RngCore;

use crate::adversary::{sample_jamming, JammerStrategy};
use crate::coding::{
    channel_outputs, default_delta0, encode, meets_encoder_condition, sample_typical_source,
    simulate_session, CodeDesign,
};
use crate::error::usage_err;
use crate::exec::Executor;
use crate::math;
use crate::prob::{CondDistribution, Distribution};
use crate::seed;
use crate::typeclass::{
    conditional_type, empirical_type, is_typical, nominal_counts, SymbolVector, TypeTable,
};
use crate::{Error, Result};

const TYPE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// The bound is at least 1 at this `n`; nothing is being tested.
    Vacuous,
    /// No claim to check (a single rung of a trend, or a measurement).
    Info,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Vacuous => "vacuous",
            Verdict::Info => "info",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarnessResult {
    pub harness: &'static str,
    pub n: usize,
    pub trials: usize,
    pub empirical: f64,
    pub bound: Option<f64>,
    pub sigma: f64,
    pub verdict: Verdict,
    /// `-log₂(rate)/n`, when the rate is positive.
    pub exponent: Option<f64>,
}

/// `sqrt(p(1-p)/trials)`.
pub fn binomial_sigma(p: f64, trials: usize) -> f64 {
    if trials == 0 {
        0.0
    } else {
        math::sqrt(p * (1.0 - p) / trials as f64)
    }
}

fn rate_of(hits: usize, trials: usize) -> f64 {
    if trials == 0 {
        0.0
    } else {
        hits as f64 / trials as f64
    }
}

fn exponent_of(rate: f64, n: usize) -> Option<f64> {
    (rate > 0.0).then(|| -math::log2(rate) / n as f64)
}

fn info(harness: &'static str, n: usize, trials: usize, empirical: f64) -> HarnessResult {
    HarnessResult {
        harness,
        n,
        trials,
        empirical,
        bound: None,
        sigma: binomial_sigma(empirical, trials),
        verdict: Verdict::Info,
        exponent: exponent_of(empirical, n),
    }
}

/// A deterministic `δ₀`-typical block: symbols laid out in order with the
/// largest-remainder rounding of `n P`.
pub fn nominal_block(p: &Distribution, n: usize, delta0: f64) -> Result<SymbolVector> {
    let counts = nominal_counts(p.mass(), n as u64);
    let mut s = Vec::with_capacity(n);
    for (a, &c) in counts.iter().enumerate() {
        s.extend(core::iter::repeat(a).take(c as usize));
    }
    let s = SymbolVector::new(p.len(), s)?;
    if !is_typical(&s, p, delta0) {
        return Err(Error::Diagnostic(alloc::format!(
            "no {delta0}-typical sequence of length {n} exists"
        )));
    }
    Ok(s)
}

/// `|S||T| e^{-2nδ₀³}`.
pub fn conditional_typicality_bound(s_size: usize, t_size: usize, n: usize, delta0: f64) -> f64 {
    (s_size * t_size) as f64 * math::exp(-2.0 * n as f64 * delta0 * delta0 * delta0)
}

/// Fixes a `δ₀`-typical `s`, draws `T ~ W^n(·|s)` and counts how often
/// `(s, T)` is not `3δ₀`-typical for `P_S W`.
pub fn conditional_typicality<E: Executor>(
    p_s: &Distribution,
    w: &CondDistribution,
    n: usize,
    delta0: f64,
    trials: usize,
    seed_value: u64,
    exec: &E,
) -> Result<HarnessResult> {
    if w.from_size() != p_s.len() {
        return Err(usage_err!(
            "W has {} input symbols, P_S has {}",
            w.from_size(),
            p_s.len()
        ));
    }
    if n == 0 || !(delta0 > 0.0) {
        return Err(usage_err!("need n ≥ 1 and δ₀ > 0"));
    }
    let s = nominal_block(p_s, n, delta0)?;
    let (ss, ts) = (p_s.len(), w.to_size());
    let target: Vec<f64> = (0..ss * ts)
        .map(|i| p_s.get(i / ts) * w.get(i / ts, i % ts))
        .collect();
    let cdfs: Vec<Vec<f64>> = (0..ss).map(|a| seed::cdf_of(w.row(a))).collect();
    let hits = exec.map_indexed(trials, |t| {
        let mut rng = seed::rng_from_seed(seed::derive(seed_value, "trial", t as u64));
        let mut counts = vec![0u64; ss * ts];
        for &a in s.symbols() {
            counts[a * ts + seed::sample_cdf(&mut rng, &cdfs[a])] += 1;
        }
        counts
            .iter()
            .zip(&target)
            .any(|(&c, &p)| math::abs(c as f64 / n as f64 - p) > 3.0 * delta0 + TYPE_SLACK)
    });
    let rate = rate_of(hits.iter().filter(|&&h| h).count(), trials);
    let sigma = binomial_sigma(rate, trials);
    let bound = conditional_typicality_bound(ss, ts, n, delta0);
    let verdict = if bound >= 1.0 {
        Verdict::Vacuous
    } else if rate <= bound + 3.0 * sigma {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(HarnessResult {
        harness: "conditional-typicality",
        n,
        trials,
        empirical: rate,
        bound: Some(bound),
        sigma,
        verdict,
        exponent: exponent_of(rate, n),
    })
}

/// A uniformly random arrangement of the multiset described by `t`.
pub fn random_sequence_of_type<R: RngCore + ?Sized>(
    t: &TypeTable,
    rng: &mut R,
) -> Result<SymbolVector> {
    if t.shape().len() != 1 {
        return Err(usage_err!("expected a single-variable type"));
    }
    let mut s = Vec::with_capacity(t.n() as usize);
    for (a, &c) in t.counts().iter().enumerate() {
        s.extend(core::iter::repeat(a).take(c as usize));
    }
    for i in (1..s.len()).rev() {
        let j = seed::uniform_index(rng, i as u64 + 1) as usize;
        s.swap(i, j);
    }
    SymbolVector::new(t.shape()[0], s)
}

/// Success rate of the encoder (no fallback) over random `y` of type `t_y`,
/// each with a fresh codebook.
pub fn covering<E: Executor>(
    design: &CodeDesign,
    t_y: &TypeTable,
    trials: usize,
    seed_value: u64,
    exec: &E,
) -> Result<HarnessResult> {
    if t_y.n() as usize != design.n() {
        return Err(usage_err!(
            "type has n = {}, code has n = {}",
            t_y.n(),
            design.n()
        ));
    }
    if t_y.n() == 0 {
        return Err(Error::Diagnostic(String::from("type has no realizations")));
    }
    design.codebook(t_y, 0)?;
    let delta2 = design.params().delta2;
    let ok = exec.map_indexed(trials, |t| -> Result<bool> {
        let trial = seed::derive(seed_value, "trial", t as u64);
        let mut rng = seed::rng_from_seed(seed::derive(trial, "y", 0));
        let y = random_sequence_of_type(t_y, &mut rng)?;
        let cb = design.codebook(t_y, seed::derive(trial, "code", 0))?;
        let mut enc_rng = seed::rng_from_seed(seed::derive(trial, "encoder", 0));
        Ok(!encode(&y, &cb, delta2, &mut enc_rng)?.fallback_used)
    });
    let ok = ok.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(info(
        "covering",
        design.n(),
        trials,
        rate_of(ok.iter().filter(|&&b| b).count(), trials),
    ))
}

/// Packing statistics of the decoding list.
#[derive(Debug, Clone, PartialEq)]
pub struct PackingResult {
    /// Fraction of the other codewords of the sent bin that land in the list.
    pub per_candidate: HarnessResult,
    /// Fraction of sessions where at least one other codeword lands in it.
    pub any_candidate: HarnessResult,
}

/// Runs full sessions with fresh codebooks against `jammer` on sampled
/// typical source blocks and counts false list members.
pub fn packing<E: Executor>(
    design: &CodeDesign,
    jammer: &JammerStrategy,
    trials: usize,
    seed_value: u64,
    exec: &E,
) -> Result<PackingResult> {
    jammer.check(design.spec())?;
    let n = design.n();
    let delta0 = default_delta0(n);
    let stats = exec.map_indexed(trials, |t| -> Result<(u64, u64, bool)> {
        let trial = seed::derive(seed_value, "trial", t as u64);
        let x = sample_typical_source(
            design.spec(),
            n,
            delta0,
            seed::derive(trial, "source", 0),
            10_000,
        )?;
        let r = simulate_session(&x, jammer, design, seed::derive(trial, "code", 0), trial)?;
        let wrong = r.list.iter().filter(|&&l| l != r.encoded_index.1).count() as u64;
        Ok((wrong, r.bin_size - 1, wrong > 0))
    });
    let stats = stats.into_iter().collect::<Result<Vec<_>>>()?;
    let (wrong, others) = stats
        .iter()
        .fold((0u64, 0u64), |(a, b), s| (a + s.0, b + s.1));
    let any = stats.iter().filter(|s| s.2).count();
    let per = if others == 0 {
        0.0
    } else {
        wrong as f64 / others as f64
    };
    let mut per_candidate = info("packing", n, trials, per);
    per_candidate.sigma = binomial_sigma(per, others as usize);
    Ok(PackingResult {
        per_candidate,
        any_candidate: info("packing-any", n, trials, rate_of(any, trials)),
    })
}

/// Runs full sessions with fresh codebooks and counts how often
/// `(x, J, Y, Z, U)` is not `δ₄`-typical for `P_X T_{J|x} W P_{U|Y}`.
pub fn markov_conclusion<E: Executor>(
    design: &CodeDesign,
    jammer: &JammerStrategy,
    delta4: f64,
    trials: usize,
    seed_value: u64,
    exec: &E,
) -> Result<HarnessResult> {
    jammer.check(design.spec())?;
    if !(delta4 >= 0.0) {
        return Err(usage_err!("δ₄ must be non-negative"));
    }
    let spec = design.spec();
    let policy = design.policy();
    let n = design.n();
    let delta0 = default_delta0(n);
    let (xs, js, ys, zs, us) = (
        spec.x_size(),
        spec.j_size(),
        spec.y_size(),
        spec.z_size(),
        policy.u_size(),
    );
    let hits = exec.map_indexed(trials, |t| -> Result<bool> {
        let trial = seed::derive(seed_value, "trial", t as u64);
        let x = sample_typical_source(spec, n, delta0, seed::derive(trial, "source", 0), 10_000)?;
        let r = simulate_session(&x, jammer, design, seed::derive(trial, "code", 0), trial)?;
        let cond = conditional_type(&r.j, &x)?;
        let mut counts = vec![0u64; xs * js * ys * zs * us];
        for i in 0..n {
            let idx = (((x.get(i) * js + r.j.get(i)) * ys + r.y.get(i)) * zs + r.z.get(i)) * us
                + r.u_encoded.get(i);
            counts[idx] += 1;
        }
        for a in 0..xs {
            let row = cond.row(a).unwrap_or_else(|| vec![1.0 / js as f64; js]);
            for b in 0..js {
                let pxj = spec.p_x().get(a) * row[b];
                for c in 0..ys {
                    for d in 0..zs {
                        let pw = pxj * spec.channel().prob(a, b, c, d);
                        for u in 0..us {
                            let p = pw * policy.p_uy().get(c, u);
                            let idx = (((a * js + b) * ys + c) * zs + d) * us + u;
                            if math::abs(counts[idx] as f64 / n as f64 - p) > delta4 + TYPE_SLACK {
                                return Ok(true);
                            }
                        }
                    }
                }
            }
        }
        Ok(false)
    });
    let hits = hits.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(info(
        "markov",
        n,
        trials,
        rate_of(hits.iter().filter(|&&h| h).count(), trials),
    ))
}

/// Trend over a blocklength ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct Trend {
    pub points: Vec<HarnessResult>,
    /// Every step changes by less than `3σ` in the wrong direction and the
    /// last rung is better than the first by more than `3σ`.
    pub verdict: Verdict,
}

/// Checks that the rates decrease (or increase, when `decreasing` is false)
/// along the ladder at `3σ`.
pub fn trend(points: Vec<HarnessResult>, decreasing: bool) -> Trend {
    let sign = if decreasing { 1.0 } else { -1.0 };
    let sd =
        |a: &HarnessResult, b: &HarnessResult| math::sqrt(a.sigma * a.sigma + b.sigma * b.sigma);
    let steps_ok = points
        .windows(2)
        .all(|w| sign * (w[1].empirical - w[0].empirical) <= 3.0 * sd(&w[0], &w[1]));
    let overall = match (points.first(), points.last()) {
        (Some(a), Some(b)) if points.len() >= 2 => {
            sign * (a.empirical - b.empirical) > 3.0 * sd(a, b)
        }
        _ => false,
    };
    Trend {
        points,
        verdict: if steps_ok && overall {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    }
}

/// Exact encoder output distribution for one `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactConditional {
    /// `(u, P(U = u | Y = y), meets the encoder condition)` for every `u`
    /// with positive probability, in lexicographic order.
    pub rows: Vec<(Vec<usize>, f64, bool)>,
    /// `H(U|Y)` in bits under `P_{U|Y} T_y`.
    pub h_u_given_y: f64,
    /// `max P(U = u | y) / 2^{-n H(U|Y)}` over codewords meeting the condition.
    pub max_ratio: f64,
    /// `log₂(max_ratio) / n`, the empirical `g` in the bound.
    pub g: f64,
    /// Codebook size.
    pub codewords: u64,
}

/// Largest `|U|^n` [`exact_codeword_conditional`] will enumerate.
pub const EXACT_LIMIT: u64 = 1 << 20;

/// `P(U = u | Y = y)` for the randomized code.
///
/// With `N` i.i.d. codewords from `P_U^n`, satisfier set `S` and
/// `p_S = P_U^n(S)`: conditioned on a satisfier being picked, it is a
/// `P_U^n`-draw restricted to `S`, so `P(u) = (1 - (1 - p_S)^N) P_U^n(u) / p_S`
/// for `u ∈ S`. Otherwise the fallback codeword is sent, which conditioned
/// on no satisfier is a draw restricted to the complement:
/// `P(u) = (1 - p_S)^{N-1} P_U^n(u)`.
pub fn exact_codeword_conditional(
    design: &CodeDesign,
    y: &SymbolVector,
) -> Result<ExactConditional> {
    let n = design.n();
    if y.len() != n {
        return Err(usage_err!("y has length {}, code has n = {n}", y.len()));
    }
    let t_y = empirical_type(y);
    let cb = design.codebook(&t_y, 0)?;
    let us = design.policy().u_size();
    let total = (us as u64)
        .checked_pow(n as u32)
        .filter(|&v| v <= EXACT_LIMIT);
    let Some(total) = total else {
        return Err(usage_err!(
            "exact enumeration needs |U|^n = {us}^{n} ≈ 2^{:.1} sequences, limit is 2^20",
            n as f64 * math::log2(us as f64)
        ));
    };
    let p_u = cb.type_code().p_u().to_vec();
    let delta2 = design.params().delta2;
    let mut seqs = Vec::new();
    let mut p_s = 0.0;
    let mut u = vec![0usize; n];
    for idx in 0..total {
        let mut r = idx;
        for i in (0..n).rev() {
            u[i] = (r % us as u64) as usize;
            r /= us as u64;
        }
        let p: f64 = u.iter().map(|&a| p_u[a]).product();
        if p == 0.0 {
            continue;
        }
        let sv = SymbolVector::new(us, u.clone())?;
        let sat = meets_encoder_condition(&cb, &sv, y, delta2);
        if sat {
            p_s += p;
        }
        seqs.push((u.clone(), p, sat));
    }
    let big_n = cb.num_bins().saturating_mul(cb.bin_size());
    let miss = (1.0 - p_s).max(0.0);
    let hit = 1.0 - math::powf(miss, big_n as f64);
    let rows: Vec<(Vec<usize>, f64, bool)> = seqs
        .into_iter()
        .map(|(u, p, sat)| {
            let prob = if sat {
                hit * p / p_s
            } else {
                math::powf(miss, (big_n - 1) as f64) * p
            };
            (u, prob, sat)
        })
        .collect();
    let t = t_y.to_vec();
    let h_u_given_y: f64 = (0..design.spec().y_size())
        .map(|b| t[b] * crate::prob::entropy_of_mass(design.policy().p_uy().row(b)))
        .sum();
    let scale = math::exp2(-(n as f64) * h_u_given_y);
    let max_ratio = rows
        .iter()
        .filter(|r| r.2)
        .map(|r| r.1 / scale)
        .fold(0.0, f64::max);
    let g = if max_ratio > 0.0 {
        math::log2(max_ratio) / n as f64
    } else {
        f64::NEG_INFINITY
    };
    Ok(ExactConditional {
        rows,
        h_u_given_y,
        max_ratio,
        g,
        codewords: big_n,
    })
}

/// Encoder failure rate along full sessions (source, jammer, channel).
pub fn encoder_failure<E: Executor>(
    design: &CodeDesign,
    jammer: &JammerStrategy,
    trials: usize,
    seed_value: u64,
    exec: &E,
) -> Result<HarnessResult> {
    jammer.check(design.spec())?;
    let n = design.n();
    let delta0 = default_delta0(n);
    let spec = design.spec();
    let fails = exec.map_indexed(trials, |t| -> Result<bool> {
        let trial = seed::derive(seed_value, "trial", t as u64);
        let x = sample_typical_source(spec, n, delta0, seed::derive(trial, "source", 0), 10_000)?;
        let mut jr = seed::rng_from_seed(seed::derive(trial, "jammer", 0));
        let j = sample_jamming(jammer, &x, spec.j_size(), &mut jr);
        let mut cr = seed::rng_from_seed(seed::derive(trial, "channel", 0));
        let (y, _) = channel_outputs(spec, &x, &j, &mut cr);
        let cb = design.codebook(&empirical_type(&y), seed::derive(trial, "code", 0))?;
        let mut er = seed::rng_from_seed(seed::derive(trial, "encoder", 0));
        Ok(encode(&y, &cb, design.params().delta2, &mut er)?.fallback_used)
    });
    let fails = fails.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(info(
        "encoder-failure",
        n,
        trials,
        rate_of(fails.iter().filter(|&&f| f).count(), trials),
    ))
}
