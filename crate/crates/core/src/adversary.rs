//! Jamming strategies and a search for strong block jammers.
//!
//! The jammer sees the whole source block. Randomized block strategies are
//! mixtures of deterministic ones and cannot do better against an expected
//! distortion, so block strategies here are deterministic maps `x^n -> j^n`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand_core::RngCore;

use crate::coding::{simulate_session, CodeDesign};
use crate::error::{config_err, usage_err};
use crate::exec::Executor;
use crate::prob::CondDistribution;
use crate::problem::ProblemSpec;
use crate::seed;
use crate::typeclass::SymbolVector;
use crate::Result;

/// A deterministic block map, stored as the images of the listed source
/// blocks; other blocks are jammed symbol by symbol with `fallback`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMap {
    pub entries: Vec<(Vec<usize>, Vec<usize>)>,
    pub fallback: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum JammerStrategy {
    /// `Q(j|x)` applied independently to every symbol.
    Memoryless(CondDistribution),
    /// `j_i = map[x_i]`.
    Symbolwise(Vec<usize>),
    Block(BlockMap),
}

impl JammerStrategy {
    /// The strategy that always sends `j = 0`.
    pub fn trivial(spec: &ProblemSpec) -> Self {
        JammerStrategy::Symbolwise(vec![0; spec.x_size()])
    }

    /// Checks alphabet sizes against a problem.
    pub fn check(&self, spec: &ProblemSpec) -> Result<()> {
        let (xs, js) = (spec.x_size(), spec.j_size());
        let map_ok = |m: &[usize]| m.len() == xs && m.iter().all(|&j| j < js);
        match self {
            JammerStrategy::Memoryless(q) if q.from_size() != xs || q.to_size() != js => {
                Err(config_err!(
                    "memoryless jammer is {}x{}, problem needs {xs}x{js}",
                    q.from_size(),
                    q.to_size()
                ))
            }
            JammerStrategy::Symbolwise(m) if !map_ok(m) => Err(config_err!(
                "symbolwise jammer map {m:?} does not fit |X| = {xs}, |J| = {js}"
            )),
            JammerStrategy::Block(b) => {
                if !map_ok(&b.fallback) {
                    return Err(config_err!(
                        "block jammer fallback does not fit |X| = {xs}, |J| = {js}"
                    ));
                }
                for (x, j) in &b.entries {
                    if x.len() != j.len()
                        || x.iter().any(|&s| s >= xs)
                        || j.iter().any(|&s| s >= js)
                    {
                        return Err(config_err!(
                            "block jammer entry has mismatched or out-of-range symbols"
                        ));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Short human-readable description.
    pub fn describe(&self) -> String {
        match self {
            JammerStrategy::Memoryless(q) => format!("memoryless{:?}", q.rows()),
            JammerStrategy::Symbolwise(m) => format!("symbolwise{m:?}"),
            JammerStrategy::Block(b) => format!(
                "block({} entries, fallback {:?})",
                b.entries.len(),
                b.fallback
            ),
        }
    }
}

/// Draws the jamming block for source block `x`.
///
/// Deterministic rows of a memoryless jammer consume no randomness, so a
/// memoryless jammer with 0/1 rows produces exactly the output of the
/// corresponding symbolwise map.
pub fn sample_jamming<R: RngCore + ?Sized>(
    strategy: &JammerStrategy,
    x: &SymbolVector,
    j_size: usize,
    rng: &mut R,
) -> SymbolVector {
    let symbols: Vec<usize> = match strategy {
        JammerStrategy::Memoryless(q) => {
            let cdfs: Vec<Vec<f64>> = (0..q.from_size()).map(|a| seed::cdf_of(q.row(a))).collect();
            let point: Vec<Option<usize>> = (0..q.from_size())
                .map(|a| q.row(a).iter().position(|&p| p == 1.0))
                .collect();
            x.symbols()
                .iter()
                .map(|&a| point[a].unwrap_or_else(|| seed::sample_cdf(rng, &cdfs[a])))
                .collect()
        }
        JammerStrategy::Symbolwise(m) => x.symbols().iter().map(|&a| m[a]).collect(),
        JammerStrategy::Block(b) => match b
            .entries
            .iter()
            .find(|(src, _)| src.as_slice() == x.symbols())
        {
            Some((_, j)) => j.clone(),
            None => x.symbols().iter().map(|&a| b.fallback[a]).collect(),
        },
    };
    SymbolVector::new(j_size, symbols).expect("jammer output is alphabet-valid")
}

/// All `|J|^|X|` symbolwise maps, lexicographic with `j(0)` most significant.
pub fn deterministic_jammer_family(spec: &ProblemSpec) -> Vec<JammerStrategy> {
    (0..spec.num_deterministic_jammers())
        .map(|k| JammerStrategy::Symbolwise(spec.deterministic_jammer(k)))
        .collect()
}

/// Settings of [`worst_case_search`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSettings {
    /// Number of candidate jamming blocks evaluated.
    pub budget: usize,
    /// Sessions per candidate estimate.
    pub draws: usize,
    /// The adversary knows the realized codebook (the code seed is fixed and
    /// shared by all draws) instead of only the code's distribution.
    pub knows_codebook: bool,
    pub seed: u64,
}

/// Outcome of [`worst_case_search`]: a lower bound on the worst-case
/// distortion at `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct WorstCase {
    pub strategy: JammerStrategy,
    pub jamming: Vec<usize>,
    pub estimate: f64,
    pub std_err: f64,
    pub evaluations: usize,
    /// Every jamming block was evaluated.
    pub exhaustive: bool,
}

struct Evaluator<'a, E: Executor> {
    design: &'a CodeDesign,
    x: &'a SymbolVector,
    settings: SearchSettings,
    exec: &'a E,
    evaluations: usize,
}

impl<E: Executor> Evaluator<'_, E> {
    /// Mean and standard error of the distortion when jamming with `j`, using
    /// the same session seeds for every candidate.
    fn eval(&mut self, j: &[usize]) -> Result<(f64, f64)> {
        self.evaluations += 1;
        let strategy = JammerStrategy::Block(BlockMap {
            entries: vec![(self.x.symbols().to_vec(), j.to_vec())],
            fallback: vec![0; self.design.spec().x_size()],
        });
        let s = self.settings;
        let design = self.design;
        let x = self.x;
        let results = self.exec.map_indexed(s.draws, |d| {
            let session = seed::derive(s.seed, "draw", d as u64);
            let code = if s.knows_codebook {
                seed::derive(s.seed, "code", 0)
            } else {
                seed::derive(session, "code", 0)
            };
            simulate_session(x, &strategy, design, code, session).map(|r| r.distortion)
        });
        let values = results.into_iter().collect::<Result<Vec<f64>>>()?;
        Ok(crate::coding::mean_and_std_err(&values))
    }
}

/// Searches for a jamming block that maximizes the expected distortion at
/// `x`: exhaustive when the budget covers all `|J|^n` blocks, otherwise greedy
/// single-position ascent started from the best symbolwise map and then from
/// random blocks. Candidate estimates share their random numbers, and the
/// candidate sequence is fixed by the seed, so a larger budget never returns a
/// smaller estimate.
pub fn worst_case_search<E: Executor>(
    design: &CodeDesign,
    x: &SymbolVector,
    settings: SearchSettings,
    exec: &E,
) -> Result<WorstCase> {
    if settings.budget == 0 || settings.draws == 0 {
        return Err(usage_err!("search budget and draws must be positive"));
    }
    let spec = design.spec();
    if x.len() != design.n() || x.alphabet_size() != spec.x_size() {
        return Err(usage_err!("source block does not match the code"));
    }
    let (n, js) = (x.len(), spec.j_size());
    let mut ev = Evaluator {
        design,
        x,
        settings,
        exec,
        evaluations: 0,
    };
    let total = (js as u64).checked_pow(n as u32);

    let mut best: Option<(Vec<usize>, f64, f64)> = None;
    let consider = |j: &[usize], v: (f64, f64), best: &mut Option<(Vec<usize>, f64, f64)>| {
        if best.as_ref().map_or(true, |b| v.0 > b.1) {
            *best = Some((j.to_vec(), v.0, v.1));
        }
    };

    let exhaustive = matches!(total, Some(t) if t <= settings.budget as u64);
    if exhaustive {
        let mut j = vec![0usize; n];
        loop {
            let v = ev.eval(&j)?;
            consider(&j, v, &mut best);
            // odometer with position 0 most significant
            let mut pos = n;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                j[pos] += 1;
                if j[pos] < js {
                    break;
                }
                j[pos] = 0;
            }
            if j.iter().all(|&s| s == 0) {
                break;
            }
        }
    } else {
        let mut rng = seed::rng_from_seed(seed::derive(settings.seed, "restarts", 0));
        let mut start: Option<(Vec<usize>, (f64, f64))> = None;
        for k in 0..spec.num_deterministic_jammers() {
            if ev.evaluations >= settings.budget {
                break;
            }
            let map = spec.deterministic_jammer(k);
            let j: Vec<usize> = x.symbols().iter().map(|&a| map[a]).collect();
            let v = ev.eval(&j)?;
            consider(&j, v, &mut best);
            if start.as_ref().map_or(true, |s| v.0 > s.1 .0) {
                start = Some((j, v));
            }
        }
        while ev.evaluations < settings.budget {
            let (mut cur, mut cur_v) = match start.take() {
                Some(s) => s,
                None => {
                    let j: Vec<usize> = (0..n)
                        .map(|_| seed::uniform_index(&mut rng, js as u64) as usize)
                        .collect();
                    let v = ev.eval(&j)?;
                    consider(&j, v, &mut best);
                    (j, v)
                }
            };
            let mut improved = true;
            while improved && ev.evaluations < settings.budget {
                improved = false;
                for pos in 0..n {
                    for alt in 0..js {
                        if alt == cur[pos] || ev.evaluations >= settings.budget {
                            continue;
                        }
                        let mut cand = cur.clone();
                        cand[pos] = alt;
                        let v = ev.eval(&cand)?;
                        consider(&cand, v, &mut best);
                        if v.0 > cur_v.0 {
                            cur = cand;
                            cur_v = v;
                            improved = true;
                        }
                    }
                }
            }
        }
    }
    let (jamming, estimate, std_err) = best.expect("at least one candidate is evaluated");
    Ok(WorstCase {
        strategy: JammerStrategy::Block(BlockMap {
            entries: vec![(x.symbols().to_vec(), jamming.clone())],
            fallback: vec![0; spec.x_size()],
        }),
        jamming,
        estimate,
        std_err,
        evaluations: ev.evaluations,
        exhaustive,
    })
}
