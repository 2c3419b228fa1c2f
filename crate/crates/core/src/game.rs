//! Zero-sum games between a finite set of pure strategies (the maximizer) and
//! a product of simplices (the minimizer).
//!
//! The payoff of vertex `k` against a mixed minimizer strategy `s` is
//! `Σ_f Σ_a c[k][f][a] s_f(a)`, i.e. linear in each factor `s_f`. The
//! maximizer runs multiplicative weights; the minimizer best-responds exactly,
//! factor by factor. Both players' guaranteed values are tracked, so the
//! reported gap brackets the true value.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::usage_err;
use crate::math;
use crate::{Error, Result};

/// Payoff table: one row per maximizer vertex, each row concatenating the
/// minimizer's factors.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearGame {
    dims: Vec<usize>,
    width: usize,
    payoff: Vec<f64>,
}

impl BilinearGame {
    /// `payoff[k]` has `Σ dims` entries.
    pub fn new(dims: Vec<usize>, payoff: Vec<Vec<f64>>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(usage_err!("minimizer factors must be non-empty"));
        }
        if payoff.is_empty() {
            return Err(usage_err!("maximizer needs at least one vertex"));
        }
        let width: usize = dims.iter().sum();
        let mut flat = Vec::with_capacity(width * payoff.len());
        for (k, row) in payoff.iter().enumerate() {
            if row.len() != width {
                return Err(usage_err!(
                    "payoff row {k} has {} entries, expected {width}",
                    row.len()
                ));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::Numeric(alloc::format!(
                    "payoff row {k} contains {v}"
                )));
            }
            flat.extend_from_slice(row);
        }
        Ok(Self {
            dims,
            width,
            payoff: flat,
        })
    }

    /// A single-factor matrix game `a[k][i]`: row player maximizes.
    pub fn matrix(a: Vec<Vec<f64>>) -> Result<Self> {
        let cols = a.first().map_or(0, |r| r.len());
        Self::new(vec![cols], a)
    }

    pub fn vertices(&self) -> usize {
        self.payoff.len() / self.width
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    fn row(&self, k: usize) -> &[f64] {
        &self.payoff[k * self.width..(k + 1) * self.width]
    }

    /// Payoff of vertex `k` against a flat minimizer strategy.
    pub fn payoff(&self, k: usize, s: &[f64]) -> f64 {
        self.row(k).iter().zip(s).map(|(c, p)| c * p).sum()
    }

    /// Payoff of a mixed maximizer strategy against a flat minimizer strategy.
    pub fn mixed_payoff(&self, w: &[f64], s: &[f64]) -> f64 {
        w.iter()
            .enumerate()
            .map(|(k, &wk)| wk * self.payoff(k, s))
            .sum()
    }

    /// Best response to `w`: per-factor argmin (lowest index on ties), as the
    /// chosen coordinate per factor, plus the resulting value.
    fn best_response(&self, w: &[f64], agg: &mut [f64], choice: &mut [usize]) -> f64 {
        agg.iter_mut().for_each(|a| *a = 0.0);
        for (k, &wk) in w.iter().enumerate() {
            if wk == 0.0 {
                continue;
            }
            for (a, &c) in agg.iter_mut().zip(self.row(k)) {
                *a += wk * c;
            }
        }
        let mut off = 0;
        let mut value = 0.0;
        for (f, &d) in self.dims.iter().enumerate() {
            let mut best = off;
            for i in off + 1..off + d {
                if agg[i] < agg[best] {
                    best = i;
                }
            }
            choice[f] = best;
            value += agg[best];
            off += d;
        }
        value
    }

    /// `max_k` payoff against `s`, with the lowest maximizing index.
    fn worst_vertex(&self, s: &[f64]) -> (usize, f64) {
        let mut best = (0, self.payoff(0, s));
        for k in 1..self.vertices() {
            let v = self.payoff(k, s);
            if v > best.1 {
                best = (k, v);
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameConfig {
    pub max_iterations: usize,
    /// Stop once the duality gap is at most this.
    pub tolerance: f64,
    /// Gap is recomputed every this many iterations.
    pub check_every: usize,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self {
            max_iterations: 2_000_000,
            tolerance: 1e-6,
            check_every: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameResult {
    /// Midpoint of the two guaranteed values.
    pub value: f64,
    /// Value the maximizer can guarantee with `max_strategy`.
    pub lower: f64,
    /// Value the minimizer can guarantee with `min_strategy`.
    pub upper: f64,
    /// `upper - lower`, never negative.
    pub duality_gap: f64,
    /// Minimizer strategy, one distribution per factor.
    pub min_strategy: Vec<Vec<f64>>,
    /// Maximizer mixture over vertices.
    pub max_strategy: Vec<f64>,
    pub iterations: usize,
}

/// Multiplicative weights for the maximizer against exact best responses.
pub fn solve_bilinear_game(game: &BilinearGame, cfg: &GameConfig) -> Result<GameResult> {
    let k = game.vertices();
    let width = game.width;
    let nf = game.dims.len();
    let (lo, hi) = game
        .payoff
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let range = (hi - lo).max(1e-300);
    let ln_k = math::ln(k as f64);

    let mut w = vec![1.0 / k as f64; k];
    let mut cum = vec![0.0; k];
    let mut avg_w = vec![0.0; k];
    let mut avg_s = vec![0.0; width];
    let mut agg = vec![0.0; width];
    let mut choice = vec![0usize; nf];
    let mut pure = vec![0.0; width];

    // the maximizer can always guarantee its best pure vertex
    let mut lower = f64::NEG_INFINITY;
    let mut lower_w = vec![0.0; k];
    for v in 0..k {
        let mut unit = vec![0.0; k];
        unit[v] = 1.0;
        let g = game.best_response(&unit, &mut agg, &mut choice);
        if g > lower {
            lower = g;
            lower_w = unit;
        }
    }
    let mut upper = f64::INFINITY;
    let mut upper_s = vec![0.0; width];
    let mut t = 0usize;

    let update_upper = |s: &[f64], upper: &mut f64, upper_s: &mut Vec<f64>| {
        let (_, v) = game.worst_vertex(s);
        if v < *upper {
            *upper = v;
            upper_s.copy_from_slice(s);
        }
    };

    while t < cfg.max_iterations.max(1) {
        game.best_response(&w, &mut agg, &mut choice);
        pure.iter_mut().for_each(|p| *p = 0.0);
        for &c in &choice {
            pure[c] = 1.0;
        }
        for &c in &choice {
            avg_s[c] += 1.0;
        }
        for (a, &x) in avg_w.iter_mut().zip(&w) {
            *a += x;
        }
        for (v, c) in cum.iter_mut().enumerate() {
            *c += game.payoff(v, &pure);
        }
        t += 1;

        let eta = math::sqrt(8.0 * ln_k / t as f64) / range;
        let m = cum.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for (x, &c) in w.iter_mut().zip(&cum) {
            *x = math::exp(eta * (c - m));
            total += *x;
        }
        w.iter_mut().for_each(|x| *x /= total);

        if t % cfg.check_every.max(1) == 0 || t == cfg.max_iterations {
            let inv = 1.0 / t as f64;
            let aw: Vec<f64> = avg_w.iter().map(|a| a * inv).collect();
            let as_: Vec<f64> = avg_s.iter().map(|a| a * inv).collect();
            for cand in [&aw, &w] {
                let g = game.best_response(cand, &mut agg, &mut choice);
                if g > lower {
                    lower = g;
                    lower_w.copy_from_slice(cand);
                }
            }
            update_upper(&as_, &mut upper, &mut upper_s);
            // best response to the averaged maximizer
            game.best_response(&aw, &mut agg, &mut choice);
            let mut br = vec![0.0; width];
            for &c in &choice {
                br[c] = 1.0;
            }
            update_upper(&br, &mut upper, &mut upper_s);
            if upper - lower <= cfg.tolerance {
                break;
            }
        }
    }
    if !upper.is_finite() {
        let inv = 1.0 / t as f64;
        let as_: Vec<f64> = avg_s.iter().map(|a| a * inv).collect();
        update_upper(&as_, &mut upper, &mut upper_s);
    }
    let gap = (upper - lower).max(0.0);
    let mut min_strategy = Vec::with_capacity(nf);
    let mut off = 0;
    for &d in &game.dims {
        min_strategy.push(upper_s[off..off + d].to_vec());
        off += d;
    }
    Ok(GameResult {
        value: 0.5 * (upper + lower),
        lower,
        upper,
        duality_gap: gap,
        min_strategy,
        max_strategy: lower_w,
        iterations: t,
    })
}
