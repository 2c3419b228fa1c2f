//! Grid search with local refinement over products of probability simplices.
//!
//! Points live on the lattice `counts / M` where `M = m * 2^L`: a coarse grid
//! with `m` divisions per factor is scanned exhaustively (lexicographic order,
//! so ties resolve to the lexicographically smallest point), then a pattern
//! search moves mass between coordinates of one factor, or of two factors at
//! once, halving the move size until it reaches the fine step. Integer
//! coordinates keep every candidate exactly on its simplex.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Result of evaluating a candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Eval {
    Feasible(f64),
    /// Amount by which the candidate violates the constraint (> 0).
    Infeasible(f64),
}

impl Eval {
    fn better_than(self, other: Eval) -> bool {
        match (self, other) {
            (Eval::Feasible(a), Eval::Feasible(b)) => a < b,
            (Eval::Feasible(_), Eval::Infeasible(_)) => true,
            (Eval::Infeasible(_), Eval::Feasible(_)) => false,
            (Eval::Infeasible(a), Eval::Infeasible(b)) => a < b,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SearchConfig {
    /// Divisions per factor of the coarse grid before budgeting.
    pub target_divisions: usize,
    /// Refinement stops once the move size is at most this.
    pub fine_step: f64,
    /// Maximum number of coarse grid points.
    pub budget: usize,
    /// Try simultaneous moves in two factors when single moves stall.
    pub pair_moves: bool,
    /// Refine from this many of the best coarse points (at least one).
    pub starts: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub point: Vec<f64>,
    pub value: f64,
    /// Final move size.
    #[cfg_attr(not(test), allow(dead_code))]
    pub step: f64,
    /// Largest objective change among feasible single-move neighbours at the
    /// final step.
    pub variation: f64,
}

/// A product of simplices with the given dimensions.
#[derive(Debug, Clone)]
pub(crate) struct Space {
    dims: Vec<usize>,
    offsets: Vec<usize>,
}

impl Space {
    pub fn new(dims: Vec<usize>) -> Self {
        assert!(dims.iter().all(|&d| d >= 1));
        let mut offsets = Vec::with_capacity(dims.len());
        let mut acc = 0;
        for &d in &dims {
            offsets.push(acc);
            acc += d;
        }
        Self { dims, offsets }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Number of grid points with `m` divisions per factor (saturating).
    pub fn grid_count(&self, m: usize) -> usize {
        self.dims.iter().fold(1usize, |acc, &k| {
            acc.saturating_mul(math::binomial(m + k - 1, k - 1))
        })
    }

    /// Largest `m <= target` whose grid fits in `budget` (at least 1).
    pub fn divisions_for(&self, target: usize, budget: usize) -> usize {
        let mut m = target.max(1);
        while m > 1 && self.grid_count(m) > budget {
            m -= 1;
        }
        m
    }

    /// Visits all integer points with `m` divisions, lexicographically.
    pub fn for_each_point(&self, m: usize, mut f: impl FnMut(&[u64])) {
        let mut point = vec![0u64; self.len()];
        self.rec(0, m as u64, &mut point, &mut f);
    }

    fn rec(&self, factor: usize, m: u64, point: &mut [u64], f: &mut impl FnMut(&[u64])) {
        if factor == self.dims.len() {
            f(point);
            return;
        }
        let off = self.offsets[factor];
        let k = self.dims[factor];
        self.compositions(factor, off, k, 0, m, m, point, f);
    }

    #[allow(clippy::too_many_arguments)]
    fn compositions(
        &self,
        factor: usize,
        off: usize,
        k: usize,
        i: usize,
        remaining: u64,
        m: u64,
        point: &mut [u64],
        f: &mut impl FnMut(&[u64]),
    ) {
        if i == k - 1 {
            point[off + i] = remaining;
            self.rec(factor + 1, m, point, f);
            return;
        }
        for c in 0..=remaining {
            point[off + i] = c;
            self.compositions(factor, off, k, i + 1, remaining - c, m, point, f);
        }
    }

    fn single_moves(&self) -> Vec<(usize, usize)> {
        let mut moves = Vec::new();
        for (f, &k) in self.dims.iter().enumerate() {
            let off = self.offsets[f];
            for a in 0..k {
                for b in 0..k {
                    if a != b {
                        moves.push((off + a, off + b));
                    }
                }
            }
        }
        moves
    }

    fn factor_of(&self, coord: usize) -> usize {
        self.offsets.iter().rposition(|&o| o <= coord).unwrap_or(0)
    }
}

fn to_real(point: &[u64], denom: f64, out: &mut [f64]) {
    for (o, &c) in out.iter_mut().zip(point) {
        *o = c as f64 / denom;
    }
}

/// Minimizes `f` over the space. Returns `None` when no feasible point is
/// found.
pub(crate) fn minimize(
    space: &Space,
    cfg: &SearchConfig,
    f: impl FnMut(&[f64]) -> Eval,
) -> Option<Outcome> {
    minimize_seeded(space, cfg, &[], f)
}

/// Per-factor largest-remainder rounding of `x` onto counts summing to `total`.
fn to_lattice(space: &Space, x: &[f64], total: u64) -> Vec<u64> {
    let mut out = Vec::with_capacity(x.len());
    for (f, &d) in space.dims.iter().enumerate() {
        let row = &x[space.offsets[f]..space.offsets[f] + d];
        let sum: f64 = row.iter().sum();
        let scaled: Vec<f64> = row
            .iter()
            .map(|&v| v.max(0.0) / sum * total as f64)
            .collect();
        let mut counts: Vec<u64> = scaled.iter().map(|&v| math::floor(v) as u64).collect();
        let short = total - counts.iter().sum::<u64>();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| {
            (scaled[b] - counts[b] as f64)
                .total_cmp(&(scaled[a] - counts[a] as f64))
                .then(a.cmp(&b))
        });
        for &i in order.iter().take(short as usize) {
            counts[i] += 1;
        }
        out.extend(counts);
    }
    out
}

/// [`minimize`] with extra starting points (rounded onto the search lattice)
/// refined alongside the best coarse points.
pub(crate) fn minimize_seeded(
    space: &Space,
    cfg: &SearchConfig,
    seeds: &[Vec<f64>],
    mut f: impl FnMut(&[f64]) -> Eval,
) -> Option<Outcome> {
    let m = space.divisions_for(cfg.target_divisions, cfg.budget);
    let coarse_step = 1.0 / m as f64;
    let mut levels = 0u32;
    while coarse_step / (1u64 << levels) as f64 > cfg.fine_step * (1.0 + 1e-12) && levels < 30 {
        levels += 1;
    }
    let scale = 1u64 << levels;
    let denom = (m as u64 * scale) as f64;
    let mut real = vec![0.0; space.len()];
    let mut evaluations = 0usize;

    // best coarse points, better first; ties keep enumeration order
    let starts = cfg.starts.max(1);
    let mut tops: Vec<(Eval, Vec<u64>)> = Vec::with_capacity(starts + 1);
    space.for_each_point(m, |p| {
        for (r, &c) in real.iter_mut().zip(p) {
            *r = (c * scale) as f64 / denom;
        }
        let e = f(&real);
        evaluations += 1;
        if tops.len() < starts || e.better_than(tops[tops.len() - 1].0) {
            let at = tops
                .iter()
                .position(|t| e.better_than(t.0))
                .unwrap_or(tops.len());
            tops.insert(at, (e, p.iter().map(|&c| c * scale).collect()));
            tops.truncate(starts);
        }
    });
    for seed in seeds {
        let p = to_lattice(space, seed, denom as u64);
        to_real(&p, denom, &mut real);
        let e = f(&real);
        evaluations += 1;
        tops.push((e, p));
    }
    if tops.is_empty() {
        return None;
    }

    let singles = space.single_moves();
    let mut cand = vec![0u64; space.len()];
    let mut best: Option<(Vec<u64>, Eval)> = None;
    for (start_eval, start) in tops {
        let (cur, cur_eval) = refine(
            space,
            cfg,
            &singles,
            levels,
            scale,
            denom,
            start,
            start_eval,
            &mut f,
            &mut evaluations,
        );
        if best.as_ref().map_or(true, |b| cur_eval.better_than(b.1)) {
            best = Some((cur, cur_eval));
        }
    }
    let (cur, cur_eval) = best.expect("at least one start");

    let value = match cur_eval {
        Eval::Feasible(v) => v,
        Eval::Infeasible(_) => return None,
    };
    // local resolution estimate at the final step
    let mut variation: f64 = 0.0;
    for &(a, b) in &singles {
        if cur[a] < 1 {
            continue;
        }
        cand.copy_from_slice(&cur);
        cand[a] -= 1;
        cand[b] += 1;
        to_real(&cand, denom, &mut real);
        if let Eval::Feasible(v) = f(&real) {
            variation = variation.max(math::abs(v - value));
        }
    }
    to_real(&cur, denom, &mut real);
    Some(Outcome {
        point: real,
        value,
        step: 1.0 / denom,
        variation,
    })
}

/// Pattern search from `cur`, halving the move size through `levels`.
#[allow(clippy::too_many_arguments)]
fn refine(
    space: &Space,
    cfg: &SearchConfig,
    singles: &[(usize, usize)],
    levels: u32,
    scale: u64,
    denom: f64,
    mut cur: Vec<u64>,
    mut cur_eval: Eval,
    f: &mut impl FnMut(&[f64]) -> Eval,
    evaluations: &mut usize,
) -> (Vec<u64>, Eval) {
    let mut real = vec![0.0; space.len()];
    let mut cand = cur.clone();
    let max_evals = *evaluations + 200_000;
    for level in 0..=levels {
        let s = scale >> level;
        loop {
            if *evaluations > max_evals {
                break;
            }
            let mut best_move: Option<(Vec<u64>, Eval)> = None;
            for &(a, b) in singles {
                if cur[a] < s {
                    continue;
                }
                cand.copy_from_slice(&cur);
                cand[a] -= s;
                cand[b] += s;
                to_real(&cand, denom, &mut real);
                let e = f(&real);
                *evaluations += 1;
                let incumbent = best_move.as_ref().map_or(cur_eval, |bm| bm.1);
                if e.better_than(incumbent) {
                    best_move = Some((cand.clone(), e));
                }
            }
            if best_move.is_none() && cfg.pair_moves {
                for (i, &(a1, b1)) in singles.iter().enumerate() {
                    if cur[a1] < s {
                        continue;
                    }
                    let f1 = space.factor_of(a1);
                    for &(a2, b2) in &singles[i + 1..] {
                        if space.factor_of(a2) == f1 || cur[a2] < s {
                            continue;
                        }
                        cand.copy_from_slice(&cur);
                        cand[a1] -= s;
                        cand[b1] += s;
                        cand[a2] -= s;
                        cand[b2] += s;
                        to_real(&cand, denom, &mut real);
                        let e = f(&real);
                        *evaluations += 1;
                        let incumbent = best_move.as_ref().map_or(cur_eval, |bm| bm.1);
                        if e.better_than(incumbent) {
                            best_move = Some((cand.clone(), e));
                        }
                    }
                }
            }
            match best_move {
                Some((p, e)) => {
                    cur = p;
                    cur_eval = e;
                }
                None => break,
            }
        }
    }
    (cur, cur_eval)
}

/// Maximizes `f` (all points feasible).
pub(crate) fn maximize(
    space: &Space,
    cfg: &SearchConfig,
    mut f: impl FnMut(&[f64]) -> f64,
) -> Outcome {
    let mut out = minimize(space, cfg, |p| Eval::Feasible(-f(p)))
        .expect("unconstrained search always succeeds");
    out.value = -out.value;
    out
}

/// Splits a flat point into per-factor rows.
pub(crate) fn split_rows(point: &[f64], width: usize) -> Vec<Vec<f64>> {
    point.chunks_exact(width).map(|r| r.to_vec()).collect()
}
