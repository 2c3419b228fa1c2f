//! Single-letter quantities: the minimax distortions `D0`, `D1` and the
//! upper/lower rate bounds `R_U*(D)`, `R_L*(D)`, plus per-type code rates.
//!
//! The rate programs are solved by search over finite grids (see
//! [`GridConfig`]); each value comes with a resolution estimate.
//!
//! Reconstruction maps: with `|U|` auxiliary symbols, every `ζ` assigns each
//! `u` a function `Z -> X̃`. Relabeling `U` does not change the program, and
//! two symbols carrying the same function can be merged without raising
//! `I(U;Y|Z)`, so only sets of distinct functions need to be searched. This
//! caps the effective `|U|` at `|X̃|^|Z|` and enumerates `ζ` as increasing
//! `|U|`-subsets of the functions.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::usage_err;
use crate::exec::Executor;
use crate::game::{solve_bilinear_game, BilinearGame, GameConfig, GameResult};
use crate::math;
use crate::prob::CondDistribution;
use crate::problem::{AuxiliaryPolicy, ProblemSpec};
use crate::search::{self, Eval, SearchConfig, Space};
use crate::typeclass::TypeTable;
use crate::{Error, Result};

/// Resolution and budgets of the rate searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    /// Coarse grid divisions per simplex (20 gives step 0.05).
    pub divisions: usize,
    /// Refinement stops at this step.
    pub fine_step: f64,
    /// Maximum coarse grid size over jammers `Q(j|x)`.
    pub q_budget: usize,
    /// Maximum coarse grid size over `P(u|y)` in the upper bound.
    pub p_budget: usize,
    /// Maximum coarse grid size over `P(u|y)` inside the lower bound.
    pub inner_p_budget: usize,
    /// `|U|` for the upper bound (default and cap: `|X̃|^|Z|`).
    pub u_upper: Option<usize>,
    /// `|U|` for the lower bound (default `|Y| + 1`, capped at `|X̃|^|Z|`).
    pub u_lower: Option<usize>,
    /// Refuse programs with more reconstruction maps than this.
    pub max_zeta: usize,
    /// Local refinements per search, each from a different coarse point.
    pub starts: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            divisions: 20,
            fine_step: 0.005,
            q_budget: 5000,
            p_budget: 2000,
            inner_p_budget: 300,
            u_upper: None,
            u_lower: None,
            max_zeta: 5000,
            starts: 4,
        }
    }
}

impl GridConfig {
    fn search(&self, budget: usize, pair_moves: bool) -> SearchConfig {
        SearchConfig {
            target_divisions: self.divisions,
            fine_step: self.fine_step,
            budget,
            pair_moves,
            starts: self.starts,
        }
    }
}

/// A bound value with its search resolution and the optimizers found.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundValue {
    pub value: f64,
    /// Resolution estimate of `value` (0 when exact).
    pub uncertainty: f64,
    /// Minimizing policy (absent when the value is 0 by `D > D1`).
    pub policy: Option<AuxiliaryPolicy>,
    /// Maximizing jammer.
    pub jammer: Option<CondDistribution>,
}

impl BoundValue {
    fn zero() -> Self {
        Self {
            value: 0.0,
            uncertainty: 0.0,
            policy: None,
            jammer: None,
        }
    }
}

/// One point of a bound curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub d: f64,
    /// `Err` holds the reason a bound could not be evaluated (e.g. `D < D0`).
    pub upper: core::result::Result<BoundValue, Error>,
    pub lower: core::result::Result<BoundValue, Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub d0: GameResult,
    pub d1: GameResult,
    pub curve: Vec<CurvePoint>,
}

/// Rates of the binned code for one `Y`-type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypeRates {
    /// `I_T(U;Y) + ε/4`.
    pub r_u: f64,
    /// `min_Q I_Q(U;Z) - ε/4`, clamped at 0; `+∞` when no jammer induces a
    /// `Y`-marginal close enough to the type.
    pub r_tilde: f64,
    /// `max(R_U - R̃, 0)`.
    pub r_bin: f64,
    /// No admissible jammer was found.
    pub no_feasible_jammer: bool,
}

// --- fast evaluation helpers -------------------------------------------------

/// `H(U|Z) - H(U|Y)` for `P(y,z)` (flat, `y`-major), `P(y)`, `P(u|y)` and the
/// precomputed per-`y` entropies of `P(u|y)`.
fn cond_info(yz: &[f64], py: &[f64], p: &[f64], hy: &[f64], zs: usize, us: usize) -> f64 {
    let h_uy: f64 = py.iter().zip(hy).map(|(a, b)| a * b).sum();
    let mut h_uz = 0.0;
    for z in 0..zs {
        let mut pz = 0.0;
        for u in 0..us {
            let mut puz = 0.0;
            for (y, pu) in p.chunks_exact(us).map(|r| r[u]).enumerate() {
                puz += yz[y * zs + z] * pu;
            }
            pz += puz;
            h_uz += math::neg_plogp(puz);
        }
        h_uz -= math::neg_plogp(pz);
    }
    (h_uz - h_uy).max(0.0)
}

fn row_entropies(p: &[f64], us: usize) -> Vec<f64> {
    p.chunks_exact(us)
        .map(|r| r.iter().map(|&v| math::neg_plogp(v)).sum())
        .collect()
}

fn marginal_y(yz: &[f64], zs: usize) -> Vec<f64> {
    yz.chunks_exact(zs).map(|r| r.iter().sum()).collect()
}

/// Number of functions `Z -> X̃`.
fn function_count(spec: &ProblemSpec) -> usize {
    spec.xhat_size().saturating_pow(spec.z_size() as u32)
}

/// Value of function `f` at `z`, with `z = 0` the most significant digit.
fn function_value(f: usize, z: usize, zs: usize, xh: usize) -> usize {
    let mut v = f;
    for _ in z + 1..zs {
        v /= xh;
    }
    v % xh
}

/// Increasing `k`-subsets of `0..n`, lexicographic.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k == 0 || k > n {
        return out;
    }
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        out.push(c.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if c[i] < n - k + i {
                c[i] += 1;
                for t in i + 1..k {
                    c[t] = c[t - 1] + 1;
                }
                break;
            }
        }
    }
}

/// All reconstruction maps `ζ[u][z]` with `k` distinct functions.
fn zeta_maps(spec: &ProblemSpec, k: usize, limit: usize) -> Result<Vec<Vec<Vec<usize>>>> {
    let (zs, xh) = (spec.z_size(), spec.xhat_size());
    let f = function_count(spec);
    let count = math::binomial(f, k);
    if count > limit {
        return Err(usage_err!(
            "{count} reconstruction maps with |U| = {k} exceed the limit {limit}; lower |U|"
        ));
    }
    Ok(subsets(f, k)
        .into_iter()
        .map(|set| {
            set.iter()
                .map(|&fi| (0..zs).map(|z| function_value(fi, z, zs, xh)).collect())
                .collect()
        })
        .collect())
}

/// `c(y,u) = Σ_z B(y,z,ζ(u,z))`, flat `[y][u]`.
fn cost_table(b: &[f64], zeta: &[Vec<usize>], ys: usize, zs: usize, xh: usize) -> Vec<f64> {
    let us = zeta.len();
    let mut c = vec![0.0; ys * us];
    for y in 0..ys {
        for (u, row) in zeta.iter().enumerate() {
            c[y * us + u] = (0..zs).map(|z| b[(y * zs + z) * xh + row[z]]).sum();
        }
    }
    c
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// --- minimax distortions -----------------------------------------------------

fn vertex_tables(spec: &ProblemSpec) -> Vec<Vec<f64>> {
    (0..spec.num_deterministic_jammers())
        .map(|k| spec.distortion_table(&spec.weighted_xyz_map(&spec.deterministic_jammer(k))))
        .collect()
}

/// Minimax distortion with the estimate formed from `(Y, Z)`. The minimizer
/// strategy has one row `P(x̃|y,z)` per `y * |Z| + z`; the maximizer mixes the
/// deterministic jammers in [`ProblemSpec::deterministic_jammer`] order.
pub fn d0(spec: &ProblemSpec, cfg: &GameConfig) -> Result<GameResult> {
    let xh = spec.xhat_size();
    let factors = spec.y_size() * spec.z_size();
    let game = BilinearGame::new(vec![xh; factors], vertex_tables(spec))?;
    solve_bilinear_game(&game, cfg)
}

/// Minimax distortion with the estimate formed from `Z` only; one minimizer
/// row `P(x̃|z)` per `z`.
pub fn d1(spec: &ProblemSpec, cfg: &GameConfig) -> Result<GameResult> {
    let (ys, zs, xh) = (spec.y_size(), spec.z_size(), spec.xhat_size());
    let payoff = vertex_tables(spec)
        .into_iter()
        .map(|b| {
            let mut row = vec![0.0; zs * xh];
            for y in 0..ys {
                for (r, &v) in row.iter_mut().zip(&b[y * zs * xh..(y + 1) * zs * xh]) {
                    *r += v;
                }
            }
            row
        })
        .collect();
    let game = BilinearGame::new(vec![xh; zs], payoff)?;
    solve_bilinear_game(&game, cfg)
}

// --- rate bounds --------------------------------------------------------------

/// Precomputed data for evaluating the rate bounds of one instance.
#[derive(Debug, Clone)]
pub struct Solver<'a> {
    spec: &'a ProblemSpec,
    grid: GridConfig,
    d0: GameResult,
    d1: GameResult,
    vertex_b: Vec<Vec<f64>>,
    q_space: Space,
    /// Coarse jammer grid as `(Q, P(y,z), P(y))`.
    q_grid: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)>,
}

impl<'a> Solver<'a> {
    pub fn new(spec: &'a ProblemSpec, grid: GridConfig, game: &GameConfig) -> Result<Self> {
        if !(grid.fine_step > 0.0) || grid.divisions == 0 {
            return Err(usage_err!("grid step and divisions must be positive"));
        }
        let d0 = d0(spec, game)?;
        let d1 = d1(spec, game)?;
        let q_space = Space::new(vec![spec.j_size(); spec.x_size()]);
        let m = q_space.divisions_for(grid.divisions, grid.q_budget);
        let zs = spec.z_size();
        let mut q_grid = Vec::new();
        q_space.for_each_point(m, |p| {
            let q: Vec<f64> = p.iter().map(|&c| c as f64 / m as f64).collect();
            let yz = spec.induced_yz(&q);
            let py = marginal_y(&yz, zs);
            q_grid.push((q, yz, py));
        });
        Ok(Self {
            spec,
            grid,
            d0,
            d1,
            vertex_b: vertex_tables(spec),
            q_space,
            q_grid,
        })
    }

    pub fn d0(&self) -> &GameResult {
        &self.d0
    }

    pub fn d1(&self) -> &GameResult {
        &self.d1
    }

    /// `D` counts as above `D1` once it exceeds the solver's guaranteed upper
    /// value of `D1`.
    pub fn above_d1(&self, d: f64) -> bool {
        d > self.d1.upper
    }

    fn u_upper(&self) -> usize {
        let f = function_count(self.spec);
        self.grid.u_upper.unwrap_or(f).clamp(1, f)
    }

    fn u_lower(&self) -> usize {
        let f = function_count(self.spec);
        self.grid
            .u_lower
            .unwrap_or(self.spec.y_size() + 1)
            .clamp(1, f)
    }

    fn policy(&self, p: &[f64], us: usize, zeta: &[Vec<usize>]) -> AuxiliaryPolicy {
        let rows = search::split_rows(p, us);
        AuxiliaryPolicy::new(
            CondDistribution::new(rows).expect("search points are distributions"),
            zeta.to_vec(),
        )
        .expect("reconstruction maps are well formed")
    }

    fn jammer(&self, q: &[f64]) -> CondDistribution {
        CondDistribution::from_flat(self.spec.x_size(), self.spec.j_size(), q.to_vec())
            .expect("search points are distributions")
    }

    /// Max over the jammer grid, refined by local search when `refine`.
    fn inner_max(&self, p: &[f64], hy: &[f64], us: usize) -> f64 {
        let zs = self.spec.z_size();
        self.q_grid
            .iter()
            .map(|(_, yz, py)| cond_info(yz, py, p, hy, zs, us))
            .fold(0.0, f64::max)
    }

    /// `min_{P,ζ} max_Q I(U;Y|Z)` subject to `E[d] <= D` for every jammer.
    pub fn r_upper(&self, d: f64) -> Result<BoundValue> {
        if !(d >= 0.0) {
            return Err(usage_err!("distortion level must be non-negative, got {d}"));
        }
        if self.above_d1(d) {
            return Ok(BoundValue::zero());
        }
        let spec = self.spec;
        let (ys, zs, xh) = (spec.y_size(), spec.z_size(), spec.xhat_size());
        let us = self.u_upper();
        let p_space = Space::new(vec![us; ys]);
        let cfg = self.grid.search(self.grid.p_budget, true);
        let mut best: Option<(search::Outcome, Vec<Vec<usize>>)> = None;
        for zeta in zeta_maps(spec, us, self.grid.max_zeta)? {
            let costs: Vec<Vec<f64>> = self
                .vertex_b
                .iter()
                .map(|b| cost_table(b, &zeta, ys, zs, xh))
                .collect();
            let out = search::minimize(&p_space, &cfg, |p| {
                let worst = costs.iter().map(|c| dot(c, p)).fold(0.0, f64::max);
                if worst > d + 1e-12 {
                    return Eval::Infeasible(worst - d);
                }
                let hy = row_entropies(p, us);
                Eval::Feasible(self.inner_max(p, &hy, us))
            });
            if let Some(out) = out {
                if best.as_ref().map_or(true, |(b, _)| out.value < b.value) {
                    best = Some((out, zeta));
                }
            }
        }
        let (out, zeta) = best.ok_or_else(|| {
            Error::Infeasible(alloc::format!(
                "no policy meets distortion {d} against every jammer (D0 ≈ {})",
                self.d0.value
            ))
        })?;
        // refine the inner max at the chosen policy
        let p = &out.point;
        let hy = row_entropies(p, us);
        let qcfg = self.grid.search(self.grid.q_budget, false);
        let inner = search::maximize(&self.q_space, &qcfg, |q| {
            let yz = spec.induced_yz(q);
            let py = marginal_y(&yz, zs);
            cond_info(&yz, &py, p, &hy, zs, us)
        });
        let value = inner.value.max(out.value);
        Ok(BoundValue {
            value,
            uncertainty: out.variation + (value - out.value) + inner.variation,
            policy: Some(self.policy(p, us, &zeta)),
            jammer: Some(self.jammer(&inner.point)),
        })
    }

    /// Inner program of the lower bound for one jammer: best `(ζ, P)` and its
    /// resolution, or `None` when no policy meets `D` under this jammer.
    fn lower_inner(
        &self,
        q: &[f64],
        d: f64,
        us: usize,
        zetas: &[Vec<Vec<usize>>],
        seeds: &[Option<Vec<f64>>],
    ) -> Option<(search::Outcome, usize)> {
        let spec = self.spec;
        let (ys, zs, xh) = (spec.y_size(), spec.z_size(), spec.xhat_size());
        let a = spec.weighted_xyz(q);
        let yz = spec.marginal_yz(&a);
        let py = marginal_y(&yz, zs);
        let b = spec.distortion_table(&a);
        let p_space = Space::new(vec![us; ys]);
        let cfg = self.grid.search(self.grid.inner_p_budget, true);
        let mut best: Option<(search::Outcome, usize)> = None;
        for (zi, zeta) in zetas.iter().enumerate() {
            let c = cost_table(&b, zeta, ys, zs, xh);
            // even the cheapest u per y misses D: no P is feasible
            let floor: f64 = c
                .chunks_exact(us)
                .map(|r| r.iter().cloned().fold(f64::INFINITY, f64::min))
                .sum();
            if floor > d + 1e-12 {
                continue;
            }
            let seed = seeds
                .get(zi)
                .and_then(|s| s.as_ref())
                .map(core::slice::from_ref)
                .unwrap_or(&[]);
            let out = search::minimize_seeded(&p_space, &cfg, seed, |p| {
                let dist = dot(&c, p);
                if dist > d + 1e-12 {
                    return Eval::Infeasible(dist - d);
                }
                let hy = row_entropies(p, us);
                Eval::Feasible(cond_info(&yz, &py, p, &hy, zs, us))
            });
            if let Some(out) = out {
                if best.as_ref().map_or(true, |(b, _)| out.value < b.value) {
                    best = Some((out, zi));
                }
            }
            if best.as_ref().is_some_and(|(b, _)| b.value <= 0.0) {
                break;
            }
        }
        best
    }

    /// The upper bound's policy, re-expressed on each reconstruction-map set
    /// that contains every function it uses. It meets `D` under every jammer,
    /// so it is a candidate for each inner program of the lower bound; the
    /// local search alone often stalls above it once the constraint binds.
    fn lower_seeds(&self, d: f64, us: usize, zetas: &[Vec<Vec<usize>>]) -> Vec<Option<Vec<f64>>> {
        let Some(policy) = self.r_upper(d).ok().and_then(|b| b.policy) else {
            return vec![None; zetas.len()];
        };
        let ys = self.spec.y_size();
        let p = policy.p_uy();
        let used: Vec<usize> = (0..policy.u_size())
            .filter(|&u| (0..ys).any(|y| p.get(y, u) > 0.0))
            .collect();
        zetas
            .iter()
            .map(|set| {
                let mut seed = vec![0.0; ys * us];
                for &u in &used {
                    let pos = set.iter().position(|row| *row == policy.zeta()[u])?;
                    for y in 0..ys {
                        seed[y * us + pos] += p.get(y, u);
                    }
                }
                Some(seed)
            })
            .collect()
    }

    /// `max_Q min_{P,ζ} I(U;Y|Z)` subject to `E[d] <= D` under that `Q`.
    pub fn r_lower(&self, d: f64) -> Result<BoundValue> {
        if !(d >= 0.0) {
            return Err(usage_err!("distortion level must be non-negative, got {d}"));
        }
        if self.above_d1(d) {
            return Ok(BoundValue::zero());
        }
        let us = self.u_lower();
        let zetas = zeta_maps(self.spec, us, self.grid.max_zeta)?;
        let seeds = self.lower_seeds(d, us, &zetas);
        let mut infeasible: Option<Vec<f64>> = None;
        let qcfg = self.grid.search(self.grid.q_budget, false);
        let outer = search::maximize(&self.q_space, &qcfg, |q| {
            match self.lower_inner(q, d, us, &zetas, &seeds) {
                Some((o, _)) => o.value,
                None => {
                    if infeasible.is_none() {
                        infeasible = Some(q.to_vec());
                    }
                    f64::INFINITY
                }
            }
        });
        if let Some(q) = infeasible {
            return Err(Error::Infeasible(alloc::format!(
                "no policy meets distortion {d} under jammer {q:?} (D0 ≈ {})",
                self.d0.value
            )));
        }
        let (inner, zi) = self
            .lower_inner(&outer.point, d, us, &zetas, &seeds)
            .expect("the maximizing jammer was feasible during the search");
        Ok(BoundValue {
            value: outer.value,
            uncertainty: outer.variation + inner.variation,
            policy: Some(self.policy(&inner.point, us, &zetas[zi])),
            jammer: Some(self.jammer(&outer.point)),
        })
    }

    /// Both bounds over a grid of distortion levels.
    pub fn report<E: Executor>(&self, ds: &[f64], exec: &E) -> BoundReport
    where
        Self: Sync,
    {
        let curve = exec.map_indexed(ds.len(), |i| CurvePoint {
            d: ds[i],
            upper: self.r_upper(ds[i]),
            lower: self.r_lower(ds[i]),
        });
        BoundReport {
            d0: self.d0.clone(),
            d1: self.d1.clone(),
            curve,
        }
    }
}

/// Upper bound at one distortion level with default game settings.
pub fn r_upper(spec: &ProblemSpec, d: f64, grid: &GridConfig) -> Result<BoundValue> {
    Solver::new(spec, *grid, &GameConfig::default())?.r_upper(d)
}

/// Lower bound at one distortion level with default game settings.
pub fn r_lower(spec: &ProblemSpec, d: f64, grid: &GridConfig) -> Result<BoundValue> {
    Solver::new(spec, *grid, &GameConfig::default())?.r_lower(d)
}

/// `R_U(T)`, `R̃(T)` and the bin rate for a `Y`-type.
pub fn per_type_rates(
    t_y: &TypeTable,
    policy: &AuxiliaryPolicy,
    spec: &ProblemSpec,
    eps: f64,
    f_eps: f64,
    grid: &GridConfig,
) -> Result<TypeRates> {
    if !(eps > 0.0) {
        return Err(usage_err!("eps must be positive"));
    }
    policy.check(spec)?;
    if t_y.shape() != [spec.y_size()] {
        return Err(usage_err!(
            "type shape {:?} does not match |Y| = {}",
            t_y.shape(),
            spec.y_size()
        ));
    }
    let us = policy.u_size();
    let zs = spec.z_size();
    let p = policy.p_uy().as_flat();
    let hy = row_entropies(p, us);
    let t = t_y.to_vec();
    // I_T(U;Y) = H(U) - H(U|Y)
    let pu = policy.output_distribution(&t);
    let h_u: f64 = pu.iter().map(|&v| math::neg_plogp(v)).sum();
    let h_u_y: f64 = t.iter().zip(&hy).map(|(a, b)| a * b).sum();
    let r_u = (h_u - h_u_y).max(0.0) + eps / 4.0;

    // I_Q(U;Z) = H(U|Y) + I(U;Y|Z) ... computed directly as H(U) - H(U|Z)
    let space = Space::new(vec![spec.j_size(); spec.x_size()]);
    let cfg = grid.search(grid.q_budget, false);
    let out = search::minimize(&space, &cfg, |q| {
        let yz = spec.induced_yz(q);
        let py = marginal_y(&yz, zs);
        let dev = t
            .iter()
            .zip(&py)
            .map(|(a, b)| math::abs(a - b))
            .fold(0.0, f64::max);
        if dev > f_eps {
            return Eval::Infeasible(dev - f_eps);
        }
        let pu = policy.output_distribution(&py);
        let h_u: f64 = pu.iter().map(|&v| math::neg_plogp(v)).sum();
        let i_uyz = cond_info(&yz, &py, p, &hy, zs, us);
        let h_u_y: f64 = py.iter().zip(&hy).map(|(a, b)| a * b).sum();
        // H(U|Z) = I(U;Y|Z) + H(U|Y)
        Eval::Feasible((h_u - (i_uyz + h_u_y)).max(0.0))
    });
    Ok(match out {
        Some(o) => {
            let r_tilde = (o.value - eps / 4.0).max(0.0);
            TypeRates {
                r_u,
                r_tilde,
                r_bin: (r_u - r_tilde).max(0.0),
                no_feasible_jammer: false,
            }
        }
        None => TypeRates {
            r_u,
            r_tilde: f64::INFINITY,
            r_bin: 0.0,
            no_feasible_jammer: true,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{Channel, DistortionMatrix, Distribution};

    fn h2(p: f64) -> f64 {
        if p <= 0.0 || p >= 1.0 {
            0.0
        } else {
            -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
        }
    }

    fn plain_binary() -> ProblemSpec {
        ProblemSpec::new(
            Distribution::uniform(2),
            Channel::deterministic(2, 1, 2, 1, |x, _| (x, 0)).unwrap(),
            DistortionMatrix::hamming(2),
        )
        .unwrap()
    }

    #[test]
    fn subsets_are_lexicographic() {
        assert_eq!(
            subsets(4, 2),
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(subsets(3, 3), vec![vec![0, 1, 2]]);
        assert!(subsets(2, 3).is_empty());
    }

    #[test]
    fn function_digits() {
        // |Z| = 2, |X̃| = 3: f = 5 is (1, 2)
        assert_eq!(function_value(5, 0, 2, 3), 1);
        assert_eq!(function_value(5, 1, 2, 3), 2);
    }

    #[test]
    fn cond_info_matches_joint_computation() {
        let spec = ProblemSpec::new(
            Distribution::new(vec![0.3, 0.7]).unwrap(),
            Channel::new(2, 1, 2, 2, vec![0.5, 0.2, 0.1, 0.2, 0.1, 0.1, 0.3, 0.5]).unwrap(),
            DistortionMatrix::hamming(2),
        )
        .unwrap();
        let puy = CondDistribution::new(vec![vec![0.8, 0.1, 0.1], vec![0.2, 0.3, 0.5]]).unwrap();
        let q = CondDistribution::uniform(2, 1);
        let j = crate::prob::compose_joint(spec.p_x(), &q, spec.channel(), Some(&puy)).unwrap();
        let want = j
            .cmi(&[crate::Var::U], &[crate::Var::Y], &[crate::Var::Z])
            .unwrap();
        let yz = spec.induced_yz(q.as_flat());
        let py = marginal_y(&yz, 2);
        let got = cond_info(
            &yz,
            &py,
            puy.as_flat(),
            &row_entropies(puy.as_flat(), 3),
            2,
            3,
        );
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn minimax_distortions_of_simple_channels() {
        let cfg = GameConfig::default();
        let s = plain_binary();
        assert!(d0(&s, &cfg).unwrap().value.abs() < 1e-9);
        assert!((d1(&s, &cfg).unwrap().value - 0.5).abs() < 1e-6);
        let skew = ProblemSpec::new(
            Distribution::new(vec![0.25, 0.75]).unwrap(),
            Channel::deterministic(2, 1, 2, 1, |x, _| (x, 0)).unwrap(),
            DistortionMatrix::hamming(2),
        )
        .unwrap();
        assert!((d1(&skew, &cfg).unwrap().value - 0.25).abs() < 1e-9);
        let xor = crate::problem::tests::xor_spec();
        let r = d0(&xor, &cfg).unwrap();
        assert!((r.value - 0.5).abs() <= r.duality_gap.max(1e-6));
    }

    #[test]
    fn upper_bound_is_zero_above_d1() {
        let s = plain_binary();
        let r = r_upper(&s, 0.6, &GridConfig::default()).unwrap();
        assert_eq!(r.value, 0.0);
        let r = r_lower(&s, 0.6, &GridConfig::default()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn upper_bound_matches_binary_rate_distortion() {
        let s = plain_binary();
        for d in [0.1, 0.25] {
            let r = r_upper(&s, d, &GridConfig::default()).unwrap();
            assert!(
                (r.value - (1.0 - h2(d))).abs() < 0.05,
                "D = {d}: {} vs {}",
                r.value,
                1.0 - h2(d)
            );
        }
    }

    #[test]
    fn upper_bound_rejects_d_below_d0() {
        let s = plain_binary();
        // D0 = 0 here, so a negative level is the only infeasible one; use a
        // channel where D0 > 0 instead
        let xor = crate::problem::tests::xor_spec();
        assert!(matches!(
            r_upper(&xor, 0.2, &GridConfig::default()),
            Err(Error::Infeasible(_))
        ));
        assert!(matches!(
            r_lower(&xor, 0.2, &GridConfig::default()),
            Err(Error::Infeasible(_))
        ));
        assert!(r_upper(&s, -0.1, &GridConfig::default()).is_err());
    }

    #[test]
    fn deterministic_identity_policy_rates() {
        let s = plain_binary();
        let pol = AuxiliaryPolicy::new(
            CondDistribution::deterministic(&[0, 1], 2).unwrap(),
            vec![vec![0], vec![1]],
        )
        .unwrap();
        let t = TypeTable::from_counts(vec![2], vec![4, 4]).unwrap();
        let r = per_type_rates(&t, &pol, &s, 0.2, 0.2, &GridConfig::default()).unwrap();
        assert!((r.r_u - 1.05).abs() < 1e-12);
        // Z is constant, so I(U;Z) = 0
        assert_eq!(r.r_tilde, 0.0);
        assert!((r.r_bin - 1.05).abs() < 1e-12);
    }
}
