//! Empirical types, typicality tests and conditional-type enumeration.
//!
//! Types keep integer counts; they become floats only when compared against a
//! distribution.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{config_err, usage_err};
use crate::prob::{CondDistribution, Distribution, JointDistribution};
use crate::problem::ProblemSpec;
use crate::Result;

/// A length-`n` sequence over an alphabet of the given size.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolVector {
    size: usize,
    symbols: Vec<usize>,
}

impl SymbolVector {
    pub fn new(size: usize, symbols: Vec<usize>) -> Result<Self> {
        if size == 0 {
            return Err(config_err!("alphabet must be non-empty"));
        }
        if symbols.is_empty() {
            return Err(usage_err!("sequences must have length at least 1"));
        }
        if let Some(i) = symbols.iter().position(|&s| s >= size) {
            return Err(config_err!(
                "symbol {} at position {i} exceeds alphabet size {size}",
                symbols[i]
            ));
        }
        Ok(Self { size, symbols })
    }

    /// Constant sequence.
    pub fn constant(size: usize, symbol: usize, n: usize) -> Result<Self> {
        Self::new(size, vec![symbol; n])
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn alphabet_size(&self) -> usize {
        self.size
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    #[inline]
    pub fn get(&self, i: usize) -> usize {
        self.symbols[i]
    }
}

/// Counts over a (possibly multi-dimensional) alphabet with denominator `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeTable {
    shape: Vec<usize>,
    counts: Vec<u64>,
    n: u64,
}

impl TypeTable {
    /// `counts` is row-major over `shape`; `n` is their sum.
    pub fn from_counts(shape: Vec<usize>, counts: Vec<u64>) -> Result<Self> {
        let len: usize = shape.iter().product();
        if len == 0 || counts.len() != len {
            return Err(config_err!(
                "type table has {} counts, shape needs {len}",
                counts.len()
            ));
        }
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(usage_err!("type of an empty sequence"));
        }
        Ok(Self { shape, counts, n })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.counts[i] as f64 / self.n as f64
    }

    pub fn to_vec(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|i| self.get(i)).collect()
    }

    pub fn to_distribution(&self) -> Distribution {
        Distribution::new(self.to_vec()).expect("a type is a distribution")
    }

    /// `max_i |T(i) - p(i)|`.
    pub fn linf_distance(&self, p: &[f64]) -> f64 {
        self.counts
            .iter()
            .zip(p)
            .map(|(&c, &q)| crate::math::abs(c as f64 / self.n as f64 - q))
            .fold(0.0, f64::max)
    }
}

pub fn empirical_type(x: &SymbolVector) -> TypeTable {
    let mut counts = vec![0u64; x.size];
    for &s in &x.symbols {
        counts[s] += 1;
    }
    TypeTable {
        shape: vec![x.size],
        n: x.len() as u64,
        counts,
    }
}

pub fn joint_type(x: &SymbolVector, y: &SymbolVector) -> Result<TypeTable> {
    if x.len() != y.len() {
        return Err(usage_err!(
            "joint type of sequences of lengths {} and {}",
            x.len(),
            y.len()
        ));
    }
    let mut counts = vec![0u64; x.size * y.size];
    for (&a, &b) in x.symbols.iter().zip(&y.symbols) {
        counts[a * y.size + b] += 1;
    }
    Ok(TypeTable {
        shape: vec![x.size, y.size],
        n: x.len() as u64,
        counts,
    })
}

/// Conditional type `T_{x|y}`: row `b` is the type of `x` over positions where
/// `y = b`. Rows of unseen `b` are undefined.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConditionalType {
    from: usize,
    to: usize,
    counts: Vec<u64>,
}

impl ConditionalType {
    pub fn from_counts(from: usize, to: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != from * to {
            return Err(config_err!(
                "conditional type has {} counts, expected {}",
                counts.len(),
                from * to
            ));
        }
        Ok(Self { from, to, counts })
    }

    pub fn from_size(&self) -> usize {
        self.from
    }

    pub fn to_size(&self) -> usize {
        self.to
    }

    pub fn row_count(&self, b: usize) -> u64 {
        self.counts[b * self.to..(b + 1) * self.to].iter().sum()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `None` when the conditioning symbol never occurs.
    pub fn row(&self, b: usize) -> Option<Vec<f64>> {
        let total = self.row_count(b);
        (total > 0).then(|| {
            self.counts[b * self.to..(b + 1) * self.to]
                .iter()
                .map(|&c| c as f64 / total as f64)
                .collect()
        })
    }

    pub fn is_defined(&self) -> bool {
        (0..self.from).all(|b| self.row_count(b) > 0)
    }

    /// As a conditional distribution; fails if some row is undefined.
    pub fn to_cond(&self) -> Result<CondDistribution> {
        let rows = (0..self.from)
            .map(|b| {
                self.row(b)
                    .ok_or_else(|| usage_err!("conditional type row {b} is undefined"))
            })
            .collect::<Result<Vec<_>>>()?;
        CondDistribution::new(rows)
    }
}

/// `T_{x|y}` (rows indexed by `y`).
pub fn conditional_type(x: &SymbolVector, y: &SymbolVector) -> Result<ConditionalType> {
    if x.len() != y.len() {
        return Err(usage_err!(
            "conditional type of sequences of lengths {} and {}",
            x.len(),
            y.len()
        ));
    }
    let mut counts = vec![0u64; y.size * x.size];
    for (&a, &b) in x.symbols.iter().zip(&y.symbols) {
        counts[b * x.size + a] += 1;
    }
    Ok(ConditionalType {
        from: y.size,
        to: x.size,
        counts,
    })
}

pub fn is_typical(x: &SymbolVector, p: &Distribution, eps: f64) -> bool {
    p.len() == x.size && empirical_type(x).linf_distance(p.mass()) <= eps
}

/// Joint typicality against a two-variable joint distribution whose first
/// variable describes `x` and second `y`.
pub fn is_jointly_typical(
    x: &SymbolVector,
    y: &SymbolVector,
    p_xy: &JointDistribution,
    eps: f64,
) -> Result<bool> {
    if p_xy.sizes() != [x.size, y.size] {
        return Err(config_err!(
            "joint distribution has shape {:?}, sequences need [{}, {}]",
            p_xy.sizes(),
            x.size,
            y.size
        ));
    }
    Ok(joint_type(x, y)?.linf_distance(p_xy.mass()) <= eps)
}

fn compositions(total: u64, parts: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut cur = vec![0u64; parts];
    fn rec(i: usize, rest: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if i + 1 == cur.len() {
            cur[i] = rest;
            out.push(cur.clone());
            return;
        }
        for c in 0..=rest {
            cur[i] = c;
            rec(i + 1, rest - c, cur, out);
        }
    }
    rec(0, total, &mut cur, &mut out);
    out
}

/// All conditional types `T_{J|X}` at blocklength `n` for the given per-`x`
/// counts. A zero count yields an undefined (wildcard) row.
pub fn enumerate_cond_types(n: u64, x_counts: &[u64], j: usize) -> Result<Vec<ConditionalType>> {
    if x_counts.iter().sum::<u64>() != n {
        return Err(usage_err!(
            "x counts sum to {}, not n = {n}",
            x_counts.iter().sum::<u64>()
        ));
    }
    if j == 0 {
        return Err(config_err!("jammer alphabet must be non-empty"));
    }
    let rows: Vec<Vec<Vec<u64>>> = x_counts.iter().map(|&c| compositions(c, j)).collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; rows.len()];
    loop {
        let mut counts = Vec::with_capacity(rows.len() * j);
        for (r, &i) in rows.iter().zip(&idx) {
            counts.extend_from_slice(&r[i]);
        }
        out.push(ConditionalType {
            from: x_counts.len(),
            to: j,
            counts,
        });
        // odometer, last row fastest
        let mut pos = rows.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < rows[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Per-symbol counts at blocklength `n` closest to `n * p`, by largest
/// remainder (ties to the lower index).
pub fn nominal_counts(p: &[f64], n: u64) -> Vec<u64> {
    let mut counts: Vec<u64> = p
        .iter()
        .map(|&q| crate::math::floor(q * n as f64) as u64)
        .collect();
    let assigned: u64 = counts.iter().sum();
    let mut rem: Vec<(usize, f64)> = p
        .iter()
        .enumerate()
        .map(|(i, &q)| (i, q * n as f64 - counts[i] as f64))
        .collect();
    rem.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
    for &(i, _) in rem.iter().take(n.saturating_sub(assigned) as usize) {
        counts[i] += 1;
    }
    counts
}

/// Conditional types with every row defined: wildcard rows are expanded into
/// every composition of `n`.
fn expand_wildcards(t: &ConditionalType, n: u64) -> Vec<CondDistribution> {
    let completions = compositions(n, t.to);
    let mut out: Vec<Vec<Vec<f64>>> = vec![Vec::new()];
    for b in 0..t.from {
        let choices: Vec<Vec<f64>> = match t.row(b) {
            Some(r) => vec![r],
            None => completions
                .iter()
                .map(|c| c.iter().map(|&v| v as f64 / n as f64).collect())
                .collect(),
        };
        out = out
            .into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |c| {
                    let mut p = prefix.clone();
                    p.push(c.clone());
                    p
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|rows| CondDistribution::new(rows).expect("type rows are distributions"))
        .collect()
}

/// Jammer conditional types whose induced `Y` marginal is within `f_eps` of
/// `t_y` in max-norm. The source counts are the nominal counts of `n P_X`.
pub fn valid_jammer_types(
    t_y: &TypeTable,
    spec: &ProblemSpec,
    f_eps: f64,
    n: u64,
) -> Result<Vec<CondDistribution>> {
    if f_eps < 0.0 {
        return Err(usage_err!("f(eps) must be non-negative"));
    }
    if t_y.shape() != [spec.y_size()] {
        return Err(config_err!(
            "type over {:?} does not match |Y| = {}",
            t_y.shape(),
            spec.y_size()
        ));
    }
    let counts = nominal_counts(spec.p_x().mass(), n);
    let mut out = Vec::new();
    for t in enumerate_cond_types(n, &counts, spec.j_size())? {
        for q in expand_wildcards(&t, n) {
            if t_y.linf_distance(&spec.induced_y(q.as_flat())) <= f_eps {
                out.push(q);
            }
        }
    }
    Ok(out)
}
