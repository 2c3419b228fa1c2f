//! Finite-alphabet distributions and information measures.
//!
//! Everything is dense: joints are stored as row-major tables over the
//! product of their variables' alphabets. Logarithms are base 2.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::math;
use crate::PROB_TOL;

/// Computed information quantities within this distance of zero are reported
/// as exactly zero.
pub const INFO_CLAMP: f64 = 1e-9;

fn check_simplex(mass: &[f64], what: &str) -> Result<()> {
    if mass.is_empty() {
        return Err(config_err!("{what}: empty probability vector"));
    }
    let mut sum = 0.0;
    for (i, &p) in mass.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(config_err!("{what}: entry {i} = {p} is not a probability"));
        }
        sum += p;
    }
    if math::abs(sum - 1.0) > PROB_TOL {
        return Err(config_err!("{what}: entries sum to {sum}, expected 1"));
    }
    Ok(())
}

/// A probability mass function on `0..len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution {
    mass: Vec<f64>,
}

impl Distribution {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        check_simplex(&mass, "distribution")?;
        Ok(Self { mass })
    }

    pub fn uniform(size: usize) -> Self {
        assert!(size > 0);
        Self {
            mass: vec![1.0 / size as f64; size],
        }
    }

    pub fn point(size: usize, at: usize) -> Self {
        let mut mass = vec![0.0; size];
        mass[at] = 1.0;
        Self { mass }
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn get(&self, i: usize) -> f64 {
        self.mass[i]
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = crate::Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Distribution::new(v)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Vec<f64> {
        d.mass
    }
}

/// A stochastic matrix `P(to | from)`, one row per conditioning symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct CondDistribution {
    from: usize,
    to: usize,
    data: Vec<f64>,
}

impl CondDistribution {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(config_err!("conditional distribution has no rows"));
        }
        let to = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * to);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != to {
                return Err(config_err!(
                    "row {i} has {} entries, expected {to}",
                    row.len()
                ));
            }
            check_simplex(row, "conditional row")?;
            data.extend_from_slice(row);
        }
        Ok(Self {
            from: rows.len(),
            to,
            data,
        })
    }

    /// Builds from a flat row-major table.
    pub fn from_flat(from: usize, to: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != from * to || from == 0 || to == 0 {
            return Err(config_err!(
                "flat table of length {} does not match {from}x{to}",
                data.len()
            ));
        }
        for row in data.chunks_exact(to) {
            check_simplex(row, "conditional row")?;
        }
        Ok(Self { from, to, data })
    }

    /// Deterministic map `from -> map[from]`.
    pub fn deterministic(map: &[usize], to: usize) -> Result<Self> {
        let mut data = vec![0.0; map.len() * to];
        for (i, &m) in map.iter().enumerate() {
            if m >= to {
                return Err(config_err!("map value {m} outside alphabet of size {to}"));
            }
            data[i * to + m] = 1.0;
        }
        Self::from_flat(map.len(), to, data)
    }

    pub fn uniform(from: usize, to: usize) -> Self {
        Self {
            from,
            to,
            data: vec![1.0 / to as f64; from * to],
        }
    }

    pub fn from_size(&self) -> usize {
        self.from
    }

    pub fn to_size(&self) -> usize {
        self.to
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.to..(i + 1) * self.to]
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.data[from * self.to + to]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks_exact(self.to)
            .map(|r| r.to_vec())
            .collect()
    }

    /// The row index carrying all mass, for every row, if the matrix is
    /// deterministic.
    pub fn as_map(&self) -> Option<Vec<usize>> {
        self.data
            .chunks_exact(self.to)
            .map(|r| r.iter().position(|&p| p == 1.0))
            .collect()
    }

    /// Pointwise mixture `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, other: &Self, lambda: f64) -> Result<Self> {
        if self.from != other.from || self.to != other.to {
            return Err(config_err!("cannot mix conditionals of different shapes"));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        Ok(Self {
            from: self.from,
            to: self.to,
            data,
        })
    }
}

impl TryFrom<Vec<Vec<f64>>> for CondDistribution {
    type Error = crate::Error;
    fn try_from(v: Vec<Vec<f64>>) -> Result<Self> {
        CondDistribution::new(v)
    }
}

impl From<CondDistribution> for Vec<Vec<f64>> {
    fn from(c: CondDistribution) -> Self {
        c.rows()
    }
}

/// Two-input two-output channel `W(y, z | x, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    x: usize,
    j: usize,
    y: usize,
    z: usize,
    kernel: Vec<f64>,
}

impl Channel {
    /// `kernel` is row-major over `[x][j][y][z]`.
    pub fn new(x: usize, j: usize, y: usize, z: usize, kernel: Vec<f64>) -> Result<Self> {
        if x == 0 || j == 0 || y == 0 || z == 0 {
            return Err(config_err!("channel alphabets must be non-empty"));
        }
        if kernel.len() != x * j * y * z {
            return Err(config_err!(
                "channel kernel has {} entries, expected {}",
                kernel.len(),
                x * j * y * z
            ));
        }
        for (idx, row) in kernel.chunks_exact(y * z).enumerate() {
            check_simplex(row, "channel row").map_err(|e| match e {
                crate::Error::Config(m) => {
                    config_err!("W[x={}][j={}]: {m}", idx / j, idx % j)
                }
                other => other,
            })?;
        }
        Ok(Self { x, j, y, z, kernel })
    }

    /// Builds from the nested `[x][j][y][z]` layout used by spec files.
    pub fn from_nested(w: &[Vec<Vec<Vec<f64>>>]) -> Result<Self> {
        let x = w.len();
        let j = w.first().map_or(0, |r| r.len());
        let y = w.first().and_then(|r| r.first()).map_or(0, |r| r.len());
        let z = w
            .first()
            .and_then(|r| r.first())
            .and_then(|r| r.first())
            .map_or(0, |r| r.len());
        let mut kernel = Vec::with_capacity(x * j * y * z);
        for (xi, wx) in w.iter().enumerate() {
            if wx.len() != j {
                return Err(config_err!(
                    "W[{xi}] has {} jammer rows, expected {j}",
                    wx.len()
                ));
            }
            for (ji, wj) in wx.iter().enumerate() {
                if wj.len() != y {
                    return Err(config_err!(
                        "W[{xi}][{ji}] has {} y rows, expected {y}",
                        wj.len()
                    ));
                }
                for (yi, wy) in wj.iter().enumerate() {
                    if wy.len() != z {
                        return Err(config_err!(
                            "W[{xi}][{ji}][{yi}] has {} entries, expected {z}",
                            wy.len()
                        ));
                    }
                    kernel.extend_from_slice(wy);
                }
            }
        }
        Self::new(x, j, y, z, kernel)
    }

    /// Channel whose outputs are deterministic functions `(fy(x,j), fz(x,j))`.
    pub fn deterministic(
        x: usize,
        j: usize,
        y: usize,
        z: usize,
        f: impl Fn(usize, usize) -> (usize, usize),
    ) -> Result<Self> {
        let mut kernel = vec![0.0; x * j * y * z];
        for xi in 0..x {
            for ji in 0..j {
                let (yo, zo) = f(xi, ji);
                if yo >= y || zo >= z {
                    return Err(config_err!("deterministic channel output out of range"));
                }
                kernel[((xi * j + ji) * y + yo) * z + zo] = 1.0;
            }
        }
        Self::new(x, j, y, z, kernel)
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<Vec<f64>>>> {
        (0..self.x)
            .map(|x| {
                (0..self.j)
                    .map(|j| {
                        (0..self.y)
                            .map(|y| self.row(x, j)[y * self.z..(y + 1) * self.z].to_vec())
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    pub fn sizes(&self) -> (usize, usize, usize, usize) {
        (self.x, self.j, self.y, self.z)
    }

    #[inline]
    pub fn prob(&self, x: usize, j: usize, y: usize, z: usize) -> f64 {
        self.kernel[((x * self.j + j) * self.y + y) * self.z + z]
    }

    /// The `(y, z)` distribution for inputs `(x, j)`, flattened `y`-major.
    #[inline]
    pub fn row(&self, x: usize, j: usize) -> &[f64] {
        let w = self.y * self.z;
        let start = (x * self.j + j) * w;
        &self.kernel[start..start + w]
    }
}

/// Single-letter distortion `d(x, xhat)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    d_max: f64,
}

impl DistortionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if r == 0 || c == 0 {
            return Err(config_err!("distortion matrix must be non-empty"));
        }
        let mut entries = Vec::with_capacity(r * c);
        let mut d_max: f64 = 0.0;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(config_err!(
                    "d[{i}] has {} entries, expected {c}",
                    row.len()
                ));
            }
            for (k, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(config_err!(
                        "d[{i}][{k}] = {v} must be finite and non-negative"
                    ));
                }
                d_max = d_max.max(v);
            }
            entries.extend_from_slice(row);
        }
        Ok(Self {
            rows: r,
            cols: c,
            entries,
            d_max,
        })
    }

    /// Hamming distortion on a square alphabet.
    pub fn hamming(size: usize) -> Self {
        let rows = (0..size)
            .map(|i| (0..size).map(|k| if i == k { 0.0 } else { 1.0 }).collect())
            .collect();
        Self::new(rows).expect("hamming matrix is valid")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    #[inline]
    pub fn get(&self, x: usize, xhat: usize) -> f64 {
        self.entries[x * self.cols + xhat]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .chunks_exact(self.cols)
            .map(|r| r.to_vec())
            .collect()
    }
}

/// Variable labels for joint tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Var {
    X,
    J,
    Y,
    Z,
    U,
    XHat,
    S,
    T,
}

/// A joint pmf over an ordered list of variables.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    vars: Vec<Var>,
    sizes: Vec<usize>,
    mass: Vec<f64>,
}

impl JointDistribution {
    pub fn new(vars: Vec<Var>, sizes: Vec<usize>, mass: Vec<f64>) -> Result<Self> {
        if vars.is_empty() || vars.len() != sizes.len() {
            return Err(config_err!("joint needs one size per variable"));
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(config_err!("variable {v:?} listed twice"));
            }
        }
        let total: usize = sizes.iter().product();
        if total != mass.len() {
            return Err(config_err!(
                "joint has {} entries, expected {total}",
                mass.len()
            ));
        }
        check_simplex(&mass, "joint distribution")?;
        Ok(Self { vars, sizes, mass })
    }

    pub fn from_distribution(var: Var, d: &Distribution) -> Self {
        Self {
            vars: vec![var],
            sizes: vec![d.len()],
            mass: d.mass().to_vec(),
        }
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn size_of(&self, v: Var) -> Result<usize> {
        Ok(self.sizes[self.index_of(v)?])
    }

    fn index_of(&self, v: Var) -> Result<usize> {
        self.vars
            .iter()
            .position(|&w| w == v)
            .ok_or_else(|| config_err!("variable {v:?} not in joint {:?}", self.vars))
    }

    /// Probability of one full assignment (in the joint's variable order).
    pub fn prob(&self, assignment: &[usize]) -> f64 {
        let mut idx = 0;
        for (a, s) in assignment.iter().zip(&self.sizes) {
            idx = idx * s + a;
        }
        self.mass[idx]
    }

    /// Visits every cell with its decoded assignment.
    pub fn for_each(&self, mut f: impl FnMut(&[usize], f64)) {
        let mut a = vec![0usize; self.sizes.len()];
        for &p in &self.mass {
            f(&a, p);
            for k in (0..a.len()).rev() {
                a[k] += 1;
                if a[k] < self.sizes[k] {
                    break;
                }
                a[k] = 0;
            }
        }
    }

    /// Marginal over `keep`, in the order given.
    pub fn marginal(&self, keep: &[Var]) -> Result<JointDistribution> {
        if keep.is_empty() {
            return Err(config_err!("marginal needs at least one variable"));
        }
        let pos: Vec<usize> = keep
            .iter()
            .map(|&v| self.index_of(v))
            .collect::<Result<_>>()?;
        for (i, p) in pos.iter().enumerate() {
            if pos[..i].contains(p) {
                return Err(config_err!("variable {:?} requested twice", keep[i]));
            }
        }
        let sizes: Vec<usize> = pos.iter().map(|&p| self.sizes[p]).collect();
        let mut out = vec![0.0; sizes.iter().product()];
        self.for_each(|a, p| {
            let mut idx = 0;
            for (&pp, &s) in pos.iter().zip(&sizes) {
                idx = idx * s + a[pp];
            }
            out[idx] += p;
        });
        let sum: f64 = out.iter().sum();
        if sum > 0.0 {
            out.iter_mut().for_each(|p| *p /= sum);
        }
        Ok(JointDistribution {
            vars: keep.to_vec(),
            sizes,
            mass: out,
        })
    }

    /// Joint entropy of a set of variables (empty set has entropy zero).
    pub fn entropy_of(&self, vars: &[Var]) -> Result<f64> {
        if vars.is_empty() {
            return Ok(0.0);
        }
        Ok(entropy_of_mass(self.marginal(vars)?.mass()))
    }

    /// `I(A; B | C)` for sets of variables; `given` may be empty.
    pub fn cmi(&self, a: &[Var], b: &[Var], given: &[Var]) -> Result<f64> {
        let union = |s: &[&[Var]]| -> Vec<Var> {
            let mut out: Vec<Var> = Vec::new();
            for set in s {
                for v in set.iter() {
                    if !out.contains(v) {
                        out.push(*v);
                    }
                }
            }
            out
        };
        let h_ac = self.entropy_of(&union(&[a, given]))?;
        let h_bc = self.entropy_of(&union(&[b, given]))?;
        let h_abc = self.entropy_of(&union(&[a, b, given]))?;
        let h_c = self.entropy_of(given)?;
        Ok(clamp_info(h_ac + h_bc - h_abc - h_c))
    }

    /// Extends the joint with `XHat = zeta[u][z]` (deterministic).
    pub fn with_reconstruction(
        &self,
        zeta: &[Vec<usize>],
        xhat_size: usize,
    ) -> Result<JointDistribution> {
        let u = self.index_of(Var::U)?;
        let z = self.index_of(Var::Z)?;
        if self.vars.contains(&Var::XHat) {
            return Err(config_err!("joint already has XHat"));
        }
        let mut vars = self.vars.clone();
        vars.push(Var::XHat);
        let mut sizes = self.sizes.clone();
        sizes.push(xhat_size);
        let mut mass = vec![0.0; self.mass.len() * xhat_size];
        let mut i = 0;
        let mut err = None;
        self.for_each(|a, p| {
            let xh = zeta.get(a[u]).and_then(|r| r.get(a[z])).copied();
            match xh {
                Some(xh) if xh < xhat_size => mass[i * xhat_size + xh] = p,
                _ => {
                    err = Some(config_err!(
                        "reconstruction map undefined at u={}, z={}",
                        a[u],
                        a[z]
                    ))
                }
            }
            i += 1;
        });
        if let Some(e) = err {
            return Err(e);
        }
        Ok(JointDistribution { vars, sizes, mass })
    }
}

/// Entropy (bits) of an arbitrary non-negative mass vector.
pub fn entropy_of_mass(mass: &[f64]) -> f64 {
    mass.iter().map(|&p| math::neg_plogp(p)).sum()
}

pub(crate) fn clamp_info(v: f64) -> f64 {
    if v.abs() < INFO_CLAMP {
        0.0
    } else {
        v
    }
}

/// `H(P)` in bits.
pub fn entropy(d: &Distribution) -> f64 {
    entropy_of_mass(d.mass())
}

/// Joint of `(X, J, Y, Z)` or `(X, J, Y, Z, U)`:
/// `P_X(x) Q(j|x) W(y,z|x,j) P(u|y)`.
pub fn compose_joint(
    p_x: &Distribution,
    q: &CondDistribution,
    w: &Channel,
    p_uy: Option<&CondDistribution>,
) -> Result<JointDistribution> {
    let (nx, nj, ny, nz) = w.sizes();
    if p_x.len() != nx {
        return Err(config_err!(
            "P_X has {} symbols, channel expects {nx}",
            p_x.len()
        ));
    }
    if q.from_size() != nx || q.to_size() != nj {
        return Err(config_err!(
            "jammer conditional is {}x{}, expected {nx}x{nj}",
            q.from_size(),
            q.to_size()
        ));
    }
    let nu = match p_uy {
        Some(p) if p.from_size() != ny => {
            return Err(config_err!(
                "P_U|Y conditions on {} symbols, |Y| = {ny}",
                p.from_size()
            ))
        }
        Some(p) => p.to_size(),
        None => 1,
    };
    let mut mass = Vec::with_capacity(nx * nj * ny * nz * nu);
    for x in 0..nx {
        for j in 0..nj {
            let base = p_x.get(x) * q.get(x, j);
            for y in 0..ny {
                for z in 0..nz {
                    let pxyz = base * w.prob(x, j, y, z);
                    match p_uy {
                        Some(p) => mass.extend(p.row(y).iter().map(|&pu| pxyz * pu)),
                        None => mass.push(pxyz),
                    }
                }
            }
        }
    }
    let (vars, sizes) = match p_uy {
        Some(_) => (
            vec![Var::X, Var::J, Var::Y, Var::Z, Var::U],
            vec![nx, nj, ny, nz, nu],
        ),
        None => (vec![Var::X, Var::J, Var::Y, Var::Z], vec![nx, nj, ny, nz]),
    };
    JointDistribution::new(vars, sizes, mass)
}

/// `I(A; B | C)` in bits; `given = None` gives `I(A; B)`.
pub fn conditional_mutual_information(
    j: &JointDistribution,
    a: Var,
    b: Var,
    given: Option<Var>,
) -> Result<f64> {
    match given {
        Some(c) => j.cmi(&[a], &[b], &[c]),
        None => j.cmi(&[a], &[b], &[]),
    }
}

/// `E[d(X, XHat)]` under the joint.
pub fn expected_distortion(
    j: &JointDistribution,
    d: &DistortionMatrix,
    xvar: Var,
    xhatvar: Var,
) -> Result<f64> {
    let m = j.marginal(&[xvar, xhatvar])?;
    if m.sizes()[0] != d.rows() || m.sizes()[1] != d.cols() {
        return Err(config_err!(
            "distortion matrix is {}x{}, joint alphabets are {}x{}",
            d.rows(),
            d.cols(),
            m.sizes()[0],
            m.sizes()[1]
        ));
    }
    let mut acc = 0.0;
    m.for_each(|a, p| acc += p * d.get(a[0], a[1]));
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bsc_channel(p: f64) -> Channel {
        // Y = X through BSC(p), J ignored (|J| = 2), Z constant.
        let mut k = Vec::new();
        for x in 0..2 {
            for _j in 0..2 {
                for y in 0..2 {
                    k.push(if x == y { 1.0 - p } else { p });
                }
            }
        }
        Channel::new(2, 2, 2, 1, k).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&Distribution::uniform(2)), 1.0);
        assert_eq!(entropy(&Distribution::point(3, 1)), 0.0);
        // -(0.25 log 0.25 + 0.75 log 0.75)
        let h = entropy(&Distribution::new(vec![0.25, 0.75]).unwrap());
        assert!((h - 0.811_278_124_459_132_8).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_distributions() {
        assert!(Distribution::new(vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(vec![-0.1, 1.1]).is_err());
        assert!(Distribution::new(vec![f64::NAN, 1.0]).is_err());
        assert!(CondDistribution::new(vec![vec![1.0, 0.0], vec![0.3]]).is_err());
        assert!(DistortionMatrix::new(vec![vec![0.0, -1.0]]).is_err());
    }

    #[test]
    fn compose_identity_channel_support() {
        let w = Channel::deterministic(2, 1, 2, 2, |x, _| (x, x)).unwrap();
        let q = CondDistribution::deterministic(&[0, 0], 1).unwrap();
        let j = compose_joint(&Distribution::uniform(2), &q, &w, None).unwrap();
        for x in 0..2 {
            assert_eq!(j.prob(&[x, 0, x, x]), 0.5);
        }
        let total: f64 = j.mass().iter().sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn compose_bsc_table_matches_product() {
        let px = Distribution::new(vec![0.25, 0.75]).unwrap();
        let q = CondDistribution::uniform(2, 2);
        let w = bsc_channel(0.1);
        let j = compose_joint(&px, &q, &w, None).unwrap();
        assert_eq!(j.mass().len(), 8);
        // direct product-sum evaluation
        for x in 0..2 {
            for jj in 0..2 {
                for y in 0..2 {
                    let expect = [0.25, 0.75][x] * 0.5 * if x == y { 0.9 } else { 0.1 };
                    assert!((j.prob(&[x, jj, y, 0]) - expect).abs() < 1e-15);
                }
            }
        }
        let mx = j.marginal(&[Var::X]).unwrap();
        assert!((mx.mass()[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn marginal_errors_and_identity() {
        let px = Distribution::new(vec![0.25, 0.75]).unwrap();
        let j = compose_joint(
            &px,
            &CondDistribution::uniform(2, 2),
            &bsc_channel(0.1),
            None,
        )
        .unwrap();
        let all = j.marginal(&[Var::X, Var::J, Var::Y, Var::Z]).unwrap();
        assert_eq!(all, j);
        assert!(j.marginal(&[Var::U]).is_err());
        assert!(j.marginal(&[]).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        // I(X;Y) for uniform X through BSC(0.1) = 1 - h2(0.1)
        let j = compose_joint(
            &Distribution::uniform(2),
            &CondDistribution::uniform(2, 2),
            &bsc_channel(0.1),
            None,
        )
        .unwrap();
        let i = conditional_mutual_information(&j, Var::X, Var::Y, None).unwrap();
        let h2 = -(0.1f64 * 0.1f64.log2() + 0.9 * 0.9f64.log2());
        assert!((i - (1.0 - h2)).abs() < 1e-12);
        assert!((i - 0.531_004_406_410_719).abs() < 1e-9);
        // J is independent of everything else
        let ij = conditional_mutual_information(&j, Var::J, Var::Y, Some(Var::X)).unwrap();
        assert_eq!(ij, 0.0);
        // A = B uniform binary
        let same =
            JointDistribution::new(vec![Var::S, Var::T], vec![2, 2], vec![0.5, 0.0, 0.0, 0.5])
                .unwrap();
        assert!((same.cmi(&[Var::S], &[Var::T], &[]).unwrap() - 1.0).abs() < 1e-15);
        assert!(conditional_mutual_information(&j, Var::U, Var::Y, None).is_err());
    }

    #[test]
    fn distortion_examples() {
        let d = DistortionMatrix::hamming(2);
        let eq = JointDistribution::new(
            vec![Var::X, Var::XHat],
            vec![2, 2],
            vec![0.5, 0.0, 0.0, 0.5],
        )
        .unwrap();
        assert_eq!(
            expected_distortion(&eq, &d, Var::X, Var::XHat).unwrap(),
            0.0
        );
        let ind =
            JointDistribution::new(vec![Var::X, Var::XHat], vec![2, 2], vec![0.25; 4]).unwrap();
        assert_eq!(
            expected_distortion(&ind, &d, Var::X, Var::XHat).unwrap(),
            0.5
        );
        let bad = DistortionMatrix::hamming(3);
        assert!(expected_distortion(&eq, &bad, Var::X, Var::XHat).is_err());
    }

    #[test]
    fn map_reconstruction_distortion_matches_brute_force() {
        // X uniform, Y = BSC(0.1)(X), Z constant, U = Y, XHat = U (MAP decision)
        let j = compose_joint(
            &Distribution::uniform(2),
            &CondDistribution::uniform(2, 2),
            &bsc_channel(0.1),
            Some(&CondDistribution::deterministic(&[0, 1], 2).unwrap()),
        )
        .unwrap();
        let full = j.with_reconstruction(&[vec![0], vec![1]], 2).unwrap();
        let e =
            expected_distortion(&full, &DistortionMatrix::hamming(2), Var::X, Var::XHat).unwrap();
        let mut brute = 0.0;
        for x in 0..2 {
            for y in 0..2 {
                brute += 0.5 * if x == y { 0.9 } else { 0.1 } * if x == y { 0.0 } else { 1.0 };
            }
        }
        assert!((e - brute).abs() < 1e-15);
    }
}
