//! Problem instances and auxiliary policies.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::config_err;
use crate::prob::{Channel, CondDistribution, DistortionMatrix, Distribution};
use crate::Result;

/// An instance: source `P_X`, channel `W(y, z | x, j)` and distortion `d(x, x̃)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    p_x: Distribution,
    w: Channel,
    d: DistortionMatrix,
}

impl ProblemSpec {
    pub fn new(p_x: Distribution, w: Channel, d: DistortionMatrix) -> Result<Self> {
        let (x, _, _, _) = w.sizes();
        if p_x.len() != x {
            return Err(config_err!(
                "P_X has {} entries but the channel has |X| = {x}",
                p_x.len()
            ));
        }
        if d.rows() != x {
            return Err(config_err!(
                "distortion matrix has {} rows but |X| = {x}",
                d.rows()
            ));
        }
        if let Some(i) = p_x.mass().iter().position(|&p| p <= 0.0) {
            return Err(config_err!("P_X({i}) must be strictly positive"));
        }
        Ok(Self { p_x, w, d })
    }

    pub fn p_x(&self) -> &Distribution {
        &self.p_x
    }

    pub fn channel(&self) -> &Channel {
        &self.w
    }

    pub fn distortion(&self) -> &DistortionMatrix {
        &self.d
    }

    pub fn x_size(&self) -> usize {
        self.w.sizes().0
    }

    pub fn j_size(&self) -> usize {
        self.w.sizes().1
    }

    pub fn y_size(&self) -> usize {
        self.w.sizes().2
    }

    pub fn z_size(&self) -> usize {
        self.w.sizes().3
    }

    pub fn xhat_size(&self) -> usize {
        self.d.cols()
    }

    /// Number of symbolwise deterministic jammers, `|J|^|X|`.
    pub fn num_deterministic_jammers(&self) -> usize {
        self.j_size().saturating_pow(self.x_size() as u32)
    }

    /// The `k`-th deterministic jammer map `x -> j`, with `j(0)` the most
    /// significant digit.
    pub fn deterministic_jammer(&self, k: usize) -> Vec<usize> {
        let (x, j) = (self.x_size(), self.j_size());
        let mut map = vec![0; x];
        let mut rest = k;
        for xi in (0..x).rev() {
            map[xi] = rest % j;
            rest /= j;
        }
        map
    }

    /// `A(x, y, z) = P_X(x) Σ_j Q(j|x) W(y,z|x,j)` for a flat `|X|×|J|` jammer.
    pub fn weighted_xyz(&self, q: &[f64]) -> Vec<f64> {
        let (xs, js, ys, zs) = self.w.sizes();
        let yz = ys * zs;
        let mut out = vec![0.0; xs * yz];
        for x in 0..xs {
            let px = self.p_x.get(x);
            let dst = &mut out[x * yz..(x + 1) * yz];
            for j in 0..js {
                let wq = px * q[x * js + j];
                if wq == 0.0 {
                    continue;
                }
                for (o, &w) in dst.iter_mut().zip(self.w.row(x, j)) {
                    *o += wq * w;
                }
            }
        }
        out
    }

    /// Same as [`weighted_xyz`](Self::weighted_xyz) for a deterministic jammer map.
    pub fn weighted_xyz_map(&self, map: &[usize]) -> Vec<f64> {
        let (xs, _, ys, zs) = self.w.sizes();
        let yz = ys * zs;
        let mut out = vec![0.0; xs * yz];
        for x in 0..xs {
            let px = self.p_x.get(x);
            for (o, &w) in out[x * yz..(x + 1) * yz]
                .iter_mut()
                .zip(self.w.row(x, map[x]))
            {
                *o = px * w;
            }
        }
        out
    }

    /// Induced `P(y, z)` (flat, `y`-major) under a flat jammer.
    pub fn induced_yz(&self, q: &[f64]) -> Vec<f64> {
        self.marginal_yz(&self.weighted_xyz(q))
    }

    /// Induced `P(y)` under a flat jammer.
    pub fn induced_y(&self, q: &[f64]) -> Vec<f64> {
        let zs = self.z_size();
        self.induced_yz(q)
            .chunks_exact(zs)
            .map(|r| r.iter().sum())
            .collect()
    }

    pub(crate) fn marginal_yz(&self, a: &[f64]) -> Vec<f64> {
        let yz = self.y_size() * self.z_size();
        let mut out = vec![0.0; yz];
        for row in a.chunks_exact(yz) {
            for (o, &v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out
    }

    /// `B(y, z, x̃) = Σ_x A(x, y, z) d(x, x̃)`, flat `[y][z][x̃]`.
    pub(crate) fn distortion_table(&self, a: &[f64]) -> Vec<f64> {
        let (xs, _, ys, zs) = self.w.sizes();
        let xh = self.xhat_size();
        let yz = ys * zs;
        let mut out = vec![0.0; yz * xh];
        for x in 0..xs {
            for c in 0..yz {
                let m = a[x * yz + c];
                if m == 0.0 {
                    continue;
                }
                for t in 0..xh {
                    out[c * xh + t] += m * self.d.get(x, t);
                }
            }
        }
        out
    }
}

/// A test channel `P(u|y)` with a reconstruction map `ζ(u, z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryPolicy {
    p_uy: CondDistribution,
    zeta: Vec<Vec<usize>>,
}

impl AuxiliaryPolicy {
    /// `zeta` is indexed `[u][z]`.
    pub fn new(p_uy: CondDistribution, zeta: Vec<Vec<usize>>) -> Result<Self> {
        if zeta.len() != p_uy.to_size() {
            return Err(config_err!(
                "zeta has {} rows but P(u|y) has |U| = {}",
                zeta.len(),
                p_uy.to_size()
            ));
        }
        let zs = zeta.first().map_or(0, |r| r.len());
        if zs == 0 || zeta.iter().any(|r| r.len() != zs) {
            return Err(config_err!(
                "zeta rows must all have the same non-zero length"
            ));
        }
        Ok(Self { p_uy, zeta })
    }

    /// Checks alphabet sizes against a problem.
    pub fn check(&self, spec: &ProblemSpec) -> Result<()> {
        if self.p_uy.from_size() != spec.y_size() {
            return Err(config_err!(
                "policy conditions on {} y symbols, problem has |Y| = {}",
                self.p_uy.from_size(),
                spec.y_size()
            ));
        }
        if self.zeta[0].len() != spec.z_size() {
            return Err(config_err!(
                "zeta covers {} z symbols, problem has |Z| = {}",
                self.zeta[0].len(),
                spec.z_size()
            ));
        }
        if let Some((u, z)) = self.zeta.iter().enumerate().find_map(|(u, r)| {
            r.iter()
                .position(|&t| t >= spec.xhat_size())
                .map(|z| (u, z))
        }) {
            return Err(config_err!("zeta[{u}][{z}] is not a reconstruction symbol"));
        }
        Ok(())
    }

    pub fn u_size(&self) -> usize {
        self.p_uy.to_size()
    }

    pub fn p_uy(&self) -> &CondDistribution {
        &self.p_uy
    }

    pub fn zeta(&self) -> &[Vec<usize>] {
        &self.zeta
    }

    #[inline]
    pub fn reconstruct(&self, u: usize, z: usize) -> usize {
        self.zeta[u][z]
    }

    /// `P_U = Σ_y T(y) P(u|y)`.
    pub fn output_distribution(&self, t_y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.u_size()];
        for (y, &ty) in t_y.iter().enumerate() {
            for (o, &p) in out.iter_mut().zip(self.p_uy.row(y)) {
                *o += ty * p;
            }
        }
        out
    }

    /// Worst-case expected distortion over deterministic jammers.
    pub fn worst_distortion(&self, spec: &ProblemSpec) -> f64 {
        (0..spec.num_deterministic_jammers())
            .map(|k| {
                self.distortion_under(spec, &spec.weighted_xyz_map(&spec.deterministic_jammer(k)))
            })
            .fold(0.0, f64::max)
    }

    /// Expected distortion for the given `A(x, y, z)` table.
    pub fn distortion_under(&self, spec: &ProblemSpec, a: &[f64]) -> f64 {
        let b = spec.distortion_table(a);
        let (zs, xh) = (spec.z_size(), spec.xhat_size());
        let mut total = 0.0;
        for y in 0..spec.y_size() {
            for (u, &p) in self.p_uy.row(y).iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for z in 0..zs {
                    total += p * b[(y * zs + z) * xh + self.zeta[u][z]];
                }
            }
        }
        total
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Uniform binary source, `Y = X xor J`, `Z` constant, Hamming.
    pub(crate) fn xor_spec() -> ProblemSpec {
        ProblemSpec::new(
            Distribution::uniform(2),
            Channel::deterministic(2, 2, 2, 1, |x, j| (x ^ j, 0)).unwrap(),
            DistortionMatrix::hamming(2),
        )
        .unwrap()
    }

    #[test]
    fn rejects_zero_mass_source_symbol() {
        let r = ProblemSpec::new(
            Distribution::new(vec![1.0, 0.0]).unwrap(),
            Channel::deterministic(2, 1, 2, 1, |x, _| (x, 0)).unwrap(),
            DistortionMatrix::hamming(2),
        );
        assert!(matches!(r, Err(crate::Error::Config(_))));
    }

    #[test]
    fn deterministic_jammers_are_lexicographic() {
        let s = xor_spec();
        let maps: Vec<_> = (0..s.num_deterministic_jammers())
            .map(|k| s.deterministic_jammer(k))
            .collect();
        assert_eq!(maps, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn induced_marginal_matches_direct_sum() {
        let s = xor_spec();
        let q = [0.7, 0.3, 0.2, 0.8];
        let py = s.induced_y(&q);
        // y=0: x=0,j=0 or x=1,j=1
        assert!((py[0] - (0.5 * 0.7 + 0.5 * 0.8)).abs() < 1e-15);
        assert!((py[1] - (0.5 * 0.3 + 0.5 * 0.2)).abs() < 1e-15);
    }

    #[test]
    fn policy_distortion_matches_joint_evaluation() {
        let s = xor_spec();
        let pol = AuxiliaryPolicy::new(
            CondDistribution::deterministic(&[0, 1], 2).unwrap(),
            vec![vec![0], vec![1]],
        )
        .unwrap();
        pol.check(&s).unwrap();
        // identity estimate: error iff j = 1
        let a = s.weighted_xyz(&[0.6, 0.4, 0.9, 0.1]);
        assert!((pol.distortion_under(&s, &a) - (0.5 * 0.4 + 0.5 * 0.1)).abs() < 1e-15);
        assert_eq!(pol.worst_distortion(&s), 1.0);
    }
}
