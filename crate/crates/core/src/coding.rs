//! The binned joint-typicality code at blocklength `n`.
//!
//! For every type `T` of the encoder's observation there is a separate binned
//! codebook with `2^{n R_U(T)}` codewords drawn i.i.d. from `P_U = [P(u|y) T]_U`,
//! split into `2^{n R(T)}` bins. Codewords are never stored: codeword `(j, k)`
//! is regenerated on demand from a ChaCha8 stream keyed by the code seed, a
//! digest of the type and the index pair. Codeword `(j, k)` lives in bin `j`.
//!
//! The encoder picks, uniformly at random, a codeword jointly typical with `y`
//! and sends its bin index together with the type of `y`. The decoder lists
//! the codewords of that bin that look jointly typical with `z` under some
//! jammer type consistent with the type of `y`, and takes the unique member
//! (or the bin's first codeword).

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use rand_core::RngCore;

use crate::adversary::{sample_jamming, JammerStrategy};
use crate::error::usage_err;
use crate::exec::Executor;
use crate::math;
use crate::problem::{AuxiliaryPolicy, ProblemSpec};
use crate::seed;
use crate::singleletter::{per_type_rates, GridConfig, TypeRates};
use crate::typeclass::{empirical_type, is_typical, valid_jammer_types, SymbolVector, TypeTable};
use crate::{Error, Result};

/// Slack added to typicality comparisons so thresholds that are exact
/// multiples of `1/n` are not lost to rounding.
const TYPE_SLACK: f64 = 1e-12;

/// Default codebook size cap.
pub const DEFAULT_SIZE_CAP: u64 = 1 << 20;

/// Tolerances of the scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodeParams {
    pub eps: f64,
    /// Encoder joint-typicality threshold.
    pub delta2: f64,
    /// Decoder list threshold.
    pub gamma: f64,
    /// Tolerance between a jammer's induced `Y` marginal and the type of `y`.
    pub f_eps: f64,
    /// Maximum number of codewords per type.
    pub size_cap: u64,
}

impl CodeParams {
    /// `δ₂ = 2ε`, `γ = 4ε`, `f(ε) = ε`, cap `2^20`.
    pub fn from_eps(eps: f64) -> Self {
        Self {
            eps,
            delta2: 2.0 * eps,
            gamma: 4.0 * eps,
            f_eps: eps,
            size_cap: DEFAULT_SIZE_CAP,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(usage_err!("eps must be positive"));
        }
        if !(self.delta2 >= 0.0 && self.gamma >= 0.0 && self.f_eps >= 0.0) {
            return Err(usage_err!("delta2, gamma and f(eps) must be non-negative"));
        }
        if self.size_cap == 0 {
            return Err(usage_err!("size cap must be at least 1"));
        }
        Ok(())
    }
}

fn count_for(bits: f64) -> u64 {
    let v = math::ceil(math::exp2(bits));
    if v >= u64::MAX as f64 {
        u64::MAX
    } else {
        (v as u64).max(1)
    }
}

/// Seed-independent part of the codebook for one type: rates, sizes and the
/// typicality targets of encoder and decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeCode {
    t_y: TypeTable,
    n: usize,
    rates: TypeRates,
    p_u: Vec<f64>,
    cdf: Vec<f64>,
    digest: u64,
    nominal_codewords: u64,
    num_bins: u64,
    bin_size: u64,
    truncated: bool,
    us: usize,
    ys: usize,
    zs: usize,
    /// `T(y) P(u|y)`, flat `[u][y]`.
    enc_target: Vec<f64>,
    /// `[P_X T_{J|X} W P(u|y)]_{U,Z}` for every admissible jammer type, flat `[u][z]`.
    dec_targets: Vec<Vec<f64>>,
}

impl TypeCode {
    pub fn new(
        t_y: &TypeTable,
        spec: &ProblemSpec,
        policy: &AuxiliaryPolicy,
        params: &CodeParams,
        grid: &GridConfig,
    ) -> Result<Self> {
        params.validate()?;
        policy.check(spec)?;
        let n = t_y.n() as usize;
        let rates = per_type_rates(t_y, policy, spec, params.eps, params.f_eps, grid)?;
        let (us, ys, zs) = (policy.u_size(), spec.y_size(), spec.z_size());
        let t = t_y.to_vec();
        let p_u = policy.output_distribution(&t);
        let cdf = seed::cdf_of(&p_u);
        let nf = n as f64;
        let nominal_codewords = count_for(nf * rates.r_u);
        let mut num_bins = count_for(nf * rates.r_bin);
        let mut bin_size = count_for(nf * rates.r_tilde.min(rates.r_u));
        let mut truncated = false;
        if num_bins.saturating_mul(bin_size) > params.size_cap {
            truncated = true;
            num_bins = num_bins.min(params.size_cap);
            bin_size = bin_size.min(params.size_cap / num_bins).max(1);
        }
        let mut enc_target = vec![0.0; us * ys];
        for y in 0..ys {
            for u in 0..us {
                enc_target[u * ys + y] = t[y] * policy.p_uy().get(y, u);
            }
        }
        let mut dec_targets: Vec<Vec<f64>> = valid_jammer_types(t_y, spec, params.f_eps, n as u64)?
            .iter()
            .map(|q| {
                let a = spec.weighted_xyz(q.as_flat());
                let yz = spec.marginal_yz(&a);
                let mut target = vec![0.0; us * zs];
                for y in 0..ys {
                    for z in 0..zs {
                        let m = yz[y * zs + z];
                        for u in 0..us {
                            target[u * zs + z] += m * policy.p_uy().get(y, u);
                        }
                    }
                }
                target
            })
            .collect();
        dec_targets.sort_by(|a, b| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(core::cmp::Ordering::Equal)
        });
        dec_targets.dedup();
        let digest = seed::digest_words(t_y.counts().iter().copied().chain([n as u64]));
        Ok(Self {
            t_y: t_y.clone(),
            n,
            rates,
            p_u,
            cdf,
            digest,
            nominal_codewords,
            num_bins,
            bin_size,
            truncated,
            us,
            ys,
            zs,
            enc_target,
            dec_targets,
        })
    }

    pub fn t_y(&self) -> &TypeTable {
        &self.t_y
    }

    pub fn rates(&self) -> &TypeRates {
        &self.rates
    }

    pub fn num_bins(&self) -> u64 {
        self.num_bins
    }

    pub fn bin_size(&self) -> u64 {
        self.bin_size
    }

    /// `ceil(2^{n R_U})`, before any truncation.
    pub fn nominal_codewords(&self) -> u64 {
        self.nominal_codewords
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn p_u(&self) -> &[f64] {
        &self.p_u
    }

    /// Number of admissible decoder targets (distinct jammer-type joints).
    pub fn decoder_targets(&self) -> usize {
        self.dec_targets.len()
    }

    /// Bits needed for the bin index.
    pub fn message_bits(&self) -> u32 {
        ceil_log2(self.num_bins)
    }
}

/// `⌈log₂ k⌉` for `k ≥ 1`.
pub fn ceil_log2(k: u64) -> u32 {
    if k <= 1 {
        0
    } else {
        64 - (k - 1).leading_zeros()
    }
}

/// A realized codebook: a type's design plus the code seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    design: Arc<TypeCode>,
    seed: u64,
}

/// Builds the codebook for type `t_y` (codewords are generated lazily).
pub fn build_codebook(
    t_y: &TypeTable,
    policy: &AuxiliaryPolicy,
    spec: &ProblemSpec,
    params: &CodeParams,
    seed: u64,
    grid: &GridConfig,
) -> Result<Codebook> {
    Ok(Codebook {
        design: Arc::new(TypeCode::new(t_y, spec, policy, params, grid)?),
        seed,
    })
}

impl Codebook {
    pub fn type_code(&self) -> &TypeCode {
        &self.design
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n(&self) -> usize {
        self.design.n
    }

    pub fn num_bins(&self) -> u64 {
        self.design.num_bins
    }

    pub fn bin_size(&self) -> u64 {
        self.design.bin_size
    }

    /// Writes codeword `(j, k)` into `out` (length `n`).
    fn fill(&self, j: u64, k: u64, out: &mut [usize]) {
        let mut rng =
            seed::rng_from_seed(seed::digest_words([self.seed, self.design.digest, j, k]));
        for o in out.iter_mut() {
            *o = seed::sample_cdf(&mut rng, &self.design.cdf);
        }
    }

    pub fn codeword(&self, j: u64, k: u64) -> Result<SymbolVector> {
        if j >= self.design.num_bins || k >= self.design.bin_size {
            return Err(usage_err!(
                "codeword ({j}, {k}) outside {} bins of size {}",
                self.design.num_bins,
                self.design.bin_size
            ));
        }
        let mut out = vec![0; self.design.n];
        self.fill(j, k, &mut out);
        Ok(SymbolVector::new(self.design.us, out).expect("codeword symbols come from P_U"))
    }

    /// `max |T_{u,y} - T(y)P(u|y)|` for codeword symbols `u` and block `y`.
    fn encoder_deviation(&self, u: &[usize], y: &[usize], counts: &mut [u32]) -> f64 {
        let ys = self.design.ys;
        counts.iter_mut().for_each(|c| *c = 0);
        for (&a, &b) in u.iter().zip(y) {
            counts[a * ys + b] += 1;
        }
        let n = self.design.n as f64;
        counts
            .iter()
            .zip(&self.design.enc_target)
            .map(|(&c, &t)| math::abs(c as f64 / n - t))
            .fold(0.0, f64::max)
    }

    fn in_list(
        &self,
        u: &[usize],
        z: &[usize],
        gamma: f64,
        counts: &mut [u32],
        freq: &mut [f64],
    ) -> bool {
        let zs = self.design.zs;
        counts.iter_mut().for_each(|c| *c = 0);
        for (&a, &b) in u.iter().zip(z) {
            counts[a * zs + b] += 1;
        }
        let n = self.design.n as f64;
        for (f, &c) in freq.iter_mut().zip(counts.iter()) {
            *f = c as f64 / n;
        }
        self.design.dec_targets.iter().any(|t| {
            freq.iter()
                .zip(t)
                .all(|(a, b)| math::abs(a - b) <= gamma + TYPE_SLACK)
        })
    }
}

/// Encoder output.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodeResult {
    pub t_y: TypeTable,
    /// Bin index `M`.
    pub bin: u64,
    /// Chosen codeword `(M, L)`.
    pub index: (u64, u64),
    /// No codeword met the typicality condition; `(0, 0)` was sent.
    pub fallback_used: bool,
    /// Number of codewords meeting the condition.
    pub satisfiers: u64,
}

/// Picks uniformly among the codewords with `‖T_{u,y} - P(u|y)T_y‖∞ ≤ δ₂`.
pub fn encode<R: RngCore + ?Sized>(
    y: &SymbolVector,
    cb: &Codebook,
    delta2: f64,
    rng: &mut R,
) -> Result<EncodeResult> {
    let t_y = empirical_type(y);
    if t_y != cb.design.t_y {
        return Err(usage_err!("block type does not match the codebook's type"));
    }
    let n = cb.design.n;
    let mut u = vec![0usize; n];
    let mut counts = vec![0u32; cb.design.us * cb.design.ys];
    let mut hits: Vec<(u64, u64)> = Vec::new();
    for j in 0..cb.design.num_bins {
        for k in 0..cb.design.bin_size {
            cb.fill(j, k, &mut u);
            if cb.encoder_deviation(&u, y.symbols(), &mut counts) <= delta2 + TYPE_SLACK {
                hits.push((j, k));
            }
        }
    }
    let satisfiers = hits.len() as u64;
    let (index, fallback_used) = if hits.is_empty() {
        ((0, 0), true)
    } else {
        (hits[seed::uniform_index(rng, satisfiers) as usize], false)
    };
    Ok(EncodeResult {
        t_y,
        bin: index.0,
        index,
        fallback_used,
        satisfiers,
    })
}

/// Whether `u` meets the encoder condition for `y` (used to audit encoders).
pub fn meets_encoder_condition(
    cb: &Codebook,
    u: &SymbolVector,
    y: &SymbolVector,
    delta2: f64,
) -> bool {
    let mut counts = vec![0u32; cb.design.us * cb.design.ys];
    u.len() == y.len()
        && cb.encoder_deviation(u.symbols(), y.symbols(), &mut counts) <= delta2 + TYPE_SLACK
}

/// Decoder output.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// Chosen codeword `(m, l̃)`.
    pub index: (u64, u64),
    pub codeword: SymbolVector,
    /// Indices `l` of the bin's codewords in the decoding list.
    pub list: Vec<u64>,
}

/// Decodes bin `m` with side information `z`. Deterministic in its inputs.
pub fn decode(m: u64, z: &SymbolVector, cb: &Codebook, gamma: f64) -> Result<DecodeResult> {
    if m >= cb.design.num_bins {
        return Err(usage_err!("bin {m} outside {} bins", cb.design.num_bins));
    }
    let n = cb.design.n;
    if z.len() != n {
        return Err(usage_err!(
            "side information has length {}, code has n = {n}",
            z.len()
        ));
    }
    let mut u = vec![0usize; n];
    let mut counts = vec![0u32; cb.design.us * cb.design.zs];
    let mut freq = vec![0.0; counts.len()];
    let mut list = Vec::new();
    for k in 0..cb.design.bin_size {
        cb.fill(m, k, &mut u);
        if cb.in_list(&u, z.symbols(), gamma, &mut counts, &mut freq) {
            list.push(k);
        }
    }
    let l = if list.len() == 1 { list[0] } else { 0 };
    Ok(DecodeResult {
        index: (m, l),
        codeword: cb.codeword(m, l)?,
        list,
    })
}

/// `x̂_i = ζ(u_i, z_i)`.
pub fn reconstruct(
    u: &SymbolVector,
    z: &SymbolVector,
    policy: &AuxiliaryPolicy,
    xhat_size: usize,
) -> Result<SymbolVector> {
    if u.len() != z.len() {
        return Err(usage_err!(
            "reconstruction needs equal lengths, got {} and {}",
            u.len(),
            z.len()
        ));
    }
    let out = u
        .symbols()
        .iter()
        .zip(z.symbols())
        .map(|(&a, &b)| policy.reconstruct(a, b))
        .collect();
    SymbolVector::new(xhat_size, out)
}

/// `(1/n) Σ d(x_i, x̂_i)`.
pub fn block_distortion(spec: &ProblemSpec, x: &SymbolVector, x_hat: &SymbolVector) -> f64 {
    let total: f64 = x
        .symbols()
        .iter()
        .zip(x_hat.symbols())
        .map(|(&a, &b)| spec.distortion().get(a, b))
        .sum();
    total / x.len() as f64
}

/// The full scheme for one blocklength: every type's codebook design.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeDesign {
    spec: ProblemSpec,
    policy: AuxiliaryPolicy,
    n: usize,
    params: CodeParams,
    types: BTreeMap<Vec<u64>, Arc<TypeCode>>,
}

fn all_counts(n: u64, parts: usize) -> Vec<Vec<u64>> {
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
    rec(0, n, &mut cur, &mut out);
    out
}

impl CodeDesign {
    /// Precomputes the design of every `Y`-type at blocklength `n`.
    pub fn new<E: Executor>(
        spec: &ProblemSpec,
        policy: &AuxiliaryPolicy,
        n: usize,
        params: CodeParams,
        grid: &GridConfig,
        exec: &E,
    ) -> Result<Self> {
        if n == 0 {
            return Err(usage_err!("blocklength must be positive"));
        }
        params.validate()?;
        policy.check(spec)?;
        let counts = all_counts(n as u64, spec.y_size());
        let built = exec.map_indexed(counts.len(), |i| {
            let t = TypeTable::from_counts(vec![spec.y_size()], counts[i].clone())?;
            TypeCode::new(&t, spec, policy, &params, grid)
        });
        let mut types = BTreeMap::new();
        for (c, tc) in counts.into_iter().zip(built) {
            types.insert(c, Arc::new(tc?));
        }
        Ok(Self {
            spec: spec.clone(),
            policy: policy.clone(),
            n,
            params,
            types,
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn policy(&self) -> &AuxiliaryPolicy {
        &self.policy
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn type_codes(&self) -> impl Iterator<Item = &TypeCode> {
        self.types.values().map(|t| t.as_ref())
    }

    pub fn codebook(&self, t_y: &TypeTable, seed: u64) -> Result<Codebook> {
        let design = self
            .types
            .get(t_y.counts())
            .filter(|tc| tc.t_y == *t_y)
            .ok_or_else(|| usage_err!("no codebook for type {:?}", t_y.counts()))?;
        Ok(Codebook {
            design: Arc::clone(design),
            seed,
        })
    }

    /// `max_T R(T)`, the largest bin rate over all types.
    pub fn max_bin_rate(&self) -> f64 {
        self.type_codes().map(|t| t.rates.r_bin).fold(0.0, f64::max)
    }

    /// Largest bin-index length in bits over all types.
    pub fn max_message_bits(&self) -> u32 {
        self.type_codes()
            .map(|t| t.message_bits())
            .max()
            .unwrap_or(0)
    }

    /// Some type's codebook was truncated by the size cap.
    pub fn any_truncated(&self) -> bool {
        self.type_codes().any(|t| t.truncated)
    }
}

/// Everything that happened in one coding session.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionReport {
    pub x: SymbolVector,
    pub j: SymbolVector,
    pub y: SymbolVector,
    pub z: SymbolVector,
    pub u_encoded: SymbolVector,
    pub u_decoded: SymbolVector,
    pub x_hat: SymbolVector,
    pub encoded_index: (u64, u64),
    pub decoded_index: (u64, u64),
    pub distortion: f64,
    /// No codeword met the encoder condition.
    pub e_enc: bool,
    /// The encoder's codeword is not in the decoding list.
    pub e_dec1: bool,
    /// Another codeword of the bin is in the decoding list.
    pub e_dec2: bool,
    /// Decoding list (indices within the bin).
    pub list: Vec<u64>,
    /// Codewords per bin.
    pub bin_size: u64,
    /// Bits spent on the bin index.
    pub message_bits: u32,
    /// The codebook for this block's type was truncated.
    pub truncated: bool,
}

/// Draws `(y, z)` memorylessly from the channel.
pub fn channel_outputs<R: RngCore + ?Sized>(
    spec: &ProblemSpec,
    x: &SymbolVector,
    j: &SymbolVector,
    rng: &mut R,
) -> (SymbolVector, SymbolVector) {
    let (xs, js, ys, zs) = spec.channel().sizes();
    let cdfs: Vec<Vec<f64>> = (0..xs * js)
        .map(|r| seed::cdf_of(spec.channel().row(r / js, r % js)))
        .collect();
    let mut y = Vec::with_capacity(x.len());
    let mut z = Vec::with_capacity(x.len());
    for (&a, &b) in x.symbols().iter().zip(j.symbols()) {
        let idx = seed::sample_cdf(rng, &cdfs[a * js + b]);
        y.push(idx / zs);
        z.push(idx % zs);
    }
    (
        SymbolVector::new(ys, y).expect("channel output"),
        SymbolVector::new(zs, z).expect("channel output"),
    )
}

/// Runs one block through jammer, channel, encoder, decoder and
/// reconstruction. The codebook (shared randomness) comes from `code_seed`;
/// jamming and channel noise come from `session_seed`. The encoder's
/// tie-breaking is keyed by the code seed and `y`, so a fixed code seed gives
/// a deterministic code.
pub fn simulate_session(
    x: &SymbolVector,
    jammer: &JammerStrategy,
    design: &CodeDesign,
    code_seed: u64,
    session_seed: u64,
) -> Result<SessionReport> {
    let spec = &design.spec;
    if x.len() != design.n || x.alphabet_size() != spec.x_size() {
        return Err(usage_err!("source block does not match the code"));
    }
    let mut jam_rng = seed::rng_from_seed(seed::derive(session_seed, "jammer", 0));
    let j = sample_jamming(jammer, x, spec.j_size(), &mut jam_rng);
    let mut ch_rng = seed::rng_from_seed(seed::derive(session_seed, "channel", 0));
    let (y, z) = channel_outputs(spec, x, &j, &mut ch_rng);
    let t_y = empirical_type(&y);
    let cb = design.codebook(&t_y, code_seed)?;
    let y_digest = seed::digest_words(y.symbols().iter().map(|&s| s as u64));
    let mut enc_rng = seed::rng_from_seed(seed::derive(code_seed, "encoder", y_digest));
    let enc = encode(&y, &cb, design.params.delta2, &mut enc_rng)?;
    let dec = decode(enc.bin, &z, &cb, design.params.gamma)?;
    let x_hat = reconstruct(&dec.codeword, &z, &design.policy, spec.xhat_size())?;
    let distortion = block_distortion(spec, x, &x_hat);
    let u_encoded = cb.codeword(enc.index.0, enc.index.1)?;
    Ok(SessionReport {
        e_enc: enc.fallback_used,
        e_dec1: !dec.list.contains(&enc.index.1),
        e_dec2: dec.list.iter().any(|&l| l != enc.index.1),
        message_bits: cb.type_code().message_bits(),
        bin_size: cb.bin_size(),
        truncated: cb.type_code().truncated,
        encoded_index: enc.index,
        decoded_index: dec.index,
        x: x.clone(),
        j,
        y,
        z,
        u_encoded,
        u_decoded: dec.codeword,
        list: dec.list,
        x_hat,
        distortion,
    })
}

/// Sample mean and standard error of the mean.
pub fn mean_and_std_err(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, math::sqrt(var / n))
}

/// Draws a `δ₀`-typical source block by rejection (up to `attempts` draws).
pub fn sample_typical_source(
    spec: &ProblemSpec,
    n: usize,
    delta0: f64,
    seed_value: u64,
    attempts: usize,
) -> Result<SymbolVector> {
    let cdf = seed::cdf_of(spec.p_x().mass());
    let mut rng = seed::rng_from_seed(seed_value);
    for _ in 0..attempts {
        let x: Vec<usize> = (0..n).map(|_| seed::sample_cdf(&mut rng, &cdf)).collect();
        let x = SymbolVector::new(spec.x_size(), x)?;
        if is_typical(&x, spec.p_x(), delta0) {
            return Ok(x);
        }
    }
    Err(Error::Diagnostic(alloc::format!(
        "no {delta0}-typical source block of length {n} found in {attempts} draws"
    )))
}

/// The `count` typical source blocks an estimate with master seed `seed_value`
/// runs on.
pub fn sample_sources(
    spec: &ProblemSpec,
    n: usize,
    delta0: f64,
    seed_value: u64,
    count: usize,
) -> Result<Vec<SymbolVector>> {
    (0..count)
        .map(|s| {
            sample_typical_source(
                spec,
                n,
                delta0,
                seed::derive(seed_value, "source", s as u64),
                10_000,
            )
        })
        .collect()
}

/// Default `δ₀(n) = n^{-1/3}`.
pub fn default_delta0(n: usize) -> f64 {
    math::powf(n as f64, -1.0 / 3.0)
}

/// One `(source block, jammer)` cell of a distortion estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionCell {
    pub x_index: usize,
    pub jammer_index: usize,
    pub mean: f64,
    pub std_err: f64,
    pub e_enc: usize,
    pub e_dec1: usize,
    pub e_dec2: usize,
    /// Per-trial distortions in trial order.
    pub distortions: Vec<f64>,
    /// Per-trial error flags `(E_enc, E_dec1, E_dec2)`.
    pub flags: Vec<(bool, bool, bool)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistortionReport {
    pub n: usize,
    pub delta0: f64,
    pub trials: usize,
    pub sources: Vec<SymbolVector>,
    pub cells: Vec<DistortionCell>,
    /// Largest cell mean (0 when there are no trials).
    pub max: f64,
    pub max_std_err: f64,
    pub argmax: Option<(usize, usize)>,
}

/// Settings of [`max_distortion_estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateSettings {
    /// Number of `δ₀`-typical source blocks sampled.
    pub sources: usize,
    pub trials: usize,
    /// Defaults to `n^{-1/3}`.
    pub delta0: Option<f64>,
    pub seed: u64,
    /// Fixed code seed (a deterministic code); `None` draws a fresh code per
    /// session, i.e. the randomized code.
    pub code_seed: Option<u64>,
}

/// Monte Carlo estimate of the maximum, over sampled typical source blocks and
/// the given jammers, of the expected block distortion.
pub fn max_distortion_estimate<E: Executor>(
    design: &CodeDesign,
    jammers: &[JammerStrategy],
    settings: &EstimateSettings,
    exec: &E,
) -> Result<DistortionReport> {
    for j in jammers {
        j.check(&design.spec)?;
    }
    let n = design.n;
    let delta0 = settings.delta0.unwrap_or_else(|| default_delta0(n));
    let sources = sample_sources(&design.spec, n, delta0, settings.seed, settings.sources)?;
    let cells_n = sources.len() * jammers.len();
    let trials = settings.trials;
    let outcomes = exec.map_indexed(cells_n * trials, |i| {
        let (cell, t) = (i / trials, i % trials);
        let (xi, ji) = (cell / jammers.len(), cell % jammers.len());
        // sessions depend on the source block and trial only, so every jammer
        // faces the same channel noise and codes
        let session = seed::derive(
            seed::derive(settings.seed, "x", xi as u64),
            "trial",
            t as u64,
        );
        let code = settings
            .code_seed
            .unwrap_or_else(|| seed::derive(session, "code", 0));
        simulate_session(&sources[xi], &jammers[ji], design, code, session)
            .map(|r| (r.distortion, (r.e_enc, r.e_dec1, r.e_dec2)))
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let mut cells = Vec::with_capacity(cells_n);
    for cell in 0..cells_n {
        let chunk = &outcomes[cell * trials..(cell + 1) * trials];
        let distortions: Vec<f64> = chunk.iter().map(|o| o.0).collect();
        let flags: Vec<(bool, bool, bool)> = chunk.iter().map(|o| o.1).collect();
        let (mean, std_err) = mean_and_std_err(&distortions);
        cells.push(DistortionCell {
            x_index: cell / jammers.len(),
            jammer_index: cell % jammers.len(),
            mean,
            std_err,
            e_enc: flags.iter().filter(|f| f.0).count(),
            e_dec1: flags.iter().filter(|f| f.1).count(),
            e_dec2: flags.iter().filter(|f| f.2).count(),
            distortions,
            flags,
        });
    }
    let mut argmax = None;
    let (mut max, mut max_std_err) = (0.0, 0.0);
    if trials > 0 {
        for c in &cells {
            if argmax.is_none() || c.mean > max {
                max = c.mean;
                max_std_err = c.std_err;
                argmax = Some((c.x_index, c.jammer_index));
            }
        }
    }
    Ok(DistortionReport {
        n,
        delta0,
        trials,
        sources,
        cells,
        max,
        max_std_err,
        argmax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{Channel, CondDistribution, DistortionMatrix, Distribution};
    use crate::Serial;

    fn identity_spec() -> ProblemSpec {
        ProblemSpec::new(
            Distribution::uniform(2),
            Channel::deterministic(2, 1, 2, 2, |x, _| (x, x)).unwrap(),
            DistortionMatrix::hamming(2),
        )
        .unwrap()
    }

    fn copy_policy(zs: usize) -> AuxiliaryPolicy {
        AuxiliaryPolicy::new(
            CondDistribution::deterministic(&[0, 1], 2).unwrap(),
            vec![vec![0; zs], vec![1; zs]],
        )
        .unwrap()
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(1024), 10);
        assert_eq!(ceil_log2(1025), 11);
    }

    #[test]
    fn sizes_follow_rates() {
        let spec = identity_spec();
        let pol = copy_policy(2);
        let t = TypeTable::from_counts(vec![2], vec![4, 4]).unwrap();
        let cb = build_codebook(
            &t,
            &pol,
            &spec,
            &CodeParams::from_eps(0.2),
            7,
            &GridConfig::default(),
        )
        .unwrap();
        let r = cb.type_code().rates();
        assert_eq!(
            cb.type_code().nominal_codewords(),
            (2f64.powf(8.0 * r.r_u)).ceil() as u64
        );
        assert!(cb.num_bins() * cb.bin_size() >= cb.type_code().nominal_codewords());
        assert!(!cb.type_code().truncated());
    }

    #[test]
    fn cap_truncates_and_flags() {
        let spec = identity_spec();
        let pol = copy_policy(2);
        let t = TypeTable::from_counts(vec![2], vec![8, 8]).unwrap();
        let params = CodeParams {
            size_cap: 16,
            ..CodeParams::from_eps(0.2)
        };
        let cb = build_codebook(&t, &pol, &spec, &params, 7, &GridConfig::default()).unwrap();
        assert!(cb.type_code().truncated());
        assert!(cb.num_bins() * cb.bin_size() <= 16);
    }

    #[test]
    fn codewords_are_pure_functions_of_their_key() {
        let spec = identity_spec();
        let pol = AuxiliaryPolicy::new(
            CondDistribution::new(vec![vec![0.7, 0.3], vec![0.4, 0.6]]).unwrap(),
            vec![vec![0, 0], vec![1, 1]],
        )
        .unwrap();
        let t = TypeTable::from_counts(vec![2], vec![3, 5]).unwrap();
        let params = CodeParams::from_eps(0.3);
        let a = build_codebook(&t, &pol, &spec, &params, 11, &GridConfig::default()).unwrap();
        let b = build_codebook(&t, &pol, &spec, &params, 11, &GridConfig::default()).unwrap();
        assert_eq!(a.codeword(0, 0).unwrap(), b.codeword(0, 0).unwrap());
        let c = build_codebook(&t, &pol, &spec, &params, 12, &GridConfig::default()).unwrap();
        let differs =
            (0..a.bin_size()).any(|k| a.codeword(0, k).unwrap() != c.codeword(0, k).unwrap());
        assert!(differs || a.bin_size() == 1);
        assert!(a.codeword(a.num_bins(), 0).is_err());
    }

    #[test]
    fn identity_channel_session_has_zero_distortion() {
        let spec = identity_spec();
        let pol = copy_policy(2);
        let design = CodeDesign::new(
            &spec,
            &pol,
            8,
            CodeParams::from_eps(0.2),
            &GridConfig::default(),
            &Serial,
        )
        .unwrap();
        let x = SymbolVector::new(2, vec![0, 1, 1, 0, 1, 0, 0, 1]).unwrap();
        // zeta(u, z) = z regardless of the codeword
        let zeta_z =
            AuxiliaryPolicy::new(pol.p_uy().clone(), vec![vec![0, 1], vec![0, 1]]).unwrap();
        let design_z = CodeDesign::new(
            &spec,
            &zeta_z,
            8,
            CodeParams::from_eps(0.2),
            &GridConfig::default(),
            &Serial,
        )
        .unwrap();
        for s in 0..5 {
            let r = simulate_session(&x, &JammerStrategy::trivial(&spec), &design_z, s, 100 + s)
                .unwrap();
            assert_eq!(r.distortion, 0.0);
            let again =
                simulate_session(&x, &JammerStrategy::trivial(&spec), &design_z, s, 100 + s)
                    .unwrap();
            assert_eq!(r, again);
        }
        let r = simulate_session(&x, &JammerStrategy::trivial(&spec), &design, 3, 4).unwrap();
        assert!((0.0..=1.0).contains(&r.distortion));
    }

    #[test]
    fn reconstruct_examples() {
        let pol = AuxiliaryPolicy::new(
            CondDistribution::uniform(2, 2),
            vec![vec![0, 1], vec![1, 1]],
        )
        .unwrap();
        let u = SymbolVector::new(2, vec![0, 0, 1, 1]).unwrap();
        let z = SymbolVector::new(2, vec![0, 1, 0, 1]).unwrap();
        assert_eq!(
            reconstruct(&u, &z, &pol, 2).unwrap().symbols(),
            &[0, 1, 1, 1]
        );
        assert!(reconstruct(&u, &SymbolVector::new(2, vec![0]).unwrap(), &pol, 2).is_err());
    }

    #[test]
    fn std_err_of_constant_sample_is_zero() {
        assert_eq!(mean_and_std_err(&[0.5, 0.5, 0.5]), (0.5, 0.0));
        let (m, s) = mean_and_std_err(&[0.0, 1.0]);
        assert_eq!(m, 0.5);
        assert!((s - 0.5).abs() < 1e-15);
    }
}
