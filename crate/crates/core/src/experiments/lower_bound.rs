//! Hypothesis family behind the minimax lower bound.
//!
//! The `n` items are split into `k` consecutive blocks. Block `b` sits at
//! level `Ṽ_min + bṼ/k`, and a binary codeword `ω ∈ {0,1}^k` lifts every
//! block with `ω_b = 1` by `γ = c·sqrt(σ²k/n)`. Codewords must be pairwise
//! far apart in Hamming distance (at least `k/8`) while the family stays
//! large (`|Ω| − 1 ≥ 2^{k/8}`).
//!
//! The codebook is a random binary linear code. Every pairwise difference of
//! codewords is itself a codeword, so the minimum over all pairs of any
//! shift-invariant distance equals the minimum over the nonzero codewords.
//! Enumerating the `2^r` codewords therefore checks all pairs exactly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expfam::{Family, ScoreBounds, VarianceCertificate};
use crate::rng::{substream, tag};

const MAX_RETRIES: u64 = 100;
const MAX_DIMENSION: usize = 28;
const GRID_POINTS: usize = 1024;

/// Binary linear code of length `length` spanned by `dimension` generator rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearCode {
    pub length: usize,
    /// Each row is a bitset over `length` bits, 64 bits per word, LSB first.
    pub generator: Vec<Vec<u64>>,
}

impl LinearCode {
    fn words(length: usize) -> usize {
        length.div_ceil(64)
    }

    fn random<R: Rng + ?Sized>(length: usize, dimension: usize, rng: &mut R) -> Self {
        let words = Self::words(length);
        let tail = length % 64;
        let generator = (0..dimension)
            .map(|_| {
                let mut row: Vec<u64> = (0..words).map(|_| rng.random()).collect();
                if tail != 0 {
                    row[words - 1] &= (1u64 << tail) - 1;
                }
                row
            })
            .collect();
        LinearCode { length, generator }
    }

    pub fn dimension(&self) -> usize {
        self.generator.len()
    }

    /// Number of codewords, `2^dimension`.
    pub fn size(&self) -> u64 {
        1u64 << self.dimension()
    }

    /// Visits every codeword (the zero word first) in Gray-code order.
    pub fn for_each_codeword(&self, mut visit: impl FnMut(&[u64])) {
        let mut word = vec![0u64; Self::words(self.length)];
        visit(&word);
        for g in 1..self.size() {
            let row = &self.generator[g.trailing_zeros() as usize];
            for (w, r) in word.iter_mut().zip(row) {
                *w ^= r;
            }
            visit(&word);
        }
    }

    /// All codewords as explicit bit vectors; only sensible for small codes.
    pub fn codewords(&self) -> Vec<Vec<bool>> {
        let mut out = Vec::with_capacity(self.size() as usize);
        self.for_each_codeword(|w| out.push(unpack(w, self.length)));
        out
    }
}

pub(crate) fn unpack(word: &[u64], length: usize) -> Vec<bool> {
    (0..length).map(|i| word[i / 64] >> (i % 64) & 1 == 1).collect()
}

fn weight(word: &[u64]) -> u32 {
    word.iter().map(|w| w.count_ones()).sum()
}

fn weight_masked(word: &[u64], mask: &[u64]) -> u32 {
    word.iter().zip(mask).map(|(w, m)| (w & m).count_ones()).sum()
}

/// Exhaustive invariant check of a construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundCheck {
    /// Minimum Hamming distance over all codeword pairs.
    pub min_hamming: u32,
    pub required_hamming: f64,
    /// Minimum `‖μ^ω − μ^ω′‖²` over all pairs.
    pub min_sq_distance: f64,
    /// `(c²/8)σ²k`.
    pub required_sq_distance: f64,
    /// `max_ω KL(P_ω ‖ P_0)`.
    pub max_kl: f64,
    /// `γ²n / (2C_var²σ²)`.
    pub kl_chain_bound: f64,
    /// `(1/8) ln(|Ω| − 1)`.
    pub kl_limit: f64,
    /// Every `KL(P_ω ‖ P_0) ≤ ‖μ^ω − μ^0‖² / (2C_var²σ²)`.
    pub kl_pointwise_ok: bool,
    /// Every level lies in `[Ṽ_min, Ṽ_max]`.
    pub range_ok: bool,
}

impl LowerBoundCheck {
    pub fn all_hold(&self) -> bool {
        self.min_hamming as f64 >= self.required_hamming
            && self.min_sq_distance >= self.required_sq_distance * (1.0 - 1e-12)
            && self.max_kl <= self.kl_chain_bound * (1.0 + 1e-12)
            && self.max_kl < self.kl_limit
            && self.kl_pointwise_ok
            && self.range_ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundConstruction {
    pub family: Family,
    pub bounds: ScoreBounds,
    pub n: usize,
    pub c: f64,
    pub certificate: VarianceCertificate,
    pub k: usize,
    pub gamma: f64,
    /// Items per block; the remainder of `n/k` goes to the last blocks.
    pub block_sizes: Vec<usize>,
    /// Unperturbed mean of each block.
    pub levels: Vec<f64>,
    pub code: LinearCode,
    pub attempts: u64,
    pub check: LowerBoundCheck,
}

impl LowerBoundConstruction {
    /// `|Ω|`, including the zero codeword.
    pub fn omega_size(&self) -> u64 {
        self.code.size()
    }

    /// `μ^ω` for a codeword given as `k` bits.
    pub fn mu_for(&self, omega: &[bool]) -> Result<Vec<f64>> {
        if omega.len() != self.k {
            return Err(Error::LengthMismatch {
                expected: self.k,
                found: omega.len(),
            });
        }
        let mut mu = Vec::with_capacity(self.n);
        for (b, &size) in self.block_sizes.iter().enumerate() {
            let v = self.levels[b] + if omega[b] { self.gamma } else { 0.0 };
            mu.extend(std::iter::repeat_n(v, size));
        }
        Ok(mu)
    }

    /// Natural parameters of `μ^ω`.
    pub fn theta_for(&self, omega: &[bool]) -> Result<Vec<f64>> {
        self.mu_for(omega)?
            .into_iter()
            .map(|m| self.family.natural_param(m))
            .collect()
    }

    /// Re-runs the exhaustive check over the whole codebook.
    pub fn verify(&self) -> Result<LowerBoundCheck> {
        check_construction(
            &self.family,
            &self.certificate,
            self.n,
            self.c,
            self.k,
            self.gamma,
            &self.block_sizes,
            &self.levels,
            &self.code,
        )
    }
}

fn block_sizes(n: usize, k: usize) -> Vec<usize> {
    let q = n / k;
    let rem = n % k;
    (0..k).map(|b| if b >= k - rem { q + 1 } else { q }).collect()
}

#[allow(clippy::too_many_arguments)]
fn check_construction(
    family: &Family,
    cert: &VarianceCertificate,
    n: usize,
    c: f64,
    k: usize,
    gamma: f64,
    sizes: &[usize],
    levels: &[f64],
    code: &LinearCode,
) -> Result<LowerBoundCheck> {
    let sigma_sq = cert.sigma_sq;
    let words = LinearCode::words(k);
    let q = n / k;
    // blocks carrying one extra item
    let mut extra = vec![0u64; words];
    for (b, &s) in sizes.iter().enumerate() {
        if s > q {
            extra[b / 64] |= 1 << (b % 64);
        }
    }
    let block_kl = levels
        .iter()
        .map(|&v| {
            let lifted = family.natural_param(v + gamma)?;
            let base = family.natural_param(v)?;
            family.kl_divergence(lifted, base)
        })
        .collect::<Result<Vec<f64>>>()?;

    let range_ok = levels
        .iter()
        .all(|&v| v >= cert.v_tilde_min && v + gamma <= cert.v_tilde_max * (1.0 + 1e-12));

    let kl_denominator = 2.0 * cert.c_var * cert.c_var * sigma_sq;
    let mut min_hamming = u32::MAX;
    let mut min_weighted = u64::MAX;
    let mut max_kl = 0.0f64;
    let mut kl_pointwise_ok = true;
    let mut first = true;
    code.for_each_codeword(|w| {
        if first {
            first = false;
            return;
        }
        let wt = weight(w);
        let weighted = q as u64 * wt as u64 + weight_masked(w, &extra) as u64;
        min_hamming = min_hamming.min(wt);
        min_weighted = min_weighted.min(weighted);
        let mut kl = 0.0;
        for (i, word) in w.iter().enumerate() {
            let mut bits = *word;
            while bits != 0 {
                let b = i * 64 + bits.trailing_zeros() as usize;
                kl += sizes[b] as f64 * block_kl[b];
                bits &= bits - 1;
            }
        }
        let sq = gamma * gamma * weighted as f64;
        if kl > sq / kl_denominator * (1.0 + 1e-12) {
            kl_pointwise_ok = false;
        }
        max_kl = max_kl.max(kl);
    });

    let nonzero = code.size() - 1;
    Ok(LowerBoundCheck {
        min_hamming,
        required_hamming: k as f64 / 8.0,
        min_sq_distance: gamma * gamma * min_weighted as f64,
        required_sq_distance: c * c / 8.0 * sigma_sq * k as f64,
        max_kl,
        kl_chain_bound: gamma * gamma * n as f64 / kl_denominator,
        kl_limit: (nonzero as f64).ln() / 8.0,
        kl_pointwise_ok,
        range_ok,
    })
}

/// Builds the packing-based hypothesis family for `n` items. `c` defaults
/// to `C_var/16` when `None`.
pub fn build_lower_bound(
    family: &Family,
    bounds: &ScoreBounds,
    n: usize,
    c: Option<f64>,
    seed: u64,
) -> Result<LowerBoundConstruction> {
    if n < 8 {
        return Err(Error::InvalidInput(format!(
            "lower-bound construction needs n >= 8, got {n}"
        )));
    }
    let cert = family.verify_variance_assumption(bounds, GRID_POINTS)?;
    let c = c.unwrap_or(cert.c_var / 16.0);
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
    }
    let sigma_sq = cert.sigma_sq;
    let v_tilde = cert.v_tilde();
    let k_raw = (n as f64 * v_tilde * v_tilde / (c * c * sigma_sq)).cbrt().floor();
    let k = (k_raw as usize).min(n);
    if k == 0 {
        return Err(Error::ConstructionFailed(
            "score range too narrow: zero blocks".into(),
        ));
    }
    let gamma = c * (sigma_sq * k as f64 / n as f64).sqrt();

    // smallest dimension with 2^r - 1 >= 2^(k/8)
    let target = (k as f64 / 8.0).exp2();
    let mut r = 1usize;
    while ((1u64 << r) - 1) as f64 + 0.5 < target {
        r += 1;
    }
    if r > MAX_DIMENSION {
        return Err(Error::TooLarge(format!(
            "k = {k} needs 2^{r} codewords; exhaustive verification is capped at 2^{MAX_DIMENSION}"
        )));
    }
    if r > k {
        return Err(Error::ConstructionFailed(format!(
            "k = {k} is too small to hold {} codewords",
            1u64 << r
        )));
    }

    let sizes = block_sizes(n, k);
    let levels: Vec<f64> = (0..k)
        .map(|b| cert.v_tilde_min + b as f64 / k as f64 * v_tilde)
        .collect();
    let min_dist = (k as f64 / 8.0).ceil() as u32;

    for attempt in 0..MAX_RETRIES {
        let mut rng = substream(seed, tag::PACKING, n as u64, attempt);
        let code = LinearCode::random(k, r, &mut rng);
        let check = check_construction(family, &cert, n, c, k, gamma, &sizes, &levels, &code)?;
        if check.min_hamming < min_dist.max(1) {
            continue;
        }
        if !check.all_hold() {
            return Err(Error::ConstructionFailed(format!(
                "invariants fail for c = {c}: {check:?}"
            )));
        }
        return Ok(LowerBoundConstruction {
            family: *family,
            bounds: *bounds,
            n,
            c,
            certificate: cert,
            k,
            gamma,
            block_sizes: sizes,
            levels,
            code,
            attempts: attempt + 1,
            check,
        });
    }
    Err(Error::ConstructionFailed(format!(
        "no code with minimum distance {min_dist} found after {MAX_RETRIES} attempts (k = {k}, r = {r})"
    )))
}
