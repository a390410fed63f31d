//! Counter-based Rademacher signs over composition indices, sampled signed
//! coefficient paths, and exact finite sign-flip distributions.
//!
//! Every sign is a pure function of `(master_seed, replicate_id, r, n, rank)`
//! where `rank` is the lexicographic rank of the composition `(m₁,…,m_r)`
//! among all compositions of `n` into `r` positive parts. The mixer is the
//! SplitMix64 finalizer applied once per key word; it is frozen — changing it
//! changes every published result.

use crate::convolution::{binomial, composition_count, CoefficientArrays};
use crate::mangoldt::MangoldtTable;
use crate::sum::Kahan;
use crate::{Error, Result};
use std::collections::HashMap;

/// Per-coefficient enumeration cap (nonzero-weight compositions).
pub const DEFAULT_COEFFICIENT_BUDGET: u64 = 10_000_000;

/// Whole-path enumeration cap (nonzero-weight compositions over all n).
pub const DEFAULT_PATH_BUDGET: u64 = 1_000_000_000;

/// Largest `L(n)` for which the full `2^{L(n)}` distribution is enumerated.
pub const EXACT_DISTRIBUTION_MAX_L: u64 = 24;

/// Identifies one point `ω` of the probability space: the pair fully
/// determines every sign ever drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub replicate_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, replicate_id: u64) -> Self {
        Self {
            master_seed,
            replicate_id,
        }
    }

    pub fn with_replicate(self, replicate_id: u64) -> Self {
        Self {
            replicate_id,
            ..self
        }
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer (Steele–Lea–Flood).
#[inline]
fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    z
}

#[inline]
fn mix_key(seed: SeedSpec, r: u32, n: u64, rank: u64) -> u64 {
    let mut h = seed.master_seed;
    for w in [seed.replicate_id, r as u64, n, rank] {
        h = mix64(h ^ w.wrapping_add(GOLDEN));
    }
    mix64(h)
}

#[inline]
fn sign_from_hash(h: u64) -> f64 {
    if h >> 63 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[inline]
fn sign_unchecked(seed: SeedSpec, r: u32, n: u64, rank: u64) -> f64 {
    sign_from_hash(mix_key(seed, r, n, rank))
}

/// Uniform in (0, 1), centered on dyadics so 0 and 1 are never hit.
#[inline]
fn unit_uniform(h: u64) -> f64 {
    ((h >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
}

/// The Rademacher sign `ε` attached to the composition of `n` with the given
/// lexicographic `rank`.
pub fn draw_sign(seed: SeedSpec, r: u32, n: u64, rank: u64) -> Result<f64> {
    let l = composition_count(n, r);
    if !l.saturated && rank >= l.count {
        return Err(Error::OutOfRange {
            index: rank,
            min: 0,
            max: l.count.saturating_sub(1),
        });
    }
    Ok(sign_unchecked(seed, r, n, rank))
}

/// Lexicographic rank of the composition `parts` (which must sum to `n`)
/// among all compositions of `n` into `parts.len()` positive parts.
pub fn composition_rank(parts: &[u64]) -> u64 {
    let mut remaining: u64 = parts.iter().sum();
    let mut rank = 0u64;
    let mut t = parts.len() as u64;
    for &q in &parts[..parts.len() - 1] {
        // compositions of `remaining` into t parts with first part < q
        let all = binomial(remaining - 1, t - 1).count;
        let tail = binomial(remaining - q, t - 1).count;
        rank = rank.saturating_add(all - tail);
        remaining -= q;
        t -= 1;
    }
    rank
}

/// Enumerates the compositions of `n` into `r` parts whose weight product is
/// nonzero, calling `f(rank, product)` for each. `weights` is indexed by part
/// value. Decrements `budget` per visited composition.
fn for_each_weighted_composition(
    support: &[u32],
    weights: &[f64],
    r: u32,
    n: u64,
    budget: &mut u64,
    what: &'static str,
    cap: u64,
    f: &mut impl FnMut(u64, f64),
) -> Result<()> {
    fn recurse(
        support: &[u32],
        weights: &[f64],
        remaining: u64,
        parts_left: u64,
        rank_base: u64,
        product: f64,
        budget: &mut u64,
        what: &'static str,
        cap: u64,
        f: &mut impl FnMut(u64, f64),
    ) -> Result<()> {
        if parts_left == 1 {
            let m = remaining as usize;
            if m < weights.len() && weights[m] != 0.0 {
                if *budget == 0 {
                    return Err(Error::Budget {
                        what,
                        needed: cap + 1,
                        cap,
                    });
                }
                *budget -= 1;
                f(rank_base, product * weights[m]);
            }
            return Ok(());
        }
        let all = binomial(remaining - 1, parts_left - 1).count;
        for &q in support {
            let q = q as u64;
            if q + (parts_left - 1) > remaining {
                break;
            }
            let tail = binomial(remaining - q, parts_left - 1).count;
            recurse(
                support,
                weights,
                remaining - q,
                parts_left - 1,
                rank_base + (all - tail),
                product * weights[q as usize],
                budget,
                what,
                cap,
                f,
            )?;
        }
        Ok(())
    }
    if n < r as u64 {
        return Ok(());
    }
    recurse(support, weights, n, r as u64, 0, 1.0, budget, what, cap, f)
}

/// One sampled coefficient `Y_r(n,ω)`: the sum over nonzero-weight
/// compositions of `sign · Λ(m₁)⋯Λ(m_r)`, compensated summation in
/// lexicographic order.
pub fn sample_coefficient(table: &MangoldtTable, r: u32, n: u64, seed: SeedSpec) -> Result<f64> {
    sample_coefficient_with_budget(table, r, n, seed, DEFAULT_COEFFICIENT_BUDGET)
}

pub fn sample_coefficient_with_budget(
    table: &MangoldtTable,
    r: u32,
    n: u64,
    seed: SeedSpec,
    cap: u64,
) -> Result<f64> {
    if n > table.n_max() {
        return Err(Error::OutOfRange {
            index: n,
            min: 1,
            max: table.n_max(),
        });
    }
    let support = table.prime_power_support(n);
    let weights = table.lambda_slice();
    let mut acc = Kahan::new();
    let mut budget = cap;
    for_each_weighted_composition(
        &support,
        weights,
        r,
        n,
        &mut budget,
        "sample_coefficient",
        cap,
        &mut |rank, product| {
            acc.add(sign_unchecked(seed, r, n, rank) * product);
        },
    )?;
    Ok(acc.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathMode {
    ExactEnumeration,
    GaussianSurrogate,
}

impl PathMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PathMode::ExactEnumeration => "exact_enumeration",
            PathMode::GaussianSurrogate => "gaussian_surrogate",
        }
    }
}

/// One Monte Carlo realization `{Y_r(n,ω)}_{n ≤ n_max}` with the seed
/// metadata that reproduces it bitwise.
#[derive(Debug, Clone)]
pub struct SignedPath {
    pub r: u32,
    pub n_max: u64,
    pub seed: SeedSpec,
    /// Indexed `0..=n_max`, index 0 is a zero pad.
    pub y: Vec<f64>,
    pub mode: PathMode,
}

/// Exact-enumeration path: every `y[n]` is the true finite signed sum.
///
/// The enumeration runs over r-tuples of prime powers with sum ≤ `n_max`;
/// each tuple touches exactly one `y[n]`, so the per-`n` sign families stay
/// disjoint and independent.
pub fn sample_path_exact(
    table: &MangoldtTable,
    r: u32,
    n_max: u64,
    seed: SeedSpec,
) -> Result<SignedPath> {
    sample_path_exact_with_budget(table, r, n_max, seed, DEFAULT_PATH_BUDGET)
}

pub fn sample_path_exact_with_budget(
    table: &MangoldtTable,
    r: u32,
    n_max: u64,
    seed: SeedSpec,
    cap: u64,
) -> Result<SignedPath> {
    if n_max > table.n_max() {
        return Err(Error::OutOfRange {
            index: n_max,
            min: 1,
            max: table.n_max(),
        });
    }
    let weights = table.lambda_slice();
    let support = table.prime_power_support(n_max);
    let n_max_us = n_max as usize;
    let mut sums = vec![0.0f64; n_max_us + 1];
    let mut comp = vec![0.0f64; n_max_us + 1];
    let mut budget = cap;
    let spent = |budget: &mut u64| -> Result<()> {
        if *budget == 0 {
            return Err(Error::Budget {
                what: "sample_path",
                needed: cap + 1,
                cap,
            });
        }
        *budget -= 1;
        Ok(())
    };

    if r == 1 {
        for &q in &support {
            spent(&mut budget)?;
            let n = q as u64;
            sums[q as usize] = sign_unchecked(seed, 1, n, 0) * weights[q as usize];
        }
    } else if r == 2 {
        // rank of (q1, q2) with q1 + q2 = n is q1 − 1
        for &q1 in &support {
            let limit = n_max - q1 as u64;
            let w1 = weights[q1 as usize];
            for &q2 in &support {
                if q2 as u64 > limit {
                    break;
                }
                spent(&mut budget)?;
                let n = q1 as u64 + q2 as u64;
                let s = sign_unchecked(seed, 2, n, q1 as u64 - 1);
                neumaier_add(&mut sums, &mut comp, n as usize, s * w1 * weights[q2 as usize]);
            }
        }
    } else {
        let mut parts = vec![0u64; r as usize];
        tuple_recurse(
            &support,
            weights,
            r,
            n_max,
            seed,
            0,
            0,
            1.0,
            &mut parts,
            &mut sums,
            &mut comp,
            &mut budget,
            cap,
        )?;
    }
    let y: Vec<f64> = sums.iter().zip(comp.iter()).map(|(s, c)| s + c).collect();
    Ok(SignedPath {
        r,
        n_max,
        seed,
        y,
        mode: PathMode::ExactEnumeration,
    })
}

#[inline]
fn neumaier_add(sums: &mut [f64], comp: &mut [f64], i: usize, v: f64) {
    let s = sums[i];
    let t = s + v;
    comp[i] += if s.abs() >= v.abs() {
        (s - t) + v
    } else {
        (v - t) + s
    };
    sums[i] = t;
}

#[allow(clippy::too_many_arguments)]
fn tuple_recurse(
    support: &[u32],
    weights: &[f64],
    r: u32,
    n_max: u64,
    seed: SeedSpec,
    depth: u32,
    partial: u64,
    product: f64,
    parts: &mut [u64],
    sums: &mut [f64],
    comp: &mut [f64],
    budget: &mut u64,
    cap: u64,
) -> Result<()> {
    for &q in support {
        let q = q as u64;
        let total = partial + q;
        if total + (r - depth - 1) as u64 > n_max {
            break;
        }
        parts[depth as usize] = q;
        let p = product * weights[q as usize];
        if depth + 1 == r {
            if *budget == 0 {
                return Err(Error::Budget {
                    what: "sample_path",
                    needed: cap + 1,
                    cap,
                });
            }
            *budget -= 1;
            let rank = composition_rank(&parts[..r as usize]);
            let s = sign_unchecked(seed, r, total, rank);
            neumaier_add(sums, comp, total as usize, s * p);
        } else {
            tuple_recurse(
                support, weights, r, n_max, seed, depth + 1, total, p, parts, sums, comp, budget,
                cap,
            )?;
        }
    }
    Ok(())
}

/// Gaussian surrogate path: `y[n] ~ N(0, W_r(n))`, counter-based draws.
///
/// Preserves the exact variance profile of the signed coefficients but NOT
/// their distribution; always labeled as an approximation in output metadata.
pub fn sample_path_surrogate(coeffs: &CoefficientArrays, seed: SeedSpec) -> SignedPath {
    let r = coeffs.r;
    let y: Vec<f64> = coeffs
        .w
        .iter()
        .enumerate()
        .map(|(n, &w)| {
            if n == 0 || w <= 0.0 {
                0.0
            } else {
                let u1 = unit_uniform(mix_key(seed, r, n as u64, 0));
                let u2 = unit_uniform(mix_key(seed, r, n as u64, 1));
                let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
                z * w.sqrt()
            }
        })
        .collect();
    SignedPath {
        r,
        n_max: coeffs.n_max,
        seed,
        y,
        mode: PathMode::GaussianSurrogate,
    }
}

/// Deterministic all-plus path: `y[n] = G_r(n)`. Used as a degenerate seed
/// override for cross-checks against classical series.
pub fn deterministic_path(coeffs: &CoefficientArrays) -> SignedPath {
    SignedPath {
        r: coeffs.r,
        n_max: coeffs.n_max,
        seed: SeedSpec::new(0, 0),
        y: coeffs.g.clone(),
        mode: PathMode::ExactEnumeration,
    }
}

/// The full probability mass function of `Y_r(n,·)` over all `2^{L(n)}` sign
/// assignments. Masses are exact dyadic rationals stored as integer counts
/// over `2^{L(n)}`.
#[derive(Debug, Clone)]
pub struct ExactDistribution {
    pub n: u64,
    pub r: u32,
    pub denominator_log2: u32,
    /// Sorted ascending.
    pub support: Vec<f64>,
    /// Counts over `2^denominator_log2`; same order as `support`.
    pub counts: Vec<u64>,
}

impl ExactDistribution {
    pub fn mass(&self, i: usize) -> f64 {
        self.counts[i] as f64 / (1u64 << self.denominator_log2) as f64
    }
}

/// Enumerates all sign assignments of the compositions of `n` and collapses
/// them into the exact pmf of `Y_r(n,·)`.
///
/// Zero-weight compositions cannot move the sum, so only the `K` nonzero
/// weights are enumerated and each value gets multiplicity `2^{L(n)−K}`.
pub fn exact_distribution(table: &MangoldtTable, r: u32, n: u64) -> Result<ExactDistribution> {
    let l = composition_count(n, r);
    if l.saturated || l.count > EXACT_DISTRIBUTION_MAX_L {
        return Err(Error::Budget {
            what: "exact_distribution",
            needed: l.count,
            cap: EXACT_DISTRIBUTION_MAX_L,
        });
    }
    let support = table.prime_power_support(n);
    let weights = table.lambda_slice();
    let mut terms: Vec<f64> = Vec::new();
    let mut budget = u64::MAX;
    for_each_weighted_composition(
        &support,
        weights,
        r,
        n,
        &mut budget,
        "exact_distribution",
        u64::MAX,
        &mut |_rank, product| terms.push(product),
    )?;
    let k = terms.len() as u32;
    let l_total = l.count as u32;
    let multiplicity = 1u64 << (l_total - k);
    let mut pmf: HashMap<u64, u64> = HashMap::new();
    for mask in 0u64..(1u64 << k) {
        let mut v = 0.0f64;
        for (i, &w) in terms.iter().enumerate() {
            v += if mask >> i & 1 == 0 { w } else { -w };
        }
        if v == 0.0 {
            v = 0.0; // normalize −0.0
        }
        *pmf.entry(v.to_bits()).or_insert(0) += multiplicity;
    }
    let mut entries: Vec<(f64, u64)> = pmf
        .into_iter()
        .map(|(bits, c)| (f64::from_bits(bits), c))
        .collect();
    entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let total: u64 = entries.iter().map(|e| e.1).sum();
    debug_assert_eq!(total, 1u64 << l_total);
    Ok(ExactDistribution {
        n,
        r,
        denominator_log2: l_total,
        support: entries.iter().map(|e| e.0).collect(),
        counts: entries.iter().map(|e| e.1).collect(),
    })
}

/// True iff `mass(v) = mass(−v)` for every support point, in exact integer
/// arithmetic.
pub fn symmetry_check(dist: &ExactDistribution) -> bool {
    for (i, &v) in dist.support.iter().enumerate() {
        let neg = -v;
        let j = dist
            .support
            .binary_search_by(|x| x.partial_cmp(&neg).unwrap());
        match j {
            Ok(j) if dist.counts[j] == dist.counts[i] => {}
            _ => return false,
        }
    }
    true
}
