//! Sieve-backed von Mangoldt table.
//!
//! `Λ(n) = log p` when `n = p^k` for a prime `p`, and `0` otherwise. The table
//! stores the floating value together with the exact base `p` of each nonzero
//! entry, so provenance never has to be re-derived from the float.

use crate::{Error, Result};

/// Default memory budget for a single table, in entries (~1.7 GiB).
pub const DEFAULT_ENTRY_BUDGET: u64 = 1 << 27;

const SEGMENT: usize = 1 << 20;

/// Immutable table of `Λ(n)`, primality flags and prime-power provenance for
/// `n ∈ [1, n_max]`. Safe to share across any number of reader threads.
#[derive(Debug, Clone)]
pub struct MangoldtTable {
    n_max: usize,
    lambda: Vec<f64>,
    prime_flag: Vec<bool>,
    prime_power_base: Vec<u32>,
}

impl MangoldtTable {
    /// Builds the table with a segmented Eratosthenes sieve.
    ///
    /// Deterministic: two builds with the same `n_max` are element-wise
    /// identical.
    pub fn build(n_max: u64) -> Result<Self> {
        Self::build_with_budget(n_max, DEFAULT_ENTRY_BUDGET)
    }

    pub fn build_with_budget(n_max: u64, budget: u64) -> Result<Self> {
        if n_max < 1 || n_max > (1 << 31) {
            return Err(Error::InvalidArgument(format!(
                "n_max must be in [1, 2^31], got {n_max}"
            )));
        }
        if n_max > budget {
            return Err(Error::Capacity {
                requested: n_max,
                budget,
            });
        }
        let n_max = n_max as usize;
        let mut prime_flag = vec![false; n_max + 1];

        // Base primes up to sqrt(n_max), then segments of fixed size so the
        // working set stays bounded for large tables.
        let root = (n_max as f64).sqrt() as usize + 1;
        let base_primes = small_primes(root.min(n_max));
        for &p in &base_primes {
            prime_flag[p] = true;
        }
        let mut lo = root.min(n_max) + 1;
        let mut composite = vec![false; SEGMENT];
        while lo <= n_max {
            let hi = (lo + SEGMENT - 1).min(n_max);
            composite[..hi - lo + 1].fill(false);
            for &p in &base_primes {
                if p * p > hi {
                    break;
                }
                let mut m = lo.div_ceil(p) * p;
                if m < p * p {
                    m = p * p;
                }
                while m <= hi {
                    composite[m - lo] = true;
                    m += p;
                }
            }
            for n in lo..=hi {
                if !composite[n - lo] {
                    prime_flag[n] = true;
                }
            }
            lo = hi + 1;
        }

        let mut lambda = vec![0.0; n_max + 1];
        let mut prime_power_base = vec![0u32; n_max + 1];
        for p in 2..=n_max {
            if !prime_flag[p] {
                continue;
            }
            let log_p = (p as f64).ln();
            let mut q = p;
            loop {
                lambda[q] = log_p;
                prime_power_base[q] = p as u32;
                if q > n_max / p {
                    break;
                }
                q *= p;
            }
        }

        Ok(Self {
            n_max,
            lambda,
            prime_flag,
            prime_power_base,
        })
    }

    pub fn n_max(&self) -> u64 {
        self.n_max as u64
    }

    fn check(&self, n: u64) -> Result<usize> {
        if n < 1 || n > self.n_max as u64 {
            return Err(Error::OutOfRange {
                index: n,
                min: 1,
                max: self.n_max as u64,
            });
        }
        Ok(n as usize)
    }

    /// `Λ(n)`.
    pub fn mangoldt(&self, n: u64) -> Result<f64> {
        Ok(self.lambda[self.check(n)?])
    }

    /// True iff `n` is prime (prime powers `p^k`, `k ≥ 2`, are not).
    pub fn is_prime(&self, n: u64) -> Result<bool> {
        Ok(self.prime_flag[self.check(n)?])
    }

    /// `p` when `n = p^k`, `0` otherwise.
    pub fn prime_power_base(&self, n: u64) -> Result<u32> {
        Ok(self.prime_power_base[self.check(n)?])
    }

    /// `Λ` values indexed `0..=n_max` (index 0 is a zero pad).
    pub fn lambda_slice(&self) -> &[f64] {
        &self.lambda
    }

    /// Indices `n ≤ bound` with `Λ(n) > 0`, ascending.
    pub fn prime_power_support(&self, bound: u64) -> Vec<u32> {
        let bound = (bound as usize).min(self.n_max);
        (2..=bound)
            .filter(|&n| self.prime_power_base[n] != 0)
            .map(|n| n as u32)
            .collect()
    }

    /// Chebyshev `ψ(x) = Σ_{n≤x} Λ(n)`.
    pub fn chebyshev_psi(&self, x: u64) -> Result<f64> {
        let x = self.check(x)?;
        Ok(crate::sum::kahan_sum(self.lambda[1..=x].iter().copied()))
    }
}

fn small_primes(limit: usize) -> Vec<usize> {
    if limit < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for p in 2..=limit {
        if !composite[p] {
            primes.push(p);
            let mut m = p * p;
            while m <= limit {
                composite[m] = true;
                m += p;
            }
        }
    }
    primes
}
