//! Deterministic coefficient arrays via r-fold additive convolution.
//!
//! `G_r(n)` is the sum of `Λ(m₁)⋯Λ(m_r)` over ordered compositions
//! `m₁+⋯+m_r = n`; `W_r(n)` is the same sum with every factor squared and is
//! the exact variance weight of the signed coefficient. The direct
//! enumeration is the oracle; the FFT path (repeated squaring with
//! truncation between stages) carries a certified elementwise error bound.

use crate::mangoldt::MangoldtTable;
use crate::sum::Kahan;
use crate::{Error, Result};
use rustfft::{num_complex::Complex64, FftPlanner};

/// Largest `n_max` accepted by the O(r·n²) direct method.
pub const DIRECT_CAP: u64 = 10_000;

/// Largest transform half-length accepted by the FFT method.
pub const FFT_CAP: u64 = 1 << 22;

/// Relative precision contract for the certified FFT bound.
pub const FFT_RELATIVE_LIMIT: f64 = 1e-6;

/// Roundoff-model constant: |err|∞ ≤ C·eps·log2(L)·L·max|a|·max|b|.
const FFT_MODEL_CONST: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Direct,
    Fft,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Fft => "fft",
        }
    }
}

/// `L(n) = C(n−1, r−1)` with overflow reported as saturation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompositionCount {
    pub count: u64,
    pub saturated: bool,
}

/// Number of ordered r-tuples of positive integers summing to `n`.
pub fn composition_count(n: u64, r: u32) -> CompositionCount {
    if n < r as u64 {
        return CompositionCount {
            count: 0,
            saturated: false,
        };
    }
    binomial(n - 1, r as u64 - 1)
}

/// Saturating binomial coefficient.
pub fn binomial(n: u64, k: u64) -> CompositionCount {
    if k > n {
        return CompositionCount {
            count: 0,
            saturated: false,
        };
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return CompositionCount {
                count: u64::MAX,
                saturated: true,
            };
        }
    }
    CompositionCount {
        count: acc as u64,
        saturated: false,
    }
}

/// Paired coefficient arrays `G_r(n)` and `W_r(n)` for `n ≤ n_max`,
/// indexed `0..=n_max` (index 0 is a zero pad).
#[derive(Debug, Clone)]
pub struct CoefficientArrays {
    pub r: u32,
    pub n_max: u64,
    pub g: Vec<f64>,
    pub w: Vec<f64>,
    pub method: Method,
    pub max_abs_error_bound: f64,
}

impl CoefficientArrays {
    /// `n^{r−1}(log n)^r`, the deterministic elementwise bound on `G_r(n)`.
    pub fn deterministic_bound(n: u64, r: u32) -> f64 {
        let n = n as f64;
        n.powi(r as i32 - 1) * n.ln().powi(r as i32)
    }

    /// `n^{r−1}(log n)^{2r}`, the analogous bound on `W_r(n)`.
    pub fn variance_bound(n: u64, r: u32) -> f64 {
        let n = n as f64;
        n.powi(r as i32 - 1) * n.ln().powi(2 * r as i32)
    }
}

fn check_weights(weights: &[f64], n_max: u64) -> Result<()> {
    if weights.len() as u64 != n_max + 1 {
        return Err(Error::InvalidArgument(format!(
            "weights must have length n_max + 1 = {}, got {}",
            n_max + 1,
            weights.len()
        )));
    }
    Ok(())
}

/// Reference oracle: exact r-fold additive convolution by iterated direct
/// convolution, compensated summation per output cell.
///
/// `weights` is indexed `0..=n_max` with `weights[0]` ignored.
pub fn convolve_power_direct(weights: &[f64], r: u32, n_max: u64) -> Result<Vec<f64>> {
    if r < 1 {
        return Err(Error::InvalidArgument("r must be ≥ 1".into()));
    }
    check_weights(weights, n_max)?;
    let mut acc = weights.to_vec();
    acc[0] = 0.0;
    if r == 1 {
        return Ok(acc);
    }
    if n_max > DIRECT_CAP {
        return Err(Error::Budget {
            what: "direct convolution",
            needed: n_max,
            cap: DIRECT_CAP,
        });
    }
    let n_max = n_max as usize;
    for _ in 1..r {
        let mut next = vec![0.0; n_max + 1];
        for (n, slot) in next.iter_mut().enumerate().skip(2) {
            let mut k = Kahan::new();
            for m in 1..n {
                k.add(acc[m] * weights[n - m]);
            }
            *slot = k.value();
        }
        acc = next;
    }
    Ok(acc)
}

/// FFT-accelerated r-fold additive convolution by binary exponentiation,
/// truncating to `n_max` after every multiply so transform lengths stay at
/// `O(n_max)` instead of `O(r·n_max)`.
///
/// Returns the array together with a certified elementwise absolute error
/// bound from the standard FFT roundoff model.
pub fn convolve_power_fft(weights: &[f64], r: u32, n_max: u64) -> Result<(Vec<f64>, f64)> {
    if r < 1 {
        return Err(Error::InvalidArgument("r must be ≥ 1".into()));
    }
    check_weights(weights, n_max)?;
    if n_max > FFT_CAP {
        return Err(Error::Budget {
            what: "fft convolution",
            needed: n_max,
            cap: FFT_CAP,
        });
    }
    let mut base = weights.to_vec();
    base[0] = 0.0;
    if r == 1 {
        return Ok((base, 0.0));
    }
    let n = n_max as usize;
    let len = (2 * n + 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(len);
    let ifft = planner.plan_fft_inverse(len);

    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let multiply = |a: &[f64], ea: f64, b: &[f64], eb: f64| -> (Vec<f64>, f64) {
        let mut fa: Vec<Complex64> = (0..len)
            .map(|i| Complex64::new(a.get(i).copied().unwrap_or(0.0), 0.0))
            .collect();
        let mut fb: Vec<Complex64> = (0..len)
            .map(|i| Complex64::new(b.get(i).copied().unwrap_or(0.0), 0.0))
            .collect();
        fft.process(&mut fa);
        fft.process(&mut fb);
        for (x, y) in fa.iter_mut().zip(fb.iter()) {
            *x *= *y;
        }
        ifft.process(&mut fa);
        let scale = 1.0 / len as f64;
        let out: Vec<f64> = fa[..=n].iter().map(|z| z.re * scale).collect();
        let (ma, mb) = (max_abs(a), max_abs(b));
        let roundoff = FFT_MODEL_CONST
            * f64::EPSILON
            * (len as f64).log2()
            * len as f64
            * ma
            * mb;
        // Input perturbations pass through the exact convolution with at most
        // `len` terms each.
        let propagated = len as f64 * (ma * eb + mb * ea);
        (out, roundoff + propagated)
    };

    // Binary exponentiation over r.
    let mut result: Option<(Vec<f64>, f64)> = None;
    let mut sq = (base, 0.0f64);
    let mut exp = r;
    loop {
        if exp & 1 == 1 {
            result = Some(match result {
                None => sq.clone(),
                Some((res, er)) => multiply(&res, er, &sq.0, sq.1),
            });
        }
        exp >>= 1;
        if exp == 0 {
            break;
        }
        sq = multiply(&sq.0.clone(), sq.1, &sq.0, sq.1);
    }
    let (out, bound) = result.expect("r ≥ 1");
    // When the output never rises above its own certified error bound the
    // result is indistinguishable from the zero array and the absolute bound
    // already describes it fully; the relative gate only makes sense above
    // that floor.
    let m = max_abs(&out);
    if m > bound && bound > FFT_RELATIVE_LIMIT * m {
        return Err(Error::Precision {
            bound,
            limit: FFT_RELATIVE_LIMIT * m,
        });
    }
    Ok((out, bound))
}

/// `G_r` from the r-fold convolution of `Λ` and `W_r` from the r-fold
/// convolution of `Λ²` (never from squaring `G_r`).
pub fn goldbach_coefficients(
    table: &MangoldtTable,
    r: u32,
    n_max: u64,
    method: Method,
) -> Result<CoefficientArrays> {
    if n_max > table.n_max() {
        return Err(Error::OutOfRange {
            index: n_max,
            min: 1,
            max: table.n_max(),
        });
    }
    let lambda = &table.lambda_slice()[..=n_max as usize];
    let lambda_sq: Vec<f64> = lambda.iter().map(|&x| x * x).collect();
    let (g, w, bound) = match method {
        Method::Direct => (
            convolve_power_direct(lambda, r, n_max)?,
            convolve_power_direct(&lambda_sq, r, n_max)?,
            0.0,
        ),
        Method::Fft => {
            let (mut g, eg) = convolve_power_fft(lambda, r, n_max)?;
            let (mut w, ew) = convolve_power_fft(&lambda_sq, r, n_max)?;
            let bound = eg.max(ew);
            // The exact arrays are nonnegative with support n ≥ 2r (every
            // contributing part is a prime power, hence ≥ 2); roundoff-sized
            // negative residues are clamped.
            for v in g.iter_mut().chain(w.iter_mut()) {
                if *v < 0.0 && *v >= -bound {
                    *v = 0.0;
                }
            }
            for i in 0..(2 * r as usize).min(g.len()) {
                g[i] = 0.0;
                w[i] = 0.0;
            }
            // Certified zero-snapping: a nonzero entry is a sum of products
            // of r values Λ(m) ≥ ln 2 (squared for w), so it is at least
            // (ln 2)^r resp. (ln 2)^{2r}. If a computed value sits within the
            // certified error bound of zero and strictly below that floor,
            // the true value can only be 0.
            let ln2 = std::f64::consts::LN_2;
            for (arr, floor) in [(&mut g, ln2.powi(r as i32)), (&mut w, ln2.powi(2 * r as i32))] {
                if bound < floor {
                    for v in arr.iter_mut() {
                        if v.abs() + bound < floor {
                            *v = 0.0;
                        }
                    }
                }
            }
            (g, w, bound)
        }
    };
    Ok(CoefficientArrays {
        r,
        n_max,
        g,
        w,
        method,
        max_abs_error_bound: bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(n_max: u64) -> MangoldtTable {
        MangoldtTable::build(n_max).unwrap()
    }

    #[test]
    fn composition_counts() {
        assert_eq!(composition_count(6, 2).count, 5);
        assert_eq!(composition_count(4, 3).count, 3);
        assert_eq!(composition_count(2, 3).count, 0);
        assert_eq!(composition_count(1, 1).count, 1);
        let sat = composition_count(1 << 40, 8);
        assert!(sat.saturated);
    }

    #[test]
    fn direct_identity_case() {
        let t = table(100);
        let out = convolve_power_direct(t.lambda_slice(), 1, 100).unwrap();
        assert_eq!(out[1..], t.lambda_slice()[1..]);
    }

    #[test]
    fn direct_small_cases_match_enumeration() {
        let t = table(10);
        let ln2 = 2f64.ln();
        let ln3 = 3f64.ln();
        let out = convolve_power_direct(t.lambda_slice(), 2, 10).unwrap();
        // n = 4: only (2,2) contributes.
        assert!((out[4] - ln2 * ln2).abs() < 1e-15);
        // n = 5: (2,3) and (3,2).
        assert!((out[5] - 2.0 * ln2 * ln3).abs() < 1e-15);
        // squared weights, n = 4
        let lam_sq: Vec<f64> = t.lambda_slice().iter().map(|&x| x * x).collect();
        let out2 = convolve_power_direct(&lam_sq, 2, 10).unwrap();
        assert!((out2[4] - ln2.powi(4)).abs() < 1e-15);
    }

    #[test]
    fn direct_cap_enforced() {
        let t = table(100);
        let mut w = t.lambda_slice().to_vec();
        w.resize(DIRECT_CAP as usize + 2, 0.0);
        assert!(matches!(
            convolve_power_direct(&w, 2, DIRECT_CAP + 1),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn fft_zero_weights() {
        let w = vec![0.0; 101];
        let (out, bound) = convolve_power_fft(&w, 3, 100).unwrap();
        assert!(out.iter().all(|&x| x == 0.0));
        assert_eq!(bound, 0.0);
    }

    #[test]
    fn fft_matches_direct_r2_r3() {
        let t = table(2000);
        for r in [2u32, 3] {
            let direct = convolve_power_direct(t.lambda_slice(), r, 2000).unwrap();
            let (fft, bound) = convolve_power_fft(t.lambda_slice(), r, 2000).unwrap();
            let max = direct.iter().cloned().fold(0.0f64, f64::max);
            for n in 0..=2000 {
                let d = (fft[n] - direct[n]).abs();
                assert!(d <= bound, "n={n} dev={d:e} bound={bound:e}");
                assert!(d <= 1e-9 * max, "n={n} dev={d:e}");
            }
        }
    }

    #[test]
    fn goldbach_coefficients_r2_small() {
        let t = table(10);
        let c = goldbach_coefficients(&t, 2, 6, Method::Direct).unwrap();
        let ln2 = 2f64.ln();
        let ln3 = 3f64.ln();
        // compositions of 6: (2,4),(3,3),(4,2) carry weight
        let expected = 2.0 * ln2 * ln2 + ln3 * ln3;
        assert!((c.g[6] - expected).abs() < 1e-15);
        assert_eq!(c.g[1], 0.0);
        assert_eq!(c.w[1], 0.0);
    }

    #[test]
    fn goldbach_r1_is_identity() {
        let t = table(50);
        let c = goldbach_coefficients(&t, 1, 50, Method::Direct).unwrap();
        for n in 1..=50u64 {
            let l = t.mangoldt(n).unwrap();
            assert_eq!(c.g[n as usize], l);
            assert_eq!(c.w[n as usize], l * l);
        }
    }

    #[test]
    fn support_and_bounds() {
        let t = table(3000);
        for r in [2u32, 3, 4] {
            let c = goldbach_coefficients(&t, r, 3000, Method::Fft).unwrap();
            for n in 0..(r as usize) {
                assert_eq!(c.g[n], 0.0);
                assert_eq!(c.w[n], 0.0);
            }
            for n in 2..=3000u64 {
                let i = n as usize;
                assert!(c.g[i] >= 0.0);
                assert!(c.w[i] >= 0.0);
                assert!(c.g[i] <= CoefficientArrays::deterministic_bound(n, r) + c.max_abs_error_bound);
                assert!(c.w[i] <= CoefficientArrays::variance_bound(n, r) + c.max_abs_error_bound);
            }
        }
    }

    #[test]
    fn mass_identity() {
        // Σ_{n=r}^{rN} G_r^{(trunc N)}(n) = (Σ_{m≤N} Λ(m))^r with the
        // convolution run to length rN.
        let n = 300u64;
        let t = table(n);
        let mut w = t.lambda_slice().to_vec();
        for r in [2u32, 3] {
            let len = r as u64 * n;
            w.resize(len as usize + 1, 0.0);
            let conv = convolve_power_direct(&w, r, len).unwrap();
            let total: f64 = crate::sum::kahan_sum(conv.iter().copied());
            let psi = t.chebyshev_psi(n).unwrap();
            let expected = psi.powi(r as i32);
            assert!(
                (total - expected).abs() < 1e-9 * expected,
                "r={r}: {total} vs {expected}"
            );
        }
    }

    #[test]
    fn fft_matches_direct_squared_weights_r4() {
        let t = table(1000);
        let lam_sq: Vec<f64> = t.lambda_slice().iter().map(|&x| x * x).collect();
        let direct = convolve_power_direct(&lam_sq, 4, 1000).unwrap();
        let (fft, bound) = convolve_power_fft(&lam_sq, 4, 1000).unwrap();
        let max = direct.iter().cloned().fold(0.0f64, f64::max);
        for n in 0..=1000 {
            assert!((fft[n] - direct[n]).abs() <= bound.max(1e-9 * max));
        }
    }
}
