//! Partial sums of the random Dirichlet series, the variance series, unit
//! truncation, and convergence-abscissa estimation.

use crate::convolution::{composition_count, goldbach_coefficients, CoefficientArrays, Method};
use crate::ensemble::{
    exact_distribution, sample_coefficient, sample_path_exact, sample_path_surrogate, PathMode,
    SeedSpec, SignedPath, EXACT_DISTRIBUTION_MAX_L,
};
use crate::mangoldt::MangoldtTable;
use crate::sum::Kahan;
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;

/// Geometric checkpoint grid `N_k = ⌈64·2^{k/4}⌉`, deduplicated, capped at
/// `n_max`. Evenly spaced in `log N` for the log-log regressions.
pub fn default_checkpoints(n_max: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut k = 0u32;
    loop {
        let v = (64.0 * 2f64.powf(k as f64 / 4.0)).ceil() as u64;
        if v > n_max {
            break;
        }
        if out.last() != Some(&v) {
            out.push(v);
        }
        k += 1;
    }
    if out.last() != Some(&n_max) && n_max >= 64 {
        out.push(n_max);
    }
    out
}

/// Checkpointed values of `A(N) = Σ_{n≤N} y[n]·n^{−s}` along one path.
#[derive(Debug, Clone)]
pub struct PartialSumTrace {
    pub s: Complex64,
    pub checkpoints: Vec<u64>,
    pub values: Vec<Complex64>,
    pub r: u32,
    pub seed: SeedSpec,
}

/// Compensated ascending-`n` partial sums of `y[n]·n^{−s}` at the given
/// checkpoints.
pub fn partial_sum_trace(
    path: &SignedPath,
    s: Complex64,
    checkpoints: &[u64],
) -> Result<PartialSumTrace> {
    validate_checkpoints(checkpoints, path.n_max)?;
    let mut acc = Kahan::<Complex64>::new();
    let mut values = Vec::with_capacity(checkpoints.len());
    let mut next = 0usize;
    for n in 1..=path.n_max {
        let y = path.y[n as usize];
        if y != 0.0 {
            let term = Complex64::from(y) * (-s * (n as f64).ln()).exp();
            acc.add(term);
        }
        while next < checkpoints.len() && checkpoints[next] == n {
            values.push(acc.value());
            next += 1;
        }
    }
    Ok(PartialSumTrace {
        s,
        checkpoints: checkpoints.to_vec(),
        values,
        r: path.r,
        seed: path.seed,
    })
}

fn validate_checkpoints(checkpoints: &[u64], n_max: u64) -> Result<()> {
    if checkpoints.is_empty() {
        return Err(Error::InvalidArgument("empty checkpoint list".into()));
    }
    let mut prev = 0u64;
    for &c in checkpoints {
        if c <= prev || c > n_max {
            return Err(Error::OutOfRange {
                index: c,
                min: prev + 1,
                max: n_max,
            });
        }
        prev = c;
    }
    Ok(())
}

/// Partial sums `Σ_{n≤N_k} W_r(n)/n^{2σ}` — the variance series of the
/// random Dirichlet series coefficients, since `V(X_n) = W_r(n)/n^{2σ}`.
pub fn variance_series(
    coeffs: &CoefficientArrays,
    sigma: f64,
    checkpoints: &[u64],
) -> Result<Vec<f64>> {
    validate_checkpoints(checkpoints, coeffs.n_max)?;
    let mut acc = Kahan::new();
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = 0usize;
    for n in 1..=coeffs.n_max {
        let w = coeffs.w[n as usize];
        if w != 0.0 {
            acc.add(w * (n as f64).powf(-2.0 * sigma));
        }
        while next < checkpoints.len() && checkpoints[next] == n {
            out.push(acc.value());
            next += 1;
        }
    }
    Ok(out)
}

/// Clips `x` to the closed unit disk: `x` if `|x| ≤ 1`, else `x/|x|`.
pub fn truncate_unit(x: Complex64) -> Complex64 {
    let norm = x.norm();
    if norm <= 1.0 {
        x
    } else {
        x / norm
    }
}

/// Variance of the unit-truncated term `X'_n = truncate(Y_r(n,·)·n^{−σ})`.
///
/// Computed exactly from the finite sign-flip pmf when `L(n) ≤ 24`, by Monte
/// Carlo over `replicates` seeds otherwise.
pub fn truncated_variance(
    table: &MangoldtTable,
    r: u32,
    n: u64,
    sigma: f64,
    replicates: u64,
    seed: SeedSpec,
) -> Result<f64> {
    if replicates < 100 {
        return Err(Error::InvalidArgument(
            "truncated_variance needs replicates ≥ 100".into(),
        ));
    }
    let scale = (n as f64).powf(-sigma);
    let trunc = |y: f64| -> f64 {
        let x = y * scale;
        if x.abs() <= 1.0 {
            x
        } else {
            x.signum()
        }
    };
    let l = composition_count(n, r);
    if !l.saturated && l.count <= EXACT_DISTRIBUTION_MAX_L {
        let d = exact_distribution(table, r, n)?;
        let denom = (1u64 << d.denominator_log2) as f64;
        let mut m1 = Kahan::new();
        let mut m2 = Kahan::new();
        for (&v, &c) in d.support.iter().zip(d.counts.iter()) {
            let t = trunc(v);
            let p = c as f64 / denom;
            m1.add(t * p);
            m2.add(t * t * p);
        }
        return Ok(m2.value() - m1.value() * m1.value());
    }
    let mut m1 = Kahan::new();
    let mut m2 = Kahan::new();
    for rep in 0..replicates {
        let v = sample_coefficient(table, r, n, seed.with_replicate(seed.replicate_id + rep))?;
        let t = trunc(v);
        m1.add(t);
        m2.add(t * t);
    }
    let mean = m1.value() / replicates as f64;
    Ok(m2.value() / replicates as f64 - mean * mean)
}

/// Least-squares fit of `y = a + b·x`; returns `(b, stderr_b)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let k = x.len();
    if k < 2 || k != y.len() {
        return Err(Error::Degenerate("linear fit needs ≥ 2 points"));
    }
    let kf = k as f64;
    let mx = x.iter().sum::<f64>() / kf;
    let my = y.iter().sum::<f64>() / kf;
    let sxx: f64 = x.iter().map(|&v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("linear fit needs distinct abscissae"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let e = b - intercept - slope * a;
            e * e
        })
        .sum();
    let stderr = if k > 2 {
        (ss_res / (kf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok((slope, stderr))
}

/// Log-log regression slope of the unweighted coefficient sums
/// `A(N) = Σ_{n≤N} y[n]` — the growth-exponent heuristic for the abscissa of
/// convergence. Checkpoints with `A(N) = 0` are excluded.
pub fn growth_exponent(path: &SignedPath, checkpoints: &[u64]) -> Result<(f64, f64)> {
    validate_checkpoints(checkpoints, path.n_max)?;
    if checkpoints.len() < 8 {
        return Err(Error::Degenerate("need ≥ 8 geometric checkpoints"));
    }
    let mut acc = Kahan::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut next = 0usize;
    for n in 1..=path.n_max {
        acc.add(path.y[n as usize]);
        while next < checkpoints.len() && checkpoints[next] == n {
            let a = acc.value().abs();
            if a > 0.0 {
                xs.push((n as f64).ln());
                ys.push(a.ln());
            }
            next += 1;
        }
    }
    if xs.len() < 4 {
        return Err(Error::Degenerate("fewer than 4 usable checkpoints"));
    }
    linear_fit(&xs, &ys)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMethod {
    CoefficientGrowth,
    SigmaGrid,
}

impl EstimateMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimateMethod::CoefficientGrowth => "coefficient_growth",
            EstimateMethod::SigmaGrid => "sigma_grid",
        }
    }
}

/// Regression-based abscissa estimate from an ensemble of signed paths.
#[derive(Debug, Clone)]
pub struct AbscissaEstimate {
    pub r: u32,
    pub sigma_hat: f64,
    pub stderr: f64,
    pub ensemble_size: u64,
    pub n_max: u64,
    pub method: EstimateMethod,
    pub path_mode: PathMode,
}

/// Runs `growth_exponent` on `ensemble` independent paths
/// (`replicate_id = 0..ensemble`); `sigma_hat` is the median slope, `stderr`
/// the median absolute deviation scaled by `1.4826/√ensemble`.
///
/// Median/MAD rather than mean/std: `|A(N)|` fluctuates heavily near
/// sign-cancellation events.
pub fn estimate_abscissa(
    table: &MangoldtTable,
    r: u32,
    n_max: u64,
    ensemble: u64,
    seed: SeedSpec,
    mode: PathMode,
) -> Result<AbscissaEstimate> {
    if ensemble < 30 {
        return Err(Error::InvalidArgument(
            "estimate_abscissa needs ensemble ≥ 30".into(),
        ));
    }
    let checkpoints = default_checkpoints(n_max);
    let surrogate_coeffs = match mode {
        PathMode::GaussianSurrogate => Some(goldbach_coefficients(table, r, n_max, Method::Fft)?),
        PathMode::ExactEnumeration => None,
    };
    // Replicates are independent jobs; ordered collect keeps the merge
    // deterministic for any worker count.
    let slopes: Vec<Result<f64>> = (0..ensemble)
        .into_par_iter()
        .map(|rep| {
            let spec = SeedSpec::new(seed.master_seed, rep);
            let path = match mode {
                PathMode::ExactEnumeration => sample_path_exact(table, r, n_max, spec)?,
                PathMode::GaussianSurrogate => {
                    Ok::<_, Error>(sample_path_surrogate(surrogate_coeffs.as_ref().unwrap(), spec))?
                }
            };
            Ok(growth_exponent(&path, &checkpoints)?.0)
        })
        .collect();
    let mut vals = Vec::with_capacity(ensemble as usize);
    for s in slopes {
        vals.push(s?);
    }
    let sigma_hat = median(&mut vals.clone());
    let mut devs: Vec<f64> = vals.iter().map(|v| (v - sigma_hat).abs()).collect();
    let mad = median(&mut devs);
    Ok(AbscissaEstimate {
        r,
        sigma_hat,
        stderr: mad * 1.4826 / (ensemble as f64).sqrt(),
        ensemble_size: ensemble,
        n_max,
        method: EstimateMethod::CoefficientGrowth,
        path_mode: mode,
    })
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// σ-grid convergence classifier: "convergent" when the tail oscillation
/// `max_{N_k > n_max/2} |A(N_k) − A(n_max)|` is below `0.05·max_k |A(N_k)|`.
/// The threshold is an explicit artifact choice; the underlying theory gives
/// no finite-N test.
pub fn tail_is_stable(trace: &PartialSumTrace) -> bool {
    let n_max = *trace.checkpoints.last().unwrap();
    let final_value = *trace.values.last().unwrap();
    let max_abs = trace
        .values
        .iter()
        .fold(0.0f64, |a, z| a.max(z.norm()));
    let tail_osc = trace
        .checkpoints
        .iter()
        .zip(trace.values.iter())
        .filter(|(&c, _)| c > n_max / 2)
        .fold(0.0f64, |a, (_, z)| a.max((z - final_value).norm()));
    tail_osc < 0.05 * max_abs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::deterministic_path;

    fn table(n_max: u64) -> MangoldtTable {
        MangoldtTable::build(n_max).unwrap()
    }

    #[test]
    fn checkpoints_are_geometric_and_increasing() {
        let cs = default_checkpoints(100_000);
        assert!(cs.len() >= 40);
        assert_eq!(cs[0], 64);
        assert_eq!(*cs.last().unwrap(), 100_000);
        assert!(cs.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn truncate_unit_cases() {
        assert_eq!(truncate_unit(Complex64::new(0.5, 0.0)), Complex64::new(0.5, 0.0));
        assert_eq!(truncate_unit(Complex64::new(-2.0, 0.0)), Complex64::new(-1.0, 0.0));
        let z = truncate_unit(Complex64::new(3.0, 4.0));
        assert!((z - Complex64::new(0.6, 0.8)).norm() < 1e-15);
    }

    #[test]
    fn zero_path_trace_is_zero_and_growth_degenerate() {
        let path = SignedPath {
            r: 1,
            n_max: 5000,
            seed: SeedSpec::new(0, 0),
            y: vec![0.0; 5001],
            mode: PathMode::ExactEnumeration,
        };
        let cs = default_checkpoints(5000);
        let tr = partial_sum_trace(&path, Complex64::new(1.0, 0.0), &cs).unwrap();
        assert!(tr.values.iter().all(|z| z.norm() == 0.0));
        assert!(matches!(
            growth_exponent(&path, &cs),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn all_plus_r1_trace_approaches_log_derivative_of_zeta() {
        // Σ Λ(n)/n² → −ζ'(2)/ζ(2) ≈ 0.569961
        let t = table(1_000_000);
        let coeffs = goldbach_coefficients(&t, 1, 1_000_000, Method::Direct).unwrap();
        let path = deterministic_path(&coeffs);
        let cs = default_checkpoints(1_000_000);
        let tr = partial_sum_trace(&path, Complex64::new(2.0, 0.0), &cs).unwrap();
        let a = tr.values.last().unwrap().re;
        assert!((a - 0.569961).abs() < 1e-3, "A(1e6) = {a}");
    }

    #[test]
    fn trace_block_sums_are_consistent() {
        let t = table(20_000);
        let path = sample_path_exact(&t, 2, 20_000, SeedSpec::new(5, 1)).unwrap();
        let s = Complex64::new(0.7, 1.3);
        let cs = default_checkpoints(20_000);
        let tr = partial_sum_trace(&path, s, &cs).unwrap();
        for k in 1..cs.len() {
            let mut block = Kahan::<Complex64>::new();
            for n in (cs[k - 1] + 1)..=cs[k] {
                let y = path.y[n as usize];
                if y != 0.0 {
                    block.add(Complex64::from(y) * (-s * (n as f64).ln()).exp());
                }
            }
            let diff = tr.values[k] - tr.values[k - 1];
            let scale = tr.values[k].norm().max(1.0);
            assert!(
                (diff - block.value()).norm() <= 1e-12 * scale,
                "checkpoint {k}"
            );
        }
    }

    #[test]
    fn variance_series_r1_sigma2_stabilizes() {
        // Σ Λ(n)²/n⁴: oracle = direct summation; the integral tail bound
        // ∫ log x · x^{-4} dx shows N = 10^4 fixes 6 significant digits.
        let t = table(100_000);
        let coeffs = goldbach_coefficients(&t, 1, 100_000, Method::Direct).unwrap();
        let cs = vec![10_000u64, 100_000];
        let out = variance_series(&coeffs, 2.0, &cs).unwrap();
        let oracle: f64 = crate::sum::kahan_sum((1..=100_000u64).map(|n| {
            let l = t.mangoldt(n).unwrap();
            l * l / (n as f64).powi(4)
        }));
        assert!((out[1] - oracle).abs() < 1e-12);
        assert!(((out[0] - out[1]) / out[1]).abs() < 1e-6);
    }

    #[test]
    fn variance_series_extreme_decay_dominated_by_first_term() {
        let t = table(1000);
        let coeffs = goldbach_coefficients(&t, 2, 1000, Method::Direct).unwrap();
        let out = variance_series(&coeffs, 50.0, &[1000]).unwrap();
        // first nonzero W₂ term is n = 4: (log 2)⁴/4^100
        let first = 2f64.ln().powi(4) * (4f64).powf(-100.0);
        assert!((out[0] - first).abs() <= 1e-3 * first);
    }

    #[test]
    fn variance_series_divergent_slope_r1() {
        // σ = 0.3: the PNT-based oracle gives partial sums
        // ≈ N^{0.4}(2.5 log N − 6.25) + C; over N ∈ [10^4, 10^5] the log
        // factor lifts the fitted log-log slope to ≈ 0.51.
        let t = table(100_000);
        let coeffs = goldbach_coefficients(&t, 1, 100_000, Method::Direct).unwrap();
        let cs: Vec<u64> = default_checkpoints(100_000)
            .into_iter()
            .filter(|&c| c >= 10_000)
            .collect();
        let out = variance_series(&coeffs, 0.3, &cs).unwrap();
        let xs: Vec<f64> = cs.iter().map(|&c| (c as f64).ln()).collect();
        let ys: Vec<f64> = out.iter().map(|&v| v.ln()).collect();
        let (slope, _) = linear_fit(&xs, &ys).unwrap();
        assert!((0.45..0.56).contains(&slope), "slope = {slope}");
    }

    #[test]
    fn truncated_variance_exact_cases() {
        let t = table(20);
        let seed = SeedSpec::new(0, 0);
        // r = 1, n = 9, σ = 1: |X| = log3/9 < 1, V = (log3/9)²
        let v = truncated_variance(&t, 1, 9, 1.0, 100, seed).unwrap();
        let expected = (3f64.ln() / 9.0).powi(2);
        assert!((v - expected).abs() < 1e-15);
        // r = 1, n = 2, σ = 0: |X| = log2 < 1
        let v = truncated_variance(&t, 1, 2, 0.0, 100, seed).unwrap();
        assert!((v - 2f64.ln().powi(2)).abs() < 1e-15);
        // zero weight everywhere
        let v = truncated_variance(&t, 1, 6, 0.5, 100, seed).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn truncated_variance_clips_large_terms() {
        // r = 1, n = 9, σ = 0: |X| = log 3 > 1 → X' = ±1, V = 1
        let t = table(20);
        let v = truncated_variance(&t, 1, 9, 0.0, 100, SeedSpec::new(0, 0)).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn growth_exponent_deterministic_r1_near_one() {
        // ψ(N) ~ N ⇒ slope ≈ 1
        let t = table(100_000);
        let coeffs = goldbach_coefficients(&t, 1, 100_000, Method::Direct).unwrap();
        let path = deterministic_path(&coeffs);
        let cs = default_checkpoints(100_000);
        let (slope, _) = growth_exponent(&path, &cs).unwrap();
        assert!((slope - 1.0).abs() < 0.05, "slope = {slope}");
    }

    #[test]
    fn growth_exponent_random_walk_near_half() {
        // weights ≡ 1: plain Rademacher random walk, |A(N)| ~ √N
        let n_max = 100_000u64;
        let cs = default_checkpoints(n_max);
        let mut slopes: Vec<f64> = (0..100u64)
            .map(|rep| {
                let seed = SeedSpec::new(303, rep);
                let y: Vec<f64> = (0..=n_max)
                    .map(|n| {
                        if n == 0 {
                            0.0
                        } else {
                            crate::ensemble::draw_sign(seed, 1, n, 0).unwrap()
                        }
                    })
                    .collect();
                let path = SignedPath {
                    r: 1,
                    n_max,
                    seed,
                    y,
                    mode: PathMode::ExactEnumeration,
                };
                growth_exponent(&path, &cs).unwrap().0
            })
            .collect();
        let m = median(&mut slopes);
        assert!((m - 0.5).abs() < 0.1, "median slope = {m}");
    }

    #[test]
    fn estimate_abscissa_requires_ensemble() {
        let t = table(1000);
        assert!(estimate_abscissa(
            &t,
            1,
            1000,
            10,
            SeedSpec::new(0, 0),
            PathMode::ExactEnumeration
        )
        .is_err());
    }

    #[test]
    fn estimate_abscissa_r1_small() {
        let t = table(20_000);
        let est = estimate_abscissa(
            &t,
            1,
            20_000,
            50,
            SeedSpec::new(42, 0),
            PathMode::ExactEnumeration,
        )
        .unwrap();
        assert!(est.stderr >= 0.0);
        assert!(
            (0.40..0.70).contains(&est.sigma_hat),
            "sigma_hat = {}",
            est.sigma_hat
        );
    }

    #[test]
    fn tail_classifier_separates_deep_convergent_from_divergent() {
        let t = table(100_000);
        let cs = default_checkpoints(100_000);
        for rep in 0..5 {
            let path = sample_path_exact(&t, 1, 100_000, SeedSpec::new(88, rep)).unwrap();
            let stable = partial_sum_trace(&path, Complex64::new(1.25, 0.0), &cs).unwrap();
            assert!(tail_is_stable(&stable), "rep = {rep}");
            let divergent = partial_sum_trace(&path, Complex64::new(0.1, 0.0), &cs).unwrap();
            assert!(!tail_is_stable(&divergent), "rep = {rep}");
        }
    }
}
