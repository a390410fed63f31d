//! One function per subcommand. Each writes its outputs, then a manifest
//! recording parameters and output digests.

use crate::manifest::{csv_header, fmt_f64, RunManifest};
use anyhow::{Context, Result};
use num_complex::Complex64;
use rmdl_core::convolution::{goldbach_coefficients, Method};
use rmdl_core::dirichlet::{
    default_checkpoints, estimate_abscissa, partial_sum_trace, variance_series,
};
use rmdl_core::ensemble::{
    exact_distribution, sample_path_exact_with_budget, sample_path_surrogate, PathMode, SeedSpec,
    DEFAULT_PATH_BUDGET,
};
use rmdl_core::goldbach::{goldbach_record, SingularSeries};
use rmdl_core::mangoldt::MangoldtTable;
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

pub const SIEVE_MAGIC: &[u8; 4] = b"RMDL";
pub const SIEVE_VERSION: u32 = 1;

/// `RMDL_BUDGET_TERMS` overrides the enumeration cap for path sampling.
pub fn path_budget() -> u64 {
    std::env::var("RMDL_BUDGET_TERMS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_PATH_BUDGET)
}

pub struct Ctx {
    pub master_seed: u64,
    pub format: crate::OutputFormat,
    pub started: Instant,
}

fn finish(mut manifest: RunManifest, ctx: &Ctx, outputs: &[&Path]) -> Result<()> {
    for out in outputs {
        manifest.add_output(out)?;
    }
    manifest.duration_secs = ctx.started.elapsed().as_secs_f64();
    manifest.write(outputs[0])?;
    Ok(())
}

fn params(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

pub fn sieve(ctx: &Ctx, n_max: u64, out: &Path) -> Result<()> {
    let table = MangoldtTable::build(n_max)?;
    let manifest = RunManifest::new(
        "sieve",
        params(&[
            ("n_max", n_max.to_string()),
            ("format", ctx.format.as_str().to_string()),
        ]),
        ctx.master_seed,
    );
    match ctx.format {
        crate::OutputFormat::Csv => {
            let mut f = fs::File::create(out).context("create csv")?;
            f.write_all(csv_header(&manifest, "n,lambda,prime_flag").as_bytes())?;
            let mut buf = String::from("n,lambda,prime_flag\n");
            for n in 1..=n_max {
                buf.push_str(&format!(
                    "{n},{},{}\n",
                    fmt_f64(table.mangoldt(n)?),
                    u8::from(table.is_prime(n)?)
                ));
                if buf.len() > 1 << 20 {
                    f.write_all(buf.as_bytes())?;
                    buf.clear();
                }
            }
            f.write_all(buf.as_bytes())?;
        }
        crate::OutputFormat::Json => {
            anyhow::bail!("sieve supports binary (default) or csv output");
        }
        crate::OutputFormat::Binary => {
            // header: magic "RMDL", version u32 LE, n_max u64 LE, then the
            // little-endian f64 array Λ(1)..Λ(n_max)
            let mut f = fs::File::create(out).context("create binary dump")?;
            f.write_all(SIEVE_MAGIC)?;
            f.write_all(&SIEVE_VERSION.to_le_bytes())?;
            f.write_all(&n_max.to_le_bytes())?;
            let mut buf = Vec::with_capacity(8 << 10);
            for n in 1..=n_max {
                buf.extend_from_slice(&table.mangoldt(n)?.to_le_bytes());
                if buf.len() > 1 << 20 {
                    f.write_all(&buf)?;
                    buf.clear();
                }
            }
            f.write_all(&buf)?;
        }
    }
    finish(manifest, ctx, &[out])
}

pub fn conv(ctx: &Ctx, r: u32, n_max: u64, method: Method, out: &Path) -> Result<()> {
    let table = MangoldtTable::build(n_max)?;
    let coeffs = goldbach_coefficients(&table, r, n_max, method)?;
    let manifest = RunManifest::new(
        "conv",
        params(&[
            ("r", r.to_string()),
            ("n_max", n_max.to_string()),
            ("method", method.as_str().to_string()),
        ]),
        ctx.master_seed,
    );
    let mut body = csv_header(&manifest, "n,g,w");
    body.push_str("n,g,w\n");
    for n in 1..=n_max as usize {
        body.push_str(&format!(
            "{n},{},{}\n",
            fmt_f64(coeffs.g[n]),
            fmt_f64(coeffs.w[n])
        ));
    }
    fs::write(out, body)?;
    let sidecar = sidecar_path(out);
    fs::write(
        &sidecar,
        serde_json::to_string_pretty(&serde_json::json!({
            "r": r,
            "n_max": n_max,
            "method": method.as_str(),
            "max_abs_error_bound": coeffs.max_abs_error_bound,
        }))?,
    )?;
    finish(manifest, ctx, &[out, &sidecar])
}

fn sidecar_path(out: &Path) -> std::path::PathBuf {
    let mut p = out.as_os_str().to_owned();
    p.push(".meta.json");
    p.into()
}

pub fn sample(
    ctx: &Ctx,
    r: u32,
    n_max: u64,
    replicate: u64,
    mode: PathMode,
    out: &Path,
) -> Result<()> {
    let seed = SeedSpec::new(ctx.master_seed, replicate);
    let budget = path_budget();
    let table = MangoldtTable::build(n_max)?;
    let path = match mode {
        PathMode::ExactEnumeration => sample_path_exact_with_budget(&table, r, n_max, seed, budget)?,
        PathMode::GaussianSurrogate => {
            let coeffs = goldbach_coefficients(&table, r, n_max, Method::Fft)?;
            sample_path_surrogate(&coeffs, seed)
        }
    };
    let manifest = RunManifest::new(
        "sample",
        params(&[
            ("r", r.to_string()),
            ("n_max", n_max.to_string()),
            ("seed", ctx.master_seed.to_string()),
            ("replicate", replicate.to_string()),
            ("mode", mode.as_str().to_string()),
            ("budget_terms", budget.to_string()),
        ]),
        ctx.master_seed,
    );
    let mut body = csv_header(&manifest, "n,y");
    body.push_str("n,y\n");
    for n in 1..=n_max as usize {
        body.push_str(&format!("{n},{}\n", fmt_f64(path.y[n])));
    }
    fs::write(out, body)?;
    finish(manifest, ctx, &[out])
}

pub fn distribution(ctx: &Ctx, r: u32, n: u64, out: &Path) -> Result<()> {
    let table = MangoldtTable::build(n.max(2))?;
    let dist = exact_distribution(&table, r, n)?;
    let manifest = RunManifest::new(
        "distribution",
        params(&[("r", r.to_string()), ("n", n.to_string())]),
        ctx.master_seed,
    );
    let mut body = csv_header(&manifest, "value,count,denominator_log2");
    body.push_str("value,count,denominator_log2\n");
    for (v, c) in dist.support.iter().zip(dist.counts.iter()) {
        body.push_str(&format!("{},{c},{}\n", fmt_f64(*v), dist.denominator_log2));
    }
    fs::write(out, body)?;
    finish(manifest, ctx, &[out])
}

#[allow(clippy::too_many_arguments)]
pub fn trace(
    ctx: &Ctx,
    r: u32,
    n_max: u64,
    replicate: u64,
    sigma: f64,
    t: f64,
    out: &Path,
) -> Result<()> {
    let seed = SeedSpec::new(ctx.master_seed, replicate);
    let table = MangoldtTable::build(n_max)?;
    let path = sample_path_exact_with_budget(&table, r, n_max, seed, path_budget())?;
    let checkpoints = default_checkpoints(n_max);
    let tr = partial_sum_trace(&path, Complex64::new(sigma, t), &checkpoints)?;
    let manifest = RunManifest::new(
        "trace",
        params(&[
            ("r", r.to_string()),
            ("n_max", n_max.to_string()),
            ("seed", ctx.master_seed.to_string()),
            ("replicate", replicate.to_string()),
            ("sigma", fmt_f64(sigma)),
            ("t", fmt_f64(t)),
        ]),
        ctx.master_seed,
    );
    let mut body = csv_header(&manifest, "N,re_A,im_A,abs_A");
    body.push_str("N,re_A,im_A,abs_A\n");
    for (ck, z) in tr.checkpoints.iter().zip(tr.values.iter()) {
        body.push_str(&format!(
            "{ck},{},{},{}\n",
            fmt_f64(z.re),
            fmt_f64(z.im),
            fmt_f64(z.norm())
        ));
    }
    fs::write(out, body)?;
    finish(manifest, ctx, &[out])
}

pub fn variance(ctx: &Ctx, r: u32, n_max: u64, sigma: f64, out: &Path) -> Result<()> {
    let table = MangoldtTable::build(n_max)?;
    let coeffs = goldbach_coefficients(&table, r, n_max, Method::Fft)?;
    let checkpoints = default_checkpoints(n_max);
    let sums = variance_series(&coeffs, sigma, &checkpoints)?;
    let manifest = RunManifest::new(
        "variance",
        params(&[
            ("r", r.to_string()),
            ("n_max", n_max.to_string()),
            ("sigma", fmt_f64(sigma)),
        ]),
        ctx.master_seed,
    );
    let mut body = csv_header(&manifest, "N,partial_sum");
    body.push_str("N,partial_sum\n");
    for (ck, s) in checkpoints.iter().zip(sums.iter()) {
        body.push_str(&format!("{ck},{}\n", fmt_f64(*s)));
    }
    fs::write(out, body)?;
    finish(manifest, ctx, &[out])
}

pub fn abscissa(
    ctx: &Ctx,
    r: u32,
    n_max: u64,
    ensemble: u64,
    mode: PathMode,
    out: &Path,
) -> Result<()> {
    let table = MangoldtTable::build(n_max)?;
    let est = estimate_abscissa(
        &table,
        r,
        n_max,
        ensemble,
        SeedSpec::new(ctx.master_seed, 0),
        mode,
    )?;
    let manifest = RunManifest::new(
        "abscissa",
        params(&[
            ("r", r.to_string()),
            ("n_max", n_max.to_string()),
            ("ensemble", ensemble.to_string()),
            ("seed", ctx.master_seed.to_string()),
            ("mode", mode.as_str().to_string()),
        ]),
        ctx.master_seed,
    );
    let doc = serde_json::json!({
        "r": r,
        "sigma_hat": est.sigma_hat,
        "stderr": est.stderr,
        "ensemble": est.ensemble_size,
        "n_max": est.n_max,
        "mode": mode.as_str(),
        "method": est.method.as_str(),
    });
    fs::write(out, serde_json::to_string_pretty(&doc)?)?;
    finish(manifest, ctx, &[out])
}

pub fn goldbach(ctx: &Ctx, n_max: u64, prime_cutoff: u64, out: &Path) -> Result<()> {
    let table = MangoldtTable::build(n_max)?;
    let coeffs = goldbach_coefficients(&table, 2, n_max, Method::Fft)?;
    let ss = SingularSeries::new(prime_cutoff)?;
    let manifest = RunManifest::new(
        "goldbach",
        params(&[
            ("n_max", n_max.to_string()),
            ("prime_cutoff", prime_cutoff.to_string()),
        ]),
        ctx.master_seed,
    );
    let mut body = csv_header(
        &manifest,
        "n,pair_count,w2_prime_part,singular_series,hl_prediction,g2",
    );
    body.push_str("n,pair_count,w2_prime_part,singular_series,hl_prediction,g2\n");
    for n in (4..=n_max).step_by(2) {
        let rec = goldbach_record(&table, &ss, n)?;
        body.push_str(&format!(
            "{n},{},{},{},{},{}\n",
            rec.pair_count,
            fmt_f64(rec.w2_prime_part),
            fmt_f64(rec.singular_series),
            fmt_f64(rec.hl_prediction),
            fmt_f64(coeffs.g[n as usize])
        ));
    }
    fs::write(out, body)?;
    finish(manifest, ctx, &[out])
}

pub fn diverge_sigma1(ctx: &Ctx, n_max: u64, out: &Path) -> Result<()> {
    let table = MangoldtTable::build(n_max)?;
    let coeffs = goldbach_coefficients(&table, 2, n_max, Method::Fft)?;
    let checkpoints = default_checkpoints(n_max);
    let slope = rmdl_core::goldbach::divergence_diagnostic_sigma1(&coeffs, &checkpoints)?;
    let upper: Vec<u64> = checkpoints
        .iter()
        .copied()
        .filter(|&c| c > n_max / 2)
        .collect();
    let slope_upper = rmdl_core::goldbach::divergence_diagnostic_sigma1(&coeffs, &upper)?;
    let manifest = RunManifest::new(
        "diverge-sigma1",
        params(&[("n_max", n_max.to_string())]),
        ctx.master_seed,
    );
    let doc = serde_json::json!({
        "n_max": n_max,
        "slope_vs_log_n": slope,
        "slope_upper_half": slope_upper,
        "checkpoints": checkpoints.len(),
    });
    fs::write(out, serde_json::to_string_pretty(&doc)?)?;
    finish(manifest, ctx, &[out])
}
