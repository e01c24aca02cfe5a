//! Statistical verification primitives: two-sample Kolmogorov-Smirnov with
//! asymptotic p-values, Monte-Carlo Laplace-transform estimates with CLT
//! error bars, and histogram-vs-density goodness of fit. Everything here is
//! deterministic given the input batches, so reports reproduce bit-for-bit.

use crate::error::{Error, Result};
use crate::quad;
use crate::samplers::SampleBatch;
use crate::special_fn::inc_gamma_q;
use serde::Serialize;

/// Outcome of one verification check.
#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub n: usize,
    pub seed: u64,
    pub notes: String,
}

impl TestReport {
    pub fn new(
        name: impl Into<String>,
        statistic: f64,
        threshold: f64,
        n: usize,
        seed: u64,
        notes: impl Into<String>,
    ) -> Self {
        TestReport {
            name: name.into(),
            statistic,
            threshold,
            pass: statistic <= threshold,
            n,
            seed,
            notes: notes.into(),
        }
    }
}

/// Kolmogorov's limiting tail Q(t) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 t^2).
pub fn kolmogorov_q(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    if t > 8.0 {
        return 0.0;
    }
    let mut sum = 0.0f64;
    let mut sign = 1.0f64;
    for k in 1..200 {
        let k = k as f64;
        let term = (-2.0 * k * k * t * t).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample KS statistic and its asymptotic p-value.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut xa: Vec<f64> = a.to_vec();
    let mut xb: Vec<f64> = b.to_vec();
    xa.sort_by(|p, q| p.partial_cmp(q).unwrap());
    xb.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (na, nb) = (xa.len(), xb.len());
    let mut d = 0.0f64;
    let (mut i, mut j) = (0usize, 0usize);
    while i < na && j < nb {
        let x = xa[i].min(xb[j]);
        while i < na && xa[i] <= x {
            i += 1;
        }
        while j < nb && xb[j] <= x {
            j += 1;
        }
        let fa = i as f64 / na as f64;
        let fb = j as f64 / nb as f64;
        d = d.max((fa - fb).abs());
    }
    let n_eff = (na as f64 * nb as f64) / ((na + nb) as f64);
    let p = kolmogorov_q(n_eff.sqrt() * d);
    (d, p)
}

/// One-sample KS statistic against a reference cdf, with asymptotic p-value.
pub fn ks_one_sample(values: &[f64], cdf: &dyn Fn(f64) -> f64) -> (f64, f64) {
    let mut xs = values.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x).clamp(0.0, 1.0);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    (d, kolmogorov_q(n.sqrt() * d))
}

/// Two-sample Kolmogorov-Smirnov check at the 1% level.
pub fn ks_two_sample(a: &SampleBatch, b: &SampleBatch) -> Result<TestReport> {
    if a.values.len() < 1000 || b.values.len() < 1000 {
        return Err(Error::domain(format!(
            "ks_two_sample needs n >= 1000 on each side, got {} and {}",
            a.values.len(),
            b.values.len()
        )));
    }
    let (d, p) = ks_statistic(&a.values, &b.values);
    let (na, nb) = (a.values.len() as f64, b.values.len() as f64);
    // critical value at the 1% level: sqrt(-ln(alpha/2)/2) = 1.6276...
    let crit = (-(0.005f64).ln() / 2.0).sqrt() * ((na + nb) / (na * nb)).sqrt();
    Ok(TestReport::new(
        format!("ks[{} vs {}]", a.sampler_id, b.sampler_id),
        d,
        crit,
        a.values.len() + b.values.len(),
        a.seed,
        format!("p={p:.6e} other_seed={}", b.seed),
    ))
}

/// One Laplace-transform estimate E e^{-lambda X} with its standard error.
#[derive(Debug, Clone, Serialize)]
pub struct LaplacePoint {
    pub lambda: f64,
    pub mean: f64,
    pub std_error: f64,
}

/// Monte-Carlo Laplace transform of the batch at each lambda.
pub fn mc_laplace(batch: &SampleBatch, lambdas: &[f64]) -> Result<Vec<LaplacePoint>> {
    let n = batch.values.len();
    if n == 0 {
        return Err(Error::domain("mc_laplace needs a nonempty batch"));
    }
    let mut out = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        if !(lambda >= 0.0) {
            return Err(Error::domain(format!("lambda must be >= 0, got {lambda}")));
        }
        let mut sum = 0.0f64;
        let mut sumsq = 0.0f64;
        for &x in &batch.values {
            let e = (-lambda * x).exp();
            sum += e;
            sumsq += e * e;
        }
        let mean = sum / n as f64;
        let var = (sumsq / n as f64 - mean * mean).max(0.0);
        out.push(LaplacePoint {
            lambda,
            mean,
            std_error: (var / n as f64).sqrt(),
        });
    }
    Ok(out)
}

/// Upper quantile of the chi-square law by bisection on the survival
/// function; good enough for the harness's fixed levels.
pub fn chi2_critical(dof: usize, alpha: f64) -> f64 {
    let k = dof as f64;
    let (mut lo, mut hi) = (1e-9, k + 10.0 * (2.0 * k).sqrt() + 20.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if inc_gamma_q(k / 2.0, mid / 2.0) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Binned chi-square plus sup-norm comparison of a sample against a density.
/// Bin edges follow empirical quantiles so expected counts stay balanced;
/// expected masses come from integrating the density over each bin with the
/// double-exponential rule (singular support edges welcome).
pub fn pdf_vs_hist(
    batch: &SampleBatch,
    pdf: &dyn Fn(f64) -> f64,
    support: (f64, f64),
    bins: usize,
) -> Result<TestReport> {
    let n = batch.values.len();
    if n < 10_000 {
        return Err(Error::domain(format!(
            "pdf_vs_hist needs n >= 10000, got {n}"
        )));
    }
    if bins < 4 {
        return Err(Error::domain("pdf_vs_hist needs at least 4 bins"));
    }
    let mut xs = batch.values.clone();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    if xs[0] < support.0 || xs[n - 1] > support.1 {
        return Err(Error::domain(format!(
            "samples escape the declared support [{}, {}]",
            support.0, support.1
        )));
    }
    // interior edges at empirical quantiles; outer edges at the support
    let mut edges = Vec::with_capacity(bins + 1);
    edges.push(support.0);
    for j in 1..bins {
        edges.push(xs[j * n / bins]);
    }
    edges.push(support.1);
    let mut chi2 = 0.0f64;
    let mut sup = 0.0f64;
    let mut used = 0usize;
    for j in 0..bins {
        let (lo, hi) = (edges[j], edges[j + 1]);
        if !(hi > lo) {
            continue; // duplicate quantile edge; merge into the next bin
        }
        let observed = xs.iter().filter(|&&x| x >= lo && (x < hi || (j == bins - 1 && x <= hi))).count() as f64;
        let mass = if hi.is_finite() {
            quad::tanh_sinh(&|x, _, _| pdf(x), lo, hi, 1e-10, 1e-8).value
        } else {
            let head = quad::tanh_sinh(&|x, _, _| pdf(x), lo, lo + 50.0, 1e-10, 1e-8).value;
            let tail = quad::semi_infinite(|x| pdf(x), lo + 50.0, 1e-10, 1e-8, 400).value;
            head + tail
        };
        let expected = n as f64 * mass;
        if expected < 5.0 {
            continue; // chi-square approximation invalid in starved bins
        }
        let resid = (observed - expected) / expected.sqrt();
        chi2 += resid * resid;
        sup = sup.max(resid.abs());
        used += 1;
    }
    if used < 4 {
        return Err(Error::domain("too few usable bins after merging"));
    }
    let dof = used - 1;
    let p = inc_gamma_q(dof as f64 / 2.0, chi2 / 2.0);
    let crit = chi2_critical(dof, 0.01);
    Ok(TestReport::new(
        format!("pdf_vs_hist[{}]", batch.sampler_id),
        chi2,
        crit,
        n,
        batch.seed,
        format!("p={p:.6e} sup_resid={sup:.4} bins={used}"),
    ))
}
