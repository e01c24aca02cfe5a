//! Random-variate generation for GGC subordinator values Gamma_t(G), their
//! normalized Dirichlet means D_t(G), and the alternative path-free
//! representations (compound Poisson shot noise, affine fixed-point
//! iteration, power-jump series), plus exact-law shortcut samplers for the
//! catalog families that reduce to gamma/beta/uniform primitives.
//!
//! The discretized subordinator is a Riemann sum over a fine partition of
//! the time axis: Gamma_m(G) ~= sum_i h(u_i) dg_i with h(u) = 1/quantile_G(u/m)
//! evaluated at cell midpoints and dg_i independent gamma(m/n_steps)
//! increments. For fine partitions the increment shape is far below one, so
//! individual increments underflow f64; all accumulation is done in log
//! scale relative to the largest increment, which keeps the normalized mean
//! well defined down to arbitrarily small m.

use crate::error::{Error, Result};
use crate::mixing_laws::MixingLaw;
use crate::special_fn::ln_big_a;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::cell::RefCell;
use std::time::Instant;

const PI: f64 = std::f64::consts::PI;

/// Terms whose log falls more than this far below the running maximum are
/// dropped from the log-scaled sums; the discarded relative mass is below
/// n * exp(-LN_WINDOW), invisible at f64 precision for any sane n_steps.
const LN_WINDOW: f64 = 80.0;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic stream of variates. Identical seeds give identical
/// sequences on every platform; distinct batch indices get statistically
/// independent streams via [`RandomStream::for_index`].
pub struct RandomStream {
    rng: ChaCha8Rng,
    spare_normal: Option<f64>,
    pub seed: u64,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare_normal: None,
            seed,
        }
    }

    /// Independent stream for sample index `index` under a common batch seed.
    pub fn for_index(seed: u64, index: u64) -> Self {
        RandomStream::new(splitmix64(
            seed.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        ))
    }

    /// Uniform on the open interval (0,1). Never returns 0 or 1.
    pub fn uniform(&mut self) -> f64 {
        loop {
            let u = (self.rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0);
            if u > 0.0 {
                return u;
            }
        }
    }

    /// Standard exponential.
    pub fn exponential(&mut self) -> f64 {
        -self.uniform().ln()
    }

    /// Standard normal via the polar rejection method (second coordinate cached).
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        loop {
            let v1 = 2.0 * self.uniform() - 1.0;
            let v2 = 2.0 * self.uniform() - 1.0;
            let s = v1 * v1 + v2 * v2;
            if s >= 1.0 || s == 0.0 {
                continue;
            }
            let f = (-2.0 * s.ln() / s).sqrt();
            self.spare_normal = Some(v2 * f);
            return v1 * f;
        }
    }

    /// Unit-scale gamma variate. Squeeze rejection for shape >= 1, boosting
    /// (gamma_a = gamma_{a+1} U^{1/a}) below; the boosted value can underflow
    /// for very small shapes, use [`RandomStream::gamma_log`] there.
    pub fn gamma(&mut self, shape: f64) -> f64 {
        debug_assert!(shape > 0.0);
        if shape < 1.0 {
            let g = self.gamma(shape + 1.0);
            let u = self.uniform();
            return g * u.powf(1.0 / shape);
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (3.0 * d.sqrt());
        loop {
            let x = self.normal();
            let t = 1.0 + c * x;
            if t <= 0.0 {
                continue;
            }
            let v = t * t * t;
            let u = self.uniform();
            let x2 = x * x;
            if u < 1.0 - 0.0331 * x2 * x2 {
                return d * v;
            }
            if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
                return d * v;
            }
        }
    }

    /// log of a gamma variate, exact in law and immune to underflow for
    /// small shapes: ln gamma_a = ln gamma_{1+a} + ln(U)/a.
    pub fn gamma_log(&mut self, shape: f64) -> f64 {
        debug_assert!(shape > 0.0);
        if shape >= 1.0 {
            return self.gamma(shape).ln();
        }
        let g = self.gamma(shape + 1.0);
        let u = self.uniform();
        g.ln() + u.ln() / shape
    }

    /// Beta variate as a ratio of gammas; small shapes go through log space
    /// so the ratio never degenerates to 0/0.
    pub fn beta(&mut self, a: f64, b: f64) -> f64 {
        debug_assert!(a > 0.0 && b > 0.0);
        if a >= 1.0 && b >= 1.0 {
            let x = self.gamma(a);
            let y = self.gamma(b);
            return x / (x + y);
        }
        let la = self.gamma_log(a);
        let lb = self.gamma_log(b);
        1.0 / (1.0 + (lb - la).exp())
    }

    /// Positive stable variate normalized by E exp(-l S) = exp(-l^alpha),
    /// via the angular-factor representation S = (A(pi U)/W)^{(1-a)/a} with
    /// W standard exponential.
    pub fn stable(&mut self, alpha: f64) -> f64 {
        debug_assert!(alpha > 0.0 && alpha < 1.0);
        let u = PI * self.uniform();
        let w = self.exponential();
        (((1.0 - alpha) / alpha) * (ln_big_a(alpha, u) - w.ln())).exp()
    }
}

/// Draw from an arbitrary mixing law. Stable laws use the direct angular
/// construction, reciprocals invert the inner draw, everything else goes
/// through the quantile.
pub fn mixing_law_variate(rng: &mut RandomStream, g: &MixingLaw) -> Result<f64> {
    match g {
        MixingLaw::Stable(alpha) => Ok(rng.stable(*alpha)),
        MixingLaw::Reciprocal(inner) => Ok(1.0 / mixing_law_variate(rng, inner)?),
        _ => g.quantile(rng.uniform()),
    }
}

/// One discretized subordinator draw in log scale. The actual sums are
/// `weighted * exp(ln_scale)` and `total * exp(ln_scale)`; the normalized
/// mean `weighted/total` never touches the scale factor, so it stays finite
/// even when the total mass honestly underflows f64.
#[derive(Debug, Clone, Copy)]
pub struct WgDraw {
    pub ln_scale: f64,
    pub weighted: f64,
    pub total: f64,
}

impl WgDraw {
    /// Subordinator value; may underflow to 0 for tiny time mass.
    pub fn gamma_value(&self) -> f64 {
        self.weighted * self.ln_scale.exp()
    }

    /// log of the subordinator value, safe against underflow.
    pub fn ln_gamma_value(&self) -> f64 {
        self.ln_scale + self.weighted.ln()
    }

    /// Normalized (Dirichlet) mean: weighted sum over total gamma mass.
    pub fn dirichlet_value(&self) -> f64 {
        self.weighted / self.total
    }

    /// Total gamma mass of the partition, a gamma(m) variate.
    pub fn total_gamma(&self) -> f64 {
        self.total * self.ln_scale.exp()
    }
}

thread_local! {
    static SCRATCH_U: RefCell<Vec<f64>> = const { RefCell::new(Vec::new()) };
}

/// Midpoint-discretized integration kernel for a subordinator of total time
/// mass m split into equal cells. Kernel values are precomputed once per
/// kernel, so repeated draws cost only the gamma increments.
#[derive(Debug, Clone)]
pub struct WgKernel {
    hvals: Vec<f64>,
    m: f64,
    shape: f64,
}

impl WgKernel {
    /// Kernel h(u) = 1/quantile_G(u/m) for the mixing law G.
    pub fn new(g: &MixingLaw, m: f64, n_steps: usize) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::domain(format!("time mass must be positive, got {m}")));
        }
        if n_steps == 0 {
            return Err(Error::domain("need at least one partition cell"));
        }
        // the law of the sum is only defined when E log+(1/G) is finite
        if g.support().0 == 0.0 && g.log_moment().is_err() {
            return Err(Error::Divergent(format!(
                "kernel for {} is not log-integrable near 0",
                g.spec_string()
            )));
        }
        let n = n_steps as f64;
        let mut hvals = Vec::with_capacity(n_steps);
        for i in 0..n_steps {
            let p = (i as f64 + 0.5) / n;
            let q = g.quantile(p)?;
            let h = 1.0 / q;
            if !h.is_finite() {
                return Err(Error::Divergent(format!(
                    "kernel value at cell {i} is not finite for {}",
                    g.spec_string()
                )));
            }
            hvals.push(h);
        }
        Ok(WgKernel {
            hvals,
            m,
            shape: m / n,
        })
    }

    /// Kernel from an arbitrary nonnegative function of the time coordinate
    /// u in (0, m), evaluated at cell midpoints.
    pub fn from_kernel(h: impl Fn(f64) -> f64, m: f64, n_steps: usize) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::domain(format!("time mass must be positive, got {m}")));
        }
        if n_steps == 0 {
            return Err(Error::domain("need at least one partition cell"));
        }
        let n = n_steps as f64;
        let mut hvals = Vec::with_capacity(n_steps);
        for i in 0..n_steps {
            let u = (i as f64 + 0.5) / n * m;
            let v = h(u);
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::domain(format!(
                    "kernel must be finite and nonnegative, got {v} at u={u}"
                )));
            }
            hvals.push(v);
        }
        Ok(WgKernel {
            hvals,
            m,
            shape: m / n,
        })
    }

    /// Time-reversed kernel u -> h(m-u); the summed law is unchanged because
    /// the gamma increments are exchangeable.
    pub fn reversed(&self) -> Self {
        let mut hvals = self.hvals.clone();
        hvals.reverse();
        WgKernel {
            hvals,
            m: self.m,
            shape: self.shape,
        }
    }

    pub fn n_steps(&self) -> usize {
        self.hvals.len()
    }

    pub fn time_mass(&self) -> f64 {
        self.m
    }

    /// Exact Laplace transform of the discretized sum (the increments are
    /// independent gammas, so the transform is a finite product). Useful as
    /// a zero-noise oracle for the sampler and as a discretization-drift
    /// diagnostic between step counts.
    pub fn laplace_exact(&self, lambda: f64) -> f64 {
        let s: f64 = self.hvals.iter().map(|&h| (lambda * h).ln_1p()).sum();
        (-self.shape * s).exp()
    }

    /// One draw of all increment sums in log scale.
    pub fn draw(&self, rng: &mut RandomStream) -> WgDraw {
        let n = self.hvals.len();
        let a = self.shape;
        if a >= 1.0 {
            let mut weighted = 0.0;
            let mut total = 0.0;
            for &h in &self.hvals {
                let g = rng.gamma(a);
                weighted += h * g;
                total += g;
            }
            return WgDraw {
                ln_scale: 0.0,
                weighted,
                total,
            };
        }
        // Small-shape path. ln dg_i = ln gamma_{1+a} + ln(U_i)/a is dominated
        // by the ln(U_i)/a term, so only increments whose uniform is within a
        // hair of the largest can matter. Prefilter on the uniforms alone
        // (slack 12 covers the ln gamma_{1+a} spread), then instantiate the
        // gamma factor only for the survivors.
        SCRATCH_U.with(|cell| {
            let mut us = cell.borrow_mut();
            us.clear();
            us.reserve(n);
            let mut umax = 0.0f64;
            for _ in 0..n {
                let u = rng.uniform();
                if u > umax {
                    umax = u;
                }
                us.push(u);
            }
            let thresh = umax * (-(a * (LN_WINDOW + 12.0))).exp();
            let mut kept: Vec<(usize, f64)> = Vec::with_capacity(96);
            for (i, &u) in us.iter().enumerate() {
                if u >= thresh {
                    let g = rng.gamma(1.0 + a);
                    kept.push((i, g.ln() + u.ln() / a));
                }
            }
            let lmax = kept
                .iter()
                .fold(f64::NEG_INFINITY, |acc, &(_, l)| acc.max(l));
            let mut weighted = 0.0;
            let mut total = 0.0;
            for &(i, l) in &kept {
                let e = (l - lmax).exp();
                weighted += self.hvals[i] * e;
                total += e;
            }
            WgDraw {
                ln_scale: lmax,
                weighted,
                total,
            }
        })
    }
}

/// Unit-scale gamma draw with domain checking.
pub fn gamma_variate(rng: &mut RandomStream, shape: f64) -> Result<f64> {
    if !(shape > 0.0) || !shape.is_finite() {
        return Err(Error::domain(format!("gamma shape must be positive, got {shape}")));
    }
    Ok(rng.gamma(shape))
}

/// One discretized subordinator draw; builds the kernel on each call, so
/// batch work should construct a [`WgKernel`] once and reuse it.
pub fn wiener_gamma_sample(
    rng: &mut RandomStream,
    g: &MixingLaw,
    m: f64,
    n_steps: usize,
) -> Result<f64> {
    Ok(WgKernel::new(g, m, n_steps)?.draw(rng).gamma_value())
}

/// One normalized-mean draw: the weighted sum divided by the realized total
/// gamma mass of the same increments.
pub fn dirichlet_mean_sample(
    rng: &mut RandomStream,
    g: &MixingLaw,
    m: f64,
    n_steps: usize,
) -> Result<f64> {
    Ok(WgKernel::new(g, m, n_steps)?.draw(rng).dirichlet_value())
}

/// Default shot-noise truncation horizon: far enough that the expected
/// discarded tail mass m E[K] e^{-T} stays below 1e-8. Laws with infinite
/// reciprocal mean are capped, which only lengthens the horizon.
pub fn compound_poisson_horizon(g: &MixingLaw, m: f64) -> f64 {
    let ek = g.mean_inverse();
    let ek = if ek.is_finite() { ek.max(1e-300) } else { 1e6 };
    (m * ek / 1e-8).ln_1p().max(20.0)
}

/// Shot-noise representation: jumps e^{-tau_i} K_i with tau_i the arrival
/// times of a rate-m Poisson process truncated at `horizon` and
/// K_i = exponential/G independent marks.
pub fn compound_poisson_sample(
    rng: &mut RandomStream,
    g: &MixingLaw,
    m: f64,
    horizon: f64,
) -> Result<f64> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::domain(format!("time mass must be positive, got {m}")));
    }
    if !(horizon > 0.0) {
        return Err(Error::domain(format!("horizon must be positive, got {horizon}")));
    }
    let mut s = 0.0f64;
    let mut sum = 0.0f64;
    loop {
        s += rng.exponential() / m;
        if s > horizon {
            return Ok(sum);
        }
        sum += (-s).exp() * rng.exponential() / mixing_law_variate(rng, g)?;
    }
}

/// Affine fixed-point iteration X <- U^{1/m} (X + K) with K = exponential/G.
/// The stationary law is the subordinator value at time mass m; the iteration
/// forgets x0 geometrically (each step multiplies by U^{1/m}).
pub fn affine_iterate(
    rng: &mut RandomStream,
    g: &MixingLaw,
    m: f64,
    iters: usize,
    x0: f64,
) -> Result<f64> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::domain(format!("time mass must be positive, got {m}")));
    }
    if iters == 0 {
        return Err(Error::domain("need at least one iteration"));
    }
    if !(x0 >= 0.0) {
        return Err(Error::domain(format!("x0 must be nonnegative, got {x0}")));
    }
    let mut x = x0;
    for _ in 0..iters {
        let k = rng.exponential() / mixing_law_variate(rng, g)?;
        x = rng.uniform().powf(1.0 / m) * (x + k);
    }
    Ok(x)
}

/// Sum of alpha-th powers of the gamma increments over a fine partition of
/// [0, t]. For alpha >= 1 the limit is a GGC subordinator; below 1 it is
/// still a well-defined self-decomposable law and is sampled all the same
/// (the GGC classification elsewhere flags it).
pub fn power_jump_sample(
    rng: &mut RandomStream,
    alpha: f64,
    t: f64,
    n_steps: usize,
) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("time mass must be positive, got {t}")));
    }
    if n_steps == 0 {
        return Err(Error::domain("need at least one partition cell"));
    }
    let n = n_steps;
    let a = t / n as f64;
    if a >= 1.0 {
        let mut sum = 0.0;
        for _ in 0..n {
            sum += rng.gamma(a).powf(alpha);
        }
        return Ok(sum);
    }
    // log-scaled accumulation of exp(alpha ln dg_i), same prefilter idea as
    // the kernel draw but with the window widened by 1/alpha
    let window = LN_WINDOW / alpha.min(1.0);
    SCRATCH_U.with(|cell| {
        let mut us = cell.borrow_mut();
        us.clear();
        us.reserve(n);
        let mut umax = 0.0f64;
        for _ in 0..n {
            let u = rng.uniform();
            if u > umax {
                umax = u;
            }
            us.push(u);
        }
        let thresh = umax * (-(a * (window + 12.0))).exp();
        let mut kept: Vec<f64> = Vec::with_capacity(96);
        let mut lmax = f64::NEG_INFINITY;
        for &u in us.iter() {
            if u >= thresh {
                let g = rng.gamma(1.0 + a);
                let l = alpha * (g.ln() + u.ln() / a);
                if l > lmax {
                    lmax = l;
                }
                kept.push(l);
            }
        }
        let sum: f64 = kept.iter().map(|&l| (l - lmax).exp()).sum();
        Ok(sum * lmax.exp())
    })
}

fn is_half(alpha: f64) -> bool {
    (alpha - 0.5).abs() < 1e-12
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

/// Exact-law draw of the normalized mean D_t(G) for catalog families with a
/// beta/gamma/uniform construction.
pub fn closed_form_dirichlet(rng: &mut RandomStream, g: &MixingLaw, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("time mass must be positive, got {t}")));
    }
    match g {
        MixingLaw::ArcSine => Ok(1.0 / rng.beta(0.5, 0.5 + t)),
        MixingLaw::GAlpha(alpha) if is_half(*alpha) => Ok(1.0 / rng.beta(0.5, 0.5 + t)),
        MixingLaw::GAlpha(alpha) if near(t, 1.0 - *alpha) => {
            Ok(rng.uniform().powf(-1.0 / *alpha))
        }
        MixingLaw::ShiftedG0(mu) if *mu > 0.0 && near(t, 1.0) => {
            let u = rng.uniform();
            Ok((u * (1.0 / mu).ln_1p()).exp() / (mu + 1.0))
        }
        MixingLaw::Reciprocal(inner) => match inner.as_ref() {
            MixingLaw::ArcSine => Ok(rng.beta(t + 0.5, t + 0.5)),
            MixingLaw::GAlpha(alpha) if is_half(*alpha) => Ok(rng.beta(t + 0.5, t + 0.5)),
            MixingLaw::GAlpha(alpha) if near(t, 1.0 - *alpha) => Ok(rng.uniform()),
            MixingLaw::ShiftedG0(mu) if near(t, 1.0) => Ok(rng.uniform() + mu),
            _ => Err(Error::UnsupportedFamily(format!(
                "no closed-form mean sampler for {} at t={t}",
                g.spec_string()
            ))),
        },
        _ => Err(Error::UnsupportedFamily(format!(
            "no closed-form mean sampler for {} at t={t}",
            g.spec_string()
        ))),
    }
}

/// Exact-law draw of the subordinator value Gamma_t(G) for catalog families:
/// an independent gamma(t) total mass times the closed-form normalized mean
/// (total mass and normalized mean are independent for these partitions).
pub fn closed_form_sample(rng: &mut RandomStream, g: &MixingLaw, t: f64) -> Result<f64> {
    let total = rng.gamma(t.max(f64::MIN_POSITIVE));
    let d = closed_form_dirichlet(rng, g, t)?;
    Ok(total * d)
}

/// Draws of the normalized mean D_t(G), routed to the exact beta/uniform
/// construction when the family has one and to the discretized kernel
/// otherwise. Density estimators build one of these once and then draw many
/// times, so the kernel table is only assembled once per batch.
pub enum MeanSampler {
    Closed { g: MixingLaw, t: f64 },
    Kernel(WgKernel),
}

impl MeanSampler {
    pub fn new(g: &MixingLaw, t: f64, n_steps: usize) -> Result<Self> {
        let mut probe = RandomStream::new(0);
        if closed_form_dirichlet(&mut probe, g, t).is_ok() {
            Ok(MeanSampler::Closed { g: g.clone(), t })
        } else {
            Ok(MeanSampler::Kernel(WgKernel::new(g, t, n_steps)?))
        }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, MeanSampler::Closed { .. })
    }

    /// One draw of D_t(G).
    pub fn draw_mean(&self, rng: &mut RandomStream) -> f64 {
        match self {
            // Unwrap is safe: the constructor probed this exact dispatch.
            MeanSampler::Closed { g, t } => closed_form_dirichlet(rng, g, *t).unwrap(),
            MeanSampler::Kernel(k) => k.draw(rng).dirichlet_value(),
        }
    }

    /// One draw of Gamma_t(G), coupling total mass and mean where the kernel
    /// path provides both from the same increments.
    pub fn draw_value(&self, rng: &mut RandomStream) -> f64 {
        match self {
            MeanSampler::Closed { g, t } => closed_form_sample(rng, g, *t).unwrap(),
            MeanSampler::Kernel(k) => k.draw(rng).gamma_value(),
        }
    }
}

/// A finished batch of draws plus the metadata needed to reproduce it.
#[derive(Debug, Clone, Serialize)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub n: usize,
    pub sampler_id: String,
    pub seed: u64,
    pub sub_seeds: Vec<u64>,
    pub wall_time: f64,
}

impl SampleBatch {
    pub fn from_values(sampler_id: impl Into<String>, seed: u64, values: Vec<f64>) -> Self {
        SampleBatch {
            n: values.len(),
            values,
            sampler_id: sampler_id.into(),
            seed,
            sub_seeds: vec![seed],
            wall_time: 0.0,
        }
    }

    /// Concatenate two batches, keeping every contributing seed on record.
    pub fn merge(mut self, other: SampleBatch) -> SampleBatch {
        self.values.extend_from_slice(&other.values);
        self.n = self.values.len();
        self.sub_seeds.extend_from_slice(&other.sub_seeds);
        self.wall_time += other.wall_time;
        if self.sampler_id != other.sampler_id {
            self.sampler_id = format!("{}+{}", self.sampler_id, other.sampler_id);
        }
        self
    }
}

/// Draw n samples in parallel. Sample i always uses the stream for index i,
/// so the output is identical no matter how many worker threads run.
pub fn sample_batch(
    n: usize,
    seed: u64,
    sampler_id: impl Into<String>,
    f: impl Fn(&mut RandomStream) -> f64 + Sync,
) -> SampleBatch {
    let start = Instant::now();
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = RandomStream::for_index(seed, i as u64);
            f(&mut rng)
        })
        .collect();
    SampleBatch {
        n,
        values,
        sampler_id: sampler_id.into(),
        seed,
        sub_seeds: vec![seed],
        wall_time: start.elapsed().as_secs_f64(),
    }
}

/// Fallible variant of [`sample_batch`]; the first error wins.
pub fn try_sample_batch(
    n: usize,
    seed: u64,
    sampler_id: impl Into<String>,
    f: impl Fn(&mut RandomStream) -> Result<f64> + Sync,
) -> Result<SampleBatch> {
    let start = Instant::now();
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = RandomStream::for_index(seed, i as u64);
            f(&mut rng)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SampleBatch {
        n,
        values,
        sampler_id: sampler_id.into(),
        seed,
        sub_seeds: vec![seed],
        wall_time: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernstein::{BernsteinEval, SubordinatorFamily};
    use crate::special_fn::stable_cdf;
    use crate::verify::{ks_one_sample, ks_two_sample, mc_laplace};

    fn mean_se(values: &[f64]) -> (f64, f64) {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        (mean, (var / n).sqrt())
    }

    #[test]
    fn streams_are_deterministic_and_index_separated() {
        let mut a = RandomStream::new(42);
        let mut b = RandomStream::new(42);
        for _ in 0..100 {
            assert_eq!(a.uniform(), b.uniform());
        }
        let mut c = RandomStream::for_index(42, 0);
        let mut d = RandomStream::for_index(42, 1);
        let (x, y) = (c.uniform(), d.uniform());
        assert_ne!(x, y);
        // batch output does not depend on the thread layout: recompute serially
        let batch = sample_batch(64, 9, "u", |rng| rng.uniform());
        for (i, &v) in batch.values.iter().enumerate() {
            let mut rng = RandomStream::for_index(9, i as u64);
            assert_eq!(v, rng.uniform());
        }
    }

    #[test]
    fn uniform_stays_inside_open_interval() {
        let mut rng = RandomStream::new(1);
        for _ in 0..1_000_000 {
            let u = rng.uniform();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn gamma_mean_and_high_moment() {
        let b = sample_batch(1_000_000, 2, "g2", |rng| rng.gamma(2.0));
        let (mean, _) = mean_se(&b.values);
        assert!((mean - 2.0).abs() < 3.0 * (2.0f64).sqrt() / 1e3, "mean={mean}");
        // third moment at shape 1/2: product (1/2)(3/2)(5/2) = 1.875
        let c = sample_batch(1_000_000, 3, "g05", |rng| rng.gamma(0.5));
        let cubes: Vec<f64> = c.values.iter().map(|v| v * v * v).collect();
        let (m3, se3) = mean_se(&cubes);
        assert!((m3 - 1.875).abs() < 3.5 * se3, "m3={m3} se={se3}");
    }

    #[test]
    fn gamma_shape_one_is_exponential() {
        let a = sample_batch(20_000, 4, "g1", |rng| rng.gamma(1.0));
        let b = sample_batch(20_000, 5, "exp", |rng| rng.exponential());
        let report = ks_two_sample(&a, &b).unwrap();
        assert!(report.pass, "{}", report.notes);
    }

    #[test]
    fn gamma_log_agrees_with_direct_gamma() {
        let a = sample_batch(20_000, 6, "exp(log)", |rng| rng.gamma_log(0.3).exp());
        let b = sample_batch(20_000, 7, "direct", |rng| rng.gamma(0.3));
        let report = ks_two_sample(&a, &b).unwrap();
        assert!(report.pass, "{}", report.notes);
    }

    #[test]
    fn tiny_shape_gamma_power_is_nearly_uniform() {
        // (gamma_t)^t approaches the uniform law as t -> 0
        let t = 0.01;
        let b = sample_batch(30_000, 8, "pow", move |rng| (t * rng.gamma_log(t)).exp());
        let (d, _) = ks_one_sample(&b.values, &|x| x.clamp(0.0, 1.0));
        assert!(d < 0.02, "d={d}");
    }

    #[test]
    fn beta_sampler_moments_and_range() {
        let b = sample_batch(20_000, 9, "b0505", |rng| rng.beta(0.05, 0.05));
        for &v in &b.values {
            assert!(v >= 0.0 && v <= 1.0 && v.is_finite());
        }
        let (mean, se) = mean_se(&b.values);
        assert!((mean - 0.5).abs() < 4.0 * se, "mean={mean}");
        let c = sample_batch(50_000, 10, "b23", |rng| rng.beta(2.0, 3.0));
        let (mean, se) = mean_se(&c.values);
        assert!((mean - 0.4).abs() < 4.0 * se);
    }

    #[test]
    fn stable_sampler_matches_reference_laws() {
        // alpha = 1/2 reduces to 1/(4 gamma_{1/2})
        let a = sample_batch(20_000, 11, "kanter", |rng| rng.stable(0.5));
        let b = sample_batch(20_000, 12, "inv-gamma", |rng| 0.25 / rng.gamma(0.5));
        let report = ks_two_sample(&a, &b).unwrap();
        assert!(report.pass, "{}", report.notes);
        // generic alpha against the numeric cdf
        let c = sample_batch(5_000, 13, "kanter07", |rng| rng.stable(0.7));
        let (d, p) = ks_one_sample(&c.values, &|x| stable_cdf(0.7, x).unwrap());
        assert!(p > 0.01, "d={d} p={p}");
    }

    #[test]
    fn kernel_draw_matches_its_exact_transform() {
        // the discretized sum has a closed Laplace transform; monte carlo
        // must agree with it at a few lambdas, and the transform itself must
        // sit near the continuum closed form at this resolution
        let g = MixingLaw::ArcSine;
        let k = WgKernel::new(&g, 1.0, 512).unwrap();
        let batch = {
            let k = k.clone();
            sample_batch(20_000, 14, "wg-arcsine", move |rng| k.draw(rng).gamma_value())
        };
        for pt in mc_laplace(&batch, &[0.5, 1.0, 2.0]).unwrap() {
            let want = k.laplace_exact(pt.lambda);
            assert!(
                (pt.mean - want).abs() < 3.5 * pt.std_error,
                "lambda={} mc={} exact={}",
                pt.lambda,
                pt.mean,
                want
            );
        }
        // continuum value at lambda=1 is (sqrt(2)-1)^2
        let closed = (2.0f64.sqrt() - 1.0).powi(2);
        assert!((k.laplace_exact(1.0) - closed).abs() / closed < 5e-3);
        let k4096 = WgKernel::new(&g, 1.0, 4096).unwrap();
        assert!((k4096.laplace_exact(1.0) - closed).abs() / closed < 7e-4);
    }

    #[test]
    fn kernel_draw_small_time_mass_stays_finite() {
        let g = MixingLaw::ArcSine;
        let k = WgKernel::new(&g, 0.1, 256).unwrap();
        let batch = {
            let k = k.clone();
            sample_batch(20_000, 15, "wg-m01", move |rng| k.draw(rng).gamma_value())
        };
        for pt in mc_laplace(&batch, &[1.0]).unwrap() {
            let want = k.laplace_exact(1.0);
            assert!((pt.mean - want).abs() < 3.5 * pt.std_error);
        }
        // normalized means never degenerate even at extreme partitions
        let k2 = WgKernel::new(&g, 0.01, 512).unwrap();
        let mut rng = RandomStream::new(16);
        for _ in 0..20_000 {
            let d = k2.draw(&mut rng).dirichlet_value();
            assert!(d.is_finite() && d >= 1.0 - 1e-12, "d={d}");
        }
    }

    #[test]
    fn constant_kernel_reduces_to_plain_gamma() {
        // h == 1 collapses the sum to its total gamma(m) mass
        let k = WgKernel::from_kernel(|_| 1.0, 0.7, 128).unwrap();
        let a = {
            let k = k.clone();
            sample_batch(20_000, 117, "wg-const", move |rng| k.draw(rng).gamma_value())
        };
        let b = sample_batch(20_000, 118, "gamma07", |rng| rng.gamma(0.7));
        let report = ks_two_sample(&a, &b).unwrap();
        assert!(report.pass, "{}", report.notes);
        // large-shape path (shape >= 1 per cell)
        let k = WgKernel::from_kernel(|_| 1.0, 300.0, 128).unwrap();
        let a = {
            let k = k.clone();
            sample_batch(5_000, 19, "wg-const300", move |rng| k.draw(rng).gamma_value())
        };
        let b = sample_batch(5_000, 20, "gamma300", |rng| rng.gamma(300.0));
        let report = ks_two_sample(&a, &b).unwrap();
        assert!(report.pass, "{}", report.notes);
    }

    #[test]
    fn reciprocal_uniform_subordinator_mean() {
        // E Gamma_1(1/U) = E U = 1/2
        let g = MixingLaw::Reciprocal(Box::new(MixingLaw::Uniform01));
        let k = WgKernel::new(&g, 1.0, 512).unwrap();
        let batch = {
            let k = k.clone();
            sample_batch(20_000, 21, "wg-recu", move |rng| k.draw(rng).gamma_value())
        };
        let (mean, se) = mean_se(&batch.values);
        assert!((mean - 0.5).abs() < 3.5 * se, "mean={mean} se={se}");
    }

    #[test]
    fn dirichlet_mean_respects_support_hull() {
        // G <= 1 a.s. forces the normalized mean to stay >= 1
        let k = WgKernel::new(&MixingLaw::ArcSine, 0.7, 256).unwrap();
        let mut rng = RandomStream::new(22);
        for _ in 0..5_000 {
            assert!(k.draw(&mut rng).dirichlet_value() >= 1.0 - 1e-12);
        }
        // 1/G uniform on (0,1) caps the mean at 1
        let g = MixingLaw::Reciprocal(Box::new(MixingLaw::Uniform01));
        let k = WgKernel::new(&g, 0.7, 256).unwrap();
        for _ in 0..5_000 {
            let d = k.draw(&mut rng).dirichlet_value();
            assert!(d >= -1e-15 && d <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn dirichlet_mean_of_reciprocal_uniform_has_sine_density() {
        // the normalized mean for G = 1/U has the explicit density
        // e sin(pi x) / (pi x^x (1-x)^{1-x}) on (0,1)
        let g = MixingLaw::Reciprocal(Box::new(MixingLaw::Uniform01));
        let k = WgKernel::new(&g, 1.0, 512).unwrap();
        let batch = {
            let k = k.clone();
            sample_batch(20_000, 23, "d1-recu", move |rng| k.draw(rng).dirichlet_value())
        };
        let pdf = |x: f64| -> f64 {
            if x <= 0.0 || x >= 1.0 {
                return 0.0;
            }
            let ln = 1.0 + (PI * x).sin().ln() - PI.ln() - x * x.ln() - (1.0 - x) * (1.0 - x).ln();
            ln.exp()
        };
        // cdf on a fine grid by trapezoid, linear interpolation in between
        let grid = 8192usize;
        let mut cdf = vec![0.0f64; grid + 1];
        for i in 1..=grid {
            let x0 = (i - 1) as f64 / grid as f64;
            let x1 = i as f64 / grid as f64;
            cdf[i] = cdf[i - 1] + 0.5 * (pdf(x0) + pdf(x1)) / grid as f64;
        }
        let norm = cdf[grid];
        assert!((norm - 1.0).abs() < 1e-4, "density mass {norm}");
        let interp = move |x: f64| -> f64 {
            if x <= 0.0 {
                return 0.0;
            }
            if x >= 1.0 {
                return 1.0;
            }
            let t = x * grid as f64;
            let i = (t as usize).min(grid - 1);
            let frac = t - i as f64;
            ((1.0 - frac) * cdf[i] + frac * cdf[i + 1]) / norm
        };
        let (d, p) = ks_one_sample(&batch.values, &interp);
        assert!(p > 0.01, "d={d} p={p}");
    }

    #[test]
    fn sum_of_independent_pieces_matches_total_time() {
        // infinite divisibility across the time mass at fixed resolution
        let g = MixingLaw::ArcSine;
        let k12 = WgKernel::new(&g, 1.2, 512).unwrap();
        let k05 = WgKernel::new(&g, 0.5, 512).unwrap();
        let k07 = WgKernel::new(&g, 0.7, 512).unwrap();
        let a = {
            let k12 = k12.clone();
            sample_batch(15_000, 24, "wg-12", move |rng| k12.draw(rng).gamma_value())
        };
        let b = sample_batch(15_000, 25, "wg-05+07", move |rng| {
            k05.draw(rng).gamma_value() + k07.draw(rng).gamma_value()
        });
        let report = ks_two_sample(&a, &b).unwrap();
        assert!(report.pass, "{}", report.notes);
    }

    #[test]
    fn kernel_reversal_leaves_the_law_alone() {
        let k = WgKernel::new(&MixingLaw::ArcSine, 0.8, 256).unwrap();
        let r = k.reversed();
        let a = {
            let k = k.clone();
            sample_batch(10_000, 26, "fwd", move |rng| k.draw(rng).gamma_value())
        };
        let b = sample_batch(10_000, 27, "rev", move |rng| r.draw(rng).gamma_value());
        let report = ks_two_sample(&a, &b).unwrap();
        assert!(report.pass, "{}", report.notes);
    }

    #[test]
    fn beta_multiplication_identity_for_partial_time() {
        // beta_{m,1-m} D_m(1/G) has the same law as the unit-time normalized
        // mean whose kernel is supported on the first m fraction of cells
        // (the mixing law gains an atom at infinity with mass 1-m)
        let m = 0.4;
        let rec = MixingLaw::Reciprocal(Box::new(MixingLaw::ArcSine));
        let kd = WgKernel::new(&rec, m, 512).unwrap();
        let lhs = {
            let kd = kd.clone();
            sample_batch(15_000, 28, "beta*dm", move |rng| {
                let b = rng.beta(m, 1.0 - m);
                b * kd.draw(rng).dirichlet_value()
            })
        };
        let rec2 = rec.clone();
        let kb = WgKernel::from_kernel(
            move |u| {
                if u < m {
                    1.0 / rec2.quantile(u / m).unwrap()
                } else {
                    0.0
                }
            },
            1.0,
            1280,
        )
        .unwrap();
        let rhs = sample_batch(15_000, 29, "d1-thinned", move |rng| {
            kb.draw(rng).dirichlet_value()
        });
        let report = ks_two_sample(&lhs, &rhs).unwrap();
        assert!(report.pass, "{}", report.notes);
    }

    #[test]
    fn normalized_means_mix_across_time_split() {
        // D_{t+s}(G) equals in law the beta_{t,s} mixture of independent
        // normalized means at times t and s
        let g = MixingLaw::Reciprocal(Box::new(MixingLaw::Uniform01));
        let (t, s) = (0.5, 0.7);
        let kts = WgKernel::new(&g, t + s, 512).unwrap();
        let kt = WgKernel::new(&g, t, 512).unwrap();
        let ks = WgKernel::new(&g, s, 512).unwrap();
        let a = {
            let kts = kts.clone();
            sample_batch(15_000, 30, "d-ts", move |rng| kts.draw(rng).dirichlet_value())
        };
        let b = sample_batch(15_000, 31, "d-mixture", move |rng| {
            let w = rng.beta(t, s);
            let xt = kt.draw(rng).dirichlet_value();
            let xs = ks.draw(rng).dirichlet_value();
            w * xt + (1.0 - w) * xs
        });
        let report = ks_two_sample(&a, &b).unwrap();
        assert!(report.pass, "{}", report.notes);
    }

    #[test]
    fn compound_poisson_agrees_with_kernel_sampler() {
        let g = MixingLaw::ArcSine;
        let horizon = compound_poisson_horizon(&g, 1.0);
        assert!(horizon > 30.0 && horizon < 35.0, "horizon={horizon}");
        let g2 = g.clone();
        let batch = try_sample_batch(30_000, 32, "cpp-arcsine", move |rng| {
            compound_poisson_sample(rng, &g2, 1.0, horizon)
        })
        .unwrap();
        let closed = (2.0f64.sqrt() - 1.0).powi(2);
        for pt in mc_laplace(&batch, &[1.0]).unwrap() {
            assert!(
                (pt.mean - closed).abs() < 3.5 * pt.std_error + 2e-4,
                "mc={} closed={}",
                pt.mean,
                closed
            );
        }
        // rate times horizon bounds the jump count; tiny rates mostly give 0
        let g3 = MixingLaw::ArcSine;
        let zero = try_sample_batch(1_000, 33, "cpp-tiny", move |rng| {
            compound_poisson_sample(rng, &g3, 1e-4, 20.0)
        })
        .unwrap();
        let zeros = zero.values.iter().filter(|&&v| v == 0.0).count();
        assert!(zeros >= 980, "zeros={zeros}");
    }

    #[test]
    fn affine_iteration_reaches_the_stationary_law() {
        let g = MixingLaw::ArcSine;
        let g1 = g.clone();
        let a = try_sample_batch(12_000, 34, "affine-x0=0", move |rng| {
            affine_iterate(rng, &g1, 1.0, 200, 0.0)
        })
        .unwrap();
        let g2 = g.clone();
        let b = try_sample_batch(12_000, 35, "affine-x0=100", move |rng| {
            affine_iterate(rng, &g2, 1.0, 200, 100.0)
        })
        .unwrap();
        let report = ks_two_sample(&a, &b).unwrap();
        assert!(report.pass, "burn-in: {}", report.notes);
        let g3 = g.clone();
        let c = try_sample_batch(12_000, 36, "closed-g1", move |rng| {
            closed_form_sample(rng, &g3, 1.0)
        })
        .unwrap();
        let report = ks_two_sample(&a, &c).unwrap();
        assert!(report.pass, "vs closed: {}", report.notes);
    }

    #[test]
    fn closed_form_samplers_hit_reference_values() {
        // symmetric-beta normalized mean of the reciprocal arcsine family
        let g = MixingLaw::Reciprocal(Box::new(MixingLaw::ArcSine));
        let gg = g.clone();
        let b = try_sample_batch(200_000, 37, "d-recarc", move |rng| {
            closed_form_dirichlet(rng, &gg, 0.8)
        })
        .unwrap();
        let (mean, se) = mean_se(&b.values);
        assert!((mean - 0.5).abs() < 3.5 * se);
        // shifted-log family at unit time: mean of the subordinator is mu + 1/2
        let g = MixingLaw::Reciprocal(Box::new(MixingLaw::ShiftedG0(1.0)));
        let gg = g.clone();
        let b = try_sample_batch(200_000, 38, "g1-recshift", move |rng| {
            closed_form_sample(rng, &gg, 1.0)
        })
        .unwrap();
        let (mean, se) = mean_se(&b.values);
        assert!((mean - 1.5).abs() < 3.5 * se, "mean={mean}");
        // fractional family at t = 1 - alpha: laplace at 1 is sqrt(2)-1
        let g = MixingLaw::GAlpha(0.5);
        let gg = g.clone();
        let b = try_sample_batch(200_000, 39, "galpha-half", move |rng| {
            closed_form_sample(rng, &gg, 0.5)
        })
        .unwrap();
        let want = 2.0f64.sqrt() - 1.0;
        for pt in mc_laplace(&b, &[1.0]).unwrap() {
            assert!((pt.mean - want).abs() < 3.5 * pt.std_error);
        }
        // shifted-log normalized mean has an explicit log-uniform quantile
        let g = MixingLaw::ShiftedG0(1.0);
        let gg = g.clone();
        let b = try_sample_batch(20_000, 40, "d1-shift", move |rng| {
            closed_form_dirichlet(rng, &gg, 1.0)
        })
        .unwrap();
        let cdf = |x: f64| -> f64 {
            if x <= 0.5 {
                0.0
            } else if x >= 1.0 {
                1.0
            } else {
                (2.0 * x).ln() / (2.0f64).ln()
            }
        };
        let (d, p) = ks_one_sample(&b.values, &cdf);
        assert!(p > 0.01, "d={d} p={p}");
        // unsupported combinations refuse politely
        let mut rng = RandomStream::new(41);
        assert!(closed_form_sample(&mut rng, &MixingLaw::Uniform01, 0.7).is_err());
        assert!(closed_form_sample(&mut rng, &MixingLaw::ShiftedG0(1.0), 0.5).is_err());
    }

    #[test]
    fn closed_form_agrees_with_kernel_sampler() {
        let g = MixingLaw::ArcSine;
        let k = WgKernel::new(&g, 0.5, 512).unwrap();
        let a = sample_batch(12_000, 42, "wg-half", move |rng| k.draw(rng).gamma_value());
        let gg = g.clone();
        let b = try_sample_batch(12_000, 43, "closed-half", move |rng| {
            closed_form_sample(rng, &gg, 0.5)
        })
        .unwrap();
        let report = ks_two_sample(&a, &b).unwrap();
        assert!(report.pass, "{}", report.notes);
    }

    #[test]
    fn power_jump_unit_exponent_is_gamma() {
        let a = try_sample_batch(15_000, 44, "pj-1", |rng| {
            power_jump_sample(rng, 1.0, 1.3, 777)
        })
        .unwrap();
        let b = sample_batch(15_000, 45, "gamma13", |rng| rng.gamma(1.3));
        let report = ks_two_sample(&a, &b).unwrap();
        assert!(report.pass, "{}", report.notes);
    }

    #[test]
    fn power_jump_mean_and_transform() {
        // E sum (dg)^alpha tends to t Gamma(alpha); alpha=2, t=1 gives 1
        let b = try_sample_batch(40_000, 46, "pj-2", |rng| {
            power_jump_sample(rng, 2.0, 1.0, 512)
        })
        .unwrap();
        let (mean, se) = mean_se(&b.values);
        assert!((mean - 1.0).abs() < 3.5 * se + 3e-3, "mean={mean} se={se}");
        // laplace transform against the quadrature exponent
        let c = try_sample_batch(30_000, 47, "pj-2-t2", |rng| {
            power_jump_sample(rng, 2.0, 2.0, 512)
        })
        .unwrap();
        let eval = BernsteinEval::new(SubordinatorFamily::PowerJump(2.0)).unwrap();
        for pt in mc_laplace(&c, &[0.5, 1.0]).unwrap() {
            let want = (-2.0 * eval.evaluate(pt.lambda).unwrap()).exp();
            assert!(
                (pt.mean - want).abs() < 3.5 * pt.std_error + 2e-3,
                "lambda={} mc={} quad={}",
                pt.lambda,
                pt.mean,
                want
            );
        }
    }

    #[test]
    fn divergent_kernels_are_refused() {
        // the log-singular shifted family at mu=0 has no integrable kernel
        let g = MixingLaw::ShiftedG0(0.0);
        assert!(WgKernel::new(&g, 1.0, 64).is_err());
        let mut rng = RandomStream::new(48);
        assert!(wiener_gamma_sample(&mut rng, &g, 1.0, 64).is_err());
        assert!(gamma_variate(&mut rng, -1.0).is_err());
        assert!(gamma_variate(&mut rng, 0.0).is_err());
    }

    #[test]
    fn batches_merge_with_seed_provenance() {
        let a = sample_batch(1_000, 50, "u", |rng| rng.uniform());
        let b = sample_batch(500, 51, "u", |rng| rng.uniform());
        let m = a.merge(b);
        assert_eq!(m.n, 1_500);
        assert_eq!(m.values.len(), 1_500);
        assert_eq!(m.sub_seeds, vec![50, 51]);
        assert_eq!(m.sampler_id, "u");
    }
}
