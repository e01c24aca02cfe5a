//! Density evaluation for subordinator values Gamma_t(G) and normalized
//! Dirichlet means D_t(G), through three independent routes:
//!
//! * Laplace duality: the density of Gamma_t(1/G) is a bounded positive
//!   functional of the mean D_t(G), so a Monte-Carlo average of
//!   exp(-x D_t(G)) gives a pointwise estimate with an honest standard error.
//! * A Hankel-kernel average over draws of Gamma_t(G) itself, useful as an
//!   independent cross-check but oscillatory for large arguments.
//! * Closed one-dimensional integral forms for the catalog families.
//!
//! Mean densities additionally come from two boundary-measure constructions
//! (one for a Bernoulli-thinned mixing law, one through a fractional kernel)
//! and transport across reciprocation of the mixing law.

use std::f64::consts::{E, LN_2, PI};

use serde::Serialize;

use crate::bernstein::moebius_k;
use crate::error::{Error, Result};
use crate::mixing_laws::MixingLaw;
use crate::quad;
use crate::samplers::{MeanSampler, RandomStream};
use crate::special_fn::{bessel_j, gamma, ln_beta, ln_gamma};

/// Kernel cells used when a mean sampler has no exact construction.
const MEAN_KERNEL_STEPS: usize = 2048;

/// Hankel-kernel argument past which the integrand oscillates faster than a
/// Monte-Carlo average can damp.
const OSCILLATION_EDGE: f64 = 25.0;

/// One pointwise density estimate. `std_error` is a Monte-Carlo standard
/// error for the sampling routes and a quadrature residual otherwise.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DensityEstimate {
    pub value: f64,
    pub std_error: f64,
    /// Set when most kernel evaluations landed in the oscillatory regime,
    /// so the variance estimate should be treated as optimistic.
    pub oscillatory: bool,
}

/// A density tabulated over strictly increasing abscissae.
#[derive(Debug, Clone, Serialize)]
pub struct DensityGrid {
    pub abscissae: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub method: String,
}

impl DensityGrid {
    /// Evaluate `f` over the abscissae; `f` returns (value, error estimate).
    pub fn build<F: FnMut(f64) -> Result<(f64, f64)>>(
        abscissae: Vec<f64>,
        method: impl Into<String>,
        mut f: F,
    ) -> Result<DensityGrid> {
        if abscissae.len() < 2 {
            return Err(Error::domain("a density grid needs at least 2 abscissae"));
        }
        for w in abscissae.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::domain(
                    "density grid abscissae must strictly increase",
                ));
            }
        }
        let mut values = Vec::with_capacity(abscissae.len());
        let mut errors = Vec::with_capacity(abscissae.len());
        for &x in &abscissae {
            let (v, e) = f(x)?;
            values.push(v);
            errors.push(e);
        }
        Ok(DensityGrid {
            abscissae,
            values,
            errors,
            method: method.into(),
        })
    }

    /// Trapezoid mass over the grid; near 1 whenever the abscissae span the
    /// effective support of the density.
    pub fn trapezoid_mass(&self) -> f64 {
        self.abscissae
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, v)| 0.5 * (v[0] + v[1]) * (x[1] - x[0]))
            .sum()
    }

    /// Whether the trapezoid mass lands in [0.99, 1.01].
    pub fn mass_is_plausible(&self) -> bool {
        (self.trapezoid_mass() - 1.0).abs() <= 0.01
    }
}

fn check_abscissa(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!(
            "density abscissa must be positive and finite, got {x}"
        )));
    }
    Ok(())
}

fn check_time_mass(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!(
            "time mass must be positive and finite, got {t}"
        )));
    }
    Ok(())
}

/// Density of Gamma_t(1/G) through the duality identity
///
/// ```text
/// f(x) = x^{t-1}/Gamma(t) exp(-t E log G) E exp(-x D_t(G)),
/// ```
///
/// estimated by averaging over cached draws of the mean D_t(G). Build one of
/// these per (G, t) and evaluate it across a whole grid; the draws are reused.
pub struct DualMcDensity {
    t: f64,
    elog_g: f64,
    draws: Vec<f64>,
}

impl DualMcDensity {
    pub fn new(g: &MixingLaw, t: f64, n_mc: usize, rng: &mut RandomStream) -> Result<Self> {
        DualMcDensity::with_steps(g, t, n_mc, MEAN_KERNEL_STEPS, rng)
    }

    /// As [`DualMcDensity::new`] but pinning the kernel discretization used
    /// when the family has no exact mean construction.
    pub fn with_steps(
        g: &MixingLaw,
        t: f64,
        n_mc: usize,
        n_steps: usize,
        rng: &mut RandomStream,
    ) -> Result<Self> {
        check_time_mass(t)?;
        if n_mc < 2 {
            return Err(Error::domain("need at least 2 Monte-Carlo draws"));
        }
        let elog_g = g.log_moment()?;
        let sampler = MeanSampler::new(g, t, n_steps)?;
        let draws = (0..n_mc).map(|_| sampler.draw_mean(rng)).collect();
        Ok(DualMcDensity { t, elog_g, draws })
    }

    pub fn eval(&self, x: f64) -> Result<DensityEstimate> {
        check_abscissa(x)?;
        let n = self.draws.len() as f64;
        let (mut s, mut s2) = (0.0f64, 0.0f64);
        for &d in &self.draws {
            let v = (-x * d).exp();
            s += v;
            s2 += v * v;
        }
        let mean = s / n;
        let var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
        let se = (var / n).sqrt();
        let pre =
            ((self.t - 1.0) * x.ln() - ln_gamma(self.t) - self.t * self.elog_g).exp();
        Ok(DensityEstimate {
            value: pre * mean,
            std_error: pre * se,
            oscillatory: false,
        })
    }
}

/// One-shot wrapper around [`DualMcDensity`]. The target is the law of
/// Gamma_t(1/G); pass `Reciprocal(G)` to evaluate the density of Gamma_t(G).
pub fn ggc_density_dual_mc(
    x: f64,
    t: f64,
    g: &MixingLaw,
    n_mc: usize,
    rng: &mut RandomStream,
) -> Result<DensityEstimate> {
    DualMcDensity::new(g, t, n_mc, rng)?.eval(x)
}

/// Density of Gamma_t(1/G) by averaging the Hankel kernel
///
/// ```text
/// f(x) = exp(-t E log G) E[(W/x)^{(1-t)/2} J_{t-1}(2 sqrt(x W))],  W = Gamma_t(G),
/// ```
///
/// over cached draws of W. Independent of the duality route (it integrates
/// over the value, not the mean), but the kernel oscillates once
/// 2 sqrt(x W) grows past [`OSCILLATION_EDGE`].
pub struct BesselMcDensity {
    t: f64,
    elog_g: f64,
    draws: Vec<f64>,
}

impl BesselMcDensity {
    pub fn new(g: &MixingLaw, t: f64, n_mc: usize, rng: &mut RandomStream) -> Result<Self> {
        check_time_mass(t)?;
        if n_mc < 2 {
            return Err(Error::domain("need at least 2 Monte-Carlo draws"));
        }
        let elog_g = g.log_moment()?;
        let sampler = MeanSampler::new(g, t, MEAN_KERNEL_STEPS)?;
        let draws = (0..n_mc).map(|_| sampler.draw_value(rng)).collect();
        Ok(BesselMcDensity { t, elog_g, draws })
    }

    pub fn eval(&self, x: f64) -> Result<DensityEstimate> {
        check_abscissa(x)?;
        let t = self.t;
        let nu = t - 1.0;
        let n = self.draws.len() as f64;
        let (mut s, mut s2) = (0.0f64, 0.0f64);
        let mut oscillating = 0usize;
        for &w in &self.draws {
            let z = 2.0 * (x * w).sqrt();
            if z > OSCILLATION_EDGE {
                oscillating += 1;
            }
            // z -> 0 limit of the kernel is x^{t-1}/Gamma(t); substituting
            // the leading series term avoids the 0 * inf product there
            let v = if z < 1e-6 {
                ((t - 1.0) * x.ln() - ln_gamma(t)).exp()
            } else {
                (0.5 * (1.0 - t) * (w.ln() - x.ln())).exp() * bessel_j(nu, z)?
            };
            s += v;
            s2 += v * v;
        }
        let mean = s / n;
        let var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
        let se = (var / n).sqrt();
        let pre = (-t * self.elog_g).exp();
        Ok(DensityEstimate {
            value: pre * mean,
            std_error: pre * se,
            oscillatory: 2 * oscillating > self.draws.len(),
        })
    }
}

/// One-shot wrapper around [`BesselMcDensity`]; same target law as
/// [`ggc_density_dual_mc`].
pub fn ggc_density_bessel_mc(
    x: f64,
    t: f64,
    g: &MixingLaw,
    n_mc: usize,
    rng: &mut RandomStream,
) -> Result<DensityEstimate> {
    BesselMcDensity::new(g, t, n_mc, rng)?.eval(x)
}

fn is_half(a: f64) -> bool {
    (a - 0.5).abs() < 1e-12
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

/// Exact density of Gamma_t(G) for catalog (family, t) pairs with a closed or
/// single-integral form. UNSUPPORTED_FAMILY outside the catalog.
pub fn density_closed(g: &MixingLaw, t: f64, x: f64) -> Result<f64> {
    check_time_mass(t)?;
    check_abscissa(x)?;
    match g {
        MixingLaw::ArcSine => arcsine_value_density(t, x),
        MixingLaw::GAlpha(a) if is_half(*a) => arcsine_value_density(t, x),
        MixingLaw::GAlpha(a) if near(t, 1.0 - *a) => Ok(galpha_value_density(*a, x)),
        MixingLaw::Uniform01 if near(t, 1.0) => uniform_value_density(x),
        MixingLaw::ShiftedG0(mu) if *mu > 0.0 && near(t, 1.0) => {
            Ok(shifted_log_value_density(*mu, x))
        }
        MixingLaw::Reciprocal(inner) => match inner.as_ref() {
            MixingLaw::ArcSine => reciprocal_arcsine_value_density(t, x),
            MixingLaw::GAlpha(a) if is_half(*a) => reciprocal_arcsine_value_density(t, x),
            MixingLaw::GAlpha(a) if near(t, 1.0 - *a) => {
                reciprocal_galpha_value_density(*a, x)
            }
            MixingLaw::Uniform01 if near(t, 1.0) => reciprocal_uniform_value_density(x),
            MixingLaw::ShiftedG0(mu) if *mu >= 0.0 && near(t, 1.0) => {
                reciprocal_shifted_log_value_density(*mu, x)
            }
            MixingLaw::Reciprocal(inner2) => density_closed(inner2, t, x),
            _ => Err(Error::UnsupportedFamily(format!(
                "no closed value density for {} at t={t}",
                g.spec_string()
            ))),
        },
        _ => Err(Error::UnsupportedFamily(format!(
            "no closed value density for {} at t={t}",
            g.spec_string()
        ))),
    }
}

/// Gamma_t over the arcsine law, any t:
/// 2^{2t} Gamma(1+t)/(2 pi Gamma(2t)) x^{t-1} int_0^1 e^{-xy} (y(1-y))^{t-1/2} dy.
fn arcsine_value_density(t: f64, x: f64) -> Result<f64> {
    let e = t - 0.5;
    let i = quad::tanh_sinh(
        &|y: f64, lo: f64, hi: f64| (-x * y).exp() * (lo * hi).powf(e),
        0.0,
        1.0,
        1e-14,
        1e-11,
    )
    .expect_tol(1e-12, 1e-9, "arcsine mixture kernel")?;
    let lc = 2.0 * t * LN_2 + ln_gamma(1.0 + t) - (2.0 * PI).ln() - ln_gamma(2.0 * t);
    Ok((lc + (t - 1.0) * x.ln()).exp() * i)
}

/// Gamma_t over the reciprocal arcsine law, any t:
/// t 2^{2t}/(Gamma(t+1/2) sqrt(pi)) x^{t-1} int_0^1 e^{-x/y} (1-y)^{t-1/2} y^{-1/2} dy.
fn reciprocal_arcsine_value_density(t: f64, x: f64) -> Result<f64> {
    let i = quad::tanh_sinh(
        &|_y: f64, lo: f64, hi: f64| {
            let a = x / lo;
            if a > 700.0 {
                0.0
            } else {
                (-a).exp() * hi.powf(t - 0.5) / lo.sqrt()
            }
        },
        0.0,
        1.0,
        1e-14,
        1e-11,
    )
    .expect_tol(1e-12, 1e-9, "reciprocal arcsine mixture kernel")?;
    let lc = t.ln() + 2.0 * t * LN_2 - ln_gamma(t + 0.5) - 0.5 * PI.ln();
    Ok((lc + (t - 1.0) * x.ln()).exp() * i)
}

/// Gamma_{1-a} over the two-sided power law: a/Gamma(1-a) x^{-1-a}(1 - e^{-x}).
fn galpha_value_density(a: f64, x: f64) -> f64 {
    a / gamma(1.0 - a) * x.powf(-1.0 - a) * (-(-x).exp_m1())
}

/// Gamma_{1-a} over the reciprocal two-sided power law:
/// x^{-a}/Gamma(1-a) int_1^inf e^{-xy} y^{-a-1} dy, evaluated after y -> 1/s.
fn reciprocal_galpha_value_density(a: f64, x: f64) -> Result<f64> {
    let i = quad::tanh_sinh(
        &|_s: f64, lo: f64, _hi: f64| {
            let e = x / lo;
            if e > 700.0 {
                0.0
            } else {
                (-e).exp() * lo.powf(a - 1.0)
            }
        },
        0.0,
        1.0,
        1e-14,
        1e-11,
    )
    .expect_tol(1e-12, 1e-9, "reciprocal power mixture kernel")?;
    Ok(x.powf(-a) / gamma(1.0 - a) * i)
}

/// Unit-time value density over the uniform mixing law:
/// (1/pi) int_0^1 e^{-xy} sin(pi y) y^{-y} (1-y)^{-(1-y)} dy.
fn uniform_value_density(x: f64) -> Result<f64> {
    let i = quad::tanh_sinh(
        &|y: f64, lo: f64, hi: f64| {
            let expo = -x * y - lo * lo.ln() - hi * hi.ln();
            (PI * lo.min(hi)).sin() * expo.exp()
        },
        0.0,
        1.0,
        1e-14,
        1e-11,
    )
    .expect_tol(1e-12, 1e-9, "uniform mixture kernel")?;
    Ok(i / PI)
}

/// Unit-time value density over the reciprocal uniform law:
/// (e/pi) int_0^1 e^{-x/y} sin(pi y) y^{-(1+y)} (1-y)^{-(1-y)} dy.
fn reciprocal_uniform_value_density(x: f64) -> Result<f64> {
    let i = quad::tanh_sinh(
        &|_y: f64, lo: f64, hi: f64| {
            let expo = -x / lo - (1.0 + lo) * lo.ln() - hi * hi.ln();
            if expo < -745.0 {
                0.0
            } else {
                (PI * lo.min(hi)).sin() * expo.exp()
            }
        },
        0.0,
        1.0,
        1e-14,
        1e-11,
    )
    .expect_tol(1e-12, 1e-9, "reciprocal uniform mixture kernel")?;
    Ok(E * i / PI)
}

/// Unit-time value density over the shifted log-ratio law:
/// e^{-mu x} (1 - e^{-x}) / (x log(1 + 1/mu)).
fn shifted_log_value_density(mu: f64, x: f64) -> f64 {
    (-mu * x).exp() * (-(-x).exp_m1()) / (x * (1.0 / mu).ln_1p())
}

/// Unit-time value density over the reciprocal shifted log-ratio law:
/// int_mu^{mu+1} e^{-x/w} dw/w. Defined down to mu = 0.
fn reciprocal_shifted_log_value_density(mu: f64, x: f64) -> Result<f64> {
    let f = |w: f64| {
        let a = x / w;
        if a > 700.0 {
            0.0
        } else {
            (-a).exp() / w
        }
    };
    quad::adaptive(f, mu, mu + 1.0, 1e-13, 1e-11, 240).expect_tol(
        1e-11,
        1e-9,
        "reciprocal shifted log-ratio kernel",
    )
}

fn beta_pdf(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    ((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta(a, b)).exp()
}

/// Exact density of the normalized mean D_t(G) for catalog (family, t) pairs.
/// Returns 0 outside the support; UNSUPPORTED_FAMILY outside the catalog.
pub fn dirichlet_mean_density(g: &MixingLaw, t: f64, x: f64) -> Result<f64> {
    check_time_mass(t)?;
    if !x.is_finite() || x < 0.0 {
        return Err(Error::domain(format!(
            "mean-density abscissa must be finite and nonnegative, got {x}"
        )));
    }
    match g {
        // mean of the arcsine family is an inverse beta on (1, inf)
        MixingLaw::ArcSine => Ok(if x <= 1.0 {
            0.0
        } else {
            beta_pdf(0.5, 0.5 + t, 1.0 / x) / (x * x)
        }),
        MixingLaw::GAlpha(a) if is_half(*a) => dirichlet_mean_density(&MixingLaw::ArcSine, t, x),
        // at t = 1 - a the mean is a reciprocal power of a uniform variable
        MixingLaw::GAlpha(a) if near(t, 1.0 - *a) => Ok(if x <= 1.0 {
            0.0
        } else {
            a * x.powf(-a - 1.0)
        }),
        MixingLaw::Uniform01 if near(t, 1.0) => {
            // sin(pi/x) / (pi (x-1)^{1-1/x}) on (1, inf)
            if x <= 1.0 {
                return Ok(0.0);
            }
            let e = (1.0 - 1.0 / x) * (x - 1.0).ln();
            Ok((PI / x).sin() / PI * (-e).exp())
        }
        MixingLaw::ShiftedG0(mu) if *mu > 0.0 && near(t, 1.0) => {
            let lo = 1.0 / (mu + 1.0);
            let hi = 1.0 / mu;
            Ok(if x < lo || x > hi {
                0.0
            } else {
                1.0 / (x * (1.0 / mu).ln_1p())
            })
        }
        MixingLaw::Reciprocal(inner) => match inner.as_ref() {
            MixingLaw::ArcSine => Ok(beta_pdf(t + 0.5, t + 0.5, x)),
            MixingLaw::GAlpha(a) if is_half(*a) => Ok(beta_pdf(t + 0.5, t + 0.5, x)),
            MixingLaw::GAlpha(a) if near(t, 1.0 - *a) => {
                Ok(if x > 0.0 && x < 1.0 { 1.0 } else { 0.0 })
            }
            MixingLaw::Uniform01 if near(t, 1.0) => {
                // e sin(pi x) / (pi x^x (1-x)^{1-x}) on (0, 1)
                if x <= 0.0 || x >= 1.0 {
                    return Ok(0.0);
                }
                let expo = 1.0 - x * x.ln() - (1.0 - x) * (-x).ln_1p();
                Ok((PI * x.min(1.0 - x)).sin() / PI * expo.exp())
            }
            MixingLaw::ShiftedG0(mu) if *mu >= 0.0 && near(t, 1.0) => {
                Ok(if x > *mu && x < mu + 1.0 { 1.0 } else { 0.0 })
            }
            MixingLaw::Reciprocal(inner2) => dirichlet_mean_density(inner2, t, x),
            _ => Err(Error::UnsupportedFamily(format!(
                "no closed mean density for {} at t={t}",
                g.spec_string()
            ))),
        },
        _ => Err(Error::UnsupportedFamily(format!(
            "no closed mean density for {} at t={t}",
            g.spec_string()
        ))),
    }
}

/// E log|x - Q| for Q distributed by `law`, as a quantile integral split at
/// the level where the quantile crosses x; the split point carries the only
/// (logarithmic, integrable) singularity.
fn expected_log_abs_gap(law: &MixingLaw, x: f64) -> Result<f64> {
    let f = |p: f64, _lo: f64, _hi: f64| -> f64 {
        match law.quantile(p) {
            Ok(q) => (x - q).abs().ln(),
            Err(_) => f64::NAN,
        }
    };
    let split = law.cdf(x);
    if split.is_nan() {
        return Err(Error::domain(
            "mixing law cdf returned NaN inside the log-gap integral",
        ));
    }
    let split = split.clamp(0.0, 1.0);
    let mut total = 0.0;
    let mut err = 0.0;
    for (a, b) in [(0.0, split), (split, 1.0)] {
        if b - a > 1e-15 {
            let r = quad::tanh_sinh(&f, a, b, 1e-12, 1e-10);
            total += r.value;
            err += r.err;
        }
    }
    if err > 1e-6 * total.abs().max(1.0) {
        return Err(Error::QuadratureFail {
            reason: "log-gap quantile integral did not settle".into(),
            residual: err,
        });
    }
    Ok(total)
}

/// Boundary primitive sin(pi t F(u))/pi exp(-t E log|u - Q|), where F and Q
/// are the cdf and law of the reciprocal mixing variable. Its Stieltjes
/// differential drives the fractional-kernel mean density, and at t = 1 it
/// is the mean density itself.
fn theta_boundary(rec: &MixingLaw, t: f64, u: f64) -> Result<f64> {
    let p = rec.cdf(u);
    if p.is_nan() {
        return Err(Error::domain(
            "mixing law cdf returned NaN inside the boundary primitive",
        ));
    }
    if !(p > 0.0) {
        return Ok(0.0);
    }
    let egap = expected_log_abs_gap(rec, u)?;
    Ok((PI * t * p.min(1.0)).sin() / PI * (-t * egap).exp())
}

/// Density of the one-sample Dirichlet mean over the Bernoulli(t)-thinned
/// mixing law (equivalently the law of beta(t, 1-t) D_t(G), 0 < t < 1):
///
/// ```text
/// f(x) = sin(pi t F_G(1/x))/pi  x^{t-1}  exp(-t E log|x - 1/G|).
/// ```
///
/// The sine factor vanishes identically past 1/inf(G), and at arguments below
/// 1/sup(G) it freezes at sin(pi t); both branches come out of the same
/// expression because the cdf clamps.
pub fn dirichlet_mean_density_bernoulli(x: f64, t: f64, g: &MixingLaw) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::domain(format!(
            "thinned mean density needs 0 < t < 1, got {t}"
        )));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(Error::domain(format!(
            "mean-density abscissa must be finite and nonnegative, got {x}"
        )));
    }
    g.log_moment()?;
    let rec = MixingLaw::Reciprocal(Box::new(g.clone()));
    let (_, hi) = rec.support();
    if x == 0.0 || x >= hi {
        return Ok(0.0);
    }
    let p = g.cdf(1.0 / x);
    if p.is_nan() {
        return Err(Error::domain(
            "mixing law cdf returned NaN at the thinning boundary",
        ));
    }
    if !(p > 0.0) {
        return Ok(0.0);
    }
    let egap = expected_log_abs_gap(&rec, x)?;
    Ok((PI * t * p.min(1.0)).sin() / PI * ((t - 1.0) * x.ln() - t * egap).exp())
}

/// Density of the normalized mean D_t(G) for 0 < t <= 1, by fractionally
/// integrating the differential of the boundary primitive against the kernel
/// (x-u)^{t-1}. The primitive keeps decaying past the upper support endpoint
/// of 1/G, and that stretch cancels the bulk whenever x lies beyond the
/// support of the mean, so the routine is well defined on all of (0, inf).
pub fn dirichlet_mean_density_t_le_1(x: f64, t: f64, g: &MixingLaw) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0 + 1e-9) || !t.is_finite() {
        return Err(Error::domain(format!(
            "fractional-kernel mean density needs 0 < t <= 1, got {t}"
        )));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(Error::domain(format!(
            "mean-density abscissa must be finite and nonnegative, got {x}"
        )));
    }
    g.log_moment()?;
    let rec = MixingLaw::Reciprocal(Box::new(g.clone()));
    let (u0, u1) = rec.support();
    if x <= u0 {
        return Ok(0.0);
    }
    if t > 1.0 - 1e-9 {
        // the kernel degenerates to 1 and the integral telescopes to the
        // primitive itself
        return theta_boundary(&rec, 1.0, x);
    }
    // Richardson-extrapolated centered difference; the primitive is smooth
    // away from the support endpoints and identically 0 below u0
    let dtheta = |u: f64| -> f64 {
        let h = 1e-3 * u.abs().max(1e-2);
        let th = |v: f64| theta_boundary(&rec, t, v).unwrap_or(f64::NAN);
        let wide = (th(u + h) - th(u - h)) / (2.0 * h);
        let narrow = (th(u + 0.5 * h) - th(u - 0.5 * h)) / h;
        (4.0 * narrow - wide) / 3.0
    };
    let mut total = 0.0;
    let mut err = 0.0;
    let edge = u1.min(x);
    let mid = 0.5 * (u0 + edge);
    // lower piece: whatever edge behavior the reciprocal law has at the
    // bottom of its support, double-exponential spacing absorbs it without
    // knowing the exponent
    let lower = quad::tanh_sinh(
        &|u: f64, _lo: f64, _hi: f64| (x - u).powf(t - 1.0) * dtheta(u),
        u0,
        mid,
        1e-8,
        1e-6,
    );
    total += lower.value;
    err += lower.err;
    if x <= u1 {
        // upper piece ends at the kernel singularity; from_hi is exactly x-u
        let upper = quad::tanh_sinh(
            &|u: f64, _lo: f64, hi: f64| hi.powf(t - 1.0) * dtheta(u),
            mid,
            x,
            1e-8,
            1e-6,
        );
        total += upper.value;
        err += upper.err;
    } else {
        let upper = quad::tanh_sinh(
            &|u: f64, _lo: f64, _hi: f64| (x - u).powf(t - 1.0) * dtheta(u),
            mid,
            u1,
            1e-8,
            1e-6,
        );
        total += upper.value;
        err += upper.err;
        let outer = quad::tanh_sinh(
            &|u: f64, _lo: f64, hi: f64| hi.powf(t - 1.0) * dtheta(u),
            u1,
            x,
            1e-8,
            1e-6,
        );
        total += outer.value;
        err += outer.err;
    }
    // absolute gate: mean densities live on O(1) scales, and past the
    // support the pieces cancel to ~0 while their individual error reports
    // stay finite, so a relative gate would reject correct cancellation
    if err > 5e-3 * total.abs().max(1.0) {
        return Err(Error::QuadratureFail {
            reason: "fractional mean-density integral did not settle".into(),
            residual: err,
        });
    }
    Ok(total.max(0.0))
}

/// Transport a mean density across reciprocation of the mixing law:
///
/// ```text
/// f_{D_t(1/G)}(x) = x^{t-2} exp(-t E log G) f_{D_t(G)}(1/x).
/// ```
///
/// Applying it twice (with the log moment of 1/G the second time) is the
/// identity.
pub fn mean_density_dual(
    x: f64,
    t: f64,
    density_of_mean: &dyn Fn(f64) -> Result<f64>,
    elog_g: f64,
) -> Result<f64> {
    check_time_mass(t)?;
    check_abscissa(x)?;
    Ok(((t - 2.0) * x.ln() - t * elog_g).exp() * density_of_mean(1.0 / x)?)
}

/// Density of Gamma_t(sigma_u(G)) for the hyperbolic shift
/// sigma_u(q) = (q sinh u + cosh u)/(q cosh u + sinh u), by averaging a
/// damped kernel over cached draws of D = D_t(G):
///
/// ```text
/// f(x) = x^{t-1} e^{-x tanh u - t k_u} / Gamma(t)
///        E[(cosh u + D sinh u)^{-t} exp(-x D / (cosh u (cosh u + D sinh u)))],
/// ```
///
/// with k_u = E log(G/(G sinh u + cosh u)). At u = 0 this is the duality
/// route for Gamma_t(1/G); as u grows it converges to a plain gamma(t) law.
pub struct HyperbolicShiftMc {
    t: f64,
    u: f64,
    k_u: f64,
    draws: Vec<f64>,
}

impl HyperbolicShiftMc {
    pub fn new(
        g: &MixingLaw,
        t: f64,
        u: f64,
        n_mc: usize,
        rng: &mut RandomStream,
    ) -> Result<Self> {
        check_time_mass(t)?;
        if !u.is_finite() || u < 0.0 {
            return Err(Error::domain(format!(
                "shift size must be finite and nonnegative, got {u}"
            )));
        }
        if n_mc < 2 {
            return Err(Error::domain("need at least 2 Monte-Carlo draws"));
        }
        let k_u = moebius_k(g, u.sinh(), u.cosh())?;
        let sampler = MeanSampler::new(g, t, MEAN_KERNEL_STEPS)?;
        let draws = (0..n_mc).map(|_| sampler.draw_mean(rng)).collect();
        Ok(HyperbolicShiftMc { t, u, k_u, draws })
    }

    pub fn eval(&self, x: f64) -> Result<DensityEstimate> {
        check_abscissa(x)?;
        let ch = self.u.cosh();
        let sh = self.u.sinh();
        let n = self.draws.len() as f64;
        let (mut s, mut s2) = (0.0f64, 0.0f64);
        for &d in &self.draws {
            let m = ch + d * sh;
            let v = (-self.t * m.ln() - x * d / (ch * m)).exp();
            s += v;
            s2 += v * v;
        }
        let mean = s / n;
        let var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
        let se = (var / n).sqrt();
        let pre = ((self.t - 1.0) * x.ln()
            - x * self.u.tanh()
            - self.t * self.k_u
            - ln_gamma(self.t))
        .exp();
        Ok(DensityEstimate {
            value: pre * mean,
            std_error: pre * se,
            oscillatory: false,
        })
    }
}

/// One-shot wrapper around [`HyperbolicShiftMc`].
pub fn sigma_u_density_mc(
    x: f64,
    t: f64,
    g: &MixingLaw,
    u: f64,
    n_mc: usize,
    rng: &mut RandomStream,
) -> Result<DensityEstimate> {
    HyperbolicShiftMc::new(g, t, u, n_mc, rng)?.eval(x)
}
