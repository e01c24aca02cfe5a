//! Bernstein exponents psi, Levy densities, and Thorin measures for the
//! subordinator catalog, together with the duality shift psi_G -> psi_{1/G}
//! and general Moebius shifts of the exponent. Every exponent here is the
//! per-unit-time one: E exp(-lambda X_t) = exp(-t psi(lambda)).

use crate::error::{Error, Result};
use crate::mixing_laws::MixingLaw;
use crate::quad;
use crate::special_fn::{bessel_ik_scaled, ln_gamma};

const PI: f64 = std::f64::consts::PI;

/// Subordinators with hand-carried exponents, Levy densities and (where the
/// law is a gamma mixture) Thorin measures.
#[derive(Debug, Clone, PartialEq)]
pub enum SubordinatorFamily {
    /// Standard gamma subordinator.
    GammaStd,
    /// Gamma subordinator time-changed by the mixing law: Thorin measure
    /// t * P_G.
    Ggc { t: f64, mixing: MixingLaw },
    /// Hitting-time subordinator with Laplace transform (1/cosh sqrt(2 l))^t.
    HypCosh,
    /// Companion with transform (sqrt(2 l)/sinh sqrt(2 l))^t.
    HypSinh,
    /// The multiplicative complement of the two above; infinitely divisible
    /// but not a gamma mixture.
    HypTanh,
    /// Bessel-I subordinator of order nu (nu = 0 or -1/2 < nu < 0).
    BesselJ(f64),
    /// Bessel-K subordinator of order |nu| < 1.
    BesselK(f64),
    /// One-sided 1/2-stable subordinator, exponent sqrt(2 lambda).
    StableHalf,
    /// Sum of alpha-powers of the jumps of a gamma process; a gamma mixture
    /// only for alpha >= 1.
    PowerJump(f64),
}

impl SubordinatorFamily {
    pub fn validate(&self) -> Result<()> {
        match self {
            SubordinatorFamily::Ggc { t, .. } => {
                if !(*t > 0.0 && t.is_finite()) {
                    return Err(Error::domain(format!("mixture mass must be > 0, got {t}")));
                }
            }
            SubordinatorFamily::BesselJ(nu) => {
                if !(*nu == 0.0 || (*nu > -0.5 && *nu < 0.0)) {
                    return Err(Error::domain(format!(
                        "bessel-i order must be 0 or in (-1/2, 0), got {nu}"
                    )));
                }
            }
            SubordinatorFamily::BesselK(nu) => {
                if !(nu.abs() < 1.0) {
                    return Err(Error::domain(format!(
                        "bessel-k order must satisfy |nu| < 1, got {nu}"
                    )));
                }
            }
            SubordinatorFamily::PowerJump(alpha) => {
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::domain(format!(
                        "power-jump exponent must be > 0, got {alpha}"
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// How a psi value was produced, with an absolute-error estimate.
#[derive(Debug, Clone, PartialEq)]
pub enum PsiSource {
    ClosedForm(&'static str),
    Quadrature,
}

/// Evaluator for the per-unit-time Bernstein exponent of one family.
/// Prefers a closed form and falls back to quadrature of either the
/// quantile representation (gamma mixtures) or the Levy density.
#[derive(Debug, Clone)]
pub struct BernsteinEval {
    family: SubordinatorFamily,
    source: PsiSource,
    accuracy: f64,
}

impl BernsteinEval {
    pub fn new(family: SubordinatorFamily) -> Result<Self> {
        family.validate()?;
        let source = match closed_form_tag(&family) {
            Some(tag) => PsiSource::ClosedForm(tag),
            None => PsiSource::Quadrature,
        };
        let accuracy = match source {
            PsiSource::ClosedForm(_) => 1e-13,
            PsiSource::Quadrature => 1e-8,
        };
        Ok(BernsteinEval {
            family,
            source,
            accuracy,
        })
    }

    pub fn family(&self) -> &SubordinatorFamily {
        &self.family
    }

    pub fn source(&self) -> &PsiSource {
        &self.source
    }

    /// Absolute-error estimate for evaluate().
    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }

    /// psi(lambda) per unit time.
    pub fn evaluate(&self, lambda: f64) -> Result<f64> {
        match self.source {
            PsiSource::ClosedForm(_) => psi_closed(&self.family, lambda),
            PsiSource::Quadrature => match &self.family {
                SubordinatorFamily::Ggc { mixing, .. } => psi_numeric(mixing, lambda),
                SubordinatorFamily::BesselJ(nu) => psi_from_levy(&SubordinatorFamily::BesselJ(*nu), lambda),
                SubordinatorFamily::BesselK(nu) => psi_from_levy(&SubordinatorFamily::BesselK(*nu), lambda),
                SubordinatorFamily::PowerJump(alpha) => psi_power_jump(*alpha, lambda),
                other => psi_closed(other, lambda),
            },
        }
    }
}

/// Closed-form tag for the families (and mixture laws) whose exponent needs
/// no quadrature.
fn closed_form_tag(family: &SubordinatorFamily) -> Option<&'static str> {
    match family {
        SubordinatorFamily::GammaStd => Some("log(1+lambda)"),
        SubordinatorFamily::Ggc { mixing, .. } => closed_mixture_tag(mixing),
        SubordinatorFamily::HypCosh => Some("log cosh sqrt(2 lambda)"),
        SubordinatorFamily::HypSinh => Some("log(sinh sqrt(2 lambda)/sqrt(2 lambda))"),
        SubordinatorFamily::HypTanh => Some("log(sqrt(2 lambda)/tanh sqrt(2 lambda))"),
        SubordinatorFamily::BesselJ(nu) if *nu == 0.0 => Some("argcosh(1+lambda)"),
        SubordinatorFamily::BesselK(nu) if *nu == 0.0 => Some("argcosh(1+lambda)^2/2"),
        SubordinatorFamily::StableHalf => Some("sqrt(2 lambda)"),
        _ => None,
    }
}

fn closed_mixture_tag(g: &MixingLaw) -> Option<&'static str> {
    match g {
        MixingLaw::ArcSine | MixingLaw::GAlpha(_) => Some("two-sided power mixture"),
        MixingLaw::Uniform01 => Some("(1+l)log(1+l) - l log l"),
        MixingLaw::ShiftedG0(mu) if *mu > 0.0 => Some("log-ratio of log1p terms"),
        MixingLaw::Reciprocal(inner) => match inner.as_ref() {
            MixingLaw::ArcSine | MixingLaw::GAlpha(_) | MixingLaw::Uniform01 => {
                Some("reciprocal two-sided power mixture")
            }
            MixingLaw::ShiftedG0(mu) if *mu > 0.0 => Some("reciprocal shifted log-ratio"),
            MixingLaw::Reciprocal(inner2) => closed_mixture_tag(inner2),
            _ => None,
        },
        _ => None,
    }
}

/// Per-unit-time exponent in closed form. UNSUPPORTED_FAMILY when the
/// catalog has no closed expression for this family.
pub fn psi_closed(family: &SubordinatorFamily, lambda: f64) -> Result<f64> {
    family.validate()?;
    if !(lambda >= 0.0) {
        return Err(Error::domain(format!("psi needs lambda >= 0, got {lambda}")));
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    match family {
        SubordinatorFamily::GammaStd => Ok(lambda.ln_1p()),
        SubordinatorFamily::Ggc { mixing, .. } => psi_closed_mixture(mixing, lambda),
        SubordinatorFamily::HypCosh => {
            let s = (2.0 * lambda).sqrt();
            // log cosh s without overflow
            Ok(s - (2.0f64).ln() + (-2.0 * s).exp().ln_1p())
        }
        SubordinatorFamily::HypSinh => {
            let s = (2.0 * lambda).sqrt();
            if s < 1e-4 {
                // sinh s / s = 1 + s^2/6 + s^4/120 + ...
                Ok((s * s / 6.0 * (1.0 + s * s / 20.0)).ln_1p())
            } else {
                Ok(s - (2.0 * s).ln() + (-(-2.0 * s).exp()).ln_1p())
            }
        }
        SubordinatorFamily::HypTanh => {
            let s = (2.0 * lambda).sqrt();
            if s < 1e-4 {
                // s/tanh s = 1 + s^2/3 - s^4/45 + ...
                Ok((s * s / 3.0 * (1.0 - s * s / 15.0)).ln_1p())
            } else {
                Ok(s.ln() - s.tanh().ln())
            }
        }
        SubordinatorFamily::BesselJ(nu) if *nu == 0.0 => Ok(argcosh_1p(lambda)),
        SubordinatorFamily::BesselK(nu) if *nu == 0.0 => {
            let a = argcosh_1p(lambda);
            Ok(0.5 * a * a)
        }
        SubordinatorFamily::StableHalf => Ok((2.0 * lambda).sqrt()),
        other => Err(Error::UnsupportedFamily(format!(
            "no closed exponent for {other:?}"
        ))),
    }
}

/// argcosh(1 + lambda), stable for small lambda.
fn argcosh_1p(lambda: f64) -> f64 {
    (lambda + (lambda * (2.0 + lambda)).sqrt()).ln_1p()
}

fn psi_closed_mixture(g: &MixingLaw, lambda: f64) -> Result<f64> {
    let l = lambda;
    match g {
        MixingLaw::ArcSine => Ok(2.0 * ((1.0 + l).sqrt() + l.sqrt()).ln()),
        MixingLaw::GAlpha(a) => {
            // -log((1+l)^a - l^a)/(1-a); rewrite for large l to dodge the
            // cancellation between the two powers
            let v = if l > 1.0 {
                a * l.ln() + (a * (1.0 / l).ln_1p()).exp_m1().ln()
            } else {
                ((1.0 + l).powf(*a) - l.powf(*a)).ln()
            };
            Ok(-v / (1.0 - a))
        }
        MixingLaw::Uniform01 => Ok((1.0 + l) * l.ln_1p() - l * l.ln()),
        MixingLaw::ShiftedG0(mu) if *mu > 0.0 => {
            Ok(-((1.0 / (l + mu)).ln_1p() / (1.0 / mu).ln_1p()).ln())
        }
        MixingLaw::Reciprocal(inner) => match inner.as_ref() {
            MixingLaw::ArcSine => Ok(2.0 * (0.5 * (1.0 + (1.0 + l).sqrt())).ln()),
            MixingLaw::GAlpha(a) => {
                // -log(((1+l)^a - 1)/(a l))/(1-a)
                let num = (a * l.ln_1p()).exp_m1();
                Ok(-(num / (a * l)).ln() / (1.0 - a))
            }
            MixingLaw::Uniform01 => {
                if l < 1e-6 {
                    // (1+l)/l log(1+l) - 1 = l/2 - l^2/6 + l^3/12 - ...
                    Ok(l * (0.5 - l / 6.0 + l * l / 12.0))
                } else {
                    Ok((1.0 + l) / l * l.ln_1p() - 1.0)
                }
            }
            MixingLaw::ShiftedG0(mu) if *mu > 0.0 => {
                Ok(-((l / (1.0 + l * mu)).ln_1p() / l).ln())
            }
            MixingLaw::Reciprocal(inner2) => psi_closed_mixture(inner2, lambda),
            other => Err(Error::UnsupportedFamily(format!(
                "no closed exponent for the reciprocal of {other:?}"
            ))),
        },
        other => Err(Error::UnsupportedFamily(format!(
            "no closed exponent for mixture over {other:?}"
        ))),
    }
}

/// psi_G(lambda) = E log(1 + lambda/G) by adaptive quadrature over the
/// quantile representation. Absolute error <= 1e-8 under the standing
/// integrability assumption; DIVERGENT when the law piles mass at 0 too
/// fast for E log(1/G) to exist.
pub fn psi_numeric(g: &MixingLaw, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::domain(format!("psi needs lambda >= 0, got {lambda}")));
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    if g.support().0 == 0.0 && g.log_moment().is_err() {
        return Err(Error::Divergent(
            "E log(1/G) diverges; the exponent is infinite".into(),
        ));
    }
    let f = |p: f64| -> f64 {
        let q = match g.quantile(p) {
            Ok(v) => v,
            Err(_) => return f64::NAN,
        };
        let r = lambda / q;
        if r > 1e15 {
            // log1p saturates; split the logarithm instead
            lambda.ln() - q.ln()
        } else {
            r.ln_1p()
        }
    };
    // endpoint panels shrink geometrically toward the integrable
    // log singularity at p -> 0 (and the bounded tail at p -> 1)
    let r = quad::adaptive_pts(
        &f,
        &[
            0.0, 1e-10, 1e-7, 1e-4, 1e-2, 0.1, 0.5, 0.9, 0.99, 0.9999, 1.0 - 1e-7, 1.0,
        ],
        1e-9,
        1e-10,
        4000,
    );
    r.expect_tol(1e-8, 1e-7, "quantile quadrature for the exponent")
}

/// psi from the Levy density, for the Bessel families without a closed
/// exponent: psi(lambda) = int (1 - e^{-lambda x}) l(x) dx.
fn psi_from_levy(family: &SubordinatorFamily, lambda: f64) -> Result<f64> {
    let f = |x: f64| -> f64 {
        let l = match levy_density(family, x) {
            Ok(v) => v,
            Err(_) => return f64::NAN,
        };
        (-(-lambda * x).exp_m1()) * l
    };
    let head = quad::adaptive_pts(&f, &[0.0, 1e-8, 1e-5, 1e-2, 0.5, 2.0, 8.0], 1e-10, 1e-10, 4000);
    let t0 = 8.0;
    let tail = if matches!(family, SubordinatorFamily::BesselJ(_)) {
        // the scaled I_nu kernel decays only like x^{-3/2}; the map
        // x = t0/v^2 flattens that tail to a bounded smooth integrand
        quad::adaptive(
            &|v: f64| {
                if v <= 0.0 {
                    return 0.0;
                }
                f(t0 / (v * v)) * 2.0 * t0 / (v * v * v)
            },
            0.0,
            1.0,
            1e-11,
            1e-10,
            800,
        )
    } else {
        quad::semi_infinite(&f, t0, 1e-11, 1e-10, 2000)
    };
    let total = head.value + tail.value;
    let err = head.err + tail.err;
    if !(total.is_finite()) || err > 1e-7 * total.abs().max(1.0) {
        return Err(Error::QuadratureFail {
            reason: format!("levy-density exponent quadrature for {family:?}"),
            residual: err,
        });
    }
    Ok(total)
}

/// Exponent of the power-jump process per unit time:
/// (1/alpha) int_0^inf (1 - e^{-lambda x}) e^{-x^{1/alpha}} dx/x.
fn psi_power_jump(alpha: f64, lambda: f64) -> Result<f64> {
    let f = |x: f64| -> f64 {
        (-(-lambda * x).exp_m1()) * (-x.powf(1.0 / alpha)).exp() / x
    };
    let head = quad::adaptive_pts(&f, &[0.0, 1e-8, 1e-4, 0.1, 1.0, 8.0], 1e-11, 1e-10, 4000);
    // push the upper cutoff out until the integrand is dead for any alpha
    let tail = quad::semi_infinite(&f, 8.0, 1e-12, 1e-10, 2000);
    let total = (head.value + tail.value) / alpha;
    let err = (head.err + tail.err) / alpha;
    if !total.is_finite() || err > 1e-7 * total.abs().max(1.0) {
        return Err(Error::QuadratureFail {
            reason: "power-jump exponent quadrature".into(),
            residual: err,
        });
    }
    Ok(total)
}

/// Duality shift: psi_{1/G}(lambda) = psi_G(1/lambda) + E log G + log lambda.
pub fn dual_shift(
    psi_g: impl Fn(f64) -> Result<f64>,
    elog_g: f64,
    lambda: f64,
) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::domain(
            "the duality shift needs lambda > 0; psi(0) = 0 by definition",
        ));
    }
    Ok(psi_g(1.0 / lambda)? + elog_g + lambda.ln())
}

/// Moebius shift of the exponent for sigma(g) = (a g + b)/(c g + d) with
/// ad - bc = +-1: psi_{sigma(G)}(lambda) = psi_G((d lambda + b)/(c lambda + a))
/// + log(c lambda + a) + k_sigma.
pub fn moebius_shift(
    psi_g: impl Fn(f64) -> Result<f64>,
    coeffs: (f64, f64, f64, f64),
    k_sigma: f64,
    lambda: f64,
) -> Result<f64> {
    let (a, b, c, d) = coeffs;
    let det = a * d - b * c;
    // the determinant itself cancels catastrophically for large hyperbolic
    // coefficients, so judge it relative to the product scale
    let scale = (a * d).abs().max((b * c).abs()).max(1.0);
    if (det.abs() - 1.0).abs() > 1e-9 * scale {
        return Err(Error::domain(format!(
            "moebius coefficients must have determinant +-1, got {det}"
        )));
    }
    let denom = c * lambda + a;
    if denom <= 0.0 {
        return Err(Error::domain(format!(
            "moebius shift undefined where c lambda + a = {denom} <= 0"
        )));
    }
    let shifted = (d * lambda + b) / denom;
    Ok(psi_g(shifted)? + denom.ln() + k_sigma)
}

/// The additive constant of the Moebius shift, k = E log(G/(a G + b)),
/// by quadrature over the quantile of G.
pub fn moebius_k(g: &MixingLaw, a: f64, b: f64) -> Result<f64> {
    let f = |p: f64| -> f64 {
        match g.quantile(p) {
            Ok(q) => (q / (a * q + b)).ln(),
            Err(_) => f64::NAN,
        }
    };
    let r = quad::adaptive_pts(
        &f,
        &[0.0, 1e-10, 1e-6, 1e-3, 0.1, 0.5, 0.9, 0.999, 1.0 - 1e-6, 1.0],
        1e-10,
        1e-10,
        4000,
    );
    r.expect_tol(1e-8, 1e-7, "moebius constant quadrature")
}

/// Pointwise Levy density l(x) of the family, including the mixture mass t
/// for the gamma-mixture arm.
pub fn levy_density(family: &SubordinatorFamily, x: f64) -> Result<f64> {
    family.validate()?;
    if !(x > 0.0) {
        return Err(Error::domain(format!("levy density needs x > 0, got {x}")));
    }
    match family {
        SubordinatorFamily::GammaStd => Ok((-x).exp() / x),
        SubordinatorFamily::Ggc { t, mixing } => {
            Ok(t * laplace_of_mixing(mixing, x)? / x)
        }
        SubordinatorFamily::HypCosh => {
            // (1/x) sum over odd squares
            Ok(theta_series(x, |n| {
                let k = 2.0 * n - 1.0;
                PI * PI * k * k / 8.0
            }) / x)
        }
        SubordinatorFamily::HypSinh => {
            Ok(theta_series(x, |n| PI * PI * n * n / 2.0) / x)
        }
        SubordinatorFamily::HypTanh => {
            let cosh_part = theta_series(x, |n| {
                let k = 2.0 * n - 1.0;
                PI * PI * k * k / 8.0
            });
            let sinh_part = theta_series(x, |n| PI * PI * n * n / 2.0);
            Ok(((cosh_part - sinh_part) / x).max(0.0))
        }
        SubordinatorFamily::BesselJ(nu) => {
            let (ie, _) = bessel_ik_scaled(*nu, x)?;
            Ok(ie / x)
        }
        SubordinatorFamily::BesselK(nu) => {
            let (_, ke) = bessel_ik_scaled(nu.abs(), x)?;
            Ok(ke * (-2.0 * x).exp() / x)
        }
        SubordinatorFamily::StableHalf => Ok(1.0 / (x * x.sqrt() * (2.0 * PI).sqrt())),
        SubordinatorFamily::PowerJump(alpha) => {
            Ok((-x.powf(1.0 / alpha)).exp() / (alpha * x))
        }
    }
}

/// E e^{-xG} for the mixing law, by quantile quadrature (closed where known).
pub fn laplace_of_mixing(g: &MixingLaw, x: f64) -> Result<f64> {
    let f = |p: f64| -> f64 {
        match g.quantile(p) {
            Ok(q) => (-x * q).exp(),
            Err(_) => f64::NAN,
        }
    };
    let r = quad::adaptive_pts(
        &f,
        &[0.0, 1e-8, 1e-4, 0.05, 0.5, 0.95, 1.0 - 1e-4, 1.0],
        1e-11,
        1e-10,
        3000,
    );
    r.expect_tol(1e-9, 1e-8, "mixing-law laplace transform")
}

/// Compensated partial sum of exp(-z_n x) over n >= 1 with z_n given by the
/// atom map; stops once terms fall below 1e-18 of the partial sum, with the
/// term count capped around 10/sqrt(x) as small x needs many modes.
fn theta_series(x: f64, atom: impl Fn(f64) -> f64) -> f64 {
    let n_max = ((10.0 / x.sqrt()).ceil() as usize).clamp(8, 2_000_000);
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for n in 1..=n_max {
        let term = (-atom(n as f64) * x).exp();
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// The Thorin measure of a gamma-mixture family, in its most structured
/// available form.
#[derive(Debug, Clone, PartialEq)]
pub enum ThorinMeasure {
    /// Point masses (location, weight). For the hyperbolic families this is
    /// a truncation of an infinite atom train.
    Atoms(Vec<(f64, f64)>),
    /// Absolutely continuous part with a catalog density.
    Density(ThorinDensityKind),
    /// The measure t * P_G.
    ScaledLaw { mass: f64, law: MixingLaw },
}

/// Catalog of closed Thorin densities.
#[derive(Debug, Clone, PartialEq)]
pub enum ThorinDensityKind {
    /// (1/pi)/sqrt(z(2-z)) on (0,2); total mass 1.
    BesselJZero,
    /// Order nu in (-1/2, 0): a two-sided fractional integral against the
    /// symmetric kernel (1-t^2)^{nu-1/2}; infinite total mass.
    BesselJNeg(f64),
    /// cosh(nu argcosh(z-1))/sqrt(z(z-2)) on (2, inf); infinite total mass.
    BesselKNu(f64),
    /// 1/(pi sqrt(2 z)) on (0, inf); infinite total mass.
    StableHalfLaw,
}

impl ThorinDensityKind {
    pub fn support(&self) -> (f64, f64) {
        match self {
            ThorinDensityKind::BesselJZero => (0.0, 2.0),
            ThorinDensityKind::BesselJNeg(_) => (0.0, f64::INFINITY),
            ThorinDensityKind::BesselKNu(_) => (2.0, f64::INFINITY),
            ThorinDensityKind::StableHalfLaw => (0.0, f64::INFINITY),
        }
    }

    /// Density value at z inside the support (0 outside).
    pub fn eval(&self, z: f64) -> Result<f64> {
        if !(z > 0.0) {
            return Err(Error::domain(format!(
                "thorin density needs z > 0, got {z}"
            )));
        }
        match self {
            ThorinDensityKind::BesselJZero => {
                if z >= 2.0 {
                    Ok(0.0)
                } else {
                    Ok(1.0 / (PI * (z * (2.0 - z)).sqrt()))
                }
            }
            ThorinDensityKind::BesselJNeg(nu) => bessel_j_thorin_density(*nu, z),
            ThorinDensityKind::BesselKNu(nu) => {
                if z <= 2.0 {
                    Ok(0.0)
                } else {
                    let s = ((z - 1.0) + ((z - 1.0) * (z - 1.0) - 1.0).sqrt()).ln();
                    Ok((nu * s).cosh() / (z * (z - 2.0)).sqrt())
                }
            }
            ThorinDensityKind::StableHalfLaw => Ok(1.0 / (PI * (2.0 * z).sqrt())),
        }
    }
}

/// Thorin density of the order-nu Bessel-I subordinator for -1/2 < nu < 0:
/// c_nu int_0^1 (1-t^2)^{nu-1/2} [ (z-(1-t))_+^{-nu-1} + (z-(1+t))_+^{-nu-1} ] dt
/// with c_nu = 2^{-nu}/(sqrt(pi) Gamma(nu+1/2) Gamma(-nu)), the unique
/// normalization whose Laplace transform reproduces e^{-z} I_nu(z).
/// Substituting v = z-(1-t) and v = z-(1+t) fuses the two pieces into one
/// beta-type integral over [max(0, z-2), z]:
///   f(z) = c_nu int v^{-nu-1} (z-v)^{nu-1/2} (v-(z-2))^{nu-1/2} dv,
/// which the double-exponential rule evaluates through the singular edges.
/// The density diverges like |z-2|^{-1/2} at z = 2.
fn bessel_j_thorin_density(nu: f64, z: f64) -> Result<f64> {
    let ln_c = -nu * (2.0f64).ln() - 0.5 * PI.ln() - ln_gamma(nu + 0.5) - ln_gamma(-nu);
    let c = ln_c.exp();
    if z == 2.0 {
        return Ok(f64::INFINITY);
    }
    let lo = (z - 2.0).max(0.0);
    let gap = (2.0 - z).max(0.0); // lo - (z-2)
    let f = |x: f64, from_lo: f64, from_hi: f64| -> f64 {
        let v = if lo == 0.0 { from_lo } else { x };
        let third = from_lo + gap; // v - (z-2), exact near the singular edge
        v.powf(-nu - 1.0) * from_hi.powf(nu - 0.5) * third.powf(nu - 0.5)
    };
    let r = quad::tanh_sinh(&f, lo, z, 1e-13, 1e-10);
    Ok(c * r.value)
}

impl ThorinMeasure {
    /// Total mass where finite; +inf for the infinite-mass catalog entries
    /// and truncated atom trains of infinite families.
    pub fn mass(&self) -> Result<f64> {
        match self {
            ThorinMeasure::Atoms(atoms) => Ok(atoms.iter().map(|&(_, w)| w).sum()),
            ThorinMeasure::ScaledLaw { mass, .. } => Ok(*mass),
            ThorinMeasure::Density(kind) => match kind {
                ThorinDensityKind::BesselJZero => {
                    // substitute z = 1 - cos(theta): the weight flattens out
                    let r = quad::adaptive(
                        &|theta: f64| {
                            let z = 1.0 - theta.cos();
                            let dens = 1.0 / (PI * (z * (2.0 - z)).sqrt());
                            dens * theta.sin()
                        },
                        0.0,
                        PI,
                        1e-12,
                        1e-12,
                        400,
                    );
                    Ok(r.value)
                }
                _ => Ok(f64::INFINITY),
            },
        }
    }
}

/// Number of atoms kept when materializing the infinite hyperbolic trains.
pub const HYPERBOLIC_ATOM_COUNT: usize = 64;

/// The Thorin measure of the family. NOT_GGC for the two members that are
/// infinitely divisible without being gamma mixtures.
pub fn thorin_of(family: &SubordinatorFamily) -> Result<ThorinMeasure> {
    family.validate()?;
    match family {
        SubordinatorFamily::GammaStd => Ok(ThorinMeasure::Atoms(vec![(1.0, 1.0)])),
        SubordinatorFamily::Ggc { t, mixing } => Ok(ThorinMeasure::ScaledLaw {
            mass: *t,
            law: mixing.clone(),
        }),
        SubordinatorFamily::HypCosh => Ok(ThorinMeasure::Atoms(
            (1..=HYPERBOLIC_ATOM_COUNT)
                .map(|n| {
                    let k = (2 * n - 1) as f64;
                    (PI * PI * k * k / 8.0, 1.0)
                })
                .collect(),
        )),
        SubordinatorFamily::HypSinh => Ok(ThorinMeasure::Atoms(
            (1..=HYPERBOLIC_ATOM_COUNT)
                .map(|n| {
                    let k = n as f64;
                    (PI * PI * k * k / 2.0, 1.0)
                })
                .collect(),
        )),
        SubordinatorFamily::HypTanh => Err(Error::NotGgc(
            "the tanh subordinator has a signed mixing measure".into(),
        )),
        SubordinatorFamily::BesselJ(nu) => {
            if *nu == 0.0 {
                Ok(ThorinMeasure::Density(ThorinDensityKind::BesselJZero))
            } else {
                Ok(ThorinMeasure::Density(ThorinDensityKind::BesselJNeg(*nu)))
            }
        }
        SubordinatorFamily::BesselK(nu) => {
            Ok(ThorinMeasure::Density(ThorinDensityKind::BesselKNu(nu.abs())))
        }
        SubordinatorFamily::StableHalf => {
            Ok(ThorinMeasure::Density(ThorinDensityKind::StableHalfLaw))
        }
        SubordinatorFamily::PowerJump(alpha) => {
            if *alpha < 1.0 {
                Err(Error::NotGgc(format!(
                    "power-jump process is a gamma mixture only for exponent >= 1, got {alpha}"
                )))
            } else if *alpha == 1.0 {
                Ok(ThorinMeasure::Atoms(vec![(1.0, 1.0)]))
            } else {
                Ok(ThorinMeasure::ScaledLaw {
                    mass: 1.0 / alpha,
                    law: MixingLaw::Stable(1.0 / alpha),
                })
            }
        }
    }
}
