//! Family-spec resolution and the catalog listing. Specs name either a
//! mixing law (gamma-mixture subordinators) or one of the special
//! subordinators with hand-carried exponents.

use thorin_lab::bernstein::{BernsteinEval, PsiSource, SubordinatorFamily};
use thorin_lab::mixing_laws::{parse_family, MixingLaw};
use thorin_lab::Error;

pub const FAMILY_GRAMMAR: &str = "\
family spec grammar:
  mixing laws (gamma mixtures; the subordinator carries Thorin measure t x law):
    arcsine                sqrt-law on (0,1)
    uniform                uniform on (0,1)
    galpha:<a>             a in (0,1); Cauchy-angle power law on (0,1)
    g0shift:<mu>           mu + logistic-Cauchy law, mu >= 0
    zratio:<mu>            two-level law {mu, mu+1} with the logistic weights
    paretoratio:<m>        exponential over an independent gamma(m)
    gammapow:<a>           unit exponential to the power 1/a (Weibull shape a)
    stable:<a>             positive a-stable, a in (0,1)
    reciprocal(<spec>)     the law of 1/G for any spec above
    table:<path.csv>       quantile knots, CSV columns p,x
  special subordinators (psi per unit time):
    gammastd | hypcosh | hypsinh | hyptanh | stablehalf
    besselj:<nu>           nu = 0 or -1/2 < nu < 0
    besselk:<nu>           |nu| < 1
    powerjump:<a>          sum of a-th powers of gamma jumps (GGC only for a >= 1)";

#[derive(Debug, Clone)]
pub enum CliFamily {
    Mixing(MixingLaw),
    Sub(SubordinatorFamily),
}

/// A spec whose head is unknown is a usage problem (Err(String) carries the
/// grammar); a known head with a bad parameter surfaces as a domain error.
pub fn resolve_family(spec: &str) -> Result<Result<CliFamily, Error>, String> {
    let s = spec.trim();
    match s {
        "gammastd" => return Ok(Ok(CliFamily::Sub(SubordinatorFamily::GammaStd))),
        "hypcosh" => return Ok(Ok(CliFamily::Sub(SubordinatorFamily::HypCosh))),
        "hypsinh" => return Ok(Ok(CliFamily::Sub(SubordinatorFamily::HypSinh))),
        "hyptanh" => return Ok(Ok(CliFamily::Sub(SubordinatorFamily::HypTanh))),
        "stablehalf" => return Ok(Ok(CliFamily::Sub(SubordinatorFamily::StableHalf))),
        _ => {}
    }
    if let Some((head, tail)) = s.split_once(':') {
        let sub = |f: fn(f64) -> SubordinatorFamily| -> Result<Result<CliFamily, Error>, String> {
            match tail.trim().parse::<f64>() {
                Ok(v) => {
                    let fam = f(v);
                    match fam.validate() {
                        Ok(()) => Ok(Ok(CliFamily::Sub(fam))),
                        Err(e) => Ok(Err(e)),
                    }
                }
                Err(_) => Err(format!("bad numeric parameter in family '{s}'")),
            }
        };
        match head.trim() {
            "besselj" => return sub(SubordinatorFamily::BesselJ),
            "besselk" => return sub(SubordinatorFamily::BesselK),
            "powerjump" => return sub(SubordinatorFamily::PowerJump),
            "galpha" | "g0shift" | "zratio" | "paretoratio" | "gammapow" | "stable"
            | "table" => return Ok(parse_family(s).map(CliFamily::Mixing)),
            _ => return Err(format!("unrecognized family '{s}'")),
        }
    }
    match s {
        "arcsine" | "uniform" => Ok(parse_family(s).map(CliFamily::Mixing)),
        _ if s.starts_with("reciprocal(") => Ok(parse_family(s).map(CliFamily::Mixing)),
        _ => Err(format!("unrecognized family '{s}'")),
    }
}

/// Spec heads whose catalog formula displays a power of t/(1-a): for those
/// the psi column counts one displayed unit, i.e. (1-a) units of Thorin
/// mass, so that exp(-t*psi) reproduces the catalog formula with t in its
/// displayed exponent.
pub fn display_unit_scale(g: &MixingLaw) -> f64 {
    match g {
        MixingLaw::GAlpha(a) => 1.0 - a,
        MixingLaw::Reciprocal(inner) => match inner.as_ref() {
            MixingLaw::GAlpha(a) => 1.0 - a,
            _ => 1.0,
        },
        _ => 1.0,
    }
}

pub struct CatalogEntry {
    pub spec: String,
    pub kind: &'static str,
    pub psi_form: String,
    pub thorin_measure: String,
    pub notes: String,
}

fn psi_form_of(fam: &SubordinatorFamily) -> String {
    match BernsteinEval::new(fam.clone()) {
        Ok(eval) => match eval.source() {
            PsiSource::ClosedForm(tag) => (*tag).to_string(),
            PsiSource::Quadrature => "quadrature".to_string(),
        },
        Err(_) => "-".to_string(),
    }
}

fn mixing_entry(g: MixingLaw, notes: &str) -> CatalogEntry {
    let spec = g.spec_string();
    let psi_form = psi_form_of(&SubordinatorFamily::Ggc {
        t: 1.0,
        mixing: g.clone(),
    });
    let (lo, hi) = g.support();
    CatalogEntry {
        spec,
        kind: "mixing law",
        psi_form,
        thorin_measure: format!("t x law of G on ({lo}, {hi})"),
        notes: notes.to_string(),
    }
}

fn sub_entry(fam: SubordinatorFamily, spec: &str, thorin: &str, notes: &str) -> CatalogEntry {
    CatalogEntry {
        spec: spec.to_string(),
        kind: "subordinator",
        psi_form: psi_form_of(&fam),
        thorin_measure: thorin.to_string(),
        notes: notes.to_string(),
    }
}

pub fn catalog() -> Vec<CatalogEntry> {
    let mut out = Vec::new();
    out.push(mixing_entry(
        MixingLaw::ArcSine,
        "psi(l) = 2 log((sqrt(1+l) + sqrt(l))); value law of Gamma_t has a closed density",
    ));
    out.push(mixing_entry(
        MixingLaw::Uniform01,
        "psi(l) = (1+l)log(1+l)/l scaled; D_1 density sin(pi/x)-shaped",
    ));
    out.push(mixing_entry(
        MixingLaw::GAlpha(0.5),
        "parameter a in (0,1); psi column counts one displayed unit = (1-a) Thorin mass, \
         so laplace = exp(-t*psi) matches the catalog formula with t in its shown exponent",
    ));
    out.push(mixing_entry(
        MixingLaw::ShiftedG0(1.0),
        "mu >= 0; mu = 0 needs no-log-moment care (E log G diverges)",
    ));
    out.push(mixing_entry(
        MixingLaw::ZRatio(0.5),
        "two-point support {mu, mu+1}",
    ));
    out.push(mixing_entry(
        MixingLaw::ParetoRatio(1.0),
        "survival (1+x)^{-m}; Thorin cdf of the ratio family recoverable in closed integrals \
         (thorin --target pareto:m)",
    ));
    out.push(mixing_entry(
        MixingLaw::GammaPower(0.7),
        "Weibull shape a; distinct from the implicit mixing law behind gamma_1^{1/a} \
         (thorin --target gammapow:a)",
    ));
    out.push(mixing_entry(
        MixingLaw::Stable(0.6),
        "positive a-stable scaled to E e^{-l S} = e^{-l^a}",
    ));
    out.push(mixing_entry(
        MixingLaw::reciprocal(MixingLaw::ArcSine),
        "reciprocal(<spec>) wraps any family; duality links its exponent to the base family",
    ));
    out.push(sub_entry(
        SubordinatorFamily::GammaStd,
        "gammastd",
        "unit atom at 1",
        "the reference gamma subordinator",
    ));
    out.push(sub_entry(
        SubordinatorFamily::HypCosh,
        "hypcosh",
        "atom train at (2k+1)^2/2 with weights 1 (truncated)",
        "hitting-time family; equals hypsinh + hyptanh in exponent",
    ));
    out.push(sub_entry(
        SubordinatorFamily::HypSinh,
        "hypsinh",
        "atom train at 2k^2 (truncated)",
        "",
    ));
    out.push(sub_entry(
        SubordinatorFamily::HypTanh,
        "hyptanh",
        "difference of atom trains; not a positive measure",
        "infinitely divisible but NOT a GGC; thorin_of refuses it",
    ));
    out.push(sub_entry(
        SubordinatorFamily::BesselJ(0.0),
        "besselj:<nu>",
        "nu=0: density 1/(pi sqrt(z(2-z))) on (0,2), mass 1; nu<0: infinite mass",
        "nu = 0 or -1/2 < nu < 0",
    ));
    out.push(sub_entry(
        SubordinatorFamily::BesselK(0.0),
        "besselk:<nu>",
        "density cosh(nu argcosh(z-1))/(pi sqrt(z(z-2))) on (2,inf), infinite mass",
        "|nu| < 1",
    ));
    out.push(sub_entry(
        SubordinatorFamily::StableHalf,
        "stablehalf",
        "density 1/(pi sqrt(2 z)) on (0,inf), infinite mass",
        "exponent sqrt(2 l)",
    ));
    out.push(sub_entry(
        SubordinatorFamily::PowerJump(1.5),
        "powerjump:<a>",
        "a >= 1: (1/a) x law of a^{-a} S_{1/a} powers; a < 1: not a GGC",
        "sum of a-th powers of the jumps of a gamma process",
    ));
    out
}
