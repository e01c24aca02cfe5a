//! Built-in verification suites behind `verify --suite ...`. Each check is
//! phrased as a TestReport so the output is one JSON array regardless of
//! which mixture of quadrature identities and Monte Carlo comparisons ran.

use thorin_lab::bernstein::{psi_closed, SubordinatorFamily};
use thorin_lab::densities::{density_closed, dirichlet_mean_density, DualMcDensity};
use thorin_lab::mixing_laws::MixingLaw;
use thorin_lab::quad;
use thorin_lab::samplers::{sample_batch, try_sample_batch, RandomStream, WgKernel};
use thorin_lab::special_fn::{lambda_t, lambda_t_inv, stable_pdf};
use thorin_lab::thorin_recovery::{
    pareto_thorin_cdf, stable_fixed_point_residual, stable_power_thorin_cdf, RatioRecovery,
};
use thorin_lab::verify::{mc_laplace, pdf_vs_hist, TestReport};
use thorin_lab::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Identities,
    Densities,
    Thorin,
    All,
}

pub fn run_suite(suite: Suite, n: usize, seed: u64) -> Result<Vec<TestReport>> {
    let mut out = Vec::new();
    if matches!(suite, Suite::Identities | Suite::All) {
        identities(&mut out, n, seed)?;
    }
    if matches!(suite, Suite::Densities | Suite::All) {
        densities(&mut out, n, seed)?;
    }
    if matches!(suite, Suite::Thorin | Suite::All) {
        thorin(&mut out, n, seed)?;
    }
    Ok(out)
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
    (0..n).map(|i| lo * ratio.powi(i as i32)).collect()
}

fn ggc(g: &MixingLaw) -> SubordinatorFamily {
    SubordinatorFamily::Ggc {
        t: 1.0,
        mixing: g.clone(),
    }
}

fn identities(out: &mut Vec<TestReport>, n: usize, seed: u64) -> Result<()> {
    // reciprocal-exponent identity across the closed catalog
    for g in [
        MixingLaw::ArcSine,
        MixingLaw::GAlpha(0.3),
        MixingLaw::Uniform01,
        MixingLaw::ShiftedG0(0.5),
    ] {
        let rec = MixingLaw::reciprocal(g.clone());
        let elog = g.log_moment()?;
        let mut worst = 0.0f64;
        for lambda in log_grid(0.05, 20.0, 20) {
            let lhs = psi_closed(&ggc(&rec), lambda)?;
            let rhs = psi_closed(&ggc(&g), 1.0 / lambda)? + elog + lambda.ln();
            worst = worst.max((lhs - rhs).abs());
        }
        out.push(TestReport::new(
            format!("identities/reciprocal-exponent[{g}]"),
            worst,
            1e-8,
            20,
            seed,
            "psi of 1/G vs flipped psi of G plus log terms, closed forms",
        ));
    }
    // the hyperbolic trio splits multiplicatively
    let mut worst = 0.0f64;
    for lambda in log_grid(0.01, 50.0, 25) {
        let cosh = psi_closed(&SubordinatorFamily::HypCosh, lambda)?;
        let sinh = psi_closed(&SubordinatorFamily::HypSinh, lambda)?;
        let tanh = psi_closed(&SubordinatorFamily::HypTanh, lambda)?;
        worst = worst.max((cosh - sinh - tanh).abs());
    }
    out.push(TestReport::new(
        "identities/hyperbolic-split",
        worst,
        1e-12,
        25,
        seed,
        "cosh exponent = sinh exponent + tanh exponent",
    ));
    // Bessel pair: the I(0) exponent is the square root of twice the K(0) one
    let mut worst = 0.0f64;
    let mut worst_half = 0.0f64;
    for lambda in log_grid(0.01, 50.0, 25) {
        let j0 = psi_closed(&SubordinatorFamily::BesselJ(0.0), lambda)?;
        let k0 = psi_closed(&SubordinatorFamily::BesselK(0.0), lambda)?;
        worst = worst.max((j0 - (2.0 * k0).sqrt()).abs());
        let arc = psi_closed(&ggc(&MixingLaw::ArcSine), lambda / 2.0)?;
        worst_half = worst_half.max((j0 - arc).abs());
    }
    out.push(TestReport::new(
        "identities/bessel-i-k-square",
        worst,
        1e-10,
        25,
        seed,
        "argcosh exponent vs sqrt of twice its square",
    ));
    out.push(TestReport::new(
        "identities/bessel-i-halved-arcsine",
        worst_half,
        1e-10,
        25,
        seed,
        "I(0) exponent at lambda equals the arcsine one at lambda/2",
    ));
    // angle map round trip
    let mut worst = 0.0f64;
    for t in [0.2, 0.5, 0.8] {
        for x in [0.05, 0.3, 0.5, 0.77, 0.99] {
            let back = lambda_t(t, lambda_t_inv(t, x)?)?;
            worst = worst.max((back - x).abs());
        }
    }
    out.push(TestReport::new(
        "identities/angle-map-round-trip",
        worst,
        1e-10,
        15,
        seed,
        "",
    ));
    // discretized subordinator: MC vs the kernel's own transform (no bias),
    // then the kernel's transform vs the continuum closed form (no noise)
    let steps = 2048;
    let kernel = WgKernel::new(&MixingLaw::ArcSine, 1.0, steps)?;
    let batch = sample_batch(n, seed, "wg[arcsine]", |rng| kernel.draw(rng).gamma_value());
    let lp = &mc_laplace(&batch, &[1.0])?[0];
    let exact = kernel.laplace_exact(1.0);
    out.push(TestReport::new(
        "identities/wg-mc-vs-kernel-transform",
        (lp.mean - exact).abs() / lp.std_error,
        4.0,
        n,
        seed,
        format!("lambda=1, steps={steps}, statistic in MC sigmas"),
    ));
    let closed = (-psi_closed(&ggc(&MixingLaw::ArcSine), 1.0)?).exp();
    out.push(TestReport::new(
        "identities/wg-kernel-vs-closed-transform",
        (exact - closed).abs() / closed,
        1e-3,
        steps,
        seed,
        "relative discretization drift of the midpoint kernel at lambda=1",
    ));
    Ok(())
}

fn densities(out: &mut Vec<TestReport>, n: usize, seed: u64) -> Result<()> {
    // value density of the uniform family against its own exact sampler
    let g = MixingLaw::Uniform01;
    let batch = try_sample_batch(n, seed.wrapping_add(1), "closed[uniform,t=1]", |rng| {
        thorin_lab::samplers::closed_form_sample(rng, &g, 1.0)
    })?;
    let pdf = |x: f64| density_closed(&g, 1.0, x).unwrap_or(0.0);
    let mut rep = pdf_vs_hist(&batch, &pdf, (0.0, f64::INFINITY), 40)?;
    rep.name = "densities/hist-vs-closed[uniform,t=1]".into();
    out.push(rep);
    // normalized-mean densities integrate to one: a compact beta-shaped one
    // and a heavy-tailed one folded by x -> 1/x
    let beta_mass = quad::tanh_sinh(
        &|x: f64, _, _| dirichlet_mean_density(&MixingLaw::reciprocal(MixingLaw::ArcSine), 0.8, x)
            .unwrap_or(0.0),
        0.0,
        1.0,
        1e-11,
        1e-9,
    )
    .value;
    out.push(TestReport::new(
        "densities/mean-mass[reciprocal(arcsine),t=0.8]",
        (beta_mass - 1.0).abs(),
        1e-6,
        0,
        seed,
        "quadrature of the compactly supported mean density",
    ));
    let folded_mass = quad::tanh_sinh(
        &|u: f64, _, _| {
            if u <= 0.0 {
                return 0.0;
            }
            dirichlet_mean_density(&MixingLaw::ArcSine, 0.5, 1.0 / u).unwrap_or(0.0) / (u * u)
        },
        0.0,
        1.0,
        1e-11,
        1e-9,
    )
    .value;
    out.push(TestReport::new(
        "densities/mean-mass[arcsine,t=0.5]",
        (folded_mass - 1.0).abs(),
        1e-6,
        0,
        seed,
        "heavy-tailed mean density integrated through the reciprocal fold",
    ));
    // negative-moment identity of the normalized mean
    let t = 0.5;
    let g = MixingLaw::ArcSine;
    let target = (t * g.log_moment()?).exp();
    let means = try_sample_batch(n, seed.wrapping_add(2), "mean[arcsine,t=0.5]", |rng| {
        thorin_lab::samplers::closed_form_dirichlet(rng, &g, t)
    })?;
    let (mut sum, mut sumsq) = (0.0f64, 0.0f64);
    for &d in &means.values {
        let v = d.powf(-t);
        sum += v;
        sumsq += v * v;
    }
    let nf = means.values.len() as f64;
    let mean = sum / nf;
    let se = ((sumsq / nf - mean * mean).max(0.0) / nf).sqrt();
    out.push(TestReport::new(
        "densities/mean-negative-moment[arcsine,t=0.5]",
        (mean - target).abs() / se,
        4.0,
        n,
        seed,
        "E D^{-t} against exp(t E log G), statistic in MC sigmas",
    ));
    // dual-route Monte Carlo against the closed value density
    let mut rng = RandomStream::new(seed.wrapping_add(3));
    let dual = DualMcDensity::with_steps(&MixingLaw::Uniform01, 1.0, n, 4096, &mut rng)?;
    let est = dual.eval(1.0)?;
    let closed = density_closed(&MixingLaw::Uniform01, 1.0, 1.0)?;
    out.push(TestReport::new(
        "densities/dual-mc-vs-closed[uniform,t=1]",
        (est.value - closed).abs() / est.std_error,
        5.0,
        n,
        seed,
        "x=1, statistic in MC sigmas (includes mean-kernel discretization bias)",
    ));
    Ok(())
}

fn thorin(out: &mut Vec<TestReport>, n: usize, seed: u64) -> Result<()> {
    // sample-route recovery against the closed arcsine cdf
    let t = 0.5;
    let means = sample_batch(n, seed.wrapping_add(4), "inv-beta", move |rng| {
        1.0 / rng.beta(0.5, 0.5 + t)
    });
    let rec = RatioRecovery::from_samples(t, &means.values)?;
    let mut worst = 0.0f64;
    for x in log_grid(1.05, 8.0, 10) {
        let got = rec.eval(x)?.0;
        let want = 2.0 / std::f64::consts::PI * (1.0 / x).sqrt().asin();
        worst = worst.max((got - want).abs());
    }
    let threshold = (8.0 / (n as f64).sqrt()).clamp(0.01, 0.08);
    out.push(TestReport::new(
        "thorin/recovery[arcsine,t=0.5]",
        worst,
        threshold,
        n,
        seed,
        "sup gap to the closed cdf over 10 grid points, exact mean law input",
    ));
    // the unit-index limit expression continues the gamma-ratio family
    let near = pareto_thorin_cdf(1.0, 1.0, 0.999)?;
    let limit = pareto_thorin_cdf(1.0, 1.0, 1.0)?;
    out.push(TestReport::new(
        "thorin/pareto-index-limit",
        (near - limit).abs(),
        5e-3,
        0,
        seed,
        "theta=0.999 against the theta=1 closed limit at z=1",
    ));
    // stable self-characterization residual
    let resid = stable_fixed_point_residual(0.5, &|y| stable_pdf(0.5, y), &[0.3, 0.7, 1.3, 2.2])?;
    out.push(TestReport::new(
        "thorin/stable-fixed-point[alpha=0.5]",
        resid,
        1e-3,
        4,
        seed,
        "",
    ));
    // quadrature route against the generic sample route for the power family
    let stable = sample_batch(n, seed.wrapping_add(5), "stable[0.5]", |rng| rng.stable(0.5));
    let rec = RatioRecovery::from_samples(0.5, &stable.values)?;
    let direct = stable_power_thorin_cdf(0.5, 1.0)?;
    let sampled = rec.eval(1.0)?.0;
    let threshold = (8.0 / (n as f64).sqrt()).clamp(0.01, 0.08);
    out.push(TestReport::new(
        "thorin/stable-power-quad-vs-samples",
        (direct - sampled).abs(),
        threshold,
        n,
        seed,
        "y=1",
    ));
    Ok(())
}
