//! Quadrature engines shared by the rest of the crate: an adaptive
//! Gauss-Kronrod integrator with explicit split points, a semi-infinite
//! transform, and Gauss-Jacobi rules for endpoint-weighted kernels.

use crate::error::{Error, Result};
use crate::special_fn::ln_gamma;

/// 7-point Gauss / 15-point Kronrod abscissae on [0,1] (positive half).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_2,
    0.949_107_912_342_758_524_5,
    0.864_864_423_359_769_072_8,
    0.741_531_185_599_394_439_9,
    0.586_087_235_467_691_130_3,
    0.405_845_151_377_397_166_9,
    0.207_784_955_007_898_467_6,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_96,
    0.063_092_092_629_978_553_29,
    0.104_790_010_322_250_183_8,
    0.140_653_259_715_525_918_7,
    0.169_004_726_639_267_902_8,
    0.190_350_578_064_785_409_9,
    0.204_432_940_075_298_892_4,
    0.209_482_141_084_727_828_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_3,
    0.279_705_391_489_276_667_9,
    0.381_830_050_505_118_944_9,
    0.417_959_183_673_469_387_8,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub err: f64,
}

impl QuadResult {
    /// Enforce a tolerance after the fact, mapping failure onto the library error.
    pub fn expect_tol(self, abs_tol: f64, rel_tol: f64, what: &str) -> Result<f64> {
        let bound = abs_tol.max(rel_tol * self.value.abs());
        if self.err.is_finite() && self.err <= bound && self.value.is_finite() {
            Ok(self.value)
        } else {
            Err(Error::QuadratureFail {
                reason: what.to_string(),
                residual: self.err,
            })
        }
    }
}

/// One Gauss-Kronrod 15 panel. Returns (value, raw error estimate, resabs, resasc).
fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut result_gauss = fc * WG[3];
    let mut result_kronrod = fc * WGK[7];
    let mut resabs = fc.abs() * WGK[7];
    let mut fv1 = [0.0f64; 7];
    let mut fv2 = [0.0f64; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        result_kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            result_gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = result_kronrod * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let err = ((result_kronrod - result_gauss) * half).abs();
    (
        result_kronrod * half,
        rescale_error(err, resabs * half.abs(), resasc * half.abs()),
        resabs * half.abs(),
        resasc * half.abs(),
    )
}

fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = err;
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        err = if scale < 1.0 { resasc * scale } else { resasc };
    }
    let min_err = 50.0 * f64::EPSILON * resabs;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && min_err > err {
        err = min_err;
    }
    err
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

/// Adaptive Gauss-Kronrod on a finite interval, refining the worst panel first.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> QuadResult {
    adaptive_pts(&f, &[a, b], abs_tol, rel_tol, max_panels)
}

/// Adaptive integration over consecutive sub-intervals of `pts` (sorted,
/// length >= 2). Interior points mark known kinks or integrable singularities
/// so the refinement never straddles them.
pub fn adaptive_pts<F: Fn(f64) -> f64>(
    f: &F,
    pts: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> QuadResult {
    debug_assert!(pts.len() >= 2);
    let mut panels: Vec<Panel> = Vec::with_capacity(max_panels.min(256));
    for w in pts.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, e, _, _) = kronrod15(f, w[0], w[1]);
        panels.push(Panel {
            a: w[0],
            b: w[1],
            value: v,
            err: e,
        });
    }
    if panels.is_empty() {
        return QuadResult {
            value: 0.0,
            err: 0.0,
        };
    }
    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.err).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) || panels.len() >= max_panels {
            return QuadResult { value: total, err };
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .map(|(i, p)| (i, p.err))
            .unwrap();
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // interval exhausted floating-point resolution; keep as-is
            let mut q = p;
            q.err = 0.0;
            panels.push(q);
            continue;
        }
        let (v1, e1, _, _) = kronrod15(f, p.a, mid);
        let (v2, e2, _, _) = kronrod15(f, mid, p.b);
        panels.push(Panel {
            a: p.a,
            b: mid,
            value: v1,
            err: e1,
        });
        panels.push(Panel {
            a: mid,
            b: p.b,
            value: v2,
            err: e2,
        });
    }
}

/// Double-exponential (tanh-sinh) rule on (a, b). The integrand receives
/// (x, x-a, b-x) with both endpoint offsets computed free of cancellation,
/// so integrable power singularities at either edge are resolved to full
/// precision. Non-finite samples count as 0; they can only occur on a set
/// the rule weights negligibly.
pub fn tanh_sinh<F: Fn(f64, f64, f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> QuadResult {
    if !(b > a) {
        return QuadResult { value: 0.0, err: 0.0 };
    }
    let c = 0.5 * (b - a);
    let len = b - a;
    let umax = 4.0f64;
    let level_sum = |h: f64| -> f64 {
        let n = (umax / h).floor() as i64;
        let mut sum = 0.0f64;
        for k in -n..=n {
            let u = k as f64 * h;
            let s = 0.5 * std::f64::consts::PI * u.sinh();
            let ch = s.cosh();
            let w = 0.5 * std::f64::consts::PI * u.cosh() / (ch * ch);
            if w < 1e-300 {
                continue;
            }
            // 1 - |tanh(s)| without cancellation
            let em = (-2.0 * s.abs()).exp();
            let dist = c * (2.0 * em / (1.0 + em));
            let (x, from_lo, from_hi) = if s >= 0.0 {
                (b - dist, len - dist, dist)
            } else {
                (a + dist, dist, len - dist)
            };
            if from_lo <= 0.0 || from_hi <= 0.0 {
                continue;
            }
            let v = f(x, from_lo, from_hi);
            if v.is_finite() {
                sum += v * w;
            }
        }
        sum * h * c
    };
    let mut h = 1.0;
    let mut prev = level_sum(h);
    let mut err = f64::INFINITY;
    for _ in 0..6 {
        h *= 0.5;
        let cur = level_sum(h);
        err = (cur - prev).abs();
        prev = cur;
        if err <= abs_tol.max(rel_tol * cur.abs()) {
            // the sequence converges double-exponentially, so the last
            // difference is already a pessimistic error bound
            return QuadResult { value: cur, err };
        }
    }
    QuadResult { value: prev, err }
}

/// Integral over [a, inf) through the rational substitution x = a + s/(1-s).
pub fn semi_infinite<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> QuadResult {
    let g = |s: f64| {
        let om = 1.0 - s;
        let x = a + s / om;
        let jac = 1.0 / (om * om);
        let v = f(x) * jac;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    adaptive_pts(&g, &[0.0, 0.5, 1.0], abs_tol, rel_tol, max_panels)
}

/// Gauss rule for the weight (1-s)^alpha * s^beta on [0,1]; the returned
/// weights already absorb the singular factor, so `integrate` applies them
/// to the smooth part only.
#[derive(Debug, Clone)]
pub struct JacobiRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl JacobiRule {
    pub fn new(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > -1.0 && beta > -1.0) || n == 0 {
            return Err(Error::domain(format!(
                "Jacobi rule needs alpha, beta > -1 and n >= 1 (got alpha={alpha}, beta={beta}, n={n})"
            )));
        }
        // Recurrence coefficients for monic Jacobi polynomials on [-1,1].
        let mut diag = vec![0.0f64; n];
        let mut off = vec![0.0f64; n]; // off[k] couples k-1 and k
        let (a, b) = (alpha, beta);
        diag[0] = (b - a) / (a + b + 2.0);
        for (k, d) in diag.iter_mut().enumerate().skip(1) {
            let k = k as f64;
            *d = (b * b - a * a) / ((2.0 * k + a + b) * (2.0 * k + a + b + 2.0));
        }
        if n > 1 {
            off[1] = (4.0 * (1.0 + a) * (1.0 + b) / ((a + b + 2.0).powi(2) * (a + b + 3.0))).sqrt();
        }
        for (k, o) in off.iter_mut().enumerate().skip(2) {
            let k = k as f64;
            let num = 4.0 * k * (k + a) * (k + b) * (k + a + b);
            let den = (2.0 * k + a + b).powi(2) * (2.0 * k + a + b + 1.0) * (2.0 * k + a + b - 1.0);
            *o = (num / den).sqrt();
        }
        let mu0 = ((a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
            - ln_gamma(a + b + 2.0))
        .exp();
        let (mut nodes, first_comp) = tridiag_eigen(&mut diag, &mut off)?;
        let mut weights: Vec<f64> = first_comp.iter().map(|q| mu0 * q * q).collect();
        // map from [-1,1] with weight (1-x)^a (1+x)^b to [0,1] with (1-s)^a s^b
        let scale = 2.0f64.powf(-(a + b + 1.0));
        for x in nodes.iter_mut() {
            *x = 0.5 * (*x + 1.0);
        }
        for w in weights.iter_mut() {
            *w *= scale;
        }
        // ascending nodes make downstream splitting predictable
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| nodes[i].total_cmp(&nodes[j]));
        Ok(JacobiRule {
            nodes: order.iter().map(|&i| nodes[i]).collect(),
            weights: order.iter().map(|&i| weights[i]).collect(),
        })
    }

    /// Integral over [0,1] of (1-s)^alpha s^beta g(s) ds.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * g(x))
            .sum()
    }
}

/// Plain Gauss-Legendre rule on [0,1] (Jacobi with zero exponents).
pub fn gauss_legendre(n: usize) -> JacobiRule {
    JacobiRule::new(n, 0.0, 0.0).expect("legendre coefficients are always valid")
}

/// Eigenvalues and first eigenvector components of a symmetric tridiagonal
/// matrix (QL with implicit shifts). `off[0]` is unused on input.
fn tridiag_eigen(diag: &mut [f64], off: &mut [f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    let mut z = vec![0.0f64; n];
    z[0] = 1.0;
    // shift the off-diagonal down one slot: e[i] couples i and i+1
    let mut e = vec![0.0f64; n];
    for i in 1..n {
        e[i - 1] = off[i];
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::QuadratureFail {
                    reason: "tridiagonal eigensolver failed to converge".into(),
                    residual: e[l].abs(),
                });
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            for i in (l..m).rev() {
                let mut fv = s * e[i];
                let bv = c * e[i];
                r = fv.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = fv / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * bv;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - bv;
                fv = z[i + 1];
                z[i + 1] = s * z[i] + c * fv;
                z[i] = c * z[i] - s * fv;
            }
            if r == 0.0 && m > l + 1 {
                continue;
            }
            diag[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok((diag.to_vec(), z))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_exact_on_smooth() {
        let r = adaptive(|x: f64| x.exp(), 0.0, 1.0, 1e-12, 1e-12, 64);
        assert!((r.value - (std::f64::consts::E - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn split_points_handle_log_singularity() {
        // integral of ln|x - 1/2| over [0,1] = -1 - ln 2
        let f = |x: f64| (x - 0.5f64).abs().ln();
        let r = adaptive_pts(&f, &[0.0, 0.5, 1.0], 1e-10, 1e-10, 400);
        assert!((r.value - (-1.0 - std::f64::consts::LN_2)).abs() < 1e-9);
    }

    #[test]
    fn semi_infinite_gaussian_tail() {
        let r = semi_infinite(|x: f64| (-x * x).exp(), 0.0, 1e-12, 1e-12, 200);
        assert!((r.value - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn jacobi_rule_integrates_beta_kernel() {
        // integral (1-s)^(-0.5) s^(-0.5) ds = pi
        let rule = JacobiRule::new(24, -0.5, -0.5).unwrap();
        assert!((rule.integrate(|_| 1.0) - std::f64::consts::PI).abs() < 1e-12);
        // with a smooth factor: integral (1-s)^(-0.5) s^(-0.5) e^s ds = pi * e^{1/2} * I0(1/2)
        let got = rule.integrate(|s| s.exp());
        let want = std::f64::consts::PI * 0.5f64.exp() * 1.063_483_370_741_323_5;
        assert!((got - want).abs() < 1e-10);
    }

    #[test]
    fn legendre_matches_kronrod() {
        let rule = gauss_legendre(32);
        let a = rule.integrate(|s| (1.0 + 3.0 * s).ln());
        let b = adaptive(|s: f64| (1.0 + 3.0 * s).ln(), 0.0, 1.0, 1e-13, 1e-13, 64).value;
        assert!((a - b).abs() < 1e-12);
    }
}
