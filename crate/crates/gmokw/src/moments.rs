//! Moments and related summaries: probability weighted moments of the
//! Kumaraswamy core, raw moments by three expansion routes, the mgf, Renyi
//! entropy, and the tilt-scale expectations behind moment-matching
//! estimation.
//!
//! Quadrature on the probability scale is the source of truth throughout;
//! every expansion route is a cross-check that has to agree with it, not the
//! other way round.

use alloc::vec::Vec;

use num_traits::Float;

use crate::baseline::BaselineModel;
use crate::error::{Error, Result};
use crate::family::{ln_one_minus_pow, FamilyParams, ModelSpec, Variant};
use crate::fit::Dataset;
use crate::optim::nelder_mead;
use crate::quad::{integrate_end_refined, integrate_unit};
use crate::series::MAX_TERMS;
pub use crate::special::incomplete_beta;

/// Relative tolerance used by the evaluators that carry no tolerance
/// parameter of their own.
pub const QUAD_TOL: f64 = 1e-10;

fn relabel_divergent(e: Error, what: &'static str) -> Error {
    match e {
        Error::Divergent { .. } => Error::Divergent { what },
        other => other,
    }
}

/// Integral over a unit probability interval, split at one half: the lower
/// piece in the variable itself, the upper piece in its complement. Floats
/// crowd toward zero, so each tail gets refined where the grid can still
/// resolve it; `lower` receives u, `upper` receives v = 1-u.
fn integrate_both_tails<L, U>(lower: L, upper: U, tol: f64) -> Result<f64>
where
    L: Fn(f64) -> f64,
    U: Fn(f64) -> f64,
{
    Ok(integrate_end_refined(&lower, 0.0, 0.5, tol)?
        + integrate_end_refined(&upper, 0.0, 0.5, tol)?)
}

/// Query for the (p, q, r)-th probability weighted moment of a
/// Kumaraswamy-G(a, b) distribution: E[T^p F(T)^q (1-F(T))^r].
#[derive(Debug, Clone)]
pub struct PWMQuery {
    pub p: u32,
    pub q: u32,
    pub r: f64,
    pub kw_a: f64,
    pub kw_b: f64,
    pub baseline: BaselineModel,
}

impl PWMQuery {
    pub fn new(
        p: u32,
        q: u32,
        r: f64,
        kw_a: f64,
        kw_b: f64,
        baseline: BaselineModel,
    ) -> Result<Self> {
        baseline.validate()?;
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::InvalidParam {
                name: "r",
                value: r,
                constraint: "must be finite and >= 0",
            });
        }
        for (value, name) in [(kw_a, "kw_a"), (kw_b, "kw_b")] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParam {
                    name,
                    value,
                    constraint: "must be finite and > 0",
                });
            }
        }
        Ok(PWMQuery {
            p,
            q,
            r,
            kw_a,
            kw_b,
            baseline,
        })
    }
}

/// Gamma_{p,q,r} by quadrature after substituting u = G(t), which maps the
/// support onto (0,1) and folds the baseline density into du.
pub fn pwm_kw(query: &PWMQuery) -> Result<f64> {
    kw_pwm_raw(
        &query.baseline,
        query.kw_a,
        query.kw_b,
        query.p,
        query.q,
        query.r,
        QUAD_TOL,
    )
}

/// Gamma_{p,q,r} with unconstrained real r: the expansion routes need
/// r = theta - 1, which can be negative while the integral still converges
/// (b*theta > 0 keeps the endpoint power integrable).
fn kw_pwm_raw(
    baseline: &BaselineModel,
    a: f64,
    b: f64,
    p: u32,
    q: u32,
    r: f64,
    tol: f64,
) -> Result<f64> {
    let ln_ab = a.ln() + b.ln();
    let kernel = |t: f64, ln_u: f64, ln_sfb: f64| {
        let ln_omga = ln_one_minus_pow(a, ln_u, ln_sfb);
        let ln_s = b * ln_omga;
        // Fully in log space: t^p can overflow on unbounded supports while
        // the density factor underflows, and their product is finite.
        let mut ln_val = ln_ab + (a - 1.0) * ln_u + (b - 1.0) * ln_omga + r * ln_s;
        if p > 0 {
            ln_val += p as f64 * t.ln();
        }
        if q > 0 {
            ln_val += q as f64 * (-ln_s.exp_m1()).ln();
        }
        ln_val.exp()
    };
    integrate_both_tails(
        |u| match baseline.quantile(u) {
            Ok(t) => kernel(t, u.ln(), (-u).ln_1p()),
            Err(_) => f64::NAN,
        },
        |v| kernel(baseline.inverse_sf_ln(v.ln()), (-v).ln_1p(), v.ln()),
        tol,
    )
    .map_err(|e| relabel_divergent(e, "probability weighted moment"))
}

/// Expansion route for [`moment_series`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentRoute {
    /// Survival-power expansion, alpha <= 1 (a single exact term at 1).
    A,
    /// Triangular double expansion through cdf powers, alpha <= 1. Rows are
    /// summed whole so the double series stays summable everywhere route A
    /// converges, but within-row cancellation grows with the row index, so
    /// accuracy degrades as alpha heads toward 0.
    B,
    /// Direct cdf-power expansion, alpha > 1.
    C,
}

/// E[T^s] by the chosen expansion route, each term a PWM of the Kumaraswamy
/// core. The caller is responsible for the moment existing; when it does not,
/// the PWM quadrature inside fails to stabilize and the error surfaces.
pub fn moment_series(spec: &ModelSpec, s: u32, route: MomentRoute, tol: f64) -> Result<f64> {
    let f = &spec.family;
    let (theta, alpha) = (f.theta, f.alpha);
    match route {
        MomentRoute::A | MomentRoute::B => {
            if alpha > 1.0 {
                return Err(Error::Regime {
                    what: "moment routes A and B need alpha <= 1",
                });
            }
        }
        MomentRoute::C => {
            if alpha <= 1.0 {
                return Err(Error::Regime {
                    what: "moment route C needs alpha > 1",
                });
            }
        }
    }
    let abar = f.alpha_bar();
    let mut total = 0.0;
    let mut last = f64::NAN;
    match route {
        MomentRoute::A => {
            let mut a_j = theta * alpha.powf(theta);
            for j in 0..MAX_TERMS {
                let jf = j as f64;
                let gamma = kw_pwm_raw(&spec.baseline, f.a, f.b, s, 0, jf + theta - 1.0, tol)?;
                let term = a_j * gamma;
                total += term;
                last = (term / total).abs();
                if j >= 1 && last <= tol {
                    return Ok(total);
                }
                a_j *= abar * (jf + theta + 1.0) / (jf + 1.0);
                if a_j == 0.0 {
                    return Ok(total);
                }
            }
        }
        MomentRoute::B => {
            // The alternating row sums amplify errors in the cached PWMs by
            // roughly (2(1-alpha))^j, so compute them well below the outer
            // tolerance.
            let inner = (tol * 1e-4).max(1e-13);
            let mut gammas: Vec<f64> = Vec::new();
            let mut a_j = theta * alpha.powf(theta);
            for j in 0..MAX_TERMS {
                while gammas.len() <= j {
                    let q = gammas.len() as u32;
                    gammas.push(kw_pwm_raw(
                        &spec.baseline,
                        f.a,
                        f.b,
                        s,
                        q,
                        theta - 1.0,
                        inner,
                    )?);
                }
                let mut alt = 0.0;
                let mut bc = 1.0;
                for (m, g) in gammas.iter().take(j + 1).enumerate() {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    alt += sign * bc * g;
                    bc = bc * (j - m) as f64 / (m + 1) as f64;
                }
                let term = a_j * alt;
                total += term;
                last = (term / total).abs();
                if j >= 1 && last <= tol {
                    return Ok(total);
                }
                a_j *= abar * (j as f64 + theta + 1.0) / (j as f64 + 1.0);
                if a_j == 0.0 {
                    return Ok(total);
                }
            }
        }
        MomentRoute::C => {
            let rho = (alpha - 1.0) / alpha;
            let mut c_j = 1.0 / alpha;
            for j in 0..MAX_TERMS {
                let gamma =
                    kw_pwm_raw(&spec.baseline, f.a, f.b, s, j as u32, theta - 1.0, tol)?;
                let term = theta * c_j * gamma;
                total += term;
                last = (term / total).abs();
                if j >= 1 && last <= tol {
                    return Ok(total);
                }
                c_j *= rho * (j as f64 + theta + 1.0) / (j as f64 + 1.0);
            }
        }
    }
    Err(Error::Convergence {
        what: "moment expansion",
        achieved: last,
        required: tol,
    })
}

/// E[T^s] = integral of quantile(p)^s over p in (0,1); the reference
/// implementation every series claim is checked against.
pub fn moment_quadrature(spec: &ModelSpec, s: f64, tol: f64) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::InvalidParam {
            name: "s",
            value: s,
            constraint: "must be finite and >= 0",
        });
    }
    integrate_both_tails(
        |p| match spec.quantile(p) {
            Ok(t) => t.powf(s),
            Err(_) => f64::NAN,
        },
        |w| match spec.quantile_from_sf_ln(w.ln()) {
            Ok(t) => t.powf(s),
            Err(_) => f64::NAN,
        },
        tol,
    )
    .map_err(|e| relabel_divergent(e, "moment quadrature"))
}

/// M(s) = integral of exp(s * quantile(p)) over p in (0,1). Fails with a
/// divergence error when the tail refinement cannot stabilize, which is the
/// numerical face of s at or beyond the exponential decay rate.
pub fn mgf(spec: &ModelSpec, s: f64) -> Result<f64> {
    if !s.is_finite() {
        return Err(Error::InvalidParam {
            name: "s",
            value: s,
            constraint: "must be finite",
        });
    }
    integrate_both_tails(
        |p| match spec.quantile(p) {
            Ok(t) => (s * t).exp(),
            Err(_) => f64::NAN,
        },
        |w| match spec.quantile_from_sf_ln(w.ln()) {
            Ok(t) => (s * t).exp(),
            Err(_) => f64::NAN,
        },
        QUAD_TOL,
    )
    .map_err(|e| relabel_divergent(e, "mgf tail refinement"))
}

/// Mixture route for the mgf: negative-binomial weights times the mgfs of the
/// component Kumaraswamy-G(a, b(j+theta)) laws. Applies for alpha <= 1; at 1
/// the mixture collapses to its single exact component.
pub fn mgf_series(spec: &ModelSpec, s: f64, tol: f64) -> Result<f64> {
    let f = &spec.family;
    if f.alpha > 1.0 {
        return Err(Error::Regime {
            what: "mgf mixture route needs alpha <= 1",
        });
    }
    if !s.is_finite() {
        return Err(Error::InvalidParam {
            name: "s",
            value: s,
            constraint: "must be finite",
        });
    }
    let abar = f.alpha_bar();
    let mut total = 0.0;
    let mut last = f64::NAN;
    let mut w = f.alpha.powf(f.theta);
    for j in 0..MAX_TERMS {
        let beta_j = f.b * (j as f64 + f.theta);
        let component = kw_mgf(&spec.baseline, f.a, beta_j, s, tol)?;
        let term = w * component;
        total += term;
        last = (term / total).abs();
        if j >= 1 && last <= tol {
            return Ok(total);
        }
        w *= abar * (f.theta + j as f64) / (j as f64 + 1.0);
        if w == 0.0 {
            return Ok(total);
        }
    }
    Err(Error::Convergence {
        what: "mgf mixture expansion",
        achieved: last,
        required: tol,
    })
}

/// Mgf of one Kumaraswamy-G(a, beta) component through the u = G(t)
/// substitution.
fn kw_mgf(baseline: &BaselineModel, a: f64, beta: f64, s: f64, tol: f64) -> Result<f64> {
    let ln_ab = a.ln() + beta.ln();
    let kernel = |t: f64, ln_u: f64, ln_sfb: f64| {
        let ln_omga = ln_one_minus_pow(a, ln_u, ln_sfb);
        (s * t + ln_ab + (a - 1.0) * ln_u + (beta - 1.0) * ln_omga).exp()
    };
    integrate_both_tails(
        |u| match baseline.quantile(u) {
            Ok(t) => kernel(t, u.ln(), (-u).ln_1p()),
            Err(_) => f64::NAN,
        },
        |v| kernel(baseline.inverse_sf_ln(v.ln()), (-v).ln_1p(), v.ln()),
        tol,
    )
    .map_err(|e| relabel_divergent(e, "component mgf"))
}

/// Entropy order delta plus the model it applies to. delta = 1 is the
/// Shannon limit and is excluded.
#[derive(Debug, Clone)]
pub struct EntropyQuery {
    pub delta: f64,
    pub spec: ModelSpec,
}

impl EntropyQuery {
    pub fn new(delta: f64, spec: ModelSpec) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite() && delta != 1.0) {
            return Err(Error::InvalidParam {
                name: "delta",
                value: delta,
                constraint: "must be finite, > 0, and != 1",
            });
        }
        Ok(EntropyQuery { delta, spec })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyMethod {
    Series,
    Quadrature,
}

/// Renyi entropy I(delta) = log(integral of f^delta) / (1 - delta).
///
/// The quadrature method integrates f(quantile(p))^(delta-1) over p. The
/// series method expands the tilt denominator and integrates each term
/// through u = G(t); it needs alpha != 1 to pick a regime.
pub fn renyi(query: &EntropyQuery, method: EntropyMethod, tol: f64) -> Result<f64> {
    let delta = query.delta;
    let spec = &query.spec;
    let integral = match method {
        EntropyMethod::Quadrature => {
            let g = |t: f64| ((delta - 1.0) * spec.ln_pdf(t)).exp();
            integrate_both_tails(
                |p| match spec.quantile(p) {
                    Ok(t) => g(t),
                    Err(_) => f64::NAN,
                },
                |w| match spec.quantile_from_sf_ln(w.ln()) {
                    Ok(t) => g(t),
                    Err(_) => f64::NAN,
                },
                tol,
            )
            .map_err(|e| relabel_divergent(e, "entropy quadrature"))?
        }
        EntropyMethod::Series => renyi_series_integral(spec, delta, tol)?,
    };
    Ok(integral.ln() / (1.0 - delta))
}

/// Integral of f^delta by the regime expansions of the tilt denominator.
fn renyi_series_integral(spec: &ModelSpec, delta: f64, tol: f64) -> Result<f64> {
    let f = &spec.family;
    let (theta, alpha) = (f.theta, f.alpha);
    if alpha == 1.0 {
        return Err(Error::Regime {
            what: "series entropy needs alpha != 1",
        });
    }
    let dt1 = delta * (theta + 1.0);
    // Below 1 the expansion walks powers of the Kumaraswamy survival with
    // ratio base abar; above 1, powers of the cdf with ratio base rho.
    let survival_powers = alpha < 1.0;
    let (ratio_base, mut coef) = if survival_powers {
        (1.0 - alpha, theta.powf(delta) * alpha.powf(delta * theta))
    } else {
        ((alpha - 1.0) / alpha, (theta / alpha).powf(delta))
    };
    let mut total = 0.0;
    let mut last = f64::NAN;
    for j in 0..MAX_TERMS {
        let inner = renyi_kernel_integral(spec, delta, j, survival_powers, tol)?;
        let term = coef * inner;
        total += term;
        last = (term / total).abs();
        if j >= 1 && last <= tol {
            return Ok(total);
        }
        coef *= ratio_base * (dt1 + j as f64) / (j as f64 + 1.0);
    }
    Err(Error::Convergence {
        what: "entropy expansion",
        achieved: last,
        required: tol,
    })
}

/// One term's integral: the delta-th power of the alpha-free density factor
/// times the j-th power of the Kumaraswamy survival (or cdf).
fn renyi_kernel_integral(
    spec: &ModelSpec,
    delta: f64,
    j: usize,
    survival_powers: bool,
    tol: f64,
) -> Result<f64> {
    let f = &spec.family;
    let (a, b, theta) = (f.a, f.b, f.theta);
    let ln_ab = a.ln() + b.ln();
    let kernel = |t: f64, ln_u: f64, ln_sfb: f64| {
        let ln_omga = ln_one_minus_pow(a, ln_u, ln_sfb);
        let mut ln_val = delta * (ln_ab + (a - 1.0) * ln_u + (b * theta - 1.0) * ln_omga)
            + (delta - 1.0) * spec.baseline.ln_pdf(t);
        if j > 0 {
            ln_val += if survival_powers {
                j as f64 * b * ln_omga
            } else {
                j as f64 * (-(b * ln_omga).exp_m1()).ln()
            };
        }
        ln_val.exp()
    };
    integrate_both_tails(
        |u| match spec.baseline.quantile(u) {
            Ok(t) => kernel(t, u.ln(), (-u).ln_1p()),
            Err(_) => f64::NAN,
        },
        |v| kernel(spec.baseline.inverse_sf_ln(v.ln()), (-v).ln_1p(), v.ln()),
        tol,
    )
    .map_err(|e| relabel_divergent(e, "entropy kernel integral"))
}

/// E[(1 - (1-alpha)(1-G(T)^a)^b)^nu] by closed-form branch.
///
/// Branch map, each validated against [`mom_expectation_quadrature`]:
/// alpha = 1 gives exactly 1 (the variable is identically 1); theta = 1 with
/// nu = 1 gives -(alpha/(1-alpha)) ln(alpha) for any alpha; alpha < 1 with
/// nu > theta gives theta (alpha/(1-alpha))^theta B_alpha(nu-theta, theta);
/// nu = 1 with alpha > 1/2 sums theta (-(1-alpha)/alpha)^i / (theta+i), which
/// converges ever slower toward alpha = 1/2. Everything else has no closed
/// form here and reports a branch error so the caller can fall back to
/// quadrature.
pub fn mom_expectation(spec: &ModelSpec, nu: u32) -> Result<f64> {
    let f = &spec.family;
    let (theta, alpha) = (f.theta, f.alpha);
    if nu == 0 {
        return Err(Error::InvalidParam {
            name: "nu",
            value: 0.0,
            constraint: "must be >= 1",
        });
    }
    if alpha == 1.0 {
        return Ok(1.0);
    }
    let abar = f.alpha_bar();
    if theta == 1.0 && nu == 1 {
        return Ok(-(alpha / abar) * alpha.ln());
    }
    if alpha < 1.0 && (nu as f64) > theta {
        let beta_tail = incomplete_beta(alpha, nu as f64 - theta, theta)?;
        return Ok(theta * (alpha / abar).powf(theta) * beta_tail);
    }
    if nu == 1 && alpha > 0.5 {
        let w = -abar / alpha;
        let mut total = 0.0;
        let mut last = f64::NAN;
        let mut wp = 1.0;
        for i in 0..MAX_TERMS {
            let term = theta * wp / (theta + i as f64);
            total += term;
            last = (term / total).abs();
            if i >= 1 && last <= 1e-13 {
                return Ok(total);
            }
            wp *= w;
        }
        return Err(Error::Convergence {
            what: "tilt expectation series",
            achieved: last,
            required: 1e-13,
        });
    }
    Err(Error::Branch {
        what: "no closed form for this (theta, alpha, nu)",
    })
}

/// The same expectation by quadrature of its probability-scale form
/// integral over p of [alpha / (alpha + (1-alpha)(1-p)^(1/theta))]^nu,
/// valid for every theta, alpha, nu.
///
/// The tilted variable depends on T only through T's own probability
/// transform, so the integrand carries no trace of the baseline.
pub fn mom_expectation_quadrature(spec: &ModelSpec, nu: u32) -> Result<f64> {
    if nu == 0 {
        return Err(Error::InvalidParam {
            name: "nu",
            value: 0.0,
            constraint: "must be >= 1",
        });
    }
    let f = &spec.family;
    let (theta, alpha) = (f.theta, f.alpha);
    let abar = f.alpha_bar();
    let integrand = |p: f64| {
        let y = (1.0 - p).powf(1.0 / theta);
        (alpha / (alpha + abar * y)).powi(nu as i32)
    };
    integrate_unit(&integrand, QUAD_TOL)
        .map_err(|e| relabel_divergent(e, "tilt expectation quadrature"))
}

/// Moment-matching fit summary.
#[derive(Debug, Clone)]
pub struct MomEstimate {
    pub spec: ModelSpec,
    /// Euclidean norm of the matching residual vector at the estimate.
    pub residual: f64,
    pub iterations: usize,
}

/// Per-observation baseline log tails, fixed across the whole optimization
/// because the mask only frees family parameters.
fn tail_parts(data: &Dataset, baseline: &BaselineModel) -> Vec<(f64, f64)> {
    data.values
        .iter()
        .map(|&t| {
            let bp = baseline.parts(t);
            (bp.ln_big_g, bp.ln_sfb)
        })
        .collect()
}

fn check_nu_set(nu_set: &[u32]) -> Result<()> {
    if nu_set.is_empty() {
        return Err(Error::InvalidParam {
            name: "nu_set",
            value: 0.0,
            constraint: "must be non-empty",
        });
    }
    for &nu in nu_set {
        if nu == 0 {
            return Err(Error::InvalidParam {
                name: "nu",
                value: 0.0,
                constraint: "must be >= 1",
            });
        }
    }
    Ok(())
}

fn residual_norm_at(parts: &[(f64, f64)], spec: &ModelSpec, nu_set: &[u32]) -> Result<f64> {
    let f = &spec.family;
    let (theta, abar) = (f.theta, f.alpha_bar());
    let mut ssr = 0.0;
    for &nu in nu_set {
        // Both sides of the matching equation collapse to 1 at alpha = 1
        // regardless of the data, so the raw residual has a spurious exact
        // root there. Dividing by (1 - alpha) removes it without moving any
        // other root; near the degenerate point the quotient is evaluated by
        // its limit, the derivative condition in alpha.
        let resid = if abar.abs() < 1e-6 {
            let mut avg_s = 0.0;
            for &(ln_big_g, ln_sfb) in parts {
                avg_s += (f.b * ln_one_minus_pow(f.a, ln_big_g, ln_sfb)).exp();
            }
            avg_s /= parts.len() as f64;
            nu as f64 * (theta / (theta + 1.0) - avg_s)
        } else {
            let expect = match mom_expectation(spec, nu) {
                Ok(v) => v,
                Err(Error::Branch { .. }) | Err(Error::Convergence { .. }) => {
                    mom_expectation_quadrature(spec, nu)?
                }
                Err(e) => return Err(e),
            };
            let mut avg = 0.0;
            for &(ln_big_g, ln_sfb) in parts {
                let s = (f.b * ln_one_minus_pow(f.a, ln_big_g, ln_sfb)).exp();
                avg += (1.0 - abar * s).powi(nu as i32);
            }
            avg /= parts.len() as f64;
            (avg - expect) / abar
        };
        ssr += resid * resid;
    }
    Ok(ssr.sqrt())
}

/// Euclidean norm of the moment-matching residual vector at `spec`: per nu,
/// the sample average of the tilted statistic minus its model expectation,
/// scaled by 1/(1 - alpha). The scaling removes the degenerate exact match
/// at alpha = 1, where the statistic is identically one on both sides.
pub fn mom_residual(data: &Dataset, spec: &ModelSpec, nu_set: &[u32]) -> Result<f64> {
    check_nu_set(nu_set)?;
    data.check_support(&spec.baseline)?;
    let parts = tail_parts(data, &spec.baseline);
    residual_norm_at(&parts, spec, nu_set)
}

/// Moment-matching estimation: minimize the squared residual norm over the
/// family parameters marked free in the (theta, alpha, a, b) mask, starting
/// from and keeping fixed slots at `init`'s values.
pub fn mom_estimate(
    data: &Dataset,
    init: &ModelSpec,
    free: [bool; 4],
    nu_set: &[u32],
) -> Result<MomEstimate> {
    check_nu_set(nu_set)?;
    let k = free.iter().filter(|&&fr| fr).count();
    if k == 0 {
        return Err(Error::InvalidParam {
            name: "free",
            value: 0.0,
            constraint: "at least one parameter must be free",
        });
    }
    if nu_set.len() < k {
        return Err(Error::InsufficientEquations {
            needed: k,
            got: nu_set.len(),
        });
    }
    if data.n() < k + 1 {
        return Err(Error::BadData {
            line: 0,
            what: "need more observations than free parameters",
        });
    }
    data.check_support(&init.baseline)?;
    let parts = tail_parts(data, &init.baseline);

    let full0 = [
        init.family.theta,
        init.family.alpha,
        init.family.a,
        init.family.b,
    ];
    let assemble = |x: &[f64]| -> [f64; 4] {
        let mut full = full0;
        let mut xi = x.iter();
        for (slot, fr) in full.iter_mut().zip(&free) {
            if *fr {
                *slot = xi.next().unwrap().exp();
            }
        }
        full
    };
    let x0: Vec<f64> = full0
        .iter()
        .zip(&free)
        .filter(|(_, &fr)| fr)
        .map(|(v, _)| v.ln())
        .collect();

    let objective = |x: &[f64]| -> f64 {
        let full = assemble(x);
        let fam = match FamilyParams::new(full[0], full[1], full[2], full[3]) {
            Ok(p) => p,
            Err(_) => return f64::INFINITY,
        };
        let trial = match ModelSpec::new(Variant::GmoKwG, fam, init.baseline.clone()) {
            Ok(s) => s,
            Err(_) => return f64::INFINITY,
        };
        match residual_norm_at(&parts, &trial, nu_set) {
            Ok(norm) => norm * norm,
            Err(_) => f64::INFINITY,
        }
    };
    let out = nelder_mead(objective, &x0, 0.35, 250 * (k + 2), 1e-14, 1e-10);
    if !out.converged || !out.fx.is_finite() {
        return Err(Error::Convergence {
            what: "moment-matching simplex",
            achieved: out.fx,
            required: 1e-14,
        });
    }

    let full = assemble(&out.x);
    let fam = FamilyParams::new(full[0], full[1], full[2], full[3])?;
    // Keep the caller's variant tag when the fitted point still satisfies its
    // fixed slots; otherwise the result is a full family member.
    let spec = ModelSpec::new(init.variant, fam, init.baseline.clone())
        .or_else(|_| ModelSpec::new(Variant::GmoKwG, fam, init.baseline.clone()))?;
    Ok(MomEstimate {
        spec,
        residual: out.fx.sqrt(),
        iterations: out.iterations,
    })
}

