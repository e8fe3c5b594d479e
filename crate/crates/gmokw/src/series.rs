//! Series expansions of the family density and survival.
//!
//! The closed-form pdf and sf re-expand as power series in the Kumaraswamy
//! survival S = (1-G^a)^b (alpha < 1) or the Kumaraswamy cdf F = 1-S
//! (alpha > 1), and as a negative-binomial mixture of Kumaraswamy densities
//! with inflated b-parameters. All of them evaluate through a different
//! arithmetic route than `family`'s evaluators, so they double as
//! cross-checks. Truncation is adaptive with a hard cap of [`MAX_TERMS`];
//! alpha = 1 collapses every expansion to its exact single term.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::family::{ln_one_minus_pow, ModelSpec};
use crate::special::{ln_binomial, ln_gamma, log1mexp};

/// Hard cap on adaptively truncated series.
pub const MAX_TERMS: usize = 500;

/// Which tilt regime a coefficient table belongs to. The two expansions are
/// in powers of (1 - alpha) and (1 - 1/alpha) respectively, so neither
/// covers alpha = 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    AlphaBelowOne,
    AlphaAboveOne,
}

/// Expansion coefficients at fixed (theta, alpha), truncated at `j_max`.
///
/// alpha < 1 populates `a_coef` (pdf in powers of S), `aprime` (sf; the
/// mixture weights are -A'_j), and the triangular `b_coef` (pdf in powers of
/// F, row j holding B_{j,0}..B_{j,j}); alpha > 1 populates `c_coef` (pdf in
/// powers of F) and `cprime` (sf in powers of F). The other regime's vectors
/// stay empty.
pub struct CoefficientTable {
    pub regime: Regime,
    pub j_max: usize,
    pub aprime: Vec<f64>,
    pub a_coef: Vec<f64>,
    pub b_coef: Vec<Vec<f64>>,
    pub c_coef: Vec<f64>,
    pub cprime: Vec<f64>,
}

/// One rank term of an order-statistic expansion: the density picks up the
/// sf power m = n + l - i with an alternating binomial weight.
pub struct OrderStatTerm {
    pub l: u32,
    pub m: u32,
    /// Rank multiplier n!/((i-1)!(n-i)!) times (-1)^l binom(i-1, l).
    pub weight: f64,
    /// alpha < 1: coefficients of S^(p + theta m); alpha > 1: the power-series
    /// coefficients d_{m,k} of F^k. A bare `[1.0]` when m = 0.
    pub sf_coef: Vec<f64>,
}

/// Per-rank expansion tables for the i-th order statistic of a sample of n.
pub struct OrderStatCoefficients {
    pub n: u32,
    pub i: u32,
    pub regime: Regime,
    pub terms: Vec<OrderStatTerm>,
}

fn check_tilt(theta: f64, alpha: f64) -> Result<()> {
    if !(theta > 0.0) {
        return Err(Error::InvalidParam {
            name: "theta",
            value: theta,
            constraint: "must be positive",
        });
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidParam {
            name: "alpha",
            value: alpha,
            constraint: "must be positive",
        });
    }
    if alpha == 1.0 {
        return Err(Error::Regime {
            what: "expansions are in powers of (1-alpha) or (1-1/alpha); alpha = 1 is the exact single-term case",
        });
    }
    Ok(())
}

/// Coefficients of the pdf/sf expansions at (theta, alpha), through order
/// `j_max`. Factorial ratios go through log-gamma so real theta is exact.
pub fn coeffs(theta: f64, alpha: f64, j_max: usize) -> Result<CoefficientTable> {
    check_tilt(theta, alpha)?;
    let mut table = CoefficientTable {
        regime: if alpha < 1.0 {
            Regime::AlphaBelowOne
        } else {
            Regime::AlphaAboveOne
        },
        j_max,
        aprime: Vec::new(),
        a_coef: Vec::new(),
        b_coef: Vec::new(),
        c_coef: Vec::new(),
        cprime: Vec::new(),
    };
    if alpha < 1.0 {
        let ln_abar = (1.0 - alpha).ln();
        let base = theta.ln() + theta * alpha.ln() - ln_gamma(theta + 1.0);
        for j in 0..=j_max {
            let jf = j as f64;
            let ln_aj = base + jf * ln_abar + ln_gamma(jf + theta + 1.0) - ln_gamma(jf + 1.0);
            let aj = ln_aj.exp();
            table.a_coef.push(aj);
            table.aprime.push(-aj / (jf + theta));
            let mut row = Vec::with_capacity(j + 1);
            for k in 0..=j {
                let sign = if (j - k) % 2 == 0 { 1.0 } else { -1.0 };
                row.push(sign * (ln_binomial(j as u64, k as u64) + ln_aj).exp());
            }
            table.b_coef.push(row);
        }
    } else {
        let ln_rho = (1.0 - 1.0 / alpha).ln();
        for j in 0..=j_max {
            let jf = j as f64;
            let shared = jf * ln_rho - ln_gamma(jf + 1.0);
            table
                .c_coef
                .push((shared + ln_gamma(jf + theta + 1.0) - ln_gamma(theta + 1.0) - alpha.ln()).exp());
            table
                .cprime
                .push((shared + ln_gamma(jf + theta) - ln_gamma(theta)).exp());
        }
    }
    Ok(table)
}

/// Kumaraswamy building blocks at one interior point.
struct KwPoint {
    /// ln(a g G^(a-1)): the density core without its b-slot.
    ln_core: f64,
    /// ln(1 - G^a)
    ln_omga: f64,
    /// ln S with S = (1 - G^a)^b
    ln_s: f64,
    /// F = 1 - S
    big_f: f64,
}

impl KwPoint {
    fn at(spec: &ModelSpec, t: f64) -> KwPoint {
        let bp = spec.baseline.parts(t);
        let f = &spec.family;
        let ln_omga = ln_one_minus_pow(f.a, bp.ln_big_g, bp.ln_sfb);
        let term_a = if f.a == 1.0 {
            0.0
        } else {
            (f.a - 1.0) * bp.ln_big_g
        };
        let ln_s = f.b * ln_omga;
        KwPoint {
            ln_core: f.a.ln() + bp.ln_g + term_a,
            ln_omga,
            ln_s,
            big_f: -ln_s.exp_m1(),
        }
    }

    /// Kumaraswamy-G density with the b-slot set to `beta`.
    fn kw_pdf(&self, beta: f64) -> f64 {
        let tail = if beta == 1.0 {
            0.0
        } else {
            (beta - 1.0) * self.ln_omga
        };
        beta * (self.ln_core + tail).exp()
    }
}

/// Adaptive summation: stop once a term is below tol relative to the partial
/// sum; error out at the term cap.
fn sum_adaptive(mut term: impl FnMut(usize) -> f64, tol: f64, what: &'static str) -> Result<f64> {
    let mut total = 0.0;
    let mut ratio = f64::INFINITY;
    for j in 0..MAX_TERMS {
        let tj = term(j);
        total += tj;
        ratio = tj.abs() / total.abs().max(f64::MIN_POSITIVE);
        if j >= 1 && tj.abs() <= tol * total.abs() {
            return Ok(total);
        }
    }
    Err(Error::Convergence {
        what,
        achieved: ratio,
        required: tol,
    })
}

/// sf^1 power series for alpha < 1, with the tilt set to theta_star:
/// sum_p w_p S^(p + theta_star), w_p the negative-binomial weights.
fn sf_sum_below(ln_s: f64, theta_star: f64, alpha: f64, tol: f64) -> Result<f64> {
    let abar = 1.0 - alpha;
    let mut w = alpha.powf(theta_star);
    sum_adaptive(
        |p| {
            let pf = p as f64;
            let term = w * ((pf + theta_star) * ln_s).exp();
            w *= abar * (theta_star + pf) / (pf + 1.0);
            term
        },
        tol,
        "sf expansion in powers of the Kumaraswamy survival",
    )
}

/// The sf-side power series in F for alpha > 1 (coefficients C'_j).
fn sf_sum_above(big_f: f64, theta: f64, alpha: f64, tol: f64) -> Result<f64> {
    let rho = 1.0 - 1.0 / alpha;
    let mut cp = 1.0;
    let mut f_pow = 1.0;
    sum_adaptive(
        |j| {
            let jf = j as f64;
            let term = cp * f_pow;
            cp *= rho * (jf + theta) / (jf + 1.0);
            f_pow *= big_f;
            term
        },
        tol,
        "sf expansion in powers of the Kumaraswamy cdf",
    )
}

/// The pdf-side series factor (everything except the leading Kumaraswamy
/// density), for either regime.
fn pdf_series_factor(kp: &KwPoint, theta: f64, alpha: f64, tol: f64) -> Result<f64> {
    if alpha < 1.0 {
        let abar = 1.0 - alpha;
        let mut aj = theta * alpha.powf(theta);
        sum_adaptive(
            |j| {
                let jf = j as f64;
                let term = aj * ((jf + theta - 1.0) * kp.ln_s).exp();
                aj *= abar * (jf + theta + 1.0) / (jf + 1.0);
                term
            },
            tol,
            "pdf expansion in powers of the Kumaraswamy survival",
        )
    } else {
        let rho = 1.0 - 1.0 / alpha;
        let mut cj = 1.0 / alpha;
        let mut f_pow = 1.0;
        sum_adaptive(
            |j| {
                let jf = j as f64;
                let term = cj * f_pow;
                cj *= rho * (jf + theta + 1.0) / (jf + 1.0);
                f_pow *= kp.big_f;
                term
            },
            tol,
            "pdf expansion in powers of the Kumaraswamy cdf",
        )
    }
}

/// Truncated-series pdf. Matches the closed form at interior points; the
/// open-support convention returns 0 at and beyond the endpoints.
pub fn series_pdf(spec: &ModelSpec, t: f64, tol: f64) -> Result<f64> {
    let (lo, hi) = spec.support();
    if !(t > lo && t < hi) {
        return Ok(0.0);
    }
    let f = &spec.family;
    let kp = KwPoint::at(spec, t);
    if f.alpha == 1.0 {
        return Ok(kp.kw_pdf(f.b * f.theta));
    }
    let sum = pdf_series_factor(&kp, f.theta, f.alpha, tol)?;
    if f.alpha < 1.0 {
        Ok(kp.kw_pdf(f.b) * sum)
    } else {
        Ok(kp.kw_pdf(f.b * f.theta) * sum)
    }
}

/// Truncated-series sf, with the same open-support convention (1 below the
/// support, 0 above it).
pub fn series_sf(spec: &ModelSpec, t: f64, tol: f64) -> Result<f64> {
    let (lo, hi) = spec.support();
    if t <= lo {
        return Ok(1.0);
    }
    if t >= hi {
        return Ok(0.0);
    }
    let f = &spec.family;
    let kp = KwPoint::at(spec, t);
    if f.alpha == 1.0 {
        return Ok((f.theta * kp.ln_s).exp());
    }
    if f.alpha < 1.0 {
        sf_sum_below(kp.ln_s, f.theta, f.alpha, tol)
    } else {
        Ok((f.theta * kp.ln_s).exp() * sf_sum_above(kp.big_f, f.theta, f.alpha, tol)?)
    }
}

/// Negative-binomial mixture of Kumaraswamy-G(a, b(j+theta)) densities.
/// The weights -A'_j sum to one, so this is a proper mixture; it only exists
/// for alpha <= 1 (at 1 it is the single exact term).
pub fn mixture_pdf(spec: &ModelSpec, t: f64, tol: f64) -> Result<f64> {
    let f = &spec.family;
    if f.alpha > 1.0 {
        return Err(Error::Regime {
            what: "the mixture weights are a negative-binomial pmf in (1-alpha); alpha must be <= 1",
        });
    }
    let (lo, hi) = spec.support();
    if !(t > lo && t < hi) {
        return Ok(0.0);
    }
    let kp = KwPoint::at(spec, t);
    if f.alpha == 1.0 {
        return Ok(kp.kw_pdf(f.b * f.theta));
    }
    let theta = f.theta;
    let abar = 1.0 - f.alpha;
    let mut w = f.alpha.powf(theta);
    sum_adaptive(
        |j| {
            let jf = j as f64;
            let term = w * kp.kw_pdf(f.b * (jf + theta));
            w *= abar * (jf + theta) / (jf + 1.0);
            term
        },
        tol,
        "Kumaraswamy mixture density",
    )
}

/// Coefficients of [sum_k cprime[k] x^k]^m through degree `k_max`, by the
/// standard recursion d_{m,k} = (k c_0)^-1 sum_h [h(m+1) - k] c_h d_{m,k-h}
/// with d_{m,0} = c_0^m. Input coefficients beyond the slice are taken as 0.
pub fn power_series_power(cprime: &[f64], m: u32, k_max: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::InvalidParam {
            name: "m",
            value: 0.0,
            constraint: "power must be at least 1",
        });
    }
    let c0 = match cprime.first() {
        Some(&c0) if c0 != 0.0 => c0,
        _ => {
            return Err(Error::InvalidParam {
                name: "cprime[0]",
                value: cprime.first().copied().unwrap_or(f64::NAN),
                constraint: "constant term must be nonzero",
            })
        }
    };
    let mut d = vec![0.0; k_max + 1];
    d[0] = c0.powi(m as i32);
    for k in 1..=k_max {
        let mut acc = 0.0;
        for h in 1..=k.min(cprime.len() - 1) {
            acc += (h as f64 * (m as f64 + 1.0) - k as f64) * cprime[h] * d[k - h];
        }
        d[k] = acc / (k as f64 * c0);
    }
    Ok(d)
}

fn check_rank(n: u32, i: u32) -> Result<()> {
    if n == 0 || i == 0 || i > n {
        return Err(Error::Rank {
            i: i as usize,
            n: n as usize,
        });
    }
    Ok(())
}

/// Density of the i-th order statistic in a sample of n, from the closed
/// forms: n!/((i-1)!(n-i)!) f cdf^(i-1) sf^(n-i), assembled in log space.
pub fn order_stat_pdf_direct(spec: &ModelSpec, n: u32, i: u32, t: f64) -> Result<f64> {
    check_rank(n, i)?;
    let ln_f = spec.ln_pdf(t);
    if ln_f == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let ln_mult = ln_gamma(n as f64 + 1.0) - ln_gamma(i as f64) - ln_gamma((n - i) as f64 + 1.0);
    let ln_sf = spec.ln_sf(t);
    let term_cdf = if i == 1 {
        0.0
    } else {
        (i - 1) as f64 * log1mexp(ln_sf)
    };
    let term_sf = if i == n { 0.0 } else { (n - i) as f64 * ln_sf };
    Ok((ln_mult + ln_f + term_cdf + term_sf).exp())
}

/// C'_0..C'_k_max by their ratio recurrence.
fn cprime_vec(theta: f64, alpha: f64, k_max: usize) -> Vec<f64> {
    let rho = 1.0 - 1.0 / alpha;
    let mut v = Vec::with_capacity(k_max + 1);
    let mut cp = 1.0;
    for k in 0..=k_max {
        v.push(cp);
        cp *= rho * (k as f64 + theta) / (k as f64 + 1.0);
    }
    v
}

/// Order-statistic density through the expansions, keeping the rank sum over
/// l explicit: each l contributes the pdf series times the series for
/// sf^(n+l-i), the latter re-tilted (alpha < 1) or raised through the
/// power-series recursion (alpha > 1).
pub fn order_stat_pdf_series(spec: &ModelSpec, n: u32, i: u32, t: f64, tol: f64) -> Result<f64> {
    check_rank(n, i)?;
    let f = &spec.family;
    if f.alpha == 1.0 {
        return Err(Error::Regime {
            what: "order-statistic expansions need alpha != 1; the alpha = 1 density is already exact",
        });
    }
    let (lo, hi) = spec.support();
    if !(t > lo && t < hi) {
        return Ok(0.0);
    }
    let kp = KwPoint::at(spec, t);
    let theta = f.theta;
    let rank_mult =
        (ln_gamma(n as f64 + 1.0) - ln_gamma(i as f64) - ln_gamma((n - i) as f64 + 1.0)).exp();
    let pdf_factor = pdf_series_factor(&kp, theta, f.alpha, tol)?
        * if f.alpha < 1.0 {
            kp.kw_pdf(f.b)
        } else {
            kp.kw_pdf(f.b * theta)
        };

    let cprime = if f.alpha > 1.0 {
        cprime_vec(theta, f.alpha, MAX_TERMS)
    } else {
        Vec::new()
    };
    // Rank sum and the magnitude of its largest contribution.
    let eval = |inner_tol: f64| -> Result<(f64, f64)> {
        let mut lsum = 0.0;
        let mut peak = 0.0_f64;
        let mut binom_il = 1.0;
        for l in 0..i {
            let m = n + l - i;
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            let sf_pow = if m == 0 {
                1.0
            } else if f.alpha < 1.0 {
                sf_sum_below(kp.ln_s, theta * m as f64, f.alpha, inner_tol)?
            } else {
                let d = power_series_power(&cprime, m, MAX_TERMS)?;
                let mut f_pow = 1.0;
                let series = sum_adaptive(
                    |k| {
                        let term = d[k] * f_pow;
                        f_pow *= kp.big_f;
                        term
                    },
                    inner_tol,
                    "raised sf expansion in powers of the Kumaraswamy cdf",
                )?;
                (theta * m as f64 * kp.ln_s).exp() * series
            };
            let contrib = sign * binom_il * sf_pow;
            peak = peak.max(contrib.abs());
            lsum += contrib;
            binom_il = binom_il * (i - 1 - l) as f64 / (l + 1) as f64;
        }
        Ok((lsum, peak))
    };
    // The alternating rank sum collapses to cdf^(i-1) sf^(n-i), so at high
    // ranks it cancels heavily; when it does, tighten the factor tolerances
    // by the measured cancellation ratio and evaluate again.
    let (mut lsum, peak) = eval(tol)?;
    if lsum.abs() < 1e-3 * peak {
        let kappa = (peak / lsum.abs().max(peak * 1e-15)).min(1e15);
        lsum = eval((tol / kappa).max(1e-16))?.0;
    }
    Ok(rank_mult * pdf_factor * lsum)
}

/// Per-rank expansion tables for the i-th order statistic: one term per l
/// with its alternating weight and the coefficients of its sf power.
pub fn order_stat_coeffs(
    theta: f64,
    alpha: f64,
    n: u32,
    i: u32,
    k_max: usize,
) -> Result<OrderStatCoefficients> {
    check_tilt(theta, alpha)?;
    check_rank(n, i)?;
    let rank_mult =
        (ln_gamma(n as f64 + 1.0) - ln_gamma(i as f64) - ln_gamma((n - i) as f64 + 1.0)).exp();
    let mut terms = Vec::with_capacity(i as usize);
    let mut binom_il = 1.0;
    for l in 0..i {
        let m = n + l - i;
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        let sf_coef = if m == 0 {
            vec![1.0]
        } else if alpha < 1.0 {
            let theta_star = theta * m as f64;
            let abar = 1.0 - alpha;
            let mut w = alpha.powf(theta_star);
            let mut v = Vec::with_capacity(k_max + 1);
            for p in 0..=k_max {
                v.push(w);
                w *= abar * (theta_star + p as f64) / (p as f64 + 1.0);
            }
            v
        } else {
            power_series_power(&cprime_vec(theta, alpha, k_max), m, k_max)?
        };
        terms.push(OrderStatTerm {
            l,
            m,
            weight: rank_mult * binom_il * sign,
            sf_coef,
        });
        binom_il = binom_il * (i - 1 - l) as f64 / (l + 1) as f64;
    }
    Ok(OrderStatCoefficients {
        n,
        i,
        regime: if alpha < 1.0 {
            Regime::AlphaBelowOne
        } else {
            Regime::AlphaAboveOne
        },
        terms,
    })
}
