//! Baseline distributions G(t) plugged into the family, all behind one
//! evaluation contract: cdf, pdf, log forms, quantile, support bounds, and
//! the log-density slope used by shape analysis.
//!
//! Parameter vectors are positional; constructors name them. The
//! exponentiated-Pareto and power scale parameters are called `scale` here
//! because their traditional symbol collides with the family tilt exponent.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::special::log1mexp;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Exponential,
    Lomax,
    Weibull,
    Frechet,
    Gompertz,
    ModifiedWeibull,
    ExponentiatedPareto,
    Power,
}

impl BaselineKind {
    pub fn n_params(self) -> usize {
        match self {
            BaselineKind::Exponential => 1,
            BaselineKind::Lomax
            | BaselineKind::Weibull
            | BaselineKind::Frechet
            | BaselineKind::Gompertz
            | BaselineKind::Power => 2,
            BaselineKind::ModifiedWeibull | BaselineKind::ExponentiatedPareto => 3,
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            BaselineKind::Exponential => &["lambda"],
            BaselineKind::Lomax => &["beta", "delta"],
            BaselineKind::Weibull => &["lambda", "beta"],
            BaselineKind::Frechet => &["lambda", "delta"],
            BaselineKind::Gompertz => &["beta", "lambda"],
            BaselineKind::ModifiedWeibull => &["sigma", "beta", "gamma"],
            BaselineKind::ExponentiatedPareto => &["scale", "k", "gamma"],
            BaselineKind::Power => &["k", "scale"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Exponential => "exponential",
            BaselineKind::Lomax => "lomax",
            BaselineKind::Weibull => "weibull",
            BaselineKind::Frechet => "frechet",
            BaselineKind::Gompertz => "gompertz",
            BaselineKind::ModifiedWeibull => "modified-weibull",
            BaselineKind::ExponentiatedPareto => "exponentiated-pareto",
            BaselineKind::Power => "power",
        }
    }
}

/// Log-pdf and both log tails of the baseline at one point; the family
/// evaluators consume these three numbers and nothing else. ln_big_g is
/// accurate in the lower tail, ln_sfb = ln(1-G) in the upper tail.
#[derive(Debug, Clone, Copy)]
pub struct BaselineParts {
    pub ln_g: f64,
    pub ln_big_g: f64,
    pub ln_sfb: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineModel {
    pub kind: BaselineKind,
    pub params: Vec<f64>,
}

impl BaselineModel {
    pub fn new(kind: BaselineKind, params: &[f64]) -> Result<Self> {
        let model = BaselineModel {
            kind,
            params: params.to_vec(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn exponential(lambda: f64) -> Result<Self> {
        Self::new(BaselineKind::Exponential, &[lambda])
    }

    pub fn lomax(beta: f64, delta: f64) -> Result<Self> {
        Self::new(BaselineKind::Lomax, &[beta, delta])
    }

    pub fn weibull(lambda: f64, beta: f64) -> Result<Self> {
        Self::new(BaselineKind::Weibull, &[lambda, beta])
    }

    pub fn frechet(lambda: f64, delta: f64) -> Result<Self> {
        Self::new(BaselineKind::Frechet, &[lambda, delta])
    }

    pub fn gompertz(beta: f64, lambda: f64) -> Result<Self> {
        Self::new(BaselineKind::Gompertz, &[beta, lambda])
    }

    pub fn modified_weibull(sigma: f64, beta: f64, gamma: f64) -> Result<Self> {
        Self::new(BaselineKind::ModifiedWeibull, &[sigma, beta, gamma])
    }

    pub fn exponentiated_pareto(scale: f64, k: f64, gamma: f64) -> Result<Self> {
        Self::new(BaselineKind::ExponentiatedPareto, &[scale, k, gamma])
    }

    pub fn power(k: f64, scale: f64) -> Result<Self> {
        Self::new(BaselineKind::Power, &[k, scale])
    }

    /// First violated constraint, or Ok. The modified Weibull allows one of
    /// sigma, beta to be zero but not both.
    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        let names = self.kind.param_names();
        if p.len() != self.kind.n_params() {
            return Err(Error::InvalidParam {
                name: "params",
                value: p.len() as f64,
                constraint: "wrong parameter count for baseline kind",
            });
        }
        for (value, name) in p.iter().zip(names) {
            if !value.is_finite() {
                return Err(Error::InvalidParam {
                    name,
                    value: *value,
                    constraint: "must be finite",
                });
            }
        }
        if self.kind == BaselineKind::ModifiedWeibull {
            let (sigma, beta, gamma) = (p[0], p[1], p[2]);
            if sigma < 0.0 {
                return Err(Error::InvalidParam {
                    name: "sigma",
                    value: sigma,
                    constraint: "must be >= 0",
                });
            }
            if beta < 0.0 {
                return Err(Error::InvalidParam {
                    name: "beta",
                    value: beta,
                    constraint: "must be >= 0",
                });
            }
            if sigma + beta <= 0.0 {
                return Err(Error::InvalidParam {
                    name: "sigma",
                    value: sigma,
                    constraint: "sigma + beta must be > 0",
                });
            }
            if gamma <= 0.0 {
                return Err(Error::InvalidParam {
                    name: "gamma",
                    value: gamma,
                    constraint: "must be > 0",
                });
            }
            return Ok(());
        }
        for (value, name) in p.iter().zip(names) {
            if *value <= 0.0 {
                return Err(Error::InvalidParam {
                    name,
                    value: *value,
                    constraint: "must be > 0",
                });
            }
        }
        Ok(())
    }

    /// Support interval (lower, upper); observations live strictly inside.
    pub fn support(&self) -> (f64, f64) {
        match self.kind {
            BaselineKind::ExponentiatedPareto => (self.params[0], f64::INFINITY),
            BaselineKind::Power => (0.0, 1.0 / self.params[1]),
            _ => (0.0, f64::INFINITY),
        }
    }

    pub fn in_support(&self, t: f64) -> bool {
        let (lo, hi) = self.support();
        t > lo && t < hi
    }

    /// ln G(t) at an interior point, computed without forming 1 − e^x
    /// naively (G near 0 keeps full precision this way).
    pub fn ln_cdf(&self, t: f64) -> f64 {
        let p = &self.params;
        match self.kind {
            BaselineKind::Exponential => log1mexp(-p[0] * t),
            BaselineKind::Lomax => log1mexp(-p[0] * (t / p[1]).ln_1p()),
            BaselineKind::Weibull => log1mexp(-p[0] * t.powf(p[1])),
            BaselineKind::Frechet => -(p[1] / t).powf(p[0]),
            BaselineKind::Gompertz => {
                let (beta, lambda) = (p[0], p[1]);
                log1mexp(-(beta / lambda) * (lambda * t).exp_m1())
            }
            BaselineKind::ModifiedWeibull => {
                let (sigma, beta, gamma) = (p[0], p[1], p[2]);
                log1mexp(-(sigma * t + beta * t.powf(gamma)))
            }
            BaselineKind::ExponentiatedPareto => {
                let (scale, k, gamma) = (p[0], p[1], p[2]);
                gamma * log1mexp(k * (scale / t).ln())
            }
            BaselineKind::Power => {
                let (k, scale) = (p[0], p[1]);
                // scale * (1/scale) can round a hair above 1; ln G stays <= 0
                (k * (scale * t).ln()).min(0.0)
            }
        }
    }

    /// ln(1 - G(t)), the complement of `ln_cdf`; exact deep into the upper
    /// tail where ln G itself underflows to -0.
    pub fn ln_sf(&self, t: f64) -> f64 {
        let p = &self.params;
        match self.kind {
            BaselineKind::Exponential => -p[0] * t,
            BaselineKind::Lomax => -p[0] * (t / p[1]).ln_1p(),
            BaselineKind::Weibull => -p[0] * t.powf(p[1]),
            BaselineKind::Frechet => log1mexp(-(p[1] / t).powf(p[0])),
            BaselineKind::Gompertz => -(p[0] / p[1]) * (p[1] * t).exp_m1(),
            BaselineKind::ModifiedWeibull => -(p[0] * t + p[1] * t.powf(p[2])),
            BaselineKind::ExponentiatedPareto => {
                let (scale, k, gamma) = (p[0], p[1], p[2]);
                log1mexp(gamma * (-(scale / t).powf(k)).ln_1p())
            }
            BaselineKind::Power => log1mexp((p[0] * (p[1] * t).ln()).min(0.0)),
        }
    }

    /// G(t), extended to 0 below and 1 above the support.
    pub fn cdf(&self, t: f64) -> f64 {
        let (lo, hi) = self.support();
        if t <= lo {
            return 0.0;
        }
        if t >= hi {
            return 1.0;
        }
        self.ln_cdf(t).exp()
    }

    /// ln g(t) at an interior point.
    pub fn ln_pdf(&self, t: f64) -> f64 {
        let p = &self.params;
        match self.kind {
            BaselineKind::Exponential => p[0].ln() - p[0] * t,
            BaselineKind::Lomax => {
                let (beta, delta) = (p[0], p[1]);
                beta.ln() - delta.ln() - (beta + 1.0) * (t / delta).ln_1p()
            }
            BaselineKind::Weibull => {
                let (lambda, beta) = (p[0], p[1]);
                // the power term is skipped when it is exactly 0·ln t, so the
                // t=0 boundary yields the limit instead of NaN
                let shape_term = if beta == 1.0 { 0.0 } else { (beta - 1.0) * t.ln() };
                lambda.ln() + beta.ln() + shape_term - lambda * t.powf(beta)
            }
            BaselineKind::Frechet => {
                let (lambda, delta) = (p[0], p[1]);
                if t == 0.0 {
                    return f64::NEG_INFINITY; // essential singularity wins
                }
                lambda.ln() + lambda * delta.ln() - (lambda + 1.0) * t.ln() - (delta / t).powf(lambda)
            }
            BaselineKind::Gompertz => {
                let (beta, lambda) = (p[0], p[1]);
                beta.ln() + lambda * t - (beta / lambda) * (lambda * t).exp_m1()
            }
            BaselineKind::ModifiedWeibull => {
                let (sigma, beta, gamma) = (p[0], p[1], p[2]);
                (sigma + beta * gamma * t.powf(gamma - 1.0)).ln() - (sigma * t + beta * t.powf(gamma))
            }
            BaselineKind::ExponentiatedPareto => {
                let (scale, k, gamma) = (p[0], p[1], p[2]);
                let tilt_term = if gamma == 1.0 {
                    0.0
                } else {
                    (gamma - 1.0) * log1mexp(k * (scale / t).ln())
                };
                gamma.ln() + k.ln() + k * scale.ln() - (k + 1.0) * t.ln() + tilt_term
            }
            BaselineKind::Power => {
                let (k, scale) = (p[0], p[1]);
                let shape_term = if k == 1.0 { 0.0 } else { (k - 1.0) * t.ln() };
                k.ln() + k * scale.ln() + shape_term
            }
        }
    }

    /// g(t), extended to 0 outside the support.
    pub fn pdf(&self, t: f64) -> f64 {
        if !self.in_support(t) {
            return 0.0;
        }
        self.ln_pdf(t).exp()
    }

    /// (g, G) at an interior point; errors outside the support.
    pub fn eval(&self, t: f64) -> Result<(f64, f64)> {
        if !self.in_support(t) {
            return Err(Error::OutOfSupport { t });
        }
        Ok((self.ln_pdf(t).exp(), self.ln_cdf(t).exp()))
    }

    /// All three log-space pieces at an interior point (caller checks support).
    pub fn parts(&self, t: f64) -> BaselineParts {
        BaselineParts {
            ln_g: self.ln_pdf(t),
            ln_big_g: self.ln_cdf(t),
            ln_sfb: self.ln_sf(t),
        }
    }

    /// G^{-1}(p) for p in [0, 1); closed form everywhere except the modified
    /// Weibull, which has no algebraic inverse and is bracketed numerically.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::InvalidProbability { p });
        }
        let (lo, _) = self.support();
        if p == 0.0 {
            return Ok(lo);
        }
        let pr = &self.params;
        let t = match self.kind {
            BaselineKind::Exponential => -(-p).ln_1p() / pr[0],
            BaselineKind::Lomax => pr[1] * ((-(-p).ln_1p() / pr[0]).exp_m1()),
            BaselineKind::Weibull => (-(-p).ln_1p() / pr[0]).powf(1.0 / pr[1]),
            BaselineKind::Frechet => pr[1] * (-p.ln()).powf(-1.0 / pr[0]),
            BaselineKind::Gompertz => {
                let (beta, lambda) = (pr[0], pr[1]);
                (-(lambda / beta) * (-p).ln_1p()).ln_1p() / lambda
            }
            BaselineKind::ModifiedWeibull => self.mw_solve(-(-p).ln_1p()),
            BaselineKind::ExponentiatedPareto => {
                let (scale, k, gamma) = (pr[0], pr[1], pr[2]);
                // 1 - p^{1/gamma} through expm1 keeps precision for p near 1.
                scale * (-(p.ln() / gamma).exp_m1()).powf(-1.0 / k)
            }
            BaselineKind::Power => p.powf(1.0 / pr[0]) / pr[1],
        };
        Ok(t)
    }

    /// Modified-Weibull inverse: t with sigma·t + beta·t^gamma = c, c >= 0.
    /// Bisection runs in log t so tiny and huge roots resolve equally well.
    fn mw_solve(&self, c: f64) -> f64 {
        if c == 0.0 {
            return 0.0;
        }
        if c == f64::INFINITY {
            return f64::INFINITY;
        }
        let (sigma, beta, gamma) = (self.params[0], self.params[1], self.params[2]);
        let h = |t: f64| sigma * t + beta * t.powf(gamma);
        let guess = if sigma > 0.0 && beta > 0.0 {
            (c / sigma).min((c / beta).powf(1.0 / gamma))
        } else if sigma > 0.0 {
            c / sigma
        } else {
            (c / beta).powf(1.0 / gamma)
        };
        let mut u_lo = guess.ln() - 1.0;
        let mut u_hi = guess.ln() + 1.0;
        while h(u_lo.exp()) > c {
            u_lo -= 4.0;
        }
        while h(u_hi.exp()) < c {
            u_hi += 4.0;
        }
        for _ in 0..120 {
            let mid = 0.5 * (u_lo + u_hi);
            if h(mid.exp()) < c {
                u_lo = mid;
            } else {
                u_hi = mid;
            }
        }
        (0.5 * (u_lo + u_hi)).exp()
    }

    /// t with 1 − G(t) = exp(ln_eps), stable arbitrarily deep into the upper
    /// tail (ln_eps far below the underflow threshold of eps itself).
    pub fn inverse_sf_ln(&self, ln_eps: f64) -> f64 {
        debug_assert!(ln_eps <= 0.0);
        let p = &self.params;
        let c = -ln_eps;
        match self.kind {
            BaselineKind::Exponential => c / p[0],
            BaselineKind::Lomax => p[1] * (c / p[0]).exp_m1(),
            BaselineKind::Weibull => (c / p[0]).powf(1.0 / p[1]),
            BaselineKind::Frechet => {
                let (lambda, delta) = (p[0], p[1]);
                let eps = ln_eps.exp();
                if eps > 1e-280 {
                    delta * (-(-eps).ln_1p()).powf(-1.0 / lambda)
                } else {
                    // -ln(1-eps) ~ eps, so ln u = ln_eps to relative O(eps)
                    delta * (-ln_eps / lambda).exp()
                }
            }
            BaselineKind::Gompertz => {
                let (beta, lambda) = (p[0], p[1]);
                (lambda * c / beta).ln_1p() / lambda
            }
            BaselineKind::ModifiedWeibull => self.mw_solve(c),
            BaselineKind::ExponentiatedPareto => {
                let (scale, k, gamma) = (p[0], p[1], p[2]);
                let eps = ln_eps.exp();
                let ln_u = if eps > 1e-280 {
                    (-((-eps).ln_1p() / gamma).exp_m1()).ln()
                } else {
                    // 1-(1-u)^gamma = eps gives u ~ eps/gamma in this range
                    ln_eps - gamma.ln()
                };
                scale * (-ln_u / k).exp()
            }
            BaselineKind::Power => {
                let (k, scale) = (p[0], p[1]);
                ((-ln_eps.exp()).ln_1p() / k).exp() / scale
            }
        }
    }

    /// d/dt ln g(t), analytic for every shipped baseline.
    pub fn dlog_pdf_dt(&self, t: f64) -> f64 {
        let p = &self.params;
        match self.kind {
            BaselineKind::Exponential => -p[0],
            BaselineKind::Lomax => -(p[0] + 1.0) / (p[1] + t),
            BaselineKind::Weibull => {
                let (lambda, beta) = (p[0], p[1]);
                (beta - 1.0) / t - lambda * beta * t.powf(beta - 1.0)
            }
            BaselineKind::Frechet => {
                let (lambda, delta) = (p[0], p[1]);
                -(lambda + 1.0) / t + lambda * delta.powf(lambda) * t.powf(-lambda - 1.0)
            }
            BaselineKind::Gompertz => {
                let (beta, lambda) = (p[0], p[1]);
                lambda - beta * (lambda * t).exp()
            }
            BaselineKind::ModifiedWeibull => {
                let (sigma, beta, gamma) = (p[0], p[1], p[2]);
                let e1 = sigma + beta * gamma * t.powf(gamma - 1.0);
                let e2 = beta * gamma * (gamma - 1.0) * t.powf(gamma - 2.0);
                e2 / e1 - e1
            }
            BaselineKind::ExponentiatedPareto => {
                let (scale, k, gamma) = (p[0], p[1], p[2]);
                let x = (scale / t).powf(k);
                -(k + 1.0) / t + (gamma - 1.0) * k * x / (t * (1.0 - x))
            }
            BaselineKind::Power => (p[0] - 1.0) / t,
        }
    }

    /// d²/dt² ln g(t); supplied where the shape cross-checks need it.
    pub fn d2log_pdf_dt2(&self, t: f64) -> Option<f64> {
        let p = &self.params;
        match self.kind {
            BaselineKind::Exponential => Some(0.0),
            BaselineKind::Weibull => {
                let (lambda, beta) = (p[0], p[1]);
                Some(-(beta - 1.0) / (t * t) - lambda * beta * (beta - 1.0) * t.powf(beta - 2.0))
            }
            _ => None,
        }
    }

    /// ∂G/∂param_j; analytic for the exponential and Weibull baselines, the
    /// two whose family score is fully closed-form.
    pub fn grad_cdf_params(&self, t: f64) -> Option<Vec<f64>> {
        let p = &self.params;
        match self.kind {
            BaselineKind::Exponential => Some(vec![t * (-p[0] * t).exp()]),
            BaselineKind::Weibull => {
                let (lambda, beta) = (p[0], p[1]);
                let tb = t.powf(beta);
                let e = (-lambda * tb).exp();
                Some(vec![tb * e, lambda * tb * t.ln() * e])
            }
            _ => None,
        }
    }

    /// ∂ ln g/∂param_j; availability matches `grad_cdf_params`.
    pub fn grad_ln_pdf_params(&self, t: f64) -> Option<Vec<f64>> {
        let p = &self.params;
        match self.kind {
            BaselineKind::Exponential => Some(vec![1.0 / p[0] - t]),
            BaselineKind::Weibull => {
                let (lambda, beta) = (p[0], p[1]);
                let tb = t.powf(beta);
                Some(vec![1.0 / lambda - tb, 1.0 / beta + t.ln() - lambda * tb * t.ln()])
            }
            _ => None,
        }
    }
}

/// The extended-Weibull construction G(t) = 1 − exp(−δ·E(t)) for a
/// caller-supplied nonnegative increasing E with derivative e.
///
/// The modified Weibull is one instance (E(t) = σt + βt^γ with δ = 1) and is
/// also shipped as a direct baseline; the two paths must agree.
pub struct GurvichHook<FE, Fe>
where
    FE: Fn(f64) -> f64,
    Fe: Fn(f64) -> f64,
{
    pub big_e: FE,
    pub small_e: Fe,
    pub delta: f64,
}

impl<FE, Fe> GurvichHook<FE, Fe>
where
    FE: Fn(f64) -> f64,
    Fe: Fn(f64) -> f64,
{
    pub fn new(big_e: FE, small_e: Fe, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::InvalidParam {
                name: "delta",
                value: delta,
                constraint: "must be > 0",
            });
        }
        Ok(GurvichHook {
            big_e,
            small_e,
            delta,
        })
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        -(-self.delta * (self.big_e)(t)).exp_m1()
    }

    pub fn ln_cdf(&self, t: f64) -> f64 {
        log1mexp(-self.delta * (self.big_e)(t))
    }

    pub fn pdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.delta * (self.small_e)(t) * (-self.delta * (self.big_e)(t)).exp()
    }

    pub fn ln_pdf(&self, t: f64) -> f64 {
        self.delta.ln() + (self.small_e)(t).ln() - self.delta * (self.big_e)(t)
    }

    /// Bisection inverse, with the upper bracket doubled until it covers p.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::InvalidProbability { p });
        }
        if p == 0.0 {
            return Ok(0.0);
        }
        let mut lo = 0.0;
        let mut hi = 1.0;
        while self.cdf(hi) <= p {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let diff = self.cdf(mid) - p;
            if diff.abs() < 1e-13 {
                return Ok(mid);
            }
            if diff < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Checks the hook's contract on a grid: E(0+) = 0, E nondecreasing,
    /// e >= 0.
    pub fn validate_on_grid(&self, ts: &[f64]) -> Result<()> {
        let near_zero = (self.big_e)(1e-12);
        if !(near_zero.abs() <= 1e-9) {
            return Err(Error::InvalidParam {
                name: "big_e",
                value: near_zero,
                constraint: "E must vanish at the lower support bound",
            });
        }
        let mut prev = 0.0;
        for &t in ts {
            let e_t = (self.big_e)(t);
            if e_t < prev {
                return Err(Error::InvalidParam {
                    name: "big_e",
                    value: e_t,
                    constraint: "E must be nondecreasing",
                });
            }
            prev = e_t;
            if (self.small_e)(t) < 0.0 {
                return Err(Error::InvalidParam {
                    name: "small_e",
                    value: (self.small_e)(t),
                    constraint: "e must be nonnegative",
                });
            }
        }
        Ok(())
    }
}
