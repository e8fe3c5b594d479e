//! The four-parameter family around a baseline G: Kumaraswamy exponents
//! (a, b) build F_Kw = 1 - (1 - G^a)^b, then the Marshall-Olkin tilt alpha
//! and outer exponent theta act on the Kumaraswamy survival S = (1 - G^a)^b
//! through sf = [alpha S / (1 - (1-alpha) S)]^theta.
//!
//! Everything is evaluated once in log space and exponentiated at the end;
//! the denominator D = 1 - (1-alpha) S is computed as
//! alpha + (1-alpha)(1 - S), which stays inside [min(alpha,1), max(alpha,1)]
//! for every parameter value and never cancels.

use alloc::vec::Vec;

use num_traits::Float;

use crate::baseline::BaselineModel;
use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::special::log1mexp;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyParams {
    pub theta: f64,
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
}

impl FamilyParams {
    pub fn new(theta: f64, alpha: f64, a: f64, b: f64) -> Result<Self> {
        let fp = FamilyParams { theta, alpha, a, b };
        fp.validate()?;
        Ok(fp)
    }

    pub fn unit() -> Self {
        FamilyParams {
            theta: 1.0,
            alpha: 1.0,
            a: 1.0,
            b: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (value, name) in [
            (self.theta, "theta"),
            (self.alpha, "alpha"),
            (self.a, "a"),
            (self.b, "b"),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParam {
                    name,
                    value,
                    constraint: "must be finite and > 0",
                });
            }
        }
        Ok(())
    }

    /// 1 - alpha, recomputed on demand so it can never drift out of sync.
    pub fn alpha_bar(&self) -> f64 {
        1.0 - self.alpha
    }
}

/// Nesting ladder of the family. Fixed slots of a variant hold literal 1.0
/// in its `FamilyParams`; no tolerance snapping anywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    GmoKwG,
    MoKwG,
    KwG,
    Gmo,
    Mo,
    Baseline,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::GmoKwG => "gmokw",
            Variant::MoKwG => "mokw",
            Variant::KwG => "kw",
            Variant::Gmo => "gmo",
            Variant::Mo => "mo",
            Variant::Baseline => "baseline",
        }
    }

    /// Family parameters this variant actually estimates, in fit order.
    pub fn free_family_params(self) -> &'static [&'static str] {
        match self {
            Variant::GmoKwG => &["theta", "alpha", "a", "b"],
            Variant::MoKwG => &["alpha", "a", "b"],
            Variant::KwG => &["a", "b"],
            Variant::Gmo => &["theta", "alpha"],
            Variant::Mo => &["alpha"],
            Variant::Baseline => &[],
        }
    }

    /// Assemble full family parameters from the variant's free slots.
    pub fn family_from_free(self, free: &[f64]) -> Result<FamilyParams> {
        let names = self.free_family_params();
        if free.len() != names.len() {
            return Err(Error::InvalidParam {
                name: "free",
                value: free.len() as f64,
                constraint: "wrong free-parameter count for variant",
            });
        }
        let mut fp = FamilyParams::unit();
        for (value, name) in free.iter().zip(names) {
            match *name {
                "theta" => fp.theta = *value,
                "alpha" => fp.alpha = *value,
                "a" => fp.a = *value,
                _ => fp.b = *value,
            }
        }
        fp.validate()?;
        Ok(fp)
    }

    /// Extract the free slots back out of full family parameters.
    pub fn free_values(self, fp: &FamilyParams) -> Vec<f64> {
        self.free_family_params()
            .iter()
            .map(|name| match *name {
                "theta" => fp.theta,
                "alpha" => fp.alpha,
                "a" => fp.a,
                _ => fp.b,
            })
            .collect()
    }

    /// Exact-equality check that the variant's fixed slots hold 1.
    pub fn check(self, fp: &FamilyParams) -> Result<()> {
        let fixed: &[(&'static str, f64)] = match self {
            Variant::GmoKwG => &[],
            Variant::MoKwG => &[("theta", 1.0)],
            Variant::KwG => &[("theta", 1.0), ("alpha", 1.0)],
            Variant::Gmo => &[("a", 1.0), ("b", 1.0)],
            Variant::Mo => &[("theta", 1.0), ("a", 1.0), ("b", 1.0)],
            Variant::Baseline => &[
                ("theta", 1.0),
                ("alpha", 1.0),
                ("a", 1.0),
                ("b", 1.0),
            ],
        };
        for (name, want) in fixed {
            let got = match *name {
                "theta" => fp.theta,
                "alpha" => fp.alpha,
                "a" => fp.a,
                _ => fp.b,
            };
            if got != *want {
                return Err(Error::InvalidParam {
                    name,
                    value: got,
                    constraint: "variant-fixed parameter must equal 1 exactly",
                });
            }
        }
        Ok(())
    }
}

/// A fully specified model: which rung of the nesting ladder, its family
/// parameters, and the baseline underneath.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub variant: Variant,
    pub family: FamilyParams,
    pub baseline: BaselineModel,
}

/// ln(1 - G^a) from the two baseline log tails.
///
/// Deep in the upper tail ln G underflows to -0; switch to the expansion
/// 1 - G^a = a(1-G)(1 + O(1-G)) fed by the baseline's exact log-survival.
/// At the switch point the dropped term is below 1e-200.
pub(crate) fn ln_one_minus_pow(a: f64, ln_big_g: f64, ln_sfb: f64) -> f64 {
    let a_ln_g = a * ln_big_g;
    if a_ln_g > -1e-200 {
        a.ln() + ln_sfb
    } else {
        log1mexp(a_ln_g)
    }
}

/// Log-space pieces shared by all the evaluators at one interior point.
struct Pieces {
    ln_g: f64,
    ln_big_g: f64,
    /// ln(1 - G^a)
    ln_omga: f64,
    /// ln S with S = (1 - G^a)^b
    ln_s: f64,
    ln_d: f64,
}

/// Deterministic batch of inversion draws; identical (spec, seed, n)
/// reproduce it bit for bit.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub seed: u64,
    pub spec: ModelSpec,
}

impl ModelSpec {
    pub fn new(variant: Variant, family: FamilyParams, baseline: BaselineModel) -> Result<Self> {
        family.validate()?;
        baseline.validate()?;
        variant.check(&family)?;
        Ok(ModelSpec {
            variant,
            family,
            baseline,
        })
    }

    pub fn gmokw(theta: f64, alpha: f64, a: f64, b: f64, baseline: BaselineModel) -> Result<Self> {
        Self::new(Variant::GmoKwG, FamilyParams::new(theta, alpha, a, b)?, baseline)
    }

    pub fn mokw(alpha: f64, a: f64, b: f64, baseline: BaselineModel) -> Result<Self> {
        Self::new(Variant::MoKwG, FamilyParams::new(1.0, alpha, a, b)?, baseline)
    }

    pub fn kw(a: f64, b: f64, baseline: BaselineModel) -> Result<Self> {
        Self::new(Variant::KwG, FamilyParams::new(1.0, 1.0, a, b)?, baseline)
    }

    pub fn gmo(theta: f64, alpha: f64, baseline: BaselineModel) -> Result<Self> {
        Self::new(Variant::Gmo, FamilyParams::new(theta, alpha, 1.0, 1.0)?, baseline)
    }

    pub fn mo(alpha: f64, baseline: BaselineModel) -> Result<Self> {
        Self::new(Variant::Mo, FamilyParams::new(1.0, alpha, 1.0, 1.0)?, baseline)
    }

    pub fn bare(baseline: BaselineModel) -> Result<Self> {
        Self::new(Variant::Baseline, FamilyParams::unit(), baseline)
    }

    pub fn support(&self) -> (f64, f64) {
        self.baseline.support()
    }

    fn pieces(&self, t: f64) -> Pieces {
        let bp = self.baseline.parts(t);
        let f = &self.family;
        let ln_omga = ln_one_minus_pow(f.a, bp.ln_big_g, bp.ln_sfb);
        let ln_s = f.b * ln_omga;
        let one_minus_s = -ln_s.exp_m1();
        let d = f.alpha + f.alpha_bar() * one_minus_s;
        Pieces {
            ln_g: bp.ln_g,
            ln_big_g: bp.ln_big_g,
            ln_omga,
            ln_s,
            ln_d: d.ln(),
        }
    }

    /// ln f(t); -inf outside the support. Boundary points evaluate to the
    /// limit, which may itself be -inf, finite, or +inf (integrable spike).
    pub fn ln_pdf(&self, t: f64) -> f64 {
        let (lo, hi) = self.support();
        if !(t >= lo && t <= hi) {
            return f64::NEG_INFINITY;
        }
        let v = self.ln_pdf_inner(t);
        if v.is_nan() {
            // inf - inf between the baseline log-density and the cdf power.
            // Power-law tails produce it only at an exact endpoint: one ulp
            // inside resolves the one-sided limit.
            let inside = if t == lo { t.next_up() } else { t.next_down() };
            let v2 = self.ln_pdf_inner(inside);
            if !v2.is_nan() {
                return v2;
            }
            // Still indeterminate: ln g and ln G diverge together, which only
            // an essentially-flat baseline tail does (ln g / ln G -> 1 there),
            // so the combined exponent behaves like a * ln g -> -inf.
            return f64::NEG_INFINITY;
        }
        v
    }

    fn ln_pdf_inner(&self, t: f64) -> f64 {
        let p = self.pieces(t);
        let f = &self.family;
        // 0 * (-inf) guards: drop exactly-zero exponents before multiplying
        let term_a = if f.a == 1.0 { 0.0 } else { (f.a - 1.0) * p.ln_big_g };
        let bt = f.b * f.theta;
        let term_b = if bt == 1.0 { 0.0 } else { (bt - 1.0) * p.ln_omga };
        f.theta.ln() + f.theta * f.alpha.ln() + f.a.ln() + f.b.ln() + p.ln_g + term_a + term_b
            - (f.theta + 1.0) * p.ln_d
    }

    pub fn pdf(&self, t: f64) -> f64 {
        self.ln_pdf(t).exp()
    }

    /// ln sf(t); 0 below the support, -inf above it.
    pub fn ln_sf(&self, t: f64) -> f64 {
        let (lo, hi) = self.support();
        if t <= lo {
            return 0.0;
        }
        if t >= hi {
            return f64::NEG_INFINITY;
        }
        let p = self.pieces(t);
        let f = &self.family;
        f.theta * (f.alpha.ln() + p.ln_s - p.ln_d)
    }

    pub fn sf(&self, t: f64) -> f64 {
        self.ln_sf(t).exp()
    }

    pub fn cdf(&self, t: f64) -> f64 {
        -self.ln_sf(t).exp_m1()
    }

    /// Hazard rate from the simplified closed form
    /// theta a b g G^{a-1} (1 - G^a)^{-1} / D, not the pdf/sf quotient.
    pub fn hrf(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        if !(t > lo && t < hi) {
            return Err(Error::OutOfSupport { t });
        }
        let p = self.pieces(t);
        if p.ln_omga == f64::NEG_INFINITY {
            return Err(Error::DomainPoint {
                what: "hazard rate where survival vanishes",
                t,
            });
        }
        let f = &self.family;
        let term_a = if f.a == 1.0 { 0.0 } else { (f.a - 1.0) * p.ln_big_g };
        let ln_h = f.theta.ln() + f.a.ln() + f.b.ln() + p.ln_g + term_a - p.ln_omga - p.ln_d;
        if ln_h.is_nan() {
            // Deep-tail inf - inf; the unreduced ratio settles it.
            return Ok((self.ln_pdf(t) - self.ln_sf(t)).exp());
        }
        Ok(ln_h.exp())
    }

    /// Reversed hazard pdf/cdf, evaluated as exp(ln pdf - ln cdf).
    pub fn rhrf(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        if !(t > lo && t < hi) {
            return Err(Error::OutOfSupport { t });
        }
        let cdf = self.cdf(t);
        if cdf <= 0.0 {
            return Err(Error::DomainPoint {
                what: "reversed hazard where cdf vanishes",
                t,
            });
        }
        Ok((self.ln_pdf(t) - cdf.ln()).exp())
    }

    /// Cumulative hazard -ln sf(t).
    pub fn chrf(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        if !(t > lo && t < hi) {
            return Err(Error::OutOfSupport { t });
        }
        Ok(-self.ln_sf(t))
    }

    /// Closed-form quantile: invert theta, the Marshall-Olkin tilt, then the
    /// two Kumaraswamy exponents, and hand the remainder to the baseline.
    /// The whole chain stays in log space; near p=1 the baseline is entered
    /// through its upper-tail inverse so nothing saturates.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::InvalidProbability { p });
        }
        if p == 0.0 {
            return Ok(self.support().0);
        }
        self.quantile_from_sf_ln((-p).ln_1p())
    }

    /// Quantile entered from the upper tail: the t whose log survival is
    /// `ln_sf`. Matches quantile(1 - exp(ln_sf)) but stays exact arbitrarily
    /// deep in the tail, where that probability would round to one.
    pub fn quantile_from_sf_ln(&self, ln_sf: f64) -> Result<f64> {
        if !(ln_sf <= 0.0) {
            return Err(Error::InvalidProbability { p: ln_sf.exp() });
        }
        if ln_sf == 0.0 {
            return Ok(self.support().0);
        }
        let f = &self.family;
        let ln_w = ln_sf / f.theta; // w = sf^{1/theta}
        let one_minus_w = -ln_w.exp_m1();
        // alpha + (1-alpha) w  written as  1 - (1-alpha)(1-w)
        let ln_denom = (-f.alpha_bar() * one_minus_w).ln_1p();
        let ln_y = (ln_w - ln_denom) / f.b; // y^b = w / (alpha + (1-alpha) w)
        // x = (1-y)^{1/a} is the baseline cdf value to invert
        if ln_y <= -36.0 {
            // y below 2^-52: 1 - x = y/a to full precision
            return Ok(self.baseline.inverse_sf_ln(ln_y - f.a.ln()));
        }
        let ln_x = log1mexp(ln_y) / f.a;
        if ln_x < -core::f64::consts::LN_2 {
            self.baseline.quantile(ln_x.exp())
        } else {
            Ok(self.baseline.inverse_sf_ln(log1mexp(ln_x)))
        }
    }

    /// n inversion draws from the stream keyed by (seed, 0).
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleBatch> {
        if n == 0 {
            return Err(Error::InvalidParam {
                name: "n",
                value: 0.0,
                constraint: "must be >= 1",
            });
        }
        let mut rng = StreamRng::new(seed, 0);
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            values.push(self.quantile(rng.next_open01())?);
        }
        Ok(SampleBatch {
            values,
            seed,
            spec: self.clone(),
        })
    }

    /// Relabel with the most specific variant whose fixed slots are exactly 1.
    pub fn reduce(&self) -> ModelSpec {
        let f = &self.family;
        let unit = |v: f64| v == 1.0;
        let variant = if unit(f.theta) && unit(f.alpha) && unit(f.a) && unit(f.b) {
            Variant::Baseline
        } else if unit(f.theta) && unit(f.a) && unit(f.b) {
            Variant::Mo
        } else if unit(f.a) && unit(f.b) {
            Variant::Gmo
        } else if unit(f.theta) && unit(f.alpha) {
            Variant::KwG
        } else if unit(f.theta) {
            Variant::MoKwG
        } else {
            Variant::GmoKwG
        };
        ModelSpec {
            variant,
            family: *f,
            baseline: self.baseline.clone(),
        }
    }
}

/// Draws from the family's latent construction instead of by inversion:
/// theta_int independent blocks, each a geometric-size batch of Kumaraswamy-G
/// variates reduced by min (alpha <= 1, geometric parameter alpha) or max
/// (alpha > 1, geometric parameter 1/alpha); the final draw is the min over
/// blocks. Converges to the same distribution the evaluators describe.
pub fn simulate_genesis(
    theta_int: u32,
    alpha: f64,
    a: f64,
    b: f64,
    baseline: &BaselineModel,
    n: usize,
    seed: u64,
) -> Result<SampleBatch> {
    if theta_int == 0 {
        return Err(Error::InvalidParam {
            name: "theta_int",
            value: 0.0,
            constraint: "must be a positive integer",
        });
    }
    let spec = ModelSpec::gmokw(theta_int as f64, alpha, a, b, baseline.clone())?;
    let min_branch = alpha <= 1.0;
    let p_geom = if min_branch { alpha } else { 1.0 / alpha };
    let mut rng = StreamRng::new(seed, 0);
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let mut outer = f64::INFINITY;
        for _ in 0..theta_int {
            let n_i = rng.geometric(p_geom);
            let mut inner = if min_branch {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            };
            for _ in 0..n_i {
                let u = rng.next_open01();
                // Kumaraswamy-G inversion: G^{-1}((1 - (1-u)^{1/b})^{1/a})
                let x = (log1mexp((-u).ln_1p() / b) / a).exp();
                let t = baseline.quantile(x)?;
                inner = if min_branch { inner.min(t) } else { inner.max(t) };
            }
            outer = outer.min(inner);
        }
        values.push(outer);
    }
    Ok(SampleBatch { values, seed, spec })
}
