//! Shape analysis: log-derivatives of density and hazard, critical-point
//! location and classification, endpoint asymptotics, and grid verification
//! of the alpha ordering chain.

use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::family::{ln_one_minus_pow, ModelSpec};

/// Classification of a critical point by the sign of the second
/// log-derivative there.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Maximum,
    Minimum,
    Inflexion,
}

/// A root of the density or hazard log-derivative. `discriminant` holds the
/// second log-derivative at the root; negative means maximum, positive
/// minimum, magnitude at most [`INFLEXION_TOL`] an inflexion.
#[derive(Debug, Clone, Copy)]
pub struct CriticalPoint {
    pub location: f64,
    pub kind: ExtremumKind,
    pub discriminant: f64,
}

/// Which curve a shape query inspects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeCurve {
    Density,
    Hazard,
}

/// Discriminants within this magnitude classify as inflexion points.
pub const INFLEXION_TOL: f64 = 1e-8;

/// The four building blocks shared by both log-derivative expressions:
/// g'/g, (a-1) g/G, a g G^{a-1}/(1-G^a), and the tilt correction
/// abar a b g G^{a-1} (1-G^a)^{b-1} / (1 - abar (1-G^a)^b).
fn log_deriv_pieces(spec: &ModelSpec, t: f64) -> Result<[f64; 4]> {
    let (lo, hi) = spec.support();
    if !(t > lo && t < hi) {
        return Err(Error::DomainPoint {
            what: "log-derivative",
            t,
        });
    }
    let f = &spec.family;
    let parts = spec.baseline.parts(t);
    let ln_omga = ln_one_minus_pow(f.a, parts.ln_big_g, parts.ln_sfb);
    let ln_d = (-f.alpha_bar() * (f.b * ln_omga).exp()).ln_1p();
    let t1 = spec.baseline.dlog_pdf_dt(t);
    let t2 = (f.a - 1.0) * (parts.ln_g - parts.ln_big_g).exp();
    let t3 = f.a * (parts.ln_g + (f.a - 1.0) * parts.ln_big_g - ln_omga).exp();
    let t4 = f.alpha_bar()
        * f.a
        * f.b
        * (parts.ln_g + (f.a - 1.0) * parts.ln_big_g + (f.b - 1.0) * ln_omga - ln_d).exp();
    Ok([t1, t2, t3, t4])
}

/// d log f(t) / dt at an interior point.
pub fn dlog_pdf(spec: &ModelSpec, t: f64) -> Result<f64> {
    let f = &spec.family;
    let [t1, t2, t3, t4] = log_deriv_pieces(spec, t)?;
    Ok(t1 + t2 + (1.0 - f.b * f.theta) * t3 - (f.theta + 1.0) * t4)
}

/// d log h(t) / dt; same pieces as the density case with the survival part
/// of the slope cancelled out of the last two coefficients.
pub fn dlog_hrf(spec: &ModelSpec, t: f64) -> Result<f64> {
    let [t1, t2, t3, t4] = log_deriv_pieces(spec, t)?;
    Ok(t1 + t2 + t3 - t4)
}

const SCAN_POINTS: usize = 2048;

/// Extreme parameter corners can round a central quantile onto a support
/// boundary (a survival target like 1e-12 underflows against one); pull such
/// an endpoint one ulp inside so the scan stays on interior points.
fn clamp_quantile_range(spec: &ModelSpec, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let (slo, shi) = spec.support();
    if lo <= slo {
        lo = slo.next_up();
    }
    if hi >= shi {
        hi = shi.next_down();
    }
    (lo, hi)
}

/// Critical points of the chosen curve inside the central quantile range
/// [q(1e-6), q(1-1e-6)]: a sign scan of the log-derivative over a log-spaced
/// grid, bisection of each bracket down to the float grid, classification by
/// a centered difference of the log-derivative. An empty list means the
/// curve is monotone over the scanned range.
pub fn critical_points(spec: &ModelSpec, curve: ShapeCurve) -> Result<Vec<CriticalPoint>> {
    let d = |t: f64| match curve {
        ShapeCurve::Density => dlog_pdf(spec, t),
        ShapeCurve::Hazard => dlog_hrf(spec, t),
    };
    let (lo, hi) = clamp_quantile_range(spec, spec.quantile(1e-6)?, spec.quantile(1.0 - 1e-6)?);
    let step = (hi / lo).ln() / (SCAN_POINTS - 1) as f64;
    let mut ts = Vec::with_capacity(SCAN_POINTS);
    let mut ds = Vec::with_capacity(SCAN_POINTS);
    for i in 0..SCAN_POINTS {
        let t = (lo * (step * i as f64).exp()).min(hi);
        ts.push(t);
        ds.push(d(t)?);
    }
    let mut out = Vec::new();
    for i in 0..SCAN_POINTS {
        if ds[i] == 0.0 {
            // Exact node zero counts only when isolated; a flat run (constant
            // density or hazard) has no isolated critical point to report.
            let left_flat = i > 0 && ds[i - 1] == 0.0;
            let right_flat = i + 1 < SCAN_POINTS && ds[i + 1] == 0.0;
            if !left_flat && !right_flat {
                out.push(classify(spec, &d, ts[i])?);
            }
        } else if i + 1 < SCAN_POINTS && ds[i + 1] != 0.0 && (ds[i] > 0.0) != (ds[i + 1] > 0.0) {
            let root = bisect(&d, ts[i], ts[i + 1], ds[i])?;
            out.push(classify(spec, &d, root)?);
        }
    }
    Ok(out)
}

/// Bisection run to float-grid exhaustion: ~50 evaluations pin the root to
/// one ulp, far inside any stated location tolerance.
fn bisect(d: &impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, dlo: f64) -> Result<f64> {
    let low_sign = dlo > 0.0;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let dm = d(mid)?;
        if dm == 0.0 {
            return Ok(mid);
        }
        if (dm > 0.0) == low_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

fn classify(
    spec: &ModelSpec,
    d: &impl Fn(f64) -> Result<f64>,
    t0: f64,
) -> Result<CriticalPoint> {
    let (lo, hi) = spec.support();
    // cbrt(eps)-scaled step balances truncation against cancellation in the
    // centered difference; shrink it if the support boundary is closer.
    let mut h = 6e-6 * t0.abs().max(1e-3);
    if t0 - h <= lo {
        h = 0.5 * (t0 - lo);
    }
    if hi.is_finite() && t0 + h >= hi {
        h = 0.5 * (hi - t0).min(2.0 * h);
    }
    let disc = (d(t0 + h)? - d(t0 - h)?) / (2.0 * h);
    let kind = if disc < -INFLEXION_TOL {
        ExtremumKind::Maximum
    } else if disc > INFLEXION_TOL {
        ExtremumKind::Minimum
    } else {
        ExtremumKind::Inflexion
    };
    Ok(CriticalPoint {
        location: t0,
        kind,
        discriminant: disc,
    })
}

/// Support endpoint selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Lower,
    Upper,
}

/// Evaluation of the curve against its endpoint leading form at one probe
/// point; every reported ratio approaches one as the probe approaches the
/// endpoint.
///
/// Lower endpoint (G -> 0): density and hazard both lead with
/// theta a b g G^{a-1} / alpha, while the cdf vanishes, so no tail ratio is
/// reported there. Upper endpoint: the density leads with
/// theta alpha^theta a b g (1-G^a)^{b theta - 1}, the survival with
/// alpha^theta (1-G^a)^{b theta}, and the hazard with
/// theta a b g G^{a-1} (1-G^a)^{-1}.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoteReport {
    pub endpoint: Endpoint,
    pub probe: f64,
    pub pdf_ratio: f64,
    pub hrf_ratio: f64,
    /// Survival against its leading tail form; upper endpoint only.
    pub sf_ratio: Option<f64>,
}

/// Compares the exact evaluators against the endpoint leading forms at an
/// interior probe point.
pub fn asymptote(spec: &ModelSpec, endpoint: Endpoint, probe: f64) -> Result<AsymptoteReport> {
    let (lo, hi) = spec.support();
    if !(probe > lo && probe < hi) {
        return Err(Error::DomainPoint {
            what: "asymptote probe",
            t: probe,
        });
    }
    let f = &spec.family;
    let parts = spec.baseline.parts(probe);
    let ln_omga = ln_one_minus_pow(f.a, parts.ln_big_g, parts.ln_sfb);
    let ln_core = f.theta.ln() + f.a.ln() + f.b.ln() + parts.ln_g;
    let ln_pdf = spec.ln_pdf(probe);
    let ln_sf = spec.ln_sf(probe);
    Ok(match endpoint {
        Endpoint::Lower => {
            let lead = ln_core + (f.a - 1.0) * parts.ln_big_g - f.alpha.ln();
            AsymptoteReport {
                endpoint,
                probe,
                pdf_ratio: (ln_pdf - lead).exp(),
                hrf_ratio: (ln_pdf - ln_sf - lead).exp(),
                sf_ratio: None,
            }
        }
        Endpoint::Upper => {
            let lead_f = ln_core + f.theta * f.alpha.ln() + (f.b * f.theta - 1.0) * ln_omga;
            let lead_sf = f.theta * f.alpha.ln() + f.b * f.theta * ln_omga;
            let lead_h = ln_core + (f.a - 1.0) * parts.ln_big_g - ln_omga;
            AsymptoteReport {
                endpoint,
                probe,
                pdf_ratio: (ln_pdf - lead_f).exp(),
                hrf_ratio: (ln_pdf - ln_sf - lead_h).exp(),
                sf_ratio: Some((ln_sf - lead_sf).exp()),
            }
        }
    })
}

/// Grid outcomes for the four ordering relations, oriented so that X is the
/// smaller-alpha spec and Y the larger whichever way the pair was passed.
#[derive(Debug, Clone, Copy)]
pub struct OrderingChecks {
    /// pdf_X / pdf_Y nonincreasing across the grid (likelihood ratio order).
    pub lr_nonincreasing: bool,
    /// sf_X <= sf_Y pointwise (usual stochastic order).
    pub st: bool,
    /// hrf_X >= hrf_Y pointwise (hazard rate order).
    pub hr: bool,
    /// rhrf_X <= rhrf_Y pointwise (reversed hazard rate order).
    pub rhr: bool,
}

impl OrderingChecks {
    pub fn all_hold(&self) -> bool {
        self.lr_nonincreasing && self.st && self.hr && self.rhr
    }
}

/// `Inconclusive` when the two specs differ in anything besides alpha; the
/// comparison theorem says nothing there.
#[derive(Debug, Clone, Copy)]
pub enum OrderingVerdict {
    Inconclusive,
    Checked(OrderingChecks),
}

/// Relative slack for the grid comparisons, absorbing evaluation rounding
/// without masking any real crossing.
const ORDER_SLACK: f64 = 1e-10;

/// Verifies the alpha ordering chain between two specs that share theta, a,
/// b, and baseline: likelihood ratio nonincreasing, survival dominated,
/// hazard dominating, reversed hazard dominated, all on a log-spaced grid
/// covering both central quantile ranges.
pub fn check_lr_order(
    spec1: &ModelSpec,
    spec2: &ModelSpec,
    grid_size: usize,
) -> Result<OrderingVerdict> {
    if grid_size < 2 {
        return Err(Error::InvalidParam {
            name: "grid_size",
            value: grid_size as f64,
            constraint: "must be >= 2",
        });
    }
    let (f1, f2) = (&spec1.family, &spec2.family);
    if f1.theta != f2.theta || f1.a != f2.a || f1.b != f2.b || spec1.baseline != spec2.baseline {
        return Ok(OrderingVerdict::Inconclusive);
    }
    let (x, y) = if f1.alpha <= f2.alpha {
        (spec1, spec2)
    } else {
        (spec2, spec1)
    };
    let lo = x.quantile(1e-6)?.min(y.quantile(1e-6)?);
    let hi = x.quantile(1.0 - 1e-6)?.max(y.quantile(1.0 - 1e-6)?);
    let (lo, hi) = clamp_quantile_range(x, lo, hi);
    let step = (hi / lo).ln() / (grid_size - 1) as f64;
    let mut checks = OrderingChecks {
        lr_nonincreasing: true,
        st: true,
        hr: true,
        rhr: true,
    };
    let mut prev_ratio = f64::INFINITY;
    for i in 0..grid_size {
        let t = (lo * (step * i as f64).exp()).min(hi);
        let ratio = x.ln_pdf(t) - y.ln_pdf(t);
        if ratio > prev_ratio + ORDER_SLACK * (1.0 + prev_ratio.abs()) {
            checks.lr_nonincreasing = false;
        }
        prev_ratio = ratio;
        if x.sf(t) > y.sf(t) * (1.0 + ORDER_SLACK) + 1e-15 {
            checks.st = false;
        }
        if x.hrf(t)? < y.hrf(t)? * (1.0 - ORDER_SLACK) {
            checks.hr = false;
        }
        if x.rhrf(t)? > y.rhrf(t)? * (1.0 + ORDER_SLACK) {
            checks.rhr = false;
        }
    }
    Ok(OrderingVerdict::Checked(checks))
}
