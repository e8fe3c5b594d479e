//! Assertion and finite-difference helpers shared by the integration tests.

#![allow(dead_code)] // each test binary pulls in the subset it needs

/// Mixed absolute/relative closeness: the tolerance is scaled by
/// max(1, |expected|) so it reads as absolute near zero and relative for
/// large magnitudes.
pub fn assert_close(actual: f64, expected: f64, tol: f64, what: &str) {
    let scale = 1.0_f64.max(expected.abs());
    let err = (actual - expected).abs();
    assert!(
        err <= tol * scale,
        "{what}: got {actual:.17e}, want {expected:.17e} (err {err:.3e} > tol {tol:.1e} * scale {scale:.3e})"
    );
}

/// Strict relative closeness; expected must be nonzero.
pub fn assert_rel(actual: f64, expected: f64, tol: f64, what: &str) {
    let err = (actual - expected).abs();
    assert!(
        expected != 0.0 && err <= tol * expected.abs(),
        "{what}: got {actual:.17e}, want {expected:.17e} (rel err {:.3e} > {tol:.1e})",
        err / expected.abs().max(f64::MIN_POSITIVE)
    );
}

/// Cube-root-of-eps step, scaled to the evaluation point.
pub fn fd_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

/// Central finite difference with the standard step choice.
pub fn central_diff(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = fd_step(x);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Quadrature of an integrand against the spec's support, with panel cuts at
/// equal-probability quantiles and dyadic end refinement for the integrable
/// boundary behavior. The 2e-10 of probability beyond the outermost cuts is
/// excluded by construction.
pub fn quantile_panel_integral(spec: &gmokw::ModelSpec, f: &impl Fn(f64) -> f64) -> f64 {
    use gmokw::quad::{gl64, integrate_end_refined};
    let q = |p: f64| spec.quantile(p).unwrap();
    let mut cuts = vec![q(1e-10)];
    for i in 1..40 {
        cuts.push(q(i as f64 * 0.025));
    }
    cuts.push(q(1.0 - 1e-10));
    let rule = gl64();
    let mut total = integrate_end_refined(f, cuts[0], cuts[1], 1e-13).unwrap();
    for w in cuts[1..cuts.len() - 1].windows(2) {
        total += rule.integrate(w[0], w[1], f);
    }
    let n = cuts.len();
    total + integrate_end_refined(f, cuts[n - 2], cuts[n - 1], 1e-13).unwrap()
}

/// Two-sided Kolmogorov-Smirnov statistic of a sorted sample against a cdf.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}
