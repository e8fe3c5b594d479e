//! Gauss–Legendre quadrature: fixed panels plus a composite scheme with
//! geometric panel refinement toward both endpoints.
//!
//! The integrands in this crate are smooth away from the interval ends but
//! may carry integrable algebraic singularities there (powers of G and 1−G),
//! so panels shrink dyadically toward each endpoint until the added
//! contribution falls below the requested tolerance.

use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};

/// Gauss–Legendre rule on [−1, 1]; nodes and weights computed by Newton
/// iteration on the Legendre recurrence (accurate to ~1e-15 for n <= 128).
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2);
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Chebyshev-like initial guess for the i-th root.
            let mut z = (core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..100 {
                // Legendre recurrence up to P_n(z).
                let mut p0 = 1.0;
                let mut p1 = 0.0;
                for j in 0..n {
                    let p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j as f64 + 1.0) * z * p1 - j as f64 * p2) / (j as f64 + 1.0);
                }
                pp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
                let dz = p0 / pp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// ∫ₐᵇ f, one panel.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: &F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x);
        }
        sum * half
    }
}

/// 64-point rule, the workhorse order everywhere in the crate.
pub fn gl64() -> GaussLegendre {
    GaussLegendre::new(64)
}

/// Sum of one GL64 panel per consecutive boundary pair.
///
/// Callers choose boundaries that concentrate panels where the integrand is
/// steep (e.g. a quantile grid); with positive-weight rules the error on a
/// panel adjacent to an integrable singularity stays a bounded fraction of
/// that panel's mass.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: &F, boundaries: &[f64]) -> f64 {
    let rule = gl64();
    let mut total = 0.0;
    for pair in boundaries.windows(2) {
        if pair[1] > pair[0] {
            total += rule.integrate(pair[0], pair[1], f);
        }
    }
    total
}

/// Per-side panel cap. 2^-1074 is the smallest subnormal, so width underflow
/// stops the loop before this does for any finite interval.
const MAX_PANELS_PER_SIDE: usize = 1100;
/// Panels laid before the stop rule may fire, so short transients near the
/// interval middle cannot fake convergence.
const MIN_PANELS_PER_SIDE: usize = 6;

/// ∫ₐᵇ f with geometric (dyadic) panel refinement toward both endpoints.
///
/// Each side lays panels [a + w·2^{−k−1}, a + w·2^{−k}] (w = half-width) until
/// two consecutive contributions drop below tol·|total|, then extends the
/// observed geometric decay to estimate the sliver beyond the last panel.
/// Refinement also stops once panels are so thin that the Gauss nodes start
/// quantizing onto the float grid near the endpoint; at that point the same
/// extrapolation covers the rest, and contributions that were not decaying
/// there mean the leftover mass is unbounded, reported as `Divergent`.
pub fn integrate_end_refined<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    debug_assert!(b > a && tol > 0.0);
    let rule = gl64();
    let mid = 0.5 * (a + b);
    let mut total = 0.0;

    // side = 0: panels marching toward a; side = 1: toward b.
    for side in 0..2 {
        let end = if side == 0 { a } else { b };
        // ~2^20 ulps of the endpoint; thinner panels place nodes with ppm-or-
        // worse position error and their sums turn to noise.
        let width_floor = if end == 0.0 {
            f64::MIN_POSITIVE * 1e16
        } else {
            end.abs() * f64::EPSILON * 1048576.0
        };
        let mut outer = mid; // panel edge farther from `end`
        let mut small_streak = 0;
        let mut back2 = f64::NAN; // contribution before back1
        let mut back1 = f64::NAN; // most recent contribution
        let mut k = 0usize;
        loop {
            let inner = end + (outer - end) * 0.5;
            if (outer - end).abs() <= width_floor || inner == outer || inner == end {
                let scale = total.abs().max(1e-300);
                if back1.is_nan() || back1.abs() <= tol * scale {
                    break; // already converged when refinement bottomed out
                }
                let rho = back1 / back2;
                if !(rho.abs() < 0.999) {
                    // Not decaying toward the endpoint: the sliver holds
                    // unbounded (or unresolvable) mass.
                    return Err(Error::Divergent {
                        what: "end-refined quadrature",
                    });
                }
                total += back1 * rho / (1.0 - rho);
                break;
            }
            let (lo, hi) = if side == 0 { (inner, outer) } else { (outer, inner) };
            let contrib = rule.integrate(lo, hi, f);
            total += contrib;
            if !total.is_finite() {
                return Err(Error::Divergent {
                    what: "end-refined quadrature",
                });
            }
            let scale = total.abs().max(1e-300);
            if contrib.abs() <= tol * scale {
                small_streak += 1;
                if small_streak >= 2 && k + 1 >= MIN_PANELS_PER_SIDE {
                    // Everything past here decays at least as fast as the
                    // panels shrink; extend the observed ratio.
                    let rho = contrib / back1;
                    if rho.is_finite() && rho.abs() < 1.0 {
                        total += contrib * rho / (1.0 - rho);
                    }
                    break;
                }
            } else {
                small_streak = 0;
            }
            back2 = back1;
            back1 = contrib;
            outer = inner;
            k += 1;
            if k >= MAX_PANELS_PER_SIDE {
                return Err(Error::Divergent {
                    what: "end-refined quadrature",
                });
            }
        }
    }
    Ok(total)
}

/// Convenience wrapper for integrals over (0, 1) in a probability variable.
pub fn integrate_unit<F: Fn(f64) -> f64>(f: &F, tol: f64) -> Result<f64> {
    integrate_end_refined(f, 0.0, 1.0, tol)
}
