//! Derivative-free simplex minimizer shared by the moment-matching and
//! maximum-likelihood fitters.

use alloc::vec::Vec;

/// Outcome of one simplex run.
pub(crate) struct SimplexOutcome {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// NaN orders as +inf so the simplex walks out of invalid regions instead of
/// stalling on an incomparable vertex.
fn val(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Nelder-Mead with the standard reflect/expand/contract/shrink coefficients.
///
/// Converged means the vertex values or the vertex coordinates have collapsed
/// to within the given tolerances; callers decide what a `false` flag costs.
pub(crate) fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: f64,
    max_iter: usize,
    f_tol: f64,
    x_tol: f64,
) -> SimplexOutcome {
    let n = x0.len();
    let mut verts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    verts.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step;
        verts.push(v);
    }
    let mut fv: Vec<f64> = verts.iter().map(|v| val(f(v))).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;

        // Order so verts[0] is best and verts[n] worst.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| fv[i].partial_cmp(&fv[j]).unwrap());
        let reordered: Vec<Vec<f64>> = order.iter().map(|&i| verts[i].clone()).collect();
        let refv: Vec<f64> = order.iter().map(|&i| fv[i]).collect();
        verts = reordered;
        fv = refv;

        let f_spread = fv[n] - fv[0];
        let x_spread = verts[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&verts[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0_f64, f64::max);
        if f_spread <= f_tol * (1.0 + fv[0].abs()) || x_spread <= x_tol {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|k| verts[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64)
            .collect();
        let mix = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&verts[n])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = mix(1.0);
        let fr = val(f(&xr));
        if fr < fv[0] {
            let xe = mix(2.0);
            let fe = val(f(&xe));
            if fe < fr {
                verts[n] = xe;
                fv[n] = fe;
            } else {
                verts[n] = xr;
                fv[n] = fr;
            }
        } else if fr < fv[n - 1] {
            verts[n] = xr;
            fv[n] = fr;
        } else {
            let (xc, fc) = if fr < fv[n] {
                let x = mix(0.5);
                let fx = val(f(&x));
                (x, fx)
            } else {
                let x = mix(-0.5);
                let fx = val(f(&x));
                (x, fx)
            };
            if fc < fv[n].min(fr) {
                verts[n] = xc;
                fv[n] = fc;
            } else {
                // Shrink everything toward the best vertex.
                let best = verts[0].clone();
                for i in 1..=n {
                    for (vk, bk) in verts[i].iter_mut().zip(&best) {
                        *vk = bk + 0.5 * (*vk - bk);
                    }
                    fv[i] = val(f(&verts[i]));
                }
            }
        }
    }

    SimplexOutcome {
        x: verts[0].clone(),
        fx: fv[0],
        iterations,
        converged,
    }
}
