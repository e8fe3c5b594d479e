//! Observed data and likelihood-based inference: log-likelihood, analytic
//! score, multi-start maximum likelihood, observed information, standard
//! errors, AIC, and nested likelihood-ratio tests.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::baseline::{BaselineKind, BaselineModel};
use crate::error::{Error, Result};
use crate::family::{ln_one_minus_pow, ModelSpec, Variant};
use crate::optim::nelder_mead;
use crate::rng::StreamRng;
use crate::special::{chisq_sf, inv_norm_cdf};

/// A sample of positive observations plus bookkeeping labels.
///
/// Construction checks positivity and finiteness only; whether the values sit
/// inside a particular baseline support is a property of the (data, model)
/// pair and is checked where the pair meets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub values: Vec<f64>,
    pub label: String,
    pub source: String,
}

impl Dataset {
    pub fn new(values: Vec<f64>, label: &str, source: &str) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::BadData {
                line: 0,
                what: "empty dataset",
            });
        }
        for (idx, &v) in values.iter().enumerate() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::BadData {
                    line: idx + 1,
                    what: "values must be finite and > 0",
                });
            }
        }
        Ok(Dataset {
            values,
            label: String::from(label),
            source: String::from(source),
        })
    }

    /// In-memory sample with no file behind it.
    pub fn inline(values: Vec<f64>, label: &str) -> Result<Self> {
        Self::new(values, label, "inline")
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Every observation strictly inside the baseline support.
    pub fn check_support(&self, baseline: &BaselineModel) -> Result<()> {
        let (lo, hi) = baseline.support();
        for &t in &self.values {
            if !(t > lo && t < hi) {
                return Err(Error::OutOfSupport { t });
            }
        }
        Ok(())
    }
}

/// Stand-in for log(0) when some observation lands on zero density: far below
/// any real log-likelihood yet still orderable and summable.
pub const LOGLIK_FLOOR: f64 = -1e300;

/// Sum of log densities over the sample.
pub fn loglik(spec: &ModelSpec, data: &Dataset) -> Result<f64> {
    data.check_support(&spec.baseline)?;
    let mut total = 0.0;
    for &t in &data.values {
        total += spec.ln_pdf(t);
    }
    Ok(if total.is_finite() {
        total
    } else {
        LOGLIK_FLOOR
    })
}

/// Names of the fitted parameters, family slots first then baseline, which is
/// also the layout of every estimate, score, and information matrix here.
pub fn param_names(variant: Variant, kind: BaselineKind) -> Vec<&'static str> {
    let mut names: Vec<&'static str> = variant.free_family_params().to_vec();
    names.extend_from_slice(kind.param_names());
    names
}

/// Assemble a model from a flat fit-layout parameter vector.
pub fn build_spec(variant: Variant, kind: BaselineKind, params: &[f64]) -> Result<ModelSpec> {
    let n_fam = variant.free_family_params().len();
    if params.len() != n_fam + kind.n_params() {
        return Err(Error::InvalidParam {
            name: "params",
            value: params.len() as f64,
            constraint: "length must be free family count + baseline count",
        });
    }
    let family = variant.family_from_free(&params[..n_fam])?;
    let baseline = BaselineModel::new(kind, &params[n_fam..])?;
    ModelSpec::new(variant, family, baseline)
}

/// Flatten a model back into the fit layout.
pub fn spec_params(spec: &ModelSpec) -> Vec<f64> {
    let mut v = spec.variant.free_values(&spec.family);
    v.extend_from_slice(&spec.baseline.params);
    v
}

/// Gradient of the log-likelihood in the fit layout.
///
/// The family components are closed-form for every baseline; the baseline
/// components are closed-form where the baseline ships cdf/log-pdf parameter
/// gradients (exponential, Weibull) and central differences of the
/// log-likelihood otherwise.
pub fn score(spec: &ModelSpec, data: &Dataset) -> Result<Vec<f64>> {
    data.check_support(&spec.baseline)?;
    let f = &spec.family;
    let (theta, alpha, a, b) = (f.theta, f.alpha, f.a, f.b);
    let abar = f.alpha_bar();
    let n = data.n() as f64;
    let q_base = spec.baseline.kind.n_params();
    let analytic = spec
        .baseline
        .grad_cdf_params(data.values[0])
        .is_some();

    // Per-point logs: l = ln G, q = ln(1 - G^a), ln_d = ln(1 - abar (1-G^a)^b).
    let mut sum_l = 0.0;
    let mut sum_q = 0.0;
    let mut sum_ln_d = 0.0;
    let mut sum_p_d = 0.0; // (1-G^a)^b / D
    let mut sum_zl_s = 0.0; // G^a ln G / (1-G^a)
    let mut sum_zl_sd = 0.0; // (1-G^a)^{b-1} G^a ln G / D
    let mut sum_pq_d = 0.0; // (1-G^a)^b ln(1-G^a) / D
    let mut base = vec![0.0; q_base];
    for &t in &data.values {
        let parts = spec.baseline.parts(t);
        let l = parts.ln_big_g;
        let q = ln_one_minus_pow(a, l, parts.ln_sfb);
        let ln_d = (-abar * (b * q).exp()).ln_1p();
        sum_l += l;
        sum_q += q;
        sum_ln_d += ln_d;
        sum_p_d += (b * q - ln_d).exp();
        sum_zl_s += l * (a * l - q).exp();
        sum_zl_sd += l * (a * l + (b - 1.0) * q - ln_d).exp();
        sum_pq_d += q * (b * q - ln_d).exp();
        if analytic {
            let gb = spec.baseline.grad_cdf_params(t).unwrap();
            let gl = spec.baseline.grad_ln_pdf_params(t).unwrap();
            for (acc, (dg, dlng)) in base.iter_mut().zip(gb.iter().zip(&gl)) {
                *acc += dlng
                    + (a - 1.0) * dg * (-l).exp()
                    + (1.0 - b * theta) * a * dg * ((a - 1.0) * l - q).exp()
                    - (theta + 1.0)
                        * abar
                        * a
                        * b
                        * dg
                        * ((a - 1.0) * l + (b - 1.0) * q - ln_d).exp();
            }
        }
    }

    let mut out = Vec::with_capacity(spec.variant.free_family_params().len() + q_base);
    for name in spec.variant.free_family_params() {
        out.push(match *name {
            "theta" => n / theta + n * alpha.ln() + b * sum_q - sum_ln_d,
            "alpha" => n * theta / alpha - (theta + 1.0) * sum_p_d,
            "a" => {
                n / a + sum_l + (1.0 - b * theta) * sum_zl_s
                    - (theta + 1.0) * abar * b * sum_zl_sd
            }
            _ => n / b + theta * sum_q + (theta + 1.0) * abar * sum_pq_d,
        });
    }
    if analytic {
        out.extend(base);
    } else {
        out.extend(fd_baseline_score(spec, data)?);
    }
    Ok(out)
}

/// Central-difference fallback for baseline parameter components, shrinking
/// the step when a perturbed parameter leaves its valid region (support edges
/// move with the parameters for some kinds).
fn fd_baseline_score(spec: &ModelSpec, data: &Dataset) -> Result<Vec<f64>> {
    let q_base = spec.baseline.kind.n_params();
    let mut out = Vec::with_capacity(q_base);
    for j in 0..q_base {
        let pj = spec.baseline.params[j];
        let mut h = f64::EPSILON.cbrt() * pj.abs().max(1.0);
        if pj - h <= 0.0 {
            h = 0.5 * pj;
        }
        let eval = |pv: f64| -> Result<f64> {
            let mut params = spec.baseline.params.clone();
            params[j] = pv;
            let base = BaselineModel::new(spec.baseline.kind, &params)?;
            let trial = ModelSpec::new(spec.variant, spec.family, base)?;
            loglik(&trial, data)
        };
        let mut last_err = None;
        let mut done = false;
        for _ in 0..8 {
            match (eval(pj + h), eval(pj - h)) {
                (Ok(fp), Ok(fm)) => {
                    out.push((fp - fm) / (2.0 * h));
                    done = true;
                    break;
                }
                (Err(e), _) | (_, Err(e)) => {
                    last_err = Some(e);
                    h *= 0.25;
                }
            }
        }
        if !done {
            return Err(last_err.unwrap());
        }
    }
    Ok(out)
}

/// Knobs for the multi-start fit. `start_box` is both where the log-uniform
/// starts are drawn and the feasible region of the optimization (empty means
/// the default [1e-3, 1e3] box for every parameter): the family's likelihood
/// can grow along degenerate ridges where a shape pair runs to (0, inf) with
/// its product held fixed and a scale collapses past the subnormal range, so
/// the fit is a constrained maximum over a generous box rather than a chase
/// down a ridge where the model stops being a distribution estimate.
/// `extra_starts` are natural-scale vectors appended after the random starts
/// (a nested sub-model's optimum when fitting the wider model, a warm
/// restart, ...); they are clamped into the box.
#[derive(Debug, Clone)]
pub struct FitConfig {
    pub n_starts: usize,
    pub start_box: Vec<(f64, f64)>,
    pub max_iter: usize,
    pub f_tol: f64,
    pub x_tol: f64,
    pub seed: u64,
    pub gamma: f64,
    pub extra_starts: Vec<Vec<f64>>,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            n_starts: 40,
            start_box: Vec::new(),
            max_iter: 4000,
            f_tol: 1e-11,
            x_tol: 1e-9,
            seed: 0x6d6c65,
            gamma: 0.05,
            extra_starts: Vec::new(),
        }
    }
}

const DEFAULT_START_BOX: (f64, f64) = (1e-3, 1e3);

impl FitConfig {
    fn validate(&self, k: usize) -> Result<()> {
        if self.n_starts == 0 {
            return Err(Error::InvalidParam {
                name: "n_starts",
                value: 0.0,
                constraint: "must be >= 1",
            });
        }
        for (value, name) in [
            (self.f_tol, "f_tol"),
            (self.x_tol, "x_tol"),
            (self.gamma, "gamma"),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParam {
                    name,
                    value,
                    constraint: "must be finite and > 0",
                });
            }
        }
        if !self.start_box.is_empty() && self.start_box.len() != k {
            return Err(Error::InvalidParam {
                name: "start_box",
                value: self.start_box.len() as f64,
                constraint: "must be empty or one range per parameter",
            });
        }
        for &(lo, hi) in &self.start_box {
            if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                return Err(Error::InvalidParam {
                    name: "start_box",
                    value: lo,
                    constraint: "ranges must satisfy 0 < lo < hi < inf",
                });
            }
        }
        for extra in &self.extra_starts {
            if extra.len() != k || extra.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(Error::InvalidParam {
                    name: "extra_starts",
                    value: extra.len() as f64,
                    constraint: "each start needs one positive finite value per parameter",
                });
            }
        }
        Ok(())
    }

    fn box_for(&self, j: usize) -> (f64, f64) {
        if self.start_box.is_empty() {
            DEFAULT_START_BOX
        } else {
            self.start_box[j]
        }
    }

    /// Feasible region in log-parameter space.
    fn z_bounds(&self, k: usize) -> Vec<(f64, f64)> {
        (0..k)
            .map(|j| {
                let (lo, hi) = self.box_for(j);
                (lo.ln(), hi.ln())
            })
            .collect()
    }

    fn total_starts(&self) -> usize {
        self.n_starts + self.extra_starts.len()
    }
}

fn clamp_z(z: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in z.iter_mut().zip(bounds) {
        *v = v.max(lo).min(hi);
    }
}

fn inside(z: &[f64], bounds: &[(f64, f64)]) -> bool {
    z.iter().zip(bounds).all(|(v, &(lo, hi))| *v >= lo && *v <= hi)
}

/// Best and worst per-start log-likelihood, kept so a flat landscape (every
/// start agreeing) is distinguishable from one lucky basin.
#[derive(Debug, Clone, Copy)]
pub struct StartsSummary {
    pub best: f64,
    pub worst: f64,
}

/// Result of one fully-processed start: simplex rounds plus score polish.
#[derive(Debug, Clone)]
pub struct StartOutcome {
    pub index: usize,
    pub params: Vec<f64>,
    pub loglik: f64,
    pub converged: bool,
}

/// One complete start of the multi-start fit, independent of every other
/// start: its own PRNG stream, two simplex rounds over log parameters (a wide
/// one to find the basin, a tight rebuild to finish it), then monotone
/// steepest-ascent polish along the score. Callers may run starts in any
/// order or in parallel and fold with [`better_outcome`].
pub fn run_start(
    data: &Dataset,
    variant: Variant,
    kind: BaselineKind,
    config: &FitConfig,
    index: usize,
) -> StartOutcome {
    let k = param_names(variant, kind).len();
    let bounds = config.z_bounds(k);
    let mut z0 = Vec::with_capacity(k);
    if index < config.n_starts {
        let mut rng = StreamRng::new(config.seed, index as u64);
        for &(lo, hi) in &bounds {
            z0.push(rng.next_range(lo, hi));
        }
    } else {
        for p in &config.extra_starts[index - config.n_starts] {
            z0.push(p.ln());
        }
        clamp_z(&mut z0, &bounds);
    }
    let objective = |z: &[f64]| {
        if !inside(z, &bounds) {
            return f64::INFINITY;
        }
        let params: Vec<f64> = z.iter().map(|v| v.exp()).collect();
        match build_spec(variant, kind, &params).and_then(|s| loglik(&s, data)) {
            Ok(v) => -v,
            Err(_) => f64::INFINITY,
        }
    };
    let wide = nelder_mead(objective, &z0, 0.7, config.max_iter, config.f_tol, config.x_tol);
    let tight = nelder_mead(
        objective,
        &wide.x,
        0.08,
        config.max_iter,
        config.f_tol,
        config.x_tol,
    );
    let mut z = tight.x;
    let mut ll = -tight.fx;
    polish(data, variant, kind, &mut z, &mut ll, &bounds, config.f_tol);
    StartOutcome {
        index,
        params: z.iter().map(|v| v.exp()).collect(),
        loglik: ll,
        converged: tight.converged,
    }
}

/// Backtracking ascent along the chain-ruled score in log-parameter space,
/// projected onto the feasible box. Every accepted move strictly improves
/// the log-likelihood, so polishing never costs anything.
fn polish(
    data: &Dataset,
    variant: Variant,
    kind: BaselineKind,
    z: &mut Vec<f64>,
    ll: &mut f64,
    bounds: &[(f64, f64)],
    f_tol: f64,
) {
    let eval = |zz: &[f64]| -> f64 {
        let params: Vec<f64> = zz.iter().map(|v| v.exp()).collect();
        match build_spec(variant, kind, &params).and_then(|s| loglik(&s, data)) {
            Ok(v) => v,
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let mut step = 0.05;
    for _ in 0..160 {
        let params: Vec<f64> = z.iter().map(|v| v.exp()).collect();
        let Ok(spec) = build_spec(variant, kind, &params) else {
            break;
        };
        let Ok(grad) = score(&spec, data) else {
            break;
        };
        // d loglik / d ln(param) = param * d loglik / d param
        let gz: Vec<f64> = grad.iter().zip(&params).map(|(u, p)| u * p).collect();
        let gmax = gz.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if !(gmax > 1e-12 * (1.0 + ll.abs())) {
            break;
        }
        let mut significant = false;
        while step > 1e-13 {
            let mut zt: Vec<f64> = z
                .iter()
                .zip(&gz)
                .map(|(zi, gi)| zi + step * gi / gmax)
                .collect();
            clamp_z(&mut zt, bounds);
            let lt = eval(&zt);
            if lt > *ll {
                significant = lt - *ll > f_tol * (1.0 + ll.abs());
                *z = zt;
                *ll = lt;
                step *= 1.6;
                break;
            }
            step *= 0.25;
        }
        if !significant {
            break;
        }
    }
}

/// Associative winner rule for merging starts: higher log-likelihood wins;
/// exact ties go to the lexicographically smaller parameter vector, then the
/// smaller index, so any fold order or thread interleaving agrees.
pub fn better_outcome(a: StartOutcome, b: StartOutcome) -> StartOutcome {
    if a.loglik != b.loglik {
        return if a.loglik > b.loglik { a } else { b };
    }
    for (x, y) in a.params.iter().zip(&b.params) {
        if x != y {
            return if x < y { a } else { b };
        }
    }
    if a.index <= b.index {
        a
    } else {
        b
    }
}

/// Merge fully-processed starts into a [`FitResult`]: pick the winner,
/// attach the observed-information machinery at its estimate, and record the
/// spread over starts. Split out of [`fit_mle`] so callers that run
/// `run_start` concurrently can finish the same way.
pub fn fit_from_outcomes(
    data: &Dataset,
    variant: Variant,
    kind: BaselineKind,
    config: &FitConfig,
    outcomes: Vec<StartOutcome>,
) -> Result<FitResult> {
    if outcomes.is_empty() {
        return Err(Error::InvalidParam {
            name: "outcomes",
            value: 0.0,
            constraint: "need at least one start outcome",
        });
    }
    let mut worst = f64::INFINITY;
    let mut best: Option<StartOutcome> = None;
    for o in outcomes {
        worst = worst.min(o.loglik);
        best = Some(match best {
            None => o,
            Some(c) => better_outcome(c, o),
        });
    }
    let winner = best.unwrap();
    let k = winner.params.len();
    let mut converged = winner.converged && winner.loglik.is_finite();

    // Interval machinery; a singular or non-finite information matrix leaves
    // the intervals NaN and flags the fit rather than failing it, since the
    // estimate and likelihood remain usable for AIC and LR comparisons.
    let mut cov = vec![vec![f64::NAN; k]; k];
    let mut se = vec![f64::NAN; k];
    let mut ci = vec![(f64::NAN, f64::NAN); k];
    let mut ill_conditioned = true;
    if winner.loglik.is_finite() {
        if let Ok(spec) = build_spec(variant, kind, &winner.params) {
            if let Ok(info) = observed_info(&spec, data, InfoMethod::FiniteDiff) {
                if let Ok((c, s, intervals)) =
                    std_errors_ci(&info, &winner.params, config.gamma)
                {
                    ill_conditioned = condition_estimate(&info, &c) > 1e10;
                    cov = c;
                    se = s;
                    ci = intervals;
                }
            }
        }
    } else {
        converged = false;
    }

    Ok(FitResult {
        variant,
        baseline_kind: kind,
        aic: aic(k, winner.loglik),
        loglik: winner.loglik,
        estimate: winner.params,
        cov,
        se,
        ci,
        converged,
        starts_summary: StartsSummary {
            best: winner.loglik,
            worst,
        },
        ill_conditioned,
        n: data.n(),
        data_label: data.label.clone(),
        gamma: config.gamma,
    })
}

/// Maximum likelihood fit: `n_starts` independent log-uniform starts plus any
/// seeded extras, each taken through the full per-start pipeline, merged
/// deterministically. Identical `(data, variant, kind, config)` reproduce the
/// result exactly.
pub fn fit_mle(
    data: &Dataset,
    variant: Variant,
    kind: BaselineKind,
    config: &FitConfig,
) -> Result<FitResult> {
    let k = param_names(variant, kind).len();
    config.validate(k)?;
    if data.n() < k + 1 {
        return Err(Error::InsufficientEquations {
            needed: k + 1,
            got: data.n(),
        });
    }
    let mut outcomes = Vec::with_capacity(config.total_starts());
    for index in 0..config.total_starts() {
        outcomes.push(run_start(data, variant, kind, config, index));
    }
    fit_from_outcomes(data, variant, kind, config, outcomes)
}

/// Fitted model with intervals and the bookkeeping the comparison tooling
/// needs. `ill_conditioned` flags a near-singular information matrix
/// (condition estimate above 1e10): the point estimate stands, but interval
/// columns are untrustworthy.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub variant: Variant,
    pub baseline_kind: BaselineKind,
    pub estimate: Vec<f64>,
    pub loglik: f64,
    pub aic: f64,
    pub cov: Vec<Vec<f64>>,
    pub se: Vec<f64>,
    pub ci: Vec<(f64, f64)>,
    pub converged: bool,
    pub starts_summary: StartsSummary,
    pub ill_conditioned: bool,
    pub n: usize,
    pub data_label: String,
    pub gamma: f64,
}

impl FitResult {
    pub fn k(&self) -> usize {
        self.estimate.len()
    }
}

/// How to produce the observed information matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfoMethod {
    /// Central differences of the analytic score; works for every model.
    FiniteDiff,
    /// Closed-form second derivatives, available for the full family over an
    /// exponential baseline only. Kept as an independent arithmetic route so
    /// the two methods can check each other.
    AnalyticGmokwe,
}

/// Negative Hessian of the log-likelihood at the spec's parameters.
pub fn observed_info(
    spec: &ModelSpec,
    data: &Dataset,
    method: InfoMethod,
) -> Result<Vec<Vec<f64>>> {
    let m = match method {
        InfoMethod::FiniteDiff => info_fd(spec, data)?,
        InfoMethod::AnalyticGmokwe => info_gmokwe(spec, data)?,
    };
    for row in &m {
        for &v in row {
            if !v.is_finite() {
                return Err(Error::Singular {
                    what: "observed information has non-finite entries",
                });
            }
        }
    }
    Ok(m)
}

fn info_fd(spec: &ModelSpec, data: &Dataset) -> Result<Vec<Vec<f64>>> {
    let params = spec_params(spec);
    let k = params.len();
    let mut m = vec![vec![0.0; k]; k];
    for j in 0..k {
        let mut h = f64::EPSILON.cbrt() * params[j].abs().max(1.0);
        if params[j] - h <= 0.0 {
            h = 0.5 * params[j];
        }
        let shifted = |delta: f64| -> Result<Vec<f64>> {
            let mut p = params.clone();
            p[j] += delta;
            score(&build_spec(spec.variant, spec.baseline.kind, &p)?, data)
        };
        let sp = shifted(h)?;
        let sm = shifted(-h)?;
        for i in 0..k {
            m[i][j] = -(sp[i] - sm[i]) / (2.0 * h);
        }
    }
    // The differenced columns disagree across the diagonal only by their own
    // truncation error; averaging restores exact symmetry.
    for i in 0..k {
        for j in 0..i {
            let avg = 0.5 * (m[i][j] + m[j][i]);
            m[i][j] = avg;
            m[j][i] = avg;
        }
    }
    Ok(m)
}

/// Closed-form observed information for the full family over an exponential
/// baseline, parameter order (theta, alpha, a, b, lambda).
fn info_gmokwe(spec: &ModelSpec, data: &Dataset) -> Result<Vec<Vec<f64>>> {
    if spec.variant != Variant::GmoKwG || spec.baseline.kind != BaselineKind::Exponential {
        return Err(Error::Branch {
            what: "closed-form information needs the full family over an exponential baseline",
        });
    }
    data.check_support(&spec.baseline)?;
    let f = &spec.family;
    let (theta, alpha, a, b) = (f.theta, f.alpha, f.a, f.b);
    let abar = f.alpha_bar();
    let lam = spec.baseline.params[0];
    let n = data.n() as f64;

    // Hessian of the log-likelihood, accumulated point by point in plain
    // arithmetic (the finite-difference route works in log space, so the two
    // share nothing past the exponential cdf itself).
    let mut h = [[0.0_f64; 5]; 5];
    h[0][0] = -n / (theta * theta);
    h[0][1] = n / alpha;
    h[1][1] = -n * theta / (alpha * alpha);
    h[2][2] = -n / (a * a);
    h[3][3] = -n / (b * b);
    h[4][4] = -n / (lam * lam);
    for &t in &data.values {
        let e = (-lam * t).exp();
        let g = 1.0 - e;
        let l = g.ln();
        let z = g.powf(a);
        let s = 1.0 - z;
        let q = s.ln();
        let p = s.powf(b);
        let d = 1.0 - abar * p;
        let te = t * e;
        // dG/dlambda = t e^{-lambda t}; recurring groups:
        let zl_s = z * l / s;
        let sb1 = s.powf(b - 1.0);
        let ga1 = g.powf(a - 1.0);
        let u = sb1 * z * l / d; // S^{b-1} G^a L / D
        let v = sb1 * ga1 * te / d; // S^{b-1} G^{a-1} tE / D
        let pd = p / d;

        h[0][1] -= pd;
        h[0][2] -= b * zl_s + abar * b * u;
        h[0][3] += q + abar * pd * q;
        h[0][4] -= a * b * ga1 * te / s + abar * a * b * v;

        h[1][1] += (theta + 1.0) * pd * pd;
        h[1][2] += (theta + 1.0) * b * u + (theta + 1.0) * abar * b * u * pd;
        h[1][3] -= (theta + 1.0) * pd * q + (theta + 1.0) * abar * pd * pd * q;
        h[1][4] += (theta + 1.0) * a * b * v + (theta + 1.0) * abar * a * b * v * pd;

        h[2][2] += (1.0 - b * theta) * (z * z * l * l / (s * s) + z * l * l / s)
            + (theta + 1.0) * abar * b * (b - 1.0) * s.powf(b - 2.0) * z * z * l * l / d
            - (theta + 1.0) * abar * b * sb1 * z * l * l / d
            + (theta + 1.0) * abar * abar * b * b * sb1 * sb1 * z * z * l * l / (d * d);
        h[2][3] -= theta * zl_s
            + (theta + 1.0) * abar * u
            + (theta + 1.0) * abar * b * u * q
            + (theta + 1.0) * abar * abar * b * u * pd * q;
        h[2][4] += te / g
            + (1.0 - b * theta)
                * (a * g.powf(2.0 * a - 1.0) * te * l / (s * s)
                    + ga1 * te / s
                    + a * ga1 * te * l / s)
            + (theta + 1.0) * abar * a * b * (b - 1.0) * s.powf(b - 2.0) * g.powf(2.0 * a - 1.0) * te * l
                / d
            - (theta + 1.0) * abar * a * b * sb1 * ga1 * te * l / d
            - (theta + 1.0) * abar * b * v
            + (theta + 1.0) * abar * abar * a * b * b * sb1 * g.powf(2.0 * a - 1.0) * te * l * sb1
                / (d * d);

        h[3][3] += (theta + 1.0) * abar * pd * q * q + (theta + 1.0) * abar * abar * pd * pd * q * q;
        h[3][4] -= theta * a * ga1 * te / s
            + (theta + 1.0) * abar * a * v
            + (theta + 1.0) * abar * a * b * v * q
            + (theta + 1.0) * abar * abar * a * b * v * pd * q;

        h[4][4] += (a - 1.0) * (-te * t / g - te * te / (g * g))
            + (1.0 - b * theta)
                * (a * a * ga1 * ga1 * te * te / (s * s)
                    + a * (a - 1.0) * g.powf(a - 2.0) * te * te / s
                    - a * ga1 * te * t / s)
            + (theta + 1.0) * abar * a * a * b * (b - 1.0) * s.powf(b - 2.0) * ga1 * ga1 * te * te
                / d
            - (theta + 1.0) * abar * a * (a - 1.0) * b * sb1 * g.powf(a - 2.0) * te * te / d
            + (theta + 1.0) * abar * a * b * sb1 * ga1 * te * t / d
            + (theta + 1.0) * abar * abar * a * a * b * b * sb1 * sb1 * ga1 * ga1 * te * te
                / (d * d);
    }

    let mut m = vec![vec![0.0; 5]; 5];
    for i in 0..5 {
        for j in 0..5 {
            m[i][j] = -h[i.min(j)][i.max(j)];
        }
    }
    Ok(m)
}

/// Infinity-norm condition estimate of a matrix given its inverse.
fn condition_estimate(m: &[Vec<f64>], inv: &[Vec<f64>]) -> f64 {
    let norm = |x: &[Vec<f64>]| {
        x.iter()
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0_f64, f64::max)
    };
    norm(m) * norm(inv)
}

/// Gauss-Jordan inverse with partial pivoting.
fn invert(m: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let k = m.len();
    let mut aug: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..k).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| {
                aug[i][col]
                    .abs()
                    .partial_cmp(&aug[j][col].abs())
                    .unwrap_or(core::cmp::Ordering::Equal)
            })
            .unwrap();
        if !(aug[pivot][col].abs() > 0.0) || !aug[pivot][col].is_finite() {
            return Err(Error::Singular {
                what: "information matrix",
            });
        }
        aug.swap(col, pivot);
        let diag = aug[col][col];
        for v in aug[col].iter_mut() {
            *v /= diag;
        }
        for row in 0..k {
            if row != col {
                let factor = aug[row][col];
                if factor != 0.0 {
                    for j in 0..2 * k {
                        aug[row][j] -= factor * aug[col][j];
                    }
                }
            }
        }
    }
    Ok(aug.into_iter().map(|row| row[k..].to_vec()).collect())
}

/// Covariance (inverse information), standard errors, and Wald intervals at
/// level 1 - gamma.
#[allow(clippy::type_complexity)]
pub fn std_errors_ci(
    info: &[Vec<f64>],
    estimate: &[f64],
    gamma: f64,
) -> Result<(Vec<Vec<f64>>, Vec<f64>, Vec<(f64, f64)>)> {
    let k = info.len();
    if k == 0 || info.iter().any(|row| row.len() != k) || estimate.len() != k {
        return Err(Error::InvalidParam {
            name: "info",
            value: k as f64,
            constraint: "square matrix matching the estimate length",
        });
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidProbability { p: gamma });
    }
    let cov = invert(info)?;
    let z = inv_norm_cdf(1.0 - gamma / 2.0)?;
    let se: Vec<f64> = (0..k).map(|j| cov[j][j].sqrt()).collect();
    let ci: Vec<(f64, f64)> = estimate
        .iter()
        .zip(&se)
        .map(|(e, s)| (e - z * s, e + z * s))
        .collect();
    Ok((cov, se, ci))
}

/// Akaike information criterion, 2k - 2 loglik.
pub fn aic(k: usize, loglik: f64) -> f64 {
    2.0 * k as f64 - 2.0 * loglik
}

/// Family parameters a variant pins to one.
fn pinned(variant: Variant) -> &'static [&'static str] {
    match variant {
        Variant::GmoKwG => &[],
        Variant::MoKwG => &["theta"],
        Variant::KwG => &["theta", "alpha"],
        Variant::Gmo => &["a", "b"],
        Variant::Mo => &["theta", "a", "b"],
        Variant::Baseline => &["theta", "alpha", "a", "b"],
    }
}

/// Strict nesting: the null pins everything the alternative pins, plus more.
pub fn is_nested(null: Variant, alt: Variant) -> bool {
    null != alt && pinned(alt).iter().all(|p| pinned(null).contains(p))
}

/// Lift a nested fit's estimate into the wider variant's parameter layout
/// (pinned slots filled with their literal ones), ready to be used as an
/// extra start so the wider fit provably contains the nested optimum.
pub fn nested_start(null: &FitResult, alt: Variant) -> Result<Vec<f64>> {
    if !is_nested(null.variant, alt) {
        return Err(Error::NonNested {
            null: null.variant.name(),
            alt: alt.name(),
        });
    }
    let n_fam = null.variant.free_family_params().len();
    let fp = null.variant.family_from_free(&null.estimate[..n_fam])?;
    let mut v = alt.free_values(&fp);
    v.extend_from_slice(&null.estimate[n_fam..]);
    Ok(v)
}

/// Outcome of a nested likelihood-ratio test.
#[derive(Debug, Clone, Copy)]
pub struct LRTestResult {
    pub stat: f64,
    pub df: usize,
    pub p_value: f64,
    pub null_variant: Variant,
    pub alt_variant: Variant,
}

/// Likelihood-ratio test of a nested pair fitted to the same data. The
/// statistic is clamped at zero: when the wider fit was seeded with the null
/// optimum the true value cannot be negative, so any tiny negative excess is
/// optimizer noise.
pub fn lr_test(null: &FitResult, alt: &FitResult) -> Result<LRTestResult> {
    if !is_nested(null.variant, alt.variant) || null.baseline_kind != alt.baseline_kind {
        return Err(Error::NonNested {
            null: null.variant.name(),
            alt: alt.variant.name(),
        });
    }
    if null.n != alt.n || null.data_label != alt.data_label {
        return Err(Error::BadData {
            line: 0,
            what: "fits compare different datasets",
        });
    }
    let df = alt.k() - null.k();
    let stat = (-2.0 * (null.loglik - alt.loglik)).max(0.0);
    Ok(LRTestResult {
        stat,
        df,
        p_value: chisq_sf(stat, df as u32)?,
        null_variant: null.variant,
        alt_variant: alt.variant,
    })
}
