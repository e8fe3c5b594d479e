mod common;

use common::{assert_close, assert_rel, quantile_panel_integral};
use gmokw::error::Error;
use gmokw::rng::StreamRng;
use gmokw::series::{
    coeffs, mixture_pdf, order_stat_coeffs, order_stat_pdf_direct, order_stat_pdf_series,
    power_series_power, series_pdf, series_sf, Regime,
};
use gmokw::{BaselineKind, BaselineModel, ModelSpec};

const ALL_KINDS: [BaselineKind; 8] = [
    BaselineKind::Exponential,
    BaselineKind::Lomax,
    BaselineKind::Weibull,
    BaselineKind::Frechet,
    BaselineKind::Gompertz,
    BaselineKind::ModifiedWeibull,
    BaselineKind::ExponentiatedPareto,
    BaselineKind::Power,
];

fn log_uniform(rng: &mut StreamRng, lo: f64, hi: f64) -> f64 {
    rng.next_range(lo.ln(), hi.ln()).exp()
}

fn random_baseline(rng: &mut StreamRng, kind: BaselineKind) -> BaselineModel {
    match kind {
        BaselineKind::Exponential => BaselineModel::exponential(log_uniform(rng, 0.3, 3.0)),
        BaselineKind::Lomax => {
            BaselineModel::lomax(log_uniform(rng, 0.8, 4.0), log_uniform(rng, 0.4, 2.5))
        }
        BaselineKind::Weibull => {
            BaselineModel::weibull(log_uniform(rng, 0.4, 2.5), log_uniform(rng, 0.5, 3.0))
        }
        BaselineKind::Frechet => {
            BaselineModel::frechet(log_uniform(rng, 0.8, 3.0), log_uniform(rng, 0.4, 2.5))
        }
        BaselineKind::Gompertz => {
            BaselineModel::gompertz(log_uniform(rng, 0.3, 2.0), log_uniform(rng, 0.3, 2.0))
        }
        BaselineKind::ModifiedWeibull => BaselineModel::modified_weibull(
            log_uniform(rng, 0.3, 2.0),
            log_uniform(rng, 0.3, 2.0),
            log_uniform(rng, 0.5, 2.5),
        ),
        BaselineKind::ExponentiatedPareto => BaselineModel::exponentiated_pareto(
            log_uniform(rng, 0.5, 2.0),
            log_uniform(rng, 0.8, 3.0),
            log_uniform(rng, 0.5, 2.5),
        ),
        BaselineKind::Power => {
            BaselineModel::power(log_uniform(rng, 0.5, 3.0), log_uniform(rng, 0.5, 2.0))
        }
    }
    .unwrap()
}

/// Random spec with alpha drawn from the given range (one convergence regime).
fn random_spec(rng: &mut StreamRng, kind: BaselineKind, alpha_lo: f64, alpha_hi: f64) -> ModelSpec {
    ModelSpec::gmokw(
        log_uniform(rng, 0.25, 4.0),
        log_uniform(rng, alpha_lo, alpha_hi),
        log_uniform(rng, 0.25, 4.0),
        log_uniform(rng, 0.25, 4.0),
        random_baseline(rng, kind),
    )
    .unwrap()
}

/// Kumaraswamy-G density with the b-slot set to beta, straight from the
/// baseline's plain pdf/cdf. Independent of the crate's log-space pipeline;
/// only trustworthy for moderate t.
fn kw_pdf_plain(spec: &ModelSpec, beta: f64, t: f64) -> f64 {
    let a = spec.family.a;
    let g = spec.baseline.pdf(t);
    let big_g = spec.baseline.cdf(t);
    a * beta * g * big_g.powf(a - 1.0) * (1.0 - big_g.powf(a)).powf(beta - 1.0)
}

/// Kumaraswamy-G survival (1 - G^a)^b from plain baseline evaluations.
fn kw_sf_plain(spec: &ModelSpec, t: f64) -> f64 {
    (1.0 - spec.baseline.cdf(t).powf(spec.family.a)).powf(spec.family.b)
}

#[test]
fn coefficient_table_identities_below_one() {
    let table = coeffs(2.0, 0.5, 40).unwrap();
    assert_eq!(table.regime, Regime::AlphaBelowOne);
    assert_eq!(table.j_max, 40);
    assert_eq!(table.a_coef.len(), 41);
    assert!(table.c_coef.is_empty() && table.cprime.is_empty());

    // A_0 = theta * alpha^theta and A'_0 = -alpha^theta.
    assert_close(table.a_coef[0], 0.5, 1e-15, "A_0");
    assert_close(table.aprime[0], -0.25, 1e-15, "A'_0");
    for j in 0..=40 {
        assert_close(
            table.aprime[j],
            -table.a_coef[j] / (j as f64 + 2.0),
            1e-14,
            "A' vs A ratio",
        );
        // Triangular coefficients carry A_j with alternating binomial signs.
        assert_eq!(table.b_coef[j].len(), j + 1);
        assert_close(table.b_coef[j][j], table.a_coef[j], 1e-14, "B_{j,j}");
    }
    assert_close(table.b_coef[3][0], -table.a_coef[3], 1e-13, "B_{3,0}");
    assert_close(table.b_coef[3][1], 3.0 * table.a_coef[3], 1e-13, "B_{3,1}");
    assert_close(table.b_coef[3][2], -3.0 * table.a_coef[3], 1e-13, "B_{3,2}");
    assert_close(table.b_coef[4][2], 6.0 * table.a_coef[4], 1e-13, "B_{4,2}");

    // Geometric tail: successive weight ratios settle below 1.
    for j in 30..40 {
        assert!(
            (table.aprime[j + 1] / table.aprime[j]).abs() < 1.0,
            "A' tail ratio at j={j}"
        );
    }

    assert!(matches!(coeffs(2.0, 1.0, 5), Err(Error::Regime { .. })));
    assert!(matches!(coeffs(0.0, 0.5, 5), Err(Error::InvalidParam { .. })));
    assert!(matches!(coeffs(2.0, -0.5, 5), Err(Error::InvalidParam { .. })));
}

#[test]
fn coefficient_table_identities_above_one() {
    let theta = 1.4;
    let alpha = 2.2;
    let table = coeffs(theta, alpha, 30).unwrap();
    assert_eq!(table.regime, Regime::AlphaAboveOne);
    assert!(table.a_coef.is_empty() && table.aprime.is_empty() && table.b_coef.is_empty());

    assert_close(table.c_coef[0], 1.0 / alpha, 1e-15, "C_0");
    assert_close(table.cprime[0], 1.0, 1e-15, "C'_0");
    for j in 0..=30 {
        // C'_j = alpha * theta / (j + theta) * C_j.
        assert_close(
            table.cprime[j],
            alpha * theta / (j as f64 + theta) * table.c_coef[j],
            1e-13,
            "C' vs C ratio",
        );
    }
    for j in 20..30 {
        assert!((table.cprime[j + 1] / table.cprime[j]).abs() < 1.0);
    }
}

#[test]
fn lower_tail_density_ratio_pins_the_leading_coefficient() {
    // As t drops to the lower support end, pdf / f_Kw(a, b*theta) -> C_0 = 1/alpha.
    let alpha = 2.2;
    let spec = ModelSpec::gmokw(1.4, alpha, 1.3, 0.8,
        BaselineModel::weibull(1.0, 1.5).unwrap(),
    )
    .unwrap();
    // Choose t so the Kumaraswamy cdf is ~1e-6: G^a = 1 - (1 - 1e-6)^(1/b).
    let big_g = (1.0 - (1.0_f64 - 1e-6).powf(1.0 / 0.8)).powf(1.0 / 1.3);
    let t = spec.baseline.quantile(big_g).unwrap();
    let ratio = spec.pdf(t) / kw_pdf_plain(&spec, 0.8 * 1.4, t);
    assert_close(ratio, 1.0 / alpha, 1e-4, "leading-coefficient ratio");
}

#[test]
fn geometric_survival_closed_form() {
    // theta = 1 makes the sf series a geometric sum: alpha*S / (1 - (1-alpha)*S).
    let spec = ModelSpec::gmokw(1.0, 0.5, 2.0, 3.0,
        BaselineModel::exponential(1.0).unwrap(),
    )
    .unwrap();
    // Place t where the Kumaraswamy survival is exactly about 1/2.
    let big_g = (1.0 - 0.5_f64.powf(1.0 / 3.0)).sqrt();
    let t = spec.baseline.quantile(big_g).unwrap();
    let s = kw_sf_plain(&spec, t);
    assert_close(s, 0.5, 1e-12, "engineered Kumaraswamy survival");
    let sum = series_sf(&spec, t, 1e-14).unwrap();
    assert_close(sum, 1.0 / 3.0, 1e-10, "geometric sf value");
    assert_close(sum, 0.5 * s / (1.0 - 0.5 * s), 1e-12, "geometric sf form");
}

#[test]
fn alpha_one_collapses_to_the_exact_single_term() {
    let spec = ModelSpec::gmokw(1.7, 1.0, 2.2, 0.9,
        BaselineModel::lomax(2.0, 1.0).unwrap(),
    )
    .unwrap();
    for p in [0.1, 0.5, 0.9] {
        let t = spec.quantile(p).unwrap();
        assert_rel(series_pdf(&spec, t, 1e-12).unwrap(), spec.pdf(t), 1e-13, "pdf");
        assert_rel(series_sf(&spec, t, 1e-12).unwrap(), spec.sf(t), 1e-13, "sf");
        assert_rel(mixture_pdf(&spec, t, 1e-12).unwrap(), spec.pdf(t), 1e-13, "mixture");
    }
}

#[test]
fn series_match_direct_evaluation_in_both_regimes() {
    for (stream, alpha_lo, alpha_hi) in [(11, 0.3, 0.85), (12, 1.2, 4.0)] {
        let mut rng = StreamRng::new(2024, stream);
        for rep in 0..50 {
            let spec = random_spec(&mut rng, ALL_KINDS[rep % 8], alpha_lo, alpha_hi);
            for k in 0..20 {
                let p = 0.025 + k as f64 * 0.05;
                let t = spec.quantile(p).unwrap();
                let (lo, hi) = spec.support();
                if t <= lo || t >= hi {
                    // A hard tilt can round the quantile onto the endpoint
                    // itself, where the expansions keep the open-interval
                    // convention; there is no interior point to compare at.
                    continue;
                }
                let pdf = spec.pdf(t);
                let sf = spec.sf(t);
                assert_rel(series_pdf(&spec, t, 1e-12).unwrap(), pdf, 1e-8, "series pdf");
                assert_rel(series_sf(&spec, t, 1e-12).unwrap(), sf, 1e-8, "series sf");
                if spec.family.alpha < 1.0 {
                    assert_rel(mixture_pdf(&spec, t, 1e-12).unwrap(), pdf, 1e-8, "mixture pdf");
                }
            }
        }
    }
}

#[test]
fn mixture_weights_sum_to_one() {
    // The weights -A'_j form a proper (negative-binomial) pmf.
    for (theta, alpha) in [(0.5_f64, 0.3_f64), (1.0, 0.5), (2.7, 0.9), (2.0, 0.5)] {
        let mut w = alpha.powf(theta);
        let mut sum = 0.0;
        let mut j = 0.0;
        while w > 1e-18 && j < 4000.0 {
            sum += w;
            w *= (1.0 - alpha) * (j + theta) / (j + 1.0);
            j += 1.0;
        }
        assert_close(sum, 1.0, 1e-10, "mixture weight total");
    }
    let table = coeffs(2.0, 0.5, 120).unwrap();
    let total: f64 = table.aprime.iter().map(|w| -w).sum();
    assert_close(total, 1.0, 1e-10, "tabled weight total");

    assert!(matches!(
        mixture_pdf(
            &ModelSpec::gmokw(1.0, 2.0, 1.0, 1.0,
                BaselineModel::exponential(1.0).unwrap(),
            )
            .unwrap(),
            1.0,
            1e-10
        ),
        Err(Error::Regime { .. })
    ));
}

#[test]
fn triangular_double_series_reproduces_the_density() {
    // pdf = f_Kw(a, b*theta)/theta * sum_j sum_k B_{j,k} F^{j-k}, summed row
    // by row exactly as tabled. Convergence needs (1-alpha)(1+F) < 1.
    for (theta, alpha) in [(0.8, 0.6), (2.3, 0.8)] {
        let spec = ModelSpec::gmokw(theta, alpha, 1.7, 0.9,
            BaselineModel::weibull(0.8, 1.3).unwrap(),
        )
        .unwrap();
        let table = coeffs(theta, alpha, 400).unwrap();
        for p in [0.1, 0.3, 0.5, 0.75, 0.9] {
            let t = spec.quantile(p).unwrap();
            let big_f = 1.0 - kw_sf_plain(&spec, t);
            let mut sum = 0.0;
            for row in &table.b_coef {
                let j = row.len() - 1;
                let mut row_sum = 0.0;
                for (k, b) in row.iter().enumerate() {
                    row_sum += b * big_f.powi((j - k) as i32);
                }
                sum += row_sum;
            }
            let pdf_b = kw_pdf_plain(&spec, spec.family.b * theta, t) / theta * sum;
            assert_rel(pdf_b, spec.pdf(t), 1e-8, "triangular-route pdf");
        }
    }
}

/// Brute-force polynomial power by repeated convolution, truncated at k_max.
fn poly_pow_oracle(c: &[f64], m: u32, k_max: usize) -> Vec<f64> {
    let mut acc = vec![0.0; k_max + 1];
    acc[0] = 1.0;
    for _ in 0..m {
        let mut next = vec![0.0; k_max + 1];
        for (i, &ai) in acc.iter().enumerate() {
            if ai == 0.0 {
                continue;
            }
            for (j, &cj) in c.iter().enumerate() {
                if i + j <= k_max {
                    next[i + j] += ai * cj;
                }
            }
        }
        acc = next;
    }
    acc
}

#[test]
fn power_series_power_matches_polynomial_convolution() {
    let mut rng = StreamRng::new(91, 0);
    for _ in 0..20 {
        let mut c: Vec<f64> = (0..13).map(|_| rng.next_range(-1.0, 1.0)).collect();
        c[0] = rng.next_range(0.5, 2.0) * if rng.next_open01() < 0.5 { -1.0 } else { 1.0 };
        for m in 1..=6u32 {
            let got = power_series_power(&c, m, 12).unwrap();
            let want = poly_pow_oracle(&c, m, 12);
            for k in 0..=12 {
                assert_close(got[k], want[k], 1e-11, "power-series coefficient");
            }
            assert_close(got[0], c[0].powi(m as i32), 1e-13, "constant term");
        }
        let identity = power_series_power(&c, 1, 12).unwrap();
        for k in 0..=12 {
            assert_close(identity[k], c[k], 1e-13, "identity power");
        }
    }
    assert!(matches!(
        power_series_power(&[0.0, 1.0], 2, 5),
        Err(Error::InvalidParam { .. })
    ));
    assert!(matches!(
        power_series_power(&[], 2, 5),
        Err(Error::InvalidParam { .. })
    ));
    assert!(matches!(
        power_series_power(&[1.0, 1.0], 0, 5),
        Err(Error::InvalidParam { .. })
    ));
}

#[test]
fn order_statistic_direct_density_identities() {
    let spec = ModelSpec::gmokw(1.6, 0.5, 1.3, 2.1,
        BaselineModel::gompertz(0.8, 1.1).unwrap(),
    )
    .unwrap();
    for p in [0.05, 0.3, 0.5, 0.7, 0.95] {
        let t = spec.quantile(p).unwrap();
        let f = spec.pdf(t);
        assert_rel(order_stat_pdf_direct(&spec, 1, 1, t).unwrap(), f, 1e-14, "n=1");
        assert_rel(
            order_stat_pdf_direct(&spec, 4, 4, t).unwrap(),
            4.0 * f * spec.cdf(t).powi(3),
            1e-13,
            "maximum of four",
        );
        // Exchangeability: the ranks partition the sample density.
        let total: f64 = (1..=5)
            .map(|i| order_stat_pdf_direct(&spec, 5, i, t).unwrap())
            .sum();
        assert_rel(total, 5.0 * f, 1e-10, "rank sum");
    }
    for (n, i) in [(3, 1), (3, 3), (5, 2)] {
        let mass = quantile_panel_integral(&spec, &|t| order_stat_pdf_direct(&spec, n, i, t).unwrap());
        assert_close(mass, 1.0, 1e-7, "order-statistic normalization");
    }
    assert!(matches!(
        order_stat_pdf_direct(&spec, 3, 0, 1.0),
        Err(Error::Rank { .. })
    ));
    assert!(matches!(
        order_stat_pdf_direct(&spec, 3, 4, 1.0),
        Err(Error::Rank { .. })
    ));
    assert!(matches!(
        order_stat_pdf_series(&spec, 3, 4, 1.0, 1e-9),
        Err(Error::Rank { .. })
    ));
}

#[test]
fn order_statistic_series_matches_the_direct_formula() {
    let cases = [
        (0.5, BaselineModel::weibull(1.0, 1.3).unwrap()),
        (2.0, BaselineModel::lomax(2.5, 1.0).unwrap()),
    ];
    for (alpha, baseline) in cases {
        let spec = ModelSpec::gmokw(1.7, alpha, 1.4, 0.8,
            baseline,
        )
        .unwrap();
        for (n, i) in [(1, 1), (2, 1), (3, 2), (5, 3), (6, 1), (6, 6)] {
            for p in [0.1, 0.25, 0.5, 0.75, 0.9] {
                let t = spec.quantile(p).unwrap();
                let direct = order_stat_pdf_direct(&spec, n, i, t).unwrap();
                let series = order_stat_pdf_series(&spec, n, i, t, 1e-9).unwrap();
                assert_rel(series, direct, 1e-6, "order-statistic series");
            }
        }
        let t = spec.quantile(0.4).unwrap();
        assert_rel(
            order_stat_pdf_series(&spec, 1, 1, t, 1e-12).unwrap(),
            series_pdf(&spec, t, 1e-12).unwrap(),
            1e-12,
            "rank one reduces to the plain series",
        );
    }
    let flat = ModelSpec::gmokw(1.7, 1.0, 1.4, 0.8,
        BaselineModel::exponential(1.0).unwrap(),
    )
    .unwrap();
    assert!(matches!(
        order_stat_pdf_series(&flat, 3, 2, 1.0, 1e-9),
        Err(Error::Regime { .. })
    ));
}

#[test]
fn theta_one_order_statistics_use_the_reduced_coefficients() {
    // At theta = 1 the two series factors collapse to kappa_j = (j+1) alpha
    // abar^j and eta_c = alpha abar^c; check the per-rank composition against
    // that specialization, written out independently here.
    let alpha: f64 = 0.55;
    let abar = 1.0 - alpha;
    let spec = ModelSpec::gmokw(1.0, alpha, 2.2, 0.7,
        BaselineModel::exponential(1.3).unwrap(),
    )
    .unwrap();
    let n = 2u32;
    for i in [1u32, 2] {
        for p in [0.15, 0.5, 0.85] {
            let t = spec.quantile(p).unwrap();
            let s = kw_sf_plain(&spec, t);
            let fk = kw_pdf_plain(&spec, spec.family.b, t);
            let kappa_sum: f64 = (0..400)
                .map(|j| (j as f64 + 1.0) * alpha * abar.powi(j) * s.powi(j))
                .sum();
            let eta_sum: f64 = (0..400)
                .map(|c| alpha * abar.powi(c) * s.powi(c) * s)
                .sum();
            let rank_mult = 2.0; // n!/((i-1)!(n-i)!) for n = 2, either rank
            let mut lsum = 0.0;
            for l in 0..i {
                let m = (n + l - i) as f64;
                let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                let binom = 1.0; // binom(i-1, l) is 1 for i <= 2
                let sf_pow = if m == 0.0 { 1.0 } else { eta_sum };
                lsum += sign * binom * sf_pow;
            }
            let want = rank_mult * fk * kappa_sum * lsum;
            let got = order_stat_pdf_series(&spec, n, i, t, 1e-13).unwrap();
            assert_rel(got, want, 1e-9, "theta-one specialization");
            assert_rel(
                got,
                order_stat_pdf_direct(&spec, n, i, t).unwrap(),
                1e-9,
                "against the direct formula",
            );
        }
    }
}

#[test]
fn order_statistic_coefficient_tables() {
    // alpha > 1: the l = 0 term of (n, i) = (2, 1) carries the sf-power m = 1,
    // whose power-series coefficients are exactly C'_k.
    let theta = 1.5;
    let alpha = 2.0;
    let table = coeffs(theta, alpha, 10).unwrap();
    let os = order_stat_coeffs(theta, alpha, 2, 1, 10).unwrap();
    assert_eq!(os.regime, Regime::AlphaAboveOne);
    assert_eq!(os.terms.len(), 1);
    assert_eq!(os.terms[0].m, 1);
    assert_close(os.terms[0].weight, 2.0, 1e-14, "rank multiplier");
    for k in 0..=10 {
        assert_close(os.terms[0].sf_coef[k], table.cprime[k], 1e-12, "first power");
    }
    // Squares keep the unit constant term: d_{m,0} = (C'_0)^m = 1.
    let os2 = order_stat_coeffs(theta, alpha, 3, 1, 10).unwrap();
    assert_eq!(os2.terms[0].m, 2);
    assert_close(os2.terms[0].sf_coef[0], 1.0, 1e-14, "squared constant term");

    // alpha < 1: sf powers expand with the tilt scaled by m, so the leading
    // coefficient is alpha^(theta m).
    let os3 = order_stat_coeffs(2.0, 0.5, 2, 2, 8).unwrap();
    assert_eq!(os3.regime, Regime::AlphaBelowOne);
    assert_eq!(os3.terms.len(), 2);
    assert_eq!(os3.terms[0].m, 0);
    assert_eq!(os3.terms[0].sf_coef, vec![1.0]);
    assert_eq!(os3.terms[1].m, 1);
    assert_close(os3.terms[1].weight, -2.0, 1e-14, "alternating weight");
    assert_close(os3.terms[1].sf_coef[0], 0.25, 1e-14, "alpha^theta");
    assert_close(os3.terms[1].sf_coef[1], 0.25, 1e-14, "next weight");

    assert!(matches!(
        order_stat_coeffs(1.5, 1.0, 2, 1, 5),
        Err(Error::Regime { .. })
    ));
    assert!(matches!(
        order_stat_coeffs(1.5, 2.0, 2, 3, 5),
        Err(Error::Rank { .. })
    ));
}

#[test]
fn truncation_error_shrinks_monotonically() {
    // Both regimes have positive series terms, so partial sums approach the
    // density from below and the truncation error decays monotonically.
    for (theta, alpha) in [(2.3, 0.45), (2.3, 2.4)] {
        let spec = ModelSpec::gmokw(theta, alpha, 1.2, 1.6,
            BaselineModel::weibull(1.0, 1.5).unwrap(),
        )
        .unwrap();
        let t = spec.quantile(0.5).unwrap();
        let pdf = spec.pdf(t);
        let table = coeffs(theta, alpha, 80).unwrap();
        let s = kw_sf_plain(&spec, t);
        let big_f = 1.0 - s;
        let mut partial = 0.0;
        let mut prev_err = f64::INFINITY;
        for j in 0..=80usize {
            let (factor, term) = if alpha < 1.0 {
                (
                    kw_pdf_plain(&spec, spec.family.b, t),
                    table.a_coef[j] * s.powf(j as f64 + theta - 1.0),
                )
            } else {
                (
                    kw_pdf_plain(&spec, spec.family.b * theta, t),
                    table.c_coef[j] * big_f.powi(j as i32),
                )
            };
            partial += term;
            let err = (factor * partial - pdf).abs();
            assert!(
                err <= prev_err * (1.0 + 1e-12) + 1e-13 * pdf,
                "truncation error rose at j={j}: {err} > {prev_err}"
            );
            prev_err = err;
        }
        assert!(prev_err <= 1e-10 * pdf, "tail error still {prev_err}");
    }
}

#[test]
fn convergence_cap_is_reported() {
    // alpha ~ 0 makes the weight ratio ~ (1 - alpha) ~ 1; near the lower end
    // of the support S ~ 1 as well, so the series cannot reach tolerance
    // within the term cap.
    let spec = ModelSpec::gmokw(1.0, 0.001, 1.0, 1.0,
        BaselineModel::exponential(1.0).unwrap(),
    )
    .unwrap();
    match series_pdf(&spec, 1e-4, 1e-12) {
        Err(Error::Convergence { required, .. }) => assert_eq!(required, 1e-12),
        other => panic!("expected convergence error, got {other:?}"),
    }
}
