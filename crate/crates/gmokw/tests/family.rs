mod common;

use common::{assert_close, ks_statistic, quantile_panel_integral};
use gmokw::error::Error;
use gmokw::quad::integrate_end_refined;
use gmokw::rng::StreamRng;
use gmokw::{simulate_genesis, BaselineKind, BaselineModel, FamilyParams, ModelSpec, Variant};

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

/// Baseline with parameters drawn from ranges that keep every tail exponent
/// comfortably integrable.
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

fn random_spec(rng: &mut StreamRng, kind: BaselineKind) -> ModelSpec {
    let fam = FamilyParams::new(
        log_uniform(rng, 0.25, 4.0),
        log_uniform(rng, 0.25, 4.0),
        log_uniform(rng, 0.25, 4.0),
        log_uniform(rng, 0.25, 4.0),
    )
    .unwrap();
    ModelSpec::new(Variant::GmoKwG, fam, random_baseline(rng, kind)).unwrap()
}

#[test]
fn fully_reduced_spec_matches_the_baseline() {
    let spec = ModelSpec::bare(BaselineModel::exponential(1.0).unwrap()).unwrap();
    assert_close(spec.pdf(1.0), (-1.0_f64).exp(), 1e-14, "reduced pdf at 1");
    for t in [0.1, 0.5, 1.0, 2.0, 5.0] {
        assert_close(spec.pdf(t), spec.baseline.pdf(t), 1e-13, "pdf vs baseline");
        assert_close(spec.cdf(t), spec.baseline.cdf(t), 1e-13, "cdf vs baseline");
    }
    assert_close(
        spec.quantile(0.5).unwrap(),
        2.0_f64.ln(),
        1e-13,
        "reduced median",
    );
    for t in [0.1, 1.0, 4.0] {
        assert_close(spec.hrf(t).unwrap(), 1.0, 1e-13, "exponential constant hazard");
    }
}

#[test]
fn pdf_at_the_lower_boundary_takes_the_limit_value() {
    // theta alpha^theta g(0) / alpha^{theta+1} = 2 * 0.25 / 0.125 with the
    // Kumaraswamy layer switched off.
    let spec = ModelSpec::gmo(2.0, 0.5, BaselineModel::exponential(1.0).unwrap()).unwrap();
    assert_close(spec.pdf(0.0), 4.0, 1e-13, "boundary pdf limit");
    assert_eq!(spec.cdf(0.0), 0.0, "cdf at lower bound");
}

#[test]
fn boundary_evaluation_never_returns_nan() {
    let mut rng = StreamRng::new(41, 7);
    for kind in ALL_KINDS {
        for _ in 0..5 {
            let spec = random_spec(&mut rng, kind);
            let (lo, hi) = spec.support();
            assert!(!spec.pdf(lo).is_nan(), "{} pdf at lo", spec.baseline.kind.name());
            assert_eq!(spec.cdf(lo), 0.0);
            if hi.is_finite() {
                assert!(!spec.pdf(hi).is_nan(), "{} pdf at hi", spec.baseline.kind.name());
                assert_eq!(spec.cdf(hi), 1.0);
            }
        }
    }
}

#[test]
fn kumaraswamy_square_over_uniform() {
    // a=2, b=1 over the uniform baseline turns G(t)=t into F(t)=t^2.
    let spec = ModelSpec::kw(2.0, 1.0, BaselineModel::power(1.0, 1.0).unwrap()).unwrap();
    assert_close(spec.cdf(0.5), 0.25, 1e-14, "t^2 cdf at 0.5");
    for t in [0.1, 0.3, 0.6, 0.9] {
        assert_close(spec.cdf(t), t * t, 1e-14, "t^2 cdf");
        assert_close(spec.pdf(t), 2.0 * t, 1e-14, "2t pdf");
    }
}

#[test]
fn pdf_integrates_to_one() {
    let mut rng = StreamRng::new(2024, 1);
    for kind in ALL_KINDS {
        for rep in 0..3 {
            let spec = random_spec(&mut rng, kind);
            let mass = quantile_panel_integral(&spec, &|t| spec.pdf(t));
            assert!(
                (mass - 1.0).abs() <= 1e-8,
                "{} rep {rep}: pdf mass {mass:.12} for {:?} / {:?}",
                kind.name(),
                spec.family,
                spec.baseline.params
            );
        }
    }
}

#[test]
fn cdf_matches_the_integrated_pdf() {
    let mut rng = StreamRng::new(77, 3);
    for kind in [BaselineKind::Weibull, BaselineKind::Lomax, BaselineKind::Power] {
        let spec = random_spec(&mut rng, kind);
        let (lo, _) = spec.support();
        for p in [0.2, 0.5, 0.9] {
            let t = spec.quantile(p).unwrap();
            let integral = integrate_end_refined(&|x| spec.pdf(x), lo, t, 1e-13).unwrap();
            assert!(
                (spec.cdf(t) - integral).abs() <= 1e-8,
                "{} cdf {} vs integral {} at p={p}",
                kind.name(),
                spec.cdf(t),
                integral
            );
        }
    }
}

#[test]
fn cdf_sf_complement_and_monotonicity() {
    let mut rng = StreamRng::new(5150, 2);
    for kind in ALL_KINDS {
        let spec = random_spec(&mut rng, kind);
        let mut prev = -1.0;
        for i in 1..200 {
            let t = spec.quantile(i as f64 / 200.0).unwrap();
            let (c, s) = (spec.cdf(t), spec.sf(t));
            assert!((c + s - 1.0).abs() <= 1e-15, "{} cdf+sf at {t}", kind.name());
            assert!(spec.pdf(t) >= 0.0);
            assert!(c >= prev, "{} cdf monotone", kind.name());
            prev = c;
        }
    }
}

#[test]
fn hazard_forms_equal_their_defining_ratios() {
    let mut rng = StreamRng::new(31, 9);
    for kind in ALL_KINDS {
        let spec = random_spec(&mut rng, kind);
        for i in [1, 5, 20, 50, 80, 95, 99] {
            let t = spec.quantile(i as f64 / 100.0).unwrap();
            let (pdf, cdf, sf) = (spec.pdf(t), spec.cdf(t), spec.sf(t));
            let hrf = spec.hrf(t).unwrap();
            let rhrf = spec.rhrf(t).unwrap();
            let chrf = spec.chrf(t).unwrap();
            assert!(
                (hrf - pdf / sf).abs() <= 1e-12 * hrf,
                "{} hrf identity at {t}: {hrf} vs {}",
                kind.name(),
                pdf / sf
            );
            assert!(
                (rhrf - pdf / cdf).abs() <= 1e-12 * rhrf,
                "{} rhrf identity at {t}",
                kind.name()
            );
            assert!(
                (chrf + sf.ln()).abs() <= 1e-12 * chrf.max(1.0),
                "{} chrf identity at {t}",
                kind.name()
            );
        }
    }
}

#[test]
fn hazard_functions_error_outside_the_support() {
    let spec = ModelSpec::bare(BaselineModel::exponential(1.0).unwrap()).unwrap();
    assert!(matches!(spec.hrf(-1.0), Err(Error::OutOfSupport { .. })));
    assert!(matches!(spec.rhrf(0.0), Err(Error::OutOfSupport { .. })));
    assert!(matches!(spec.chrf(-0.5), Err(Error::OutOfSupport { .. })));
    assert_eq!(spec.pdf(-1.0), 0.0);
    assert_eq!(spec.cdf(-1.0), 0.0);
    assert_eq!(spec.sf(-1.0), 1.0);
}

#[test]
fn quantile_roundtrips_through_the_cdf() {
    let probs = [
        1e-6, 1e-4, 0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99, 0.999, 1.0 - 1e-6,
    ];
    let mut rng = StreamRng::new(808, 4);
    for kind in ALL_KINDS {
        for _ in 0..4 {
            let spec = random_spec(&mut rng, kind);
            for &p in &probs {
                let t = spec.quantile(p).unwrap();
                assert!(
                    (spec.cdf(t) - p).abs() <= 1e-10,
                    "{} roundtrip p={p}: t={t}, back {}",
                    kind.name(),
                    spec.cdf(t)
                );
            }
            let (lo, _) = spec.support();
            assert_eq!(spec.quantile(0.0).unwrap(), lo);
        }
    }
}

#[test]
fn quantile_survives_extreme_tilt_parameters() {
    // Small theta and b push the baseline argument absurdly deep into its
    // upper tail; the log-space chain must not saturate.
    let spec = ModelSpec::gmokw(
        0.05,
        0.004,
        0.5,
        0.05,
        BaselineModel::weibull(1.0, 1.5).unwrap(),
    )
    .unwrap();
    for p in [0.9, 0.99, 1.0 - 1e-6] {
        let t = spec.quantile(p).unwrap();
        assert!(t.is_finite(), "finite quantile at p={p}");
        assert!(
            (spec.cdf(t) - p).abs() <= 1e-10,
            "extreme-tilt roundtrip p={p}: t={t:e}, back {}",
            spec.cdf(t)
        );
    }
}

#[test]
fn quantile_rejects_probabilities_outside_the_unit_interval() {
    let spec = ModelSpec::bare(BaselineModel::weibull(1.0, 2.0).unwrap()).unwrap();
    for p in [1.0, 2.0, -0.5, f64::NAN] {
        assert!(matches!(
            spec.quantile(p),
            Err(Error::InvalidProbability { .. })
        ));
    }
}

#[test]
fn sampling_is_deterministic_and_distributed_correctly() {
    let spec = ModelSpec::gmokw(
        1.7,
        0.6,
        1.4,
        0.9,
        BaselineModel::weibull(1.0, 1.5).unwrap(),
    )
    .unwrap();
    let one = spec.sample(1000, 99).unwrap();
    let two = spec.sample(1000, 99).unwrap();
    assert_eq!(one.values, two.values, "same (spec, n, seed) bit-for-bit");
    let other = spec.sample(1000, 100).unwrap();
    assert_ne!(one.values, other.values, "different seed differs");

    let mut draws = spec.sample(100_000, 7).unwrap().values;
    draws.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let d = ks_statistic(&draws, |t| spec.cdf(t));
    assert!(d <= 0.0122, "KS statistic {d} too large");

    let mean_quad = quantile_panel_integral(&spec, &|t| t * spec.pdf(t));
    let n = draws.len() as f64;
    let mean_sample: f64 = draws.iter().sum::<f64>() / n;
    let var: f64 = draws.iter().map(|x| (x - mean_sample).powi(2)).sum::<f64>() / (n - 1.0);
    let tol = 4.0 * (var / n).sqrt();
    assert!(
        (mean_sample - mean_quad).abs() <= tol,
        "sample mean {mean_sample} vs quadrature mean {mean_quad} (tol {tol})"
    );

    assert!(spec.sample(0, 1).is_err(), "n = 0 rejected");
}

#[test]
fn genesis_with_unit_parameters_is_plain_kumaraswamy_sampling() {
    let baseline = BaselineModel::exponential(1.0).unwrap();
    let genesis = simulate_genesis(1, 1.0, 2.0, 3.0, &baseline, 2000, 404).unwrap();
    let direct = ModelSpec::kw(2.0, 3.0, baseline).unwrap().sample(2000, 404).unwrap();
    for (g, d) in genesis.values.iter().zip(&direct.values) {
        assert_close(*g, *d, 1e-9, "degenerate genesis draw");
    }
}

#[test]
fn genesis_min_branch_converges_to_the_closed_form() {
    let baseline = BaselineModel::exponential(0.7).unwrap();
    let spec = ModelSpec::gmokw(2.0, 0.5, 1.3, 0.8, baseline.clone()).unwrap();
    let mut draws = simulate_genesis(2, 0.5, 1.3, 0.8, &baseline, 50_000, 11).unwrap().values;
    draws.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let d = ks_statistic(&draws, |t| spec.cdf(t));
    assert!(d <= 0.0122, "min-branch genesis KS {d}");
}

#[test]
fn genesis_max_branch_converges_to_the_closed_form() {
    let baseline = BaselineModel::weibull(1.0, 1.3).unwrap();
    let spec = ModelSpec::gmokw(3.0, 2.0, 0.9, 1.5, baseline.clone()).unwrap();
    let mut draws = simulate_genesis(3, 2.0, 0.9, 1.5, &baseline, 50_000, 13).unwrap().values;
    draws.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let d = ks_statistic(&draws, |t| spec.cdf(t));
    assert!(d <= 0.0122, "max-branch genesis KS {d}");
}

#[test]
fn genesis_rejects_bad_arguments() {
    let baseline = BaselineModel::exponential(1.0).unwrap();
    assert!(simulate_genesis(0, 0.5, 1.0, 1.0, &baseline, 10, 1).is_err());
    assert!(simulate_genesis(2, -0.5, 1.0, 1.0, &baseline, 10, 1).is_err());
    assert!(simulate_genesis(2, 0.0, 1.0, 1.0, &baseline, 10, 1).is_err());
}

#[test]
fn reduce_picks_the_most_specific_variant_without_snapping() {
    let bl = BaselineModel::weibull(1.0, 2.0).unwrap();
    let mk = |theta: f64, alpha: f64, a: f64, b: f64| {
        ModelSpec::new(
            Variant::GmoKwG,
            FamilyParams::new(theta, alpha, a, b).unwrap(),
            bl.clone(),
        )
        .unwrap()
    };
    assert_eq!(mk(1.0, 0.5, 2.0, 3.0).reduce().variant, Variant::MoKwG);
    assert_eq!(mk(1.0, 1.0, 1.0, 1.0).reduce().variant, Variant::Baseline);
    assert_eq!(mk(1.0, 1.0, 2.0, 3.0).reduce().variant, Variant::KwG);
    assert_eq!(mk(2.0, 0.5, 1.0, 1.0).reduce().variant, Variant::Gmo);
    assert_eq!(mk(1.0, 0.5, 1.0, 1.0).reduce().variant, Variant::Mo);
    assert_eq!(mk(2.0, 0.5, 2.0, 3.0).reduce().variant, Variant::GmoKwG);
    // No tolerance snapping: nearly-1 stays put.
    assert_eq!(mk(1.0000001, 0.5, 2.0, 3.0).reduce().variant, Variant::GmoKwG);
    assert_eq!(mk(1.0000001, 1.0, 1.0, 1.0).reduce().variant, Variant::Gmo);

    let spec = mk(1.0, 0.5, 2.0, 3.0);
    let reduced = spec.reduce();
    for t in [0.2, 0.7, 1.5] {
        assert_eq!(spec.pdf(t), reduced.pdf(t), "reduce must not change values");
    }
}

#[test]
fn variant_constructors_enforce_fixed_slots() {
    let bl = BaselineModel::exponential(1.0).unwrap();
    let fam = FamilyParams::new(2.0, 0.5, 1.0, 1.0).unwrap();
    assert!(ModelSpec::new(Variant::Gmo, fam, bl.clone()).is_ok());
    assert!(ModelSpec::new(Variant::Mo, fam, bl.clone()).is_err(), "theta=2 is not MO");
    assert!(ModelSpec::new(Variant::Baseline, fam, bl.clone()).is_err());

    assert!(FamilyParams::new(0.0, 1.0, 1.0, 1.0).is_err());
    assert!(FamilyParams::new(1.0, -1.0, 1.0, 1.0).is_err());
    assert!(FamilyParams::new(1.0, 1.0, f64::NAN, 1.0).is_err());

    // free-slot assembly round-trips for every variant
    for variant in [
        Variant::GmoKwG,
        Variant::MoKwG,
        Variant::KwG,
        Variant::Gmo,
        Variant::Mo,
        Variant::Baseline,
    ] {
        let free: Vec<f64> = (0..variant.free_family_params().len())
            .map(|i| 1.5 + 0.25 * i as f64)
            .collect();
        let fam = variant.family_from_free(&free).unwrap();
        assert!(variant.check(&fam).is_ok());
        assert_eq!(variant.free_values(&fam), free);
    }
    assert!(Variant::KwG.family_from_free(&[1.0]).is_err(), "wrong arity");
}

// Sub-family closed forms written straight from their own definitions; these
// are the independent routes the unified evaluator must reproduce when the
// corresponding parameters sit at 1.
mod oracle {
    use gmokw::BaselineModel;

    fn pieces(bl: &BaselineModel, t: f64, a: f64) -> (f64, f64, f64) {
        let g = bl.pdf(t);
        let ln_big = bl.ln_cdf(t);
        let one_minus_ga = -(a * ln_big).exp_m1();
        (g, ln_big.exp(), one_minus_ga)
    }

    /// MOKw-G: f = alpha a b g G^{a-1}(1-G^a)^{b-1} / D^2, F = (1 - S)/D.
    pub fn mokw(alpha: f64, a: f64, b: f64, bl: &BaselineModel, t: f64) -> (f64, f64) {
        let (g, big, omga) = pieces(bl, t, a);
        let s = omga.powf(b);
        let d = 1.0 - (1.0 - alpha) * s;
        let pdf = alpha * a * b * g * big.powf(a - 1.0) * omga.powf(b - 1.0) / (d * d);
        (pdf, (1.0 - s) / d)
    }

    /// Kw-G: f = a b g G^{a-1}(1-G^a)^{b-1}, F = 1 - (1-G^a)^b.
    pub fn kw(a: f64, b: f64, bl: &BaselineModel, t: f64) -> (f64, f64) {
        let (g, big, omga) = pieces(bl, t, a);
        let pdf = a * b * g * big.powf(a - 1.0) * omga.powf(b - 1.0);
        (pdf, 1.0 - omga.powf(b))
    }

    /// GMO: sf = [alpha (1-G) / (1 - (1-alpha)(1-G))]^theta and its density.
    pub fn gmo(theta: f64, alpha: f64, bl: &BaselineModel, t: f64) -> (f64, f64) {
        let g = bl.pdf(t);
        let sbar = -bl.ln_cdf(t).exp_m1(); // 1 - G
        let d = 1.0 - (1.0 - alpha) * sbar;
        let pdf = theta * alpha.powf(theta) * g * sbar.powf(theta - 1.0) / d.powf(theta + 1.0);
        (pdf, (alpha * sbar / d).powf(theta))
    }

    /// MO: sf = alpha (1-G) / (1 - (1-alpha)(1-G)).
    pub fn mo(alpha: f64, bl: &BaselineModel, t: f64) -> (f64, f64) {
        let g = bl.pdf(t);
        let sbar = -bl.ln_cdf(t).exp_m1();
        let d = 1.0 - (1.0 - alpha) * sbar;
        (alpha * g / (d * d), alpha * sbar / d)
    }
}

#[test]
fn reduction_identities_match_subfamily_closed_forms() {
    let mut rng = StreamRng::new(6033, 8);
    let kinds = [
        BaselineKind::Exponential,
        BaselineKind::Weibull,
        BaselineKind::Lomax,
        BaselineKind::Power,
        BaselineKind::Gompertz,
    ];
    for rep in 0..20 {
        let kind = kinds[rep % kinds.len()];
        let bl = random_baseline(&mut rng, kind);
        let theta = log_uniform(&mut rng, 0.4, 2.5);
        let alpha = log_uniform(&mut rng, 0.4, 2.5);
        let a = log_uniform(&mut rng, 0.4, 2.5);
        let b = log_uniform(&mut rng, 0.4, 2.5);

        let mokw = ModelSpec::mokw(alpha, a, b, bl.clone()).unwrap();
        let kw = ModelSpec::kw(a, b, bl.clone()).unwrap();
        let gmo = ModelSpec::gmo(theta, alpha, bl.clone()).unwrap();
        let mo = ModelSpec::mo(alpha, bl.clone()).unwrap();
        let bare = ModelSpec::bare(bl.clone()).unwrap();

        for i in 1..=200 {
            let p = 0.005 + 0.99 * (i - 1) as f64 / 199.0;
            let t = mokw.quantile(p).unwrap();

            let (pdf_o, cdf_o) = oracle::mokw(alpha, a, b, &bl, t);
            assert!((mokw.pdf(t) - pdf_o).abs() <= 1e-12 * pdf_o, "MOKw pdf rep {rep} t {t}");
            assert!((mokw.cdf(t) - cdf_o).abs() <= 1e-12 * cdf_o.max(1e-300), "MOKw cdf rep {rep}");

            let (pdf_o, cdf_o) = oracle::kw(a, b, &bl, t);
            assert!((kw.pdf(t) - pdf_o).abs() <= 1e-12 * pdf_o, "Kw pdf rep {rep}");
            assert!((kw.cdf(t) - cdf_o).abs() <= 1e-12 * cdf_o.max(1e-300), "Kw cdf rep {rep}");

            let (pdf_o, sf_o) = oracle::gmo(theta, alpha, &bl, t);
            assert!((gmo.pdf(t) - pdf_o).abs() <= 1e-12 * pdf_o, "GMO pdf rep {rep}");
            assert!((gmo.sf(t) - sf_o).abs() <= 1e-12 * sf_o, "GMO sf rep {rep}");

            let (pdf_o, sf_o) = oracle::mo(alpha, &bl, t);
            assert!((mo.pdf(t) - pdf_o).abs() <= 1e-12 * pdf_o, "MO pdf rep {rep}");
            assert!((mo.sf(t) - sf_o).abs() <= 1e-12 * sf_o, "MO sf rep {rep}");

            assert!(
                (bare.pdf(t) - bl.pdf(t)).abs() <= 1e-12 * bl.pdf(t),
                "baseline pdf rep {rep}"
            );
        }
    }
}
