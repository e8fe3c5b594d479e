//! Generalized Marshall-Olkin Kumaraswamy-G (GMOKw-G) distribution family.
//!
//! A baseline distribution G is pushed through two tilts: the Kumaraswamy
//! construction F_Kw = 1 - (1 - G^a)^b and the generalized Marshall-Olkin
//! survival tilt sf = [alpha * S / (1 - (1-alpha) * S)]^theta with
//! S = (1 - G^a)^b. The crate evaluates the family and its nested
//! sub-families exactly, samples by inversion, expands pdf/sf in series,
//! computes moments and entropy, analyses density/hazard shape, and fits
//! parameters by maximum likelihood.
//!
//! The crate is `no_std` (with `alloc`); the companion CLI crate carries IO.

#![no_std]
#![deny(unsafe_code)]
// Validation compares in the negated form on purpose: !(x > 0.0) rejects NaN
// along with the out-of-range values, where x <= 0.0 would wave it through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// The test harness links std, whose inherent f64 methods shadow the
// num_traits::Float imports the no_std build needs.
#![cfg_attr(test, allow(unused_imports))]

extern crate alloc;

pub mod baseline;
pub mod error;
pub mod family;
pub mod fit;
pub mod moments;
mod optim;
pub mod quad;
pub mod rng;
pub mod series;
pub mod shape;
pub mod special;

pub use baseline::{BaselineKind, BaselineModel, GurvichHook};
pub use error::{Error, Result};
pub use family::{simulate_genesis, FamilyParams, ModelSpec, SampleBatch, Variant};
pub use fit::{
    aic, better_outcome, build_spec, fit_from_outcomes, fit_mle, is_nested, loglik, lr_test,
    nested_start, observed_info, param_names, run_start, score, spec_params, std_errors_ci,
    Dataset, FitConfig, FitResult, InfoMethod, LRTestResult, StartOutcome, StartsSummary,
    LOGLIK_FLOOR,
};
pub use moments::{
    incomplete_beta, mgf, mgf_series, mom_estimate, mom_expectation, mom_expectation_quadrature,
    mom_residual, moment_quadrature, moment_series, pwm_kw, renyi, EntropyMethod, EntropyQuery,
    MomEstimate, MomentRoute, PWMQuery,
};
pub use shape::{
    asymptote, check_lr_order, critical_points, dlog_hrf, dlog_pdf, AsymptoteReport,
    CriticalPoint, Endpoint, ExtremumKind, OrderingChecks, OrderingVerdict, ShapeCurve,
};
pub use special::{chisq_sf, gammainc_upper_reg, inv_norm_cdf, norm_cdf};


