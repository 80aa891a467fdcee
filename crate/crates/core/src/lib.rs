//! Marginalized two-part regression for semicontinuous outcomes (a point mass
//! at zero plus a positive continuous part) with generalized gamma, gamma,
//! Weibull and lognormal positive parts.
//!
//! The numerical core ([`ggdist`], [`likelihood`], [`optim`], [`inference`])
//! is generic over the floating point type through [`Scalar`]; the
//! simulation harness and the command-line layer work in `f64`. Aliases for
//! the `f64` instantiations are exported at the crate root.

pub mod cli;
pub mod error;
pub mod ggdist;
pub mod inference;
pub mod likelihood;
pub mod linalg;
pub mod optim;
pub mod scalar;
pub mod simstudy;
pub mod special;

pub use error::{Error, Result};
pub use ggdist::{c_offset, log_pdf, mean, moment, sample, variance, Family, Shape, K_EPS};
pub use inference::{
    fit_mtp, fit_tp, select_model, shape_heuristic, vcov_from_hessian, wald_inference,
    FitOptions, FitResult, Model, SelectionReport,
};
pub use likelihood::{
    expit, mtp_location, mtp_loglik, mtp_marginal_mean, tp_loglik, tp_marginal_mean, Dataset,
    MtpParams, TpParams,
};
pub use linalg::Matrix;
pub use optim::{maximize, numeric_gradient, numeric_hessian, Maximum, OptimOptions, OptimStatus};
pub use scalar::Scalar;
pub use simstudy::{gen_dataset, run_replicate, run_study, scenario_params, SimScenario, SimSummary};

pub type GgParams<T = f64> = ggdist::GgParams<T>;
pub type GgParams64 = ggdist::GgParams<f64>;
pub type GgParams32 = ggdist::GgParams<f32>;
pub type Dataset64 = likelihood::Dataset<f64>;
pub type Dataset32 = likelihood::Dataset<f32>;
pub type MtpParams64 = likelihood::MtpParams<f64>;
pub type TpParams64 = likelihood::TpParams<f64>;
pub type FitResult64 = inference::FitResult<f64>;
pub type FitOptions64 = inference::FitOptions<f64>;
pub type Matrix64 = linalg::Matrix<f64>;
