//! JSON reports for `fit` and `select`.
//!
//! Floats are written in shortest round-trip form (at most 17 significant
//! digits); non-finite values become `null`.

use serde::Serialize;

use super::data::TableData;
use crate::ggdist::Family;
use crate::inference::{wald_row, FitResult, Model, SelectionReport};

pub const EFFECT_INTERPRETATION: &str = "multiplicative effect on the unconditional marginal mean";

#[derive(Debug, Clone, Serialize)]
pub struct DataSummary {
    pub outcome: String,
    pub binary_covars: Vec<String>,
    pub cont_covars: Vec<String>,
    pub n_obs: usize,
    pub n_zero: usize,
    /// Column means subtracted by `--center`; empty when not centered.
    pub centers: std::collections::BTreeMap<String, f64>,
}

impl DataSummary {
    pub fn new(t: &TableData) -> Self {
        Self {
            outcome: t.outcome.clone(),
            binary_covars: t.binary_covars.clone(),
            cont_covars: t.cont_covars.clone(),
            n_obs: t.dataset.len(),
            n_zero: t.dataset.n_zero(),
            centers: t.centers.iter().cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamRow {
    pub name: String,
    /// `binary`, `continuous` or `shape`.
    pub part: &'static str,
    pub term: String,
    pub estimate: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub z: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EffectRow {
    pub term: String,
    pub exp_estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub interpretation: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub version: &'static str,
    pub model: Model,
    pub family: Family,
    pub data: DataSummary,
    pub converged: bool,
    pub status: String,
    pub n_iter: usize,
    pub grad_inf_norm: f64,
    pub grad_tol: f64,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub ci_level: f64,
    pub parameters: Vec<ParamRow>,
    /// Exponentiated continuous-part slopes; MTP fits only.
    pub marginal_effects: Vec<EffectRow>,
    /// Covariance of the estimates in `parameters` order.
    pub vcov: Vec<Vec<f64>>,
}

fn term_names(t: &TableData, fit: &FitResult<f64>) -> Vec<(&'static str, String)> {
    let with_intercept = |cols: &[String]| {
        std::iter::once("intercept".to_string()).chain(cols.iter().cloned()).collect::<Vec<_>>()
    };
    let mut out: Vec<(&'static str, String)> =
        with_intercept(&t.binary_covars).into_iter().map(|n| ("binary", n)).collect();
    out.extend(with_intercept(&t.cont_covars).into_iter().map(|n| ("continuous", n)));
    out.extend(fit.names[fit.n_alpha + fit.n_coef..].iter().map(|n| ("shape", n.clone())));
    out
}

impl FitReport {
    pub fn new(t: &TableData, fit: &FitResult<f64>) -> Self {
        let terms = term_names(t, fit);
        let parameters: Vec<ParamRow> = fit
            .names
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let w = wald_row(fit.estimates[i], fit.se[i], fit.ci_level);
                ParamRow {
                    name: name.clone(),
                    part: terms[i].0,
                    term: terms[i].1.clone(),
                    estimate: fit.estimates[i],
                    se: fit.se[i],
                    ci_low: fit.ci_low[i],
                    ci_high: fit.ci_high[i],
                    z: w.z,
                    p_value: fit.p_value[i],
                }
            })
            .collect();
        let marginal_effects = match fit.model {
            Model::Mtp => parameters[fit.n_alpha + 1..fit.n_alpha + fit.n_coef]
                .iter()
                .map(|p| EffectRow {
                    term: p.term.clone(),
                    exp_estimate: p.estimate.exp(),
                    ci_low: p.ci_low.exp(),
                    ci_high: p.ci_high.exp(),
                    interpretation: format!(
                        "exp({}) is the {EFFECT_INTERPRETATION} per unit increase in {}",
                        p.name, p.term
                    ),
                })
                .collect(),
            Model::Tp => Vec::new(),
        };
        Self {
            version: env!("CARGO_PKG_VERSION"),
            model: fit.model,
            family: fit.family,
            data: DataSummary::new(t),
            converged: fit.converged,
            status: fit.status.clone(),
            n_iter: fit.n_iter,
            grad_inf_norm: fit.grad_inf_norm,
            grad_tol: fit.grad_tol,
            loglik: fit.loglik,
            aic: fit.aic,
            bic: fit.bic,
            ci_level: fit.ci_level,
            parameters,
            marginal_effects,
            vcov: fit.vcov.rows_iter().map(|r| r.to_vec()).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyRow {
    pub family: Family,
    pub converged: bool,
    pub status: String,
    pub loglik: Option<f64>,
    pub aic: Option<f64>,
    pub bic: Option<f64>,
    pub n_params: Option<usize>,
    pub sigma: Option<f64>,
    pub k: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HeuristicRow {
    pub k_hat: Option<f64>,
    pub sigma_hat: Option<f64>,
    pub z_k_zero: Option<f64>,
    pub z_k_one: Option<f64>,
    pub z_k_sigma: Option<f64>,
    pub suggestion: Option<Family>,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectReport {
    pub version: &'static str,
    pub data: DataSummary,
    pub families: Vec<FamilyRow>,
    /// Converged families by increasing AIC.
    pub ranking_aic: Vec<Family>,
    /// Converged families by increasing BIC.
    pub ranking_bic: Vec<Family>,
    pub best_aic: Option<Family>,
    pub heuristic: HeuristicRow,
}

impl SelectReport {
    pub fn new(t: &TableData, rep: &SelectionReport<f64>) -> Self {
        let families: Vec<FamilyRow> = rep
            .entries
            .iter()
            .map(|e| match &e.fit {
                Ok(f) => {
                    let ok = f.converged;
                    FamilyRow {
                        family: e.family,
                        converged: ok,
                        status: f.status.clone(),
                        loglik: ok.then_some(f.loglik),
                        aic: ok.then_some(f.aic),
                        bic: ok.then_some(f.bic),
                        n_params: Some(f.n_params()),
                        sigma: ok.then(|| f.sigma()),
                        k: (ok && e.family != Family::LogNormal).then(|| f.k()),
                    }
                }
                Err(err) => FamilyRow {
                    family: e.family,
                    converged: false,
                    status: err.to_string(),
                    loglik: None,
                    aic: None,
                    bic: None,
                    n_params: None,
                    sigma: None,
                    k: None,
                },
            })
            .collect();
        let mut by_bic: Vec<(f64, Family)> =
            families.iter().filter_map(|r| r.bic.map(|b| (b, r.family))).collect();
        by_bic.sort_by(|a, b| a.0.total_cmp(&b.0));
        let h = &rep.heuristic;
        Self {
            version: env!("CARGO_PKG_VERSION"),
            data: DataSummary::new(t),
            families,
            ranking_aic: rep.ranking.clone(),
            ranking_bic: by_bic.into_iter().map(|(_, f)| f).collect(),
            best_aic: rep.best(),
            heuristic: HeuristicRow {
                k_hat: h.k_hat,
                sigma_hat: h.sigma_hat,
                z_k_zero: h.z_k_zero,
                z_k_one: h.z_k_one,
                z_k_sigma: h.z_k_sigma,
                suggestion: h.suggestion,
                note: h.note.clone(),
            },
        }
    }
}
