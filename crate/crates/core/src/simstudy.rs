//! Simulation harness: draws datasets from known MTP models and aggregates
//! bias, standard-error, coverage, rejection, convergence and AIC-selection
//! rates over replicates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ggdist::{c_offset, sample, Family, GgParams};
use crate::inference::{fit_mtp, FitOptions, FitResult};
use crate::likelihood::{expit, Dataset};
use crate::linalg::{dot, Matrix};

pub const DEFAULT_ALPHA: [f64; 3] = [4.9, -0.4, -1.0];
pub const DEFAULT_BETA: [f64; 3] = [6.3, -0.5, -1.5];
pub const DEFAULT_REPS: usize = 1000;
/// Covariate law: `x1 ~ Normal(10, sd 2)`, `x2 ~ Bernoulli(0.5)`.
pub const X1_MEAN: f64 = 10.0;
pub const X1_SD: f64 = 2.0;
pub const X2_PROB: f64 = 0.5;

/// Shape label of a scenario: the conventional shape for gamma/Weibull, the
/// log-scale variance for lognormal, or `(σ, k)` for GG.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioShape {
    Natural(f64),
    Gg { sigma: f64, k: f64 },
}

/// Generating `(σ, k)`; `k = None` is the lognormal law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrueAux {
    pub sigma: f64,
    pub k: Option<f64>,
}

impl TrueAux {
    fn params(&self, mu: f64) -> Result<GgParams<f64>> {
        match self.k {
            Some(k) => GgParams::new(k, mu, self.sigma),
            None => GgParams::lognormal(mu, self.sigma),
        }
    }

    fn offset(&self) -> Result<f64> {
        match self.k {
            Some(k) => c_offset(self.sigma, k, Family::Gg),
            None => c_offset(self.sigma, 0.0, Family::LogNormal),
        }
    }
}

/// Maps a scenario label to generalized gamma parameters.
///
/// Gamma shape `s` gives `k = σ = s^{-1/2}`; Weibull shape `s` gives `k = 1`,
/// `σ = 1/s`; lognormal variance `v` gives `σ = √v`; GG takes `(σ, k)`.
pub fn scenario_params(family: Family, shape: ScenarioShape) -> Result<TrueAux> {
    let positive = |s: f64| {
        if s.is_finite() && s > 0.0 {
            Ok(s)
        } else {
            Err(Error::Domain(format!("scenario shape must be positive, got {s}")))
        }
    };
    match (family, shape) {
        (Family::Gamma, ScenarioShape::Natural(s)) => {
            let c = positive(s)?.sqrt().recip();
            Ok(TrueAux { sigma: c, k: Some(c) })
        }
        (Family::Weibull, ScenarioShape::Natural(s)) => {
            Ok(TrueAux { sigma: positive(s)?.recip(), k: Some(1.0) })
        }
        (Family::LogNormal, ScenarioShape::Natural(v)) => {
            Ok(TrueAux { sigma: positive(v)?.sqrt(), k: None })
        }
        (Family::Gg, ScenarioShape::Gg { sigma, k }) => {
            positive(sigma)?;
            GgParams::new(k, 0.0, sigma)?;
            Ok(TrueAux { sigma, k: Some(k) })
        }
        (f, s) => Err(Error::Domain(format!("shape {s:?} does not fit family {f}"))),
    }
}

/// One simulation cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SimScenario {
    pub name: String,
    pub family: Family,
    pub shape: ScenarioShape,
    pub n: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub reps: usize,
    pub base_seed: u64,
}

impl SimScenario {
    /// Default truth with the given generating law and size.
    pub fn new(family: Family, shape: ScenarioShape, n: usize) -> Self {
        Self {
            name: format!("{family}"),
            family,
            shape,
            n,
            alpha: DEFAULT_ALPHA.to_vec(),
            beta: DEFAULT_BETA.to_vec(),
            reps: DEFAULT_REPS,
            base_seed: 1,
        }
    }

    pub fn with_beta2(mut self, b2: f64) -> Self {
        self.beta[2] = b2;
        self
    }

    pub fn with_reps(mut self, reps: usize) -> Self {
        self.reps = reps;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.base_seed = seed;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn validate(&self) -> Result<TrueAux> {
        if self.n < 10 {
            return Err(Error::Config(format!("scenario '{}': n must be >= 10", self.name)));
        }
        if self.reps < 1 {
            return Err(Error::Config(format!("scenario '{}': reps must be >= 1", self.name)));
        }
        if self.alpha.len() != 3 || self.beta.len() != 3 {
            return Err(Error::Config(format!(
                "scenario '{}': alpha and beta need 3 entries (intercept, x1, x2)",
                self.name
            )));
        }
        if self.alpha.iter().chain(&self.beta).any(|v| !v.is_finite()) {
            return Err(Error::Config(format!("scenario '{}': non-finite truth", self.name)));
        }
        let aux = scenario_params(self.family, self.shape)
            .map_err(|e| Error::Config(format!("scenario '{}': {e}", self.name)))?;
        aux.offset().map_err(|e| Error::Config(format!("scenario '{}': {e}", self.name)))?;
        Ok(aux)
    }

    /// Generator for replicate `rep`: ChaCha stream `rep` under `base_seed`,
    /// so replicates are independent of execution order.
    pub fn rng(&self, rep: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base_seed);
        rng.set_stream(rep as u64);
        rng
    }
}

/// Draws the replicate's dataset. Both parts use the design `[1, x1, x2]`.
pub fn gen_dataset(s: &SimScenario, rep: usize) -> Result<Dataset<f64>> {
    let aux = s.validate()?;
    let c = aux.offset()?;
    let mut rng = s.rng(rep);
    let x1_law = Normal::new(X1_MEAN, X1_SD).expect("valid normal");
    let mut design = Vec::with_capacity(s.n * 3);
    let mut y = Vec::with_capacity(s.n);
    for _ in 0..s.n {
        let x1 = x1_law.sample(&mut rng);
        let x2 = if rng.random::<f64>() < X2_PROB { 1.0 } else { 0.0 };
        let row = [1.0, x1, x2];
        let pi = expit(dot(&row, &s.alpha));
        let positive = rng.random::<f64>() < pi;
        let v = if positive {
            let mu = dot(&row, &s.beta) - pi.ln() - c;
            sample(&aux.params(mu)?, &mut rng)
        } else {
            0.0
        };
        design.extend_from_slice(&row);
        y.push(v);
    }
    let x = Matrix::from_row_major(s.n, 3, design)?;
    Dataset::new(y, x.clone(), x)
}

/// Outcome of fitting one family to one replicate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyFit {
    pub family: Family,
    pub converged: bool,
    pub error: Option<String>,
    pub names: Vec<String>,
    pub estimates: Vec<f64>,
    pub se: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub p_value: Vec<f64>,
    pub aic: f64,
    pub sigma: f64,
    pub k: f64,
}

impl FamilyFit {
    fn from_fit(fit: &FitResult<f64>) -> Self {
        Self {
            family: fit.family,
            converged: fit.converged,
            error: (!fit.converged).then(|| fit.status.clone()),
            names: fit.names.clone(),
            estimates: fit.estimates.clone(),
            se: fit.se.clone(),
            ci_low: fit.ci_low.clone(),
            ci_high: fit.ci_high.clone(),
            p_value: fit.p_value.clone(),
            aic: fit.aic,
            sigma: fit.sigma(),
            k: fit.k(),
        }
    }

    fn failed(family: Family, e: &Error) -> Self {
        Self {
            family,
            converged: false,
            error: Some(e.to_string()),
            names: Vec::new(),
            estimates: Vec::new(),
            se: Vec::new(),
            ci_low: Vec::new(),
            ci_high: Vec::new(),
            p_value: Vec::new(),
            aic: f64::NAN,
            sigma: f64::NAN,
            k: f64::NAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateRow {
    pub rep: usize,
    pub zero_fraction: f64,
    pub fits: Vec<FamilyFit>,
}

/// Generates replicate `rep` and fits each requested MTP family. Fit
/// failures become non-converged rows.
pub fn run_replicate(
    s: &SimScenario,
    rep: usize,
    families: &[Family],
    opts: &FitOptions<f64>,
) -> Result<ReplicateRow> {
    let d = gen_dataset(s, rep)?;
    let fits = families
        .iter()
        .map(|&f| match fit_mtp(&d, f, opts) {
            Ok(fit) => FamilyFit::from_fit(&fit),
            Err(e) => FamilyFit::failed(f, &e),
        })
        .collect();
    Ok(ReplicateRow { rep, zero_fraction: d.n_zero() as f64 / d.len() as f64, fits })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefSummary {
    pub name: String,
    pub true_value: f64,
    /// `100 (true - mean estimate) / |true|`; `None` when the truth is zero.
    pub rel_mean_bias: Option<f64>,
    pub rel_median_bias: Option<f64>,
    pub mean_ase: Option<f64>,
    pub median_ase: Option<f64>,
    pub coverage: Option<f64>,
    pub rejection_rate: Option<f64>,
    pub n_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySummary {
    pub family: Family,
    pub convergence_rate: f64,
    /// Share of replicates (all compared fits converged) where this family
    /// had the lowest AIC. `None` with fewer than two fitted families or no
    /// eligible replicates.
    pub aic_selection_rate: Option<f64>,
    pub mean_k: Option<f64>,
    pub mean_sigma: Option<f64>,
    pub coefs: Vec<CoefSummary>,
}

impl FamilySummary {
    pub fn coef(&self, name: &str) -> Option<&CoefSummary> {
        self.coefs.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSummary {
    pub scenario: String,
    pub family: Family,
    pub n: usize,
    pub reps: usize,
    pub base_seed: u64,
    pub mean_zero_fraction: f64,
    pub families: Vec<FamilySummary>,
}

impl SimSummary {
    pub fn family(&self, f: Family) -> Option<&FamilySummary> {
        self.families.iter().find(|s| s.family == f)
    }
}

/// `100 (true - estimate) / |true|`: negative when the estimate lies above
/// the truth, whatever the truth's sign.
pub fn percent_relative_bias(true_value: f64, estimate: f64) -> Option<f64> {
    (true_value != 0.0).then(|| 100.0 * (true_value - estimate) / true_value.abs())
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn rate(hits: usize, total: usize) -> Option<f64> {
    (total > 0).then(|| hits as f64 / total as f64)
}

/// Folds replicate rows (in `rep` order) into a summary. Coverage and
/// rejection use converged fits only; rejection means the Wald interval
/// excludes zero.
pub fn summarize(s: &SimScenario, families: &[Family], rows: &[ReplicateRow]) -> SimSummary {
    let truth: Vec<(String, f64)> = s
        .alpha
        .iter()
        .enumerate()
        .map(|(i, &v)| (format!("alpha{i}"), v))
        .chain(s.beta.iter().enumerate().map(|(i, &v)| (format!("beta{i}"), v)))
        .collect();
    let eligible: Vec<&ReplicateRow> =
        rows.iter().filter(|r| r.fits.iter().all(|f| f.converged)).collect();
    let summaries = families
        .iter()
        .enumerate()
        .map(|(fi, &family)| {
            let converged: Vec<&FamilyFit> =
                rows.iter().map(|r| &r.fits[fi]).filter(|f| f.converged).collect();
            let aic_selection_rate = if families.len() < 2 {
                None
            } else {
                let wins = eligible
                    .iter()
                    .filter(|r| {
                        let best = r
                            .fits
                            .iter()
                            .enumerate()
                            .min_by(|a, b| a.1.aic.total_cmp(&b.1.aic))
                            .map(|(i, _)| i);
                        best == Some(fi)
                    })
                    .count();
                rate(wins, eligible.len())
            };
            let coefs = truth
                .iter()
                .map(|(name, tv)| {
                    let idx = converged.first().and_then(|f| f.names.iter().position(|n| n == name));
                    let Some(j) = idx else {
                        return CoefSummary {
                            name: name.clone(),
                            true_value: *tv,
                            rel_mean_bias: None,
                            rel_median_bias: None,
                            mean_ase: None,
                            median_ase: None,
                            coverage: None,
                            rejection_rate: None,
                            n_used: 0,
                        };
                    };
                    let est: Vec<f64> = converged.iter().map(|f| f.estimates[j]).collect();
                    let se: Vec<f64> = converged.iter().map(|f| f.se[j]).collect();
                    let covered = converged
                        .iter()
                        .filter(|f| f.ci_low[j] <= *tv && *tv <= f.ci_high[j])
                        .count();
                    let rejected =
                        converged.iter().filter(|f| f.ci_low[j] > 0.0 || f.ci_high[j] < 0.0).count();
                    CoefSummary {
                        name: name.clone(),
                        true_value: *tv,
                        rel_mean_bias: mean(&est).and_then(|m| percent_relative_bias(*tv, m)),
                        rel_median_bias: median(&est).and_then(|m| percent_relative_bias(*tv, m)),
                        mean_ase: mean(&se),
                        median_ase: median(&se),
                        coverage: rate(covered, converged.len()),
                        rejection_rate: rate(rejected, converged.len()),
                        n_used: converged.len(),
                    }
                })
                .collect();
            let (ks, sigmas): (Vec<f64>, Vec<f64>) = converged.iter().map(|f| (f.k, f.sigma)).unzip();
            FamilySummary {
                family,
                convergence_rate: rate(converged.len(), rows.len()).unwrap_or(0.0),
                aic_selection_rate,
                mean_k: if family == Family::LogNormal { None } else { mean(&ks) },
                mean_sigma: mean(&sigmas),
                coefs,
            }
        })
        .collect();
    SimSummary {
        scenario: s.name.clone(),
        family: s.family,
        n: s.n,
        reps: rows.len(),
        base_seed: s.base_seed,
        mean_zero_fraction: mean(&rows.iter().map(|r| r.zero_fraction).collect::<Vec<_>>())
            .unwrap_or(f64::NAN),
        families: summaries,
    }
}

/// Runs every replicate with default fit options on the ambient rayon pool.
pub fn run_study(s: &SimScenario, families: &[Family]) -> Result<SimSummary> {
    run_study_with(s, families, &FitOptions::default())
}

pub fn run_study_with(
    s: &SimScenario,
    families: &[Family],
    opts: &FitOptions<f64>,
) -> Result<SimSummary> {
    run_study_rows(s, families, opts).map(|rows| summarize(s, families, &rows))
}

/// Replicate rows in `rep` order, computed in parallel.
pub fn run_study_rows(
    s: &SimScenario,
    families: &[Family],
    opts: &FitOptions<f64>,
) -> Result<Vec<ReplicateRow>> {
    s.validate()?;
    if families.is_empty() {
        return Err(Error::Config("no families to fit".into()));
    }
    (0..s.reps).into_par_iter().map(|rep| run_replicate(s, rep, families, opts)).collect()
}
