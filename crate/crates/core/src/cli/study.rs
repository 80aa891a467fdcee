//! Simulation study configuration (TOML) and summary output.
//!
//! ```toml
//! [study]
//! base_seed = 2024
//! reps = 500
//! families = ["gamma", "lognormal"]
//! out = "summary.csv"      # optional, --out overrides
//! workers = 4              # optional, --workers overrides
//! max_iter = 500
//! ci_level = 0.95
//!
//! [[scenario]]
//! name = "gamma_s2"
//! family = "gamma"         # generating law
//! shape = 2.0              # gamma/Weibull shape, lognormal variance
//! n = 1000
//! beta2 = -0.5             # optional; alpha/beta vectors also accepted
//!
//! [[scenario]]
//! name = "gg"
//! family = "gg"
//! sigma = 0.5
//! k = 3.0
//! n = 1000
//! ```

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::ggdist::Family;
use crate::inference::FitOptions;
use crate::simstudy::{run_study_rows, summarize, ScenarioShape, SimScenario, SimSummary};

fn default_seed() -> u64 {
    1
}

fn default_reps() -> usize {
    crate::simstudy::DEFAULT_REPS
}

fn default_max_iter() -> usize {
    500
}

fn default_ci() -> f64 {
    0.95
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    #[serde(default = "default_seed")]
    pub base_seed: u64,
    #[serde(default = "default_reps")]
    pub reps: usize,
    pub families: Vec<Family>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_ci")]
    pub ci_level: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioBlock {
    pub name: String,
    pub family: Family,
    pub shape: Option<f64>,
    pub sigma: Option<f64>,
    pub k: Option<f64>,
    pub n: usize,
    pub alpha: Option<Vec<f64>>,
    pub beta: Option<Vec<f64>>,
    pub beta2: Option<f64>,
    pub reps: Option<usize>,
    pub base_seed: Option<u64>,
}

impl ScenarioBlock {
    /// Resolves the block against study-wide defaults and validates it.
    pub fn to_scenario(&self, reps: usize, seed: u64) -> Result<SimScenario, String> {
        let shape = match (self.family, self.shape, self.sigma, self.k) {
            (Family::Gg, None, Some(sigma), Some(k)) => ScenarioShape::Gg { sigma, k },
            (Family::Gg, _, _, _) => return Err(self.problem("family gg needs 'sigma' and 'k' (and no 'shape')")),
            (_, Some(s), None, None) => ScenarioShape::Natural(s),
            (f, _, _, _) => return Err(self.problem(&format!("family {f} needs 'shape' (and no 'sigma'/'k')"))),
        };
        let mut s = SimScenario::new(self.family, shape, self.n)
            .with_name(self.name.clone())
            .with_reps(self.reps.unwrap_or(reps))
            .with_seed(self.base_seed.unwrap_or(seed));
        if let Some(a) = &self.alpha {
            s.alpha = a.clone();
        }
        if let Some(b) = &self.beta {
            s.beta = b.clone();
        }
        if let Some(b2) = self.beta2 {
            if s.beta.len() != 3 {
                return Err(self.problem("'beta2' needs a 3-entry beta"));
            }
            s = s.with_beta2(b2);
        }
        s.validate().map_err(|e| match e {
            crate::error::Error::Config(m) => m,
            e => self.problem(&e.to_string()),
        })?;
        Ok(s)
    }

    fn problem(&self, msg: &str) -> String {
        format!("scenario '{}': {msg}", self.name)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub study: StudySection,
    #[serde(default)]
    pub scenario: Vec<ScenarioBlock>,
}

/// Command-line overrides for a study.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub workers: Option<usize>,
    pub families: Vec<Family>,
}

/// A validated study ready to run.
#[derive(Debug, Clone)]
pub struct StudyPlan {
    pub scenarios: Vec<SimScenario>,
    pub families: Vec<Family>,
    pub options: FitOptions<f64>,
    pub out: PathBuf,
    pub workers: usize,
}

impl StudyConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies overrides and validates every scenario; all invalid blocks are
    /// reported together.
    pub fn plan(&self, ov: &Overrides) -> Result<StudyPlan, CliError> {
        let st = &self.study;
        if self.scenario.is_empty() {
            return Err(CliError::Config("config defines no [[scenario]] blocks".into()));
        }
        let families = if ov.families.is_empty() { st.families.clone() } else { ov.families.clone() };
        if families.is_empty() {
            return Err(CliError::Config("no families to fit".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        if let Some(dup) = families.iter().find(|f| !seen.insert(**f)) {
            return Err(CliError::Config(format!("family {dup} listed twice")));
        }
        let reps = ov.reps.unwrap_or(st.reps);
        let seed = ov.seed.unwrap_or(st.base_seed);
        let mut problems = Vec::new();
        let mut scenarios = Vec::new();
        let mut names = std::collections::BTreeSet::new();
        for (i, b) in self.scenario.iter().enumerate() {
            if !names.insert(b.name.clone()) {
                problems.push(format!("scenario #{} '{}': duplicate name", i + 1, b.name));
                continue;
            }
            match b.to_scenario(reps, seed) {
                Ok(s) => scenarios.push(s),
                Err(e) => problems.push(format!("block #{}: {e}", i + 1)),
            }
        }
        if !problems.is_empty() {
            return Err(CliError::Config(problems.join("\n")));
        }
        let options = FitOptions { max_iter: st.max_iter, ci_level: st.ci_level, ..FitOptions::default() };
        options.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let out = ov
            .out
            .clone()
            .or_else(|| st.out.clone())
            .ok_or_else(|| CliError::Config("no output path (set study.out or --out)".into()))?;
        let workers = ov
            .workers
            .or(st.workers)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        if workers == 0 {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        Ok(StudyPlan { scenarios, families, options, out, workers })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioTiming {
    pub scenario: String,
    pub base_seed: u64,
    pub reps: usize,
    pub n: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub version: &'static str,
    pub summary: PathBuf,
    pub workers: usize,
    pub families: Vec<Family>,
    pub max_iter: usize,
    pub ci_level: f64,
    pub scenarios: Vec<ScenarioTiming>,
    pub total_seconds: f64,
}

/// Runs every scenario on a pool of `plan.workers` threads. Results do not
/// depend on the worker count.
pub fn run_plan(plan: &StudyPlan) -> Result<(Vec<SimSummary>, RunManifest), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    let start = Instant::now();
    let mut summaries = Vec::with_capacity(plan.scenarios.len());
    let mut timings = Vec::with_capacity(plan.scenarios.len());
    for s in &plan.scenarios {
        let t0 = Instant::now();
        let rows = pool
            .install(|| run_study_rows(s, &plan.families, &plan.options))
            .map_err(|e| CliError::Config(format!("scenario '{}': {e}", s.name)))?;
        summaries.push(summarize(s, &plan.families, &rows));
        timings.push(ScenarioTiming {
            scenario: s.name.clone(),
            base_seed: s.base_seed,
            reps: s.reps,
            n: s.n,
            seconds: t0.elapsed().as_secs_f64(),
        });
    }
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION"),
        summary: plan.out.clone(),
        workers: plan.workers,
        families: plan.families.clone(),
        max_iter: plan.options.max_iter,
        ci_level: plan.options.ci_level,
        scenarios: timings,
        total_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((summaries, manifest))
}

pub const SUMMARY_HEADER: [&str; 20] = [
    "scenario",
    "generating_family",
    "n",
    "reps",
    "base_seed",
    "mean_zero_fraction",
    "fit_family",
    "convergence_rate",
    "aic_selection_rate",
    "mean_sigma",
    "mean_k",
    "coefficient",
    "true_value",
    "rel_mean_bias",
    "rel_median_bias",
    "mean_ase",
    "median_ase",
    "coverage",
    "rejection_rate",
    "n_used",
];

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

/// One row per scenario × fitted family × coefficient.
pub fn write_summary_csv<W: std::io::Write>(w: W, summaries: &[SimSummary]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Input(format!("cannot write summary: {e}"));
    let mut w = csv::Writer::from_writer(w);
    w.write_record(SUMMARY_HEADER).map_err(io)?;
    for s in summaries {
        for f in &s.families {
            for c in &f.coefs {
                w.write_record([
                    s.scenario.clone(),
                    s.family.to_string(),
                    s.n.to_string(),
                    s.reps.to_string(),
                    s.base_seed.to_string(),
                    s.mean_zero_fraction.to_string(),
                    f.family.to_string(),
                    f.convergence_rate.to_string(),
                    opt(f.aic_selection_rate),
                    opt(f.mean_sigma),
                    opt(f.mean_k),
                    c.name.clone(),
                    c.true_value.to_string(),
                    opt(c.rel_mean_bias),
                    opt(c.rel_median_bias),
                    opt(c.mean_ase),
                    opt(c.median_ase),
                    opt(c.coverage),
                    opt(c.rejection_rate),
                    c.n_used.to_string(),
                ])
                .map_err(io)?;
            }
        }
    }
    w.flush().map_err(|e| CliError::Input(format!("cannot write summary: {e}")))
}

/// `summary.csv` -> `summary.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[study]
base_seed = 9
reps = 3
families = ["gamma"]
out = "s.csv"
workers = 1
"#;

    #[test]
    fn parses_and_plans() {
        let cfg = StudyConfig::parse(&format!(
            "{BASE}\n[[scenario]]\nname = \"a\"\nfamily = \"gamma\"\nshape = 2.0\nn = 50\n\n\
             [[scenario]]\nname = \"b\"\nfamily = \"gg\"\nsigma = 0.5\nk = 3.0\nn = 40\nbeta2 = 0.0\n"
        ))
        .unwrap();
        let plan = cfg.plan(&Overrides { reps: Some(2), ..Default::default() }).unwrap();
        assert_eq!(plan.scenarios.len(), 2);
        assert_eq!(plan.scenarios[0].reps, 2);
        assert_eq!(plan.scenarios[1].base_seed, 9);
        assert_eq!(plan.scenarios[1].beta[2], 0.0);
        assert_eq!(plan.workers, 1);
    }

    #[test]
    fn invalid_blocks_are_named_individually() {
        let cfg = StudyConfig::parse(&format!(
            "{BASE}\n[[scenario]]\nname = \"ok\"\nfamily = \"gamma\"\nshape = 2.0\nn = 50\n\n\
             [[scenario]]\nname = \"tiny\"\nfamily = \"gamma\"\nshape = 2.0\nn = 5\n\n\
             [[scenario]]\nname = \"neg\"\nfamily = \"weibull\"\nshape = -1.0\nn = 50\n"
        ))
        .unwrap();
        let err = cfg.plan(&Overrides::default()).unwrap_err().to_string();
        assert!(err.contains("'tiny'") && err.contains("'neg'") && !err.contains("'ok'"), "{err}");
    }

    #[test]
    fn rejects_unknown_keys_and_empty_studies() {
        assert!(StudyConfig::parse("[study]\nfamilies=[\"gamma\"]\nbogus=1\n").is_err());
        let cfg = StudyConfig::parse(BASE).unwrap();
        assert!(matches!(cfg.plan(&Overrides::default()), Err(CliError::Config(_))));
    }
}
