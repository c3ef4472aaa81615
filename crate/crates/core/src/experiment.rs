//! Config-driven experiments.
//!
//! An [`ExperimentConfig`] is read from TOML, checked by the [`Experiment`]
//! it names, and run into a table of [`ResultRow`]s with a manifest that
//! records everything needed to recompute it.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{chain_diagnostics, StartLaw};
use crate::error::{domain, Error, Result};
use crate::estimators::{
    estimate_grid, CorrelationEstimate, CorrelationKind, CorrelationRegistry, Ensemble, GridPoint,
    LandscapeSpec,
};
use crate::landscape::DEFAULT_LEPAGE_COUNT;
use crate::limits::{aging_prediction, critical_prediction, levy_tail, stationary_corr, LevyTail};
use crate::scales::{solve_scales, ModelParams, ScaleKind, Scales};
use crate::seeding::path_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridEntry {
    pub t: f64,
    pub s: f64,
    #[serde(default)]
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LandscapeChoice {
    #[default]
    Direct,
    Lepage,
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub n: u32,
    /// Intermediate scale `a_n = 2^{εn}`.
    #[serde(default)]
    pub eps: Option<f64>,
    /// Extreme scale `a_n = ε̄ 2^n`.
    #[serde(default)]
    pub eps_bar: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    /// Chooses `β = β_c(ε) / alpha_target`.
    #[serde(default)]
    pub alpha_target: Option<f64>,
    /// Critical-line offset; implies `β = β_c(ε)`.
    #[serde(default)]
    pub theta: Option<f64>,
    pub paths: u64,
    pub disorders: u64,
    pub seed: u64,
    #[serde(default)]
    pub start_law: Option<StartLaw>,
    #[serde(default)]
    pub landscape: Option<LandscapeChoice>,
    #[serde(default)]
    pub lepage_count: Option<usize>,
    /// Observables by registry name; each experiment has a default.
    #[serde(default)]
    pub correlations: Option<Vec<String>>,
    /// Overlap radius for grid points that do not set their own.
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub max_steps: Option<u64>,
    #[serde(default)]
    pub grid: Vec<GridEntry>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Resolve the model parameters.
    pub fn params(&self) -> Result<ModelParams> {
        resolve_params(
            self.n,
            self.eps,
            self.eps_bar,
            self.beta,
            self.alpha_target,
            self.theta,
        )
    }

    pub fn grid_points(&self) -> Vec<GridPoint> {
        self.grid.iter().map(|g| GridPoint::new(g.t, g.s)).collect()
    }

    fn landscape_spec(&self, default: LandscapeChoice) -> LandscapeSpec {
        match self.landscape.unwrap_or(default) {
            LandscapeChoice::Direct => LandscapeSpec::Direct,
            LandscapeChoice::Lepage => LandscapeSpec::LePage {
                count: self.lepage_count.unwrap_or(DEFAULT_LEPAGE_COUNT),
            },
        }
    }
}

/// Model parameters from a scale (`eps` or `eps_bar`) and exactly one of
/// `beta`, `alpha_target` or `theta`.
pub fn resolve_params(
    n: u32,
    eps: Option<f64>,
    eps_bar: Option<f64>,
    beta: Option<f64>,
    alpha_target: Option<f64>,
    theta: Option<f64>,
) -> Result<ModelParams> {
    let kind = match (eps, eps_bar) {
        (Some(eps), None) => ScaleKind::Intermediate { eps },
        (None, Some(eps_bar)) => ScaleKind::Extreme { eps_bar },
        (Some(_), Some(_)) => return cfg("set either 'eps' or 'eps_bar', not both"),
        (None, None) => return cfg("set 'eps' (intermediate) or 'eps_bar' (extreme)"),
    };
    let given = [beta.is_some(), alpha_target.is_some(), theta.is_some()];
    if given.iter().filter(|&&g| g).count() != 1 {
        return cfg("set exactly one of 'beta', 'alpha_target' or 'theta'");
    }
    let p = if let Some(theta) = theta {
        match kind {
            ScaleKind::Intermediate { eps } => ModelParams::critical(n, eps, theta)?,
            ScaleKind::Extreme { .. } => {
                return cfg("'theta' is only defined on intermediate scales ('eps')")
            }
        }
    } else if let Some(alpha) = alpha_target {
        ModelParams::with_alpha(n, kind, alpha)?
    } else {
        ModelParams {
            n,
            beta: beta.unwrap_or(0.0),
            scale_kind: kind,
            theta: None,
        }
    };
    p.validate()?;
    Ok(p)
}

fn cfg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

/// One output row; the column set is fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub kind: String,
    pub n: u32,
    /// `ε` on intermediate scales, `ε̄` on extreme scales.
    pub eps: f64,
    pub beta: f64,
    pub theta: Option<f64>,
    pub t: f64,
    pub s: f64,
    pub rho: Option<f64>,
    pub mean: f64,
    pub stderr_path: f64,
    pub stderr_disorder: f64,
    pub n_paths: u64,
    pub n_disorders: u64,
    pub prediction: Option<f64>,
    pub prediction_kind: String,
}

/// Everything needed to recompute a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub crate_version: String,
    pub experiment: String,
    pub config: ExperimentConfig,
    pub params: ModelParams,
    pub scales: Scales,
    pub ensemble: Ensemble,
    pub correlations: Vec<CorrelationKind>,
    pub seeding: String,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub manifest: Manifest,
    pub rows: Vec<ResultRow>,
}

/// Resolved inputs handed to an experiment.
pub struct Plan {
    pub config: ExperimentConfig,
    pub params: ModelParams,
    pub scales: Scales,
    pub ensemble: Ensemble,
    pub correlations: Vec<CorrelationKind>,
}

/// A named experiment: validates its configuration and produces rows.
pub trait Experiment: Send + Sync {
    fn name(&self) -> &'static str;

    /// Observables used when the config does not list any.
    fn default_correlations(&self) -> Vec<&'static str> {
        vec!["nojump"]
    }

    fn default_landscape(&self) -> LandscapeChoice {
        LandscapeChoice::Direct
    }

    fn default_start(&self) -> StartLaw {
        StartLaw::Uniform
    }

    /// Experiment-specific checks on top of the common ones.
    fn check(&self, plan: &Plan) -> Result<()>;

    fn run(&self, plan: &Plan) -> Result<Vec<ResultRow>>;
}

fn row(plan: &Plan, est: &CorrelationEstimate, prediction: Option<f64>, pk: &str) -> ResultRow {
    let p = &plan.params;
    ResultRow {
        kind: est.kind.name().to_string(),
        n: p.n,
        eps: match p.scale_kind {
            ScaleKind::Intermediate { eps } => eps,
            ScaleKind::Extreme { eps_bar } => eps_bar,
        },
        beta: p.beta,
        theta: p.theta,
        t: est.t,
        s: est.s,
        rho: est.kind.rho(),
        mean: est.mean,
        stderr_path: est.stderr_path,
        stderr_disorder: est.stderr_disorder,
        n_paths: est.n_paths,
        n_disorders: est.n_disorders,
        prediction,
        prediction_kind: pk.to_string(),
    }
}

/// Run the ensemble for every observable and grid point. Overlap radii may
/// differ between grid points, so points are grouped by radius.
fn correlation_rows<F>(plan: &Plan, predict: F) -> Result<Vec<ResultRow>>
where
    F: Fn(&CorrelationEstimate) -> Result<(Option<f64>, String)>,
{
    let registry = CorrelationRegistry::default();
    let mut rows = Vec::new();
    for kind in &plan.correlations {
        let groups: Vec<(Option<f64>, Vec<GridPoint>)> = match kind {
            CorrelationKind::Overlap { rho } => {
                let mut by_rho: BTreeMap<u64, (f64, Vec<GridPoint>)> = BTreeMap::new();
                for g in &plan.config.grid {
                    let r = g.rho.unwrap_or(*rho);
                    by_rho
                        .entry(r.to_bits())
                        .or_insert((r, Vec::new()))
                        .1
                        .push(GridPoint::new(g.t, g.s));
                }
                by_rho
                    .into_values()
                    .map(|(r, pts)| (Some(r), pts))
                    .collect()
            }
            _ => vec![(None, plan.config.grid_points())],
        };
        for (rho, pts) in groups {
            let obs = vec![registry.build(kind.name(), rho)?];
            for est in estimate_grid(&plan.ensemble, &obs, &pts)? {
                let (pred, pk) = predict(&est)?;
                rows.push(row(plan, &est, pred, &pk));
            }
        }
    }
    Ok(rows)
}

struct AgingSweep;

impl Experiment for AgingSweep {
    fn name(&self) -> &'static str {
        "aging_sweep"
    }

    fn default_correlations(&self) -> Vec<&'static str> {
        vec!["nojump", "overlap"]
    }

    fn check(&self, plan: &Plan) -> Result<()> {
        if plan.params.scale_kind.is_extreme() {
            return cfg("aging_sweep runs on intermediate scales; set 'eps' (use extreme_crossover for 'eps_bar')");
        }
        if !(plan.scales.alpha_eps < 1.0) || plan.params.theta.is_some() {
            return cfg(format!(
                "aging_sweep needs beta > beta_c(eps), i.e. alpha < 1 (alpha = {})",
                plan.scales.alpha_eps
            ));
        }
        Ok(())
    }

    fn run(&self, plan: &Plan) -> Result<Vec<ResultRow>> {
        let alpha = plan.scales.alpha_eps;
        correlation_rows(plan, |e| {
            Ok((Some(aging_prediction(alpha, e.t, e.s)?), "asl".into()))
        })
    }
}

struct HighTemp;

impl Experiment for HighTemp {
    fn name(&self) -> &'static str {
        "high_temp"
    }

    fn check(&self, plan: &Plan) -> Result<()> {
        if !(plan.scales.alpha_eps > 1.0) || plan.params.theta.is_some() {
            return cfg(format!(
                "high_temp needs beta < beta_c(eps), i.e. alpha > 1 (alpha = {})",
                plan.scales.alpha_eps
            ));
        }
        Ok(())
    }

    fn run(&self, plan: &Plan) -> Result<Vec<ResultRow>> {
        correlation_rows(plan, |_| Ok((Some(0.0), "zero".into())))
    }
}

struct CriticalLine;

impl Experiment for CriticalLine {
    fn name(&self) -> &'static str {
        "critical_line"
    }

    fn check(&self, plan: &Plan) -> Result<()> {
        if plan.params.theta.is_none() {
            return cfg("critical_line needs 'theta' (beta is then set to beta_c(eps))");
        }
        Ok(())
    }

    /// The prediction column holds `critical_prediction / √n`, the value
    /// that `mean` itself should approach.
    fn run(&self, plan: &Plan) -> Result<Vec<ResultRow>> {
        let theta = plan.params.theta.unwrap_or(0.0);
        let root_n = (plan.params.n as f64).sqrt();
        let beta = plan.params.beta;
        correlation_rows(plan, |e| {
            Ok((
                Some(critical_prediction(theta, beta, e.t, e.s)? / root_n),
                "critical_over_sqrt_n".into(),
            ))
        })
    }
}

struct ExtremeCrossover;

impl Experiment for ExtremeCrossover {
    fn name(&self) -> &'static str {
        "extreme_crossover"
    }

    fn default_landscape(&self) -> LandscapeChoice {
        LandscapeChoice::Lepage
    }

    fn check(&self, plan: &Plan) -> Result<()> {
        if !plan.params.scale_kind.is_extreme() {
            return cfg("extreme_crossover needs an extreme scale; set 'eps_bar'");
        }
        if !(plan.scales.alpha_eps < 1.0) {
            return cfg("extreme_crossover needs beta > beta_c(1)");
        }
        Ok(())
    }

    fn run(&self, plan: &Plan) -> Result<Vec<ResultRow>> {
        let alpha = plan.scales.alpha_eps;
        correlation_rows(plan, |e| {
            Ok((Some(aging_prediction(alpha, e.t, e.s)?), "asl".into()))
        })
    }
}

struct Stationary;

impl Experiment for Stationary {
    fn name(&self) -> &'static str {
        "stationary"
    }

    fn default_landscape(&self) -> LandscapeChoice {
        LandscapeChoice::Lepage
    }

    fn default_start(&self) -> StartLaw {
        StartLaw::Gibbs
    }

    fn check(&self, plan: &Plan) -> Result<()> {
        if !plan.params.scale_kind.is_extreme() {
            return cfg("stationary needs an extreme scale; set 'eps_bar'");
        }
        if !matches!(plan.ensemble.landscape, LandscapeSpec::LePage { .. }) {
            return cfg("stationary compares against the cascade of each realization; set landscape = \"lepage\"");
        }
        if plan.ensemble.start_law != StartLaw::Gibbs {
            return cfg("stationary needs start_law = \"gibbs\"");
        }
        Ok(())
    }

    /// The prediction is the disorder average of `C^sta(s)` over the
    /// cascades of the realizations actually simulated.
    fn run(&self, plan: &Plan) -> Result<Vec<ResultRow>> {
        let cascades: Vec<_> = (0..plan.ensemble.disorders)
            .map(|d| {
                plan.ensemble
                    .realization(&plan.scales, d)?
                    .cascade
                    .ok_or_else(|| Error::Unsupported("realization without cascade".into()))
            })
            .collect::<Result<_>>()?;
        correlation_rows(plan, |e| {
            let mut acc = 0.0;
            for c in &cascades {
                acc += stationary_corr(c, e.s)?.value;
            }
            Ok((
                Some(acc / cascades.len() as f64),
                "stationary_cascade".into(),
            ))
        })
    }
}

/// Lattice and chain-level Lévy diagnostics; each grid point is read as
/// `(t, u)` with `u` in the `s` column.
struct Diagnostics;

impl Experiment for Diagnostics {
    fn name(&self) -> &'static str {
        "diagnostics"
    }

    fn default_correlations(&self) -> Vec<&'static str> {
        Vec::new()
    }

    fn check(&self, plan: &Plan) -> Result<()> {
        if plan.params.is_flat() {
            return cfg("diagnostics need beta > 0");
        }
        for g in &plan.config.grid {
            if !(g.t > 0.0) {
                return cfg(format!("diagnostics need t > 0, got {}", g.t));
            }
        }
        Ok(())
    }

    fn run(&self, plan: &Plan) -> Result<Vec<ResultRow>> {
        let e = &plan.ensemble;
        let alpha = plan.scales.alpha_eps;
        let nu = |u: f64| -> Result<Option<f64>> {
            if alpha > 0.0 && alpha <= 1.0 {
                Ok(Some(levy_tail(&LevyTail::Intermediate { alpha }, u)?.value))
            } else {
                Ok(None)
            }
        };
        let n = plan.params.n as f64;
        let mut rows = Vec::new();
        for g in &plan.config.grid {
            let (t, u) = (g.t, g.s);
            let per: Vec<[f64; 3]> = (0..e.disorders)
                .into_par_iter()
                .map(|d| {
                    let real = e.realization(&plan.scales, d)?;
                    let l = &real.landscape;
                    let lattice_nu = l.lattice_nu(u)?.value;
                    let lattice_sigma = n * l.lattice_sigma(u)?.value;
                    let mut chain = 0.0;
                    for p in 0..e.paths {
                        chain +=
                            chain_diagnostics(l, e.start_law, path_seed(e.seed, d, p), t, u)?.nu;
                    }
                    Ok([lattice_nu, lattice_sigma, chain / e.paths as f64])
                })
                .collect::<Result<_>>()?;
            let preds = [nu(u)?, nu(2.0 * u)?, nu(u)?.map(|v| t * v)];
            let names = ["lattice_nu", "lattice_n_sigma", "chain_nu"];
            let pk = ["levy_tail", "levy_tail_2u", "t_levy_tail"];
            for k in 0..3 {
                let vals: Vec<f64> = per.iter().map(|r| r[k]).collect();
                let dn = vals.len() as f64;
                let mean = vals.iter().sum::<f64>() / dn;
                let se = if vals.len() > 1 {
                    (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (dn - 1.0) / dn).sqrt()
                } else {
                    0.0
                };
                let p = &plan.params;
                rows.push(ResultRow {
                    kind: names[k].into(),
                    n: p.n,
                    eps: match p.scale_kind {
                        ScaleKind::Intermediate { eps } => eps,
                        ScaleKind::Extreme { eps_bar } => eps_bar,
                    },
                    beta: p.beta,
                    theta: p.theta,
                    t,
                    s: u,
                    rho: None,
                    mean,
                    stderr_path: 0.0,
                    stderr_disorder: se,
                    n_paths: if k == 2 { e.paths } else { 0 },
                    n_disorders: e.disorders,
                    prediction: preds[k],
                    prediction_kind: pk[k].into(),
                });
            }
        }
        Ok(rows)
    }
}

/// Name-keyed registry of experiments.
pub struct Registry {
    entries: BTreeMap<&'static str, Box<dyn Experiment>>,
}

impl Default for Registry {
    fn default() -> Self {
        let mut r = Self {
            entries: BTreeMap::new(),
        };
        r.register(Box::new(AgingSweep));
        r.register(Box::new(HighTemp));
        r.register(Box::new(CriticalLine));
        r.register(Box::new(ExtremeCrossover));
        r.register(Box::new(Stationary));
        r.register(Box::new(Diagnostics));
        r
    }
}

impl Registry {
    pub fn register(&mut self, e: Box<dyn Experiment>) {
        self.entries.insert(e.name(), e);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn Experiment> {
        self.entries.get(name).map(|e| e.as_ref()).ok_or_else(|| {
            Error::Config(format!(
                "unknown experiment '{name}' (known: {})",
                self.names().join(", ")
            ))
        })
    }

    /// Validate a config against the experiment it names.
    pub fn plan(&self, config: &ExperimentConfig) -> Result<(&dyn Experiment, Plan)> {
        let exp = self.get(&config.experiment)?;
        if config.grid.is_empty() {
            return cfg("the grid is empty; add at least one [[grid]] entry with t and s");
        }
        if config.paths == 0 || config.disorders == 0 {
            return cfg("'paths' and 'disorders' must both be at least 1");
        }
        for g in &config.grid {
            if !(g.t >= 0.0 && g.t.is_finite() && g.s > 0.0 && g.s.is_finite()) {
                return cfg(format!(
                    "grid point needs t >= 0 and s > 0, got t={}, s={}",
                    g.t, g.s
                ));
            }
        }
        let params = config.params()?;
        let scales = solve_scales(&params)?;
        let mut ensemble = Ensemble::new(params, config.paths, config.disorders, config.seed)
            .with_landscape(config.landscape_spec(exp.default_landscape()))
            .with_start(config.start_law.unwrap_or(exp.default_start()));
        if let Some(m) = config.max_steps {
            ensemble.max_steps = m;
        }
        let names: Vec<String> = match &config.correlations {
            Some(list) => list.clone(),
            None => exp
                .default_correlations()
                .into_iter()
                .map(String::from)
                .collect(),
        };
        let registry = CorrelationRegistry::default();
        let mut correlations = Vec::new();
        for name in &names {
            let rho = if name == "overlap" {
                let r = config
                    .rho
                    .or_else(|| config.grid.iter().find_map(|g| g.rho));
                Some(r.ok_or_else(|| {
                    Error::Config("overlap needs 'rho' (top level or per grid point)".into())
                })?)
            } else {
                None
            };
            correlations.push(registry.build(name, rho)?.kind());
        }
        for g in &config.grid {
            if let Some(r) = g.rho {
                if !(r > 0.0 && r < 1.0) {
                    return domain(format!("rho must lie in (0, 1), got {r}"));
                }
            }
        }
        let plan = Plan {
            config: config.clone(),
            params,
            scales,
            ensemble,
            correlations,
        };
        exp.check(&plan)?;
        Ok((exp, plan))
    }
}

/// Worker count from the config, else `REMDYN_THREADS`, else rayon's default.
pub fn thread_count(config: &ExperimentConfig) -> Result<Option<usize>> {
    if let Some(t) = config.threads {
        return if t == 0 {
            cfg("'threads' must be at least 1")
        } else {
            Ok(Some(t))
        };
    }
    match std::env::var("REMDYN_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(Some(t)),
            _ => cfg(format!(
                "REMDYN_THREADS must be a positive integer, got '{v}'"
            )),
        },
        Err(_) => Ok(None),
    }
}

/// Run `f` on a pool with the configured worker count.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultTable> {
    let registry = Registry::default();
    let (exp, plan) = registry.plan(config)?;
    let threads = thread_count(config)?;
    let rows = with_threads(threads, || exp.run(&plan))??;
    let manifest = Manifest {
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        experiment: exp.name().to_string(),
        config: plan.config.clone(),
        params: plan.params,
        scales: plan.scales,
        ensemble: plan.ensemble.clone(),
        correlations: plan.correlations.clone(),
        seeding: "disorder d: keyed(keyed(seed, tag(\"disorder\")), d); path p of d: keyed(keyed(keyed(seed, tag(\"path\")), d), p)".into(),
        rows: rows.len(),
    };
    Ok(ResultTable { manifest, rows })
}

pub fn write_csv<W: std::io::Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Write the table in the configured format. CSV output gets its manifest
/// in a sibling `<path>.manifest.json`.
pub fn write_table(table: &ResultTable, path: &Path, format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            write_csv(&table.rows, std::fs::File::create(path)?)?;
            let mut m = path.as_os_str().to_owned();
            m.push(".manifest.json");
            std::fs::write(
                PathBuf::from(m),
                serde_json::to_string_pretty(&table.manifest)?,
            )?;
        }
        OutputFormat::Json => {
            std::fs::write(path, serde_json::to_string_pretty(table)?)?;
        }
    }
    Ok(())
}
