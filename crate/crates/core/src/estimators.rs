//! Two-time correlation estimators over disorder/path ensembles.
//!
//! A path is streamed once and probed at every time `t` and `t + s` of the
//! grid; each registered [`Correlation`] then scores the probe pair. Paths
//! are averaged within a disorder realization first, then across
//! realizations, and both variance components are kept.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{probe_path, Probe, StartLaw, MAX_STREAMED_STEPS};
use crate::error::{domain, Error, Result};
use crate::landscape::{lepage_build, Landscape, PoissonCascade, DEFAULT_LEPAGE_COUNT};
use crate::limits::critical_prediction;
use crate::scales::{solve_scales, ModelParams, Scales};
use crate::seeding::{disorder_seed, path_seed};

/// A two-time observable scored on one path.
pub trait Correlation: Send + Sync {
    fn kind(&self) -> CorrelationKind;

    /// Whether [`Correlation::score`] reads the probe at `c_n (t + s)`.
    fn needs_end_probe(&self) -> bool {
        true
    }

    /// Score in `[0, 1]` of one path, given the probes at `c_n t` and (when
    /// requested) at `c_n (t + s)`.
    fn score(&self, landscape: &Landscape, s: f64, at_t: &Probe, at_ts: Option<&Probe>) -> f64;
}

/// No clock point in `(c_n t, c_n (t+s)]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoJump;

impl Correlation for NoJump {
    fn kind(&self) -> CorrelationKind {
        CorrelationKind::NoJump
    }

    #[inline]
    fn score(&self, _: &Landscape, _: f64, at_t: &Probe, at_ts: Option<&Probe>) -> f64 {
        let end = at_ts.expect("no-jump scoring needs the end probe");
        (at_t.index == end.index) as u8 as f64
    }
}

/// No-jump probability conditional on the state at `c_n t`: by memorylessness
/// of the holding time this is `e^{−s/γ_n(X_n(c_n t))}`. Same mean as
/// [`NoJump`], smaller variance, and paths stop at `c_n t`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConditionalNoJump;

impl Correlation for ConditionalNoJump {
    fn kind(&self) -> CorrelationKind {
        CorrelationKind::ConditionalNoJump
    }

    fn needs_end_probe(&self) -> bool {
        false
    }

    #[inline]
    fn score(&self, landscape: &Landscape, s: f64, at_t: &Probe, _: Option<&Probe>) -> f64 {
        (-s / landscape.rescaled(at_t.state)).exp()
    }
}

/// Hamming distance between the two states below `ρ n / 2`.
#[derive(Debug, Clone, Copy)]
pub struct Overlap {
    pub rho: f64,
}

impl Correlation for Overlap {
    fn kind(&self) -> CorrelationKind {
        CorrelationKind::Overlap { rho: self.rho }
    }

    #[inline]
    fn score(&self, landscape: &Landscape, _: f64, at_t: &Probe, at_ts: Option<&Probe>) -> f64 {
        let end = at_ts.expect("overlap scoring needs the end probe");
        let n = landscape.n() as f64;
        ((at_t.state.dist(end.state) as f64) < self.rho * n / 2.0) as u8 as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorrelationKind {
    NoJump,
    ConditionalNoJump,
    Overlap { rho: f64 },
}

impl CorrelationKind {
    pub fn name(&self) -> &'static str {
        match self {
            CorrelationKind::NoJump => "nojump",
            CorrelationKind::ConditionalNoJump => "nojump_cond",
            CorrelationKind::Overlap { .. } => "overlap",
        }
    }

    pub fn rho(&self) -> Option<f64> {
        match self {
            CorrelationKind::Overlap { rho } => Some(*rho),
            _ => None,
        }
    }
}

impl fmt::Display for CorrelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

type CorrelationFactory = fn(Option<f64>) -> Result<Box<dyn Correlation>>;

/// Name-keyed registry of correlation observables.
pub struct CorrelationRegistry {
    entries: BTreeMap<&'static str, CorrelationFactory>,
}

impl Default for CorrelationRegistry {
    fn default() -> Self {
        let mut r = Self {
            entries: BTreeMap::new(),
        };
        r.register("nojump", |_| Ok(Box::new(NoJump)));
        r.register("nojump_cond", |_| Ok(Box::new(ConditionalNoJump)));
        r.register("overlap", |rho| {
            let rho = rho.ok_or_else(|| Error::Config("overlap needs rho".into()))?;
            if !(rho > 0.0 && rho < 1.0) {
                return domain(format!("rho must lie in (0, 1), got {rho}"));
            }
            Ok(Box::new(Overlap { rho }))
        });
        r
    }
}

impl CorrelationRegistry {
    pub fn register(&mut self, name: &'static str, factory: CorrelationFactory) {
        self.entries.insert(name, factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn build(&self, name: &str, rho: Option<f64>) -> Result<Box<dyn Correlation>> {
        match self.entries.get(name) {
            Some(f) => f(rho),
            None => Err(Error::Config(format!(
                "unknown correlation '{name}' (known: {})",
                self.names().collect::<Vec<_>>().join(", ")
            ))),
        }
    }
}

/// Build a correlation from a [`CorrelationKind`] through the default
/// registry.
pub fn correlation(kind: CorrelationKind) -> Result<Box<dyn Correlation>> {
    CorrelationRegistry::default().build(kind.name(), kind.rho())
}

/// How each disorder realization is generated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LandscapeSpec {
    #[default]
    Direct,
    LePage {
        count: usize,
    },
}

impl LandscapeSpec {
    pub fn lepage() -> Self {
        LandscapeSpec::LePage {
            count: DEFAULT_LEPAGE_COUNT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub params: ModelParams,
    #[serde(default)]
    pub landscape: LandscapeSpec,
    #[serde(default)]
    pub start_law: StartLaw,
    pub paths: u64,
    pub disorders: u64,
    pub seed: u64,
    /// Per-path step budget before a horizon error.
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
}

fn default_max_steps() -> u64 {
    MAX_STREAMED_STEPS
}

/// One landscape realization and, in LePage mode, its cascade.
pub struct Realization {
    pub landscape: Landscape,
    pub cascade: Option<PoissonCascade>,
}

impl Ensemble {
    pub fn new(params: ModelParams, paths: u64, disorders: u64, seed: u64) -> Self {
        Self {
            params,
            landscape: LandscapeSpec::Direct,
            start_law: StartLaw::Uniform,
            paths,
            disorders,
            seed,
            max_steps: MAX_STREAMED_STEPS,
        }
    }

    pub fn with_landscape(mut self, spec: LandscapeSpec) -> Self {
        self.landscape = spec;
        self
    }

    pub fn with_start(mut self, law: StartLaw) -> Self {
        self.start_law = law;
        self
    }

    pub fn validate(&self) -> Result<Scales> {
        self.params.validate()?;
        if self.paths == 0 || self.disorders == 0 {
            return domain("paths and disorders must both be at least 1");
        }
        solve_scales(&self.params)
    }

    /// Landscape of disorder `d`.
    pub fn realization(&self, scales: &Scales, d: u64) -> Result<Realization> {
        let seed = disorder_seed(self.seed, d);
        match self.landscape {
            LandscapeSpec::Direct => Ok(Realization {
                landscape: Landscape::direct(self.params, *scales, seed)?,
                cascade: None,
            }),
            LandscapeSpec::LePage { count } => {
                let (landscape, cascade) = lepage_build(self.params, *scales, count, seed)?;
                Ok(Realization {
                    landscape,
                    cascade: Some(cascade),
                })
            }
        }
    }
}

/// A grid point `(t, s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub t: f64,
    pub s: f64,
}

impl GridPoint {
    pub fn new(t: f64, s: f64) -> Self {
        Self { t, s }
    }

    fn validate(&self) -> Result<()> {
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return domain(format!("t must be finite and nonnegative, got {}", self.t));
        }
        if !(self.s > 0.0 && self.s.is_finite()) {
            return domain(format!("s must be finite and positive, got {}", self.s));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub kind: CorrelationKind,
    pub t: f64,
    pub s: f64,
    pub mean: f64,
    /// Standard error of `mean`, both components combined.
    pub stderr: f64,
    /// Binomial path-sampling component.
    pub stderr_path: f64,
    /// Between-disorder component.
    pub stderr_disorder: f64,
    pub n_paths: u64,
    pub n_disorders: u64,
    /// Success fraction within each disorder realization.
    pub per_disorder: Vec<f64>,
}

/// Sum and sum of squares of path scores within one disorder realization.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ScoreSums {
    pub sum: f64,
    pub sum_sq: f64,
}

impl CorrelationEstimate {
    fn from_sums(kind: CorrelationKind, pt: GridPoint, sums: &[ScoreSums], paths: u64) -> Self {
        let d = sums.len() as f64;
        let p = paths as f64;
        let per_disorder: Vec<f64> = sums.iter().map(|x| x.sum / p).collect();
        let mean = per_disorder.iter().sum::<f64>() / d;
        // within-disorder variance of the path average, averaged over disorders
        let within = sums
            .iter()
            .zip(&per_disorder)
            .map(|(x, q)| {
                let var = (x.sum_sq / p - q * q).max(0.0);
                if paths > 1 {
                    var / (p - 1.0)
                } else {
                    var / p
                }
            })
            .sum::<f64>()
            / d;
        let var_path = within / d;
        let var_total = if sums.len() > 1 {
            per_disorder.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / (d - 1.0) / d
        } else {
            var_path
        };
        let var_disorder = (var_total - var_path).max(0.0);
        Self {
            kind,
            t: pt.t,
            s: pt.s,
            mean,
            stderr: (var_path + var_disorder).sqrt(),
            stderr_path: var_path.sqrt(),
            stderr_disorder: var_disorder.sqrt(),
            n_paths: paths,
            n_disorders: sums.len() as u64,
            per_disorder,
        }
    }
}

/// Score sums of one disorder realization for every (observable, point),
/// observable-major.
pub fn disorder_scores(
    ensemble: &Ensemble,
    landscape: &Landscape,
    d: u64,
    observables: &[Box<dyn Correlation>],
    points: &[GridPoint],
) -> Result<Vec<ScoreSums>> {
    let needs_end = observables.iter().any(|o| o.needs_end_probe());
    let mut times: Vec<f64> = points
        .iter()
        .flat_map(|p| [Some(p.t), needs_end.then_some(p.t + p.s)])
        .flatten()
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let locate = |x: f64| times.partition_point(|&y| y < x);
    let index: Vec<(usize, Option<usize>)> = points
        .iter()
        .map(|p| (locate(p.t), needs_end.then(|| locate(p.t + p.s))))
        .collect();
    let per_path: Vec<Vec<f64>> = (0..ensemble.paths)
        .into_par_iter()
        .map(|p| {
            let seed = path_seed(ensemble.seed, d, p);
            let probes = probe_path(
                landscape,
                ensemble.start_law,
                seed,
                &times,
                ensemble.max_steps,
            )?;
            let mut row = Vec::with_capacity(observables.len() * points.len());
            for o in observables {
                for (pt, &(a, b)) in points.iter().zip(&index) {
                    let end = b.map(|b| &probes[b]);
                    row.push(o.score(landscape, pt.s, &probes[a], end));
                }
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let mut sums = vec![ScoreSums::default(); observables.len() * points.len()];
    for row in &per_path {
        for (acc, &x) in sums.iter_mut().zip(row) {
            acc.sum += x;
            acc.sum_sq += x * x;
        }
    }
    Ok(sums)
}

/// Estimate every observable at every grid point from one ensemble.
///
/// Results are ordered observable-major, then by grid point.
pub fn estimate_grid(
    ensemble: &Ensemble,
    observables: &[Box<dyn Correlation>],
    points: &[GridPoint],
) -> Result<Vec<CorrelationEstimate>> {
    if points.is_empty() {
        return domain("the (t, s) grid is empty");
    }
    if observables.is_empty() {
        return domain("no correlation observable requested");
    }
    for p in points {
        p.validate()?;
    }
    let scales = ensemble.validate()?;
    let per_disorder: Vec<Vec<ScoreSums>> = (0..ensemble.disorders)
        .into_par_iter()
        .map(|d| {
            let real = ensemble.realization(&scales, d)?;
            disorder_scores(ensemble, &real.landscape, d, observables, points)
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(observables.len() * points.len());
    for (oi, o) in observables.iter().enumerate() {
        for (pi, &pt) in points.iter().enumerate() {
            let col = oi * points.len() + pi;
            let sums: Vec<ScoreSums> = per_disorder.iter().map(|row| row[col]).collect();
            out.push(CorrelationEstimate::from_sums(
                o.kind(),
                pt,
                &sums,
                ensemble.paths,
            ));
        }
    }
    Ok(out)
}

pub fn estimate_nojump(ensemble: &Ensemble, t: f64, s: f64) -> Result<CorrelationEstimate> {
    let obs: Vec<Box<dyn Correlation>> = vec![Box::new(NoJump)];
    Ok(estimate_grid(ensemble, &obs, &[GridPoint::new(t, s)])?.remove(0))
}

pub fn estimate_overlap(
    ensemble: &Ensemble,
    t: f64,
    s: f64,
    rho: f64,
) -> Result<CorrelationEstimate> {
    let obs = vec![correlation(CorrelationKind::Overlap { rho })?];
    Ok(estimate_grid(ensemble, &obs, &[GridPoint::new(t, s)])?.remove(0))
}

/// `√n · Ĉ_n(t,s)` next to its critical-line prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalEstimate {
    pub estimate: CorrelationEstimate,
    pub scaled_mean: f64,
    pub scaled_stderr: f64,
    pub prediction: f64,
}

impl CriticalEstimate {
    pub fn ratio(&self) -> f64 {
        self.scaled_mean / self.prediction
    }
}

pub fn critical_sweep(ensemble: &Ensemble, t: f64, s: f64) -> Result<CriticalEstimate> {
    critical_sweep_with(ensemble, Box::new(NoJump), t, s)
}

/// [`critical_sweep`] with a chosen no-jump estimator.
pub fn critical_sweep_with(
    ensemble: &Ensemble,
    observable: Box<dyn Correlation>,
    t: f64,
    s: f64,
) -> Result<CriticalEstimate> {
    let theta = match ensemble.params.theta {
        Some(theta) => theta,
        None => return domain("critical sweep needs critical-mode parameters (theta)"),
    };
    let estimate = estimate_grid(ensemble, &[observable], &[GridPoint::new(t, s)])?.remove(0);
    let root_n = (ensemble.params.n as f64).sqrt();
    Ok(CriticalEstimate {
        scaled_mean: root_n * estimate.mean,
        scaled_stderr: root_n * estimate.stderr,
        prediction: critical_prediction(theta, ensemble.params.beta, t, s)?,
        estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scales::beta_c;

    #[test]
    fn registry_builds_by_name() {
        let r = CorrelationRegistry::default();
        assert_eq!(
            r.names().collect::<Vec<_>>(),
            vec!["nojump", "nojump_cond", "overlap"]
        );
        assert!(r.build("overlap", None).is_err());
        assert!(r.build("overlap", Some(1.5)).is_err());
        assert!(r.build("magnetization", None).is_err());
        let o = r.build("overlap", Some(0.5)).unwrap();
        assert_eq!(o.kind(), CorrelationKind::Overlap { rho: 0.5 });
    }

    #[test]
    fn flat_landscape_matches_exponential_holding() {
        let p = ModelParams::intermediate(10, 0.5, 0.0);
        let e = Ensemble::new(p, 4000, 2, 11);
        let c_n = solve_scales(&p).unwrap().c_n;
        let est = estimate_nojump(&e, 0.0, 1.0 / c_n).unwrap();
        assert!(
            (est.mean - (-1.0f64).exp()).abs() < 3.0 * est.stderr,
            "{est:?}"
        );
    }

    #[test]
    fn inclusion_and_monotonicity_hold_per_disorder() {
        let p =
            ModelParams::with_alpha(12, crate::scales::ScaleKind::Intermediate { eps: 0.5 }, 0.6)
                .unwrap();
        let e = Ensemble::new(p, 200, 3, 5);
        let obs = vec![
            correlation(CorrelationKind::NoJump).unwrap(),
            correlation(CorrelationKind::Overlap { rho: 0.5 }).unwrap(),
        ];
        let pts = [
            GridPoint::new(1.0, 0.5),
            GridPoint::new(1.0, 1.0),
            GridPoint::new(1.0, 3.0),
        ];
        let est = estimate_grid(&e, &obs, &pts).unwrap();
        for i in 0..3 {
            for d in 0..3 {
                assert!(est[3 + i].per_disorder[d] >= est[i].per_disorder[d]);
            }
        }
        for d in 0..3 {
            assert!(est[0].per_disorder[d] >= est[1].per_disorder[d]);
            assert!(est[1].per_disorder[d] >= est[2].per_disorder[d]);
        }
        for x in &est {
            assert!((0.0..=1.0).contains(&x.mean) && x.stderr >= 0.0);
        }
    }

    #[test]
    fn conditional_estimator_agrees_with_indicator() {
        let p =
            ModelParams::with_alpha(12, crate::scales::ScaleKind::Intermediate { eps: 0.5 }, 0.7)
                .unwrap();
        let e = Ensemble::new(p, 2000, 2, 8);
        let obs = vec![
            correlation(CorrelationKind::NoJump).unwrap(),
            correlation(CorrelationKind::ConditionalNoJump).unwrap(),
        ];
        let est = estimate_grid(&e, &obs, &[GridPoint::new(1.0, 1.0)]).unwrap();
        let se = (est[0].stderr.powi(2) + est[1].stderr.powi(2)).sqrt();
        assert!((est[0].mean - est[1].mean).abs() < 4.0 * se);
        assert!(est[1].stderr_path < est[0].stderr_path);
    }

    #[test]
    fn estimates_are_reproducible() {
        let p = ModelParams::intermediate(10, 0.5, 1.5 * beta_c(0.5).unwrap());
        let e = Ensemble::new(p, 50, 4, 77);
        let a = estimate_nojump(&e, 1.0, 1.0).unwrap();
        let b = estimate_nojump(&e, 1.0, 1.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = ModelParams::intermediate(10, 0.5, 1.0);
        let e = Ensemble::new(p, 10, 1, 1);
        assert!(estimate_nojump(&e, 1.0, 0.0).is_err());
        assert!(estimate_nojump(&e, -1.0, 1.0).is_err());
        assert!(critical_sweep(&e, 1.0, 1.0).is_err());
        assert!(estimate_overlap(&e, 1.0, 1.0, 0.0).is_err());
        let mut z = e.clone();
        z.paths = 0;
        assert!(estimate_nojump(&z, 1.0, 1.0).is_err());
    }
}
