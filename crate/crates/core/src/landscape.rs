//! The quenched random environment `τ_n(x) = exp(−β H_n(x))` over the
//! hypercube, with `H_n(x) ~ N(0, n)` independent across vertices.
//!
//! Two representations are available:
//!
//! * **Direct**: a pure function of `(seed, vertex)`. The Gaussian for a vertex
//!   is the inverse normal CDF of one keyed 64-bit uniform, so no state is
//!   stored and trajectories touching ≪ 2^n vertices stay cheap.
//! * **LePage**: the ordered landscape built from partial sums `Γ_k` of unit
//!   exponentials, `γ_n(x^{(k)}) = c_n^{-1} G_n^{-1}(Γ_k / Γ_{N+1})`, placed on a
//!   uniformly random labelling of the vertices. This couples the finite-n
//!   landscape to the Poisson cascade `γ_k = Γ_k^{-1/α}`.

use std::collections::HashMap;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scales::{ModelParams, Scales};
use crate::seeding::{keyed, stream, unit_open};
use crate::special::normal_quantile_fast;

/// Largest dimension for which the whole landscape may be enumerated.
pub const EXACT_MAX_N: u32 = 26;
/// Default number of sampled vertices for lattice averages beyond [`EXACT_MAX_N`].
pub const DEFAULT_LATTICE_SAMPLES: u64 = 10_000_000;
/// Default number of exact order statistics in a truncated LePage landscape.
pub const DEFAULT_LEPAGE_COUNT: usize = 100_000;

const CHUNK: u64 = 1 << 16;
const SIGMA_MATERIALIZE_MAX_N: u32 = 22;
const SIGMA_SAMPLES: u64 = 100_000;

/// A vertex of `{−1, 1}^n`; bit `i` set encodes spin `+1` at coordinate `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vertex(pub u64);

impl Vertex {
    #[inline]
    pub fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn flip(self, coord: u32) -> Vertex {
        Vertex(self.0 ^ (1u64 << coord))
    }

    /// Hamming distance, `½ Σ |x_i − x'_i|`.
    #[inline]
    pub fn dist(self, other: Vertex) -> u32 {
        (self.0 ^ other.0).count_ones()
    }

    /// Parity class: `true` when at even distance from the all-ones vertex.
    pub fn even_class(self, n: u32) -> bool {
        (n - self.0.count_ones()).is_multiple_of(2)
    }

    pub fn is_valid(self, n: u32) -> bool {
        n >= 64 || self.0 >> n == 0
    }

    pub fn spins(self, n: u32) -> Vec<i8> {
        (0..n)
            .map(|i| if self.0 >> i & 1 == 1 { 1 } else { -1 })
            .collect()
    }
}

/// Vertices are 64-bit words, so landscapes stop at n = 63.
pub const MAX_N: u32 = 63;

fn check_dimension(n: u32) -> Result<()> {
    if n > MAX_N {
        return domain(format!("landscapes support n <= {MAX_N}, got {n}"));
    }
    Ok(())
}

pub(crate) fn vertex_mask(n: u32) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Which representation a landscape uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LandscapeMode {
    Direct { seed: u64 },
    LePage { seed: u64, truncated: bool },
}

enum Field {
    Direct {
        seed: u64,
    },
    Dense {
        gammas: Vec<f64>,
    },
    Truncated {
        top: HashMap<u64, f64>,
        floor: f64,
        seed: u64,
    },
}

/// Cumulative Gibbs weights `τ(x) / Σ τ` over all vertices.
pub struct GibbsTable {
    cumulative: Vec<f64>,
}

impl GibbsTable {
    pub fn sample(&self, uniform: f64) -> Vertex {
        let total = *self.cumulative.last().expect("non-empty table");
        let target = uniform * total;
        let idx = self.cumulative.partition_point(|&c| c <= target);
        Vertex(idx.min(self.cumulative.len() - 1) as u64)
    }

    pub fn weight(&self, x: Vertex) -> f64 {
        let i = x.0 as usize;
        let total = *self.cumulative.last().unwrap();
        let prev = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
        (self.cumulative[i] - prev) / total
    }
}

pub struct Landscape {
    params: ModelParams,
    scales: Scales,
    beta_sqrt_n: f64,
    mode: LandscapeMode,
    field: Field,
    gibbs: OnceLock<GibbsTable>,
}

impl std::fmt::Debug for Landscape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Landscape")
            .field("params", &self.params)
            .field("mode", &self.mode)
            .finish_non_exhaustive()
    }
}

impl Landscape {
    pub fn direct(params: ModelParams, scales: Scales, seed: u64) -> Result<Self> {
        params.validate()?;
        check_dimension(params.n)?;
        Ok(Self {
            params,
            scales,
            beta_sqrt_n: params.beta_sqrt_n(),
            mode: LandscapeMode::Direct { seed },
            field: Field::Direct { seed },
            gibbs: OnceLock::new(),
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn scales(&self) -> &Scales {
        &self.scales
    }

    pub fn mode(&self) -> LandscapeMode {
        self.mode
    }

    pub fn n(&self) -> u32 {
        self.params.n
    }

    pub fn num_vertices(&self) -> u64 {
        1u64 << self.params.n
    }

    /// Whether every vertex value can be enumerated (exact lattice sums,
    /// Gibbs start).
    pub fn is_enumerable(&self) -> bool {
        match self.field {
            Field::Dense { .. } => true,
            Field::Direct { .. } => self.params.n <= EXACT_MAX_N,
            Field::Truncated { .. } => false,
        }
    }

    /// Standard normal variate behind vertex `x` in direct mode.
    #[inline]
    fn direct_gaussian(seed: u64, x: Vertex) -> f64 {
        normal_quantile_fast(unit_open(keyed(seed, x.0)))
    }

    /// Rescaled landscape variable `γ_n(x) = τ_n(x) / c_n`.
    #[inline]
    pub fn rescaled(&self, x: Vertex) -> f64 {
        match &self.field {
            Field::Direct { seed } => {
                (self.beta_sqrt_n * Self::direct_gaussian(*seed, x) - self.scales.log_c_n).exp()
            }
            Field::Dense { gammas } => gammas[x.0 as usize],
            Field::Truncated { top, floor, seed } => match top.get(&x.0) {
                Some(&g) => g,
                None => {
                    let u = floor + (1.0 - floor) * unit_open(keyed(*seed, x.0));
                    self.gamma_from_tail(u)
                }
            },
        }
    }

    /// Boltzmann weight `τ_n(x)`.
    #[inline]
    pub fn energy(&self, x: Vertex) -> f64 {
        match &self.field {
            Field::Direct { seed } => (self.beta_sqrt_n * Self::direct_gaussian(*seed, x)).exp(),
            _ => self.rescaled(x) * self.scales.c_n,
        }
    }

    /// `H_n(x)` in direct mode (`τ = exp(−β H)`); `None` for other modes.
    pub fn hamiltonian(&self, x: Vertex) -> Option<f64> {
        match &self.field {
            Field::Direct { seed } => {
                Some(-(self.params.n as f64).sqrt() * Self::direct_gaussian(*seed, x))
            }
            _ => None,
        }
    }

    /// `c_n^{-1} G_n^{-1}(u)`, with `G_n(v) = P(τ_n(x) > v)`.
    #[inline]
    fn gamma_from_tail(&self, u: f64) -> f64 {
        (-self.beta_sqrt_n * normal_quantile_fast(u) - self.scales.log_c_n).exp()
    }

    /// All rescaled values indexed by vertex bits.
    pub fn materialize(&self) -> Result<Vec<f64>> {
        if !self.is_enumerable() {
            return Err(Error::Unsupported(format!(
                "cannot enumerate a landscape with n = {} in this mode",
                self.params.n
            )));
        }
        if let Field::Dense { gammas } = &self.field {
            return Ok(gammas.clone());
        }
        Ok((0..self.num_vertices())
            .into_par_iter()
            .map(|i| self.rescaled(Vertex(i)))
            .collect())
    }

    /// Gibbs measure table, built on first use.
    pub fn gibbs_table(&self) -> Result<&GibbsTable> {
        if let Some(t) = self.gibbs.get() {
            return Ok(t);
        }
        let values = self.materialize().map_err(|_| {
            Error::Unsupported(format!(
                "Gibbs start needs an enumerable landscape (n <= {EXACT_MAX_N} or LePage mode)"
            ))
        })?;
        let mut acc = 0.0;
        let cumulative = values
            .into_iter()
            .map(|g| {
                acc += g;
                acc
            })
            .collect();
        Ok(self.gibbs.get_or_init(|| GibbsTable { cumulative }))
    }

    /// Average of `f(γ_n(x))` over the vertex set: exact when enumerable,
    /// otherwise estimated from `samples` keyed vertex draws.
    pub fn lattice_mean<F>(&self, f: F, samples: u64) -> LatticeValue
    where
        F: Fn(f64) -> f64 + Sync,
    {
        if self.is_enumerable() {
            let total = self.num_vertices();
            let chunks = total.div_ceil(CHUNK);
            let partial: Vec<f64> = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let lo = c * CHUNK;
                    let hi = (lo + CHUNK).min(total);
                    (lo..hi).map(|i| f(self.rescaled(Vertex(i)))).sum::<f64>()
                })
                .collect();
            LatticeValue {
                value: partial.iter().sum::<f64>() / total as f64,
                stderr: 0.0,
                exact: true,
                samples: total,
            }
        } else {
            let mask = vertex_mask(self.params.n);
            let key = keyed(self.sample_key(), 0x5A3F);
            let chunks = samples.div_ceil(CHUNK);
            let partial: Vec<(f64, f64)> = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let lo = c * CHUNK;
                    let hi = (lo + CHUNK).min(samples);
                    (lo..hi).fold((0.0, 0.0), |(s, s2), i| {
                        let v = f(self.rescaled(Vertex(keyed(key, i) & mask)));
                        (s + v, s2 + v * v)
                    })
                })
                .collect();
            let (s, s2) = partial
                .iter()
                .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
            let m = samples as f64;
            let mean = s / m;
            let var = (s2 / m - mean * mean).max(0.0) * m / (m - 1.0).max(1.0);
            LatticeValue {
                value: mean,
                stderr: (var / m).sqrt(),
                exact: false,
                samples,
            }
        }
    }

    fn sample_key(&self) -> u64 {
        match self.mode {
            LandscapeMode::Direct { seed } | LandscapeMode::LePage { seed, .. } => seed,
        }
    }

    /// `ν_n(u,∞) = (a_n/2^n) Σ_x exp(−u/γ_n(x))`.
    pub fn lattice_nu(&self, u: f64) -> Result<LatticeValue> {
        if !(u > 0.0) {
            return domain(format!("lattice_nu needs u > 0, got {u}"));
        }
        Ok(self
            .lattice_mean(|g| (-u / g).exp(), DEFAULT_LATTICE_SAMPLES)
            .scaled(self.scales.a_n))
    }

    /// `σ_n(u,∞) = (a_n/2^n) Σ_{x,x'} p²_n(x,x') e^{−u/γ_n(x)} e^{−u/γ_n(x')}`.
    ///
    /// The two-step kernel is enumerated as the `n` self-returns (weight
    /// `1/n²` each) plus the `n(n−1)` ordered pairs of distinct flips.
    pub fn lattice_sigma(&self, u: f64) -> Result<LatticeValue> {
        if !(u > 0.0) {
            return domain(format!("lattice_sigma needs u > 0, got {u}"));
        }
        let n = self.params.n;
        let weight = |g: f64| (-u / g).exp();
        let a_n = self.scales.a_n;
        if self.is_enumerable() && n <= SIGMA_MATERIALIZE_MAX_N {
            let w: Vec<f64> = self.materialize()?.into_iter().map(weight).collect();
            let total = w.len() as u64;
            let chunks = total.div_ceil(CHUNK);
            let partial: Vec<f64> = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let lo = c * CHUNK;
                    let hi = (lo + CHUNK).min(total);
                    (lo..hi)
                        .map(|x| {
                            let wx = w[x as usize];
                            wx * two_step_average(n, x, |y| w[y as usize], wx)
                        })
                        .sum::<f64>()
                })
                .collect();
            let value = a_n * partial.iter().sum::<f64>() / total as f64;
            return Ok(LatticeValue {
                value,
                stderr: 0.0,
                exact: true,
                samples: total,
            });
        }
        // sampled centre vertices, neighbours evaluated on the fly
        let mask = vertex_mask(n);
        let key = keyed(self.sample_key(), 0x51C4);
        let per: Vec<f64> = (0..SIGMA_SAMPLES)
            .into_par_iter()
            .map(|i| {
                let x = keyed(key, i) & mask;
                let wx = weight(self.rescaled(Vertex(x)));
                wx * two_step_average(n, x, |y| weight(self.rescaled(Vertex(y))), wx)
            })
            .collect();
        let m = per.len() as f64;
        let mean = per.iter().sum::<f64>() / m;
        let var = per.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
        Ok(LatticeValue {
            value: a_n * mean,
            stderr: a_n * (var / m).sqrt(),
            exact: false,
            samples: SIGMA_SAMPLES,
        })
    }

    /// `m_n = (a_n/2^n) Σ_x g_1(γ_n(x))`.
    pub fn lattice_m(&self) -> LatticeValue {
        self.lattice_mean(|g| g_delta(1.0, g), DEFAULT_LATTICE_SAMPLES)
            .scaled(self.scales.a_n)
    }

    /// `λ_{δ,n}` (with `g_δ`) or `λ̄_{δ,n}` (with `f_δ`).
    pub fn lattice_lambda(&self, delta: f64, which: LambdaKind) -> Result<LatticeValue> {
        if !(delta > 0.0) {
            return domain(format!("lattice_lambda needs delta > 0, got {delta}"));
        }
        let v = match which {
            LambdaKind::A3 => self.lattice_mean(|g| g_delta(delta, g), DEFAULT_LATTICE_SAMPLES),
            LambdaKind::A3Prime => {
                self.lattice_mean(|g| f_delta(delta, g), DEFAULT_LATTICE_SAMPLES)
            }
        };
        Ok(v.scaled(self.scales.a_n))
    }
}

/// `Σ_y p²_n(x,y) w(y)` for the simple random walk on the n-cube.
fn two_step_average<W: Fn(u64) -> f64>(n: u32, x: u64, w: W, wx: f64) -> f64 {
    let nf = n as f64;
    let mut pairs = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            pairs += w(x ^ (1 << i) ^ (1 << j));
        }
    }
    wx / nf + 2.0 * pairs / (nf * nf)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaKind {
    /// `λ_{δ,n}`, built from `g_δ`.
    A3,
    /// `λ̄_{δ,n}`, built from `f_δ`.
    A3Prime,
}

/// A lattice average together with its sampling error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeValue {
    pub value: f64,
    pub stderr: f64,
    pub exact: bool,
    pub samples: u64,
}

impl LatticeValue {
    fn scaled(self, k: f64) -> Self {
        Self {
            value: self.value * k,
            stderr: self.stderr * k,
            ..self
        }
    }
}

/// `g_δ(u) = u (1 − e^{−δ/u})`.
pub fn g_delta(delta: f64, u: f64) -> f64 {
    -u * (-delta / u).exp_m1()
}

/// `f_δ(u) = u² (1 − e^{−δ/u}) − δ u e^{−δ/u}`, evaluated by series when
/// `δ/u` is small to avoid cancellation.
pub fn f_delta(delta: f64, u: f64) -> f64 {
    let x = delta / u;
    let bracket = if x < 1e-3 {
        // Σ_{k≥2} (−1)^k (k−1) x^k / k!
        x * x * (0.5 - x / 3.0 + x * x / 8.0 - x * x * x / 30.0)
    } else {
        -(-x).exp_m1() - x * (-x).exp()
    };
    u * u * bracket
}

/// Marks of a Poisson random measure with mean measure `μ(x,∞) = x^{−α}`,
/// in decreasing order: `γ_k = Γ_k^{−1/α}` with `Γ_k` partial sums of unit
/// exponentials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonCascade {
    pub partial_sums: Vec<f64>,
    pub marks: Vec<f64>,
    pub alpha: f64,
}

impl PoissonCascade {
    pub fn from_partial_sums(alpha: f64, partial_sums: Vec<f64>) -> Result<Self> {
        if !(alpha > 0.0) {
            return domain(format!("cascade index must be positive, got {alpha}"));
        }
        if partial_sums.is_empty() {
            return domain("cascade needs at least one mark");
        }
        if partial_sums[0] <= 0.0 || partial_sums.windows(2).any(|w| w[1] <= w[0]) {
            return domain("cascade partial sums must be positive and strictly increasing");
        }
        let marks = partial_sums.iter().map(|g| g.powf(-1.0 / alpha)).collect();
        Ok(Self {
            partial_sums,
            marks,
            alpha,
        })
    }

    /// Single- or few-mark cascades given directly by their marks.
    pub fn from_marks(alpha: f64, marks: Vec<f64>) -> Result<Self> {
        let sums = marks.iter().map(|m| m.powf(-alpha)).collect();
        Self::from_partial_sums(alpha, sums)
    }

    pub fn sample<R: Rng + ?Sized>(alpha: f64, count: usize, rng: &mut R) -> Result<Self> {
        let mut acc = 0.0;
        let sums = (0..count)
            .map(|_| {
                acc += sample_exp(rng);
                acc
            })
            .collect();
        Self::from_partial_sums(alpha, sums)
    }

    pub fn count(&self) -> usize {
        self.marks.len()
    }
}

#[inline]
fn sample_exp<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let e: f64 = Exp1.sample(rng);
    if e > 0.0 {
        e
    } else {
        f64::MIN_POSITIVE
    }
}

/// Build a LePage landscape and the cascade it is coupled to.
///
/// For `n <= 26` every vertex receives its exact order statistic. Beyond
/// that only the top `count` values are exact; every other vertex draws a
/// keyed uniform above `Γ_count / Γ_{N+1}` and is mapped through
/// `G_n^{-1}`. The returned cascade always has `count` marks and shares its
/// first partial sums with the landscape.
pub fn lepage_build(
    params: ModelParams,
    scales: Scales,
    count: usize,
    seed: u64,
) -> Result<(Landscape, PoissonCascade)> {
    params.validate()?;
    check_dimension(params.n)?;
    if !params.scale_kind.is_extreme() {
        return domain("LePage landscapes are defined on extreme scales");
    }
    let alpha = scales.alpha_eps;
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!(
            "LePage construction needs 0 < alpha < 1, got {alpha}"
        ));
    }
    if count == 0 {
        return domain("cascade count must be positive");
    }
    let n = params.n;
    let bsn = params.beta_sqrt_n();
    let log_c = scales.log_c_n;
    let to_gamma = |u: f64| (-bsn * normal_quantile_fast(u) - log_c).exp();
    let mut exp_rng = stream(seed, "lepage-exponentials");

    if n <= EXACT_MAX_N {
        let big_n = 1usize << n;
        let mut labels: Vec<u32> = (0..big_n as u32).collect();
        labels.shuffle(&mut stream(seed, "lepage-labels"));
        // Γ_1..Γ_{N+1}, plus any extra cascade depth, from one stream
        let depth = count.max(big_n + 1);
        let mut sums = Vec::with_capacity(depth);
        let mut acc = 0.0;
        for _ in 0..depth {
            acc += sample_exp(&mut exp_rng);
            sums.push(acc);
        }
        let total = sums[big_n];
        let mut gammas = vec![0.0; big_n];
        for (k, &label) in labels.iter().enumerate() {
            gammas[label as usize] = to_gamma(sums[k] / total);
        }
        sums.truncate(count);
        let cascade = PoissonCascade::from_partial_sums(alpha, sums)?;
        let landscape = Landscape {
            params,
            scales,
            beta_sqrt_n: bsn,
            mode: LandscapeMode::LePage {
                seed,
                truncated: false,
            },
            field: Field::Dense { gammas },
            gibbs: OnceLock::new(),
        };
        return Ok((landscape, cascade));
    }

    let big_n = 2f64.powi(n as i32);
    if count as f64 >= big_n {
        return Err(Error::Unsupported(format!(
            "n = {n} needs a truncated cascade (count < 2^n)"
        )));
    }
    let mut acc = 0.0;
    let sums: Vec<f64> = (0..count)
        .map(|_| {
            acc += sample_exp(&mut exp_rng);
            acc
        })
        .collect();
    let rest = Gamma::new(big_n + 1.0 - count as f64, 1.0)
        .map_err(|e| Error::Numerical(e.to_string()))?
        .sample(&mut exp_rng);
    let total = acc + rest;
    let mask = vertex_mask(n);
    let mut label_rng = stream(seed, "lepage-labels");
    let mut top = HashMap::with_capacity(count);
    for &s in &sums {
        loop {
            let v = label_rng.gen::<u64>() & mask;
            if let std::collections::hash_map::Entry::Vacant(e) = top.entry(v) {
                e.insert(to_gamma(s / total));
                break;
            }
        }
    }
    let floor = sums[count - 1] / total;
    let cascade = PoissonCascade::from_partial_sums(alpha, sums)?;
    let landscape = Landscape {
        params,
        scales,
        beta_sqrt_n: bsn,
        mode: LandscapeMode::LePage {
            seed,
            truncated: true,
        },
        field: Field::Truncated {
            top,
            floor,
            seed: keyed(seed, 0x7A11),
        },
        gibbs: OnceLock::new(),
    };
    Ok((landscape, cascade))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scales::{beta_c, solve_scales};

    fn direct(n: u32, eps: f64, beta: f64, seed: u64) -> Landscape {
        let p = ModelParams::intermediate(n, eps, beta);
        Landscape::direct(p, solve_scales(&p).unwrap(), seed).unwrap()
    }

    #[test]
    fn vertex_distance_matches_spin_formula() {
        let n = 10;
        for (a, b) in [(0u64, 0u64), (0b1011, 0b0110), (1023, 0), (341, 682)] {
            let (x, y) = (Vertex(a), Vertex(b));
            let half_l1: i32 = x
                .spins(n)
                .iter()
                .zip(y.spins(n))
                .map(|(p, q)| (*p as i32 - q as i32).abs())
                .sum::<i32>()
                / 2;
            assert_eq!(x.dist(y) as i32, half_l1);
        }
    }

    #[test]
    fn direct_field_is_referentially_transparent() {
        let l = direct(20, 0.5, 1.3, 99);
        let x = Vertex(0xBEEF);
        assert_eq!(l.energy(x).to_bits(), l.energy(x).to_bits());
        let other = direct(20, 0.5, 1.3, 100);
        assert_ne!(l.energy(x), other.energy(x));
    }

    #[test]
    fn flat_landscape_is_one() {
        let l = direct(12, 0.5, 0.0, 3);
        for i in [0u64, 5, 4095] {
            assert_eq!(l.energy(Vertex(i)), 1.0);
        }
    }

    #[test]
    fn hamiltonian_has_gaussian_moments() {
        let n = 20;
        let l = direct(n, 0.5, 1.0, 2024);
        let m = 1_000_000u64;
        let (mut s, mut s2) = (0.0, 0.0);
        for i in 0..m {
            let x = Vertex(keyed(777, i) & vertex_mask(n));
            let h = -l.energy(x).ln() / 1.0;
            s += h;
            s2 += h * h;
        }
        let mean = s / m as f64;
        let var = s2 / m as f64 - mean * mean;
        assert!(
            mean.abs() < 3.0 * (n as f64 / m as f64).sqrt(),
            "mean {mean}"
        );
        assert!((var / n as f64 - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn g_delta_bounded_by_delta() {
        for &u in &[1e-6, 1.0, 1e6] {
            for &d in &[0.1, 1.0, 3.0] {
                assert!(g_delta(d, u) <= d * (1.0 + 1e-15));
            }
        }
        assert!((g_delta(1.0, 1.0) - 0.632_120_558_828_557_7).abs() < 1e-15);
    }

    #[test]
    fn f_delta_nonnegative_and_continuous() {
        for &u in &[1e-8, 1e-3, 0.5, 1.0, 10.0, 999.0, 1001.0, 1e6, 1e12] {
            assert!(f_delta(0.1, u) >= 0.0);
            assert!(f_delta(1.0, u) >= 0.0);
        }
        // both branches agree near the switch point x = 1e-3
        let (d, u) = (1.0f64, 1000.0f64);
        let direct = u * u * (-(-d / u).exp_m1()) - d * u * (-d / u).exp();
        assert!((f_delta(d, u * (1.0 + 1e-9)) - direct).abs() < 1e-6);
        // large-u limit δ²/2
        assert!((f_delta(0.2, 1e9) - 0.02).abs() < 1e-9);
    }

    #[test]
    fn lattice_nu_limits_and_monotone() {
        let l = direct(12, 0.5, 2.0, 5);
        let a_n = l.scales().a_n;
        let tiny = l.lattice_nu(1e-40).unwrap();
        assert!(tiny.exact);
        assert!((tiny.value / a_n - 1.0).abs() < 1e-6);
        let vals: Vec<f64> = [0.1, 0.5, 1.0, 2.0, 8.0]
            .iter()
            .map(|&u| l.lattice_nu(u).unwrap().value)
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        assert!(l.lattice_nu(0.0).is_err());
    }

    #[test]
    fn lattice_sigma_matches_brute_force_kernel() {
        let n = 6;
        let l = direct(n, 0.5, 1.5, 11);
        let u = 0.7;
        let g = l.materialize().unwrap();
        let size = 1usize << n;
        // p(x,y) = 1/n on neighbours; p² by explicit matrix product
        let mut p2 = vec![0.0; size * size];
        for x in 0..size {
            for i in 0..n {
                let y = x ^ (1 << i);
                for j in 0..n {
                    let z = y ^ (1 << j);
                    p2[x * size + z] += 1.0 / (n * n) as f64;
                }
            }
        }
        let mut brute = 0.0;
        for x in 0..size {
            for y in 0..size {
                brute += p2[x * size + y] * (-u / g[x]).exp() * (-u / g[y]).exp();
            }
        }
        brute *= l.scales().a_n / size as f64;
        let fast = l.lattice_sigma(u).unwrap().value;
        assert!((fast / brute - 1.0).abs() < 1e-12, "{fast} vs {brute}");
    }

    #[test]
    fn lattice_quantities_nonnegative() {
        let l = direct(10, 0.8, 1.0, 8);
        assert!(l.lattice_m().value >= 0.0);
        assert!(l.lattice_lambda(0.1, LambdaKind::A3).unwrap().value >= 0.0);
        assert!(l.lattice_lambda(0.1, LambdaKind::A3Prime).unwrap().value >= 0.0);
        assert!(l.lattice_lambda(0.0, LambdaKind::A3).is_err());
    }

    #[test]
    fn sampled_lattice_mean_reports_stderr() {
        let p = ModelParams::intermediate(30, 0.5, 1.0);
        let l = Landscape::direct(p, solve_scales(&p).unwrap(), 1).unwrap();
        let v = l.lattice_mean(|g| (-1.0 / g).exp(), 200_000);
        assert!(!v.exact);
        assert!(v.stderr > 0.0);
    }

    #[test]
    fn cascade_marks_decrease() {
        let c = PoissonCascade::sample(0.6, 1000, &mut stream(1, "t")).unwrap();
        assert!(c.marks.windows(2).all(|w| w[1] < w[0]));
        let forced = PoissonCascade::from_partial_sums(0.3, vec![1.0, 2.5]).unwrap();
        assert_eq!(forced.marks[0], 1.0);
        assert!(PoissonCascade::from_partial_sums(0.3, vec![2.0, 1.0]).is_err());
    }

    #[test]
    fn lepage_dense_is_permutation_of_order_statistics() {
        let beta = 1.5 * beta_c(1.0).unwrap();
        let p = ModelParams::extreme(10, 1.0, beta);
        let s = solve_scales(&p).unwrap();
        let (l, c) = lepage_build(p, s, 50, 17).unwrap();
        assert_eq!(c.count(), 50);
        let mut g = l.materialize().unwrap();
        assert_eq!(g.len(), 1024);
        g.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!(g.iter().all(|v| *v > 0.0));
        // largest landscape value is c^{-1} G^{-1}(Γ_1/Γ_{N+1})
        assert!(l.is_enumerable());
        assert!(matches!(
            l.mode(),
            LandscapeMode::LePage {
                truncated: false,
                ..
            }
        ));
    }

    #[test]
    fn lepage_rejects_intermediate_and_high_temperature() {
        let p = ModelParams::intermediate(10, 0.5, 3.0);
        assert!(lepage_build(p, solve_scales(&p).unwrap(), 10, 1).is_err());
        let p = ModelParams::extreme(10, 1.0, 0.5);
        assert!(lepage_build(p, solve_scales(&p).unwrap(), 10, 1).is_err());
    }

    #[test]
    fn lepage_truncated_beyond_exact_cutoff() {
        let beta = 1.5 * beta_c(1.0).unwrap();
        let p = ModelParams::extreme(30, 1.0, beta);
        let s = solve_scales(&p).unwrap();
        let (l, c) = lepage_build(p, s, 1000, 5).unwrap();
        assert!(matches!(
            l.mode(),
            LandscapeMode::LePage {
                truncated: true,
                ..
            }
        ));
        assert_eq!(c.count(), 1000);
        assert!(!l.is_enumerable());
        // a random vertex falls below the smallest exact order statistic
        let v = l.rescaled(Vertex(123_456_789));
        assert!(v > 0.0 && v.is_finite());
    }

    #[test]
    fn gibbs_table_samples_heaviest_vertex_most() {
        let l = direct(8, 1.0, 3.0, 4);
        let g = l.materialize().unwrap();
        let table = l.gibbs_table().unwrap();
        let argmax = (0..256)
            .max_by(|&a, &b| g[a].partial_cmp(&g[b]).unwrap())
            .unwrap();
        let total: f64 = g.iter().sum();
        assert!((table.weight(Vertex(argmax as u64)) - g[argmax] / total).abs() < 1e-12);
        let mut rng = stream(9, "gibbs");
        let hits = (0..20_000)
            .filter(|_| table.sample(rng.gen()) == Vertex(argmax as u64))
            .count();
        let p = g[argmax] / total;
        assert!((hits as f64 / 20_000.0 - p).abs() < 5.0 * (p * (1.0 - p) / 20_000.0).sqrt());
    }
}
