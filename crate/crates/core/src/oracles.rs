//! Exact small-instance references used to validate the fast paths:
//! spectral return probabilities, exact evolution of the jump chain, a
//! brute-force event simulation of the jump process, adaptive quadrature and
//! the two-sample Kolmogorov–Smirnov test.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::landscape::{Landscape, Vertex};
use crate::scales::mixing_steps;
use crate::seeding::{path_seed, stream, unit_open};
use crate::special::ln_gamma;

/// Largest dimension handled by the dense oracles.
pub const EXACT_CHAIN_MAX_N: u32 = 12;
/// Largest dimension accepted by the brute-force simulator.
pub const BRUTE_FORCE_MAX_N: u32 = 10;

/// `p^l_n(x,x) = 2^{−n} Σ_j C(n,j) (1 − 2j/n)^l`.
pub fn spectral_return(n: u32, l: u32) -> f64 {
    assert!(n >= 1, "the cube needs n >= 1");
    if l == 0 {
        return 1.0;
    }
    if l % 2 == 1 {
        return 0.0;
    }
    let nf = n as f64;
    let log_norm = ln_gamma(nf + 1.0) - nf * std::f64::consts::LN_2;
    // pair j with n−j: eigenvalues are symmetric and l is even
    (0..=n)
        .map(|j| {
            let jf = j as f64;
            let w = (log_norm - ln_gamma(jf + 1.0) - ln_gamma(nf - jf + 1.0)).exp();
            w * (1.0 - 2.0 * jf / nf).powi(l as i32)
        })
        .sum()
}

/// `Σ_{l=1}^{2m} p^{l+2}_n(z,z)`.
pub fn return_sum(n: u32, m: u32) -> f64 {
    (1..=2 * m).map(|l| spectral_return(n, l + 2)).sum()
}

/// Exact distribution of the jump chain on a small cube.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactChain {
    n: u32,
    distribution: Vec<f64>,
}

impl ExactChain {
    pub fn point_mass(n: u32, x: Vertex) -> Result<Self> {
        if n == 0 || n > EXACT_CHAIN_MAX_N {
            return domain(format!(
                "exact chain supports 1 <= n <= {EXACT_CHAIN_MAX_N}, got {n}"
            ));
        }
        if !x.is_valid(n) {
            return domain(format!("vertex {} is not on the {n}-cube", x.0));
        }
        let mut distribution = vec![0.0; 1 << n];
        distribution[x.0 as usize] = 1.0;
        Ok(Self { n, distribution })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn distribution(&self) -> &[f64] {
        &self.distribution
    }

    pub fn step(&mut self) {
        let inv = 1.0 / self.n as f64;
        let next: Vec<f64> = (0..self.distribution.len())
            .map(|y| {
                (0..self.n)
                    .map(|i| self.distribution[y ^ (1 << i)])
                    .sum::<f64>()
                    * inv
            })
            .collect();
        self.distribution = next;
    }

    pub fn two_step(&mut self) {
        self.step();
        self.step();
    }

    pub fn total_mass(&self) -> f64 {
        self.distribution.iter().sum()
    }

    /// `max_y |P(y)/π^±(y) − 1|` over the parity class carrying the mass,
    /// with `π^±(y) = 2^{−n+1}`.
    pub fn parity_deviation(&self) -> f64 {
        let pi = 2f64.powi(1 - self.n as i32);
        let supported = self.distribution.iter().position(|&p| p > 0.0).unwrap_or(0);
        let class = (supported as u64).count_ones() % 2;
        self.distribution
            .iter()
            .enumerate()
            .filter(|(y, _)| (*y as u64).count_ones() % 2 == class)
            .map(|(_, &p)| (p / pi - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Dense return probability `p^l_n(0,0)` by repeated transitions.
pub fn dense_return(n: u32, l: u32) -> Result<f64> {
    let mut chain = ExactChain::point_mass(n, Vertex(0))?;
    for _ in 0..l {
        chain.step();
    }
    Ok(chain.distribution[0])
}

/// Relative deviation from `π^±` after `two_steps` two-step transitions from
/// a point mass. All starting points are equivalent by symmetry.
pub fn mixing_deviation(n: u32, two_steps: u64) -> Result<f64> {
    let mut chain = ExactChain::point_mass(n, Vertex(0))?;
    for _ in 0..two_steps {
        chain.two_step();
    }
    Ok(chain.parity_deviation())
}

/// Deviation after `θ_n / 2` two-step transitions.
pub fn mixing_tv(n: u32) -> Result<f64> {
    if n > EXACT_CHAIN_MAX_N {
        return domain(format!(
            "mixing oracle supports n <= {EXACT_CHAIN_MAX_N}, got {n}"
        ));
    }
    mixing_deviation(n, mixing_steps(n)? / 2)
}

/// One brute-force estimate of the no-jump correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BruteForceEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub paths: u64,
}

/// Event list of the jump process up to raw time `until`: pairs of
/// (jump time, new state), starting with `(0, start)`.
///
/// Draws from the same sub-streams as the streamed walker, so visit
/// sequences coincide for equal seeds.
pub fn brute_force_events(
    landscape: &Landscape,
    taus: &[f64],
    seed: u64,
    until: f64,
) -> Result<Vec<(f64, Vertex)>> {
    let n = landscape.n();
    let mut coords = stream(seed, "coordinates");
    let mut marks = stream(seed, "marks");
    let start = Vertex(coords.next_u64() & ((1u64 << n) - 1));
    let mut events = vec![(0.0, start)];
    let mut time = 0.0;
    let mut state = start;
    loop {
        let hold = taus[state.0 as usize] * -unit_open(marks.next_u64()).ln();
        time += hold;
        if time > until {
            return Ok(events);
        }
        let coord = coords.gen_range(0..n);
        state = state.flip(coord);
        events.push((time, state));
        if events.len() > 500_000_000 {
            return Err(Error::Horizon {
                requested: until,
                horizon: time,
            });
        }
    }
}

/// `C_n(t,s)` for a uniformly started walk by explicit event lists and
/// linear scans. Path `p` uses the ensemble seed of disorder 0, path `p`.
pub fn brute_force_corr(
    landscape: &Landscape,
    t: f64,
    s: f64,
    paths: u64,
    root_seed: u64,
) -> Result<BruteForceEstimate> {
    let n = landscape.n();
    if n > BRUTE_FORCE_MAX_N {
        return domain(format!(
            "brute force supports n <= {BRUTE_FORCE_MAX_N}, got {n}"
        ));
    }
    if !(t >= 0.0 && s > 0.0) {
        return domain(format!("brute force needs t >= 0 and s > 0 (t={t}, s={s})"));
    }
    if paths == 0 {
        return domain("brute force needs at least one path");
    }
    let c_n = landscape.scales().c_n;
    let taus: Vec<f64> = (0..1u64 << n)
        .map(|x| landscape.energy(Vertex(x)))
        .collect();
    let (lo, hi) = (c_n * t, c_n * (t + s));
    let mut hits = 0u64;
    for p in 0..paths {
        let events = brute_force_events(landscape, &taus, path_seed(root_seed, 0, p), hi)?;
        if !events.iter().any(|&(time, _)| time > lo && time <= hi) {
            hits += 1;
        }
    }
    let mean = hits as f64 / paths as f64;
    let stderr = (mean * (1.0 - mean) / paths as f64).sqrt();
    Ok(BruteForceEstimate {
        mean,
        stderr,
        paths,
    })
}

/// Adaptive Gauss–Kronrod (7/15) quadrature to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let whole = gk15(f, a, b);
    adapt(f, a, b, whole, tol, 0)
}

const MAX_DEPTH: u32 = 60;

fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    (value, err): (f64, f64),
    tol: f64,
    depth: u32,
) -> Result<f64> {
    if err <= tol || (b - a).abs() < 1e-15 * (1.0 + a.abs()) {
        return Ok(value);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Numerical(format!(
            "quadrature did not converge on [{a}, {b}]"
        )));
    }
    let mid = 0.5 * (a + b);
    let left = gk15(f, a, mid);
    let right = gk15(f, mid, b);
    Ok(adapt(f, a, mid, left, 0.5 * tol, depth + 1)?
        + adapt(f, mid, b, right, 0.5 * tol, depth + 1)?)
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const K_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const G_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = K_WEIGHTS[7] * fc;
    let mut gauss = G_WEIGHTS[3] * fc;
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let pair = f(c - x) + f(c + x);
        kronrod += K_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += G_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Arcsine law by direct quadrature of its density.
///
/// The endpoint singularities are removed by `x = y^{1/α}` on `[0, ½]` and
/// `1 − x = w^{1/(1−α)}` on `[½, 1]`, leaving smooth integrands.
pub fn asl_quadrature(alpha: f64, u: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("arcsine law needs 0 < alpha < 1, got {alpha}"));
    }
    if !(0.0..=1.0).contains(&u) {
        return domain(format!("arcsine law argument must lie in [0, 1], got {u}"));
    }
    let beta = 1.0 - alpha;
    let norm = (alpha * std::f64::consts::PI).sin() / std::f64::consts::PI;
    let tol = 1e-14;
    let head_end = u.min(0.5);
    // ∫_0^m (1−x)^{−α} x^{α−1} dx = (1/α) ∫_0^{m^α} (1 − y^{1/α})^{−α} dy
    let head = integrate(
        &|y: f64| (1.0 - y.powf(1.0 / alpha)).powf(-alpha),
        0.0,
        head_end.powf(alpha),
        tol,
    )? / alpha;
    let tail = if u > 0.5 {
        // ∫_{1/2}^u (1−x)^{−α} x^{α−1} dx = (1/β) ∫_{(1−u)^β}^{2^{−β}} (1 − w^{1/β})^{α−1} dw
        integrate(
            &|w: f64| (1.0 - w.powf(1.0 / beta)).powf(alpha - 1.0),
            (1.0 - u).powf(beta),
            0.5f64.powf(beta),
            tol,
        )? / beta
    } else {
        0.0
    };
    Ok(norm * (head + tail))
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic critical value `√(−ln(level/2)/2) · √((n+m)/(nm))`.
pub fn ks_critical(level: f64, n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    (-(0.5 * level).ln() / 2.0).sqrt() * ((n + m) / (n * m)).sqrt()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
