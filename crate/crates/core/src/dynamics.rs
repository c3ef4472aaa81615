//! Random hopping dynamics as a time-changed jump chain.
//!
//! The jump chain `J_n` is the simple random walk on the hypercube. Holding
//! times are `τ_n(J_n(i)) e_{n,i}` with i.i.d. unit exponential marks, and the
//! clock is their partial sum `S̃_n(k) = Σ_{i=0}^{k} τ_n(J_n(i)) e_{n,i}`.
//!
//! Time convention: `S̃_n(k)` is the instant the walk leaves `J_n(k)`, so
//! `X_n(T) = J_n(i)` for `S̃_n(i−1) ≤ T < S̃_n(i)` with `S̃_n(−1) = 0`. The
//! first holding interval therefore covers `T = 0`, and the holding time at a
//! vertex has mean `τ_n` of that same vertex, as the jump rates require.
//!
//! Each trajectory draws from two sub-streams of its seed: one for the start
//! vertex and the coordinate flips, one for the exponential marks (inverse
//! CDF, one uniform per step). Trajectories replay exactly from
//! `(landscape, seed)`.

use std::collections::HashMap;

use rand::{Rng, RngCore};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::landscape::{g_delta, vertex_mask, Landscape, Vertex};
use crate::scales::Scales;
use crate::seeding::{stream, unit_open};

/// Largest trajectory that may be stored in memory.
pub const MAX_STORED_STEPS: u64 = 1_000_000_000;
/// Step budget for a streamed path before it is declared runaway.
pub const MAX_STREAMED_STEPS: u64 = 20_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartLaw {
    /// Uniform over all vertices.
    #[default]
    Uniform,
    /// Gibbs measure `τ_n(x) / Σ_y τ_n(y)`; needs an enumerable landscape.
    Gibbs,
}

impl std::str::FromStr for StartLaw {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(StartLaw::Uniform),
            "gibbs" => Ok(StartLaw::Gibbs),
            other => Err(Error::Config(format!("unknown start law '{other}'"))),
        }
    }
}

/// Draws the unit exponential mark for one holding interval.
#[inline]
pub(crate) fn exp_mark(rng: &mut Xoshiro256PlusPlus) -> f64 {
    -unit_open(rng.next_u64()).ln()
}

/// Draws the starting vertex according to `law`.
pub(crate) fn start_vertex(
    landscape: &Landscape,
    law: StartLaw,
    coords: &mut Xoshiro256PlusPlus,
) -> Result<Vertex> {
    match law {
        StartLaw::Uniform => Ok(Vertex(coords.next_u64() & vertex_mask(landscape.n()))),
        StartLaw::Gibbs => {
            let table = landscape.gibbs_table()?;
            Ok(table.sample(unit_open(coords.next_u64())))
        }
    }
}

/// A streamed realization of the jump chain and its clock.
///
/// Nothing is stored: the walk sits at `J_n(index)` with `clock = S̃_n(index)`
/// in raw (unrescaled) time units.
pub struct Walk<'a> {
    landscape: &'a Landscape,
    coords: Xoshiro256PlusPlus,
    marks: Xoshiro256PlusPlus,
    n: u32,
    current: Vertex,
    index: u64,
    clock: f64,
}

impl<'a> Walk<'a> {
    pub fn start(landscape: &'a Landscape, law: StartLaw, seed: u64) -> Result<Self> {
        let mut coords = stream(seed, "coordinates");
        let mut marks = stream(seed, "marks");
        let current = start_vertex(landscape, law, &mut coords)?;
        let clock = landscape.energy(current) * exp_mark(&mut marks);
        Ok(Self {
            landscape,
            coords,
            marks,
            n: landscape.n(),
            current,
            index: 0,
            clock,
        })
    }

    #[inline]
    pub fn current(&self) -> Vertex {
        self.current
    }

    #[inline]
    pub fn index(&self) -> u64 {
        self.index
    }

    /// `S̃_n(index)`: the raw time at which the walk leaves the current vertex.
    #[inline]
    pub fn clock(&self) -> f64 {
        self.clock
    }

    /// Move to `J_n(index + 1)` and add its holding time to the clock.
    #[inline]
    pub fn step(&mut self) {
        let coord = self.coords.gen_range(0..self.n);
        self.current = self.current.flip(coord);
        self.index += 1;
        self.clock += self.landscape.energy(self.current) * exp_mark(&mut self.marks);
    }

    /// Step until the walk is the one occupying raw time `raw_time`, i.e.
    /// until `clock > raw_time`.
    pub fn advance_past(&mut self, raw_time: f64, max_steps: u64) -> Result<()> {
        while self.clock <= raw_time {
            if self.index >= max_steps {
                return Err(Error::Horizon {
                    requested: raw_time / self.landscape.scales().c_n,
                    horizon: self.clock / self.landscape.scales().c_n,
                });
            }
            self.step();
        }
        Ok(())
    }
}

/// The state occupied at a query time, together with the end of its holding
/// interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    /// Rescaled query time `t` (raw time `c_n t`).
    pub time: f64,
    pub state: Vertex,
    pub index: u64,
    /// Raw time at which the walk leaves `state`.
    pub exit: f64,
}

/// Stream one path and record the occupied state at each rescaled time in
/// `times` (which must be sorted ascending).
pub fn probe_path(
    landscape: &Landscape,
    law: StartLaw,
    seed: u64,
    times: &[f64],
    max_steps: u64,
) -> Result<Vec<Probe>> {
    debug_assert!(times.windows(2).all(|w| w[0] <= w[1]));
    let c_n = landscape.scales().c_n;
    let mut walk = Walk::start(landscape, law, seed)?;
    times
        .iter()
        .map(|&t| {
            walk.advance_past(c_n * t, max_steps)?;
            Ok(Probe {
                time: t,
                state: walk.current(),
                index: walk.index(),
                exit: walk.clock(),
            })
        })
        .collect()
}

/// A stored realization: visits `J_n(0..=k)`, clock `S̃_n(0..=k)` and the
/// centering `M_n` after each step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClockTrajectory {
    pub visits: Vec<Vertex>,
    pub clock: Vec<f64>,
    /// `centering[k] = Σ_{i=1}^{k} Σ_x p_n(J_n(i−1), x) γ_n(x)(1 − e^{−1/γ_n(x)})`.
    pub centering: Vec<f64>,
    pub seed: u64,
    pub start_law: StartLaw,
}

impl ClockTrajectory {
    pub fn steps(&self) -> usize {
        self.visits.len() - 1
    }

    /// Rescaled horizon `S̃_n(last) / c_n`.
    pub fn horizon(&self, scales: &Scales) -> f64 {
        self.clock.last().copied().unwrap_or(0.0) / scales.c_n
    }
}

/// `Σ_x p_n(y,x) g_1(γ_n(x))`: the one-step contribution to `M_n`.
pub fn centering_increment(landscape: &Landscape, y: Vertex) -> f64 {
    let n = landscape.n();
    (0..n)
        .map(|i| g_delta(1.0, landscape.rescaled(y.flip(i))))
        .sum::<f64>()
        / n as f64
}

pub fn run_trajectory(
    landscape: &Landscape,
    steps: u64,
    start_law: StartLaw,
    seed: u64,
) -> Result<ClockTrajectory> {
    if steps == 0 {
        return domain("a trajectory needs at least one step");
    }
    if steps > MAX_STORED_STEPS {
        return domain(format!(
            "horizon of {steps} steps exceeds the stored-trajectory limit {MAX_STORED_STEPS}"
        ));
    }
    let len = steps as usize + 1;
    let mut walk = Walk::start(landscape, start_law, seed)?;
    let mut visits = Vec::with_capacity(len);
    let mut clock = Vec::with_capacity(len);
    let mut centering = Vec::with_capacity(len);
    visits.push(walk.current());
    clock.push(walk.clock());
    centering.push(0.0);
    let mut m = 0.0;
    for _ in 0..steps {
        m += centering_increment(landscape, walk.current());
        walk.step();
        visits.push(walk.current());
        clock.push(walk.clock());
        centering.push(m);
    }
    Ok(ClockTrajectory {
        visits,
        clock,
        centering,
        seed,
        start_law,
    })
}

/// `X_n(c_n t)`.
pub fn state_at(traj: &ClockTrajectory, scales: &Scales, t: f64) -> Result<Vertex> {
    if !(t >= 0.0) {
        return domain(format!("time must be non-negative, got {t}"));
    }
    let raw = scales.c_n * t;
    let idx = traj.clock.partition_point(|&c| c <= raw);
    if idx >= traj.visits.len() {
        return Err(Error::Horizon {
            requested: t,
            horizon: traj.horizon(scales),
        });
    }
    Ok(traj.visits[idx])
}

fn clock_index(traj: &ClockTrajectory, scales: &Scales, t: f64) -> Result<usize> {
    if !(t >= 0.0) {
        return domain(format!("time must be non-negative, got {t}"));
    }
    let k = (scales.a_n * t).floor();
    if k >= traj.clock.len() as f64 {
        return Err(Error::Horizon {
            requested: t,
            horizon: (traj.clock.len() - 1) as f64 / scales.a_n,
        });
    }
    Ok(k as usize)
}

/// `S_n(t) = S̃_n(⌊a_n t⌋) / c_n`.
pub fn rescaled_clock(traj: &ClockTrajectory, scales: &Scales, t: f64) -> Result<f64> {
    Ok(traj.clock[clock_index(traj, scales, t)?] / scales.c_n)
}

/// `M_n(t)`.
pub fn centering_at(traj: &ClockTrajectory, scales: &Scales, t: f64) -> Result<f64> {
    Ok(traj.centering[clock_index(traj, scales, t)?])
}

/// `S_n(t) − M_n(t)`.
pub fn centered_clock(traj: &ClockTrajectory, scales: &Scales, t: f64) -> Result<f64> {
    let k = clock_index(traj, scales, t)?;
    Ok(traj.clock[k] / scales.c_n - traj.centering[k])
}

/// `h^u_n(y) = Σ_x p_n(y,x) e^{−u/γ_n(x)}`.
pub fn h_u(landscape: &Landscape, y: Vertex, u: f64) -> f64 {
    let n = landscape.n();
    (0..n)
        .map(|i| (-u / landscape.rescaled(y.flip(i))).exp())
        .sum::<f64>()
        / n as f64
}

/// Chain-level quantities `ν^{J,t}_n(u,∞)` and `σ^{J,t}_n(u,∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    pub nu: f64,
    pub sigma: f64,
    pub steps: u64,
}

/// Sum `h^u_n` (and its square) along `⌊a_n t⌋` steps of the jump chain.
/// Values of `h^u_n` are cached per visited vertex.
pub fn chain_diagnostics(
    landscape: &Landscape,
    start_law: StartLaw,
    seed: u64,
    t: f64,
    u: f64,
) -> Result<ChainDiagnostics> {
    if !(u > 0.0) {
        return domain(format!("u must be positive, got {u}"));
    }
    if !(t > 0.0) {
        return domain(format!("t must be positive, got {t}"));
    }
    let k = (landscape.scales().a_n * t).floor() as u64;
    let n = landscape.n();
    let mut coords = stream(seed, "coordinates");
    let mut y = start_vertex(landscape, start_law, &mut coords)?;
    let mut cache: HashMap<Vertex, f64> = HashMap::new();
    let (mut nu, mut sigma) = (0.0, 0.0);
    for _ in 0..k {
        let h = *cache.entry(y).or_insert_with(|| h_u(landscape, y, u));
        nu += h;
        sigma += h * h;
        y = y.flip(coords.gen_range(0..n));
    }
    Ok(ChainDiagnostics {
        nu,
        sigma,
        steps: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scales::{beta_c, solve_scales, ModelParams};

    fn landscape(n: u32, eps: f64, beta: f64, seed: u64) -> Landscape {
        let p = ModelParams::intermediate(n, eps, beta);
        Landscape::direct(p, solve_scales(&p).unwrap(), seed).unwrap()
    }

    #[test]
    fn one_step_trajectory() {
        let l = landscape(12, 0.5, 1.2, 1);
        let tr = run_trajectory(&l, 1, StartLaw::Uniform, 5).unwrap();
        assert_eq!(tr.clock.len(), 2);
        assert_eq!(tr.visits[0].dist(tr.visits[1]), 1);
        assert!(tr.clock[1] > tr.clock[0] && tr.clock[0] > 0.0);
    }

    #[test]
    fn visits_are_nearest_neighbours_and_clock_increases() {
        let l = landscape(16, 0.5, 1.5, 2);
        let tr = run_trajectory(&l, 2000, StartLaw::Uniform, 9).unwrap();
        assert!(tr.visits.windows(2).all(|w| w[0].dist(w[1]) == 1));
        // increments are positive; in floating point tiny ones may be absorbed
        assert!(tr.clock.windows(2).all(|w| w[1] >= w[0]));
        assert!(tr.clock[2000] > tr.clock[0]);
        assert!(tr.centering.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn flat_clock_grows_linearly() {
        let l = landscape(10, 0.5, 0.0, 1);
        let k = 100_000u64;
        let tr = run_trajectory(&l, k, StartLaw::Uniform, 3).unwrap();
        let ratio = tr.clock[k as usize] / k as f64;
        assert!((ratio - 1.0).abs() < 0.01, "{ratio}");
    }

    #[test]
    fn parity_after_even_steps() {
        let l = landscape(9, 0.5, 1.0, 1);
        let tr = run_trajectory(&l, 40, StartLaw::Uniform, 4).unwrap();
        let start = tr.visits[0].even_class(9);
        for (k, v) in tr.visits.iter().enumerate() {
            assert_eq!(v.even_class(9) == start, k % 2 == 0);
        }
    }

    #[test]
    fn replay_from_seed() {
        let l = landscape(14, 0.5, 1.3, 1);
        let a = run_trajectory(&l, 500, StartLaw::Uniform, 77).unwrap();
        let b = run_trajectory(&l, 500, StartLaw::Uniform, 77).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn state_at_boundaries() {
        let l = landscape(12, 0.5, 1.2, 1);
        let s = *l.scales();
        let tr = run_trajectory(&l, 50, StartLaw::Uniform, 5).unwrap();
        assert_eq!(state_at(&tr, &s, 0.0).unwrap(), tr.visits[0]);
        let first_exit = tr.clock[0] / s.c_n;
        assert_eq!(
            state_at(&tr, &s, first_exit * (1.0 - 1e-9)).unwrap(),
            tr.visits[0]
        );
        assert_eq!(
            state_at(&tr, &s, first_exit * (1.0 + 1e-9)).unwrap(),
            tr.visits[1]
        );
        let second_exit = tr.clock[1] / s.c_n;
        assert_eq!(
            state_at(&tr, &s, second_exit * (1.0 + 1e-9)).unwrap(),
            tr.visits[2]
        );
        let beyond = tr.horizon(&s) * 1.01;
        assert!(matches!(
            state_at(&tr, &s, beyond),
            Err(Error::Horizon { .. })
        ));
    }

    #[test]
    fn state_at_piecewise_constant() {
        let l = landscape(12, 0.5, 1.2, 1);
        let s = *l.scales();
        let tr = run_trajectory(&l, 100, StartLaw::Uniform, 5).unwrap();
        for k in 1..50 {
            let lo = tr.clock[k - 1] / s.c_n;
            let hi = tr.clock[k] / s.c_n;
            let a = state_at(&tr, &s, lo + 0.25 * (hi - lo)).unwrap();
            let b = state_at(&tr, &s, lo + 0.75 * (hi - lo)).unwrap();
            assert_eq!(a, b);
            assert_eq!(a, tr.visits[k]);
        }
    }

    #[test]
    fn rescaled_clock_semantics() {
        let l = landscape(12, 0.5, 1.2, 1);
        let s = *l.scales();
        let tr = run_trajectory(&l, 200, StartLaw::Uniform, 5).unwrap();
        assert_eq!(rescaled_clock(&tr, &s, 0.0).unwrap(), tr.clock[0] / s.c_n);
        let ts = [0.0, 0.3, 0.5, 1.0, 2.0, 3.0];
        let vals: Vec<f64> = ts
            .iter()
            .map(|&t| rescaled_clock(&tr, &s, t).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] >= w[0]));
        assert!(rescaled_clock(&tr, &s, 1000.0).is_err());
        let c = centered_clock(&tr, &s, 1.0).unwrap();
        assert!((c - (vals[3] - centering_at(&tr, &s, 1.0).unwrap())).abs() < 1e-15);
    }

    #[test]
    fn probes_agree_with_stored_trajectory() {
        let l = landscape(14, 0.5, 1.4, 3);
        let s = *l.scales();
        let tr = run_trajectory(&l, 20_000, StartLaw::Uniform, 8).unwrap();
        let horizon = tr.horizon(&s);
        let times: Vec<f64> = (1..10).map(|i| horizon * i as f64 / 11.0).collect();
        let probes = probe_path(&l, StartLaw::Uniform, 8, &times, u64::MAX).unwrap();
        for p in probes {
            assert_eq!(p.state, state_at(&tr, &s, p.time).unwrap());
            assert_eq!(p.exit, tr.clock[p.index as usize]);
        }
    }

    #[test]
    fn gibbs_start_needs_enumerable_landscape() {
        let l = landscape(30, 0.5, 1.0, 1);
        assert!(matches!(
            run_trajectory(&l, 3, StartLaw::Gibbs, 1),
            Err(Error::Unsupported(_))
        ));
        let small = landscape(10, 0.5, 1.0, 1);
        assert!(run_trajectory(&small, 3, StartLaw::Gibbs, 1).is_ok());
    }

    #[test]
    fn chain_diagnostics_count_steps() {
        let eps = 0.5;
        let l = landscape(12, eps, beta_c(eps).unwrap() / 0.5, 1);
        let d = chain_diagnostics(&l, StartLaw::Uniform, 4, 1.0, 1.0).unwrap();
        assert_eq!(d.steps, 64);
        assert!(d.nu > 0.0 && d.sigma > 0.0 && d.sigma <= d.nu);
    }
}
