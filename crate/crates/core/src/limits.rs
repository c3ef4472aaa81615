//! Closed-form limit objects: the generalized arcsine law, stable and
//! cascade Lévy tails, the stationary correlation, the critical-line
//! constant and the moment/scale predictions.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::landscape::PoissonCascade;
use crate::scales::{ModelParams, Scales};
use crate::special::{gamma, incomplete_beta, normal_cdf};

/// Margin required between the smallest materialized mark and `u`.
pub const DEPTH_MARGIN: f64 = 40.0;

/// `Asl_α(u) = (sin απ / π) ∫_0^u (1−x)^{−α} x^{α−1} dx = I_u(α, 1−α)`.
pub fn asl_cdf(alpha: f64, u: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("arcsine law needs 0 < alpha < 1, got {alpha}"));
    }
    if !(0.0..=1.0).contains(&u) {
        return domain(format!("arcsine law argument must lie in [0, 1], got {u}"));
    }
    incomplete_beta(alpha, 1.0 - alpha, u)
}

/// Aging prediction for `C(t, s)`: `Asl_α(t / (t + s))`.
pub fn aging_prediction(alpha: f64, t: f64, s: f64) -> Result<f64> {
    if !(t >= 0.0 && s > 0.0) {
        return domain(format!(
            "aging prediction needs t >= 0, s > 0 (t={t}, s={s})"
        ));
    }
    asl_cdf(alpha, t / (t + s))
}

/// Lévy measure of the limiting clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LevyTail {
    /// `ν(u,∞) = u^{−α} α Γ(α)`, with `α = 1` giving `1/u`.
    Intermediate { alpha: f64 },
    /// `ν(u,∞) = ε̄ Σ_k e^{−u/γ_k}` over the marks of a cascade.
    Extreme {
        cascade: PoissonCascade,
        eps_bar: f64,
    },
}

/// A tail value with the bound on what truncation left out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailValue {
    pub value: f64,
    pub remainder_bound: f64,
}

pub fn levy_tail(tail: &LevyTail, u: f64) -> Result<TailValue> {
    if !(u > 0.0 && u.is_finite()) {
        return domain(format!("Levy tail needs u > 0, got {u}"));
    }
    match tail {
        LevyTail::Intermediate { alpha } => {
            let a = *alpha;
            if !(a > 0.0 && a <= 1.0) {
                return domain(format!("intermediate tail needs 0 < alpha <= 1, got {a}"));
            }
            Ok(TailValue {
                value: u.powf(-a) * a * gamma(a),
                remainder_bound: 0.0,
            })
        }
        LevyTail::Extreme { cascade, eps_bar } => {
            if !(*eps_bar > 0.0) {
                return domain(format!("eps_bar must be positive, got {eps_bar}"));
            }
            let k = cascade.count();
            let last = cascade.marks[k - 1];
            if last >= u / DEPTH_MARGIN {
                return Err(Error::Depth {
                    have: k,
                    need: required_depth(cascade.alpha, u),
                    u,
                });
            }
            let value = eps_bar * cascade.marks.iter().map(|g| (-u / g).exp()).sum::<f64>();
            // Σ_{k>K} e^{−u Γ_k^{1/α}} ≤ e^{−u/γ_K} (α Γ_K γ_K / u) by convexity
            let head = (-u / last).exp();
            let conv = cascade.alpha * cascade.partial_sums[k - 1] * last / u;
            Ok(TailValue {
                value,
                remainder_bound: eps_bar * head * conv.max(k as f64),
            })
        }
    }
}

/// Depth at which `Γ_K^{−1/α} < u/40` in expectation (`Γ_K ≈ K`).
pub fn required_depth(alpha: f64, u: f64) -> usize {
    ((DEPTH_MARGIN / u).powf(alpha) * 1.1).ceil() as usize + 1
}

/// Stationary correlation with the bound on the omitted mass of `Σ γ_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryValue {
    pub value: f64,
    /// Bound on `Σ_{k>K} γ_k` relative to the materialized sum.
    pub relative_remainder: f64,
}

/// `C^sta(s) = Σ_k (γ_k / Σγ) e^{−s/γ_k}`.
pub fn stationary_corr(cascade: &PoissonCascade, s: f64) -> Result<StationaryValue> {
    if !(s >= 0.0) {
        return domain(format!("stationary correlation needs s >= 0, got {s}"));
    }
    let alpha = cascade.alpha;
    if alpha >= 1.0 {
        return domain(format!("marks are not summable for alpha = {alpha} >= 1"));
    }
    let total: f64 = cascade.marks.iter().sum();
    let value = if s == 0.0 {
        1.0
    } else {
        cascade
            .marks
            .iter()
            .map(|g| g * (-s / g).exp())
            .sum::<f64>()
            / total
    };
    let k = cascade.count();
    // ∫_{Γ_K}^∞ x^{−1/α} dx
    let rem = alpha / (1.0 - alpha) * cascade.partial_sums[k - 1] * cascade.marks[k - 1];
    Ok(StationaryValue {
        value,
        relative_remainder: rem / total,
    })
}

/// `e^{−θ²/2}/Φ(θ) · log(1 + t/s) / (β√(2π))`.
pub fn critical_prediction(theta: f64, beta: f64, t: f64, s: f64) -> Result<f64> {
    if !(s > 0.0 && t >= 0.0 && beta > 0.0 && theta.is_finite()) {
        return domain(format!(
            "critical prediction needs s > 0, t >= 0, beta > 0 (t={t}, s={s}, beta={beta})"
        ));
    }
    Ok(critical_prefactor(theta) * (t / s).ln_1p() / (beta * (2.0 * std::f64::consts::PI).sqrt()))
}

/// `e^{−θ²/2} / Φ(θ)`.
pub fn critical_prefactor(theta: f64) -> f64 {
    (-0.5 * theta * theta).exp() / normal_cdf(theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentPredictions {
    /// `e^{nβ²/2} / c_n`.
    pub m1_bound: f64,
    /// `Φ(θ) a_n e^{nβ²/2} / c_n`, critical mode only.
    pub m1_critical: Option<f64>,
    /// `√n c_n / (a_n e^{nβ²/2})`.
    pub scale_ratio: f64,
    /// `e^{−θ²/2} / (β√(2π))`, critical mode only.
    pub scale_ratio_limit: Option<f64>,
}

pub fn moment_predictions(params: &ModelParams, scales: &Scales) -> Result<MomentPredictions> {
    params.validate()?;
    if !(params.beta > 0.0) {
        return domain("moment predictions need beta > 0");
    }
    let n = params.n as f64;
    let half = 0.5 * n * params.beta * params.beta;
    let log_a = scales.a_n.ln();
    let m1_bound = (half - scales.log_c_n).exp();
    let scale_ratio = (0.5 * n.ln() + scales.log_c_n - log_a - half).exp();
    let (m1_critical, scale_ratio_limit) = match params.theta {
        Some(theta) if scales.critical => (
            Some(normal_cdf(theta) * (log_a + half - scales.log_c_n).exp()),
            Some(
                (-0.5 * theta * theta).exp() / (params.beta * (2.0 * std::f64::consts::PI).sqrt()),
            ),
        ),
        _ => (None, None),
    };
    Ok(MomentPredictions {
        m1_bound,
        m1_critical,
        scale_ratio,
        scale_ratio_limit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scales::{beta_c, solve_scales};
    use rand::SeedableRng;
    use rand_xoshiro::Xoshiro256PlusPlus;

    #[test]
    fn asl_endpoints_and_symmetry() {
        for &a in &[0.2, 0.5, 0.8] {
            assert_eq!(asl_cdf(a, 0.0).unwrap(), 0.0);
            assert_eq!(asl_cdf(a, 1.0).unwrap(), 1.0);
        }
        assert!((asl_cdf(0.5, 0.5).unwrap() - 0.5).abs() < 1e-14);
        assert!((asl_cdf(0.5, 0.25).unwrap() - 1.0 / 3.0).abs() < 1e-10);
        assert!(asl_cdf(0.0, 0.3).is_err());
        assert!(asl_cdf(1.0, 0.3).is_err());
        assert!(asl_cdf(0.5, 1.2).is_err());
    }

    #[test]
    fn intermediate_tail() {
        let t = LevyTail::Intermediate { alpha: 0.5 };
        let v = levy_tail(&t, 1.0).unwrap().value;
        assert!((v - 0.886_226_925_452_758).abs() < 1e-12);
        let r = levy_tail(&t, 2.0).unwrap().value / v;
        assert!((r - 2f64.powf(-0.5)).abs() < 1e-14);
        let one = LevyTail::Intermediate { alpha: 1.0 };
        assert!((levy_tail(&one, 4.0).unwrap().value - 0.25).abs() < 1e-15);
        assert!(levy_tail(&LevyTail::Intermediate { alpha: 1.5 }, 1.0).is_err());
    }

    #[test]
    fn extreme_tail_needs_depth() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
        let c = PoissonCascade::sample(0.5, 100, &mut rng).unwrap();
        let t = LevyTail::Extreme {
            cascade: c,
            eps_bar: 1.0,
        };
        match levy_tail(&t, 0.001) {
            Err(Error::Depth { need, .. }) => assert!(need > 100),
            other => panic!("expected a depth error, got {other:?}"),
        }
        let v = levy_tail(&t, 10.0).unwrap();
        assert!(v.value > 0.0 && v.remainder_bound < 1e-10);
    }

    #[test]
    fn stationary_corr_basics() {
        let one = PoissonCascade::from_marks(0.5, vec![2.0]).unwrap();
        assert!((stationary_corr(&one, 2.0).unwrap().value - (-1.0f64).exp()).abs() < 1e-15);
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(9);
        let c = PoissonCascade::sample(0.6, 10_000, &mut rng).unwrap();
        assert_eq!(stationary_corr(&c, 0.0).unwrap().value, 1.0);
        let mut prev = 1.0;
        for &s in &[0.01, 0.1, 1.0, 10.0, 100.0] {
            let v = stationary_corr(&c, s).unwrap().value;
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 0.05);
        let bad = PoissonCascade::from_marks(1.2, vec![1.0]).unwrap();
        assert!(stationary_corr(&bad, 1.0).is_err());
    }

    #[test]
    fn critical_constant() {
        let b = beta_c(1.0).unwrap();
        let p = critical_prediction(0.0, b, 1.0, 1.0).unwrap();
        assert!((p - 0.4697).abs() < 1e-4);
        let r = critical_prediction(0.0, b, 3.0, 1.0).unwrap() / p;
        assert!((r - 2.0).abs() < 1e-14);
        assert_eq!(critical_prediction(0.0, b, 0.0, 1.0).unwrap(), 0.0);
        let pre: Vec<f64> = [1.0, 2.0, 3.0]
            .iter()
            .map(|&t| critical_prefactor(t))
            .collect();
        assert!(pre[0] > pre[1] && pre[1] > pre[2]);
        assert!(critical_prediction(0.0, b, 1.0, 0.0).is_err());
    }

    #[test]
    fn moment_identities() {
        let p = ModelParams::critical(40, 1.0, 0.7).unwrap();
        let s = solve_scales(&p).unwrap();
        let m = moment_predictions(&p, &s).unwrap();
        let ratio = m.m1_critical.unwrap() / m.m1_bound;
        assert!((ratio / (normal_cdf(0.7) * s.a_n) - 1.0).abs() < 1e-10);
        let lim = moment_predictions(
            &ModelParams::critical(256, 1.0, 0.0).unwrap(),
            &solve_scales(&ModelParams::critical(256, 1.0, 0.0).unwrap()).unwrap(),
        )
        .unwrap();
        assert!((lim.scale_ratio_limit.unwrap() - 0.338_83).abs() < 1e-5);
        assert!((lim.scale_ratio / lim.scale_ratio_limit.unwrap() - 1.0).abs() < 0.05);
        let plain = ModelParams::intermediate(20, 0.5, 1.0);
        let pm = moment_predictions(&plain, &solve_scales(&plain).unwrap()).unwrap();
        assert!(pm.m1_critical.is_none());
    }
}
