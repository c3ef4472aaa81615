//! Deterministic time scales of the model.
//!
//! The observation scale `c_n` and the step scale `a_n` are tied together by
//! `a_n · P(τ_n(x) ≥ c_n) = 1`. Because `log τ_n(x) ~ N(0, β² n)`, this reads
//! `a_n · (1 − Φ(log c_n / (β√n))) = 1`.
//!
//! Finite-n sequences are pinned: `a_n = 2^{εn}` on intermediate scales and
//! `a_n = ε̄ 2^n` on extreme scales. In critical-line mode (a `theta` is
//! given) `c_n = exp(β√n (β√n − θ))` is fixed instead and `a_n` follows.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::special::{bisect_decreasing, normal_pdf, normal_sf, normal_upper_quantile};

const LN_2: f64 = std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScaleKind {
    Intermediate { eps: f64 },
    Extreme { eps_bar: f64 },
}

impl ScaleKind {
    /// The ε entering `β_c(ε)`; extreme scales sit at ε = 1.
    pub fn eps(&self) -> f64 {
        match *self {
            ScaleKind::Intermediate { eps } => eps,
            ScaleKind::Extreme { .. } => 1.0,
        }
    }

    pub fn is_extreme(&self) -> bool {
        matches!(self, ScaleKind::Extreme { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: u32,
    pub beta: f64,
    pub scale_kind: ScaleKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

impl ModelParams {
    pub fn intermediate(n: u32, eps: f64, beta: f64) -> Self {
        Self {
            n,
            beta,
            scale_kind: ScaleKind::Intermediate { eps },
            theta: None,
        }
    }

    pub fn extreme(n: u32, eps_bar: f64, beta: f64) -> Self {
        Self {
            n,
            beta,
            scale_kind: ScaleKind::Extreme { eps_bar },
            theta: None,
        }
    }

    /// Critical-line parameters: `β = β_c(ε)` with offset `theta`.
    pub fn critical(n: u32, eps: f64, theta: f64) -> Result<Self> {
        Ok(Self {
            n,
            beta: beta_c(eps)?,
            scale_kind: ScaleKind::Intermediate { eps },
            theta: Some(theta),
        })
    }

    /// Parameters with β chosen so that `α(ε) = alpha`.
    pub fn with_alpha(n: u32, scale_kind: ScaleKind, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return domain(format!("alpha target must be positive, got {alpha}"));
        }
        let beta = beta_c(scale_kind.eps())? / alpha;
        Ok(Self {
            n,
            beta,
            scale_kind,
            theta: None,
        })
    }

    /// β = 0 is accepted as a flat-landscape diagnostic.
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n > 4096 {
            return domain(format!("n must lie in [2, 4096], got {}", self.n));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return domain(format!(
                "beta must be a finite non-negative number, got {}",
                self.beta
            ));
        }
        match self.scale_kind {
            ScaleKind::Intermediate { eps } if !(eps > 0.0 && eps <= 1.0) => {
                return domain(format!("eps must lie in (0, 1], got {eps}"));
            }
            ScaleKind::Extreme { eps_bar } if !(eps_bar > 0.0 && eps_bar.is_finite()) => {
                return domain(format!("eps_bar must be positive, got {eps_bar}"));
            }
            _ => {}
        }
        if let Some(theta) = self.theta {
            if !theta.is_finite() {
                return domain("theta must be finite");
            }
            if self.beta == 0.0 {
                return domain("theta requires beta > 0");
            }
            if self.scale_kind.is_extreme() {
                return domain("theta is only defined on intermediate scales");
            }
        }
        Ok(())
    }

    pub fn is_flat(&self) -> bool {
        self.beta == 0.0
    }

    pub fn beta_sqrt_n(&self) -> f64 {
        self.beta * (self.n as f64).sqrt()
    }
}

/// Resolved scale bundle for one parameterization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scales {
    pub a_n: f64,
    pub c_n: f64,
    pub log_c_n: f64,
    pub alpha_eps: f64,
    pub beta_c_eps: f64,
    /// Root of `a_n φ(B)/B = 1`.
    pub b_n: f64,
    /// `1 / B_n`.
    pub inv_b_n: f64,
    /// `B_n / (β√n)`.
    pub alpha_n: f64,
    /// `log c_n / (β√n)`.
    pub bbar_n: f64,
    pub theta_n_mix: u64,
    pub critical: bool,
}

/// `β_c(ε) = √(2 ε log 2)`.
pub fn beta_c(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return domain(format!("eps must lie in (0, 1], got {eps}"));
    }
    Ok((2.0 * eps * LN_2).sqrt())
}

/// `α(ε) = β_c(ε) / β`.
pub fn alpha_of(eps: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return domain(format!("beta must be positive, got {beta}"));
    }
    Ok(beta_c(eps)? / beta)
}

/// Mixing time of the parity-restricted walk,
/// `θ_n = 2⌈(3/2)(n−1) log 2 / |log(1 − 2/n)|⌉`.
pub fn mixing_steps(n: u32) -> Result<u64> {
    if n <= 2 {
        return domain(format!("mixing time needs n >= 3, got {n}"));
    }
    let n = n as f64;
    let inner = 1.5 * (n - 1.0) * LN_2 / (1.0 - 2.0 / n).ln().abs();
    Ok(2 * inner.ceil() as u64)
}

pub fn solve_scales(params: &ModelParams) -> Result<Scales> {
    params.validate()?;
    let n = params.n as f64;
    let eps = params.scale_kind.eps();
    let beta_c_eps = beta_c(eps)?;
    let bsn = params.beta_sqrt_n();

    let (a_n, c_n, log_c_n, bbar_n) = if let Some(theta) = params.theta {
        let bbar = bsn - theta;
        let tail = normal_sf(bbar);
        if !(tail > 0.0) {
            return Err(Error::Numerical(format!(
                "critical-mode tail 1 - Phi({bbar}) underflows"
            )));
        }
        let log_c = bsn * bbar;
        (1.0 / tail, log_c.exp(), log_c, bbar)
    } else {
        let a_n = match params.scale_kind {
            ScaleKind::Intermediate { eps } => 2f64.powf(eps * n),
            ScaleKind::Extreme { eps_bar } => eps_bar * 2f64.powf(n),
        };
        if !(a_n > 1.0) {
            return domain(format!("a_n = {a_n} must exceed 1"));
        }
        let bbar = normal_upper_quantile(1.0 / a_n)?;
        let log_c = bsn * bbar;
        (a_n, log_c.exp(), log_c, bbar)
    };
    if !(a_n.is_finite() && c_n.is_finite() && c_n > 0.0) {
        return Err(Error::Numerical(format!(
            "non-finite scales: a_n={a_n}, c_n={c_n}"
        )));
    }

    let b_n = solve_b_n(a_n)?;
    let (alpha_eps, alpha_n) = if params.is_flat() {
        (f64::INFINITY, f64::INFINITY)
    } else {
        (beta_c_eps / params.beta, b_n / bsn)
    };
    let theta_n_mix = if params.n >= 3 {
        mixing_steps(params.n)?
    } else {
        2
    };

    Ok(Scales {
        a_n,
        c_n,
        log_c_n,
        alpha_eps,
        beta_c_eps,
        b_n,
        inv_b_n: 1.0 / b_n,
        alpha_n,
        bbar_n,
        theta_n_mix,
        critical: params.theta.is_some(),
    })
}

/// Solve `a_n φ(B)/B = 1` for `B`, bracketed in `[1, 3√(log a_n) + 3]`.
fn solve_b_n(a_n: f64) -> Result<f64> {
    let f = |b: f64| a_n * normal_pdf(b) / b - 1.0;
    let mut lo = 1.0;
    let hi = 3.0 * a_n.ln().max(0.0).sqrt() + 3.0;
    while f(lo) < 0.0 {
        lo *= 0.5;
        if lo < 1e-12 {
            return Err(Error::Numerical(format!(
                "no root of a_n phi(B)/B = 1 for a_n = {a_n}"
            )));
        }
    }
    if f(hi) > 0.0 {
        return Err(Error::Numerical(format!(
            "B_n bracket too small for a_n = {a_n}"
        )));
    }
    Ok(bisect_decreasing(f, lo, hi, 1e-15))
}

/// `h_n(v) = a_n (1 − Φ(log(c_n v) / (β√n)))`, strictly decreasing in `v`.
pub fn h_n(scales: &Scales, params: &ModelParams, v: f64) -> Result<f64> {
    if !(v > 0.0) {
        return domain(format!("h_n needs v > 0, got {v}"));
    }
    if params.is_flat() {
        return domain("h_n is undefined for beta = 0");
    }
    Ok(scales.a_n * normal_sf(scales.bbar_n + v.ln() / params.beta_sqrt_n()))
}

/// Inverse of [`h_n`] by bisection in `log v` over
/// `[c_n^{-1}, max(2, u^{-2/α_n})]`.
pub fn g_n_inv(scales: &Scales, params: &ModelParams, u: f64) -> Result<f64> {
    if !(u > 0.0) {
        return domain(format!("g_n_inv needs u > 0, got {u}"));
    }
    let v_min = (-scales.log_c_n).exp();
    let v_max = 2f64.max(u.powf(-2.0 / scales.alpha_n));
    let (h_lo, h_hi) = (h_n(scales, params, v_max)?, h_n(scales, params, v_min)?);
    if !(u >= h_lo && u <= h_hi) {
        return Err(Error::Range {
            value: u,
            lo: h_lo,
            hi: h_hi,
        });
    }
    let log_v = bisect_decreasing(
        |lv| {
            h_n(scales, params, lv.exp())
                .map(|h| h - u)
                .unwrap_or(f64::NAN)
        },
        v_min.ln(),
        v_max.ln(),
        1e-15,
    );
    Ok(log_v.exp())
}
