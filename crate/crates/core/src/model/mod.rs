//! Predictive regression with an AR(1) regressor.
//!
//! ```text
//!     y_t = d_tᵀμ + β x_{t−1} + ε_t^y
//!     x_t = γ x_{t−1} + ε_t^x,        x_0 = 0
//! ```
//!
//! with `(ε_t^y, ε_t^x)` i.i.d. bivariate normal. Inference is invariant to
//! the deterministic part `d_t` (an intercept, optionally with a linear
//! trend), so every statistic consumes series projected off `d_t`.

mod likelihood;
mod stats;

pub use likelihood::{log_density_invariant, log_density_ratio, scaling_g};
pub use stats::{
    estimate_cov, local_stats, local_stats_with_g, log_lr, suff_stats, t_statistic,
    t_statistic_from_moments, LocalStats, SuffStats,
};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::seed::{rng_from_seed, SimRng};

/// Innovation covariance of `(ε^y, ε^x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cov2 {
    pub syy: f64,
    pub sxy: f64,
    pub sxx: f64,
}

impl Cov2 {
    pub fn new(syy: f64, sxy: f64, sxx: f64) -> Result<Self> {
        let c = Self { syy, sxy, sxx };
        if !(syy.is_finite() && sxy.is_finite() && sxx.is_finite()) || syy <= 0.0 || sxx <= 0.0 {
            return Err(Error::InvalidInput(format!("invalid covariance {c:?}")));
        }
        if c.rho().abs() >= 1.0 {
            return Err(Error::InvalidInput(format!("covariance is not positive definite: {c:?}")));
        }
        Ok(c)
    }

    /// Unit variances with correlation `rho`.
    pub fn unit(rho: f64) -> Result<Self> {
        Self::new(1.0, rho, 1.0)
    }

    pub fn rho(&self) -> f64 {
        self.sxy / (self.sxx.sqrt() * self.syy.sqrt())
    }

    /// Variance of `ε^y` not explained by `ε^x`.
    pub fn syy_x(&self) -> f64 {
        self.syy - self.sxy * self.sxy / self.sxx
    }

    /// Regression coefficient of `ε^y` on `ε^x`.
    pub fn delta(&self) -> f64 {
        self.sxy / self.sxx
    }

    /// `ρ/√(1−ρ²)`.
    pub fn endogeneity(&self) -> f64 {
        let r = self.rho();
        r / (1.0 - r * r).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Deterministic {
    Intercept,
    Trend,
}

impl Deterministic {
    /// Number of deterministic regressors.
    pub fn dim(self) -> usize {
        match self {
            Deterministic::Intercept => 1,
            Deterministic::Trend => 2,
        }
    }

    pub fn min_len(self) -> usize {
        self.dim() + 2
    }

    pub fn name(self) -> &'static str {
        match self {
            Deterministic::Intercept => "intercept",
            Deterministic::Trend => "trend",
        }
    }
}

impl std::str::FromStr for Deterministic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intercept" => Ok(Deterministic::Intercept),
            "trend" => Ok(Deterministic::Trend),
            other => Err(Error::InvalidInput(format!("unknown deterministic kind `{other}`"))),
        }
    }
}

/// Coefficients of the deterministic part of the `y` equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeterministicPart {
    Intercept(f64),
    Trend { intercept: f64, slope: f64 },
}

impl DeterministicPart {
    pub fn zero(kind: Deterministic) -> Self {
        match kind {
            Deterministic::Intercept => DeterministicPart::Intercept(0.0),
            Deterministic::Trend => DeterministicPart::Trend { intercept: 0.0, slope: 0.0 },
        }
    }

    pub fn kind(&self) -> Deterministic {
        match self {
            DeterministicPart::Intercept(_) => Deterministic::Intercept,
            DeterministicPart::Trend { .. } => Deterministic::Trend,
        }
    }

    /// Value at time `t` (1-based).
    fn at(&self, t: usize) -> f64 {
        match *self {
            DeterministicPart::Intercept(mu) => mu,
            DeterministicPart::Trend { intercept, slope } => intercept + slope * t as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub beta: f64,
    pub gamma: f64,
    pub deterministic: DeterministicPart,
    pub cov: Cov2,
}

impl ModelParams {
    /// Null model (`β = 0`, zero deterministic part) at autoregressive parameter `gamma`.
    pub fn null(gamma: f64, cov: Cov2, kind: Deterministic) -> Self {
        Self { beta: 0.0, gamma, deterministic: DeterministicPart::zero(kind), cov }
    }

    pub fn kind(&self) -> Deterministic {
        self.deterministic.kind()
    }
}

/// One simulated or observed path. `y[t−1]` and `x[t−1]` hold `y_t`, `x_t`
/// for `t = 1..T`; the initial value `x_0 = 0` is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
}

impl Sample {
    pub fn new(y: Vec<f64>, x: Vec<f64>) -> Result<Self> {
        if y.len() != x.len() {
            return Err(Error::InvalidInput("y and x must have the same length".into()));
        }
        if y.len() < 3 {
            return Err(Error::InvalidInput("a sample needs T >= 3".into()));
        }
        Ok(Self { y, x })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// `(x_0, …, x_{T−1})` with `x_0 = 0`.
    pub fn lagged_x(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.x.len());
        v.push(0.0);
        v.extend_from_slice(&self.x[..self.x.len() - 1]);
        v
    }
}

pub fn simulate(params: &ModelParams, t: usize, seed: u64) -> Sample {
    simulate_with_rng(params, t, &mut rng_from_seed(seed))
}

pub fn simulate_with_rng(params: &ModelParams, t: usize, rng: &mut SimRng) -> Sample {
    let cov = params.cov;
    let sx = cov.sxx.sqrt();
    let se = cov.syy_x().max(0.0).sqrt();
    let delta = cov.delta();
    let mut y = Vec::with_capacity(t);
    let mut x = Vec::with_capacity(t);
    let mut prev = 0.0;
    for step in 1..=t {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let ex = sx * z1;
        let ey = delta * ex + se * z2;
        let xt = params.gamma * prev + ex;
        y.push(params.deterministic.at(step) + params.beta * prev + ey);
        x.push(xt);
        prev = xt;
    }
    Sample { y, x }
}

/// Residual of `v` from its projection on the deterministic regressors
/// (`1_T`, or `1_T` and `t = 1..T`).
pub fn demean(v: &[f64], kind: Deterministic) -> Vec<f64> {
    let n = v.len();
    let mean = v.iter().sum::<f64>() / n as f64;
    let mut out: Vec<f64> = v.iter().map(|a| a - mean).collect();
    if kind == Deterministic::Trend {
        let tbar = (n as f64 + 1.0) / 2.0;
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, r) in out.iter().enumerate() {
            let tc = (i + 1) as f64 - tbar;
            num += tc * r;
            den += tc * tc;
        }
        let slope = num / den;
        for (i, r) in out.iter_mut().enumerate() {
            *r -= slope * ((i + 1) as f64 - tbar);
        }
    }
    out
}
