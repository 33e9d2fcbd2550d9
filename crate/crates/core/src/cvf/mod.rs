//! Critical value functions.
//!
//! For a grid `γ_1, …, γ_n` the test rejects when
//!
//! ```text
//!     ψ(r) > κ(r) = Σ_i k_i f_{0,γ_i}(r) / f_ν(r)
//! ```
//!
//! where `f_ν` is either the equal-weight mixture of the grid densities or
//! the density at the centring point. Every density ratio is an
//! exponentiated local log likelihood ratio `Λ_i = c_i R_γ − ½c_i² K_γγ`
//! around the centre `γ̄`, so `κ` only depends on the data through
//! `(R_γ, K_γγ)`.

mod bound;
mod calibrate;
mod format;
mod grid;
mod refine;
mod rejection;

pub use bound::mc_discrepancy_bound;
pub use calibrate::{assemble_lp, calibrate, sample_mixture, Calibration, MixtureDraw};
pub use grid::{Grid, GridMapping};
pub use refine::{refine, refine_with_trail, uniform_offsets, IterationRecord, RefineConfig, RefineOutcome};
pub use rejection::{
    local_beta, null_rejection, power_at, rejection_rate, rejection_under, summarize, DrawSummary, NullPanel,
    RejectionEstimate,
};

use crate::error::{Error, Result};
use crate::lp::SimplexOptions;
use crate::model::{
    estimate_cov, local_stats_with_g, scaling_g, t_statistic, Cov2, Deterministic, LocalStats,
    Sample,
};
use crate::normal_quantile;

/// Denominator density of the critical value function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMeasure {
    /// Equal weights `1/n` on the grid.
    NuStar,
    /// Point mass at the grid centre.
    NuDagger,
}

impl BaselineMeasure {
    pub fn name(self) -> &'static str {
        match self {
            BaselineMeasure::NuStar => "nu_star",
            BaselineMeasure::NuDagger => "nu_dagger",
        }
    }
}

impl std::str::FromStr for BaselineMeasure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nu_star" => Ok(BaselineMeasure::NuStar),
            "nu_dagger" => Ok(BaselineMeasure::NuDagger),
            other => Err(Error::InvalidInput(format!("unknown baseline measure `{other}`"))),
        }
    }
}

/// Whether the statistic and the CVF inputs use the design covariance or
/// one estimated from each sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovMode {
    Known,
    Estimated,
}

impl CovMode {
    pub fn name(self) -> &'static str {
        match self {
            CovMode::Known => "known",
            CovMode::Estimated => "estimated",
        }
    }

    /// Covariance used for the statistic and `(R_γ, K_γγ)` on sample `s`.
    pub fn resolve(self, s: &Sample, design: &Cov2, kind: Deterministic) -> Result<Cov2> {
        match self {
            CovMode::Known => Ok(*design),
            CovMode::Estimated => estimate_cov(s, kind),
        }
    }
}

impl std::str::FromStr for CovMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "known" => Ok(CovMode::Known),
            "estimated" => Ok(CovMode::Estimated),
            other => Err(Error::InvalidInput(format!("unknown cov mode `{other}`"))),
        }
    }
}

/// Replace `κ` by a constant where the local statistics indicate a
/// stationary or explosive regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flattening {
    pub ratio_threshold: f64,
    pub k_low: f64,
    pub k_high: f64,
    pub value: f64,
}

impl Flattening {
    pub fn for_alpha(alpha: f64) -> Self {
        Self { ratio_threshold: 1e2, k_low: 1e-2, k_high: 1e6, value: normal_quantile(1.0 - alpha) }
    }

    /// Only the `|R_γ/K_γγ|` rule.
    pub fn ratio_only(alpha: f64) -> Self {
        Self { k_low: 0.0, k_high: f64::INFINITY, ..Self::for_alpha(alpha) }
    }

    /// Only the `K_γγ` range rule.
    pub fn range_only(alpha: f64) -> Self {
        Self { ratio_threshold: f64::INFINITY, ..Self::for_alpha(alpha) }
    }

    pub fn applies(&self, r_gamma: f64, k_gg: f64) -> bool {
        (r_gamma / k_gg).abs() > self.ratio_threshold || k_gg < self.k_low || k_gg > self.k_high
    }
}

/// Test statistic evaluated on a sample with a given covariance.
pub trait Statistic: Sync {
    fn eval(&self, s: &Sample, cov: &Cov2) -> Result<f64>;
}

impl<F> Statistic for F
where
    F: Fn(&Sample, &Cov2) -> Result<f64> + Sync,
{
    fn eval(&self, s: &Sample, cov: &Cov2) -> Result<f64> {
        self(s, cov)
    }
}

/// Which variance scales the t-statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceScale {
    Syy,
    SyyX,
}

/// The one-sided t-statistic for `H₀: β ≤ β₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TStatistic {
    pub beta0: f64,
    pub kind: Deterministic,
    pub scale: VarianceScale,
}

impl TStatistic {
    pub fn new(kind: Deterministic) -> Self {
        Self { beta0: 0.0, kind, scale: VarianceScale::Syy }
    }
}

impl Statistic for TStatistic {
    fn eval(&self, s: &Sample, cov: &Cov2) -> Result<f64> {
        let v = match self.scale {
            VarianceScale::Syy => cov.syy,
            VarianceScale::SyyX => cov.syy_x(),
        };
        t_statistic(s, v, self.beta0, self.kind)
    }
}

/// Settings shared by calibration and evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvfSettings {
    pub alpha: f64,
    pub beta0: f64,
    pub kind: Deterministic,
    pub measure: BaselineMeasure,
    pub cov_mode: CovMode,
    pub flattening: Option<Flattening>,
    pub simplex: SimplexOptions,
}

impl CvfSettings {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            beta0: 0.0,
            kind: Deterministic::Intercept,
            measure: BaselineMeasure::NuStar,
            cov_mode: CovMode::Known,
            flattening: None,
            simplex: SimplexOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidInput(format!("alpha must lie in (0,1), got {}", self.alpha)));
        }
        Ok(())
    }
}

/// A calibrated critical value function. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct CvfModel {
    grid: Grid,
    k: Vec<f64>,
    settings: CvfSettings,
    design_cov: Cov2,
    g: f64,
    local: Vec<f64>,
}

impl CvfModel {
    pub fn new(grid: Grid, k: Vec<f64>, settings: CvfSettings, design_cov: Cov2) -> Result<Self> {
        settings.validate()?;
        if k.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "{} multipliers for a grid of {} points",
                k.len(),
                grid.len()
            )));
        }
        if k.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("multipliers must be finite".into()));
        }
        let g = scaling_g(grid.center(), grid.sample_len());
        let local = grid.local_offsets();
        Ok(Self { grid, k, settings, design_cov, g, local })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn settings(&self) -> &CvfSettings {
        &self.settings
    }

    pub fn alpha(&self) -> f64 {
        self.settings.alpha
    }

    pub fn design_cov(&self) -> &Cov2 {
        &self.design_cov
    }

    pub fn with_flattening(mut self, flattening: Option<Flattening>) -> Self {
        self.settings.flattening = flattening;
        self
    }

    /// Local statistics at the grid centre.
    pub fn local_stats(&self, s: &Sample, cov: &Cov2) -> LocalStats {
        local_stats_with_g(s, cov, self.grid.center(), self.g, self.settings.beta0, self.settings.kind)
    }

    /// `κ` as a function of `(R_γ, K_γγ)`, flattening included.
    pub fn kappa(&self, r_gamma: f64, k_gg: f64) -> f64 {
        if let Some(f) = &self.settings.flattening {
            if f.applies(r_gamma, k_gg) {
                return f.value;
            }
        }
        self.raw_kappa(r_gamma, k_gg)
    }

    /// `κ` without flattening.
    pub fn raw_kappa(&self, r_gamma: f64, k_gg: f64) -> f64 {
        let lams: Vec<f64> = self
            .local
            .iter()
            .map(|&c| c * r_gamma - 0.5 * c * c * k_gg)
            .collect();
        match self.settings.measure {
            BaselineMeasure::NuStar => {
                let m = lams.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut num = 0.0;
                let mut den = 0.0;
                for (k, l) in self.k.iter().zip(&lams) {
                    let e = (l - m).exp();
                    num += k * e;
                    den += e;
                }
                num / (den / lams.len() as f64)
            }
            BaselineMeasure::NuDagger => signed_exp_sum(&self.k, &lams),
        }
    }
}

/// `Σ k_i e^{λ_i}` evaluated through separate log-sum-exps of the
/// positive and negative parts.
fn signed_exp_sum(k: &[f64], lams: &[f64]) -> f64 {
    let lse = |sign: f64| {
        let terms: Vec<f64> = k
            .iter()
            .zip(lams)
            .filter(|(kv, _)| kv.signum() == sign && **kv != 0.0)
            .map(|(kv, l)| l + kv.abs().ln())
            .collect();
        let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return m;
        }
        m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
    };
    let pos = lse(1.0);
    let neg = lse(-1.0);
    if pos == neg {
        return 0.0;
    }
    let m = pos.max(neg);
    let diff = (pos - m).exp() - (neg - m).exp();
    if m > 700.0 {
        return diff.signum() * f64::INFINITY;
    }
    m.exp() * diff
}

/// `κ(r)` on a sample, using `cov` for the local statistics.
pub fn evaluate_cvf(model: &CvfModel, s: &Sample, cov: &Cov2) -> f64 {
    let ls = model.local_stats(s, cov);
    model.kappa(ls.r_gamma, ls.k_gammagamma)
}

pub use format::{parse_model, write_model};
