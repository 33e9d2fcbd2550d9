//! Comparison tests: the t-test with a standard normal critical value, two
//! residual bootstraps and subsampling.

use rand::Rng;
use rayon::prelude::*;

use crate::cvf::RejectionEstimate;
use crate::error::{Error, Result};
use crate::model::{demean, estimate_cov, simulate_with_rng, t_statistic, Cov2, Deterministic, ModelParams, Sample};
use crate::normal_quantile;
use crate::seed::{derive_seed, rng_for, rng_from_seed, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    NormalQuantile,
    /// Joint resampling of centred residual pairs.
    BootstrapNp,
    /// Bivariate normal innovations with the estimated covariance.
    BootstrapParam,
    Subsampling,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 4] = [
        BaselineKind::NormalQuantile,
        BaselineKind::BootstrapNp,
        BaselineKind::BootstrapParam,
        BaselineKind::Subsampling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::NormalQuantile => "normal_quantile",
            BaselineKind::BootstrapNp => "bootstrap_np",
            BaselineKind::BootstrapParam => "bootstrap_param",
            BaselineKind::Subsampling => "subsampling",
        }
    }
}

impl std::str::FromStr for BaselineKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown baseline `{s}`")))
    }
}

/// Subsampling block length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockRule {
    /// `⌊T^{2/3}⌋`.
    TwoThirds,
    Fixed(usize),
}

impl BlockRule {
    pub fn length(self, t: usize) -> usize {
        match self {
            BlockRule::TwoThirds => ((t as f64).powf(2.0 / 3.0) + 1e-9).floor() as usize,
            BlockRule::Fixed(b) => b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineConfig {
    pub kind: BaselineKind,
    pub replications: usize,
    pub block: BlockRule,
    pub alpha: f64,
    pub beta0: f64,
    pub deterministic: Deterministic,
    /// Error variance used in the observed statistic; estimated from the
    /// sample when absent.
    pub sigma_yy: Option<f64>,
}

impl BaselineConfig {
    pub fn new(kind: BaselineKind, alpha: f64) -> Self {
        Self {
            kind,
            replications: 399,
            block: BlockRule::TwoThirds,
            alpha,
            beta0: 0.0,
            deterministic: Deterministic::Intercept,
            sigma_yy: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidInput(format!("alpha must lie in (0,1), got {}", self.alpha)));
        }
        if matches!(self.kind, BaselineKind::BootstrapNp | BaselineKind::BootstrapParam) && self.replications < 99 {
            return Err(Error::InvalidInput("bootstrap needs at least 99 replications".into()));
        }
        if let Some(v) = self.sigma_yy {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput("sigma_yy must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineOutcome {
    pub reject: bool,
    pub statistic: f64,
    pub critical_value: f64,
    /// The critical value came from a single block or otherwise carries no
    /// information about the null distribution.
    pub degenerate: bool,
}

/// Rejects when `ψ > Φ⁻¹(1 − α)`.
pub fn normal_quantile_test(psi: f64, alpha: f64) -> bool {
    psi > normal_quantile(1.0 - alpha)
}

/// `⌈(1−α)N⌉`-th smallest value.
pub fn upper_quantile(values: &mut [f64], alpha: f64) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    let rank = (((1.0 - alpha) * n as f64) - 1e-9).ceil().max(1.0) as usize;
    values[rank.min(n) - 1]
}

fn observed_statistic(s: &Sample, cfg: &BaselineConfig) -> Result<f64> {
    let syy = match cfg.sigma_yy {
        Some(v) => v,
        None => estimate_cov(s, cfg.deterministic)?.syy,
    };
    t_statistic(s, syy, cfg.beta0, cfg.deterministic)
}

/// OLS fit used to build bootstrap samples.
struct NullFit {
    gamma: f64,
    resid_y: Vec<f64>,
    resid_x: Vec<f64>,
}

fn fit(s: &Sample, kind: Deterministic) -> Result<NullFit> {
    let xl = s.lagged_x();
    let lag_sq: f64 = xl.iter().map(|v| v * v).sum();
    if !(lag_sq > 0.0) {
        return Err(Error::DegenerateSample("lagged regressor is identically zero"));
    }
    let gamma = xl.iter().zip(&s.x).map(|(a, b)| a * b).sum::<f64>() / lag_sq;
    let xlm = demean(&xl, kind);
    let ym = demean(&s.y, kind);
    let sxm: f64 = xlm.iter().map(|v| v * v).sum();
    if !(sxm > 0.0) {
        return Err(Error::DegenerateSample("regressor has no variation after demeaning"));
    }
    let beta = xlm.iter().zip(&ym).map(|(a, b)| a * b).sum::<f64>() / sxm;
    let centre = |v: Vec<f64>| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.into_iter().map(|e| e - m).collect::<Vec<_>>()
    };
    let resid_y = centre(ym.iter().zip(&xlm).map(|(y, x)| y - beta * x).collect());
    let resid_x = centre(s.x.iter().zip(&xl).map(|(x, l)| x - gamma * l).collect());
    Ok(NullFit { gamma, resid_y, resid_x })
}

fn rebuild(gamma: f64, beta0: f64, innovations: impl Iterator<Item = (f64, f64)>) -> Sample {
    let mut y = Vec::new();
    let mut x = Vec::new();
    let mut prev = 0.0;
    for (ey, ex) in innovations {
        y.push(beta0 * prev + ey);
        prev = gamma * prev + ex;
        x.push(prev);
    }
    Sample { y, x }
}

/// Residual bootstrap under the null `β = β₀` with `γ` replaced by its OLS
/// estimate. Pseudo-series are rebuilt recursively from `x₀ = 0`.
pub fn bootstrap_test(s: &Sample, cfg: &BaselineConfig, seed: u64) -> Result<BaselineOutcome> {
    cfg.validate()?;
    let psi = observed_statistic(s, cfg)?;
    let f = fit(s, cfg.deterministic)?;
    let t = s.len();
    let mut rng = rng_from_seed(derive_seed(seed, &[stream::BOOTSTRAP]));
    let mut stats = Vec::with_capacity(cfg.replications);
    match cfg.kind {
        BaselineKind::BootstrapNp => {
            let syy = f.resid_y.iter().map(|e| e * e).sum::<f64>() / t as f64;
            for _ in 0..cfg.replications {
                let idx: Vec<usize> = (0..t).map(|_| rng.random_range(0..t)).collect();
                let b = rebuild(f.gamma, cfg.beta0, idx.iter().map(|&i| (f.resid_y[i], f.resid_x[i])));
                stats.push(t_statistic(&b, syy, cfg.beta0, cfg.deterministic)?);
            }
        }
        BaselineKind::BootstrapParam => {
            let cov = estimate_cov(s, cfg.deterministic)?;
            let params = ModelParams { beta: cfg.beta0, ..ModelParams::null(f.gamma, cov, cfg.deterministic) };
            for _ in 0..cfg.replications {
                let b = simulate_with_rng(&params, t, &mut rng);
                stats.push(t_statistic(&b, cov.syy, cfg.beta0, cfg.deterministic)?);
            }
        }
        other => {
            return Err(Error::InvalidInput(format!("`{}` is not a bootstrap", other.name())));
        }
    }
    let cv = upper_quantile(&mut stats, cfg.alpha);
    Ok(BaselineOutcome { reject: psi > cv, statistic: psi, critical_value: cv, degenerate: false })
}

/// Block `[start, start + len)` as a series of its own: `y` unchanged and
/// `x` shifted so that the observation before the block is the origin.
pub fn block(s: &Sample, start: usize, len: usize) -> Sample {
    let origin = if start == 0 { 0.0 } else { s.x[start - 1] };
    Sample {
        y: s.y[start..start + len].to_vec(),
        x: s.x[start..start + len].iter().map(|v| v - origin).collect(),
    }
}

/// Statistic on every overlapping block of the configured length.
pub fn block_statistics(s: &Sample, cfg: &BaselineConfig, syy: f64) -> Result<Vec<f64>> {
    let t = s.len();
    let b = cfg.block.length(t);
    if b < cfg.deterministic.min_len() || b > t {
        return Err(Error::InvalidInput(format!("block length {b} outside [{}, {t}]", cfg.deterministic.min_len())));
    }
    (0..=t - b)
        .map(|start| t_statistic(&block(s, start, b), syy, cfg.beta0, cfg.deterministic))
        .collect()
}

/// Subsampling critical value from the statistic on all overlapping blocks.
/// The seed is unused; it is accepted so all baselines share a signature.
pub fn subsampling_test(s: &Sample, cfg: &BaselineConfig, _seed: u64) -> Result<BaselineOutcome> {
    cfg.validate()?;
    let syy = match cfg.sigma_yy {
        Some(v) => v,
        None => estimate_cov(s, cfg.deterministic)?.syy,
    };
    let psi = t_statistic(s, syy, cfg.beta0, cfg.deterministic)?;
    let mut stats = block_statistics(s, cfg, syy)?;
    let degenerate = stats.len() < 2;
    let cv = upper_quantile(&mut stats, cfg.alpha);
    Ok(BaselineOutcome { reject: psi > cv, statistic: psi, critical_value: cv, degenerate })
}

/// Dispatches on `cfg.kind`.
pub fn run_baseline(s: &Sample, cfg: &BaselineConfig, seed: u64) -> Result<BaselineOutcome> {
    match cfg.kind {
        BaselineKind::NormalQuantile => {
            cfg.validate()?;
            let psi = observed_statistic(s, cfg)?;
            let cv = normal_quantile(1.0 - cfg.alpha);
            Ok(BaselineOutcome { reject: psi > cv, statistic: psi, critical_value: cv, degenerate: false })
        }
        BaselineKind::BootstrapNp | BaselineKind::BootstrapParam => bootstrap_test(s, cfg, seed),
        BaselineKind::Subsampling => subsampling_test(s, cfg, seed),
    }
}

/// Null rejection frequency of a baseline at `gamma` over `reps` samples.
/// Samples come from the same stream as the CVF rejection estimates, so
/// methods compared at one `γ` see identical data.
pub fn baseline_rejection(
    cfg: &BaselineConfig,
    gamma: f64,
    cov: &Cov2,
    t: usize,
    reps: usize,
    seed: u64,
) -> Result<RejectionEstimate> {
    let params = ModelParams::null(gamma, *cov, cfg.deterministic);
    let count = (0..reps)
        .into_par_iter()
        .map(|r| {
            let path = [stream::FRESH, gamma.to_bits(), r as u64];
            let s = simulate_with_rng(&params, t, &mut rng_for(seed, &path));
            let inner = derive_seed(seed, &[stream::BASELINE, gamma.to_bits(), r as u64]);
            Ok(run_baseline(&s, cfg, inner)?.reject as usize)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    Ok(RejectionEstimate::from_count(count, reps))
}
