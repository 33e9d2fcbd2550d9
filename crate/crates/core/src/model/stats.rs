use super::{demean, scaling_g, Cov2, Deterministic, Sample};
use crate::error::{Error, Result};

/// Sufficient statistics of the invariant likelihood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuffStats {
    pub s_beta: f64,
    pub s_gamma: f64,
    pub s_betabeta: f64,
    pub s_gammagamma: f64,
}

/// Exact quadratic expansion of the log likelihood ratio around
/// `(β₀, γ̄)` in the local parameters `(b, c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalStats {
    pub center: f64,
    pub g: f64,
    pub r_beta: f64,
    pub r_gamma: f64,
    pub k_betabeta: f64,
    pub k_betagamma: f64,
    pub k_gammagamma: f64,
}

pub fn suff_stats(s: &Sample, cov: &Cov2, beta0: f64, kind: Deterministic) -> SuffStats {
    let xl = s.lagged_x();
    let xlm = demean(&xl, kind);
    let delta = cov.delta();
    let syy_x = cov.syy_x();
    let mut cross = 0.0;
    let mut sxm = 0.0;
    let mut lag_x = 0.0;
    let mut lag_sq = 0.0;
    for t in 0..s.len() {
        cross += xlm[t] * (s.y[t] - beta0 * xl[t] - delta * s.x[t]);
        sxm += xlm[t] * xlm[t];
        lag_x += xl[t] * s.x[t];
        lag_sq += xl[t] * xl[t];
    }
    let s_beta = cross / syy_x;
    let s_betabeta = sxm / syy_x;
    SuffStats {
        s_beta,
        s_gamma: lag_x / cov.sxx - delta * s_beta,
        s_betabeta,
        s_gammagamma: lag_sq / cov.sxx + delta * delta * s_betabeta,
    }
}

pub fn local_stats(s: &Sample, cov: &Cov2, center: f64, beta0: f64, kind: Deterministic) -> LocalStats {
    local_stats_with_g(s, cov, center, scaling_g(center, s.len()), beta0, kind)
}

/// As [`local_stats`] with a precomputed `g = g_T(γ̄)`.
pub fn local_stats_with_g(
    s: &Sample,
    cov: &Cov2,
    center: f64,
    g: f64,
    beta0: f64,
    kind: Deterministic,
) -> LocalStats {
    let xl = s.lagged_x();
    let xlm = demean(&xl, kind);
    let delta = cov.delta();
    let a = cov.endogeneity();
    let mut rb = 0.0;
    let mut rg = 0.0;
    let mut sxm = 0.0;
    let mut sxx = 0.0;
    for t in 0..s.len() {
        let innov_x = s.x[t] - center * xl[t];
        rb += xlm[t] * (s.y[t] - beta0 * xl[t] - delta * innov_x);
        rg += xl[t] * innov_x;
        sxm += xlm[t] * xlm[t];
        sxx += xl[t] * xl[t];
    }
    let r_beta = g * rb / (cov.syy_x().sqrt() * cov.sxx.sqrt());
    let r_gamma = g * rg / cov.sxx - a * r_beta;
    let k_betabeta = g * g * sxm / cov.sxx;
    LocalStats {
        center,
        g,
        r_beta,
        r_gamma,
        k_betabeta,
        k_betagamma: -a * k_betabeta,
        k_gammagamma: g * g * (a * a * sxm + sxx) / cov.sxx,
    }
}

/// `Λ(b, c) = [b, c]·R − ½[b, c]·K·[b, c]ᵀ`, the log likelihood ratio of
/// `(β₀ + b·σ_{yy.x}^{1/2}σ_xx^{−1/2}g, γ̄ + c·g)` against `(β₀, γ̄)`.
#[inline]
pub fn log_lr(ls: &LocalStats, b: f64, c: f64) -> f64 {
    b * ls.r_beta + c * ls.r_gamma
        - 0.5 * (b * b * ls.k_betabeta + 2.0 * b * c * ls.k_betagamma + c * c * ls.k_gammagamma)
}

/// One-sided t-statistic with known error variance `sigma_yy`.
pub fn t_statistic(s: &Sample, sigma_yy: f64, beta0: f64, kind: Deterministic) -> Result<f64> {
    let xlm = demean(&s.lagged_x(), kind);
    let sxm: f64 = xlm.iter().map(|v| v * v).sum();
    let sxy: f64 = xlm.iter().zip(&s.y).map(|(a, b)| a * b).sum();
    t_statistic_from_moments(sxy, sxm, sigma_yy, beta0)
}

/// t-statistic from `Σ x^μ_{t−1} y_t` and `Σ (x^μ_{t−1})²`.
#[inline]
pub fn t_statistic_from_moments(sxy: f64, sxm: f64, sigma_yy: f64, beta0: f64) -> Result<f64> {
    if !(sxm > 0.0) {
        return Err(Error::DegenerateSample("regressor has no variation after demeaning"));
    }
    let beta_hat = sxy / sxm;
    Ok((beta_hat - beta0) * sxm.sqrt() / sigma_yy.sqrt())
}

/// Innovation covariance from OLS residuals: `y` on the deterministic part
/// and `x_{t−1}`, `x_t` on `x_{t−1}` without intercept. Divisor `T`.
pub fn estimate_cov(s: &Sample, kind: Deterministic) -> Result<Cov2> {
    let t = s.len();
    if t < kind.dim() + 2 {
        return Err(Error::DegenerateSample("too few observations to estimate the covariance"));
    }
    let xl = s.lagged_x();
    let xlm = demean(&xl, kind);
    let ym = demean(&s.y, kind);
    let sxm: f64 = xlm.iter().map(|v| v * v).sum();
    let lag_sq: f64 = xl.iter().map(|v| v * v).sum();
    if !(sxm > 0.0) || !(lag_sq > 0.0) {
        return Err(Error::DegenerateSample("regressor has no variation"));
    }
    let beta_hat = xlm.iter().zip(&ym).map(|(a, b)| a * b).sum::<f64>() / sxm;
    let gamma_hat = xl.iter().zip(&s.x).map(|(a, b)| a * b).sum::<f64>() / lag_sq;
    let (mut syy, mut sxy, mut sxx) = (0.0, 0.0, 0.0);
    for i in 0..t {
        let ey = ym[i] - beta_hat * xlm[i];
        let ex = s.x[i] - gamma_hat * xl[i];
        syy += ey * ey;
        sxy += ey * ex;
        sxx += ex * ex;
    }
    let n = t as f64;
    let (syy, sxy, sxx) = (syy / n, sxy / n, sxx / n);
    let det = syy * sxx - sxy * sxy;
    if !(syy > 0.0 && sxx > 0.0) || !(det > 1e-10 * syy * sxx) {
        return Err(Error::DegenerateSample("residual covariance is not positive definite"));
    }
    Ok(Cov2 { syy, sxy, sxx })
}
