//! Brownian and Ornstein–Uhlenbeck functionals of the local limit
//! experiment at the unit root, and Monte Carlo distance checks between
//! finite-sample local statistics and their limits.
//!
//! Paths are Euler discretisations on `[0, 1]` with `N` steps. Stochastic
//! integrals are left-point sums, which is also how the finite-sample sums
//! pair `x_{t−1}` with the innovation at `t`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::model::{local_stats, simulate_with_rng, t_statistic, Cov2, Deterministic, ModelParams, Sample};
use crate::seed::{rng_for, stream, SimRng};

/// How the limit functionals are assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitReading {
    /// `R_γ = √2[∫W^μ dW_x − a R_β]` and
    /// `K_γγ = 2[ρ/(1−ρ²)∫(W^μ_c)² + ∫(W^μ_c)²]`, term by term.
    AsDisplayed,
    /// The limits the finite-sample statistics centred at `γ̄ = 1` actually
    /// have under `γ = 1 + c/T`:
    /// `R_γ = √2[∫W_c dW_x + c∫W_c²] − a R_β` and
    /// `K_γγ = 2[a²∫(W^μ_c)² + ∫W_c²]`.
    Consistent,
}

impl LimitReading {
    pub fn name(self) -> &'static str {
        match self {
            LimitReading::AsDisplayed => "as_displayed",
            LimitReading::Consistent => "consistent",
        }
    }
}

impl std::str::FromStr for LimitReading {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "as_displayed" => Ok(LimitReading::AsDisplayed),
            "consistent" => Ok(LimitReading::Consistent),
            other => Err(Error::InvalidInput(format!("unknown limit reading `{other}`"))),
        }
    }
}

/// One draw of the limit local statistics, plus the limit of the
/// t-statistic on the same path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitDraw {
    pub c: f64,
    pub r_beta: f64,
    pub r_gamma: f64,
    pub k_betabeta: f64,
    pub k_betagamma: f64,
    pub k_gammagamma: f64,
    pub psi: f64,
    pub steps: usize,
}

/// Independent `N(0, 1/N)` increments for `W_x` and `W_y`.
fn increments(n: usize, rng: &mut SimRng) -> (Vec<f64>, Vec<f64>) {
    let sd = (1.0 / n as f64).sqrt();
    let mut dwx = Vec::with_capacity(n);
    let mut dwy = Vec::with_capacity(n);
    for _ in 0..n {
        dwx.push(sd * rng.sample::<f64, _>(StandardNormal));
        dwy.push(sd * rng.sample::<f64, _>(StandardNormal));
    }
    (dwx, dwy)
}

fn functionals(c: f64, rho: f64, dwx: &[f64], dwy: &[f64], reading: LimitReading) -> LimitDraw {
    let n = dwx.len();
    let dt = 1.0 / n as f64;
    let a = rho / (1.0 - rho * rho).sqrt();
    // left-point sums over the OU path and the plain Brownian path
    let (mut wc, mut w) = (0.0, 0.0);
    let (mut wc_mean, mut wc_sq, mut wc_dx, mut wc_dy) = (0.0, 0.0, 0.0, 0.0);
    let (mut w_mean, mut w_dx) = (0.0, 0.0);
    let (mut wx_end, mut wy_end) = (0.0, 0.0);
    for k in 0..n {
        wc_mean += wc * dt;
        wc_sq += wc * wc * dt;
        wc_dx += wc * dwx[k];
        wc_dy += wc * dwy[k];
        w_mean += w * dt;
        w_dx += w * dwx[k];
        wc += c * wc * dt + dwx[k];
        w += dwx[k];
        wx_end += dwx[k];
        wy_end += dwy[k];
    }
    let wcm_sq = wc_sq - wc_mean * wc_mean;
    let wcm_dy = wc_dy - wc_mean * wy_end;
    let wcm_dx = wc_dx - wc_mean * wx_end;
    let wm_dx = w_dx - w_mean * wx_end;
    let s2 = std::f64::consts::SQRT_2;

    let r_beta = s2 * (wcm_dy - a * c * wcm_sq);
    let k_betabeta = 2.0 * wcm_sq;
    let (r_gamma, k_gammagamma) = match reading {
        LimitReading::AsDisplayed => (
            s2 * (wm_dx - a * r_beta),
            2.0 * (rho / (1.0 - rho * rho) * wcm_sq + wcm_sq),
        ),
        LimitReading::Consistent => (
            s2 * (wc_dx + c * wc_sq) - a * r_beta,
            2.0 * (a * a * wcm_sq + wc_sq),
        ),
    };
    // ε^y/σ_yy^{1/2} = ρ dW_x + (1−ρ²)^{1/2} dW_y
    let psi = (rho * wcm_dx + (1.0 - rho * rho).sqrt() * wcm_dy) / wcm_sq.sqrt();
    LimitDraw {
        c,
        r_beta,
        r_gamma,
        k_betabeta,
        k_betagamma: -a * k_betabeta,
        k_gammagamma,
        psi,
        steps: n,
    }
}

/// One limit draw with `N` Euler steps on `[0, 1]`.
pub fn simulate_limit_draw(c: f64, rho: f64, steps: usize, seed: u64, reading: LimitReading) -> LimitDraw {
    let mut rng = rng_for(seed, &[stream::LIMIT]);
    let (dwx, dwy) = increments(steps, &mut rng);
    functionals(c, rho, &dwx, &dwy, reading)
}

/// The sample of length `t` whose innovations are the limit increments
/// summed over blocks of `N/t` steps, so it converges to the same path.
fn coupled_sample(c: f64, rho: f64, t: usize, dwx: &[f64], dwy: &[f64]) -> Sample {
    let n = dwx.len();
    let per = n / t;
    let scale = (t as f64).sqrt();
    let gamma = 1.0 + c / t as f64;
    let sy = (1.0 - rho * rho).sqrt();
    let mut x = Vec::with_capacity(t);
    let mut y = Vec::with_capacity(t);
    let mut prev = 0.0;
    for b in 0..t {
        let z1: f64 = dwx[b * per..(b + 1) * per].iter().sum::<f64>() * scale;
        let z2: f64 = dwy[b * per..(b + 1) * per].iter().sum::<f64>() * scale;
        y.push(rho * z1 + sy * z2);
        prev = gamma * prev + z1;
        x.push(prev);
    }
    Sample { y, x }
}

/// Regime of the autoregressive parameter for [`convergence_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    Stationary(f64),
    Integrated,
    Explosive(f64),
}

impl Regime {
    pub fn gamma(self) -> f64 {
        match self {
            Regime::Stationary(g) | Regime::Explosive(g) => g,
            Regime::Integrated => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::Stationary(_) => "stationary",
            Regime::Integrated => "integrated",
            Regime::Explosive(_) => "explosive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceConfig {
    pub regime: Regime,
    pub rho: f64,
    pub ladder: Vec<usize>,
    pub draws: usize,
    /// Euler steps for limit draws; every `T` on the ladder must divide it.
    pub steps: usize,
    pub seed: u64,
    pub reading: LimitReading,
}

impl ConvergenceConfig {
    pub fn new(regime: Regime, rho: f64, seed: u64) -> Self {
        let ladder = match regime {
            Regime::Integrated => vec![100, 400, 1600],
            _ => vec![250, 1000, 4000],
        };
        Self { regime, rho, ladder, draws: 2000, steps: 6400, seed, reading: LimitReading::Consistent }
    }
}

/// Distance between the finite-sample and limit laws of one coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceRow {
    pub t: usize,
    pub coordinate: &'static str,
    /// Kolmogorov–Smirnov distance (one-sample against a normal limit,
    /// two-sample against simulated limit draws). For a constant limit this
    /// is the mean absolute deviation from it instead.
    pub ks: f64,
    pub mean: f64,
    pub variance: f64,
    pub limit_mean: f64,
    pub limit_variance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub regime: Regime,
    pub rho: f64,
    pub rows: Vec<DistanceRow>,
}

impl ConvergenceReport {
    /// KS distances for `coordinate` in ladder order.
    pub fn ks_path(&self, coordinate: &str) -> Vec<f64> {
        self.rows.iter().filter(|r| r.coordinate == coordinate).map(|r| r.ks).collect()
    }
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, var)
}

/// One-sample KS distance of `v` against `N(mean, var)`.
pub fn ks_normal(v: &[f64], mean: f64, var: f64) -> f64 {
    let dist = Normal::new(mean, var.sqrt()).expect("positive variance");
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = dist.cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample KS distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
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

type Coordinates = [(&'static str, Vec<f64>); 5];

fn columns(stats: &[[f64; 5]]) -> Coordinates {
    let col = |k: usize| stats.iter().map(|s| s[k]).collect::<Vec<_>>();
    [
        ("r_beta", col(0)),
        ("r_gamma", col(1)),
        ("k_betabeta", col(2)),
        ("k_gammagamma", col(3)),
        ("psi", col(4)),
    ]
}

/// Compares finite-sample local statistics at centring `γ` with their
/// limit along a ladder of sample sizes.
///
/// Stationary: `R_β`, `R_γ` and `ψ` against their normal limits
/// (`K^S` gives the variances); `K` coordinates against their
/// probability limits through the mean. Unit root: every coordinate against
/// limit draws built from the same Brownian increments as the finite
/// samples. Explosive: `ψ` against the standard normal only.
pub fn convergence_check(cfg: &ConvergenceConfig) -> Result<ConvergenceReport> {
    if cfg.draws < 2 || cfg.ladder.is_empty() {
        return Err(Error::InvalidInput("need at least two draws and one sample size".into()));
    }
    if !(cfg.rho.abs() < 1.0) {
        return Err(Error::InvalidInput("|rho| must be below one".into()));
    }
    let gamma = cfg.regime.gamma();
    match cfg.regime {
        Regime::Stationary(g) if g.abs() >= 1.0 => {
            return Err(Error::InvalidInput("stationary regime needs |gamma| < 1".into()))
        }
        Regime::Explosive(g) if g <= 1.0 => {
            return Err(Error::InvalidInput("explosive regime needs gamma > 1".into()))
        }
        Regime::Integrated => {
            if cfg.ladder.iter().any(|&t| t == 0 || cfg.steps % t != 0) {
                return Err(Error::InvalidInput("every T must divide the number of Euler steps".into()));
            }
        }
        _ => {}
    }
    let cov = Cov2::unit(cfg.rho)?;
    let kind = Deterministic::Intercept;
    let finite_stats = |s: &Sample| -> Result<[f64; 5]> {
        let ls = local_stats(s, &cov, gamma, 0.0, kind);
        let psi = t_statistic(s, cov.syy, 0.0, kind)?;
        Ok([ls.r_beta, ls.r_gamma, ls.k_betabeta, ls.k_gammagamma, psi])
    };

    let mut rows = Vec::new();
    match cfg.regime {
        Regime::Integrated => {
            let limit: Vec<LimitDraw> = (0..cfg.draws)
                .into_par_iter()
                .map(|m| {
                    let mut rng = rng_for(cfg.seed, &[stream::LIMIT, m as u64]);
                    let (dwx, dwy) = increments(cfg.steps, &mut rng);
                    functionals(0.0, cfg.rho, &dwx, &dwy, cfg.reading)
                })
                .collect();
            let limit_cols = columns(
                &limit
                    .iter()
                    .map(|d| [d.r_beta, d.r_gamma, d.k_betabeta, d.k_gammagamma, d.psi])
                    .collect::<Vec<_>>(),
            );
            for &t in &cfg.ladder {
                let finite = (0..cfg.draws)
                    .into_par_iter()
                    .map(|m| {
                        let mut rng = rng_for(cfg.seed, &[stream::LIMIT, m as u64]);
                        let (dwx, dwy) = increments(cfg.steps, &mut rng);
                        finite_stats(&coupled_sample(0.0, cfg.rho, t, &dwx, &dwy))
                    })
                    .collect::<Result<Vec<_>>>()?;
                for ((name, f), (_, l)) in columns(&finite).iter().zip(&limit_cols) {
                    let (mean, variance) = mean_var(f);
                    let (limit_mean, limit_variance) = mean_var(l);
                    rows.push(DistanceRow {
                        t,
                        coordinate: name,
                        ks: ks_two_sample(f, l),
                        mean,
                        variance,
                        limit_mean,
                        limit_variance,
                    });
                }
            }
        }
        Regime::Stationary(_) | Regime::Explosive(_) => {
            let params = ModelParams::null(gamma, cov, kind);
            // R_β, R_γ, K_ββ, K_γγ, ψ
            let limits: [(f64, f64); 5] = [
                (0.0, 1.0),
                (0.0, 1.0 / (1.0 - cfg.rho * cfg.rho)),
                (1.0, 0.0),
                (1.0 / (1.0 - cfg.rho * cfg.rho), 0.0),
                (0.0, 1.0),
            ];
            for &t in &cfg.ladder {
                let finite = (0..cfg.draws)
                    .into_par_iter()
                    .map(|m| {
                        let mut rng = rng_for(cfg.seed, &[stream::LIMIT, t as u64, m as u64]);
                        finite_stats(&simulate_with_rng(&params, t, &mut rng))
                    })
                    .collect::<Result<Vec<_>>>()?;
                for (k, (name, f)) in columns(&finite).iter().enumerate() {
                    if matches!(cfg.regime, Regime::Explosive(_)) && *name != "psi" {
                        continue;
                    }
                    let (mean, variance) = mean_var(f);
                    let (limit_mean, limit_variance) = limits[k];
                    let ks = if limit_variance > 0.0 {
                        ks_normal(f, limit_mean, limit_variance)
                    } else {
                        f.iter().map(|v| (v - limit_mean).abs()).sum::<f64>() / f.len() as f64
                    };
                    rows.push(DistanceRow { t, coordinate: name, ks, mean, variance, limit_mean, limit_variance });
                }
            }
        }
    }
    Ok(ConvergenceReport { regime: cfg.regime, rho: cfg.rho, rows })
}
