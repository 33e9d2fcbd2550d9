use rayon::prelude::*;

use super::{CvfModel, CvfSettings, Grid, Statistic};
use crate::error::Result;
use crate::model::{local_stats_with_g, scaling_g, simulate_with_rng, Cov2, ModelParams, Sample};
use crate::seed::rng_for;

/// Monte Carlo rejection frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RejectionEstimate {
    pub p_hat: f64,
    pub reps: usize,
    pub std_err: f64,
}

impl RejectionEstimate {
    pub fn from_count(rejections: usize, reps: usize) -> Self {
        assert!(reps >= 1, "rejection estimate needs at least one replication");
        let p_hat = rejections as f64 / reps as f64;
        Self { p_hat, reps, std_err: (p_hat * (1.0 - p_hat) / reps as f64).sqrt() }
    }
}

/// What a CVF test needs from one sample: the statistic and the two local
/// statistics `κ` depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrawSummary {
    pub psi: f64,
    pub r_gamma: f64,
    pub k_gg: f64,
}

/// Summary of `s` with the covariance chosen by `settings.cov_mode`.
pub fn summarize(
    s: &Sample,
    design: &Cov2,
    stat: &dyn Statistic,
    center: f64,
    g: f64,
    settings: &CvfSettings,
) -> Result<DrawSummary> {
    let cov = settings.cov_mode.resolve(s, design, settings.kind)?;
    let psi = stat.eval(s, &cov)?;
    let ls = local_stats_with_g(s, &cov, center, g, settings.beta0, settings.kind);
    Ok(DrawSummary { psi, r_gamma: ls.r_gamma, k_gg: ls.k_gammagamma })
}

/// Summaries of `reps` null samples at one value of `γ`, with the local
/// statistics taken at the centre of `grid`. Replication `r`
/// draws from the stream `path ++ [γ bits, r]`, so panels can be cached and
/// re-used while the critical value function changes.
#[derive(Debug, Clone, PartialEq)]
pub struct NullPanel {
    pub gamma: f64,
    pub draws: Vec<DrawSummary>,
}

impl NullPanel {
    #[allow(clippy::too_many_arguments)]
    pub fn simulate(
        gamma: f64,
        design: &Cov2,
        t: usize,
        reps: usize,
        seed: u64,
        path: &[u64],
        stat: &dyn Statistic,
        grid: &Grid,
        settings: &CvfSettings,
    ) -> Result<Self> {
        let params = ModelParams::null(gamma, *design, settings.kind);
        let center = grid.center();
        let g = scaling_g(center, grid.sample_len());
        let draws = (0..reps)
            .into_par_iter()
            .map(|r| {
                let mut full = path.to_vec();
                full.extend_from_slice(&[gamma.to_bits(), r as u64]);
                let mut rng = rng_for(seed, &full);
                let s = simulate_with_rng(&params, t, &mut rng);
                summarize(&s, design, stat, center, g, settings)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { gamma, draws })
    }
}

/// Share of the panel where `ψ > κ`.
pub fn rejection_rate(model: &CvfModel, panel: &NullPanel) -> RejectionEstimate {
    let count = panel
        .draws
        .par_iter()
        .filter(|d| d.psi > model.kappa(d.r_gamma, d.k_gg))
        .count();
    RejectionEstimate::from_count(count, panel.draws.len())
}

/// Null rejection probability of the CVF test at `gamma`, estimated from
/// `reps` fresh samples of length `t`.
pub fn null_rejection(
    model: &CvfModel,
    gamma: f64,
    t: usize,
    reps: usize,
    seed: u64,
    stat: &dyn Statistic,
) -> Result<RejectionEstimate> {
    let panel = NullPanel::simulate(
        gamma,
        model.design_cov(),
        t,
        reps,
        seed,
        &[crate::seed::stream::FRESH],
        stat,
        model.grid(),
        model.settings(),
    )?;
    Ok(rejection_rate(model, &panel))
}

/// Rejection frequency of the CVF test on `reps` samples from `params`.
/// Replication `r` draws from the stream `path ++ [r]`.
#[allow(clippy::too_many_arguments)]
pub fn rejection_under(
    model: &CvfModel,
    params: &ModelParams,
    t: usize,
    reps: usize,
    seed: u64,
    path: &[u64],
    stat: &dyn Statistic,
) -> Result<RejectionEstimate> {
    let center = model.grid().center();
    let g = scaling_g(center, model.grid().sample_len());
    let flags = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut full = path.to_vec();
            full.push(r as u64);
            let s = simulate_with_rng(params, t, &mut rng_for(seed, &full));
            let d = summarize(&s, model.design_cov(), stat, center, g, model.settings())?;
            Ok(d.psi > model.kappa(d.r_gamma, d.k_gg))
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(RejectionEstimate::from_count(flags.iter().filter(|&&f| f).count(), reps))
}

/// Slope `β = b·√σyy.x/√σxx·g_T(γ)` of the local alternative indexed by `b`.
pub fn local_beta(b: f64, gamma: f64, cov: &Cov2, t: usize) -> f64 {
    b * (cov.syy_x() / cov.sxx).sqrt() * scaling_g(gamma, t)
}

/// Rejection frequency under the local alternative `b` at `gamma`. The
/// sample paths depend only on `gamma` and the replication, so a sweep
/// over `b` uses common random numbers.
pub fn power_at(
    model: &CvfModel,
    b: f64,
    gamma: f64,
    t: usize,
    reps: usize,
    seed: u64,
    stat: &dyn Statistic,
) -> Result<RejectionEstimate> {
    let cov = *model.design_cov();
    let params = ModelParams {
        beta: model.settings().beta0 + local_beta(b, gamma, &cov, t),
        ..ModelParams::null(gamma, cov, model.settings().kind)
    };
    rejection_under(model, &params, t, reps, seed, &[crate::seed::stream::POWER, gamma.to_bits()], stat)
}
