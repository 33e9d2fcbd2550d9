use rand::Rng;
use rayon::prelude::*;

use super::rejection::summarize;
use super::{BaselineMeasure, CvfModel, CvfSettings, DrawSummary, Grid, Statistic};
use crate::error::{Error, Result};
use crate::lp::{solve_boxed_lp_warm, solve_boxed_lp_with, LpProblem, LpSolution, LpStatus};
use crate::model::{scaling_g, simulate_with_rng, Cov2, Deterministic, ModelParams, Sample};
use crate::seed::{rng_for, stream};

/// One mixture draw reduced to what the calibration program needs.
///
/// `design` holds the local statistics computed with the design covariance;
/// they define the density ratios. `psi` is the statistic as the test will
/// see it (with an estimated covariance in feasible mode).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureDraw {
    pub component: usize,
    pub psi: f64,
    pub design: DrawSummary,
}

fn mixture_sample(grid: &Grid, gammas: &[f64], cov: &Cov2, kind: Deterministic, seed: u64, j: usize) -> (Sample, usize) {
    let mut rng = rng_for(seed, &[stream::MIXTURE, j as u64]);
    let i = rng.random_range(0..gammas.len());
    let params = ModelParams::null(gammas[i], *cov, kind);
    (simulate_with_rng(&params, grid.sample_len(), &mut rng), i)
}

/// `j` draws from the equal-weight mixture of the null models on the grid,
/// each with the index of the component it came from.
pub fn sample_mixture(
    grid: &Grid,
    cov: &Cov2,
    kind: Deterministic,
    j: usize,
    seed: u64,
) -> Vec<(Sample, usize)> {
    let gammas = grid.gammas();
    (0..j)
        .into_par_iter()
        .map(|idx| mixture_sample(grid, &gammas, cov, kind, seed, idx))
        .collect()
}

fn mixture_draws(
    grid: &Grid,
    cov: &Cov2,
    j: usize,
    seed: u64,
    stat: &dyn Statistic,
    settings: &CvfSettings,
) -> Result<Vec<MixtureDraw>> {
    let gammas = grid.gammas();
    let center = grid.center();
    let g = scaling_g(center, grid.sample_len());
    let known = CvfSettings { cov_mode: super::CovMode::Known, ..*settings };
    (0..j)
        .into_par_iter()
        .map(|idx| {
            let (s, component) = mixture_sample(grid, &gammas, cov, settings.kind, seed, idx);
            let design = summarize(&s, cov, stat, center, g, &known)?;
            let psi = match settings.cov_mode {
                super::CovMode::Known => design.psi,
                super::CovMode::Estimated => summarize(&s, cov, stat, center, g, settings)?.psi,
            };
            Ok(MixtureDraw { component, psi, design })
        })
        .collect()
}

/// Calibration program for the draws. Row `l` of the constraint matrix is
/// the importance weight `f_l / f_ν*` of each draw divided by `J`, so that
/// `A m = α` says the test rejects with probability `α` under `γ_l`. The
/// objective is `ψ` weighted by `f_ν / f_ν*` and divided by `J`, which makes
/// the row duals the CVF multipliers.
pub fn assemble_lp(draws: &[MixtureDraw], grid: &Grid, alpha: f64, measure: BaselineMeasure) -> Result<LpProblem> {
    let n = grid.len();
    let jn = draws.len();
    let local = grid.local_offsets();
    let scale = 1.0 / jn as f64;
    let mut matrix = Vec::with_capacity(n * jn);
    let mut objective = Vec::with_capacity(jn);
    let mut lams = vec![0.0; n];
    for d in draws {
        for (l, c) in lams.iter_mut().zip(&local) {
            *l = c * d.design.r_gamma - 0.5 * c * c * d.design.k_gg;
        }
        // normalise in the linear domain so each column averages to one
        // up to rounding, however large the exponents are
        let top = lams.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let start = matrix.len();
        matrix.extend(lams.iter().map(|l| (l - top).exp()));
        let mean = matrix[start..].iter().sum::<f64>() / n as f64;
        for v in &mut matrix[start..] {
            *v *= scale / mean;
        }
        let weight = match measure {
            BaselineMeasure::NuStar => 1.0,
            BaselineMeasure::NuDagger => (-top).exp() / mean,
        };
        objective.push(d.psi * weight * scale);
    }
    if matrix.iter().chain(&objective).any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure(
            "density ratios overflow; the grid is too wide for this baseline measure".into(),
        ));
    }
    LpProblem::from_columns(objective, matrix, vec![alpha; n])
}

/// Solves the program on a quarter of the draws first (recursively) and
/// uses those multipliers as the starting point for the full solve.
fn solve_nested(draws: &[MixtureDraw], grid: &Grid, settings: &CvfSettings) -> Result<(LpProblem, LpSolution)> {
    let lp = assemble_lp(draws, grid, settings.alpha, settings.measure)?;
    let base = (50 * grid.len()).max(1000);
    let hint = if draws.len() >= 4 * base {
        solve_nested(&draws[..draws.len() / 4], grid, settings).ok().map(|(_, s)| s.k)
    } else {
        None
    };
    let sol = match hint {
        Some(k) => solve_boxed_lp_warm(&lp, &settings.simplex, &k)
            .or_else(|_| solve_boxed_lp_with(&lp, &settings.simplex))?,
        None => solve_boxed_lp_with(&lp, &settings.simplex)?,
    };
    Ok((lp, sol))
}

/// Result of one calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub model: CvfModel,
    pub lp_status: LpStatus,
    pub lp_iterations: usize,
    pub objective: f64,
    /// Importance-weighted rejection of `1{ψ > κ}` under each grid point,
    /// computed on the calibration draws.
    pub in_sample: Vec<f64>,
    pub draws: usize,
}

/// Draws `j` samples from the grid mixture, builds the calibration program
/// and keeps its row duals as the CVF multipliers.
pub fn calibrate(
    grid: &Grid,
    cov: &Cov2,
    j: usize,
    seed: u64,
    stat: &dyn Statistic,
    settings: &CvfSettings,
) -> Result<Calibration> {
    settings.validate()?;
    let n = grid.len();
    if j < 100 * n {
        return Err(Error::InvalidInput(format!(
            "calibration needs J >= 100 n draws (J={j}, n={n})"
        )));
    }
    let draws = mixture_draws(grid, cov, j, seed, stat, settings)?;
    let (lp, sol) = solve_nested(&draws, grid, settings)?;
    let model = CvfModel::new(grid.clone(), sol.k.clone(), *settings, *cov)?;

    let mut in_sample = vec![0.0; n];
    for col in 0..j {
        let a = lp.column(col);
        let threshold: f64 = a.iter().zip(&sol.k).map(|(x, k)| x * k).sum();
        if lp.objective()[col] > threshold {
            for (acc, x) in in_sample.iter_mut().zip(a) {
                *acc += x;
            }
        }
    }
    Ok(Calibration {
        model,
        lp_status: sol.status,
        lp_iterations: sol.iterations,
        objective: sol.objective_value,
        in_sample,
        draws: j,
    })
}
