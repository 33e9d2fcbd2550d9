use super::{calibrate, rejection_rate, CvfModel, CvfSettings, Grid, NullPanel, Statistic};
use crate::error::{Error, Result};
use crate::lp::LpStatus;
use crate::model::Cov2;
use crate::seed::stream;

#[derive(Debug, Clone, PartialEq)]
pub struct RefineConfig {
    /// Offsets at which null rejection is checked.
    pub check: Vec<f64>,
    pub epsilon: f64,
    pub calib_draws: usize,
    pub check_draws: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl RefineConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            check: uniform_offsets(-50.0, 20.0, 100),
            epsilon: 0.015,
            calib_draws: 100_000,
            check_draws: 10_000,
            max_iter: 50,
            seed,
        }
    }
}

/// `count` equally spaced points from `lo` to `hi` inclusive.
pub fn uniform_offsets(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// One pass of the refinement loop.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub offsets: Vec<f64>,
    pub k: Vec<f64>,
    pub lp_status: LpStatus,
    /// Null rejection at each check point.
    pub p_hat: Vec<f64>,
    pub max_discrepancy: f64,
    pub worst_offset: f64,
    /// Offset appended after this pass, if any.
    pub added: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineOutcome {
    pub model: CvfModel,
    pub trail: Vec<IterationRecord>,
    pub converged: bool,
}

impl RefineOutcome {
    pub fn added_points(&self) -> usize {
        self.trail.iter().filter(|r| r.added.is_some()).count()
    }

    pub fn final_discrepancy(&self) -> f64 {
        self.trail.last().map_or(f64::NAN, |r| r.max_discrepancy)
    }
}

/// Grows the grid one point at a time, always adding the check point whose
/// null rejection is furthest from `α`, until every check point is within
/// `ε`. Fails with `NoConvergence` if `max_iter` points were added without
/// getting there.
pub fn refine(
    initial: &Grid,
    cov: &Cov2,
    stat: &dyn Statistic,
    settings: &CvfSettings,
    cfg: &RefineConfig,
) -> Result<RefineOutcome> {
    let out = refine_with_trail(initial, cov, stat, settings, cfg)?;
    if !out.converged {
        return Err(Error::NoConvergence {
            iterations: out.trail.len(),
            max_discrepancy: out.final_discrepancy(),
        });
    }
    Ok(out)
}

/// As [`refine`], but reports a non-converged run instead of failing.
pub fn refine_with_trail(
    initial: &Grid,
    cov: &Cov2,
    stat: &dyn Statistic,
    settings: &CvfSettings,
    cfg: &RefineConfig,
) -> Result<RefineOutcome> {
    if !(cfg.epsilon > 0.0) {
        return Err(Error::InvalidInput("epsilon must be positive".into()));
    }
    if cfg.check.is_empty() || cfg.check_draws == 0 {
        return Err(Error::InvalidInput("refinement needs check points and draws".into()));
    }
    let t = initial.sample_len();
    let panels = cfg
        .check
        .iter()
        .map(|&c| {
            NullPanel::simulate(
                initial.gamma_at(c),
                cov,
                t,
                cfg.check_draws,
                cfg.seed,
                &[stream::CHECK],
                stat,
                initial,
                settings,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let mut grid = initial.clone();
    let mut trail = Vec::new();
    for iteration in 0..=cfg.max_iter {
        let cal = calibrate(&grid, cov, cfg.calib_draws, cfg.seed, stat, settings)?;
        let p_hat: Vec<f64> = panels.iter().map(|p| rejection_rate(&cal.model, p).p_hat).collect();
        let gammas = grid.gammas();
        let mut worst: Option<(usize, f64)> = None;
        let mut worst_new: Option<(usize, f64)> = None;
        for (i, p) in p_hat.iter().enumerate() {
            let dev = (p - settings.alpha).abs();
            if worst.is_none_or(|(_, w)| dev > w) {
                worst = Some((i, dev));
            }
            let gamma = panels[i].gamma;
            let on_grid = gammas.iter().any(|g| (g - gamma).abs() <= 1e-9);
            if !on_grid && worst_new.is_none_or(|(_, w)| dev > w) {
                worst_new = Some((i, dev));
            }
        }
        let (wi, max_discrepancy) = worst.expect("check grid is non-empty");
        let mut record = IterationRecord {
            iteration,
            offsets: grid.offsets().to_vec(),
            k: cal.model.k().to_vec(),
            lp_status: cal.lp_status,
            p_hat,
            max_discrepancy,
            worst_offset: cfg.check[wi],
            added: None,
        };
        let done = max_discrepancy <= cfg.epsilon;
        let candidate = worst_new.filter(|&(_, d)| d > cfg.epsilon);
        if done || iteration == cfg.max_iter || candidate.is_none() {
            trail.push(record);
            return Ok(RefineOutcome { model: cal.model, trail, converged: done });
        }
        let (ci, _) = candidate.unwrap();
        record.added = Some(cfg.check[ci]);
        trail.push(record);
        grid = grid.with_offset(cfg.check[ci])?.0;
    }
    unreachable!("loop returns on its last iteration")
}
