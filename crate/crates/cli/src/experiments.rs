//! Orchestration of the experiment commands. Every command writes CSV
//! files (and for calibration, model files) under the configured output
//! directory and returns their paths.

use std::fs;
use std::path::{Path, PathBuf};

use cvf_core::baseline::{baseline_rejection, BaselineConfig};
use cvf_core::cvf::{
    calibrate, parse_model, power_at, local_beta, refine, refine_with_trail, rejection_rate, summarize,
    uniform_offsets, write_model, CovMode, CvfModel, CvfSettings, Grid, NullPanel, RefineConfig, RefineOutcome,
    TStatistic,
};
use cvf_core::limit::{convergence_check, ConvergenceConfig};
use cvf_core::model::{scaling_g, simulate_with_rng, Cov2, ModelParams};
use cvf_core::seed::{rng_for, stream};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, FlatteningScheme, Method};
use crate::csv::{self, num, Table};
use crate::error::{CliError, CliResult};

/// `G(z) = 2(F(z) − ½)` with `F` the logistic cdf; maps the real line onto
/// `(−1, 1)`.
pub fn logistic_g(z: f64) -> f64 {
    (0.5 * z).tanh()
}

/// Inclusive sweep `lo, lo+step, …` up to `hi`. Values are built from the
/// index so they do not accumulate rounding error.
pub fn sweep(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

fn rho_tag(rho: f64) -> String {
    format!("rho{rho}")
}

struct Run<'a> {
    cfg: &'a ExperimentConfig,
    seed: u64,
    hash: String,
}

impl<'a> Run<'a> {
    fn new(cfg: &'a ExperimentConfig) -> CliResult<Self> {
        cfg.validate()?;
        Ok(Self { cfg, seed: cfg.seed()?, hash: cfg.hash() })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.cfg.out.join(name)
    }

    fn write(&self, table: &Table, name: &str) -> CliResult<PathBuf> {
        table.write(&self.path(name), &self.hash, self.seed)
    }

    fn stat(&self) -> TStatistic {
        TStatistic::new(self.cfg.deterministic)
    }

    fn settings(&self, default_mode: CovMode) -> CvfSettings {
        CvfSettings {
            kind: self.cfg.deterministic,
            measure: self.cfg.measure,
            cov_mode: self.cfg.cov_mode.unwrap_or(default_mode),
            flattening: self.cfg.flattening.build(self.cfg.alpha),
            ..CvfSettings::new(self.cfg.alpha)
        }
    }

    fn refine_config(&self) -> RefineConfig {
        RefineConfig {
            check: uniform_offsets(self.cfg.check_lo, self.cfg.check_hi, self.cfg.check_points),
            epsilon: self.cfg.epsilon,
            calib_draws: self.cfg.calib_draws,
            check_draws: self.cfg.j,
            max_iter: self.cfg.max_iter,
            seed: self.seed,
        }
    }

    fn initial_grid(&self) -> CliResult<Grid> {
        Ok(Grid::per_t(self.cfg.grid.clone(), self.cfg.t)?)
    }

    /// Refines without flattening (the calibration program ignores it) and
    /// attaches the configured flattening to the result.
    fn refine_trail(&self, rho: f64, mode: CovMode) -> CliResult<RefineOutcome> {
        let settings = CvfSettings { flattening: None, ..self.settings(mode) };
        let cov = Cov2::unit(rho)?;
        eprintln!("refining CVF for rho={rho} (T={}, {} mode)", self.cfg.t, settings.cov_mode.name());
        let mut out = refine_with_trail(&self.initial_grid()?, &cov, &self.stat(), &settings, &self.refine_config())?;
        out.model = out.model.with_flattening(self.cfg.flattening.build(self.cfg.alpha));
        Ok(out)
    }

    /// The model to evaluate at `rho`: a stored model if one is configured,
    /// otherwise a fresh refinement that must converge.
    fn model(&self, rho: f64, mode: CovMode) -> CliResult<CvfModel> {
        if let Some(path) = &self.cfg.model {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            return Ok(parse_model(&text)?);
        }
        let settings = CvfSettings { flattening: None, ..self.settings(mode) };
        let cov = Cov2::unit(rho)?;
        eprintln!("refining CVF for rho={rho} (T={}, {} mode)", self.cfg.t, settings.cov_mode.name());
        let out = refine(&self.initial_grid()?, &cov, &self.stat(), &settings, &self.refine_config())?;
        Ok(out.model.with_flattening(self.cfg.flattening.build(self.cfg.alpha)))
    }
}

/// Refines the CVF for every `ρ`, writing the model, the iteration trail
/// and the final null rejection at each check point. A run that does not
/// converge still writes its files and then reports `NoConvergence`.
pub fn run_calibrate(cfg: &ExperimentConfig) -> CliResult<Vec<PathBuf>> {
    let run = Run::new(cfg)?;
    let mut written = Vec::new();
    let mut failure = None;
    for &rho in &cfg.rho {
        let out = run.refine_trail(rho, CovMode::Known)?;
        let tag = rho_tag(rho);
        let model_path = run.path(&format!("model_{tag}.cvf"));
        csv::write_file(&model_path, &write_model(&out.model))?;
        written.push(model_path);

        let mut trail = Table::new(&[
            "iteration", "points", "max_discrepancy", "worst_c", "added_c", "lp_status", "offsets", "k",
        ]);
        let join = |v: &[f64]| v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(";");
        for r in &out.trail {
            trail.push(vec![
                r.iteration.to_string(),
                r.offsets.len().to_string(),
                num(r.max_discrepancy),
                num(r.worst_offset),
                r.added.map_or(String::new(), num),
                format!("{:?}", r.lp_status),
                join(&r.offsets),
                join(&r.k),
            ]);
        }
        written.push(run.write(&trail, &format!("calibrate_{tag}.csv"))?);

        let last = out.trail.last().expect("refinement records at least one pass");
        let grid = out.model.grid();
        let mut check = Table::new(&["c", "gamma", "p_hat", "J", "seed"]);
        for (c, p) in run.refine_config().check.iter().zip(&last.p_hat) {
            check.push(vec![num(*c), num(grid.gamma_at(*c)), num(*p), cfg.j.to_string(), run.seed.to_string()]);
        }
        written.push(run.write(&check, &format!("check_{tag}.csv"))?);
        eprintln!(
            "rho={rho}: {} points added, max discrepancy {:.4}, converged={}",
            out.added_points(),
            out.final_discrepancy(),
            out.converged
        );
        if !out.converged && failure.is_none() {
            failure = Some(cvf_core::Error::NoConvergence {
                iterations: out.trail.len(),
                max_discrepancy: out.final_discrepancy(),
            });
        }
    }
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(written),
    }
}

/// Null rejection of the CVF test and the chosen baselines across the
/// `c` sweep, `γ = 1 + c/T`.
pub fn run_size_study(cfg: &ExperimentConfig) -> CliResult<Vec<PathBuf>> {
    let run = Run::new(cfg)?;
    let stat = run.stat();
    let cs = sweep(cfg.c_lo, cfg.c_hi, cfg.c_step);
    let mut written = Vec::new();
    for &rho in &cfg.rho {
        let cov = Cov2::unit(rho)?;
        let mode = cfg.cov_mode.unwrap_or(CovMode::Known);
        let model = if cfg.methods.contains(&Method::Cvf) { Some(run.model(rho, CovMode::Known)?) } else { None };
        let mut table = Table::new(&["method", "rho", "gamma", "c", "p_hat", "std_err", "J", "seed"]);
        for &method in &cfg.methods {
            eprintln!("size: {} at rho={rho}", method.name());
            for &c in &cs {
                let gamma = 1.0 + c / cfg.t as f64;
                let est = match method {
                    Method::Cvf => cvf_core::cvf::null_rejection(
                        model.as_ref().expect("model built when cvf is requested"),
                        gamma,
                        cfg.t,
                        cfg.j,
                        run.seed,
                        &stat,
                    )?,
                    Method::Baseline(kind) => {
                        let bc = BaselineConfig {
                            replications: cfg.bootstrap_b,
                            block: cfg.block,
                            deterministic: cfg.deterministic,
                            sigma_yy: (mode == CovMode::Known).then_some(cov.syy),
                            ..BaselineConfig::new(kind, cfg.alpha)
                        };
                        baseline_rejection(&bc, gamma, &cov, cfg.t, cfg.baseline_reps, run.seed)?
                    }
                };
                table.push(vec![
                    method.name().to_string(),
                    num(rho),
                    num(gamma),
                    num(c),
                    num(est.p_hat),
                    num(est.std_err),
                    est.reps.to_string(),
                    run.seed.to_string(),
                ]);
            }
        }
        written.push(run.write(&table, &format!("size_{}.csv", rho_tag(rho)))?);
    }
    Ok(written)
}

/// One overlay series: rejection rates indexed by `b`, optionally tied to
/// particular `c` or `ρ` values.
struct Overlay {
    name: String,
    points: Vec<(Option<f64>, Option<f64>, f64, String)>,
}

fn load_overlays(paths: &[PathBuf]) -> CliResult<Vec<Overlay>> {
    let mut out = Vec::new();
    for path in paths {
        let bad = |reason: String| CliError::BadOverlay { path: path.clone(), reason };
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let table = csv::parse(&text).map_err(bad)?;
        let col = |name: &str| table.columns().iter().position(|c| c == name);
        let b_col = col("b").ok_or_else(|| bad("missing `b` column".into()))?;
        let (c_col, rho_col) = (col("c"), col("rho"));
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("overlay").to_string();
        let parse = |s: &str, what: &str| -> CliResult<f64> {
            s.parse::<f64>().map_err(|_| bad(format!("non-numeric {what} value `{s}`")))
        };
        for (i, name) in table.columns().iter().enumerate() {
            if Some(i) == c_col || Some(i) == rho_col || i == b_col {
                continue;
            }
            let mut series = Overlay { name: format!("{stem}_{name}"), points: Vec::new() };
            for row in table.rows() {
                let value = parse(&row[i], name)?;
                if !(0.0..=1.0).contains(&value) {
                    return Err(bad(format!("rejection rate {value} outside [0,1]")));
                }
                series.points.push((
                    c_col.map(|j| parse(&row[j], "c")).transpose()?,
                    rho_col.map(|j| parse(&row[j], "rho")).transpose()?,
                    parse(&row[b_col], "b")?,
                    num(value),
                ));
            }
            out.push(series);
        }
        if out.is_empty() {
            return Err(bad("no data columns besides `b`, `c` and `rho`".into()));
        }
    }
    Ok(out)
}

fn overlay_value(series: &Overlay, rho: f64, c: f64, b: f64) -> String {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9;
    series
        .points
        .iter()
        .find(|(pc, pr, pb, _)| close(*pb, b) && pc.is_none_or(|v| close(v, c)) && pr.is_none_or(|v| close(v, rho)))
        .map_or(String::new(), |p| p.3.clone())
}

/// Power of the feasible CVF test against local alternatives indexed by
/// `b`, at each configured `c`. External curves are joined as extra columns.
pub fn run_power_study(cfg: &ExperimentConfig) -> CliResult<Vec<PathBuf>> {
    let run = Run::new(cfg)?;
    let overlays = load_overlays(&cfg.overlays)?;
    let stat = run.stat();
    let bs = sweep(cfg.b_lo, cfg.b_hi, cfg.b_step);
    let mut columns: Vec<String> =
        ["rho", "c", "gamma", "b", "beta", "p_hat", "std_err", "J", "seed"].iter().map(|s| s.to_string()).collect();
    columns.extend(overlays.iter().map(|o| o.name.clone()));
    let mut table = Table::new(&columns);
    for &rho in &cfg.rho {
        let model = run.model(rho, CovMode::Estimated)?;
        for &c in &cfg.power_c {
            let gamma = 1.0 + c / cfg.t as f64;
            eprintln!("power: rho={rho} c={c}");
            for &b in &bs {
                let est = power_at(&model, b, gamma, cfg.t, cfg.j, run.seed, &stat)?;
                let mut row = vec![
                    num(rho),
                    num(c),
                    num(gamma),
                    num(b),
                    num(local_beta(b, gamma, model.design_cov(), cfg.t)),
                    num(est.p_hat),
                    num(est.std_err),
                    est.reps.to_string(),
                    run.seed.to_string(),
                ];
                row.extend(overlays.iter().map(|o| overlay_value(o, rho, c, b)));
                table.push(row);
            }
        }
    }
    Ok(vec![run.write(&table, "power.csv")?])
}

/// Evaluates the CVF on simulated null samples across `γ` values, with raw
/// and logistic-transformed coordinates.
pub fn run_cvf_surface(cfg: &ExperimentConfig) -> CliResult<Vec<PathBuf>> {
    let run = Run::new(cfg)?;
    let stat = run.stat();
    let mut written = Vec::new();
    for &rho in &cfg.rho {
        let model = run.model(rho, CovMode::Known)?;
        let design = *model.design_cov();
        let center = model.grid().center();
        let g = scaling_g(center, model.grid().sample_len());
        let mut table =
            Table::new(&["rho", "gamma", "r_gamma", "k_gammagamma", "kappa", "psi", "g_r_ratio", "g_k"]);
        for &gamma in &cfg.surface_gammas {
            let params = ModelParams::null(gamma, design, model.settings().kind);
            let rows = (0..cfg.surface_draws)
                .into_par_iter()
                .map(|r| {
                    let path = [stream::SURFACE, gamma.to_bits(), r as u64];
                    let s = simulate_with_rng(&params, cfg.t, &mut rng_for(run.seed, &path));
                    let d = summarize(&s, &design, &stat, center, g, model.settings())?;
                    Ok(vec![
                        num(rho),
                        num(gamma),
                        num(d.r_gamma),
                        num(d.k_gg),
                        num(model.kappa(d.r_gamma, d.k_gg)),
                        num(d.psi),
                        num(logistic_g(d.r_gamma / d.k_gg)),
                        num(logistic_g(d.k_gg)),
                    ])
                })
                .collect::<cvf_core::Result<Vec<_>>>()?;
            rows.into_iter().for_each(|r| table.push(r));
        }
        written.push(run.write(&table, &format!("surface_{}.csv", rho_tag(rho)))?);
    }
    Ok(written)
}

/// Null rejection across the `c` sweep for the endpoint-only CVF, the
/// refined CVF and the refined CVF with each flattening scheme, all
/// evaluated on the same samples.
pub fn run_compare(cfg: &ExperimentConfig) -> CliResult<Vec<PathBuf>> {
    let run = Run::new(cfg)?;
    let stat = run.stat();
    let cs = sweep(cfg.c_lo, cfg.c_hi, cfg.c_step);
    let mut written = Vec::new();
    for &rho in &cfg.rho {
        let cov = Cov2::unit(rho)?;
        let settings = CvfSettings { flattening: None, ..run.settings(CovMode::Known) };
        let grid = run.initial_grid()?;
        let endpoints = calibrate(&grid, &cov, cfg.calib_draws, run.seed, &stat, &settings)?.model;
        let refined = run.refine_trail(rho, CovMode::Known)?.model.with_flattening(None);
        let mut variants = vec![("endpoints", endpoints), ("refined", refined.clone())];
        for scheme in [FlatteningScheme::Ratio, FlatteningScheme::Range, FlatteningScheme::Both] {
            let name = match scheme {
                FlatteningScheme::Ratio => "refined_ratio",
                FlatteningScheme::Range => "refined_range",
                _ => "refined_both",
            };
            variants.push((name, refined.clone().with_flattening(scheme.build(cfg.alpha))));
        }
        let mut table = Table::new(&["variant", "points", "rho", "gamma", "c", "p_hat", "std_err", "J", "seed"]);
        let mut rows: Vec<Vec<Vec<String>>> = vec![Vec::new(); variants.len()];
        for &c in &cs {
            let gamma = 1.0 + c / cfg.t as f64;
            let panel =
                NullPanel::simulate(gamma, &cov, cfg.t, cfg.j, run.seed, &[stream::FRESH], &stat, &grid, &settings)?;
            for (slot, (name, model)) in rows.iter_mut().zip(&variants) {
                let est = rejection_rate(model, &panel);
                slot.push(vec![
                    name.to_string(),
                    model.grid().len().to_string(),
                    num(rho),
                    num(gamma),
                    num(c),
                    num(est.p_hat),
                    num(est.std_err),
                    est.reps.to_string(),
                    run.seed.to_string(),
                ]);
            }
        }
        rows.into_iter().flatten().for_each(|r| table.push(r));
        written.push(run.write(&table, &format!("compare_{}.csv", rho_tag(rho)))?);
    }
    Ok(written)
}

/// Distances between finite-sample local statistics and their limit laws
/// along the sample-size ladder.
pub fn run_limits(cfg: &ExperimentConfig) -> CliResult<Vec<PathBuf>> {
    let run = Run::new(cfg)?;
    let mut table = Table::new(&[
        "regime", "gamma", "rho", "reading", "T", "coordinate", "ks", "mean", "variance", "limit_mean",
        "limit_variance",
    ]);
    for &rho in &cfg.rho {
        {
            let reading = cfg.limit_reading;
            let mut cc = ConvergenceConfig::new(cfg.limit_regime, rho, run.seed);
            if let Some(l) = &cfg.ladder {
                cc.ladder = l.clone();
            }
            cc.draws = cfg.limit_draws;
            cc.steps = cfg.limit_steps;
            cc.reading = reading;
            eprintln!("limits: {} regime, rho={rho}", cfg.limit_regime.name());
            let report = convergence_check(&cc)?;
            for r in &report.rows {
                table.push(vec![
                    cfg.limit_regime.name().to_string(),
                    num(cfg.limit_regime.gamma()),
                    num(rho),
                    reading.name().to_string(),
                    r.t.to_string(),
                    r.coordinate.to_string(),
                    num(r.ks),
                    num(r.mean),
                    num(r.variance),
                    num(r.limit_mean),
                    num(r.limit_variance),
                ]);
            }
        }
    }
    Ok(vec![run.write(&table, "limits.csv")?])
}

/// Reads a CSV written by this crate back into a table.
pub fn read_table(path: &Path) -> CliResult<Table> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    csv::parse(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_transform() {
        assert_eq!(logistic_g(0.0), 0.0);
        assert!((logistic_g(50.0) - 1.0).abs() < 1e-12);
        for z in [-3.0, -0.5, 0.25, 7.0] {
            assert_eq!(logistic_g(-z), -logistic_g(z));
            let f = 1.0 / (1.0 + (-z as f64).exp());
            assert!((logistic_g(z) - 2.0 * (f - 0.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn sweep_is_inclusive() {
        let v = sweep(-100.0, 50.0, 5.0);
        assert_eq!(v.len(), 31);
        assert_eq!(v[0], -100.0);
        assert_eq!(*v.last().unwrap(), 50.0);
        assert_eq!(sweep(-10.0, 10.0, 1.0).len(), 21);
    }
}
