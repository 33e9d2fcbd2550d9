//! Flat `key = value` experiment configuration.
//!
//! Lines starting with `#` and blank lines are ignored. Lists are comma
//! separated. Later assignments override earlier ones, so command-line
//! overrides are applied by feeding further `key=value` pairs.

use std::path::PathBuf;

use cvf_core::baseline::BlockRule;
use cvf_core::cvf::{BaselineMeasure, CovMode, Flattening};
use cvf_core::limit::{LimitReading, Regime};
use cvf_core::model::Deterministic;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Comparison methods for size studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Cvf,
    Baseline(cvf_core::baseline::BaselineKind),
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Cvf => "cvf",
            Method::Baseline(k) => k.name(),
        }
    }

    fn parse(s: &str) -> CliResult<Self> {
        if s == "cvf" {
            return Ok(Method::Cvf);
        }
        s.parse().map(Method::Baseline).map_err(|_| CliError::config(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlatteningScheme {
    None,
    Ratio,
    Range,
    Both,
}

impl FlatteningScheme {
    pub fn name(self) -> &'static str {
        match self {
            FlatteningScheme::None => "none",
            FlatteningScheme::Ratio => "ratio",
            FlatteningScheme::Range => "range",
            FlatteningScheme::Both => "both",
        }
    }

    pub fn build(self, alpha: f64) -> Option<Flattening> {
        match self {
            FlatteningScheme::None => None,
            FlatteningScheme::Ratio => Some(Flattening::ratio_only(alpha)),
            FlatteningScheme::Range => Some(Flattening::range_only(alpha)),
            FlatteningScheme::Both => Some(Flattening::for_alpha(alpha)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub t: usize,
    pub alpha: f64,
    pub rho: Vec<f64>,
    /// Replications per rejection probability.
    pub j: usize,
    /// Draws for each calibration program.
    pub calib_draws: usize,
    pub epsilon: f64,
    pub max_iter: usize,
    /// `None` means the experiment default (estimated for power, known
    /// otherwise).
    pub cov_mode: Option<CovMode>,
    pub deterministic: Deterministic,
    pub measure: BaselineMeasure,
    pub flattening: FlatteningScheme,
    pub grid: Vec<f64>,
    pub check_lo: f64,
    pub check_hi: f64,
    pub check_points: usize,
    pub c_lo: f64,
    pub c_hi: f64,
    pub c_step: f64,
    pub methods: Vec<Method>,
    pub baseline_reps: usize,
    pub bootstrap_b: usize,
    pub block: BlockRule,
    pub power_c: Vec<f64>,
    pub b_lo: f64,
    pub b_hi: f64,
    pub b_step: f64,
    pub overlays: Vec<PathBuf>,
    pub surface_gammas: Vec<f64>,
    pub surface_draws: usize,
    pub limit_regime: Regime,
    /// `None` uses the regime's default ladder.
    pub ladder: Option<Vec<usize>>,
    pub limit_draws: usize,
    pub limit_steps: usize,
    pub limit_reading: LimitReading,
    pub model: Option<PathBuf>,
    pub out: PathBuf,
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        use cvf_core::baseline::BaselineKind as B;
        Self {
            seed: None,
            t: 100,
            alpha: 0.10,
            rho: vec![0.95],
            j: 10_000,
            calib_draws: 100_000,
            epsilon: 0.015,
            max_iter: 50,
            cov_mode: None,
            deterministic: Deterministic::Intercept,
            measure: BaselineMeasure::NuStar,
            flattening: FlatteningScheme::None,
            grid: vec![-50.0, 20.0],
            check_lo: -50.0,
            check_hi: 20.0,
            check_points: 100,
            c_lo: -100.0,
            c_hi: 50.0,
            c_step: 5.0,
            methods: vec![
                Method::Cvf,
                Method::Baseline(B::NormalQuantile),
                Method::Baseline(B::BootstrapNp),
                Method::Baseline(B::BootstrapParam),
                Method::Baseline(B::Subsampling),
            ],
            baseline_reps: 1000,
            bootstrap_b: 399,
            block: BlockRule::TwoThirds,
            power_c: vec![-15.0, 0.0],
            b_lo: -10.0,
            b_hi: 10.0,
            b_step: 1.0,
            overlays: Vec::new(),
            surface_gammas: vec![0.2, 0.5, 0.8, 0.9, 0.95, 1.0, 1.02, 1.05, 1.1, 1.2, 1.4],
            surface_draws: 200,
            limit_regime: Regime::Integrated,
            ladder: None,
            limit_draws: 2000,
            limit_steps: 6400,
            limit_reading: LimitReading::Consistent,
            model: None,
            out: PathBuf::from("out"),
            threads: None,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.trim()
        .parse()
        .map_err(|_| CliError::config(format!("`{key}`: cannot parse `{v}`")))
}

fn list<T: std::str::FromStr>(key: &str, v: &str) -> CliResult<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect()
}

fn boolean(key: &str, v: &str) -> CliResult<bool> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(CliError::config(format!("`{key}`: expected a boolean, got `{other}`"))),
    }
}

fn fmt_list<T: std::fmt::Debug>(v: &[T]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let v = value.trim();
        let core = |e: cvf_core::Error| CliError::config(format!("`{key}`: {e}"));
        match key {
            "seed" => self.seed = Some(num(key, v)?),
            "T" | "t" => self.t = num(key, v)?,
            "alpha" => self.alpha = num(key, v)?,
            "rho" => self.rho = list(key, v)?,
            "J" | "j" => self.j = num(key, v)?,
            "calib_draws" => self.calib_draws = num(key, v)?,
            "epsilon" => self.epsilon = num(key, v)?,
            "max_iter" => self.max_iter = num(key, v)?,
            "cov_mode" => self.cov_mode = Some(v.parse().map_err(core)?),
            "trend" => {
                self.deterministic = if boolean(key, v)? { Deterministic::Trend } else { Deterministic::Intercept }
            }
            "deterministic" => self.deterministic = v.parse().map_err(core)?,
            "measure" => self.measure = v.parse().map_err(core)?,
            "flattening" => {
                self.flattening = match v {
                    "none" => FlatteningScheme::None,
                    "ratio" => FlatteningScheme::Ratio,
                    "range" => FlatteningScheme::Range,
                    "both" => FlatteningScheme::Both,
                    other => return Err(CliError::config(format!("unknown flattening `{other}`"))),
                }
            }
            "grid" => self.grid = list(key, v)?,
            "check_lo" => self.check_lo = num(key, v)?,
            "check_hi" => self.check_hi = num(key, v)?,
            "check_points" => self.check_points = num(key, v)?,
            "c_lo" => self.c_lo = num(key, v)?,
            "c_hi" => self.c_hi = num(key, v)?,
            "c_step" => self.c_step = num(key, v)?,
            "methods" => {
                self.methods = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(Method::parse)
                    .collect::<CliResult<_>>()?
            }
            "baseline_reps" => self.baseline_reps = num(key, v)?,
            "bootstrap_b" => self.bootstrap_b = num(key, v)?,
            "block" => {
                self.block = match v {
                    "two_thirds" => BlockRule::TwoThirds,
                    other => BlockRule::Fixed(num(key, other)?),
                }
            }
            "power_c" => self.power_c = list(key, v)?,
            "b_lo" => self.b_lo = num(key, v)?,
            "b_hi" => self.b_hi = num(key, v)?,
            "b_step" => self.b_step = num(key, v)?,
            "overlays" => {
                self.overlays = v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(PathBuf::from).collect()
            }
            "surface_gammas" => self.surface_gammas = list(key, v)?,
            "surface_draws" => self.surface_draws = num(key, v)?,
            "limit_regime" => {
                let (name, gamma) = match v.split_once(':') {
                    Some((n, g)) => (n.trim(), Some(num::<f64>(key, g)?)),
                    None => (v, None),
                };
                self.limit_regime = match (name, gamma) {
                    ("integrated", None) => Regime::Integrated,
                    ("stationary", g) => Regime::Stationary(g.unwrap_or(0.5)),
                    ("explosive", g) => Regime::Explosive(g.unwrap_or(1.05)),
                    _ => return Err(CliError::config(format!("bad limit regime `{v}`"))),
                }
            }
            "ladder" => self.ladder = Some(list(key, v)?),
            "limit_draws" => self.limit_draws = num(key, v)?,
            "limit_steps" => self.limit_steps = num(key, v)?,
            "limit_reading" => self.limit_reading = v.parse().map_err(core)?,
            "model" => self.model = Some(PathBuf::from(v)),
            "out" => self.out = PathBuf::from(v),
            "threads" => self.threads = Some(num(key, v)?),
            other => return Err(CliError::config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies every assignment in a config file body.
    pub fn apply_text(&mut self, text: &str) -> CliResult<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("line {}: expected `key = value`", lineno + 1)))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn seed(&self) -> CliResult<u64> {
        self.seed.ok_or_else(|| CliError::config("a seed is required (`seed = ...` or --seed)"))
    }

    pub fn validate(&self) -> CliResult<()> {
        self.seed()?;
        let bad = |m: &str| Err(CliError::config(m.to_string()));
        if self.t < self.deterministic.min_len() {
            return bad("T is too small for the deterministic part");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must lie in (0,1)");
        }
        if self.rho.is_empty() || self.rho.iter().any(|r| !(r.abs() < 1.0)) {
            return bad("rho values must lie in (-1,1)");
        }
        if self.j == 0 || self.baseline_reps == 0 {
            return bad("replication counts must be positive");
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if self.grid.is_empty() || self.check_points == 0 {
            return bad("need grid points and check points");
        }
        if !(self.c_step > 0.0 && self.b_step > 0.0) || self.c_hi < self.c_lo || self.b_hi < self.b_lo {
            return bad("sweep ranges need lo <= hi and a positive step");
        }
        if self.model.is_some() && self.rho.len() != 1 {
            return bad("a stored model can only be used with a single rho");
        }
        if self.threads == Some(0) {
            return bad("threads must be positive");
        }
        Ok(())
    }

    /// Every setting that can influence results, one `key=value` per line in
    /// a fixed order. The output directory and thread count are excluded.
    pub fn canonical(&self) -> String {
        let mut lines = vec![
            format!("seed={:?}", self.seed),
            format!("T={}", self.t),
            format!("alpha={:?}", self.alpha),
            format!("rho={}", fmt_list(&self.rho)),
            format!("J={}", self.j),
            format!("calib_draws={}", self.calib_draws),
            format!("epsilon={:?}", self.epsilon),
            format!("max_iter={}", self.max_iter),
            format!("cov_mode={}", self.cov_mode.map_or("default", |m| m.name())),
            format!("deterministic={}", self.deterministic.name()),
            format!("measure={}", self.measure.name()),
            format!("flattening={}", self.flattening.name()),
            format!("grid={}", fmt_list(&self.grid)),
            format!("check={:?},{:?},{}", self.check_lo, self.check_hi, self.check_points),
            format!("c_sweep={:?},{:?},{:?}", self.c_lo, self.c_hi, self.c_step),
            format!("methods={}", self.methods.iter().map(|m| m.name()).collect::<Vec<_>>().join(",")),
            format!("baseline_reps={}", self.baseline_reps),
            format!("bootstrap_b={}", self.bootstrap_b),
            format!("block={:?}", self.block),
            format!("power_c={}", fmt_list(&self.power_c)),
            format!("b_sweep={:?},{:?},{:?}", self.b_lo, self.b_hi, self.b_step),
            format!("overlays={}", fmt_list(&self.overlays)),
            format!("surface_gammas={}", fmt_list(&self.surface_gammas)),
            format!("surface_draws={}", self.surface_draws),
            format!("limit_regime={:?}", self.limit_regime),
            format!("ladder={}", self.ladder.as_deref().map_or("default".into(), fmt_list)),
            format!("limit_draws={}", self.limit_draws),
            format!("limit_steps={}", self.limit_steps),
            format!("limit_reading={}", self.limit_reading.name()),
            format!("model={:?}", self.model),
        ];
        lines.push(String::new());
        lines.join("\n")
    }

    /// First 16 hex digits of the SHA-256 of [`Self::canonical`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
