use crate::error::{Error, Result};
use crate::model::scaling_g;

/// How grid offsets `c_i` translate into autoregressive parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridMapping {
    /// `γ_i = γ̄ + c_i/T`.
    PerT,
    /// `γ_i = γ̄ + c_i·g_T(γ̄)`.
    Local,
    /// `γ_i = γ̄ + c_i`.
    Level,
}

impl GridMapping {
    pub fn name(self) -> &'static str {
        match self {
            GridMapping::PerT => "per-T",
            GridMapping::Local => "local",
            GridMapping::Level => "level",
        }
    }
}

impl std::str::FromStr for GridMapping {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-T" | "per-t" => Ok(GridMapping::PerT),
            "local" => Ok(GridMapping::Local),
            "level" => Ok(GridMapping::Level),
            other => Err(Error::InvalidInput(format!("unknown grid mapping `{other}`"))),
        }
    }
}

/// Nuisance-parameter grid on which the test is made similar.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    center: f64,
    offsets: Vec<f64>,
    mapping: GridMapping,
    t: usize,
}

const DUPLICATE_TOL: f64 = 1e-9;

impl Grid {
    pub fn new(center: f64, offsets: Vec<f64>, mapping: GridMapping, t: usize) -> Result<Self> {
        if offsets.is_empty() {
            return Err(Error::InvalidInput("grid needs at least one point".into()));
        }
        if t < 3 {
            return Err(Error::InvalidInput("grid needs T >= 3".into()));
        }
        if !center.is_finite() || offsets.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("grid values must be finite".into()));
        }
        let grid = Self { center, offsets, mapping, t };
        let gammas = grid.gammas();
        for (i, a) in gammas.iter().enumerate() {
            if !a.is_finite() {
                return Err(Error::InvalidInput("grid maps to a non-finite gamma".into()));
            }
            if gammas[..i].iter().any(|b| (a - b).abs() <= DUPLICATE_TOL) {
                return Err(Error::DuplicateGridPoint { gamma: *a });
            }
        }
        Ok(grid)
    }

    /// Grid centred at the unit root with `γ_i = 1 + c_i/T`.
    pub fn per_t(offsets: Vec<f64>, t: usize) -> Result<Self> {
        Self::new(1.0, offsets, GridMapping::PerT, t)
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn mapping(&self) -> GridMapping {
        self.mapping
    }

    pub fn sample_len(&self) -> usize {
        self.t
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn gamma_at(&self, c: f64) -> f64 {
        match self.mapping {
            GridMapping::PerT => self.center + c / self.t as f64,
            GridMapping::Local => self.center + c * scaling_g(self.center, self.t),
            GridMapping::Level => self.center + c,
        }
    }

    pub fn gammas(&self) -> Vec<f64> {
        self.offsets.iter().map(|&c| self.gamma_at(c)).collect()
    }

    /// Offsets in units of `g_T(γ̄)`, the scale on which the local
    /// expansion of the likelihood ratio is written.
    pub fn local_offsets(&self) -> Vec<f64> {
        let g = scaling_g(self.center, self.t);
        self.gammas().iter().map(|gm| (gm - self.center) / g).collect()
    }

    /// Copy of the grid with one more offset, kept in increasing order.
    /// Returns the grid and the position of the new point.
    pub fn with_offset(&self, c: f64) -> Result<(Self, usize)> {
        let pos = self.offsets.iter().position(|&o| o > c).unwrap_or(self.offsets.len());
        let mut offsets = self.offsets.clone();
        offsets.insert(pos, c);
        Ok((Self::new(self.center, offsets, self.mapping, self.t)?, pos))
    }
}
