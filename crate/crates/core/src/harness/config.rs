use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::io;
use crate::error::{Error, Result};
use crate::mather::VerifyOptions;
use crate::models::{
    build_grid, CosineMode, Family, LagrangianSpec, NodeTable, Potential, TauRule, TorusGrid,
};

pub const CONFIG_VERSION: u32 = 1;

/// One experiment: problem, discretization, schedule and output location.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub discretization: DiscretizationConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub dim: usize,
    pub sizes: Vec<usize>,
    #[serde(flatten)]
    pub family: Family,
    pub potential: PotentialConfig,
}

/// A potential given inline or read from a CSV of `index per axis, value` rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialConfig {
    Zero,
    Cosine { modes: Vec<CosineMode> },
    Table(NodeTable),
    Csv { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscretizationConfig {
    pub tau: TauRule,
    /// Overrides `K = ceil(α τ / h)`.
    pub stencil_radius: Option<usize>,
    /// Overrides the velocity box half-width `2α`.
    pub v_search: Option<f64>,
    /// Sample points per grid cell for the bound estimates.
    pub sampling_factor: usize,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        Self {
            tau: TauRule::SqrtH,
            stencil_radius: None,
            v_search: None,
            sampling_factor: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    pub lambdas: Vec<f64>,
    /// Peierls window `[burn_in, horizon]`; defaults to `[N0, 2 N0]` with
    /// `N0` the power of two at or above four times the longest axis.
    pub burn_in: Option<usize>,
    pub horizon: Option<usize>,
    pub barrier_tol: f64,
    /// Stopping tolerance of the discounted solves at the critical shift.
    pub solver_tol: f64,
    /// Stopping tolerance of the unshifted solves behind the critical estimate
    /// (their values scale like `1/λ`).
    pub critical_tol: f64,
    pub max_iter: usize,
    pub eps_aubry: Option<f64>,
    pub eps_class: Option<f64>,
    pub eps_c: Option<f64>,
    pub target_stride: usize,
    /// Extra discount for the pointwise lower-bound spot checks.
    pub prim_lambda: Option<f64>,
    pub verify: VerifyOptions,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            lambdas: (1..=9).map(|k| 0.5f64.powi(k)).collect(),
            burn_in: None,
            horizon: None,
            barrier_tol: 1e-9,
            solver_tol: 1e-9,
            critical_tol: 1e-7,
            max_iter: 20_000_000,
            eps_aubry: None,
            eps_class: None,
            eps_c: None,
            target_stride: 1,
            prim_lambda: Some(0.01),
            verify: VerifyOptions::default(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl ExperimentConfig {
    pub fn new(problem: ProblemConfig) -> Self {
        Self {
            version: CONFIG_VERSION,
            problem,
            discretization: DiscretizationConfig::default(),
            schedule: ScheduleConfig::default(),
            output_dir: default_output_dir(),
        }
    }

    /// Reads and validates a config; relative CSV paths resolve against the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = io::read_string(path)?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        if let PotentialConfig::Csv { path: p } = &mut cfg.problem.potential {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        let p = &self.problem;
        if p.sizes.len() != p.dim {
            return Err(Error::Config(format!(
                "dim {} but {} grid sizes",
                p.dim,
                p.sizes.len()
            )));
        }
        build_grid(p.dim, &p.sizes).map_err(|e| Error::Config(e.to_string()))?;
        match &p.family {
            Family::Transport { drift } if drift.iter().any(|d| !d.is_finite()) => {
                return Err(Error::Config("drift must be finite".into()));
            }
            _ => {}
        }
        let d = &self.discretization;
        if let TauRule::Fixed(t) = d.tau {
            positive("discretization.tau.fixed", t)?;
        }
        if let Some(v) = d.v_search {
            positive("discretization.v_search", v)?;
        }
        if d.stencil_radius == Some(0) {
            return Err(Error::Config(
                "discretization.stencil_radius must be at least 1".into(),
            ));
        }
        if d.sampling_factor == 0 {
            return Err(Error::Config(
                "discretization.sampling_factor must be at least 1".into(),
            ));
        }
        let s = &self.schedule;
        if s.lambdas.is_empty() {
            return Err(Error::Config("schedule.lambdas is empty".into()));
        }
        for &l in &s.lambdas {
            positive("schedule.lambdas entry", l)?;
        }
        if s.lambdas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config(
                "schedule.lambdas must be strictly decreasing".into(),
            ));
        }
        positive("schedule.barrier_tol", s.barrier_tol)?;
        positive("schedule.solver_tol", s.solver_tol)?;
        positive("schedule.critical_tol", s.critical_tol)?;
        for (name, v) in [
            ("schedule.eps_aubry", s.eps_aubry),
            ("schedule.eps_class", s.eps_class),
            ("schedule.eps_c", s.eps_c),
            ("schedule.prim_lambda", s.prim_lambda),
        ] {
            if let Some(v) = v {
                positive(name, v)?;
            }
        }
        if s.max_iter == 0 || s.target_stride == 0 {
            return Err(Error::Config(
                "max_iter and target_stride must be at least 1".into(),
            ));
        }
        match (s.burn_in, s.horizon) {
            (Some(a), Some(b)) if a == 0 || b < 2 * a => {
                return Err(Error::Config(format!(
                    "Peierls window [{a}, {b}] needs burn_in >= 1 and horizon >= 2 burn_in"
                )));
            }
            (Some(_), None) | (None, Some(_)) => {
                return Err(Error::Config(
                    "set both burn_in and horizon, or neither".into(),
                ));
            }
            _ => {}
        }
        let v = &s.verify;
        for (name, x) in [
            ("verify.subsolution_tol", v.subsolution_tol),
            ("verify.constraint_tol", v.constraint_tol),
            ("verify.maximality_delta", v.maximality_delta),
            ("verify.plateau", v.plateau),
            ("verify.lipschitz_ratio", v.lipschitz_ratio),
            ("verify.prim_tol", v.prim_tol),
            ("verify.prim_tail", v.prim_tail),
            ("verify.cross_check_tol", v.cross_check_tol),
            ("verify.lp_tol", v.lp_tol),
            ("verify.closedness_tol", v.closedness_tol),
            ("verify.agreement_tol", v.agreement_tol),
        ] {
            positive(name, x)?;
        }
        if !(v.monotone_slack >= 0.0) {
            return Err(Error::Config(
                "verify.monotone_slack must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        build_grid(self.problem.dim, &self.problem.sizes)
    }

    /// The Lagrangian without a velocity box (set once the bounds are known).
    pub fn lagrangian(&self) -> Result<LagrangianSpec> {
        let potential = self.problem.potential.resolve()?;
        Ok(LagrangianSpec {
            dim: self.problem.dim,
            family: self.problem.family.clone(),
            potential,
            velocity_box: None,
        })
    }

    /// Replaces the grid sizes, e.g. from `--grid 32x32`.
    pub fn with_grid(mut self, sizes: Vec<usize>) -> Result<Self> {
        self.problem.dim = sizes.len();
        self.problem.sizes = sizes;
        self.validate()?;
        Ok(self)
    }
}

impl PotentialConfig {
    pub fn resolve(&self) -> Result<Potential> {
        Ok(match self {
            PotentialConfig::Zero => Potential::Zero,
            PotentialConfig::Cosine { modes } => Potential::Cosine {
                modes: modes.clone(),
            },
            PotentialConfig::Table(t) => {
                Potential::Table(NodeTable::new(t.sizes.clone(), t.values.clone())?)
            }
            PotentialConfig::Csv { path } => Potential::Table(read_potential_csv(path)?),
        })
    }
}

/// Rows `i, value` (1-D) or `i, j, value` (2-D); a non-numeric first line is a header.
pub fn read_potential_csv(path: &Path) -> Result<NodeTable> {
    let text = io::read_string(path)?;
    let bad = |reason: String| Error::Format {
        path: path.display().to_string(),
        reason,
    };
    let mut rows: Vec<(Vec<usize>, f64)> = Vec::new();
    let mut width = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Option<Vec<f64>> = fields.iter().map(|f| f.parse::<f64>().ok()).collect();
        let Some(nums) = parsed else {
            if rows.is_empty() && width.is_none() {
                width = Some(fields.len());
                continue;
            }
            return Err(bad(format!("line {}: non-numeric field", lineno + 1)));
        };
        if nums.len() != 2 && nums.len() != 3 {
            return Err(bad(format!("line {}: expected 2 or 3 columns", lineno + 1)));
        }
        if let Some(w) = width {
            if w != nums.len() {
                return Err(bad(format!("line {}: column count changed", lineno + 1)));
            }
        }
        width = Some(nums.len());
        let (idx, value) = nums.split_at(nums.len() - 1);
        let idx: Vec<usize> = idx
            .iter()
            .map(|&v| {
                if v >= 0.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(bad(format!("line {}: bad node index {v}", lineno + 1)))
                }
            })
            .collect::<Result<_>>()?;
        rows.push((idx, value[0]));
    }
    if rows.is_empty() {
        return Err(bad("no data rows".into()));
    }
    let dim = rows[0].0.len();
    let sizes: Vec<usize> = (0..dim)
        .map(|a| rows.iter().map(|r| r.0[a]).max().unwrap_or(0) + 1)
        .collect();
    let total: usize = sizes.iter().product();
    let mut values = vec![f64::NAN; total];
    for (idx, v) in &rows {
        let flat = idx[0] + if dim == 2 { sizes[0] * idx[1] } else { 0 };
        values[flat] = *v;
    }
    if values.iter().any(|v| v.is_nan()) || rows.len() != total {
        return Err(bad(format!(
            "expected exactly one value per node of a {sizes:?} lattice"
        )));
    }
    NodeTable::new(sizes, values)
}

/// `"200"` or `"32x32"`.
pub fn parse_grid(s: &str) -> std::result::Result<Vec<usize>, String> {
    let sizes: std::result::Result<Vec<usize>, _> = s
        .split(['x', 'X'])
        .map(|p| p.trim().parse::<usize>())
        .collect();
    match sizes {
        Ok(v) if (1..=2).contains(&v.len()) => Ok(v),
        _ => Err(format!("grid must look like `200` or `32x32`, got `{s}`")),
    }
}

/// Built-in problems used by the examples and tests.
pub mod presets {
    use super::*;

    pub fn pendulum(n: usize) -> ExperimentConfig {
        ExperimentConfig::new(ProblemConfig {
            dim: 1,
            sizes: vec![n],
            family: Family::Mechanical,
            potential: PotentialConfig::Cosine {
                modes: vec![CosineMode {
                    amplitude: 1.0,
                    wavenumber: [1, 0],
                    phase: 0.0,
                }],
            },
        })
    }

    pub fn two_wells(n: usize) -> ExperimentConfig {
        let mut c = pendulum(n);
        c.problem.potential = PotentialConfig::Cosine {
            modes: vec![CosineMode {
                amplitude: 1.0,
                wavenumber: [2, 0],
                phase: 0.0,
            }],
        };
        c
    }

    pub fn free_particle(n: usize) -> ExperimentConfig {
        let mut c = pendulum(n);
        c.problem.potential = PotentialConfig::Zero;
        c
    }
}
