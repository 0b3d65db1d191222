//! Run configuration: a flat TOML file overridden by command-line flags.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use trishape::dynamics::{Direction, ICSpec, IntegratorConfig};
use trishape::geometry::ChartPotential;
use trishape::{MassSystem, ShapePoint};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DirectionArg {
    Forward,
    Backward,
    Both,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Forward => Direction::Forward,
            DirectionArg::Backward => Direction::Backward,
            DirectionArg::Both => Direction::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialArg {
    /// V_N, the three-body potential summed over triples
    Triples,
    /// strong-force potential summed over pairs
    StrongForce,
}

impl From<PotentialArg> for ChartPotential {
    fn from(p: PotentialArg) -> Self {
        match p {
            PotentialArg::Triples => ChartPotential::Triples,
            PotentialArg::StrongForce => ChartPotential::StrongForce,
        }
    }
}

/// Every configurable key. Each is optional in the file and on the command
/// line; flags win over the file, the file wins over built-in defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Free-form scenario label echoed in reports
    #[arg(long)]
    pub scenario: Option<String>,
    /// Body masses, comma separated [default: equal unit masses]
    #[arg(long, value_delimiter = ',')]
    pub masses: Option<Vec<f64>>,
    /// Coupling constant γ [default: 1]
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Number of bodies when masses are not given [default: 3, or 4 for curvature]
    #[arg(long = "n")]
    pub n_bodies: Option<usize>,
    /// Initial moment of inertia [default: 1]
    #[arg(long)]
    pub i0: Option<f64>,
    /// Start shape direction w1,w2,w3 [default: 0,0,1 (equilateral)]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub shape: Option<Vec<f64>>,
    /// Phase of the initial horizontal velocity [default: 0.3]
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Relative tolerance [default: 1e-10]
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Absolute tolerance [default: 1e-10]
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// Largest step [default: 1]
    #[arg(long)]
    pub max_step: Option<f64>,
    /// Stop when |w3|/|w| falls below this [default: 1e-2]
    #[arg(long)]
    pub stop_ratio: Option<f64>,
    /// Stop after this much elapsed time per side [default: 100]
    #[arg(long)]
    pub max_time: Option<f64>,
    /// Integrate in the rescaled time dt = (Δ/Δ0)² dτ [default: false]
    #[arg(long)]
    pub time_rescaling: Option<bool>,
    /// Integration direction [default: both]
    #[arg(long, value_enum)]
    pub direction: Option<DirectionArg>,
    /// Extra interpolated samples per step [default: 0]
    #[arg(long)]
    pub dense_output: Option<usize>,
    /// Sample count for surveys, censuses and curves
    #[arg(long)]
    pub samples: Option<usize>,
    /// Census rejection threshold |Δ|/I [default: 1e-6]
    #[arg(long)]
    pub eps: Option<f64>,
    /// 64-bit seed for every random choice [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Relative finite-difference step for curvature [default: 1e-4]
    #[arg(long)]
    pub h: Option<f64>,
    /// Potential of the N-body chart metric [default: triples]
    #[arg(long, value_enum)]
    pub potential: Option<PotentialArg>,
    /// Output file [default: standard output]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident, $($field:ident),*) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field.clone(); } )*
    };
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// `self` with every key set in `flags` replaced.
    pub fn overridden_by(mut self, flags: &RunConfig) -> Self {
        overlay!(
            self,
            flags,
            scenario,
            masses,
            gamma,
            n_bodies,
            i0,
            shape,
            theta,
            rel_tol,
            abs_tol,
            max_step,
            stop_ratio,
            max_time,
            time_rescaling,
            direction,
            dense_output,
            samples,
            eps,
            seed,
            h,
            potential,
            out,
            format
        );
        self
    }

    pub fn mass_system(&self, default_n: usize) -> Result<MassSystem, CliError> {
        let gamma = self.gamma.unwrap_or(1.0);
        let ms = match (&self.masses, self.n_bodies) {
            (Some(m), Some(n)) if m.len() != n => {
                return Err(CliError::Usage(format!("{} masses given for n = {n}", m.len())))
            }
            (Some(m), _) => MassSystem::new(m.clone(), gamma),
            (None, n) => MassSystem::equal(n.unwrap_or(default_n), gamma),
        };
        Ok(ms?)
    }

    pub fn ic_spec(&self) -> Result<ICSpec, CliError> {
        let shape = match &self.shape {
            None => ShapePoint::new(0.0, 0.0, 1.0),
            Some(v) if v.len() == 3 => ShapePoint::new(v[0], v[1], v[2]),
            Some(v) => return Err(CliError::Usage(format!("shape needs 3 components, got {}", v.len()))),
        };
        Ok(ICSpec { i0: self.i0.unwrap_or(1.0), shape, theta: self.theta.unwrap_or(0.3) })
    }

    pub fn integrator(&self) -> Result<IntegratorConfig, CliError> {
        let d = IntegratorConfig::default();
        let cfg = IntegratorConfig {
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol),
            abs_tol: self.abs_tol.unwrap_or(d.abs_tol),
            max_step: self.max_step.unwrap_or(d.max_step),
            stop_ratio: self.stop_ratio.unwrap_or(d.stop_ratio),
            max_time: self.max_time.unwrap_or(d.max_time),
            time_rescaling: self.time_rescaling.unwrap_or(d.time_rescaling),
            direction: self.direction.map(Direction::from).unwrap_or(d.direction),
            dense_output: self.dense_output.unwrap_or(d.dense_output),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    pub fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}
