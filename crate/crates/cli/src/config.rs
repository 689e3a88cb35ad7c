//! Run configuration read from TOML.
//!
//! Keys carry their unit as a suffix (`a_um`, `period_s`, `diffusion_m2_per_s`).
//! Every key is optional; a missing key takes the nominal value below. Unknown
//! keys are rejected so a typo cannot silently fall back to a default.

use std::fmt;
use std::path::{Path, PathBuf};

use molsig::montecarlo::{SignalMode, StepLaw};
use molsig::{ChannelParams, ReceiverGeometry, SignalModel, WalkParams, UM};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::table::Format;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::Subcommand)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    /// Analytic and Monte Carlo distortion curves side by side.
    Validate,
    /// Analytic distortion over a parameter grid.
    Sweep,
    /// Optimal sampling period (or receiver radius) over a grid.
    Optimize,
    /// Histograms of shell and reconstructed concentrations.
    Distributions,
    /// 1D random-walk concentration trace.
    Trace,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Experiment::Validate => "validate",
            Experiment::Sweep => "sweep",
            Experiment::Optimize => "optimize",
            Experiment::Distributions => "distributions",
            Experiment::Trace => "trace",
        };
        f.write_str(name)
    }
}

/// Either explicit values or `{ start, stop, points }` evenly spaced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range(GridRange),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRange {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub fn range(start: f64, stop: f64, points: usize) -> Self {
        Grid::Range(GridRange { start, stop, points })
    }

    pub fn values(&self) -> Result<Vec<f64>, String> {
        let values = match self {
            Grid::List(v) => v.clone(),
            Grid::Range(GridRange { start, stop, points }) => match *points {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..n)
                    .map(|k| if k == n - 1 { *stop } else { start + (stop - start) * k as f64 / (n - 1) as f64 })
                    .collect(),
            },
        };
        if values.is_empty() {
            return Err("grid is empty".into());
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(format!("grid value {bad} is not finite"));
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub mu_s: f64,
    pub sigma_s_sq: f64,
    pub rho_sx: f64,
    pub diffusion_m2_per_s: f64,
    pub a_um: f64,
    pub b_um: f64,
    pub period_s: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            mu_s: 100.0,
            sigma_s_sq: 100.0,
            rho_sx: 0.75,
            diffusion_m2_per_s: 1e-12,
            a_um: 1.0,
            b_um: 2.0,
            period_s: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkConfig {
    pub tau_s: f64,
    /// Step length; `√(2Dτ)` when absent.
    pub delta_um: Option<f64>,
    pub step_law: StepLaw,
    pub signal: SignalMode,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            tau_s: 1e-3,
            delta_um: None,
            step_law: StepLaw::Lattice,
            signal: SignalMode::Fixed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    /// One curve per reception radius.
    pub b_um: Vec<f64>,
    pub periods_s: Grid,
    pub trials: u64,
    pub t_bracket_s: [f64; 2],
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self {
            b_um: vec![2.0, 2.5, 3.0],
            periods_s: Grid::range(0.01, 0.25, 25),
            trials: 10_000,
            t_bracket_s: [1e-4, 0.25],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub period_s: Option<Grid>,
    pub frequency_hz: Option<Grid>,
    pub diffusion_m2_per_s: Option<Grid>,
    pub a_um: Option<Grid>,
    /// Ties `b` to `a`; `model.b_um` is used when absent.
    pub b_over_a: Option<f64>,
    /// Also report the optimal period at each point.
    pub t_opt: bool,
    pub t_bracket_s: [f64; 2],
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            period_s: None,
            frequency_hz: None,
            diffusion_m2_per_s: None,
            a_um: None,
            b_over_a: None,
            t_opt: false,
            t_bracket_s: [1e-4, 0.25],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizeTarget {
    #[default]
    Period,
    Radius,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeConfig {
    pub target: OptimizeTarget,
    /// Receiver radii for `target = "period"`.
    pub a_um: Grid,
    /// Fixed reception radius; overrides `b_over_a`.
    pub b_um: Option<f64>,
    pub b_over_a: f64,
    pub t_bracket_s: [f64; 2],
    /// Period of the constant-period baseline column.
    pub constant_period_s: f64,
    /// Sampling periods for `target = "radius"`.
    pub period_s: Grid,
    pub a_bracket_um: [f64; 2],
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            target: OptimizeTarget::Period,
            a_um: Grid::range(0.6, 2.0, 8),
            b_um: None,
            b_over_a: 2.0,
            t_bracket_s: [1e-4, 0.5],
            constant_period_s: 0.1,
            period_s: Grid::List(vec![0.2, 0.25]),
            a_bracket_um: [0.5, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistributionsConfig {
    pub draws: u64,
    pub bins: usize,
}

impl Default for DistributionsConfig {
    fn default() -> Self {
        Self {
            draws: 1_000_000,
            bins: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceConfig {
    pub molecules: u64,
    pub r_um: f64,
    pub diffusion_m2_per_s: f64,
    pub tau_s: f64,
    /// Step length; `√(2Dτ)` when absent.
    pub delta_um: Option<f64>,
    pub step_law: StepLaw,
    pub bin_width_um: f64,
    pub t_max_s: f64,
    /// Keep every `stride`-th step in the output.
    pub stride: usize,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self {
            molecules: 10_000,
            r_um: 10.0,
            diffusion_m2_per_s: 1e-11,
            tau_s: 1e-3,
            delta_um: None,
            step_law: StepLaw::Lattice,
            bin_width_um: 1.0,
            t_max_s: 10.0,
            stride: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Option<Experiment>,
    pub seed: u64,
    pub output: OutputConfig,
    pub model: ModelConfig,
    pub walk: WalkConfig,
    pub validate: ValidateConfig,
    pub sweep: SweepConfig,
    pub optimize: OptimizeConfig,
    pub distributions: DistributionsConfig,
    pub trace: TraceConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            seed: 1,
            output: OutputConfig::default(),
            model: ModelConfig::default(),
            walk: WalkConfig::default(),
            validate: ValidateConfig::default(),
            sweep: SweepConfig::default(),
            optimize: OptimizeConfig::default(),
            distributions: DistributionsConfig::default(),
            trace: TraceConfig::default(),
        }
    }
}

fn field<T, E: fmt::Display>(name: &str, r: Result<T, E>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Config(format!("{name}: {e}")))
}

fn check(name: &str, ok: bool, why: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name}: {why}")))
    }
}

fn check_bracket(name: &str, b: [f64; 2]) -> Result<(), CliError> {
    check(name, b[0] > 0.0 && b[0] < b[1] && b[1].is_finite(), "need 0 < lo < hi")
}

fn positive_grid(name: &str, grid: &Grid) -> Result<Vec<f64>, CliError> {
    let values = field(name, grid.values())?;
    check(name, values.iter().all(|&v| v > 0.0), "values must be positive")?;
    Ok(values)
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML form without the output section, hex
    /// encoded.
    pub fn hash(&self) -> String {
        let canonical = Self {
            output: OutputConfig::default(),
            ..self.clone()
        };
        Sha256::digest(canonical.to_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn geometry(&self) -> Result<ReceiverGeometry, CliError> {
        field("model.a_um/b_um", ReceiverGeometry::new(self.model.a_um * UM, self.model.b_um * UM))
    }

    pub fn channel(&self) -> Result<ChannelParams, CliError> {
        field("model.diffusion_m2_per_s", ChannelParams::new(self.model.diffusion_m2_per_s))
    }

    pub fn signal(&self) -> Result<SignalModel, CliError> {
        field(
            "model",
            SignalModel::new(self.model.mu_s, self.model.sigma_s_sq, self.model.rho_sx),
        )
    }

    pub fn walk(&self) -> Result<WalkParams, CliError> {
        let w = &self.walk;
        let params = match w.delta_um {
            Some(delta) => field("walk.delta_um", WalkParams::explicit(w.tau_s, delta * UM))?,
            None => field("walk.tau_s", WalkParams::derived(w.tau_s, &self.channel()?))?,
        };
        Ok(params.with_law(w.step_law))
    }

    /// Checks every parameter the experiment will use.
    pub fn validate(&self, experiment: Experiment) -> Result<(), CliError> {
        if let Some(declared) = self.experiment {
            check(
                "experiment",
                declared == experiment,
                &format!("config is for `{declared}`, not `{experiment}`"),
            )?;
        }
        self.geometry()?;
        self.channel()?;
        self.signal()?;
        check("model.period_s", self.model.period_s > 0.0, "must be positive")?;
        match experiment {
            Experiment::Validate => {
                let v = &self.validate;
                self.walk()?;
                check("validate.b_um", !v.b_um.is_empty(), "need at least one radius")?;
                for &b in &v.b_um {
                    field("validate.b_um", ReceiverGeometry::new(self.model.a_um * UM, b * UM))?;
                }
                positive_grid("validate.periods_s", &v.periods_s)?;
                check("validate.trials", v.trials >= 1, "need at least one trial")?;
                check_bracket("validate.t_bracket_s", v.t_bracket_s)?;
            }
            Experiment::Sweep => {
                let s = &self.sweep;
                let given = [&s.period_s, &s.frequency_hz, &s.diffusion_m2_per_s, &s.a_um];
                for (name, grid) in ["period_s", "frequency_hz", "diffusion_m2_per_s", "a_um"].iter().zip(given) {
                    if let Some(g) = grid {
                        positive_grid(&format!("sweep.{name}"), g)?;
                    }
                }
                let n = given.iter().filter(|g| g.is_some()).count();
                let surface = n == 2 && s.a_um.is_some() && (s.period_s.is_some() || s.frequency_hz.is_some());
                check("sweep", n <= 1 || surface, "set one grid, or a_um with period_s or frequency_hz")?;
                if let Some(k) = s.b_over_a {
                    check("sweep.b_over_a", k > 1.0, "must exceed 1")?;
                }
                if s.t_opt {
                    check_bracket("sweep.t_bracket_s", s.t_bracket_s)?;
                }
            }
            Experiment::Optimize => {
                let o = &self.optimize;
                check("optimize.b_over_a", o.b_over_a > 1.0, "must exceed 1")?;
                check_bracket("optimize.t_bracket_s", o.t_bracket_s)?;
                check("optimize.constant_period_s", o.constant_period_s > 0.0, "must be positive")?;
                match o.target {
                    OptimizeTarget::Period => {
                        positive_grid("optimize.a_um", &o.a_um)?;
                    }
                    OptimizeTarget::Radius => {
                        positive_grid("optimize.period_s", &o.period_s)?;
                        check_bracket("optimize.a_bracket_um", o.a_bracket_um)?;
                    }
                }
            }
            Experiment::Distributions => {
                let d = &self.distributions;
                check("distributions.draws", d.draws >= 1, "need at least one draw")?;
                check("distributions.bins", d.bins >= 1, "need at least one bin")?;
            }
            Experiment::Trace => {
                let t = &self.trace;
                field("trace.diffusion_m2_per_s", ChannelParams::new(t.diffusion_m2_per_s))?;
                check("trace.r_um", t.r_um.is_finite(), "must be finite")?;
                check("trace.bin_width_um", t.bin_width_um > 0.0, "must be positive")?;
                check("trace.t_max_s", t.t_max_s >= t.tau_s, "shorter than one step")?;
                check("trace.stride", t.stride >= 1, "must be at least 1")?;
                if let Some(delta) = t.delta_um {
                    field("trace.delta_um", WalkParams::explicit(t.tau_s, delta * UM))?;
                } else {
                    check("trace.tau_s", t.tau_s > 0.0, "must be positive")?;
                }
            }
        }
        Ok(())
    }
}
