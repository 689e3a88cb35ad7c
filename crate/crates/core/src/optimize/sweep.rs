use serde::Serialize;

use super::{t_opt, SolverOptions};
use crate::distortion::{mse_stationary, DistortionInputs};
use crate::error::{ensure, Error, Result};
use crate::exec::Exec;
use crate::kernels::{ChannelParams, ReceiverGeometry};

/// How the reception radius follows the receiver radius when `a` varies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RadiusRule {
    /// `b` stays at the given value.
    Fixed(f64),
    /// `b = k·a`.
    Ratio(f64),
}

impl RadiusRule {
    pub fn outer_radius(&self, a: f64) -> f64 {
        match *self {
            RadiusRule::Fixed(b) => b,
            RadiusRule::Ratio(k) => k * a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepVariable {
    /// Sampling period `T`, seconds.
    Period,
    /// Diffusion coefficient `D`, m²/s.
    Diffusion,
    /// Receiver radius `a`, meters.
    ReceiverRadius,
    /// Sampling frequency `f = 1/T`, Hz.
    Frequency,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub fixed: DistortionInputs,
    /// Only used when sweeping the receiver radius; defaults to keeping `b`.
    pub constraint: Option<RadiusRule>,
    /// When set, each row also carries the optimal period searched over this bracket.
    pub t_opt_bracket: Option<(f64, f64)>,
    pub solver: SolverOptions,
}

impl SweepSpec {
    pub fn new(variable: SweepVariable, grid: Vec<f64>, fixed: DistortionInputs) -> Result<Self> {
        ensure!(!grid.is_empty(), "sweep grid is empty");
        ensure!(
            grid.windows(2).all(|w| w[0] < w[1]),
            "sweep grid must be strictly increasing"
        );
        ensure!(grid.iter().all(|v| v.is_finite() && *v > 0.0), "sweep grid values must be positive");
        Ok(Self {
            variable,
            grid,
            fixed,
            constraint: None,
            t_opt_bracket: None,
            solver: SolverOptions::period(),
        })
    }

    pub fn with_constraint(mut self, rule: RadiusRule) -> Self {
        self.constraint = Some(rule);
        self
    }

    pub fn with_t_opt(mut self, bracket: (f64, f64)) -> Self {
        self.t_opt_bracket = Some(bracket);
        self
    }

    fn inputs_at(&self, value: f64) -> Result<DistortionInputs> {
        let base = self.fixed;
        match self.variable {
            SweepVariable::Period => base.with_period(value),
            SweepVariable::Frequency => base.with_period(1.0 / value),
            SweepVariable::Diffusion => DistortionInputs::new(base.geom, ChannelParams::new(value)?, base.sig, base.period),
            SweepVariable::ReceiverRadius => {
                let rule = self.constraint.unwrap_or(RadiusRule::Fixed(base.geom.b()));
                let geom = ReceiverGeometry::new(value, rule.outer_radius(value))?;
                DistortionInputs::new(geom, base.chan, base.sig, base.period)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub distortion: Option<f64>,
    pub t_opt: Option<f64>,
    pub min_distortion: Option<f64>,
    /// Set when the point could not be evaluated; the sweep carries on.
    pub error: Option<Error>,
}

fn evaluate_row(spec: &SweepSpec, value: f64) -> SweepRow {
    let mut row = SweepRow {
        value,
        distortion: None,
        t_opt: None,
        min_distortion: None,
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let inp = spec.inputs_at(value)?;
        row.distortion = Some(mse_stationary(&inp)?.value);
        if let Some(bracket) = spec.t_opt_bracket {
            let best = t_opt(&inp, bracket, &spec.solver)?;
            row.t_opt = Some(best.argmin);
            row.min_distortion = Some(best.min_distortion);
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        row.error = Some(e);
    }
    row
}

/// One row per grid point, in grid order regardless of `exec`.
pub fn sweep(spec: &SweepSpec, exec: Exec) -> Vec<SweepRow> {
    exec.map_slice(&spec.grid, |&v| evaluate_row(spec, v))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceRow {
    pub a: f64,
    pub period: f64,
    pub frequency: f64,
    pub distortion: Option<f64>,
    pub error: Option<Error>,
}

/// Distortion over the `(a, T)` grid, row-major with `a` outermost.
pub fn surface(
    a_grid: &[f64],
    period_grid: &[f64],
    template: &DistortionInputs,
    rule: RadiusRule,
    exec: Exec,
) -> Vec<SurfaceRow> {
    let n_t = period_grid.len();
    exec.map_range(a_grid.len() * n_t, |k| {
        let (a, period) = (a_grid[k / n_t], period_grid[k % n_t]);
        let value = ReceiverGeometry::new(a, rule.outer_radius(a))
            .and_then(|geom| DistortionInputs::new(geom, template.chan, template.sig, period))
            .and_then(|inp| mse_stationary(&inp));
        let (distortion, error) = match value {
            Ok(v) => (Some(v.value), None),
            Err(e) => (None, Some(e)),
        };
        SurfaceRow {
            a,
            period,
            frequency: 1.0 / period,
            distortion,
            error,
        }
    })
}
