//! Monte Carlo estimate of the distortion from simulated trials.

use serde::{Deserialize, Serialize};

use super::sampling::draw_signal;
use super::walk::{absorption_steps, TrialRecord, WalkParams};
use crate::dspp::SignalModel;
use crate::error::{ensure, Result};
use crate::exec::Exec;
use crate::kernels::{ChannelParams, ReceiverGeometry};
use crate::rng::stream_rng;

/// How the initial shell count of a trial is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalMode {
    /// Every trial places `round(μ_s)` molecules.
    #[default]
    Fixed,
    /// Each trial draws its count from the Gaussian signal model.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationSetup {
    pub geom: ReceiverGeometry,
    pub chan: ChannelParams,
    pub walk: WalkParams,
    pub sig: SignalModel,
    pub mode: SignalMode,
    pub n_trials: u64,
    pub seed: u64,
    pub exec: Exec,
}

/// Outcome of one trial simulated up to some horizon: the shell count and
/// the sorted absorption steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialHistory {
    pub s_initial: u64,
    pub hit_steps: Vec<u64>,
    pub clamped: bool,
}

impl TrialHistory {
    pub fn absorbed_by(&self, steps: u64) -> u64 {
        self.hit_steps.partition_point(|&s| s <= steps) as u64
    }

    pub fn record(&self, steps: u64) -> TrialRecord {
        TrialRecord {
            s_initial: self.s_initial,
            x_absorbed: self.absorbed_by(steps),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub period: f64,
    pub steps: u64,
    /// Mean of `(s_i/(V_R - V_N) - x_i/V_N)²` over trials.
    pub distortion: f64,
    pub std_error: f64,
    pub n_trials: u64,
    /// Sample correlation of `(s_i, x_i)`; undefined when either count is constant.
    pub rho_empirical: Option<f64>,
    pub mean_signal: f64,
    pub mean_absorbed: f64,
    /// Trials whose Gaussian count draw was clamped at zero.
    pub clamped: u64,
}

/// Simulates every trial of `setup` for `max_steps` steps. Trial `i` uses
/// stream `i` of the setup seed, so the histories do not depend on `exec`.
pub fn simulate_trials(setup: &SimulationSetup, max_steps: u64) -> Vec<TrialHistory> {
    setup.walk.check_against(&setup.geom, &setup.chan);
    setup.exec.map_range(setup.n_trials as usize, |i| {
        let mut rng = stream_rng(setup.seed, i as u64);
        let (s_initial, clamped) = match setup.mode {
            SignalMode::Fixed => (setup.sig.mu_s().round() as u64, false),
            SignalMode::Gaussian => draw_signal(&setup.sig, &mut rng),
        };
        TrialHistory {
            s_initial,
            hit_steps: absorption_steps(&setup.geom, &setup.walk, s_initial, max_steps, &mut rng),
            clamped,
        }
    })
}

fn summarize(setup: &SimulationSetup, histories: &[TrialHistory], period: f64) -> McEstimate {
    let (steps, truncated) = setup.walk.steps_for(period);
    if truncated {
        log::debug!("period {period} s truncated to {steps} steps of τ = {} s", setup.walk.tau);
    }
    let vs = setup.geom.shell_volume();
    let vn = setup.geom.receiver_volume();
    let n = histories.len() as f64;

    let records: Vec<TrialRecord> = histories.iter().map(|h| h.record(steps)).collect();
    let errors: Vec<f64> = records
        .iter()
        .map(|r| {
            let e = r.s_initial as f64 / vs - r.x_absorbed as f64 / vn;
            e * e
        })
        .collect();
    let distortion = errors.iter().sum::<f64>() / n;
    let std_error = if histories.len() > 1 {
        let var = errors.iter().map(|e| (e - distortion) * (e - distortion)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };

    let mean_signal = records.iter().map(|r| r.s_initial as f64).sum::<f64>() / n;
    let mean_absorbed = records.iter().map(|r| r.x_absorbed as f64).sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for r in &records {
        let ds = r.s_initial as f64 - mean_signal;
        let dx = r.x_absorbed as f64 - mean_absorbed;
        sxx += ds * ds;
        syy += dx * dx;
        sxy += ds * dx;
    }
    let rho_empirical = (sxx > 0.0 && syy > 0.0).then(|| (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0));

    McEstimate {
        period,
        steps,
        distortion,
        std_error,
        n_trials: histories.len() as u64,
        rho_empirical,
        mean_signal,
        mean_absorbed,
        clamped: histories.iter().filter(|h| h.clamped).count() as u64,
    }
}

/// Estimates the distortion at each sampling period in `periods` from one
/// set of trials simulated up to the longest period, so neighbouring points
/// share their random paths.
pub fn estimate_distortion_curve(setup: &SimulationSetup, periods: &[f64]) -> Result<Vec<McEstimate>> {
    ensure!(setup.n_trials >= 1, "need at least one trial");
    ensure!(!periods.is_empty(), "no sampling periods given");
    ensure!(
        periods.iter().all(|t| t.is_finite() && *t > 0.0),
        "sampling periods must be positive"
    );
    let horizon = periods.iter().map(|&t| setup.walk.steps_for(t).0).max().unwrap_or(0);
    let histories = simulate_trials(setup, horizon);
    Ok(periods.iter().map(|&t| summarize(setup, &histories, t)).collect())
}

/// Monte Carlo distortion at a single sampling period. Equal to the matching
/// entry of [`estimate_distortion_curve`] for the same setup.
pub fn estimate_distortion(setup: &SimulationSetup, period: f64) -> Result<McEstimate> {
    Ok(estimate_distortion_curve(setup, &[period])?.remove(0))
}
