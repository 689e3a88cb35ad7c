//! Moments of the absorbed count `x(t)`, a doubly stochastic Poisson process
//! whose intensity `(F(T)/T)·s(t)` is driven by the Gaussian shell count `s(t)`.

use serde::Serialize;

use crate::error::{ensure, Result};
use crate::kernels::{capture_fraction, ChannelParams, ReceiverGeometry};
use crate::quadrature::{integrate, integrate_triangle, QuadOptions};

/// Below this mean the Gaussian stand-in for a Poisson shell count is poor.
pub const GAUSSIAN_MEAN_FLOOR: f64 = 30.0;

/// Gaussian statistics of the shell molecule count and its correlation with
/// the absorbed count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignalModel {
    mu_s: f64,
    sigma_s_sq: f64,
    rho_sx: f64,
}

impl SignalModel {
    pub fn new(mu_s: f64, sigma_s_sq: f64, rho_sx: f64) -> Result<Self> {
        ensure!(mu_s.is_finite() && mu_s > 0.0, "signal mean must be positive, got {mu_s}");
        ensure!(
            sigma_s_sq.is_finite() && sigma_s_sq >= 0.0,
            "signal variance must be nonnegative, got {sigma_s_sq}"
        );
        ensure!(
            (0.0..=1.0).contains(&rho_sx),
            "correlation coefficient must lie in [0, 1], got {rho_sx}"
        );
        if mu_s < GAUSSIAN_MEAN_FLOOR {
            log::warn!("signal mean {mu_s} < {GAUSSIAN_MEAN_FLOOR}: Gaussian count model is crude");
        }
        Ok(Self {
            mu_s,
            sigma_s_sq,
            rho_sx,
        })
    }

    pub fn mu_s(&self) -> f64 {
        self.mu_s
    }

    pub fn sigma_s_sq(&self) -> f64 {
        self.sigma_s_sq
    }

    pub fn sigma_s(&self) -> f64 {
        self.sigma_s_sq.sqrt()
    }

    pub fn rho_sx(&self) -> f64 {
        self.rho_sx
    }

    pub fn with_rho(self, rho_sx: f64) -> Result<Self> {
        Self::new(self.mu_s, self.sigma_s_sq, rho_sx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryMoments {
    pub mean_x: f64,
    pub var_x: f64,
    pub second_moment_x: f64,
}

fn check_period_and_fraction(period: f64, fraction: f64) -> Result<()> {
    ensure!(period.is_finite() && period > 0.0, "sampling period must be positive, got {period}");
    ensure!(
        (0.0..=1.0).contains(&fraction),
        "capture fraction must lie in [0, 1], got {fraction}"
    );
    Ok(())
}

/// Counting intensity `F·s/T` in molecules per second.
pub fn intensity(s_value: f64, period: f64, fraction: f64) -> Result<f64> {
    check_period_and_fraction(period, fraction)?;
    ensure!(s_value >= 0.0, "shell count must be nonnegative, got {s_value}");
    Ok(fraction * s_value / period)
}

/// `E{x(t)} = (F/T)·∫_{t0}^{t} m(u) du`, by adaptive quadrature.
pub fn mean_x_general<M>(t0: f64, t: f64, mean_fn: M, period: f64, fraction: f64, opts: &QuadOptions) -> Result<f64>
where
    M: Fn(f64) -> f64,
{
    check_period_and_fraction(period, fraction)?;
    ensure!(t > t0, "integration window must be nonempty: [{t0}, {t}]");
    let integral = integrate(mean_fn, t0, t, opts)?;
    Ok(fraction / period * integral.value)
}

/// `Var{x(t)} = 2(F/T)²·∬_{t0<=t1<=t2<=t} R(t1,t2) + (F/T)·∫ m(u) du`.
///
/// The double integral runs over the triangle only; the factor 2 accounts for
/// the symmetric half.
pub fn var_x_general<M, R>(
    t0: f64,
    t: f64,
    mean_fn: M,
    autocov_fn: R,
    period: f64,
    fraction: f64,
    opts: &QuadOptions,
) -> Result<f64>
where
    M: Fn(f64) -> f64,
    R: Fn(f64, f64) -> f64,
{
    let mean = mean_x_general(t0, t, mean_fn, period, fraction, opts)?;
    let cov = integrate_triangle(autocov_fn, t0, t, opts)?;
    let scale = fraction / period;
    Ok(2.0 * scale * scale * cov.value + mean)
}

/// `E{x_i²}` over the window `[iT, (i+1)T]` for arbitrary mean and
/// autocovariance functions.
pub fn second_moment_x_general<M, R>(
    i: u64,
    period: f64,
    fraction: f64,
    mean_fn: M,
    autocov_fn: R,
    opts: &QuadOptions,
) -> Result<f64>
where
    M: Fn(f64) -> f64 + Copy,
    R: Fn(f64, f64) -> f64,
{
    let (t0, t1) = sample_window(i, period);
    let mean = mean_x_general(t0, t1, mean_fn, period, fraction, opts)?;
    let var = var_x_general(t0, t1, mean_fn, autocov_fn, period, fraction, opts)?;
    Ok(var + mean * mean)
}

pub(crate) fn sample_window(i: u64, period: f64) -> (f64, f64) {
    (i as f64 * period, (i + 1) as f64 * period)
}

/// `E{x_i²}` for a stationary signal: `F²σ² + Fμ + F²μ²`, the same for every `i`.
pub fn second_moment_x_sample(_i: u64, period: f64, fraction: f64, sig: &SignalModel) -> Result<f64> {
    check_period_and_fraction(period, fraction)?;
    Ok(moments_from_fraction(fraction, sig).second_moment_x)
}

pub(crate) fn moments_from_fraction(fraction: f64, sig: &SignalModel) -> StationaryMoments {
    let mean_x = fraction * sig.mu_s;
    let var_x = fraction * fraction * sig.sigma_s_sq + fraction * sig.mu_s;
    StationaryMoments {
        mean_x,
        var_x,
        second_moment_x: var_x + mean_x * mean_x,
    }
}

/// Closed-form moments of one sample when `m(t) = μ_s` and `R = σ_s²`.
pub fn stationary_moments(
    period: f64,
    geom: &ReceiverGeometry,
    chan: &ChannelParams,
    sig: &SignalModel,
) -> Result<StationaryMoments> {
    let fraction = capture_fraction(period, geom, chan)?;
    Ok(moments_from_fraction(fraction, sig))
}
