//! Mean-square error between the shell concentration `s/(V_R - V_N)` and the
//! reconstructed concentration `x/V_N`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::dspp::{mean_x_general, sample_window, var_x_general, SignalModel};
use crate::error::{ensure, Result};
use crate::kernels::{capture_fraction, ChannelParams, ReceiverGeometry};
use crate::quadrature::QuadOptions;
use crate::special::erfc_unchecked;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistortionInputs {
    pub geom: ReceiverGeometry,
    pub chan: ChannelParams,
    pub sig: SignalModel,
    /// Sampling period `T` in seconds.
    pub period: f64,
}

impl DistortionInputs {
    pub fn new(geom: ReceiverGeometry, chan: ChannelParams, sig: SignalModel, period: f64) -> Result<Self> {
        ensure!(period.is_finite() && period > 0.0, "sampling period must be positive, got {period}");
        Ok(Self {
            geom,
            chan,
            sig,
            period,
        })
    }

    pub fn with_period(&self, period: f64) -> Result<Self> {
        Self::new(self.geom, self.chan, self.sig, period)
    }

    pub fn capture_fraction(&self) -> Result<f64> {
        capture_fraction(self.period, &self.geom, &self.chan)
    }
}

/// Distortion in (molecules/m³)², split into its three additive terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistortionValue {
    pub value: f64,
    /// `E{s²}/(V_R - V_N)²`
    pub shell_term: f64,
    /// `-2E{s x}/(V_N (V_R - V_N))`
    pub cross_term: f64,
    /// `E{x²}/V_N²`
    pub receiver_term: f64,
}

impl DistortionValue {
    fn from_terms(shell_term: f64, cross_term: f64, receiver_term: f64) -> Self {
        Self {
            value: shell_term + cross_term + receiver_term,
            shell_term,
            cross_term,
            receiver_term,
        }
    }

    /// Sum of term magnitudes; bounds the rounding error of `value`.
    pub fn magnitude(&self) -> f64 {
        self.shell_term.abs() + self.cross_term.abs() + self.receiver_term.abs()
    }
}

/// Stationary distortion for a given capture fraction `F`.
///
/// `E{s x} = ρσ_sσ_x + E{s}E{x}` with `σ_x² = F(Fσ_s² + μ_s)` and `E{x} = Fμ_s`.
pub fn mse_for_fraction(fraction: f64, geom: &ReceiverGeometry, sig: &SignalModel) -> DistortionValue {
    let (mu, s2) = (sig.mu_s(), sig.sigma_s_sq());
    let vn = geom.receiver_volume();
    let vs = geom.shell_volume();
    let sigma_x = (fraction * (fraction * s2 + mu)).sqrt();
    let shell = (s2 + mu * mu) / (vs * vs);
    let cross = -(2.0 * sig.rho_sx() * sig.sigma_s() * sigma_x + 2.0 * fraction * mu * mu) / (vn * vs);
    let receiver = fraction * (fraction * s2 + mu + fraction * mu * mu) / (vn * vn);
    DistortionValue::from_terms(shell, cross, receiver)
}

/// Closed-form distortion for a stationary signal (`m = μ_s`, `R = σ_s²`).
pub fn mse_stationary(inp: &DistortionInputs) -> Result<DistortionValue> {
    let fraction = inp.capture_fraction()?;
    Ok(mse_for_fraction(fraction, &inp.geom, &inp.sig))
}

/// Distortion of sample `i` for arbitrary mean `m(t)` and autocovariance
/// `R(t1, t2)` of the shell count, with the count moments taken over
/// `[iT, (i+1)T]` by quadrature.
pub fn mse_general<M, R>(
    i: u64,
    inp: &DistortionInputs,
    mean_fn: M,
    autocov_fn: R,
    opts: &QuadOptions,
) -> Result<DistortionValue>
where
    M: Fn(f64) -> f64 + Copy,
    R: Fn(f64, f64) -> f64,
{
    let fraction = inp.capture_fraction()?;
    mse_general_parts(
        i,
        &inp.geom,
        inp.period,
        fraction,
        (inp.sig.mu_s(), inp.sig.sigma_s_sq(), inp.sig.rho_sx()),
        mean_fn,
        autocov_fn,
        opts,
    )
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn mse_general_parts<M, R>(
    i: u64,
    geom: &ReceiverGeometry,
    period: f64,
    fraction: f64,
    (mu_s, sigma_s_sq, rho): (f64, f64, f64),
    mean_fn: M,
    autocov_fn: R,
    opts: &QuadOptions,
) -> Result<DistortionValue>
where
    M: Fn(f64) -> f64 + Copy,
    R: Fn(f64, f64) -> f64,
{
    let (t0, t1) = sample_window(i, period);
    let mean_x = mean_x_general(t0, t1, mean_fn, period, fraction, opts)?;
    let var_x = var_x_general(t0, t1, mean_fn, autocov_fn, period, fraction, opts)?.max(0.0);
    let vn = geom.receiver_volume();
    let vs = geom.shell_volume();
    let shell = (sigma_s_sq + mu_s * mu_s) / (vs * vs);
    let cross = -2.0 * (mu_s * mean_x + rho * sigma_s_sq.sqrt() * var_x.sqrt()) / (vs * vn);
    let receiver = (var_x + mean_x * mean_x) / (vn * vn);
    Ok(DistortionValue::from_terms(shell, cross, receiver))
}

/// The published closed-form `∂ℰ/∂T`, evaluated term for term with
/// `z = (b - a)/(4√(DT))`.
///
/// Kept for comparison only; the optimizer differentiates [`mse_stationary`]
/// numerically instead.
pub fn dmse_dt_published(inp: &DistortionInputs) -> Result<f64> {
    let (a, b) = (inp.geom.a(), inp.geom.b());
    let d = inp.chan.diffusion();
    let (mu, s2) = (inp.sig.mu_s(), inp.sig.sigma_s_sq());
    let sigma = inp.sig.sigma_s();
    let rho = inp.sig.rho_sx();
    let dt = d * inp.period;
    let z = (b - a) / (4.0 * dt.sqrt());
    let ez = (-z * z).exp();
    let erfc_z = erfc_unchecked(z);
    let pi52 = PI.powf(2.5);
    let dt32 = dt.powf(1.5);
    let cube_gap = b * b * b - a * a * a;

    let first = -9.0 * (b - a) * d * mu * mu * ez / (16.0 * a * a * (a + b) * cube_gap * pi52 * dt32);
    let second = (9.0 * (b * b - a * a) * d * mu * ez
        + 36.0 * a * (b - a) * d * mu * mu * ez * erfc_z
        + 36.0 * a * (b - a) * d * s2 * ez * erfc_z)
        / (32.0 * (a + b).powi(2) * a.powi(5) * pi52 * dt32);
    let root = (2.0 * a * mu * (a + b) * erfc_z + 4.0 * a * a * s2 * erfc_z * erfc_z).sqrt();
    let third = -(18.0 * rho * sigma.powi(3) * a * (b - a) * d * ez * erfc_z
        + 9.0 * (b * b - a * a) * d * mu * ez
        + 18.0 * a * (b - a) * s2 * d * erfc_z)
        / (32.0 * a * a * pi52 * (a + b) * cube_gap * dt32 * root);
    Ok(first + second + third)
}

/// Default central-difference step: `max(1 µs, 1e-6·T)`.
pub fn default_fd_step(period: f64) -> f64 {
    (1e-6f64).max(1e-6 * period)
}

/// Central difference `(f(x+h) - f(x-h)) / 2h`.
pub fn central_difference<F: Fn(f64) -> Result<f64>>(f: F, x: f64, h: f64) -> Result<f64> {
    ensure!(h > 0.0, "difference step must be positive, got {h}");
    Ok((f(x + h)? - f(x - h)?) / (2.0 * h))
}

/// `∂ℰ/∂T` by central differences of [`mse_stationary`]; `h` defaults to
/// [`default_fd_step`].
pub fn dmse_dt_fd(inp: &DistortionInputs, h: Option<f64>) -> Result<f64> {
    let h = h.unwrap_or_else(|| default_fd_step(inp.period));
    ensure!(
        inp.period - h > 0.0,
        "difference step {h} reaches past T = 0 (T = {})",
        inp.period
    );
    central_difference(|t| Ok(mse_stationary(&inp.with_period(t)?)?.value), inp.period, h)
}

/// Bound on the rounding noise of [`dmse_dt_fd`]: slopes smaller than this
/// carry no sign information.
pub fn dmse_dt_fd_noise(inp: &DistortionInputs, h: Option<f64>) -> Result<f64> {
    let h = h.unwrap_or_else(|| default_fd_step(inp.period));
    let scale = mse_stationary(&inp.with_period(inp.period + h)?)?
        .magnitude()
        .max(mse_stationary(&inp.with_period((inp.period - h).max(f64::MIN_POSITIVE))?)?.magnitude());
    Ok(8.0 * f64::EPSILON * scale / h)
}
