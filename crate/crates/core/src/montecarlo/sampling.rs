//! Direct sampling of the shell count and the doubly stochastic absorbed count.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::Serialize;

use crate::dspp::SignalModel;
use crate::error::{ensure, Result};
use crate::exec::Exec;
use crate::kernels::{capture_fraction, ChannelParams, ReceiverGeometry};
use crate::rng::stream_rng;

/// Draws per random stream in [`distribution_pair`].
const CHUNK: usize = 8192;

/// Draws used by the distribution experiment unless told otherwise.
pub const DEFAULT_DRAWS: usize = 1_000_000;

/// Gaussian shell count rounded to the nearest integer; the flag reports
/// whether a negative draw was clamped to zero.
pub(crate) fn draw_signal<R: Rng + ?Sized>(sig: &SignalModel, rng: &mut R) -> (u64, bool) {
    let noise: f64 = rng.sample(StandardNormal);
    let value = (sig.mu_s() + sig.sigma_s() * noise).round();
    if value < 0.0 {
        (0, true)
    } else {
        (value as u64, false)
    }
}

/// One draw of the shell count from `Normal(μ_s, σ_s²)`, rounded and clamped at zero.
pub fn sample_signal<R: Rng + ?Sized>(sig: &SignalModel, rng: &mut R) -> u64 {
    draw_signal(sig, rng).0
}

/// Poisson-distributed absorbed count with rate `F·s_i`.
pub fn sample_reconstruction<R: Rng + ?Sized>(s_i: u64, fraction: f64, rng: &mut R) -> Result<u64> {
    ensure!(
        (0.0..=1.0).contains(&fraction),
        "capture fraction must lie in [0, 1], got {fraction}"
    );
    let rate = fraction * s_i as f64;
    if rate == 0.0 {
        return Ok(0);
    }
    let poisson = Poisson::new(rate).map_err(|e| crate::Error::Domain(format!("Poisson rate {rate}: {e}")))?;
    Ok(poisson.sample(rng) as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Binning {
    pub bins: usize,
    /// Common range for both histograms; spans all samples when unset.
    pub range: Option<(f64, f64)>,
}

impl Default for Binning {
    fn default() -> Self {
        Self { bins: 60, range: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    /// Samples outside `[lo, hi]`.
    pub outside: u64,
}

impl Histogram {
    fn build(samples: impl Iterator<Item = f64>, lo: f64, hi: f64, bins: usize) -> Self {
        let mut counts = vec![0u64; bins];
        let mut outside = 0;
        let width = (hi - lo) / bins as f64;
        for v in samples {
            if v < lo || v > hi {
                outside += 1;
                continue;
            }
            let k = if width > 0.0 { (((v - lo) / width) as usize).min(bins - 1) } else { 0 };
            counts[k] += 1;
        }
        Self { lo, hi, counts, outside }
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn bin_center(&self, k: usize) -> f64 {
        self.lo + (k as f64 + 0.5) * self.bin_width()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleSummary {
    pub mean: f64,
    pub variance: f64,
}

impl SampleSummary {
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let variance = if values.len() > 1 {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self { mean, variance }
    }
}

/// Shell and receiver concentration samples with their histograms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionPair {
    pub fraction: f64,
    pub n_draws: usize,
    pub shell: Histogram,
    pub receiver: Histogram,
    /// Moments of `s_i/(V_R - V_N)`.
    pub shell_summary: SampleSummary,
    /// Moments of `x_i/V_N`.
    pub receiver_summary: SampleSummary,
    /// Moments of the raw counts `s_i` and `x_i`.
    pub shell_counts: SampleSummary,
    pub receiver_counts: SampleSummary,
    pub clamped: u64,
}

impl DistributionPair {
    /// `|mean_s - mean_x| / mean_s` on the concentration scale.
    pub fn normalized_mean_gap(&self) -> f64 {
        (self.shell_summary.mean - self.receiver_summary.mean).abs() / self.shell_summary.mean
    }
}

/// `n_draws` composed draws: `s_i` from the signal model, then `x_i` Poisson
/// with rate `F(T)·s_i`.
#[allow(clippy::too_many_arguments)]
pub fn distribution_pair(
    geom: &ReceiverGeometry,
    chan: &ChannelParams,
    sig: &SignalModel,
    period: f64,
    n_draws: usize,
    seed: u64,
    binning: &Binning,
    exec: Exec,
) -> Result<DistributionPair> {
    let fraction = capture_fraction(period, geom, chan)?;
    distribution_pair_with_fraction(geom, sig, fraction, n_draws, seed, binning, exec)
}

/// [`distribution_pair`] with the capture fraction given directly.
pub fn distribution_pair_with_fraction(
    geom: &ReceiverGeometry,
    sig: &SignalModel,
    fraction: f64,
    n_draws: usize,
    seed: u64,
    binning: &Binning,
    exec: Exec,
) -> Result<DistributionPair> {
    ensure!(n_draws >= 1, "need at least one draw");
    ensure!(binning.bins >= 1, "need at least one histogram bin");
    ensure!(
        (0.0..=1.0).contains(&fraction),
        "capture fraction must lie in [0, 1], got {fraction}"
    );
    let chunks = n_draws.div_ceil(CHUNK);
    let drawn: Vec<Vec<(u64, u64, bool)>> = exec.map_range(chunks, |c| {
        let mut rng = stream_rng(seed, c as u64);
        let len = CHUNK.min(n_draws - c * CHUNK);
        (0..len)
            .map(|_| {
                let (s, clamped) = draw_signal(sig, &mut rng);
                let x = sample_reconstruction(s, fraction, &mut rng).expect("fraction checked");
                (s, x, clamped)
            })
            .collect()
    });

    let vs = geom.shell_volume();
    let vn = geom.receiver_volume();
    let draws = drawn.iter().flatten();
    let s_counts: Vec<f64> = draws.clone().map(|d| d.0 as f64).collect();
    let x_counts: Vec<f64> = draws.clone().map(|d| d.1 as f64).collect();
    let clamped = draws.filter(|d| d.2).count() as u64;
    if clamped > 0 {
        log::info!("{clamped} of {n_draws} signal draws clamped at zero");
    }
    let s_conc: Vec<f64> = s_counts.iter().map(|s| s / vs).collect();
    let x_conc: Vec<f64> = x_counts.iter().map(|x| x / vn).collect();

    let (lo, hi) = binning.range.unwrap_or_else(|| {
        s_conc
            .iter()
            .chain(&x_conc)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
    });
    Ok(DistributionPair {
        fraction,
        n_draws,
        shell: Histogram::build(s_conc.iter().copied(), lo, hi, binning.bins),
        receiver: Histogram::build(x_conc.iter().copied(), lo, hi, binning.bins),
        shell_summary: SampleSummary::of(&s_conc),
        receiver_summary: SampleSummary::of(&x_conc),
        shell_counts: SampleSummary::of(&s_counts),
        receiver_counts: SampleSummary::of(&x_counts),
        clamped,
    })
}
