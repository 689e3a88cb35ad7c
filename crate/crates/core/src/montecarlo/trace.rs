//! 1D random-walk concentration trace at a fixed distance from a point release.

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::Serialize;

use super::walk::{StepLaw, WalkParams};
use crate::error::{ensure, Result};
use crate::exec::Exec;
use crate::kernels::{concentration_1d, ChannelParams};
use crate::rng::stream_rng;

/// Molecules simulated per random stream.
const MOLECULES_PER_STREAM: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    /// Seconds since release.
    pub time: f64,
    /// Molecules in the bin divided by the bin width, molecules/m.
    pub concentration: f64,
    /// Closed-form 1D concentration at the same time and distance.
    pub expected: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSpec {
    /// Molecules released at the origin at `t = 0`.
    pub q: u64,
    /// Observation distance, meters.
    pub r: f64,
    /// Width of the counting bin centred on `r`, meters.
    pub bin_width: f64,
    /// Last time to record, seconds.
    pub t_max: f64,
}

/// Counts, for each step `1..=steps`, how many of `n` walkers
/// sit inside `[lo, hi]`.
fn count_chunk<R: RngCore>(walk: &WalkParams, n: u64, steps: usize, lo: f64, hi: f64, rng: &mut R) -> Vec<u32> {
    let mut counts = vec![0u32; steps];
    match walk.law {
        StepLaw::Lattice => {
            // positions are integer multiples of δ
            let lo_k = (lo / walk.delta).ceil() as i64;
            let hi_k = (hi / walk.delta).floor() as i64;
            for _ in 0..n {
                let mut k: i64 = 0;
                let mut bits = 0u64;
                let mut left = 0u32;
                for c in counts.iter_mut() {
                    if left == 0 {
                        bits = rng.next_u64();
                        left = 64;
                    }
                    k += if bits & 1 == 1 { 1 } else { -1 };
                    bits >>= 1;
                    left -= 1;
                    if (lo_k..=hi_k).contains(&k) {
                        *c += 1;
                    }
                }
            }
        }
        StepLaw::Gaussian => {
            for _ in 0..n {
                let mut x = 0.0;
                for c in counts.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    x += walk.delta * z;
                    if (lo..=hi).contains(&x) {
                        *c += 1;
                    }
                }
            }
        }
    }
    counts
}

/// Releases `spec.q` molecules at the origin of a line, lets each take a
/// `±δ` step every `τ`, and records the binned concentration around `spec.r`
/// after every step up to `spec.t_max`.
pub fn concentration_trace(
    spec: &TraceSpec,
    chan: &ChannelParams,
    walk: &WalkParams,
    seed: u64,
    exec: Exec,
) -> Result<Vec<TracePoint>> {
    ensure!(spec.r.is_finite(), "distance must be finite");
    ensure!(
        spec.bin_width.is_finite() && spec.bin_width > 0.0,
        "bin width must be positive, got {}",
        spec.bin_width
    );
    ensure!(spec.t_max.is_finite() && spec.t_max > 0.0, "trace length must be positive");
    let (steps, _) = walk.steps_for(spec.t_max);
    ensure!(steps >= 1, "trace shorter than one step");
    ensure!(steps <= 100_000_000, "trace of {steps} steps is too long");
    if walk.law == StepLaw::Lattice && spec.bin_width < walk.delta {
        log::warn!("bin width {:e} m is below the step length; bins may be empty", spec.bin_width);
    }
    let d_walk = walk.effective_diffusion();
    if (d_walk / chan.diffusion() - 1.0).abs() > 1e-3 {
        log::warn!(
            "step length {:e} m gives δ²/2τ = {d_walk:e} m²/s, not D = {:e} m²/s; the trace follows the walk",
            walk.delta,
            chan.diffusion()
        );
    }
    let steps = steps as usize;
    let lo = spec.r - 0.5 * spec.bin_width;
    let hi = spec.r + 0.5 * spec.bin_width;

    let n_streams = spec.q.div_ceil(MOLECULES_PER_STREAM);
    let chunks = exec.map_range(n_streams as usize, |i| {
        let first = i as u64 * MOLECULES_PER_STREAM;
        let n = MOLECULES_PER_STREAM.min(spec.q - first);
        count_chunk(walk, n, steps, lo, hi, &mut stream_rng(seed, i as u64))
    });
    let mut totals = vec![0u64; steps];
    for chunk in &chunks {
        for (t, c) in totals.iter_mut().zip(chunk) {
            *t += u64::from(*c);
        }
    }

    totals
        .iter()
        .enumerate()
        .map(|(i, &count)| {
            let time = (i + 1) as f64 * walk.tau;
            Ok(TracePoint {
                time,
                concentration: count as f64 / spec.bin_width,
                expected: concentration_1d(spec.q as f64, spec.r, time, chan)?,
            })
        })
        .collect()
}

/// Mean simulated and expected concentration over `t_lo ≤ t ≤ t_hi`.
pub fn window_means(trace: &[TracePoint], t_lo: f64, t_hi: f64) -> Option<(f64, f64)> {
    let window: Vec<&TracePoint> = trace.iter().filter(|p| p.time >= t_lo && p.time <= t_hi).collect();
    if window.is_empty() {
        return None;
    }
    let n = window.len() as f64;
    Some((
        window.iter().map(|p| p.concentration).sum::<f64>() / n,
        window.iter().map(|p| p.expected).sum::<f64>() / n,
    ))
}
