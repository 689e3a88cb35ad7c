//! Discrete 3D random walk towards a perfectly absorbing sphere.

use std::f64::consts::PI;

use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::kernels::{ChannelParams, ReceiverGeometry};
use crate::rng::child_rng;

/// Per-step displacement law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepLaw {
    /// Each axis moves `+δ` or `-δ` with probability ½, independently.
    #[default]
    Lattice,
    /// Each axis moves by a `Normal(0, δ²)` increment.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WalkParams {
    /// Step time `τ`, seconds.
    pub tau: f64,
    /// Step length `δ` per axis, meters.
    pub delta: f64,
    pub law: StepLaw,
}

impl WalkParams {
    /// Step length `δ = √(2Dτ)` matching the medium's diffusion coefficient.
    pub fn derived(tau: f64, chan: &ChannelParams) -> Result<Self> {
        Self::explicit(tau, (2.0 * chan.diffusion() * tau).sqrt())
    }

    pub fn explicit(tau: f64, delta: f64) -> Result<Self> {
        ensure!(tau.is_finite() && tau > 0.0, "step time must be positive, got {tau}");
        ensure!(delta.is_finite() && delta > 0.0, "step length must be positive, got {delta}");
        Ok(Self {
            tau,
            delta,
            law: StepLaw::Lattice,
        })
    }

    pub fn with_law(self, law: StepLaw) -> Self {
        Self { law, ..self }
    }

    /// Diffusion coefficient the walk realizes, `δ²/(2τ)`.
    pub fn effective_diffusion(&self) -> f64 {
        self.delta * self.delta / (2.0 * self.tau)
    }

    /// Whole steps that fit in `period`, and whether `period` had to be
    /// truncated to get there.
    pub fn steps_for(&self, period: f64) -> (u64, bool) {
        let ratio = period / self.tau;
        let steps = (ratio * (1.0 + 1e-12)).floor();
        let truncated = (ratio - steps).abs() > 1e-9 * ratio.max(1.0);
        (steps as u64, truncated)
    }

    /// Logs when the walk is coarse relative to the receiver or inconsistent
    /// with the medium.
    pub fn check_against(&self, geom: &ReceiverGeometry, chan: &ChannelParams) {
        if self.delta > geom.a() / 10.0 {
            log::warn!(
                "step length {:e} m exceeds a/10 = {:e} m; walkers may tunnel through the receiver",
                self.delta,
                geom.a() / 10.0
            );
        }
        let d_walk = self.effective_diffusion();
        if (d_walk / chan.diffusion() - 1.0).abs() > 1e-3 {
            log::warn!(
                "walk diffuses at δ²/2τ = {d_walk:e} m²/s but the medium has D = {:e} m²/s",
                chan.diffusion()
            );
        }
    }
}

/// Shell molecule count placed at the start of a trial and how many of them
/// the receiver absorbed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub s_initial: u64,
    pub x_absorbed: u64,
}

/// Uniformly random point on the sphere of radius `r`.
pub fn random_start<R: Rng + ?Sized>(r: f64, rng: &mut R) -> [f64; 3] {
    let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
    let phi = 2.0 * PI * rng.random::<f64>();
    let rho = (1.0 - z * z).max(0.0).sqrt();
    [r * rho * phi.cos(), r * rho * phi.sin(), r * z]
}

/// Walks one molecule from `start` for at most `max_steps` steps and returns
/// the step at which it first lies within distance `a` of the origin
/// (`Some(0)` if it starts there).
pub fn walk_molecule<R: RngCore + ?Sized>(
    start: [f64; 3],
    a: f64,
    walk: &WalkParams,
    max_steps: u64,
    rng: &mut R,
) -> Option<u64> {
    let a2 = a * a;
    let [mut x, mut y, mut z] = start;
    if x * x + y * y + z * z <= a2 {
        return Some(0);
    }
    let d = walk.delta;
    match walk.law {
        StepLaw::Lattice => {
            let mut bits = 0u64;
            let mut left = 0u32;
            for step in 1..=max_steps {
                if left == 0 {
                    bits = rng.next_u64();
                    left = 21;
                }
                x += if bits & 1 == 0 { d } else { -d };
                y += if bits & 2 == 0 { d } else { -d };
                z += if bits & 4 == 0 { d } else { -d };
                bits >>= 3;
                left -= 1;
                if x * x + y * y + z * z <= a2 {
                    return Some(step);
                }
            }
        }
        StepLaw::Gaussian => {
            for step in 1..=max_steps {
                x += d * rng.sample::<f64, _>(StandardNormal);
                y += d * rng.sample::<f64, _>(StandardNormal);
                z += d * rng.sample::<f64, _>(StandardNormal);
                if x * x + y * y + z * z <= a2 {
                    return Some(step);
                }
            }
        }
    }
    None
}

/// Absorption step of each of `s_count` molecules started on the midpoint
/// sphere, sorted, with unabsorbed molecules omitted.
///
/// Every molecule draws from its own generator seeded from `rng`, so a
/// molecule's path does not depend on `max_steps`.
pub(crate) fn absorption_steps(
    geom: &ReceiverGeometry,
    walk: &WalkParams,
    s_count: u64,
    max_steps: u64,
    rng: &mut ChaCha8Rng,
) -> Vec<u64> {
    let r0 = geom.midpoint();
    let mut hits: Vec<u64> = (0..s_count)
        .filter_map(|_| {
            let mut mol = child_rng(rng);
            let start = random_start(r0, &mut mol);
            walk_molecule(start, geom.a(), walk, max_steps, &mut mol)
        })
        .collect();
    hits.sort_unstable();
    hits
}

/// Places `s_count` molecules at distance `(a+b)/2` and counts how many the
/// receiver absorbs within `⌊T/τ⌋` steps. Absorbed molecules are removed;
/// there is no outer boundary.
pub fn run_trial(
    geom: &ReceiverGeometry,
    chan: &ChannelParams,
    walk: &WalkParams,
    s_count: u64,
    period: f64,
    rng: &mut ChaCha8Rng,
) -> Result<TrialRecord> {
    ensure!(period.is_finite() && period > 0.0, "period must be positive, got {period}");
    let (steps, truncated) = walk.steps_for(period);
    if truncated {
        log::debug!("period {period} s is not a multiple of τ = {} s; using {steps} steps", walk.tau);
    }
    walk.check_against(geom, chan);
    let hits = absorption_steps(geom, walk, s_count, steps, rng);
    Ok(TrialRecord {
        s_initial: s_count,
        x_absorbed: hits.len() as u64,
    })
}
