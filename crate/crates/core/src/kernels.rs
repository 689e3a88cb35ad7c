//! Capture and concentration formulas shared by the analytic model and the
//! simulator.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{ensure, Result};
use crate::special::erfc_unchecked;

/// Properties of the diffusion medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelParams {
    diffusion: f64,
}

impl ChannelParams {
    /// `diffusion` is the diffusion coefficient in m²/s.
    pub fn new(diffusion: f64) -> Result<Self> {
        ensure!(
            diffusion.is_finite() && diffusion > 0.0,
            "diffusion coefficient must be positive and finite, got {diffusion}"
        );
        Ok(Self { diffusion })
    }

    pub fn diffusion(&self) -> f64 {
        self.diffusion
    }
}

/// Receiver sphere of radius `a` centred in a reception sphere of radius `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReceiverGeometry {
    a: f64,
    b: f64,
}

impl ReceiverGeometry {
    /// Radii in meters; requires `0 < a < b`.
    pub fn new(a: f64, b: f64) -> Result<Self> {
        ensure!(a.is_finite() && a > 0.0, "receiver radius must be positive, got {a}");
        ensure!(b.is_finite() && b > a, "reception radius {b} must exceed receiver radius {a}");
        Ok(Self { a, b })
    }

    /// Receiver radius.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Reception-volume radius.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Receiver volume `V_N`.
    pub fn receiver_volume(&self) -> f64 {
        sphere_volume(self.a)
    }

    /// Reception volume `V_R`, receiver included.
    pub fn reception_volume(&self) -> f64 {
        sphere_volume(self.b)
    }

    /// Volume of the shell between the two spheres, `V_R - V_N`.
    pub fn shell_volume(&self) -> f64 {
        sphere_volume(self.b) - sphere_volume(self.a)
    }

    /// Mean starting distance of shell molecules from the centre, `(a + b) / 2`.
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }
}

fn sphere_volume(r: f64) -> f64 {
    4.0 / 3.0 * PI * r * r * r
}

/// Probability that a molecule released at distance `y` from the receiver
/// centre has hit the receiver by time `t`: `(a/y)·erfc((y-a)/√(4Dt))`.
///
/// At `t = 0` this returns the limit: 1 on the surface, 0 elsewhere.
pub fn hitting_probability(
    y: f64,
    t: f64,
    geom: &ReceiverGeometry,
    chan: &ChannelParams,
) -> Result<f64> {
    ensure!(y.is_finite() && y >= geom.a, "distance {y} lies inside the receiver (a = {})", geom.a);
    ensure!(t.is_finite() && t >= 0.0, "time must be nonnegative, got {t}");
    Ok(hitting_probability_unchecked(y, t, geom.a, chan.diffusion))
}

pub(crate) fn hitting_probability_unchecked(y: f64, t: f64, a: f64, d: f64) -> f64 {
    if y == a {
        return 1.0;
    }
    if t == 0.0 {
        return 0.0;
    }
    a / y * erfc_unchecked((y - a) / (4.0 * d * t).sqrt())
}

/// Fraction of shell molecules captured during one sampling period `T`,
/// i.e. the hitting probability from the shell midpoint.
pub fn capture_fraction(period: f64, geom: &ReceiverGeometry, chan: &ChannelParams) -> Result<f64> {
    ensure!(period.is_finite() && period > 0.0, "sampling period must be positive, got {period}");
    Ok(hitting_probability_unchecked(geom.midpoint(), period, geom.a, chan.diffusion))
}

/// Linear concentration (molecules/m) at distance `r` and time `t` after an
/// instantaneous release of `q` molecules at the origin of a 1D medium.
pub fn concentration_1d(q: f64, r: f64, t: f64, chan: &ChannelParams) -> Result<f64> {
    ensure!(q.is_finite() && q >= 0.0, "molecule count must be nonnegative, got {q}");
    ensure!(r.is_finite(), "distance must be finite");
    ensure!(t.is_finite() && t > 0.0, "time must be positive, got {t}");
    let four_dt = 4.0 * chan.diffusion * t;
    Ok(q / (PI * four_dt).sqrt() * (-r * r / four_dt).exp())
}

/// Time at which [`concentration_1d`] peaks for a fixed distance: `r²/(2D)`.
pub fn concentration_peak_time(r: f64, chan: &ChannelParams) -> f64 {
    r * r / (2.0 * chan.diffusion)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::UM;
    use proptest::prelude::*;

    fn nominal() -> (ReceiverGeometry, ChannelParams) {
        (
            ReceiverGeometry::new(1.0 * UM, 2.0 * UM).unwrap(),
            ChannelParams::new(1e-12).unwrap(),
        )
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ChannelParams::new(0.0).is_err());
        assert!(ChannelParams::new(f64::NAN).is_err());
        assert!(ReceiverGeometry::new(2.0 * UM, 1.0 * UM).is_err());
        assert!(ReceiverGeometry::new(1.0 * UM, 1.0 * UM).is_err());
        assert!(ReceiverGeometry::new(0.0, 1.0 * UM).is_err());
        let (g, c) = nominal();
        assert!(hitting_probability(0.5 * UM, 0.1, &g, &c).is_err());
        assert!(hitting_probability(1.5 * UM, -0.1, &g, &c).is_err());
        assert!(capture_fraction(0.0, &g, &c).is_err());
        assert!(concentration_1d(1.0, 0.0, 0.0, &c).is_err());
    }

    #[test]
    fn volumes() {
        let (g, _) = nominal();
        let vn = 4.0 / 3.0 * PI * 1e-18;
        assert!((g.receiver_volume() / vn - 1.0).abs() < 1e-15);
        assert!((g.shell_volume() / (7.0 * vn) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn hitting_limits() {
        let (g, c) = nominal();
        assert_eq!(hitting_probability(1.0 * UM, 0.3, &g, &c).unwrap(), 1.0);
        assert_eq!(hitting_probability(1.0 * UM, 0.0, &g, &c).unwrap(), 1.0);
        assert_eq!(hitting_probability(1.5 * UM, 0.0, &g, &c).unwrap(), 0.0);
        assert!(hitting_probability(1.5 * UM, 1e-9, &g, &c).unwrap() < 1e-300);
    }

    #[test]
    fn hitting_reference_value() {
        // (2/3)·erfc(0.5/√0.4), 40-digit evaluation
        let (g, c) = nominal();
        let p = hitting_probability(1.5 * UM, 0.1, &g, &c).unwrap();
        assert!((p / 0.1757016515219818202491839642982509855661 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn capture_fraction_is_midpoint_hit() {
        let (g, c) = nominal();
        assert_eq!(
            capture_fraction(0.1, &g, &c).unwrap(),
            hitting_probability(1.5 * UM, 0.1, &g, &c).unwrap()
        );
        let upper = capture_fraction(0.25, &g, &c).unwrap();
        assert!((upper / 0.319666748124635641544835564072023647509 - 1.0).abs() < 1e-14);
        assert!(capture_fraction(0.05, &g, &c).unwrap() <= capture_fraction(0.1, &g, &c).unwrap());
    }

    #[test]
    fn concentration_peak() {
        let c = ChannelParams::new(1e-11).unwrap();
        let r = 10.0 * UM;
        let peak = concentration_peak_time(r, &c);
        assert!((peak - 5.0).abs() < 1e-12);
        let at = |t: f64| concentration_1d(1e4, r, t, &c).unwrap();
        assert!(at(peak) > at(peak - 1e-3));
        assert!(at(peak) > at(peak + 1e-3));
        assert_eq!(concentration_1d(0.0, r, 1.0, &c).unwrap(), 0.0);
    }

    #[test]
    fn concentration_conserves_molecules() {
        // trapezoid over ±12 standard deviations
        let c = ChannelParams::new(1e-11).unwrap();
        let t = 2.0;
        let sd = (2.0 * c.diffusion() * t).sqrt();
        let n = 20_000;
        let h = 24.0 * sd / n as f64;
        let total: f64 = (0..=n)
            .map(|i| {
                let r = -12.0 * sd + i as f64 * h;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * concentration_1d(1e4, r, t, &c).unwrap()
            })
            .sum::<f64>()
            * h;
        assert!((total / 1e4 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn hitting_nondecreasing_in_time_on_grid() {
        let (g, c) = nominal();
        for &y in &[1.0, 1.2, 1.5, 3.0, 10.0, 100.0] {
            let mut prev = 0.0;
            for k in 1..=400 {
                let t = 1e-4 * 1.03f64.powi(k);
                let p = hitting_probability(y * UM, t, &g, &c).unwrap();
                assert!(p >= prev, "decrease at y={y} t={t}");
                prev = p;
            }
        }
    }

    proptest! {
        #[test]
        fn hitting_bounded_and_monotone(
            ratio in 1.0f64..100.0,
            t in 1e-6f64..1e3,
            log_d in -13.0f64..-9.0,
        ) {
            let (g, _) = nominal();
            let c = ChannelParams::new(10f64.powf(log_d)).unwrap();
            let y = ratio * g.a();
            let p = hitting_probability(y, t, &g, &c).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
            // forward differences in t and y
            let later = hitting_probability(y, t * (1.0 + 1e-6), &g, &c).unwrap();
            prop_assert!(later >= p);
            let farther = hitting_probability(y * (1.0 + 1e-6), t, &g, &c).unwrap();
            prop_assert!(farther <= p);
        }
    }
}
