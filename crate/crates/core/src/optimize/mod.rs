//! Receiver design by minimizing the stationary distortion over one variable
//! at a time: sampling period, receiver radius or sampling frequency.
//!
//! Every search starts with a coarse scan of the bracket. If the scan shows
//! more than one local minimum the search stops with [`Error::Ambiguous`];
//! otherwise a Brent search refines the single basin it found.

pub mod brent;
mod sweep;

use serde::Serialize;

pub use sweep::{surface, sweep, RadiusRule, SurfaceRow, SweepRow, SweepSpec, SweepVariable};

use crate::distortion::{mse_stationary, DistortionInputs, DistortionValue};
use crate::dspp::SignalModel;
use crate::error::{ensure, Error, Result};
use crate::kernels::{ChannelParams, ReceiverGeometry};
use brent::{brent_minimize, BrentOptions};

/// Default sampling-period bracket in seconds.
pub const PERIOD_BRACKET: (f64, f64) = (1e-4, 0.25);
/// Default receiver-radius bracket in meters.
pub const RADIUS_BRACKET: (f64, f64) = (0.5e-6, 2.0e-6);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Width of the final bracket, in the units of the searched variable.
    pub x_tol: f64,
    pub prescan_points: usize,
    pub max_iter: usize,
}

impl SolverOptions {
    /// Tolerance suited to sampling periods (seconds).
    pub fn period() -> Self {
        Self {
            x_tol: 1e-7,
            prescan_points: 64,
            max_iter: 500,
        }
    }

    /// Tolerance suited to radii (meters).
    pub fn radius() -> Self {
        Self {
            x_tol: 1e-11,
            ..Self::period()
        }
    }
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self::period()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimumResult {
    pub argmin: f64,
    pub min_distortion: f64,
    /// Search interval supplied by the caller.
    pub bracket: (f64, f64),
    /// Width of the final bracket around `argmin`.
    pub tolerance: f64,
    pub evaluations: usize,
}

/// Local minima seen by an evenly spaced scan of `values`, with ties at
/// rounding level ignored. Returns the index ranges `(left, right)` that
/// bracket each basin.
fn scan_basins(values: &[DistortionValue]) -> Option<Vec<(usize, usize)>> {
    let n = values.len();
    let mut steps = Vec::new();
    for k in 0..n - 1 {
        let diff = values[k + 1].value - values[k].value;
        let noise = 16.0 * f64::EPSILON * values[k].magnitude().max(values[k + 1].magnitude());
        if diff.abs() > noise {
            steps.push((k, diff.signum()));
        }
    }
    if steps.is_empty() {
        return None;
    }

    let mut basins = Vec::new();
    // Minimum at the left end when the first strict move is upward.
    if steps[0].1 > 0.0 {
        basins.push((0, steps[0].0 + 1));
    }
    for pair in steps.windows(2) {
        let ((k0, s0), (k1, s1)) = (pair[0], pair[1]);
        if s0 < 0.0 && s1 > 0.0 {
            basins.push((k0, k1 + 1));
        }
    }
    let &(k_last, s_last) = steps.last().expect("nonempty");
    if s_last < 0.0 {
        basins.push((k_last, n - 1));
    }
    Some(basins)
}

/// Minimizes `objective` over `bracket`, which must hold a single basin.
pub fn minimize_unimodal<F>(objective: F, bracket: (f64, f64), opts: &SolverOptions) -> Result<OptimumResult>
where
    F: Fn(f64) -> Result<DistortionValue>,
{
    let (lo, hi) = bracket;
    ensure!(lo.is_finite() && hi.is_finite() && lo <= hi, "invalid bracket [{lo}, {hi}]");
    if lo == hi {
        let v = objective(lo)?;
        return Ok(OptimumResult {
            argmin: lo,
            min_distortion: v.value,
            bracket,
            tolerance: 0.0,
            evaluations: 1,
        });
    }
    ensure!(opts.prescan_points >= 3, "pre-scan needs at least 3 points");

    let n = opts.prescan_points;
    let grid: Vec<f64> = (0..n)
        .map(|k| if k == n - 1 { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
        .collect();
    let values = grid.iter().map(|&x| objective(x)).collect::<Result<Vec<_>>>()?;

    let max_abs = values.iter().map(|v| v.value.abs()).fold(0.0, f64::max);
    let (vmin, vmax) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v.value), b.max(v.value)));
    let basins = match scan_basins(&values) {
        Some(b) if vmax - vmin >= 1e-15 * max_abs => b,
        _ => {
            return Err(Error::Degenerate {
                lo,
                hi,
                range: if max_abs > 0.0 { (vmax - vmin) / max_abs } else { 0.0 },
            })
        }
    };
    if basins.len() > 1 {
        let candidates = basins
            .iter()
            .map(|&(l, r)| {
                (l..=r)
                    .min_by(|&i, &j| values[i].value.total_cmp(&values[j].value))
                    .map(|i| grid[i])
                    .expect("nonempty basin")
            })
            .collect();
        return Err(Error::Ambiguous { candidates });
    }

    let (left, right) = basins[0];
    let brent_opts = BrentOptions {
        x_tol: opts.x_tol,
        max_iter: opts.max_iter,
    };
    let found = brent_minimize(|x| Ok(objective(x)?.value), grid[left], grid[right], &brent_opts)?;
    // the scan point may still win when the basin is flat at rounding level
    let best_scan = (left..=right)
        .min_by(|&i, &j| values[i].value.total_cmp(&values[j].value))
        .expect("nonempty basin");
    let (argmin, min_distortion) = if values[best_scan].value < found.fx {
        (grid[best_scan], values[best_scan].value)
    } else {
        (found.x, found.fx)
    };
    Ok(OptimumResult {
        argmin,
        min_distortion,
        bracket,
        tolerance: found.hi - found.lo,
        evaluations: n + found.evaluations,
    })
}

/// Sampling period minimizing the stationary distortion.
pub fn t_opt(template: &DistortionInputs, bracket: (f64, f64), opts: &SolverOptions) -> Result<OptimumResult> {
    ensure!(bracket.0 > 0.0, "period bracket must be positive, got {bracket:?}");
    minimize_unimodal(|t| mse_stationary(&template.with_period(t)?), bracket, opts)
}

/// Receiver radius minimizing the distortion at a fixed period, with the
/// reception radius tied to the receiver radius by `rule`.
pub fn a_opt(
    sig: &SignalModel,
    chan: &ChannelParams,
    period: f64,
    a_bracket: (f64, f64),
    rule: RadiusRule,
    opts: &SolverOptions,
) -> Result<OptimumResult> {
    ensure!(a_bracket.0 > 0.0, "radius bracket must be positive, got {a_bracket:?}");
    minimize_unimodal(
        |a| {
            let geom = ReceiverGeometry::new(a, rule.outer_radius(a))?;
            mse_stationary(&DistortionInputs::new(geom, *chan, *sig, period)?)
        },
        a_bracket,
        opts,
    )
}

/// Sampling frequency minimizing the distortion; `f_bracket` is in Hz.
///
/// Solved as [`t_opt`] over `(1/f_hi, 1/f_lo)`, so the result is exactly the
/// reciprocal of the optimal period.
pub fn f_opt(template: &DistortionInputs, f_bracket: (f64, f64), opts: &SolverOptions) -> Result<OptimumResult> {
    let (f_lo, f_hi) = f_bracket;
    ensure!(f_lo > 0.0 && f_lo <= f_hi, "invalid frequency bracket {f_bracket:?}");
    let period = t_opt(template, (1.0 / f_hi, 1.0 / f_lo), opts)?;
    Ok(OptimumResult {
        argmin: 1.0 / period.argmin,
        min_distortion: period.min_distortion,
        bracket: f_bracket,
        tolerance: period.tolerance / (period.argmin * period.argmin),
        evaluations: period.evaluations,
    })
}

/// Range of sampling periods whose distortion stays at or below
/// `max_distortion`, found by bisection on each side of the optimum.
///
/// An end of `bracket` is returned when the constraint still holds there.
pub fn admissible_periods(
    template: &DistortionInputs,
    bracket: (f64, f64),
    max_distortion: f64,
    opts: &SolverOptions,
) -> Result<(f64, f64)> {
    let best = t_opt(template, bracket, opts)?;
    ensure!(
        best.min_distortion <= max_distortion,
        "distortion bound {max_distortion:e} is below the minimum {:e}",
        best.min_distortion
    );
    let excess = |t: f64| -> Result<f64> { Ok(mse_stationary(&template.with_period(t)?)?.value - max_distortion) };
    let edge = |inside: f64, outside: f64| -> Result<f64> {
        if excess(outside)? <= 0.0 {
            return Ok(outside);
        }
        let (mut good, mut bad) = (inside, outside);
        while (bad - good).abs() > opts.x_tol {
            let mid = 0.5 * (good + bad);
            if excess(mid)? <= 0.0 {
                good = mid;
            } else {
                bad = mid;
            }
        }
        Ok(good)
    };
    Ok((edge(best.argmin, bracket.0)?, edge(best.argmin, bracket.1)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distortion::dmse_dt_fd;
    use crate::UM;

    fn template(b_um: f64) -> DistortionInputs {
        DistortionInputs::new(
            ReceiverGeometry::new(1.0 * UM, b_um * UM).unwrap(),
            ChannelParams::new(1e-12).unwrap(),
            SignalModel::new(100.0, 100.0, 0.75).unwrap(),
            0.1,
        )
        .unwrap()
    }

    fn grid_argmin(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
        (0..n)
            .map(|k| lo + (hi - lo) * (k as f64 + 1.0) / n as f64)
            .min_by(|x, y| f(*x).total_cmp(&f(*y)))
            .unwrap()
    }

    #[test]
    fn t_opt_agrees_with_dense_scan() {
        for b in [2.0, 2.5, 3.0] {
            let tpl = template(b);
            let r = t_opt(&tpl, PERIOD_BRACKET, &SolverOptions::period()).unwrap();
            let scan = grid_argmin(|t| mse_stationary(&tpl.with_period(t).unwrap()).unwrap().value, 0.0, 0.25, 10_000);
            assert!((r.argmin - scan).abs() <= 1e-4, "b = {b}: {} vs {scan}", r.argmin);
            assert!(r.tolerance <= 1e-5);
            let lo = mse_stationary(&tpl.with_period(PERIOD_BRACKET.0).unwrap()).unwrap().value;
            let hi = mse_stationary(&tpl.with_period(PERIOD_BRACKET.1).unwrap()).unwrap().value;
            assert!(r.min_distortion <= lo && r.min_distortion <= hi);
            let slope = dmse_dt_fd(&tpl.with_period(r.argmin).unwrap(), None).unwrap();
            let h = 1e-4;
            let curvature = (mse_stationary(&tpl.with_period(r.argmin + h).unwrap()).unwrap().value
                - 2.0 * r.min_distortion
                + mse_stationary(&tpl.with_period(r.argmin - h).unwrap()).unwrap().value)
                / (h * h);
            assert!(curvature > 0.0);
            assert!((slope / curvature).abs() <= SolverOptions::period().x_tol, "b = {b}");
        }
    }

    #[test]
    fn shrinking_bracket_keeps_argmin() {
        let tpl = template(2.0);
        let opts = SolverOptions::period();
        let wide = t_opt(&tpl, PERIOD_BRACKET, &opts).unwrap();
        let narrow = t_opt(&tpl, (wide.argmin - 0.01, wide.argmin + 0.01), &opts).unwrap();
        assert!((wide.argmin - narrow.argmin).abs() <= opts.x_tol);
    }

    #[test]
    fn optimum_beats_every_constant_period() {
        let tpl = template(2.0);
        let best = t_opt(&tpl, PERIOD_BRACKET, &SolverOptions::period()).unwrap();
        for k in 1..=250 {
            let t = k as f64 * 1e-3;
            assert!(best.min_distortion <= mse_stationary(&tpl.with_period(t).unwrap()).unwrap().value);
        }
    }

    #[test]
    fn deterministic() {
        let tpl = template(2.5);
        let a = t_opt(&tpl, PERIOD_BRACKET, &SolverOptions::period()).unwrap();
        let b = t_opt(&tpl, PERIOD_BRACKET, &SolverOptions::period()).unwrap();
        assert_eq!(a.argmin.to_bits(), b.argmin.to_bits());
        assert_eq!(a.evaluations, b.evaluations);
    }

    #[test]
    fn frequency_is_reciprocal() {
        let tpl = template(2.0);
        let opts = SolverOptions::period();
        let f = f_opt(&tpl, (4.0, 100.0), &opts).unwrap();
        let t = t_opt(&tpl, (0.01, 0.25), &opts).unwrap();
        assert_eq!(f.argmin, 1.0 / t.argmin);
        assert!((f.argmin * t.argmin - 1.0).abs() <= 1e-10);
        assert_eq!(f.min_distortion, t.min_distortion);
    }

    #[test]
    fn radius_optimum() {
        let sig = SignalModel::new(100.0, 100.0, 0.75).unwrap();
        let chan = ChannelParams::new(1e-12).unwrap();
        let opts = SolverOptions::radius();
        let rule = RadiusRule::Ratio(2.0);
        let at = |t: f64| a_opt(&sig, &chan, t, RADIUS_BRACKET, rule, &opts).unwrap();
        let (r20, r25) = (at(0.2), at(0.25));
        assert!(r25.argmin > r20.argmin);
        let e = |a: f64| {
            let g = ReceiverGeometry::new(a, 2.0 * a).unwrap();
            mse_stationary(&DistortionInputs::new(g, chan, sig, 0.2).unwrap()).unwrap().value
        };
        let scan = grid_argmin(e, 0.5e-6, 2e-6, 20_000);
        assert!((r20.argmin - scan).abs() <= 1e-8);

        let point = a_opt(&sig, &chan, 0.2, (1.2e-6, 1.2e-6), rule, &opts).unwrap();
        assert_eq!(point.argmin, 1.2e-6);
        assert_eq!(point.evaluations, 1);
    }

    #[test]
    fn radius_with_two_basins_is_ambiguous() {
        // at T = 0.1 s the valley near 1.17 µm competes with the decay towards 2 µm
        let sig = SignalModel::new(100.0, 100.0, 0.75).unwrap();
        let chan = ChannelParams::new(1e-12).unwrap();
        let err = a_opt(&sig, &chan, 0.1, RADIUS_BRACKET, RadiusRule::Ratio(2.0), &SolverOptions::radius()).unwrap_err();
        match err {
            Error::Ambiguous { candidates } => assert_eq!(candidates.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
        let narrow = a_opt(&sig, &chan, 0.1, (0.8e-6, 1.3e-6), RadiusRule::Ratio(2.0), &SolverOptions::radius()).unwrap();
        assert!((narrow.argmin - 1.1686e-6).abs() < 1e-9);
    }

    #[test]
    fn flat_objective_is_degenerate() {
        let flat = DistortionValue {
            value: 1.0,
            shell_term: 1.0,
            cross_term: 0.0,
            receiver_term: 0.0,
        };
        let err = minimize_unimodal(|_| Ok(flat), (0.0, 1.0), &SolverOptions::period()).unwrap_err();
        assert!(matches!(err, Error::Degenerate { .. }));
    }

    #[test]
    fn admissible_interval_brackets_optimum() {
        let tpl = template(2.0);
        let opts = SolverOptions::period();
        let best = t_opt(&tpl, PERIOD_BRACKET, &opts).unwrap();
        let bound = 1.5 * best.min_distortion;
        let (lo, hi) = admissible_periods(&tpl, PERIOD_BRACKET, bound, &opts).unwrap();
        assert!(lo < best.argmin && best.argmin < hi);
        let e = |t: f64| mse_stationary(&tpl.with_period(t).unwrap()).unwrap().value;
        assert!(e(lo) <= bound && e(hi) <= bound);
        assert!(e(lo - 1e-5) > bound && e(hi + 1e-5) > bound);
        assert!(admissible_periods(&tpl, PERIOD_BRACKET, 0.5 * best.min_distortion, &opts).is_err());
    }
}
