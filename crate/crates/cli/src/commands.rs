//! One function per experiment, each producing a [`ResultTable`].

use molsig::distortion::mse_stationary;
use molsig::montecarlo::{
    concentration_trace, distribution_pair, estimate_distortion_curve, Binning, SimulationSetup, TraceSpec,
};
use molsig::optimize::{
    a_opt, f_opt, surface, sweep as run_sweep, t_opt, RadiusRule, SolverOptions, SweepSpec, SweepVariable,
};
use molsig::{ChannelParams, DistortionInputs, Exec, ReceiverGeometry, WalkParams, UM};

use crate::config::{Experiment, Grid, OptimizeTarget, RunConfig};
use crate::error::CliError;
use crate::table::{Cell, Column, ResultTable};

/// Squared concentration.
const MSE_UNIT: &str = "m^-6";
const CONC_UNIT: &str = "m^-3";

pub fn run(experiment: Experiment, cfg: &RunConfig, exec: Exec) -> Result<ResultTable, CliError> {
    match experiment {
        Experiment::Validate => validate(cfg, exec),
        Experiment::Sweep => sweep(cfg, exec),
        Experiment::Optimize => optimize(cfg, exec),
        Experiment::Distributions => distributions(cfg, exec),
        Experiment::Trace => trace(cfg, exec),
    }
}

fn grid(name: &str, g: &Grid) -> Result<Vec<f64>, CliError> {
    g.values().map_err(|e| CliError::Config(format!("{name}: {e}")))
}

fn error_cell(e: &Option<molsig::Error>) -> Cell {
    e.as_ref().map_or(Cell::Empty, |e| Cell::Text(e.to_string()))
}

/// Points that are no higher than their left neighbour and strictly lower
/// than their right one; a plateau counts once.
pub fn local_minima(values: &[f64]) -> u64 {
    let n = values.len();
    (0..n)
        .filter(|&i| (i == 0 || values[i] <= values[i - 1]) && (i == n - 1 || values[i] < values[i + 1]))
        .count() as u64
}

struct ValidateGroup {
    analytic: Vec<f64>,
    mc: Vec<molsig::McEstimate>,
    t_opt: Result<f64, molsig::Error>,
    argmin_mc: f64,
    minima: u64,
}

/// Analytic and Monte Carlo distortion over a period grid, one column group
/// per reception radius, followed by one summary row.
pub fn validate(cfg: &RunConfig, exec: Exec) -> Result<ResultTable, CliError> {
    let v = &cfg.validate;
    let (chan, sig, walk) = (cfg.channel()?, cfg.signal()?, cfg.walk()?);
    let periods = grid("validate.periods_s", &v.periods_s)?;
    let a = cfg.model.a_um * UM;

    let mut columns = vec![Column::new("kind", ""), Column::new("period", "s")];
    let mut groups = Vec::new();
    for &b_um in &v.b_um {
        let tag = format!("b{b_um}um");
        for (name, unit) in [
            ("distortion_analytic", MSE_UNIT),
            ("distortion_mc", MSE_UNIT),
            ("mc_std_error", MSE_UNIT),
            ("mc_rho", "1"),
            ("t_opt_analytic", "s"),
            ("argmin_mc", "s"),
            ("argmin_gap", "s"),
            ("mc_local_minima", "1"),
        ] {
            columns.push(Column::new(format!("{name}_{tag}"), unit));
        }

        let geom = ReceiverGeometry::new(a, b_um * UM)?;
        let template = DistortionInputs::new(geom, chan, sig, periods[0])?;
        let analytic = periods
            .iter()
            .map(|&t| Ok(mse_stationary(&template.with_period(t)?)?.value))
            .collect::<molsig::Result<Vec<f64>>>()?;
        let setup = SimulationSetup {
            geom,
            chan,
            walk,
            sig,
            mode: cfg.walk.signal,
            n_trials: v.trials,
            seed: cfg.seed,
            exec,
        };
        let mc = estimate_distortion_curve(&setup, &periods)?;
        let curve: Vec<f64> = mc.iter().map(|e| e.distortion).collect();
        let best = curve
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(y.1))
            .map(|(i, _)| periods[i])
            .expect("grid is nonempty");
        groups.push(ValidateGroup {
            analytic,
            t_opt: t_opt(&template, (v.t_bracket_s[0], v.t_bracket_s[1]), &SolverOptions::period()).map(|r| r.argmin),
            argmin_mc: best,
            minima: local_minima(&curve),
            mc,
        });
    }
    columns.push(Column::new("error", ""));

    let mut table = ResultTable::new(columns);
    for (i, &t) in periods.iter().enumerate() {
        let mut row = vec![Cell::from("point"), t.into()];
        for g in &groups {
            let e = &g.mc[i];
            row.extend([g.analytic[i].into(), e.distortion.into(), e.std_error.into(), e.rho_empirical.into()]);
            row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]);
        }
        row.push(Cell::Empty);
        table.push(row);
    }
    let mut summary = vec![Cell::from("summary"), Cell::Empty];
    let mut errors = Vec::new();
    for g in &groups {
        summary.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]);
        match &g.t_opt {
            Ok(t) => summary.extend([(*t).into(), g.argmin_mc.into(), (g.argmin_mc - t).abs().into()]),
            Err(e) => {
                errors.push(e.to_string());
                table.failures.push(e.clone());
                summary.extend([Cell::Empty, g.argmin_mc.into(), Cell::Empty]);
            }
        }
        summary.push(g.minima.into());
    }
    summary.push(if errors.is_empty() { Cell::Empty } else { Cell::Text(errors.join("; ")) });
    table.push(summary);
    Ok(table)
}

/// Analytic distortion along one parameter, or over an `(a, T)` surface.
pub fn sweep(cfg: &RunConfig, exec: Exec) -> Result<ResultTable, CliError> {
    let s = &cfg.sweep;
    let template = DistortionInputs::new(cfg.geometry()?, cfg.channel()?, cfg.signal()?, cfg.model.period_s)?;
    let rule = match s.b_over_a {
        Some(k) => RadiusRule::Ratio(k),
        None => RadiusRule::Fixed(template.geom.b()),
    };

    if let (Some(a_grid), Some(time_grid)) = (&s.a_um, s.period_s.as_ref().or(s.frequency_hz.as_ref())) {
        let a: Vec<f64> = grid("sweep.a_um", a_grid)?.iter().map(|a| a * UM).collect();
        let mut periods = grid("sweep", time_grid)?;
        if s.period_s.is_none() {
            periods.iter_mut().for_each(|f| *f = 1.0 / *f);
        }
        let mut table = ResultTable::new(vec![
            Column::new("a", "um"),
            Column::new("b", "um"),
            Column::new("period", "s"),
            Column::new("frequency", "Hz"),
            Column::new("distortion", MSE_UNIT),
            Column::new("error", ""),
        ]);
        for r in surface(&a, &periods, &template, rule, exec) {
            table.push(vec![
                (r.a / UM).into(),
                (rule.outer_radius(r.a) / UM).into(),
                r.period.into(),
                r.frequency.into(),
                r.distortion.into(),
                error_cell(&r.error),
            ]);
            table.failures.extend(r.error);
        }
        return Ok(table);
    }

    let (variable, values, name, unit, scale) = if let Some(g) = &s.frequency_hz {
        (SweepVariable::Frequency, grid("sweep.frequency_hz", g)?, "frequency", "Hz", 1.0)
    } else if let Some(g) = &s.diffusion_m2_per_s {
        (SweepVariable::Diffusion, grid("sweep.diffusion_m2_per_s", g)?, "diffusion", "m^2/s", 1.0)
    } else if let Some(g) = &s.a_um {
        (SweepVariable::ReceiverRadius, grid("sweep.a_um", g)?, "a", "um", UM)
    } else {
        let g = s.period_s.clone().unwrap_or(Grid::range(0.01, 0.25, 25));
        (SweepVariable::Period, grid("sweep.period_s", &g)?, "period", "s", 1.0)
    };
    let mut spec = SweepSpec::new(variable, values.iter().map(|v| v * scale).collect(), template)?;
    if s.b_over_a.is_some() {
        spec = spec.with_constraint(rule);
    }
    if s.t_opt {
        spec = spec.with_t_opt((s.t_bracket_s[0], s.t_bracket_s[1]));
    }

    let mut columns = vec![Column::new(name, unit), Column::new("b", "um"), Column::new("distortion", MSE_UNIT)];
    if s.t_opt {
        columns.push(Column::new("t_opt", "s"));
        columns.push(Column::new("min_distortion", MSE_UNIT));
    }
    columns.push(Column::new("error", ""));
    let mut table = ResultTable::new(columns);
    for r in run_sweep(&spec, exec) {
        let b = match variable {
            SweepVariable::ReceiverRadius => rule.outer_radius(r.value),
            _ => template.geom.b(),
        };
        let mut row = vec![(r.value / scale).into(), (b / UM).into(), r.distortion.into()];
        if s.t_opt {
            row.extend([r.t_opt.into(), r.min_distortion.into()]);
        }
        row.push(error_cell(&r.error));
        table.push(row);
        table.failures.extend(r.error);
    }
    Ok(table)
}

/// Optimal sampling period per receiver radius, or optimal radius per period.
pub fn optimize(cfg: &RunConfig, exec: Exec) -> Result<ResultTable, CliError> {
    let o = &cfg.optimize;
    let (chan, sig) = (cfg.channel()?, cfg.signal()?);
    let rule = match o.b_um {
        Some(b) => RadiusRule::Fixed(b * UM),
        None => RadiusRule::Ratio(o.b_over_a),
    };

    match o.target {
        OptimizeTarget::Period => {
            let radii = grid("optimize.a_um", &o.a_um)?;
            let (t_lo, t_hi) = (o.t_bracket_s[0], o.t_bracket_s[1]);
            let results = exec.map_slice(&radii, |&a_um| {
                let a = a_um * UM;
                let row = (|| -> molsig::Result<[f64; 4]> {
                    let geom = ReceiverGeometry::new(a, rule.outer_radius(a))?;
                    let template = DistortionInputs::new(geom, chan, sig, o.constant_period_s)?;
                    let period = t_opt(&template, (t_lo, t_hi), &SolverOptions::period())?;
                    let freq = f_opt(&template, (1.0 / t_hi, 1.0 / t_lo), &SolverOptions::period())?;
                    let constant = mse_stationary(&template)?.value;
                    Ok([period.argmin, freq.argmin, period.min_distortion, constant])
                })();
                (a, row)
            });
            let mut table = ResultTable::new(vec![
                Column::new("a", "um"),
                Column::new("b", "um"),
                Column::new("t_opt", "s"),
                Column::new("f_opt", "Hz"),
                Column::new("min_distortion", MSE_UNIT),
                Column::new("constant_period", "s"),
                Column::new("distortion_at_constant_period", MSE_UNIT),
                Column::new("error", ""),
            ]);
            for (a, result) in results {
                let mut row = vec![(a / UM).into(), (rule.outer_radius(a) / UM).into()];
                match result {
                    Ok([t, f, e_min, e_const]) => {
                        row.extend([t.into(), f.into(), e_min.into(), o.constant_period_s.into(), e_const.into()]);
                        row.push(Cell::Empty);
                    }
                    Err(e) => {
                        row.extend([Cell::Empty, Cell::Empty, Cell::Empty, o.constant_period_s.into(), Cell::Empty]);
                        row.push(Cell::Text(e.to_string()));
                        table.failures.push(e);
                    }
                }
                table.push(row);
            }
            Ok(table)
        }
        OptimizeTarget::Radius => {
            let periods = grid("optimize.period_s", &o.period_s)?;
            let bracket = (o.a_bracket_um[0] * UM, o.a_bracket_um[1] * UM);
            let results = exec.map_slice(&periods, |&t| a_opt(&sig, &chan, t, bracket, rule, &SolverOptions::radius()));
            let mut table = ResultTable::new(vec![
                Column::new("period", "s"),
                Column::new("a_opt", "um"),
                Column::new("b", "um"),
                Column::new("min_distortion", MSE_UNIT),
                Column::new("error", ""),
            ]);
            for (&t, result) in periods.iter().zip(results) {
                match result {
                    Ok(r) => table.push(vec![
                        t.into(),
                        (r.argmin / UM).into(),
                        (rule.outer_radius(r.argmin) / UM).into(),
                        r.min_distortion.into(),
                        Cell::Empty,
                    ]),
                    Err(e) => {
                        table.push(vec![t.into(), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Text(e.to_string())]);
                        table.failures.push(e);
                    }
                }
            }
            Ok(table)
        }
    }
}

/// Histograms of shell and reconstructed concentrations on a common binning,
/// then one summary row.
pub fn distributions(cfg: &RunConfig, exec: Exec) -> Result<ResultTable, CliError> {
    let d = &cfg.distributions;
    let pair = distribution_pair(
        &cfg.geometry()?,
        &cfg.channel()?,
        &cfg.signal()?,
        cfg.model.period_s,
        d.draws as usize,
        cfg.seed,
        &Binning { bins: d.bins, range: None },
        exec,
    )?;
    let mut table = ResultTable::new(vec![
        Column::new("kind", ""),
        Column::new("bin", "1"),
        Column::new("lo", CONC_UNIT),
        Column::new("hi", CONC_UNIT),
        Column::new("shell_count", "1"),
        Column::new("receiver_count", "1"),
        Column::new("shell_mean", CONC_UNIT),
        Column::new("shell_variance", MSE_UNIT),
        Column::new("receiver_mean", CONC_UNIT),
        Column::new("receiver_variance", MSE_UNIT),
        Column::new("normalized_mean_gap", "1"),
        Column::new("capture_fraction", "1"),
        Column::new("clamped", "1"),
    ]);
    let w = pair.shell.bin_width();
    for k in 0..d.bins {
        let lo = pair.shell.lo + k as f64 * w;
        let hi = if k + 1 == d.bins { pair.shell.hi } else { lo + w };
        let mut row = vec![
            Cell::from("histogram"),
            (k as u64).into(),
            lo.into(),
            hi.into(),
            pair.shell.counts[k].into(),
            pair.receiver.counts[k].into(),
        ];
        row.extend(std::iter::repeat_n(Cell::Empty, 7));
        table.push(row);
    }
    let mut summary = vec![Cell::from("summary")];
    summary.extend(std::iter::repeat_n(Cell::Empty, 5));
    summary.extend([
        pair.shell_summary.mean.into(),
        pair.shell_summary.variance.into(),
        pair.receiver_summary.mean.into(),
        pair.receiver_summary.variance.into(),
        pair.normalized_mean_gap().into(),
        pair.fraction.into(),
        pair.clamped.into(),
    ]);
    table.push(summary);
    Ok(table)
}

/// Binned 1D random-walk concentration next to the closed form.
pub fn trace(cfg: &RunConfig, exec: Exec) -> Result<ResultTable, CliError> {
    let t = &cfg.trace;
    let chan = ChannelParams::new(t.diffusion_m2_per_s)?;
    let walk = match t.delta_um {
        Some(delta) => WalkParams::explicit(t.tau_s, delta * UM)?,
        None => WalkParams::derived(t.tau_s, &chan)?,
    }
    .with_law(t.step_law);
    let spec = TraceSpec {
        q: t.molecules,
        r: t.r_um * UM,
        bin_width: t.bin_width_um * UM,
        t_max: t.t_max_s,
    };
    let points = concentration_trace(&spec, &chan, &walk, cfg.seed, exec)?;
    let mut table = ResultTable::new(vec![
        Column::new("time", "s"),
        Column::new("concentration", "m^-1"),
        Column::new("expected", "m^-1"),
    ]);
    for p in points.iter().skip(t.stride - 1).step_by(t.stride) {
        table.push(vec![p.time.into(), p.concentration.into(), p.expected.into()]);
    }
    Ok(table)
}
