//! Executes one scenario: evolve, write artifacts, run the requested checks.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use plap_core::analysis::{
    decay_parameters, estimate_sobolev, extinction_analysis, heat_comparison, log_sobolev_gap,
    lr_dissipation_check_with, nash_probe_sup, ultracontractive_check, DecayFitReport, ExtinctionBranch,
    SobolevConfig, SobolevEstimate,
};
use plap_core::evolution::{evolve, refine_until_cauchy, trajectory_checks_with, ConvergenceReport};
use plap_core::grid::norm_lq_v;
use plap_core::io::write_snapshot;
use plap_core::prox::InnerSolverConfig;
use plap_core::weight_field::check_hypothesis;
use plap_core::{build_field, Error as CoreError, GridFunction64, InitialDatum, MatrixWeightField64, Trajectory64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::{Check, Report};
use crate::scenario::{parse_scenario, CheckKind, Scenario, TimeSpec};
use crate::{CliError, Result};

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Output directory; overrides the scenario's own.
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    /// Judge checks against the bare inner tolerance instead of ten times it.
    pub strict: bool,
}

impl RunOptions {
    pub fn slack_factor(&self) -> f64 {
        if self.strict {
            1.0
        } else {
            10.0
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub report: Report,
}

impl RunOutcome {
    pub fn pass(&self) -> bool {
        self.report.pass()
    }
}

/// Collects run-log lines and mirrors them to the logger.
struct RunLog {
    path: PathBuf,
    name: String,
    lines: Vec<String>,
}

impl RunLog {
    fn line(&mut self, s: impl Into<String>) {
        let s = s.into();
        log::info!("{}: {s}", self.name);
        self.lines.push(s);
    }

    fn flush(&self) -> std::io::Result<()> {
        fs::write(&self.path, self.lines.join("\n") + "\n")
    }
}

pub fn run_file(path: &Path, opts: &RunOptions) -> Result<RunOutcome> {
    let mut scn = parse_scenario(path)?;
    if let Some(seed) = opts.seed {
        scn.set_seed(seed);
    }
    run(&scn, opts)
}

pub fn run(scn: &Scenario, opts: &RunOptions) -> Result<RunOutcome> {
    let out = opts.out.clone().unwrap_or_else(|| scn.output.clone());
    fs::create_dir_all(&out)?;
    let mut log = RunLog {
        path: out.join("run.log"),
        name: scn.name.clone(),
        lines: Vec::new(),
    };
    log.line(format!("scenario {} from {}", scn.name, scn.source.display()));
    for l in scn.resolved_text().lines() {
        log.line(l.to_string());
    }
    let result = execute(scn, opts, &out, &mut log);
    if let Err(e) = &result {
        log.line(format!("error: {e}"));
    }
    log.flush()?;
    let report = match result {
        Err(CliError::Core(e @ CoreError::NonConvergence { .. })) => {
            return Err(CliError::Solver { source: e, log: log.path });
        }
        r => r?,
    };
    fs::write(out.join("report.txt"), report.render())?;
    Ok(RunOutcome { out_dir: out, report })
}

fn initial_datum(scn: &Scenario, grid: &Arc<plap_core::Grid<f64>>) -> plap_core::Result<GridFunction64> {
    let u = scn.initial.build(grid)?;
    Ok(if scn.positive_part { u.positive_part() } else { u })
}

fn solver_config(scn: &Scenario) -> InnerSolverConfig<f64> {
    InnerSolverConfig {
        grad_tol: scn.grad_tol,
        ..InnerSolverConfig::default()
    }
}

fn sobolev_config(scn: &Scenario) -> SobolevConfig {
    SobolevConfig {
        starts: scn.analysis.sobolev_starts,
        modes: scn.analysis.sobolev_modes,
        seed: scn.seed,
        ..SobolevConfig::default()
    }
}

fn execute(scn: &Scenario, opts: &RunOptions, out: &Path, log: &mut RunLog) -> Result<Report> {
    let grid = Arc::new(scn.grid.build()?);
    let field = Arc::new(build_field(&scn.weight, grid.clone())?);
    let u0 = initial_datum(scn, &grid)?;
    let cfg = solver_config(scn);
    let (traj, refinement) = match scn.time {
        TimeSpec::Steps(n) => (evolve(&u0, scn.horizon, n, scn.p, &field, &cfg)?, None),
        TimeSpec::Refine { tol, start, max } => {
            let scale = norm_lq_v(&u0, 2.0, &field)?;
            if scale == 0.0 {
                (evolve(&u0, scn.horizon, start, scn.p, &field, &cfg)?, None)
            } else {
                let (t, r) = refine_until_cauchy(&u0, scn.horizon, scn.p, &field, &cfg, tol * scale, start, max)?;
                (t, Some(r))
            }
        }
    };
    log.line(format!("evolved {} steps of size {:e}", traj.steps(), traj.tau()));
    write_observables(&out.join("observables.csv"), &traj)?;
    write_snapshots(&out.join("snapshots"), &traj, scn.snapshot_every)?;
    let plot = out.join("plot");
    fs::create_dir_all(&plot)?;
    write_energy(&plot.join("energy.csv"), &traj)?;
    if grid.dim() == 1 {
        write_profile(&plot.join("profile.csv"), &traj)?;
    }

    let factor = opts.slack_factor();
    let mut checks = Vec::new();
    if let Some(r) = &refinement {
        checks.push(refinement_check(r));
    }
    let mut sobolev: Option<std::result::Result<SobolevEstimate<f64>, String>> = None;
    let mut sobolev_constant = |log: &mut RunLog| -> std::result::Result<f64, String> {
        let est = sobolev.get_or_insert_with(|| {
            estimate_sobolev(&field, scn.p, scn.analysis.sigma, &sobolev_config(scn)).map_err(|e| e.to_string())
        });
        if let Ok(e) = est {
            log.line(format!("Sobolev estimate {:e}", e.constant));
        }
        est.as_ref().map(|e| e.constant).map_err(Clone::clone)
    };

    for &kind in &scn.analysis.checks {
        log.line(format!("check {kind}"));
        let a = &scn.analysis;
        match kind {
            CheckKind::Apriori => {
                let rep = trajectory_checks_with(&traj, factor);
                for (q, v) in [1.0, 2.0, 4.0, f64::INFINITY].iter().zip(&rep.lq_contraction) {
                    if a.q_list.contains(q) {
                        checks.push(Check::from(v.clone()));
                    }
                }
                checks.push(Check::from(rep.energy_decay));
                checks.push(Check::from(rep.dissipation_bound).value("dissipation_sum", rep.dissipation_sum));
                checks.push(Check::from(rep.per_step_dissipation));
            }
            CheckKind::LrDissipation => {
                for &r in &a.r_list {
                    match lr_dissipation_check_with(&traj, r, factor) {
                        Ok(rep) => {
                            let path = plot.join(format!("lr_dissipation_r{r}.csv"));
                            let rows = (0..rep.lhs.len()).map(|k| {
                                vec![traj.times()[k + 1], rep.lhs[k], rep.rhs[k], rep.slack[k]]
                            });
                            write_csv(&path, &["t", "lhs", "rhs", "slack"], rows)?;
                            checks.push(Check::from(rep.verdict).value("r", r));
                        }
                        Err(e) => checks.push(Check::failed(format!("L{r} dissipation"), e.to_string())),
                    }
                }
            }
            CheckKind::Ultracontractive => checks.extend(ultracontractive(scn, &traj, &plot, log)?),
            CheckKind::Extinction => {
                let name = "extinction before bound";
                let params = decay_parameters(scn.p, a.q0, a.sigma)?;
                let m = match sobolev_constant(log) {
                    Ok(m) => m * a.sobolev_inflation,
                    Err(e) => {
                        checks.push(Check::failed(name, e));
                        continue;
                    }
                };
                let threshold = a.eps_ext * traj.observables()[0].linf;
                match extinction_analysis(&traj, &params, m, Some(threshold)) {
                    Ok(ext) => {
                        let mut c = Check::from(ext.verdict)
                            .value("t_ext", ext.t_ext.unwrap_or(f64::INFINITY))
                            .value("t0_bound", ext.t0_bound)
                            .value("threshold", ext.threshold)
                            .value("m_p", ext.m_p)
                            .value("q_c", ext.q_c)
                            .value("h", ext.h);
                        if let ExtinctionBranch::Fallback { q0 } = ext.branch {
                            c = c.value("fallback_q0", q0);
                        }
                        checks.push(c);
                    }
                    Err(e) => checks.push(Check::failed(name, e.to_string())),
                }
            }
            CheckKind::Heat => {
                let amplitude = match scn.initial {
                    InitialDatum::SineProduct { amplitude } => amplitude,
                    _ => unreachable!("validated at parse time"),
                };
                match heat_comparison(&traj, amplitude) {
                    Ok(h) => checks.push(
                        Check::new("heat discrete reference", h.discrete, a.heat_tol)
                            .value("continuum_error", h.continuum)
                            .value("lambda_h", h.lambda_h),
                    ),
                    Err(e) => checks.push(Check::failed("heat discrete reference", e.to_string())),
                }
            }
            CheckKind::Sobolev => checks.push(match sobolev_constant(log) {
                Ok(m) => sobolev_check(m, a.sobolev_reference, a.sobolev_rel_tol),
                Err(e) => Check::failed("Sobolev estimate", e),
            }),
            CheckKind::Nash => {
                let name = "Nash seed stability";
                let sup = |seed| nash_probe_sup(&field, a.q0, a.sigma, scn.p, a.nash_probes, seed);
                match (sup(scn.seed), sup(scn.seed.wrapping_add(1))) {
                    (Ok(x), Ok(y)) => {
                        let change = (x - y).abs() / x.max(y);
                        let change = if change.is_finite() { change } else { f64::INFINITY };
                        checks.push(Check::new(name, change, a.nash_rel).value("sup_a", x).value("sup_b", y));
                    }
                    (Err(e), _) | (_, Err(e)) => checks.push(Check::failed(name, e.to_string())),
                }
            }
            CheckKind::LogSobolev => {
                let name = "log-Sobolev gap";
                match sobolev_constant(log) {
                    Ok(m) => checks.push(log_sobolev(scn, &field, m * a.log_sobolev_inflation, name)),
                    Err(e) => checks.push(Check::failed(name, e)),
                }
            }
            CheckKind::Hypothesis => {
                let h = check_hypothesis(&field, scn.p);
                checks.push(
                    Check::flag("structural hypotheses", h.passed())
                        .value("op_norm_max_excess", h.op_norm_bound.max_excess)
                        .value("sandwich_violations", h.sandwich.violations as f64),
                );
            }
        }
    }
    Ok(Report {
        scenario: scn.name.clone(),
        checks,
    })
}

fn refinement_check(r: &ConvergenceReport) -> Check {
    let last = r.distances.last().copied().unwrap_or(f64::INFINITY);
    let mut c = Check::new("mild refinement", last, r.tol);
    c.pass = r.converged;
    for (n, d) in r.levels.iter().zip(&r.distances) {
        c = c.value(format!("distance_n{n}"), *d);
    }
    c
}

fn sobolev_check(m: f64, reference: Option<f64>, rel: f64) -> Check {
    match reference {
        Some(r) => Check::new("Sobolev estimate", (m - r).abs() / r, rel)
            .value("constant", m)
            .value("reference", r),
        None => Check::flag("Sobolev estimate", m.is_finite() && m > 0.0).value("constant", m),
    }
}

fn log_sobolev(scn: &Scenario, field: &MatrixWeightField64, m: f64, name: &str) -> Check {
    let a = &scn.analysis;
    let mut rng = ChaCha8Rng::seed_from_u64(scn.seed);
    let top = a.sigma * scn.p;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..a.log_sobolev_draws {
        let datum = InitialDatum::RandomSmooth {
            modes: a.sobolev_modes,
            amplitude: 1.0,
            seed: rng.random(),
        };
        let r = 1.0 + (top - 1.0) * rng.random::<f64>();
        let eps = 10f64.powf(rng.random_range(-3.0..3.0));
        let gap = datum
            .build(field.grid())
            .and_then(|f| log_sobolev_gap(&f, r, eps, a.sigma, m, scn.p, field));
        match gap {
            Ok(g) => worst = worst.max(g),
            Err(e) => return Check::failed(name, e.to_string()),
        }
    }
    Check::new(name, worst, 0.0).value("m_p", m).value("draws", a.log_sobolev_draws as f64)
}

fn ultracontractive(scn: &Scenario, traj: &Trajectory64, plot: &Path, log: &mut RunLog) -> Result<Vec<Check>> {
    let a = &scn.analysis;
    let params = decay_parameters(scn.p, a.q0, a.sigma)?;
    let name = "ultracontractive bound";
    let base = match ultracontractive_check(traj, &params) {
        Ok(r) => r,
        Err(e) => return Ok(vec![Check::failed(name, e.to_string())]),
    };
    write_csv(
        &plot.join("ultracontractive.csv"),
        &["t", "c"],
        base.series.iter().map(|&(t, c)| vec![t, c]),
    )?;
    let mut checks = vec![decay_check(name, &base)];
    if a.stability {
        let steps = traj.steps();
        let cfg = solver_config(scn);
        let refit = |grid: &crate::scenario::GridSpec, scale: f64| -> plap_core::Result<DecayFitReport> {
            let g = Arc::new(grid.build()?);
            let field = Arc::new(build_field(&scn.weight, g.clone())?);
            let u0 = initial_datum(scn, &g)?.scaled(scale);
            let t = evolve(&u0, scn.horizon, steps, scn.p, &field, &cfg)?;
            ultracontractive_check(&t, &params)
        };
        log.line("refitting on the refined grid and with doubled data");
        for (label, result) in [
            ("grid refinement", refit(&scn.grid.refined(), 1.0)),
            ("doubled data", refit(&scn.grid, 2.0)),
        ] {
            let name = format!("ultracontractive stability under {label}");
            checks.push(match result {
                Ok(r) => Check::from(base.stability(&r, &name, a.stability_rel))
                    .value("sup_c", base.sup_c)
                    .value("sup_c_other", r.sup_c),
                Err(CoreError::NonConvergence { .. }) => return Err(result.unwrap_err().into()),
                Err(e) => Check::failed(name, e.to_string()),
            });
        }
    }
    Ok(checks)
}

fn decay_check(name: &str, r: &DecayFitReport) -> Check {
    let mut c = Check::flag(name, r.finite())
        .value("sup_c", r.sup_c)
        .value("sup_at", r.sup_at)
        .value("beta", r.params.beta)
        .value("gamma", r.params.gamma)
        .value("window_start", r.window.0)
        .value("window_end", r.window.1);
    if let Some(s) = r.slope {
        c = c.value("log_log_slope", s);
    }
    c
}

/// Estimates the Sobolev constant of the scenario's weights and writes the
/// maximizer next to the report.
pub fn estimate_sobolev_for(scn: &Scenario, opts: &RunOptions) -> Result<RunOutcome> {
    let out = opts.out.clone().unwrap_or_else(|| scn.output.clone());
    fs::create_dir_all(&out)?;
    let grid = Arc::new(scn.grid.build()?);
    let field = build_field(&scn.weight, grid)?;
    let est = estimate_sobolev(&field, scn.p, scn.analysis.sigma, &sobolev_config(scn))?;
    write_snapshot(&out.join("maximizer.snap"), &est.maximizer, 0.0)?;
    let mut check = sobolev_check(est.constant, scn.analysis.sobolev_reference, scn.analysis.sobolev_rel_tol)
        .value("inflated", est.constant * scn.analysis.sobolev_inflation);
    for (k, r) in est.start_ratios.iter().enumerate() {
        check = check.value(format!("start_{k}"), *r);
    }
    let report = Report {
        scenario: scn.name.clone(),
        checks: vec![check],
    };
    fs::write(out.join("sobolev.txt"), report.render())?;
    Ok(RunOutcome { out_dir: out, report })
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.into_iter().map(fmt))?;
    }
    w.flush()?;
    Ok(())
}

/// Observables at every partition time plus the inner-solver diagnostics
/// of the step that produced the row (blank at `t = 0`).
fn write_observables(path: &Path, traj: &Trajectory64) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "t", "Dp", "grad_p", "L1", "L2", "L4", "Linf", "iterations", "stages", "residual", "final_delta", "linear",
    ])?;
    for (k, (t, o)) in traj.times().iter().zip(traj.observables()).enumerate() {
        let mut row: Vec<String> = [*t, o.dirichlet, o.grad_p, o.l1, o.l2, o.l4, o.linf].into_iter().map(fmt).collect();
        match k.checked_sub(1).map(|i| &traj.diagnostics()[i]) {
            Some(d) => row.extend([
                d.iterations.to_string(),
                d.stages.to_string(),
                fmt(d.residual),
                fmt(d.final_delta),
                d.linear.to_string(),
            ]),
            None => row.extend(std::iter::repeat_n(String::new(), 5)),
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_snapshots(dir: &Path, traj: &Trajectory64, every: usize) -> Result<()> {
    fs::create_dir_all(dir)?;
    let n = traj.steps();
    for (k, (u, t)) in traj.snapshots().iter().zip(traj.times()).enumerate() {
        if k == 0 || k == n || (every > 0 && k % every == 0) {
            write_snapshot(&dir.join(format!("step_{k:06}.snap")), u, *t)?;
        }
    }
    Ok(())
}

fn write_energy(path: &Path, traj: &Trajectory64) -> Result<()> {
    let tau = traj.tau();
    let mut acc = 0.0;
    let rows = traj.times().iter().zip(traj.observables()).enumerate().map(|(k, (t, o))| {
        if k > 0 {
            acc += tau * o.grad_p;
        }
        vec![*t, o.dirichlet, acc]
    });
    write_csv(path, &["t", "Dp", "dissipated"], rows)
}

fn write_profile(path: &Path, traj: &Trajectory64) -> Result<()> {
    let grid = traj.initial().grid().clone();
    let (first, last) = (traj.initial().values(), traj.last().values());
    let rows = (0..grid.num_nodes()).map(|i| vec![grid.node_coords(i)[0], first[i], last[i]]);
    write_csv(path, &["x", "u_initial", "u_final"], rows)
}
