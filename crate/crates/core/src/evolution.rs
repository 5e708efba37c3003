//! Time marching with the implicit Euler scheme, the two time interpolants,
//! refinement by step doubling, and trajectory-level checks.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{dirichlet_energy, gradient_p_integral, norm_lq_v_values, GridFunction};
use crate::prox::{InnerSolverConfig, ProxProblem, ProxSolver, ProxStats};
use crate::scalar::{pairwise_sum_by, Real};
use crate::weight_field::MatrixWeightField;

/// Per-snapshot observables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observables<T> {
    /// `(1/p) int |sqrt(Q) grad u|^p dx`
    pub dirichlet: T,
    /// `int |sqrt(Q) grad u|^p dx`
    pub grad_p: T,
    pub l1: T,
    pub l2: T,
    pub l4: T,
    pub linf: T,
}

impl<T: Real> Observables<T> {
    pub fn of(u: &GridFunction<T>, p: T, field: &MatrixWeightField<T>) -> Result<Self> {
        let v = u.values();
        Ok(Self {
            dirichlet: dirichlet_energy(u, p, field)?,
            grad_p: gradient_p_integral(v, p, field),
            l1: norm_lq_v_values(v, T::one(), field)?,
            l2: norm_lq_v_values(v, T::lit(2.0), field)?,
            l4: norm_lq_v_values(v, T::lit(4.0), field)?,
            linf: norm_lq_v_values(v, T::infinity(), field)?,
        })
    }

    /// The `L^q_v` norm for `q` in {1, 2, 4, inf}.
    pub fn norm(&self, q: f64) -> Option<T> {
        match q {
            q if q == 1.0 => Some(self.l1),
            q if q == 2.0 => Some(self.l2),
            q if q == 4.0 => Some(self.l4),
            q if q.is_infinite() => Some(self.linf),
            _ => None,
        }
    }
}

/// One approximate solution on a uniform partition of `[0, T]`.
#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    horizon: T,
    tau: T,
    p: T,
    times: Vec<T>,
    snapshots: Vec<GridFunction<T>>,
    observables: Vec<Observables<T>>,
    diagnostics: Vec<ProxStats>,
    field: Arc<MatrixWeightField<T>>,
    grad_tol: T,
}

impl<T: Real> Trajectory<T> {
    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.snapshots.len() - 1
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn snapshots(&self) -> &[GridFunction<T>] {
        &self.snapshots
    }

    pub fn initial(&self) -> &GridFunction<T> {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &GridFunction<T> {
        self.snapshots.last().expect("at least one snapshot")
    }

    pub fn observables(&self) -> &[Observables<T>] {
        &self.observables
    }

    /// Inner-solver statistics of steps `1..=n`.
    pub fn diagnostics(&self) -> &[ProxStats] {
        &self.diagnostics
    }

    pub fn field(&self) -> &Arc<MatrixWeightField<T>> {
        &self.field
    }

    /// Inner gradient tolerance the trajectory was computed with.
    pub fn grad_tol(&self) -> T {
        self.grad_tol
    }

    /// Index `k` with `t` in `(t_{k-1}, t_k]` (0 for `t = 0`).
    fn interval(&self, t: T) -> Result<usize> {
        if !(t >= T::zero() && t <= self.horizon) {
            return Err(Error::OutOfRange {
                t: t.to_f64_lossy(),
                horizon: self.horizon.to_f64_lossy(),
            });
        }
        Ok(self.times.partition_point(|&s| s < t))
    }

    /// Piecewise-constant value: `u_k` on `(t_{k-1}, t_k]`, `u_0` at `t = 0`.
    pub fn evaluate(&self, t: T) -> Result<GridFunction<T>> {
        Ok(self.snapshots[self.interval(t)?].clone())
    }

    pub fn interpolant(&self) -> Interpolant<'_, T> {
        Interpolant { traj: self }
    }

    /// Copy with snapshot `k` multiplied by `s` (observables recomputed);
    /// used to demonstrate that the checks detect violations.
    pub fn with_scaled_snapshot(&self, k: usize, s: T) -> Result<Self> {
        let mut out = self.clone();
        out.snapshots[k] = self.snapshots[k].scaled(s);
        out.observables[k] = Observables::of(&out.snapshots[k], self.p, &self.field)?;
        Ok(out)
    }
}

/// Linear-in-time interpolant of a trajectory.
#[derive(Clone, Copy, Debug)]
pub struct Interpolant<'a, T> {
    traj: &'a Trajectory<T>,
}

impl<T: Real> Interpolant<'_, T> {
    pub fn evaluate(&self, t: T) -> Result<GridFunction<T>> {
        let tr = self.traj;
        let k = tr.interval(t)?;
        if k == 0 || t == tr.times[k] {
            return Ok(tr.snapshots[k].clone());
        }
        let theta = (t - tr.times[k - 1]) / tr.tau;
        tr.snapshots[k].zip_with(&tr.snapshots[k - 1], |a, b| theta * (a - b) + b)
    }
}

pub fn evaluate<T: Real>(traj: &Trajectory<T>, t: T) -> Result<GridFunction<T>> {
    traj.evaluate(t)
}

pub fn evaluate_interpolant<T: Real>(interp: &Interpolant<'_, T>, t: T) -> Result<GridFunction<T>> {
    interp.evaluate(t)
}

/// `n` implicit Euler steps of size `T / n` from `u0`.
pub fn evolve<T: Real>(
    u0: &GridFunction<T>,
    horizon: T,
    n: usize,
    p: T,
    field: &Arc<MatrixWeightField<T>>,
    cfg: &InnerSolverConfig<T>,
) -> Result<Trajectory<T>> {
    if n == 0 {
        return Err(Error::InvalidParameters("step count must be at least 1".into()));
    }
    if !(horizon > T::zero() && horizon.is_finite()) {
        return Err(Error::InvalidParameters(format!("horizon {horizon} must be positive")));
    }
    let tau = horizon / T::from_usize_lossy(n);
    let mut traj = march(u0, tau, n, p, field, cfg)?;
    traj.horizon = horizon;
    traj.times = (0..=n)
        .map(|k| {
            if k == n {
                horizon
            } else {
                horizon * T::from_usize_lossy(k) / T::from_usize_lossy(n)
            }
        })
        .collect();
    Ok(traj)
}

/// `steps` implicit Euler steps with a given step size.
///
/// Steps depend only on the previous snapshot and `tau`, so running `k`
/// steps and then `n - k` more reproduces an `n`-step run bit for bit.
pub fn evolve_steps<T: Real>(
    u0: &GridFunction<T>,
    tau: T,
    steps: usize,
    p: T,
    field: &Arc<MatrixWeightField<T>>,
    cfg: &InnerSolverConfig<T>,
) -> Result<Trajectory<T>> {
    march(u0, tau, steps, p, field, cfg)
}

fn march<T: Real>(
    u0: &GridFunction<T>,
    tau: T,
    n: usize,
    p: T,
    field: &Arc<MatrixWeightField<T>>,
    cfg: &InnerSolverConfig<T>,
) -> Result<Trajectory<T>> {
    if !u0.grid().same_shape(field.grid()) {
        return Err(Error::GridMismatch);
    }
    if let Some(node) = (0..u0.values().len()).find(|&i| u0.grid().is_boundary(i) && u0.values()[i] != T::zero()) {
        return Err(Error::BoundaryViolation { node });
    }
    let solver = ProxSolver::new(field, cfg.clone())?;
    let mut snapshots = Vec::with_capacity(n + 1);
    let mut observables = Vec::with_capacity(n + 1);
    let mut diagnostics = Vec::with_capacity(n);
    snapshots.push(u0.clone());
    observables.push(Observables::of(u0, p, field)?);
    for k in 1..=n {
        let prev = snapshots.last().expect("nonempty");
        let problem = ProxProblem::new(prev, tau, p, field);
        let (next, stats) = solver.solve(&problem).map_err(|e| match e {
            Error::NonConvergence {
                residual, iterations, ..
            } => Error::NonConvergence {
                residual,
                iterations,
                step: Some(k),
            },
            other => other,
        })?;
        log::debug!(
            "step {k}/{n}: {} iterations, {} stages, residual {:e}",
            stats.iterations,
            stats.stages,
            stats.residual
        );
        observables.push(Observables::of(&next, p, field)?);
        snapshots.push(next);
        diagnostics.push(stats);
    }
    let times = (0..=n).map(|k| tau * T::from_usize_lossy(k)).collect();
    Ok(Trajectory {
        horizon: tau * T::from_usize_lossy(n),
        tau,
        p,
        times,
        snapshots,
        observables,
        diagnostics,
        field: field.clone(),
        grad_tol: cfg.grad_tol,
    })
}

/// `L^2_v` distance of two grid functions.
pub fn l2_distance<T: Real>(a: &GridFunction<T>, b: &GridFunction<T>, field: &MatrixWeightField<T>) -> Result<T> {
    norm_lq_v_values(a.sub(b)?.values(), T::lit(2.0), field)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    /// Step counts `n` of the coarse member of each compared pair.
    pub levels: Vec<usize>,
    /// `max_k |u_n(t_k) - u_2n(t_k)|_{L^2_v}` over the coarse partition.
    pub distances: Vec<f64>,
    pub tol: f64,
    pub converged: bool,
}

impl ConvergenceReport {
    /// Successive ratios `d_{j+1} / d_j`.
    pub fn ratios(&self) -> Vec<f64> {
        self.distances.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

/// Doubles the step count from `n_start` until consecutive trajectories are
/// within `tol` on the coarse partition, or `n_max` is reached.
pub fn refine_until_cauchy<T: Real>(
    u0: &GridFunction<T>,
    horizon: T,
    p: T,
    field: &Arc<MatrixWeightField<T>>,
    cfg: &InnerSolverConfig<T>,
    tol: T,
    n_start: usize,
    n_max: usize,
) -> Result<(Trajectory<T>, ConvergenceReport)> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidParameters("refinement tolerance must be positive".into()));
    }
    let mut n = n_start.max(1);
    let mut coarse = evolve(u0, horizon, n, p, field, cfg)?;
    let mut report = ConvergenceReport {
        levels: Vec::new(),
        distances: Vec::new(),
        tol: tol.to_f64_lossy(),
        converged: false,
    };
    loop {
        let fine = evolve(u0, horizon, 2 * n, p, field, cfg)?;
        let mut d = T::zero();
        for k in 0..=n {
            d = d.max(l2_distance(&coarse.snapshots[k], &fine.snapshots[2 * k], field)?);
        }
        report.levels.push(n);
        report.distances.push(d.to_f64_lossy());
        log::info!("refinement n = {n} -> {}: distance {:e}", 2 * n, d);
        if d <= tol {
            report.converged = true;
            return Ok((fine, report));
        }
        if 2 * n >= n_max {
            return Ok((fine, report));
        }
        n *= 2;
        coarse = fine;
    }
}

/// One named inequality check.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    /// Largest amount by which the checked quantity exceeded its bound
    /// (before slack); negative when the bound holds with room.
    pub worst_excess: f64,
    pub slack: f64,
}

impl Verdict {
    pub fn new(name: impl Into<String>, worst_excess: f64, slack: f64) -> Self {
        Self {
            name: name.into(),
            pass: worst_excess <= slack,
            worst_excess,
            slack,
        }
    }
}

/// Largest `x_k - x_{k-1}` (monotone nonincreasing means this is <= 0).
fn worst_increase(xs: impl Iterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.collect();
    if xs.len() < 2 {
        return 0.0;
    }
    xs.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
}

/// A-priori estimates along one trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct AprioriReport {
    pub slack_factor: f64,
    /// `|u_k|_{L^q_v}` nonincreasing, for q = 1, 2, 4, inf.
    pub lq_contraction: Vec<Verdict>,
    /// `D_p(u_k)` nonincreasing.
    pub energy_decay: Verdict,
    /// `sum_k tau int |sqrt(Q) grad u_k|^p <= |u_0|^2_{L^2_v} / 2`.
    pub dissipation_bound: Verdict,
    /// Per step: `tau int |sqrt(Q) grad u_k|^p <= (|u_{k-1}|^2 - |u_k|^2) / 2`.
    pub per_step_dissipation: Verdict,
    /// `sum_k tau int |sqrt(Q) grad u_k|^p`.
    pub dissipation_sum: f64,
}

impl AprioriReport {
    pub fn pass(&self) -> bool {
        self.verdicts().all(|v| v.pass)
    }

    pub fn verdicts(&self) -> impl Iterator<Item = &Verdict> {
        self.lq_contraction
            .iter()
            .chain([&self.energy_decay, &self.dissipation_bound, &self.per_step_dissipation])
    }
}

/// Checks with slack `10 * grad_tol * scale`.
pub fn trajectory_checks<T: Real>(traj: &Trajectory<T>) -> AprioriReport {
    trajectory_checks_with(traj, 10.0)
}

/// Checks with slack `slack_factor * grad_tol * scale`, where the scale of
/// each check is the size of its quantity at `t = 0`.
pub fn trajectory_checks_with<T: Real>(traj: &Trajectory<T>, slack_factor: f64) -> AprioriReport {
    let tol = traj.grad_tol.to_f64_lossy() * slack_factor;
    let obs = &traj.observables;
    let mut lq = Vec::new();
    for (q, name) in [(1.0, "L1"), (2.0, "L2"), (4.0, "L4"), (f64::INFINITY, "Linf")] {
        let series = obs.iter().map(|o| o.norm(q).expect("tabulated norm").to_f64_lossy());
        lq.push(Verdict::new(
            format!("{name} contraction"),
            worst_increase(series),
            tol * obs[0].norm(q).expect("tabulated norm").to_f64_lossy(),
        ));
    }
    let energy = Verdict::new(
        "energy decay",
        worst_increase(obs.iter().map(|o| o.dirichlet.to_f64_lossy())),
        tol * obs[0].dirichlet.to_f64_lossy(),
    );
    let tau = traj.tau.to_f64_lossy();
    let n = traj.steps();
    let sum = pairwise_sum_by(n, |k| obs[k + 1].grad_p.to_f64_lossy() * tau);
    let half_l2 = 0.5 * obs[0].l2.to_f64_lossy().powi(2);
    let bound = Verdict::new("dissipation bound", sum - half_l2, tol * half_l2);
    let mut per_step = f64::NEG_INFINITY;
    for k in 1..=n {
        let lhs = tau * obs[k].grad_p.to_f64_lossy();
        let rhs = 0.5 * (obs[k - 1].l2.to_f64_lossy().powi(2) - obs[k].l2.to_f64_lossy().powi(2));
        per_step = per_step.max(lhs - rhs);
    }
    if n == 0 {
        per_step = 0.0;
    }
    AprioriReport {
        slack_factor,
        lq_contraction: lq,
        energy_decay: energy,
        dissipation_bound: bound,
        per_step_dissipation: Verdict::new("per-step dissipation", per_step, tol * half_l2),
        dissipation_sum: sum,
    }
}

/// `s_k = int (u1_k - u2_k)^+ dv` along two trajectories.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonSeries {
    pub series: Vec<f64>,
    /// `s_k <= s_0 + slack` for all `k`.
    pub bounded: Verdict,
    /// `s_k <= s_{k-1} + slack` for all `k`.
    pub nonincreasing: Verdict,
}

impl ComparisonSeries {
    pub fn pass(&self) -> bool {
        self.bounded.pass && self.nonincreasing.pass
    }
}

pub fn compare<T: Real>(a: &Trajectory<T>, b: &Trajectory<T>) -> Result<ComparisonSeries> {
    compare_with(a, b, 10.0)
}

pub fn compare_with<T: Real>(a: &Trajectory<T>, b: &Trajectory<T>, slack_factor: f64) -> Result<ComparisonSeries> {
    let same_field = Arc::ptr_eq(&a.field, &b.field)
        || (a.field.grid().same_shape(b.field.grid())
            && a.field.cell_matrices() == b.field.cell_matrices()
            && a.field.node_weights() == b.field.node_weights());
    if !same_field {
        return Err(Error::IncompatibleTrajectories("different weight fields or grids".into()));
    }
    if a.p != b.p {
        return Err(Error::IncompatibleTrajectories(format!("p = {} vs {}", a.p, b.p)));
    }
    if a.times != b.times {
        return Err(Error::IncompatibleTrajectories("different time partitions".into()));
    }
    let mass = a.field.lumped_mass();
    let series: Vec<f64> = a
        .snapshots
        .iter()
        .zip(&b.snapshots)
        .map(|(x, y)| {
            let (x, y) = (x.values(), y.values());
            pairwise_sum_by(x.len(), |i| (x[i] - y[i]).max(T::zero()) * mass[i]).to_f64_lossy()
        })
        .collect();
    let scale = a.observables[0].l1.max(b.observables[0].l1).to_f64_lossy();
    let slack = slack_factor * a.grad_tol.max(b.grad_tol).to_f64_lossy() * scale;
    let s0 = series[0];
    let bounded = series.iter().map(|s| s - s0).fold(0.0, f64::max);
    Ok(ComparisonSeries {
        bounded: Verdict::new("comparison bounded by initial", bounded, slack),
        nonincreasing: Verdict::new("comparison nonincreasing", worst_increase(series.iter().copied()), slack),
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::initial::InitialDatum;
    use crate::weight_field::{build_field, WeightFamilySpec};

    fn heat(n: usize) -> (Arc<Grid<f64>>, Arc<MatrixWeightField<f64>>, GridFunction<f64>) {
        let g = Arc::new(Grid::unit(1, n).unwrap());
        let f = Arc::new(build_field(&WeightFamilySpec::Identity, g.clone()).unwrap());
        let u0 = InitialDatum::SineProduct { amplitude: 1.0 }.build(&g).unwrap();
        (g, f, u0)
    }

    #[test]
    fn zero_datum_stays_zero() {
        let (g, f, _) = heat(17);
        let z = GridFunction::zeros(g);
        let tr = evolve(&z, 1.0, 5, 1.5, &f, &InnerSolverConfig::default()).unwrap();
        assert_eq!(tr.snapshots().len(), 6);
        assert!(tr.snapshots().iter().all(|s| s.is_zero()));
        assert!(trajectory_checks(&tr).pass());
        let (_, rep) = refine_until_cauchy(&z, 1.0, 3.0, &f, &InnerSolverConfig::default(), 1e-6, 2, 64).unwrap();
        assert!(rep.converged && rep.distances == vec![0.0]);
    }

    #[test]
    fn evaluation_rules() {
        let (_, f, u0) = heat(33);
        let tr = evolve(&u0, 0.1, 4, 2.0, &f, &InnerSolverConfig::default()).unwrap();
        assert_eq!(tr.evaluate(0.0).unwrap(), u0);
        for k in 1..=4 {
            let t = tr.times()[k];
            assert_eq!(tr.evaluate(t).unwrap(), tr.snapshots()[k]);
            assert_eq!(tr.interpolant().evaluate(t).unwrap(), tr.snapshots()[k]);
            let mid = 0.5 * (tr.times()[k - 1] + t);
            assert_eq!(tr.evaluate(mid).unwrap(), tr.snapshots()[k]);
            let lin = tr.interpolant().evaluate(mid).unwrap();
            for (i, &x) in lin.values().iter().enumerate() {
                let avg = 0.5 * (tr.snapshots()[k - 1].values()[i] + tr.snapshots()[k].values()[i]);
                assert!((x - avg).abs() < 1e-15);
            }
        }
        assert!(matches!(tr.evaluate(0.2), Err(Error::OutOfRange { .. })));
        assert!(matches!(tr.evaluate(-1e-9), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn single_step_is_prox() {
        let (_, f, u0) = heat(33);
        let cfg = InnerSolverConfig::default();
        let tr = evolve(&u0, 0.3, 1, 3.0, &f, &cfg).unwrap();
        let direct = crate::prox::prox_step(&ProxProblem::new(&u0, 0.3, 3.0, &f), &cfg).unwrap();
        assert_eq!(tr.last(), &direct);
    }

    #[test]
    fn restart_is_bit_identical() {
        let (_, f, u0) = heat(65);
        let cfg = InnerSolverConfig::default();
        let full = evolve_steps(&u0, 0.01, 6, 1.5, &f, &cfg).unwrap();
        let a = evolve_steps(&u0, 0.01, 2, 1.5, &f, &cfg).unwrap();
        let b = evolve_steps(a.last(), 0.01, 4, 1.5, &f, &cfg).unwrap();
        assert_eq!(full.last(), b.last());
    }

    #[test]
    fn corrupted_snapshot_is_detected() {
        let (_, f, u0) = heat(33);
        let tr = evolve(&u0, 0.2, 8, 2.0, &f, &InnerSolverConfig::default()).unwrap();
        let rep = trajectory_checks(&tr);
        assert!(rep.pass(), "{rep:?}");
        let bad = tr.with_scaled_snapshot(4, 2.0).unwrap();
        let rep = trajectory_checks(&bad);
        assert!(rep.lq_contraction.iter().all(|v| !v.pass));
    }

    #[test]
    fn compare_rejects_mismatch() {
        let (_, f, u0) = heat(17);
        let cfg = InnerSolverConfig::default();
        let a = evolve(&u0, 0.1, 4, 2.0, &f, &cfg).unwrap();
        let b = evolve(&u0, 0.1, 5, 2.0, &f, &cfg).unwrap();
        assert!(matches!(compare(&a, &b), Err(Error::IncompatibleTrajectories(_))));
        let c = compare(&a, &a).unwrap();
        assert!(c.series.iter().all(|&s| s == 0.0) && c.pass());
    }
}
