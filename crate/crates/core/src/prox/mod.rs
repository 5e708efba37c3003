//! One implicit Euler step: the proximal map of the weighted p-Dirichlet
//! energy in `L^2_v`,
//!
//! ```text
//! u_next = argmin_u  (1/p) sum |sqrt(Q) grad u|^p dx + (1/(2 tau)) |u - u_prev|^2_{L^2_v}
//! ```
//!
//! over grid functions vanishing on the boundary.
//!
//! `p = 2` is a linear solve. Otherwise the minimizer is found by
//! preconditioned Polak-Ribiere conjugate gradients; for `p < 2` the
//! integrand is smoothed to `(|sqrt(Q) g|^2 + delta^2)^(p/2)` and `delta` is
//! driven down geometrically, each stage warm-started from the last.
//!
//! Internally the datum is rescaled to unit max-norm (with `tau` rescaled by
//! `s^(p-2)`), and the smoothing parameter is measured relative to the
//! gradient scale of the rescaled datum. Both make the scheme exactly
//! covariant under `u -> s u`.

pub mod assembly;
mod simon;

pub use assembly::Discretization;
pub use simon::{simon_check, simon_sides, SimonConstant, SimonReport};

use crate::error::{Error, Result};
use crate::grid::{gradient_of_values, CellVectorField, GridFunction};
use crate::linalg::{SymMatrix, MAX_DIM};
use crate::scalar::{pairwise_sum_by, Real};
use crate::sparse::{conjugate_gradient, solve_tridiagonal, CsrMatrix};
use crate::weight_field::MatrixWeightField;

/// Tolerances and schedules for the inner minimization.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerSolverConfig<T> {
    /// Relative first-order residual at which the last stage stops.
    pub grad_tol: T,
    /// Residual at which intermediate smoothing stages stop.
    pub stage_tol: T,
    /// Relative energy decrease treated as round-off when a line search
    /// cannot make progress.
    pub energy_tol: T,
    /// Iteration cap per smoothing stage.
    pub max_iter: usize,
    /// First smoothing parameter, relative to the gradient scale.
    pub delta_start: T,
    pub delta_factor: T,
    /// Last smoothing parameter, relative to the gradient scale.
    pub delta_floor: T,
    pub armijo: T,
    pub backtrack: T,
    pub max_backtracks: usize,
    /// Symmetric Gauss-Seidel sweeps per preconditioner application (N >= 2).
    pub smoothing_sweeps: usize,
    /// Restart the conjugate directions after this many iterations.
    pub restart_every: usize,
    /// Relative residual for the linear solve at `p = 2`.
    pub linear_tol: T,
    /// Route `p = 2` through the nonlinear solver as well.
    pub force_nonlinear: bool,
}

impl<T: Real> Default for InnerSolverConfig<T> {
    fn default() -> Self {
        Self {
            grad_tol: T::lit(1e-9),
            stage_tol: T::lit(1e-5),
            energy_tol: T::lit(1e-15),
            max_iter: 5000,
            delta_start: T::lit(1e-2),
            delta_factor: T::lit(0.1),
            delta_floor: T::lit(1e-8),
            armijo: T::lit(1e-4),
            backtrack: T::lit(0.5),
            max_backtracks: 60,
            smoothing_sweeps: 4,
            restart_every: 50,
            linear_tol: T::lit(1e-12),
            force_nonlinear: false,
        }
    }
}

impl<T: Real> InnerSolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("grad_tol", self.grad_tol),
            ("stage_tol", self.stage_tol),
            ("energy_tol", self.energy_tol),
            ("delta_start", self.delta_start),
            ("delta_floor", self.delta_floor),
            ("armijo", self.armijo),
            ("linear_tol", self.linear_tol),
        ];
        for (name, x) in positive {
            if !(x > T::zero() && x.is_finite()) {
                return Err(Error::InvalidParameters(format!("{name} must be positive")));
            }
        }
        for (name, x) in [("delta_factor", self.delta_factor), ("backtrack", self.backtrack)] {
            if !(x > T::zero() && x < T::one()) {
                return Err(Error::InvalidParameters(format!("{name} must lie in (0, 1)")));
            }
        }
        if self.armijo >= T::lit(0.5) {
            return Err(Error::InvalidParameters("armijo must be below 1/2".into()));
        }
        if self.max_iter == 0 || self.restart_every == 0 {
            return Err(Error::InvalidParameters("iteration counts must be positive".into()));
        }
        Ok(())
    }
}

/// Data of one proximal step.
#[derive(Clone, Copy, Debug)]
pub struct ProxProblem<'a, T> {
    pub u_prev: &'a GridFunction<T>,
    pub tau: T,
    pub p: T,
    pub field: &'a MatrixWeightField<T>,
    /// Extra smoothing floor in absolute gradient units (usually 0).
    pub delta: T,
}

impl<'a, T: Real> ProxProblem<'a, T> {
    pub fn new(u_prev: &'a GridFunction<T>, tau: T, p: T, field: &'a MatrixWeightField<T>) -> Self {
        Self {
            u_prev,
            tau,
            p,
            field,
            delta: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > T::zero() && self.tau.is_finite()) {
            return Err(Error::InvalidParameters(format!("tau = {} must be positive", self.tau)));
        }
        check_p(self.p)?;
        if !(self.delta >= T::zero() && self.delta.is_finite()) {
            return Err(Error::InvalidParameters("delta must be >= 0".into()));
        }
        if !self.u_prev.grid().same_shape(self.field.grid()) {
            return Err(Error::GridMismatch);
        }
        if let Some(node) = (0..self.u_prev.values().len())
            .find(|&i| self.u_prev.grid().is_boundary(i) && self.u_prev.values()[i] != T::zero())
        {
            return Err(Error::BoundaryViolation { node });
        }
        Ok(())
    }
}

pub(crate) fn check_p<T: Real>(p: T) -> Result<()> {
    if !(p > T::one() && p.is_finite()) {
        return Err(Error::InvalidExponent(format!("p = {p} must lie in (1, inf)")));
    }
    Ok(())
}

/// What the inner solver did.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProxStats {
    pub iterations: usize,
    pub stages: usize,
    /// Final relative first-order residual.
    pub residual: f64,
    /// Smoothing parameter of the last stage, in gradient units of the input.
    pub final_delta: f64,
    /// Largest energy change over accepted line-search steps (never positive).
    pub max_energy_change: f64,
    pub linear: bool,
}

/// Reusable solver bound to one weight field.
#[derive(Clone, Debug)]
pub struct ProxSolver<'a, T> {
    disc: Discretization<'a, T>,
    cfg: InnerSolverConfig<T>,
}

struct Samples<T> {
    /// `|sqrt(Q) g|^2 + delta^2`
    s: Vec<T>,
    coef: Vec<T>,
    /// `Q g`
    qg: CellVectorField<T>,
}

struct StageOutcome {
    iterations: usize,
    residual: f64,
    max_change: f64,
}

impl<'a, T: Real> ProxSolver<'a, T> {
    pub fn new(field: &'a MatrixWeightField<T>, cfg: InnerSolverConfig<T>) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            disc: Discretization::new(field),
            cfg,
        })
    }

    pub fn config(&self) -> &InnerSolverConfig<T> {
        &self.cfg
    }

    pub fn field(&self) -> &'a MatrixWeightField<T> {
        self.disc.field
    }

    pub fn solve(&self, problem: &ProxProblem<'_, T>) -> Result<(GridFunction<T>, ProxStats)> {
        problem.validate()?;
        if !std::ptr::eq(problem.field, self.disc.field) {
            return Err(Error::InvalidParameters("problem uses a different weight field than the solver".into()));
        }
        let f = problem.u_prev.values();
        let grid = problem.u_prev.grid().clone();
        let scale = problem.u_prev.max_abs();
        if scale == T::zero() {
            return Ok((GridFunction::zeros(grid), ProxStats::default()));
        }
        let p = problem.p;
        let inv_s = T::one() / scale;
        let fh: Vec<T> = f.iter().map(|&x| x * inv_s).collect();
        let tau_h = problem.tau * scale.powf(p - T::lit(2.0));
        let delta_h = problem.delta * inv_s;
        if !tau_h.is_finite() || tau_h <= T::zero() {
            return Err(Error::NumericalBreakdown("rescaled step size out of range".into()));
        }

        let (xh, mut stats) = if p == T::lit(2.0) && !self.cfg.force_nonlinear && delta_h == T::zero() {
            (self.solve_linear(&fh, tau_h)?, ProxStats {
                linear: true,
                ..ProxStats::default()
            })
        } else {
            self.solve_nonlinear(&fh, tau_h, p, delta_h)?
        };
        stats.final_delta *= scale.to_f64_lossy();
        let values: Vec<T> = xh.iter().map(|&x| x * scale).collect();
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NumericalBreakdown("non-finite iterate".into()));
        }
        Ok((GridFunction::from_all_nodes(grid, values), stats))
    }

    fn solve_linear(&self, f: &[T], tau: T) -> Result<Vec<T>> {
        let inv_tau = T::one() / tau;
        let a = self.disc.linear_operator(inv_tau);
        let fd = self.disc.gather(f);
        let rhs: Vec<T> = fd
            .iter()
            .zip(self.disc.dof_mass())
            .map(|(&x, &m)| x * m * inv_tau)
            .collect();
        let x = if self.disc.grid().dim() == 1 {
            let (lo, di, up) = a.tridiagonal_bands().expect("one-dimensional operator is tridiagonal");
            solve_tridiagonal(&lo, &di, &up, &rhs)
        } else {
            let mut x = fd;
            let n = x.len();
            let out = conjugate_gradient(&a, &rhs, &mut x, self.cfg.linear_tol, 20 * n + 1000);
            log::debug!(
                "linear prox: {} CG iterations, residual {:e}",
                out.iterations,
                out.relative_residual
            );
            if out.relative_residual > self.cfg.linear_tol {
                return Err(Error::NonConvergence {
                    residual: out.relative_residual.to_f64_lossy(),
                    iterations: out.iterations,
                    step: None,
                });
            }
            x
        };
        Ok(self.disc.scatter(&x))
    }

    fn gradient_scale(&self, f: &[T]) -> T {
        let grid = self.disc.grid();
        let g = gradient_of_values(grid, f);
        let mut m = T::zero();
        for c in 0..grid.num_cells() {
            let q = self.disc.field.cell_matrix(c);
            for k in 0..grid.quad_points() {
                let s = g.sample(c, k);
                m = m.max(q.bilinear(s, s));
            }
        }
        let m = m.sqrt();
        if m > T::zero() && m.is_finite() {
            m
        } else {
            T::one()
        }
    }

    fn solve_nonlinear(&self, f: &[T], tau: T, p: T, delta_abs: T) -> Result<(Vec<T>, ProxStats)> {
        let cfg = &self.cfg;
        let mut deltas = Vec::new();
        if p < T::lit(2.0) {
            let gs = self.gradient_scale(f);
            let floor = cfg.delta_floor * gs;
            let mut d = cfg.delta_start * gs;
            while d > floor * T::lit(1.000001) {
                deltas.push(d.max(delta_abs));
                d *= cfg.delta_factor;
            }
            deltas.push(floor.max(delta_abs));
            deltas.dedup();
        } else {
            deltas.push(delta_abs);
        }
        let mut x = f.to_vec();
        let mut stats = ProxStats {
            max_energy_change: f64::NEG_INFINITY,
            ..ProxStats::default()
        };
        let last = deltas.len() - 1;
        for (k, &delta) in deltas.iter().enumerate() {
            let tol = if k == last { cfg.grad_tol } else { cfg.stage_tol.max(cfg.grad_tol) };
            let out = self.minimize(f, tau, p, delta, &mut x, tol)?;
            log::debug!(
                "prox stage {k}: delta {:e}, {} iterations, residual {:e}",
                delta,
                out.iterations,
                out.residual
            );
            stats.iterations += out.iterations;
            stats.stages += 1;
            stats.residual = out.residual;
            stats.final_delta = delta.to_f64_lossy();
            stats.max_energy_change = stats.max_energy_change.max(out.max_change);
        }
        if stats.max_energy_change == f64::NEG_INFINITY {
            stats.max_energy_change = 0.0;
        }
        Ok((x, stats))
    }

    fn sample_data(&self, x: &[T], p: T, delta: T) -> Result<Samples<T>> {
        let grid = self.disc.grid();
        let dim = grid.dim();
        let g = self.disc.samples(x);
        let pts = grid.quad_points();
        let n = grid.num_cells() * pts;
        let half = (p - T::lit(2.0)) * T::lit(0.5);
        let d2 = delta * delta;
        let mut s = Vec::with_capacity(n);
        let mut coef = Vec::with_capacity(n);
        let mut qg = CellVectorField::zeros(grid);
        for c in 0..grid.num_cells() {
            let qm = self.disc.field.cell_matrix(c);
            for k in 0..pts {
                let gk = g.sample(c, k);
                let v = qm.mul_vec(gk);
                let mut sk = d2;
                for d in 0..dim {
                    sk += gk[d] * v[d];
                }
                let sk = sk.max(T::zero());
                let ck = power_coef(sk, p, half)?;
                qg.sample_mut(c, k).copy_from_slice(&v[..dim]);
                s.push(sk);
                coef.push(ck);
            }
        }
        Ok(Samples { s, coef, qg })
    }

    /// Preconditioner matrix: the Hessian of the smoothed objective.
    fn hessian(&self, smp: &Samples<T>, p: T, inv_tau: T) -> CsrMatrix<T> {
        let pts = self.disc.grid().quad_points();
        let dim = self.disc.grid().dim();
        let pm2 = p - T::lit(2.0);
        self.disc.assemble(inv_tau, |c, q| {
            let k = c * pts + q;
            let qm = self.disc.field.cell_matrix(c);
            let (s, cf) = (smp.s[k], smp.coef[k]);
            let v = smp.qg.sample(c, q);
            let mut upper = [T::zero(); 6];
            let mut t = 0;
            for i in 0..dim {
                for j in i..dim {
                    let rank1 = if s > T::zero() { pm2 * v[i] * v[j] / s } else { T::zero() };
                    upper[t] = cf * (qm.get(i, j) + rank1);
                    t += 1;
                }
            }
            SymMatrix::from_upper(dim, &upper[..t])
        })
    }

    fn precondition(&self, a: &CsrMatrix<T>, r: &[T]) -> Vec<T> {
        let rd = self.disc.gather(r);
        let z = if self.disc.grid().dim() == 1 {
            let (lo, di, up) = a.tridiagonal_bands().expect("one-dimensional operator is tridiagonal");
            solve_tridiagonal(&lo, &di, &up, &rd)
        } else {
            a.sgs_sweeps(&rd, self.cfg.smoothing_sweeps.max(1))
        };
        self.disc.scatter(&z)
    }

    fn minimize(&self, f: &[T], tau: T, p: T, delta: T, x: &mut [T], tol: T) -> Result<StageOutcome> {
        let cfg = &self.cfg;
        let grid = self.disc.grid();
        let dim = grid.dim();
        let pts = grid.quad_points();
        let nsamp = grid.num_cells() * pts;
        let mass = self.disc.field.lumped_mass();
        let nodes = self.disc.node_of_dof();
        let w = self.disc.quad_weight();
        let inv_tau = T::one() / tau;
        let half = (p - T::lit(2.0)) * T::lit(0.5);
        let half_p = p * T::lit(0.5);
        let inv_p = T::one() / p;

        let mut prev: Option<(Vec<T>, Vec<T>, Vec<T>)> = None;
        let mut since_restart = 0usize;
        let mut max_change = f64::NEG_INFINITY;
        let mut last_res = f64::NAN;

        for it in 0..=cfg.max_iter {
            let smp = self.sample_data(x, p, delta)?;
            let mut flux = smp.qg.clone();
            for c in 0..grid.num_cells() {
                for q in 0..pts {
                    let cf = smp.coef[c * pts + q];
                    flux.sample_mut(c, q).iter_mut().for_each(|y| *y *= cf);
                }
            }
            let div = self.disc.divergence(&flux);
            let mut grad = vec![T::zero(); x.len()];
            for &n in nodes {
                grad[n] = div[n] + mass[n] * (x[n] - f[n]) * inv_tau;
            }
            let mnorm = |v: &dyn Fn(usize) -> T| pairwise_sum_by(nodes.len(), |k| {
                let n = nodes[k];
                let y = v(n);
                y * y / mass[n]
            })
            .sqrt();
            let num = mnorm(&|n| grad[n]);
            let den = mnorm(&|n| mass[n] * (x[n] - f[n]) * inv_tau) + mnorm(&|n| div[n]);
            let res = if den > T::zero() { num / den } else { T::zero() };
            if !res.is_finite() {
                return Err(Error::NumericalBreakdown("non-finite gradient in inner solver".into()));
            }
            last_res = res.to_f64_lossy();
            log::trace!("  iter {it}: residual {:e}", res);
            if res <= tol {
                return Ok(StageOutcome {
                    iterations: it,
                    residual: last_res,
                    max_change,
                });
            }
            if it == cfg.max_iter {
                break;
            }

            let hess = self.hessian(&smp, p, inv_tau);
            let z = self.precondition(&hess, &grad);
            let gz = dot_nodes(nodes, &grad, &z);
            let mut dir: Vec<T> = z.iter().map(|&v| -v).collect();
            if let Some((gp, zp, dp)) = &prev {
                if since_restart < cfg.restart_every {
                    let gzp = dot_nodes(nodes, gp, zp);
                    let beta = ((gz - dot_nodes(nodes, &z, gp)) / gzp).max(T::zero());
                    if beta.is_finite() && beta > T::zero() {
                        for &n in nodes {
                            dir[n] += beta * dp[n];
                        }
                        since_restart += 1;
                    } else {
                        since_restart = 0;
                    }
                } else {
                    since_restart = 0;
                }
            }
            if dot_nodes(nodes, &grad, &dir) >= T::zero() {
                dir = z.iter().map(|&v| -v).collect();
                since_restart = 0;
            }

            // One-dimensional restriction phi(a) = F(x + a dir) - F(x).
            let gd = self.disc.samples(&dir);
            let mut b = Vec::with_capacity(nsamp);
            let mut cc = Vec::with_capacity(nsamp);
            for c in 0..grid.num_cells() {
                let qm = self.disc.field.cell_matrix(c);
                for q in 0..pts {
                    let v = smp.qg.sample(c, q);
                    let dq = gd.sample(c, q);
                    let mut bk = T::zero();
                    for d in 0..dim {
                        bk += v[d] * dq[d];
                    }
                    b.push(bk);
                    cc.push(qm.bilinear(dq, dq).max(T::zero()));
                }
            }
            let e_lin = pairwise_sum_by(nodes.len(), |k| {
                let n = nodes[k];
                mass[n] * (x[n] - f[n]) * dir[n]
            }) * inv_tau;
            let e_quad = pairwise_sum_by(nodes.len(), |k| {
                let n = nodes[k];
                mass[n] * dir[n] * dir[n]
            }) * inv_tau;
            let s = &smp.s;
            let dphi = |a: T| -> T {
                pairwise_sum_by(nsamp, |k| {
                    let snew = (s[k] + a * (b[k] + b[k] + a * cc[k])).max(T::zero());
                    let slope = b[k] + a * cc[k];
                    if slope == T::zero() {
                        return T::zero();
                    }
                    power_coef(snew, p, half).unwrap_or(T::infinity()) * slope * w
                }) + e_lin
                    + a * e_quad
            };
            let phi = |a: T| -> T {
                pairwise_sum_by(nsamp, |k| {
                    let t = a * (b[k] + b[k] + a * cc[k]);
                    let term = if s[k] > T::zero() {
                        s[k].powf(half_p) * (half_p * (t / s[k]).max(-T::one()).ln_1p()).exp_m1()
                    } else if t > T::zero() {
                        t.powf(half_p)
                    } else {
                        T::zero()
                    };
                    term * w * inv_p
                }) + a * e_lin
                    + T::lit(0.5) * a * a * e_quad
            };

            let d0 = dphi(T::zero());
            if !(d0 < T::zero()) {
                // No descent left at working precision.
                if res <= tol * T::lit(100.0) {
                    return Ok(StageOutcome {
                        iterations: it,
                        residual: last_res,
                        max_change,
                    });
                }
                prev = None;
                since_restart = 0;
                continue;
            }
            let alpha = line_root(&dphi, d0);
            let mut a = alpha;
            let mut val = phi(a);
            let mut tries = 0;
            while !(val <= cfg.armijo * a * d0) && tries < cfg.max_backtracks {
                a *= cfg.backtrack;
                val = phi(a);
                tries += 1;
            }
            if !val.is_finite() {
                return Err(Error::NumericalBreakdown("non-finite energy in line search".into()));
            }
            if !(val <= cfg.armijo * a * d0) {
                let fscale = pairwise_sum_by(nodes.len(), |k| {
                    let n = nodes[k];
                    mass[n] * f[n] * f[n]
                }) * inv_tau;
                if res <= tol * T::lit(100.0) || val.abs() <= cfg.energy_tol * fscale {
                    log::debug!("line search stalled at residual {:e}; accepting", res);
                    return Ok(StageOutcome {
                        iterations: it,
                        residual: last_res,
                        max_change,
                    });
                }
                return Err(Error::NonConvergence {
                    residual: last_res,
                    iterations: it,
                    step: None,
                });
            }
            for &n in nodes {
                x[n] += a * dir[n];
            }
            max_change = max_change.max(val.to_f64_lossy());
            prev = Some((grad, z, dir));
        }
        Err(Error::NonConvergence {
            residual: last_res,
            iterations: cfg.max_iter,
            step: None,
        })
    }
}

/// `s^((p-2)/2)` with the limits at `s = 0`.
#[inline]
fn power_coef<T: Real>(s: T, p: T, half: T) -> Result<T> {
    if s > T::zero() {
        Ok(s.powf(half))
    } else if p == T::lit(2.0) {
        Ok(T::one())
    } else if p > T::lit(2.0) {
        Ok(T::zero())
    } else {
        Err(Error::NumericalBreakdown(
            "vanishing gradient without smoothing for p < 2".into(),
        ))
    }
}

fn dot_nodes<T: Real>(nodes: &[usize], a: &[T], b: &[T]) -> T {
    pairwise_sum_by(nodes.len(), |k| a[nodes[k]] * b[nodes[k]])
}

/// Approximate minimizer of a convex `phi` from its increasing derivative.
fn line_root<T: Real>(dphi: &dyn Fn(T) -> T, d0: T) -> T {
    let (mut lo, mut flo) = (T::zero(), d0);
    let (mut hi, mut fhi) = (T::one(), dphi(T::one()));
    let mut expand = 0;
    while fhi < T::zero() && expand < 60 {
        lo = hi;
        flo = fhi;
        hi = hi + hi;
        fhi = dphi(hi);
        expand += 1;
    }
    if !(fhi > T::zero()) {
        return if fhi.is_finite() { hi } else { lo.max(T::lit(1e-3)) };
    }
    let target = T::lit(0.1) * d0.abs();
    if fhi <= target && hi == T::one() {
        return hi;
    }
    // Illinois regula falsi on [lo, hi].
    let mut side = 0i8;
    let mut a = hi;
    for _ in 0..40 {
        let mut c = hi - fhi * (hi - lo) / (fhi - flo);
        if !(c > lo && c < hi) {
            c = T::lit(0.5) * (lo + hi);
        }
        let fc = dphi(c);
        a = c;
        if !fc.is_finite() {
            hi = c;
            fhi = T::infinity();
            continue;
        }
        if fc.abs() <= target {
            break;
        }
        if fc < T::zero() {
            lo = c;
            flo = fc;
            if side == -1 {
                fhi *= T::lit(0.5);
            }
            side = -1;
        } else {
            hi = c;
            fhi = fc;
            if side == 1 {
                flo *= T::lit(0.5);
            }
            side = 1;
        }
    }
    a
}

/// Solves one implicit Euler step.
pub fn prox_step<T: Real>(problem: &ProxProblem<'_, T>, cfg: &InnerSolverConfig<T>) -> Result<GridFunction<T>> {
    prox_step_with_stats(problem, cfg).map(|(u, _)| u)
}

pub fn prox_step_with_stats<T: Real>(
    problem: &ProxProblem<'_, T>,
    cfg: &InnerSolverConfig<T>,
) -> Result<(GridFunction<T>, ProxStats)> {
    ProxSolver::new(problem.field, cfg.clone())?.solve(problem)
}

/// `(id + d D_p)^{-1} f`: the proximal step with `tau = 1`.
pub fn resolvent<T: Real>(
    f: &GridFunction<T>,
    field: &MatrixWeightField<T>,
    p: T,
    cfg: &InnerSolverConfig<T>,
) -> Result<GridFunction<T>> {
    prox_step(&ProxProblem::new(f, T::one(), p, field), cfg)
}

/// Left side of the discrete weak form tested against `phi`:
/// `tau * sum |sqrt(Q) grad u|^(p-2) Q grad u . grad phi dx + sum (u - u_prev) phi dv`.
pub fn weak_residual<T: Real>(
    u_next: &GridFunction<T>,
    u_prev: &GridFunction<T>,
    tau: T,
    phi: &GridFunction<T>,
    field: &MatrixWeightField<T>,
    p: T,
) -> Result<T> {
    check_p(p)?;
    let grid = field.grid();
    for g in [u_next.grid(), u_prev.grid(), phi.grid()] {
        if !g.same_shape(grid) {
            return Err(Error::GridMismatch);
        }
    }
    let gu = gradient_of_values(grid, u_next.values());
    let gp = gradient_of_values(grid, phi.values());
    let pts = grid.quad_points();
    let dim = grid.dim();
    let w = grid.quad_weight();
    let half = (p - T::lit(2.0)) * T::lit(0.5);
    let flux_term = pairwise_sum_by(grid.num_cells() * pts, |k| {
        let (c, q) = (k / pts, k % pts);
        let g = gu.sample(c, q);
        let qg: [T; MAX_DIM] = field.cell_matrix(c).mul_vec(g);
        let mut s = T::zero();
        let mut dotp = T::zero();
        for d in 0..dim {
            s += g[d] * qg[d];
            dotp += qg[d] * gp.sample(c, q)[d];
        }
        if s > T::zero() {
            s.powf(half) * dotp * w
        } else {
            T::zero()
        }
    });
    let mass = field.lumped_mass();
    let (u, f, ph) = (u_next.values(), u_prev.values(), phi.values());
    let mass_term = pairwise_sum_by(u.len(), |i| (u[i] - f[i]) * ph[i] * mass[i]);
    Ok(tau * flux_term + mass_term)
}
