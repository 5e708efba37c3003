//! Entropy functional, the logarithmic Sobolev gap and the per-step
//! `L^r` dissipation inequality.

use crate::error::{Error, Result};
use crate::evolution::{Trajectory, Verdict};
use crate::grid::{gradient_p_integral, norm_lq_v_values, GridFunction};
use crate::scalar::{pairwise_sum_by, Real};
use crate::weight_field::MatrixWeightField;

/// `J_v(h, f) = int (|f|^h / |f|_h^h) log(|f| / |f|_h) dv`, with `0 log 0 = 0`.
pub fn entropy_j<T: Real>(f: &GridFunction<T>, h: f64, field: &MatrixWeightField<T>) -> Result<f64> {
    if !(h >= 1.0 && h.is_finite()) {
        return Err(Error::InvalidExponent(format!("h = {h} must be at least 1")));
    }
    let norm = norm_lq_v_values(f.values(), T::lit(h), field)?.to_f64_lossy();
    if norm == 0.0 {
        return Err(Error::UndefinedRatio("entropy of the zero function".into()));
    }
    let mass = field.lumped_mass();
    let v = f.values();
    Ok(pairwise_sum_by(v.len(), |i| {
        let x = v[i].abs().to_f64_lossy() / norm;
        if x == 0.0 {
            0.0
        } else {
            x.powf(h) * x.ln() * mass[i].to_f64_lossy()
        }
    }))
}

/// Left side minus right side of
/// `J_v(r, f) <= sigma / (sigma p - r) (eps M^p |grad f|_p^p / |f|_r^p - log eps)`.
/// Nonpositive whenever `m_p` is at least the Sobolev constant.
pub fn log_sobolev_gap<T: Real>(
    f: &GridFunction<T>,
    r: f64,
    eps: f64,
    sigma: f64,
    m_p: f64,
    p: f64,
    field: &MatrixWeightField<T>,
) -> Result<f64> {
    crate::prox::check_p(p)?;
    if !(r >= 1.0 && r < sigma * p) {
        return Err(Error::InvalidParameters(format!("r = {r} must lie in [1, sigma p)")));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameters(format!("eps = {eps} must be positive")));
    }
    let lhs = entropy_j(f, r, field)?;
    let fr = norm_lq_v_values(f.values(), T::lit(r), field)?.to_f64_lossy();
    let grad = gradient_p_integral(f.values(), T::lit(p), field).to_f64_lossy();
    let rhs = sigma / (sigma * p - r) * (eps * m_p.powf(p) * grad / fr.powf(p) - eps.ln());
    Ok(lhs - rhs)
}

/// Per-step discrete `L^r` dissipation along a nonnegative trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesReport {
    pub r: f64,
    /// `(|u_k|_r^r - |u_{k-1}|_r^r) / tau` for `k = 1..n`.
    pub lhs: Vec<f64>,
    /// `-r (r-1) (p / (r+p-2))^p int |sqrt(Q) grad u_k^((r+p-2)/p)|^p`.
    pub rhs: Vec<f64>,
    /// Allowed excess per step.
    pub slack: Vec<f64>,
    pub verdict: Verdict,
}

/// Checks `lhs_k <= rhs_k + slack_k` at every step.
///
/// The slack bounds what an inexact inner solve can contribute:
/// `factor * grad_tol * (r |u_k^(r-1)|_2 |u_k - u_{k-1}|_2 / tau + |rhs_k|)`.
/// Snapshot values below `-factor * grad_tol * |u_0|_inf` make the run
/// invalid; smaller negative round-off is clamped to zero.
pub fn lr_dissipation_check<T: Real>(traj: &Trajectory<T>, r: f64) -> Result<SeriesReport> {
    lr_dissipation_check_with(traj, r, 10.0)
}

pub fn lr_dissipation_check_with<T: Real>(traj: &Trajectory<T>, r: f64, factor: f64) -> Result<SeriesReport> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(Error::InvalidParameters(format!("r = {r} must be at least 1")));
    }
    let field = traj.field();
    let p = traj.p().to_f64_lossy();
    let tau = traj.tau().to_f64_lossy();
    let tol = factor * traj.grad_tol().to_f64_lossy();
    let floor = -tol * traj.observables()[0].linf.to_f64_lossy();
    let mass: Vec<f64> = field.lumped_mass().iter().map(|m| m.to_f64_lossy()).collect();
    let mut snaps = Vec::with_capacity(traj.snapshots().len());
    for (k, s) in traj.snapshots().iter().enumerate() {
        let vals: Vec<f64> = s.values().iter().map(|x| x.to_f64_lossy()).collect();
        if let Some(x) = vals.iter().find(|&&x| x < floor) {
            return Err(Error::InvalidRun(format!("snapshot {k} has negative value {x:e}")));
        }
        snaps.push(vals.into_iter().map(|x| x.max(0.0)).collect::<Vec<f64>>());
    }
    let lr = |u: &[f64]| pairwise_sum_by(u.len(), |i| if u[i] == 0.0 { 0.0 } else { u[i].powf(r) * mass[i] });
    let l2 = |u: &[f64]| pairwise_sum_by(u.len(), |i| u[i] * u[i] * mass[i]).sqrt();
    let hexp = (r + p - 2.0) / p;
    let coef = r * (r - 1.0) * (p / (r + p - 2.0)).powf(p);
    let (mut lhs, mut rhs, mut slack) = (Vec::new(), Vec::new(), Vec::new());
    let mut worst = f64::NEG_INFINITY;
    for k in 1..snaps.len() {
        let (prev, cur) = (&snaps[k - 1], &snaps[k]);
        let l = (lr(cur) - lr(prev)) / tau;
        let rh = if coef == 0.0 {
            0.0
        } else {
            let w: Vec<T> = cur
                .iter()
                .map(|&x| T::lit(if x == 0.0 { 0.0 } else { x.powf(hexp) }))
                .collect();
            -coef * gradient_p_integral(&w, T::lit(p), field).to_f64_lossy()
        };
        let pw: Vec<f64> = cur.iter().map(|&x| if x == 0.0 { 0.0 } else { x.powf(r - 1.0) }).collect();
        let diff: Vec<f64> = cur.iter().zip(prev).map(|(a, b)| a - b).collect();
        let s = tol * (r * l2(&pw) * l2(&diff) / tau + rh.abs());
        worst = worst.max(l - rh - s);
        lhs.push(l);
        rhs.push(rh);
        slack.push(s);
    }
    if lhs.is_empty() {
        worst = 0.0;
    }
    // per-step slacks are folded into the excess, so the verdict slack is 0
    Ok(SeriesReport {
        r,
        lhs,
        rhs,
        slack,
        verdict: Verdict::new(format!("L{r} dissipation"), worst, 0.0),
    })
}
