//! Quantitative checks on computed trajectories: decay exponents and the
//! ultracontractive ratio, extinction for `p < 2`, Sobolev and Nash
//! constants, entropy and `L^r` dissipation inequalities.

mod inequalities;
mod sobolev;

pub use inequalities::{entropy_j, log_sobolev_gap, lr_dissipation_check, lr_dissipation_check_with, SeriesReport};
pub use sobolev::{
    estimate_sobolev, estimate_sobolev_with_probes, nash_check, nash_exponents, nash_probe_sup, sobolev_ratio,
    SobolevConfig, SobolevEstimate,
};

use crate::error::{Error, Result};
use crate::evolution::{Trajectory, Verdict};
use crate::grid::norm_lq_v;
use crate::scalar::Real;

/// `q0` used by the extinction bound when `q_c <= 1` and the supplied
/// decay parameters do not already carry a `q0` in `(1, 2)`.
pub const FALLBACK_Q0: f64 = 1.5;

/// Start of the decay-fit window as a fraction of the horizon.
pub const TRANSIENT_FRACTION: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayParameters {
    pub p: f64,
    pub q0: f64,
    pub sigma: f64,
    /// `sigma / (sigma - 1)`
    pub sigma_prime: f64,
    /// `sigma' (2 - p)`
    pub q_c: f64,
    pub beta: f64,
    pub gamma: f64,
}

pub fn conjugate(sigma: f64) -> f64 {
    sigma / (sigma - 1.0)
}

pub fn decay_parameters(p: f64, q0: f64, sigma: f64) -> Result<DecayParameters> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameters(format!("p = {p} must exceed 1")));
    }
    if !(sigma > 1.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameters(format!("sigma = {sigma} must exceed 1")));
    }
    if !(q0 >= 1.0 && q0.is_finite()) {
        return Err(Error::InvalidParameters(format!("q0 = {q0} must be at least 1")));
    }
    let sp = conjugate(sigma);
    let q_c = sp * (2.0 - p);
    if !(q0 > q_c) {
        return Err(Error::InvalidParameters(format!("q0 = {q0} must exceed q_c = {q_c}")));
    }
    let den = sp * (p - 2.0) + q0;
    Ok(DecayParameters {
        p,
        q0,
        sigma,
        sigma_prime: sp,
        q_c,
        beta: sp / den,
        gamma: q0 / den,
    })
}

/// `c(t) = |u(t)|_inf t^beta / |u0|_{q0}^gamma` along a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayFitReport {
    pub params: DecayParameters,
    pub window: (f64, f64),
    /// `(t_k, c(t_k))` for partition times inside the window.
    pub series: Vec<(f64, f64)>,
    pub sup_c: f64,
    pub sup_at: f64,
    /// Least-squares slope of `log |u|_inf` against `log t` on the window.
    pub slope: Option<f64>,
}

impl DecayFitReport {
    pub fn finite(&self) -> bool {
        self.sup_c.is_finite()
    }

    /// Relative change of `sup c` against another run, judged against `rel`.
    pub fn stability(&self, other: &Self, name: &str, rel: f64) -> Verdict {
        let change = (self.sup_c - other.sup_c).abs() / self.sup_c.max(other.sup_c);
        Verdict::new(name, change, rel)
    }
}

/// Decay fit on `[0.05 T, T]`.
pub fn ultracontractive_check<T: Real>(traj: &Trajectory<T>, params: &DecayParameters) -> Result<DecayFitReport> {
    let h = traj.horizon().to_f64_lossy();
    ultracontractive_check_window(traj, params, TRANSIENT_FRACTION * h, h)
}

pub fn ultracontractive_check_window<T: Real>(
    traj: &Trajectory<T>,
    params: &DecayParameters,
    t_lo: f64,
    t_hi: f64,
) -> Result<DecayFitReport> {
    if traj.p().to_f64_lossy() != params.p {
        return Err(Error::InvalidParameters(format!(
            "decay parameters are for p = {}, trajectory has p = {}",
            params.p,
            traj.p()
        )));
    }
    let u0 = norm_lq_v(traj.initial(), T::lit(params.q0), traj.field())?.to_f64_lossy();
    if u0 == 0.0 {
        return Err(Error::UndefinedRatio("initial datum is zero".into()));
    }
    let denom = u0.powf(params.gamma);
    let mut series = Vec::new();
    let (mut sup_c, mut sup_at) = (0.0f64, t_lo);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (t, o) in traj.times().iter().zip(traj.observables()) {
        let t = t.to_f64_lossy();
        if t <= 0.0 || t < t_lo || t > t_hi {
            continue;
        }
        let linf = o.linf.to_f64_lossy();
        let c = linf * t.powf(params.beta) / denom;
        if c > sup_c {
            sup_c = c;
            sup_at = t;
        }
        series.push((t, c));
        if linf > 0.0 {
            xs.push(t.ln());
            ys.push(linf.ln());
        }
    }
    Ok(DecayFitReport {
        params: *params,
        window: (t_lo, t_hi),
        series,
        sup_c,
        sup_at,
        slope: least_squares_slope(&xs, &ys),
    })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtinctionBranch {
    /// `q_c > 1`: Lyapunov function `|u|_{q_c}^{q_c}`.
    Primary,
    /// `q_c <= 1`: Lyapunov function `|u|_{q0}^{q0}` with the given `q0`.
    Fallback { q0: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtinctionResult {
    /// First partition time after which every sampled `|u|_inf` is below
    /// the threshold.
    pub t_ext: Option<f64>,
    pub threshold: f64,
    pub t0_bound: f64,
    pub branch: ExtinctionBranch,
    /// `h` (or `h_0` in the fallback branch).
    pub h: f64,
    /// `max(2, q_c)`
    pub m: f64,
    pub q_c: f64,
    pub m_p: f64,
    pub verdict: Verdict,
}

/// Extinction time bound
///
/// * `q_c > 1`: `T0 = h^p sigma' M^p |u0|_{q_c}^{q_c/sigma'} / (q_c (q_c - 1))`
///   with `h = (q_c + p - 2) / p`;
/// * otherwise, with `h0 = (q0 + p - 2) / p`,
///   `T0 = M^p h0^p v(Omega)^((q0 - q_c)/(q0 sigma')) |u0|_{q0}^(2-p) / ((2 - p)(q0 - 1))`,
///   which is what integrating `Y' <= -K Y^((q0+p-2)/q0)` gives.
///
/// `threshold` defaults to `1e-8 |u0|_inf`.
pub fn extinction_analysis<T: Real>(
    traj: &Trajectory<T>,
    params: &DecayParameters,
    m_p: f64,
    threshold: Option<f64>,
) -> Result<ExtinctionResult> {
    let p = params.p;
    if p >= 2.0 {
        return Err(Error::NotApplicable(format!("extinction needs p < 2 (p = {p})")));
    }
    if !(m_p > 0.0 && m_p.is_finite()) {
        return Err(Error::InvalidParameters(format!("Sobolev constant {m_p} must be positive")));
    }
    let field = traj.field();
    let linf0 = traj.observables()[0].linf.to_f64_lossy();
    let threshold = threshold.unwrap_or(1e-8 * linf0);
    let (sp, q_c) = (params.sigma_prime, params.q_c);
    let (branch, h, t0) = if q_c > 1.0 {
        let h = (q_c + p - 2.0) / p;
        let y = norm_lq_v(traj.initial(), T::lit(q_c), field)?.to_f64_lossy();
        let t0 = h.powf(p) * sp * m_p.powf(p) / (q_c * (q_c - 1.0)) * y.powf(q_c / sp);
        (ExtinctionBranch::Primary, h, t0)
    } else {
        let q0 = if params.q0 > 1.0 && params.q0 < 2.0 {
            params.q0
        } else {
            FALLBACK_Q0
        };
        let h0 = (q0 + p - 2.0) / p;
        let vol = field.total_mass().to_f64_lossy();
        let y = norm_lq_v(traj.initial(), T::lit(q0), field)?.to_f64_lossy();
        let t0 = m_p.powf(p) * h0.powf(p) * vol.powf((q0 - q_c) / (q0 * sp)) * y.powf(2.0 - p)
            / ((2.0 - p) * (q0 - 1.0));
        (ExtinctionBranch::Fallback { q0 }, h0, t0)
    };
    let mut t_ext = None;
    for (t, o) in traj.times().iter().zip(traj.observables()).rev() {
        if o.linf.to_f64_lossy() < threshold || linf0 == 0.0 {
            t_ext = Some(t.to_f64_lossy());
        } else {
            break;
        }
    }
    let slack = 10.0 * traj.grad_tol().to_f64_lossy();
    let excess = match t_ext {
        Some(t) if t == 0.0 => 0.0,
        Some(t) => t / t0 - 1.0,
        None => f64::INFINITY,
    };
    Ok(ExtinctionResult {
        t_ext,
        threshold,
        t0_bound: t0,
        branch,
        h,
        m: q_c.max(2.0),
        q_c,
        m_p,
        verdict: Verdict::new("extinction before bound", excess, slack),
    })
}

/// Errors of a 1D heat run against the discrete and continuum references.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeatComparison {
    /// `max_k |u_k - (1 + tau lambda_h)^-k u_0|_{L^2}`
    pub discrete: f64,
    /// `max_k |u_k - A exp(-pi^2 t_k / L^2) sin(pi (x - a) / L)|_{L^2}`
    pub continuum: f64,
    pub lambda_h: f64,
}

/// Heat-equation reference for `p = 2`, `Q = I`, `v = 1` on an interval
/// with `u0 = A sin(pi (x - a) / L)`.
pub fn heat_comparison<T: Real>(traj: &Trajectory<T>, amplitude: f64) -> Result<HeatComparison> {
    let field = traj.field();
    let grid = field.grid();
    let identity = field
        .cell_matrices()
        .iter()
        .all(|m| m.get(0, 0) == T::one())
        && field.node_weights().iter().all(|&v| v == T::one());
    if grid.dim() != 1 || traj.p() != T::lit(2.0) || !identity {
        return Err(Error::NotApplicable(
            "heat reference needs a 1D run with p = 2, Q = 1 and v = 1".into(),
        ));
    }
    let (a, b) = (grid.lower()[0].to_f64_lossy(), grid.upper()[0].to_f64_lossy());
    let len = b - a;
    let h = grid.spacing()[0].to_f64_lossy();
    let lambda_h = 4.0 / (h * h) * (std::f64::consts::PI * h / (2.0 * len)).sin().powi(2);
    let lambda = (std::f64::consts::PI / len).powi(2);
    let tau = traj.tau().to_f64_lossy();
    let mass = field.lumped_mass();
    let shape: Vec<f64> = (0..grid.num_nodes())
        .map(|i| {
            if grid.is_boundary(i) {
                0.0
            } else {
                let x = grid.node_coords(i)[0].to_f64_lossy();
                (std::f64::consts::PI * (x - a) / len).sin()
            }
        })
        .collect();
    let u0 = traj.initial().values();
    let (mut discrete, mut continuum) = (0.0f64, 0.0f64);
    for (k, (u, t)) in traj.snapshots().iter().zip(traj.times()).enumerate() {
        let damp = (1.0 + tau * lambda_h).powi(-(k as i32));
        let exact = amplitude * (-lambda * t.to_f64_lossy()).exp();
        let (mut ed, mut ec) = (0.0, 0.0);
        for (i, &x) in u.values().iter().enumerate() {
            let (x, m) = (x.to_f64_lossy(), mass[i].to_f64_lossy());
            ed += m * (x - damp * u0[i].to_f64_lossy()).powi(2);
            ec += m * (x - exact * shape[i]).powi(2);
        }
        discrete = discrete.max(ed.sqrt());
        continuum = continuum.max(ec.sqrt());
    }
    Ok(HeatComparison {
        discrete,
        continuum,
        lambda_h,
    })
}
