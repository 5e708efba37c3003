//! Discrete Sobolev constant `sup |u|_{L^{sigma p}_v} / |sqrt(Q) grad u|_p`
//! by preconditioned gradient ascent, and the Nash ratio.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{gradient_p_integral, norm_lq_v_values, GridFunction};
use crate::initial::InitialDatum;
use crate::prox::Discretization;
use crate::scalar::Real;
use crate::sparse::{conjugate_gradient, solve_tridiagonal, CsrMatrix};
use crate::weight_field::MatrixWeightField;

#[derive(Clone, Debug, PartialEq)]
pub struct SobolevConfig {
    /// Number of random starting functions.
    pub starts: usize,
    /// Sine modes per axis in each random start.
    pub modes: usize,
    pub max_iter: usize,
    /// Stop once an iteration improves `log(ratio)` by less than this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SobolevConfig {
    fn default() -> Self {
        Self {
            starts: 20,
            modes: 4,
            max_iter: 500,
            tol: 1e-13,
            seed: 0x050b_01e7,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SobolevEstimate<T> {
    pub p: f64,
    pub sigma: f64,
    /// Ratio achieved by `maximizer`.
    pub constant: f64,
    pub maximizer: GridFunction<T>,
    /// Final ratio of each ascent, random starts first, then probes.
    pub start_ratios: Vec<f64>,
    pub iterations: Vec<usize>,
}

/// `|u|_{L^{sigma p}_v} / (int |sqrt(Q) grad u|^p)^(1/p)`.
pub fn sobolev_ratio<T: Real>(u: &GridFunction<T>, p: T, sigma: T, field: &MatrixWeightField<T>) -> Result<T> {
    let den = gradient_p_integral(u.values(), p, field);
    if den == T::zero() {
        return Err(Error::UndefinedRatio("gradient vanishes".into()));
    }
    Ok(norm_lq_v_values(u.values(), sigma * p, field)? / den.powf(T::one() / p))
}

fn check<T: Real>(p: T, sigma: T) -> Result<()> {
    crate::prox::check_p(p)?;
    if !(sigma >= T::one() && sigma.is_finite()) {
        return Err(Error::InvalidParameters(format!("sigma = {sigma} must be at least 1")));
    }
    Ok(())
}

struct Ascent<'a, T> {
    disc: Discretization<'a, T>,
    field: &'a MatrixWeightField<T>,
    precond: CsrMatrix<T>,
    bands: Option<(Vec<T>, Vec<T>, Vec<T>)>,
    p: T,
    s: T,
}

impl<'a, T: Real> Ascent<'a, T> {
    fn new(field: &'a MatrixWeightField<T>, p: T, sigma: T) -> Self {
        let disc = Discretization::new(field);
        let precond = disc.linear_operator(T::one());
        let bands = precond.tridiagonal_bands();
        Self {
            disc,
            field,
            precond,
            bands,
            p,
            s: sigma * p,
        }
    }

    /// `log` of the ratio, or `None` at `u = 0` / zero gradient.
    fn objective(&self, u: &[T]) -> Option<T> {
        let num = norm_lq_v_values(u, self.s, self.field).ok()?;
        let den = gradient_p_integral(u, self.p, self.field);
        (num > T::zero() && den > T::zero()).then(|| num.ln() - den.ln() / self.p)
    }

    /// Gradient of the log-ratio on the interior unknowns.
    fn gradient(&self, u: &[T]) -> Vec<T> {
        let (p, s) = (self.p, self.s);
        let mass = self.field.lumped_mass();
        let ns: T = crate::scalar::pairwise_sum_by(u.len(), |i| {
            let a = u[i].abs();
            if a == T::zero() {
                T::zero()
            } else {
                a.powf(s) * mass[i]
            }
        });
        let den = gradient_p_integral(u, p, self.field);
        let mut flux = self.disc.samples(u);
        let grid = self.field.grid();
        for c in 0..grid.num_cells() {
            let m = self.field.cell_matrix(c);
            for q in 0..grid.quad_points() {
                let g = flux.sample_mut(c, q);
                let qg = m.mul_vec(g);
                let len2 = m.bilinear(g, g).max(T::zero());
                let coef = if len2 == T::zero() {
                    T::zero()
                } else {
                    len2.powf((p - T::lit(2.0)) / T::lit(2.0))
                };
                for (d, x) in g.iter_mut().enumerate() {
                    *x = coef * qg[d];
                }
            }
        }
        let div = self.disc.divergence(&flux);
        self.disc
            .node_of_dof()
            .iter()
            .map(|&i| {
                let a = u[i].abs();
                let lq = if a == T::zero() {
                    T::zero()
                } else {
                    mass[i] * a.powf(s - T::lit(2.0)) * u[i] / ns
                };
                lq - div[i] / den
            })
            .collect()
    }

    fn precondition(&self, g: &[T]) -> Vec<T> {
        match &self.bands {
            Some((l, d, up)) => solve_tridiagonal(l, d, up, g),
            None => {
                let mut x = vec![T::zero(); g.len()];
                conjugate_gradient(&self.precond, g, &mut x, T::lit(1e-10), 10 * g.len() + 100);
                x
            }
        }
    }

    /// Returns the final function and the iteration count.
    fn run(&self, start: &GridFunction<T>, max_iter: usize, tol: T) -> (Vec<T>, usize) {
        let mut u = start.values().to_vec();
        let Some(mut j) = self.objective(&u) else {
            return (u, 0);
        };
        let armijo = T::lit(1e-4);
        let mut alpha = T::one();
        let mut stalls = 0;
        for it in 0..max_iter {
            let g = self.gradient(&u);
            let d = self.precondition(&g);
            let slope = crate::scalar::dot(&g, &d);
            if !(slope > T::zero()) {
                return (u, it);
            }
            let scale = u.iter().fold(T::zero(), |m, x| m.max(x.abs()));
            let dmax = d.iter().fold(T::zero(), |m, x| m.max(x.abs()));
            if dmax == T::zero() {
                return (u, it);
            }
            // step measured relative to |u|_inf
            alpha = (alpha * T::lit(2.0)).min(scale / dmax);
            let mut accepted = None;
            for _ in 0..60 {
                let mut trial = u.clone();
                for (k, &n) in self.disc.node_of_dof().iter().enumerate() {
                    trial[n] += alpha * d[k];
                }
                if let Some(jt) = self.objective(&trial) {
                    if jt >= j + armijo * alpha * slope {
                        accepted = Some((trial, jt));
                        break;
                    }
                }
                alpha *= T::lit(0.5);
            }
            let Some((trial, jt)) = accepted else {
                return (u, it + 1);
            };
            let gain = jt - j;
            let m = trial.iter().fold(T::zero(), |m, x| m.max(x.abs()));
            u = trial.into_iter().map(|x| x / m).collect();
            alpha /= m;
            j = jt;
            if gain < tol {
                stalls += 1;
                if stalls >= 3 {
                    return (u, it + 1);
                }
            } else {
                stalls = 0;
            }
        }
        (u, max_iter)
    }
}

fn random_starts<T: Real>(field: &MatrixWeightField<T>, cfg: &SobolevConfig) -> Result<Vec<GridFunction<T>>> {
    let grid = field.grid().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.starts)
        .map(|_| {
            InitialDatum::RandomSmooth {
                modes: cfg.modes,
                amplitude: 1.0,
                seed: rng.random(),
            }
            .build(&grid)
        })
        .collect()
}

pub fn estimate_sobolev<T: Real>(
    field: &MatrixWeightField<T>,
    p: T,
    sigma: T,
    cfg: &SobolevConfig,
) -> Result<SobolevEstimate<T>> {
    estimate_sobolev_with_probes(field, p, sigma, cfg, &[])
}

/// Ascent from `cfg.starts` random functions plus every probe; the result
/// is never below the ratio of any probe, and enlarging `cfg.starts` or the
/// probe list never lowers it.
pub fn estimate_sobolev_with_probes<T: Real>(
    field: &MatrixWeightField<T>,
    p: T,
    sigma: T,
    cfg: &SobolevConfig,
    probes: &[GridFunction<T>],
) -> Result<SobolevEstimate<T>> {
    check(p, sigma)?;
    if probes.iter().any(|u| !u.grid().same_shape(field.grid())) {
        return Err(Error::GridMismatch);
    }
    let ascent = Ascent::new(field, p, sigma);
    let mut starts = random_starts(field, cfg)?;
    starts.extend(probes.iter().cloned());
    let tol = T::lit(cfg.tol);
    let mut best: Option<(T, GridFunction<T>)> = None;
    let mut start_ratios = Vec::with_capacity(starts.len());
    let mut iterations = Vec::with_capacity(starts.len());
    for start in &starts {
        let (u, it) = ascent.run(start, cfg.max_iter, tol);
        let u = GridFunction::from_all_nodes(field.grid().clone(), u);
        let r = match sobolev_ratio(&u, p, sigma, field) {
            Ok(r) => r,
            Err(_) => continue,
        };
        start_ratios.push(r.to_f64_lossy());
        iterations.push(it);
        if best.as_ref().is_none_or(|(b, _)| r > *b) {
            best = Some((r, u));
        }
    }
    let (constant, maximizer) =
        best.ok_or_else(|| Error::UndefinedRatio("every starting function has zero gradient".into()))?;
    log::debug!("Sobolev estimate {constant} from {} starts", start_ratios.len());
    Ok(SobolevEstimate {
        p: p.to_f64_lossy(),
        sigma: sigma.to_f64_lossy(),
        constant: constant.to_f64_lossy(),
        maximizer,
        start_ratios,
        iterations,
    })
}

/// Exponents `(a, b)` of `|u|_2 <= C |grad u|^a |u|_{q0}^b`; `a + b = 1`.
pub fn nash_exponents(p: f64, q0: f64, sigma: f64) -> (f64, f64) {
    let den = 2.0 * sigma * p - 2.0 * q0;
    (
        sigma * p * (2.0 - q0) / den,
        (sigma * q0 * (p - 2.0) + 2.0 * (sigma - 1.0) * q0) / den,
    )
}

/// `|u|_{L^2_v} / (|sqrt(Q) grad u|_p^a |u|_{L^{q0}_v}^b)`.
pub fn nash_check<T: Real>(u: &GridFunction<T>, q0: f64, sigma: f64, p: f64, field: &MatrixWeightField<T>) -> Result<f64> {
    crate::prox::check_p(p)?;
    if !(1.0..2.0).contains(&q0) {
        return Err(Error::InvalidParameters(format!("q0 = {q0} must lie in [1, 2)")));
    }
    if !(sigma > 1.0) {
        return Err(Error::InvalidParameters(format!("sigma = {sigma} must exceed 1")));
    }
    let l2 = norm_lq_v_values(u.values(), T::lit(2.0), field)?.to_f64_lossy();
    if l2 == 0.0 {
        return Err(Error::UndefinedRatio("probe is zero".into()));
    }
    let grad = gradient_p_integral(u.values(), T::lit(p), field).to_f64_lossy().powf(1.0 / p);
    let lq = norm_lq_v_values(u.values(), T::lit(q0), field)?.to_f64_lossy();
    let (a, b) = nash_exponents(p, q0, sigma);
    Ok(l2 / (grad.powf(a) * lq.powf(b)))
}

/// Largest Nash ratio over `count` random smooth probes.
pub fn nash_probe_sup<T: Real>(
    field: &MatrixWeightField<T>,
    q0: f64,
    sigma: f64,
    p: f64,
    count: usize,
    seed: u64,
) -> Result<f64> {
    let cfg = SobolevConfig {
        starts: count,
        seed,
        ..SobolevConfig::default()
    };
    let mut sup = 0.0f64;
    for u in random_starts(field, &cfg)? {
        sup = sup.max(nash_check(&u, q0, sigma, p, field)?);
    }
    Ok(sup)
}
