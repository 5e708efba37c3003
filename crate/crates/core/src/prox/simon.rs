//! Monte-Carlo estimates of the constants in the vector inequalities that
//! make the p-Laplacian flux monotone.
//!
//! With `Phi(x) = |x|^(p-2) x`:
//!
//! * `p >= 2`: `|a-b|^p <= C1 (Phi(a)-Phi(b)).(a-b)` and
//!   `|Phi(a)-Phi(b)| <= C2 |a-b| (|a|+|b|)^(p-2)`;
//! * `1 < p < 2`: `|a-b|^2 / (|a|+|b|)^(2-p) <= C3 (Phi(a)-Phi(b)).(a-b)` and
//!   `|Phi(a)-Phi(b)| <= C4 |a-b|^(p-1)`.
//!
//! Every ratio is invariant under joint scaling of `(a, b)`, so the
//! sampler draws from a mixture concentrated where the suprema live:
//! independent pairs, nearly equal pairs, and nearly antiparallel pairs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const DIM: usize = 2;
/// Allowed relative spread between the calibration run and the main run.
const STABILITY: f64 = 0.01;

#[derive(Clone, Debug, PartialEq)]
pub struct SimonConstant {
    pub name: &'static str,
    /// Largest sampled ratio.
    pub empirical: f64,
    /// Same estimate from an independent calibration run.
    pub calibrated: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimonReport {
    pub p: f64,
    pub samples: usize,
    /// Pairs with `a = b`, where both sides vanish.
    pub coincident: usize,
    pub constants: Vec<SimonConstant>,
    pub pass: bool,
}

fn phi(p: f64, x: [f64; DIM]) -> [f64; DIM] {
    let n = norm(x);
    if n == 0.0 {
        return [0.0; DIM];
    }
    let s = n.powf(p - 2.0);
    [s * x[0], s * x[1]]
}

fn norm(x: [f64; DIM]) -> f64 {
    x[0].hypot(x[1])
}

fn sub(a: [f64; DIM], b: [f64; DIM]) -> [f64; DIM] {
    [a[0] - b[0], a[1] - b[1]]
}

/// `[(lhs1, rhs1), (lhs2, rhs2)]` of the two inequalities for this `p`,
/// with the constant stripped from the right side.
pub fn simon_sides(p: f64, a: [f64; DIM], b: [f64; DIM]) -> [(f64, f64); 2] {
    let d = sub(a, b);
    let dn = norm(d);
    let fd = sub(phi(p, a), phi(p, b));
    let mono = fd[0] * d[0] + fd[1] * d[1];
    let sum = norm(a) + norm(b);
    if p >= 2.0 {
        [
            (dn.powf(p), mono),
            (norm(fd), if dn == 0.0 { 0.0 } else { dn * sum.powf(p - 2.0) }),
        ]
    } else {
        [
            (if dn == 0.0 { 0.0 } else { dn * dn / sum.powf(2.0 - p) }, mono),
            (norm(fd), dn.powf(p - 1.0)),
        ]
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> [f64; DIM] {
    [rng.sample(StandardNormal), rng.sample(StandardNormal)]
}

fn draw(rng: &mut ChaCha8Rng) -> ([f64; DIM], [f64; DIM]) {
    let a = gaussian(rng);
    let kind = rng.random_range(0..3u8);
    let eps = 10f64.powf(rng.random_range(-6.0..0.0));
    let b = match kind {
        0 => gaussian(rng),
        1 => {
            let e = gaussian(rng);
            [a[0] + eps * e[0], a[1] + eps * e[1]]
        }
        _ => {
            let t = 10f64.powf(rng.random_range(-3.0..3.0));
            let e = gaussian(rng);
            [-t * a[0] + eps * e[0], -t * a[1] + eps * e[1]]
        }
    };
    (a, b)
}

fn sup_ratios(p: f64, samples: usize, seed: u64) -> ([f64; 2], usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = [0.0f64; 2];
    let mut coincident = 0;
    for _ in 0..samples {
        let (a, b) = draw(&mut rng);
        let sides = simon_sides(p, a, b);
        if sides[0].1 == 0.0 && sides[0].0 == 0.0 {
            coincident += 1;
            continue;
        }
        for (k, (lhs, rhs)) in sides.iter().enumerate() {
            if *rhs > 0.0 {
                let r = lhs / rhs;
                if r.is_finite() {
                    best[k] = best[k].max(r);
                }
            }
        }
    }
    (best, coincident)
}

/// Estimates both constants for `p` from `sample_count` random pairs and
/// compares them with an independent calibration run.
pub fn simon_check(p: f64, sample_count: usize, seed: u64) -> SimonReport {
    let names: [&'static str; 2] = if p >= 2.0 {
        ["monotonicity (p >= 2)", "flux continuity (p >= 2)"]
    } else {
        ["monotonicity (1 < p < 2)", "flux continuity (1 < p < 2)"]
    };
    let (main, coincident) = sup_ratios(p, sample_count, seed);
    let (cal, _) = sup_ratios(p, sample_count, seed ^ 0x9e37_79b9_7f4a_7c15);
    let constants: Vec<SimonConstant> = (0..2)
        .map(|k| {
            let (e, c) = (main[k], cal[k]);
            let pass = e.is_finite() && c.is_finite() && e > 0.0 && (e - c).abs() <= STABILITY * c;
            SimonConstant {
                name: names[k],
                empirical: e,
                calibrated: c,
                pass,
            }
        })
        .collect();
    let pass = p > 1.0 && constants.iter().all(|c| c.pass);
    SimonReport {
        p,
        samples: sample_count,
        coincident,
        constants,
        pass,
    }
}
