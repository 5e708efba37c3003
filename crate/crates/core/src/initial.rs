//! Built-in initial data.

use std::path::PathBuf;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub enum InitialDatum {
    Zero,
    /// `amplitude * prod_d sin(pi * (x_d - a_d) / (b_d - a_d))`.
    SineProduct { amplitude: f64 },
    /// Smooth compactly supported bump `amplitude * exp(1 - 1/(1 - r^2))`,
    /// `r = |x - center| / radius`.
    Bump {
        center: Vec<f64>,
        radius: f64,
        amplitude: f64,
    },
    /// Random combination of the lowest `modes^N` sine modes with
    /// coefficients decaying like `|k|^-2`, rescaled to max-norm `amplitude`.
    RandomSmooth { modes: usize, amplitude: f64, seed: u64 },
    /// Snapshot file in the grid-function format.
    File(PathBuf),
}

impl InitialDatum {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::SineProduct { .. } => "sine-product",
            Self::Bump { .. } => "bump",
            Self::RandomSmooth { .. } => "random-smooth",
            Self::File(_) => "file",
        }
    }

    pub fn build<T: Real>(&self, grid: &Arc<Grid<T>>) -> Result<GridFunction<T>> {
        let dim = grid.dim();
        let unit = |x: &[T], d: usize| (x[d] - grid.lower()[d]) / (grid.upper()[d] - grid.lower()[d]);
        match self {
            Self::Zero => Ok(GridFunction::zeros(grid.clone())),
            Self::SineProduct { amplitude } => {
                let a = T::lit(*amplitude);
                Ok(GridFunction::from_fn(grid.clone(), |x| {
                    (0..dim).fold(a, |acc, d| acc * (T::PI() * unit(x, d)).sin())
                }))
            }
            Self::Bump {
                center,
                radius,
                amplitude,
            } => {
                if center.len() != dim {
                    return Err(Error::InvalidParameters(format!(
                        "bump center has {} coordinates for dimension {dim}",
                        center.len()
                    )));
                }
                if !(*radius > 0.0) {
                    return Err(Error::InvalidParameters("bump radius must be positive".into()));
                }
                let c: Vec<T> = center.iter().map(|&x| T::lit(x)).collect();
                let (r0, a) = (T::lit(*radius), T::lit(*amplitude));
                Ok(GridFunction::from_fn(grid.clone(), |x| {
                    let r2 = (0..dim).fold(T::zero(), |s, d| s + (x[d] - c[d]).powi(2)) / (r0 * r0);
                    if r2 >= T::one() {
                        T::zero()
                    } else {
                        a * (T::one() - T::one() / (T::one() - r2)).exp()
                    }
                }))
            }
            Self::RandomSmooth { modes, amplitude, seed } => {
                if *modes == 0 {
                    return Err(Error::InvalidParameters("random-smooth needs at least one mode".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let count = modes.pow(dim as u32);
                let terms: Vec<([usize; 3], T)> = (0..count)
                    .map(|m| {
                        let mut k = [1usize; 3];
                        let mut rest = m;
                        for slot in k.iter_mut().take(dim) {
                            *slot = rest % modes + 1;
                            rest /= modes;
                        }
                        let k2: usize = k[..dim].iter().map(|x| x * x).sum();
                        let z: f64 = StandardNormal.sample(&mut rng);
                        (k, T::lit(z / k2 as f64))
                    })
                    .collect();
                let u = GridFunction::from_fn(grid.clone(), |x| {
                    terms.iter().fold(T::zero(), |s, (k, c)| {
                        s + (0..dim).fold(*c, |acc, d| {
                            acc * (T::PI() * T::from_usize_lossy(k[d]) * unit(x, d)).sin()
                        })
                    })
                });
                let m = u.max_abs();
                if m == T::zero() {
                    return Ok(u);
                }
                Ok(u.scaled(T::lit(*amplitude) / m))
            }
            Self::File(path) => {
                let snap = crate::io::read_snapshot::<T>(path)?;
                if !snap.function.grid().same_shape(grid) {
                    return Err(Error::GridMismatch);
                }
                GridFunction::new(grid.clone(), snap.function.into_values())
            }
        }
    }
}
