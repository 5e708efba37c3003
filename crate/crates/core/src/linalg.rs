//! Small dense symmetric matrices (dimension 1 to 3) and their eigendecomposition.
//!
//! Dimension two uses the closed-form rotation; dimension three uses cyclic
//! Jacobi sweeps.

use crate::scalar::Real;

pub const MAX_DIM: usize = 3;

/// Symmetric `dim x dim` matrix stored in a fixed 3x3 block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymMatrix<T> {
    dim: usize,
    a: [[T; MAX_DIM]; MAX_DIM],
}

impl<T: Real> SymMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} unsupported");
        Self {
            dim,
            a: [[T::zero(); MAX_DIM]; MAX_DIM],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, T::one())
    }

    pub fn scaled_identity(dim: usize, s: T) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.a[i][i] = s;
        }
        m
    }

    pub fn diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.a[i][i] = d;
        }
        m
    }

    /// Builds from the row-major upper triangle: `q11 q12 .. q1N q22 .. qNN`.
    pub fn from_upper(dim: usize, upper: &[T]) -> Self {
        assert_eq!(upper.len(), dim * (dim + 1) / 2, "upper-triangle length");
        let mut m = Self::zeros(dim);
        let mut k = 0;
        for i in 0..dim {
            for j in i..dim {
                m.a[i][j] = upper[k];
                m.a[j][i] = upper[k];
                k += 1;
            }
        }
        m
    }

    /// Builds from full rows without symmetrizing; see [`Self::asymmetry`].
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim);
            for (j, &x) in row.iter().enumerate() {
                m.a[i][j] = x;
            }
        }
        m
    }

    pub fn upper(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.dim * (self.dim + 1) / 2);
        for i in 0..self.dim {
            for j in i..self.dim {
                out.push(self.a[i][j]);
            }
        }
        out
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.a[i][j]
    }

    pub fn max_abs(&self) -> T {
        let mut m = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                m = m.max(self.a[i][j].abs());
            }
        }
        m
    }

    /// `max |A - A^T|` entry.
    pub fn asymmetry(&self) -> T {
        let mut m = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                m = m.max((self.a[i][j] - self.a[j][i]).abs());
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| self.a[i][j].is_finite()))
    }

    #[inline]
    pub fn mul_vec(&self, x: &[T]) -> [T; MAX_DIM] {
        let mut y = [T::zero(); MAX_DIM];
        for i in 0..self.dim {
            let mut s = T::zero();
            for j in 0..self.dim {
                s += self.a[i][j] * x[j];
            }
            y[i] = s;
        }
        y
    }

    /// `x^T A y`.
    #[inline]
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        let ay = self.mul_vec(y);
        let mut s = T::zero();
        for i in 0..self.dim {
            s += x[i] * ay[i];
        }
        s
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut s = T::zero();
                for k in 0..self.dim {
                    s += self.a[i][k] * other.a[k][j];
                }
                m.a[i][j] = s;
            }
        }
        m
    }

    /// Relative max-entry distance, normalized by `self`'s largest entry.
    pub fn rel_distance(&self, other: &Self) -> T {
        let mut d = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                d = d.max((self.a[i][j] - other.a[i][j]).abs());
            }
        }
        let scale = self.max_abs();
        if scale == T::zero() {
            d
        } else {
            d / scale
        }
    }

    pub fn eigen(&self) -> Eigen<T> {
        sym_eigen(self)
    }
}

/// Eigendecomposition `D = U A U^T`, equivalently `A = U^T D U`.
///
/// Eigenvalues are sorted ascending; row `i` of `U` is the unit eigenvector
/// belonging to `values[i]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigen<T> {
    pub dim: usize,
    pub values: [T; MAX_DIM],
    pub vectors: [[T; MAX_DIM]; MAX_DIM],
}

impl<T: Real> Eigen<T> {
    pub fn min(&self) -> T {
        self.values[0]
    }

    pub fn max(&self) -> T {
        self.values[self.dim - 1]
    }

    /// `U^T diag(f(lambda_i)) U`.
    pub fn map(&self, f: impl Fn(T) -> T) -> SymMatrix<T> {
        let mut m = SymMatrix::zeros(self.dim);
        let fl: Vec<T> = self.values[..self.dim].iter().map(|&l| f(l)).collect();
        for i in 0..self.dim {
            for j in i..self.dim {
                let mut s = T::zero();
                for (k, &fk) in fl.iter().enumerate() {
                    s += self.vectors[k][i] * fk * self.vectors[k][j];
                }
                m.a[i][j] = s;
                m.a[j][i] = s;
            }
        }
        m
    }

    pub fn reconstruct(&self) -> SymMatrix<T> {
        self.map(|l| l)
    }
}

pub fn sym_eigen<T: Real>(m: &SymMatrix<T>) -> Eigen<T> {
    let z = T::zero();
    let o = T::one();
    let mut values = [z; MAX_DIM];
    let mut vectors = [[z; MAX_DIM]; MAX_DIM];
    match m.dim {
        1 => {
            values[0] = m.a[0][0];
            vectors[0][0] = o;
        }
        2 => {
            let (a, b, c) = (m.a[0][0], m.a[0][1], m.a[1][1]);
            let half = T::lit(0.5);
            let mean = half * (a + c);
            let rad = (half * (a - c)).hypot(b);
            let theta = half * (b + b).atan2(a - c);
            let (s, co) = theta.sin_cos();
            values[0] = mean - rad;
            values[1] = mean + rad;
            vectors[0] = [-s, co, z];
            vectors[1] = [co, s, z];
        }
        3 => {
            let (vals, vecs) = jacobi3(m);
            values = vals;
            vectors = vecs;
        }
        d => unreachable!("dimension {d}"),
    }
    Eigen {
        dim: m.dim,
        values,
        vectors,
    }
}

fn jacobi3<T: Real>(m: &SymMatrix<T>) -> ([T; 3], [[T; 3]; 3]) {
    let z = T::zero();
    let o = T::one();
    let mut a = m.a;
    let mut v = [[o, z, z], [z, o, z], [z, z, o]];
    let scale = m.max_abs();
    if scale == z {
        return ([z; 3], v);
    }
    let eps = T::epsilon() * scale;
    for _sweep in 0..64 {
        let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
        if off <= eps * T::lit(1e-2) {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q].abs() <= T::min_positive_value() {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (a[p][q] + a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + o).sqrt());
            let c = o / (t * t + o).sqrt();
            let s = t * c;
            // A <- J^T A J with J the (p, q) plane rotation.
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for row in v.iter_mut() {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).unwrap_or(std::cmp::Ordering::Equal));
    let mut values = [z; 3];
    let mut vectors = [[z; 3]; 3];
    for (slot, &k) in order.iter().enumerate() {
        values[slot] = a[k][k];
        for i in 0..3 {
            vectors[slot][i] = v[i][k];
        }
    }
    (values, vectors)
}
