//! Compressed sparse row matrices and the linear solvers used by the
//! `p = 2` path and by the preconditioner of the nonlinear solver.

use crate::scalar::{dot, Real};

#[derive(Clone, Debug)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

/// Triplet accumulator; duplicates are summed on compression.
#[derive(Clone, Debug, Default)]
pub struct TripletBuilder<T> {
    n: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Real> TripletBuilder<T> {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(n: usize, cap: usize) -> Self {
        Self {
            n,
            entries: Vec::with_capacity(cap),
        }
    }

    #[inline]
    pub fn push(&mut self, i: usize, j: usize, v: T) {
        debug_assert!(i < self.n && j < self.n);
        self.entries.push((i, j, v));
    }

    pub fn build(mut self) -> CsrMatrix<T> {
        self.entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut vals: Vec<T> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                *vals.last_mut().expect("nonempty") += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            n: self.n,
            row_ptr,
            cols,
            vals,
        }
    }
}

impl<T: Real> CsrMatrix<T> {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.row(i)
            .find(|&(c, _)| c == j)
            .map(|(_, v)| v)
            .unwrap_or_else(T::zero)
    }

    /// Position of entry `(i, j)` in the value array, if it is in the pattern.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        (self.row_ptr[i]..self.row_ptr[i + 1]).find(|&k| self.cols[k] == j)
    }

    pub fn values(&self) -> &[T] {
        &self.vals
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.vals
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut s = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// Adds `d` to the diagonal (entries must already be in the pattern).
    pub fn add_diagonal(&mut self, d: &[T]) {
        for (i, &di) in d.iter().enumerate() {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            let k = r
                .clone()
                .find(|&k| self.cols[k] == i)
                .expect("diagonal entry present in pattern");
            self.vals[k] += di;
        }
    }

    /// Tridiagonal bands `(lower, diag, upper)` if the matrix has bandwidth one.
    pub fn tridiagonal_bands(&self) -> Option<(Vec<T>, Vec<T>, Vec<T>)> {
        let n = self.n;
        let mut lo = vec![T::zero(); n];
        let mut di = vec![T::zero(); n];
        let mut up = vec![T::zero(); n];
        for i in 0..n {
            for (j, v) in self.row(i) {
                if j == i {
                    di[i] = v;
                } else if j + 1 == i {
                    lo[i] = v;
                } else if j == i + 1 {
                    up[i] = v;
                } else if v != T::zero() {
                    return None;
                }
            }
        }
        Some((lo, di, up))
    }

    /// `k` symmetric Gauss-Seidel sweeps for `A x = b` starting from zero.
    ///
    /// For SPD `A` the resulting map `b -> x` is itself symmetric positive
    /// definite, so it can serve as a fixed preconditioner. Rows whose
    /// diagonal is zero are left at zero.
    pub fn sgs_sweeps(&self, b: &[T], k: usize) -> Vec<T> {
        let n = self.n;
        let mut x = vec![T::zero(); n];
        let diag = self.diagonal();
        let relax = |i: usize, x: &mut Vec<T>| {
            if diag[i] == T::zero() {
                return;
            }
            let mut s = b[i];
            for (j, v) in self.row(i) {
                if j != i {
                    s -= v * x[j];
                }
            }
            x[i] = s / diag[i];
        };
        for _ in 0..k {
            for i in 0..n {
                relax(i, &mut x);
            }
            for i in (0..n).rev() {
                relax(i, &mut x);
            }
        }
        x
    }
}

/// Thomas algorithm. `lower[0]` and `upper[n-1]` are ignored.
pub fn solve_tridiagonal<T: Real>(lower: &[T], diag: &[T], upper: &[T], rhs: &[T]) -> Vec<T> {
    let n = diag.len();
    if n == 0 {
        return Vec::new();
    }
    let mut c = vec![T::zero(); n];
    let mut d = vec![T::zero(); n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / m } else { T::zero() };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    x
}

#[derive(Clone, Copy, Debug)]
pub struct CgOutcome<T> {
    pub iterations: usize,
    pub relative_residual: T,
}

/// Jacobi-preconditioned conjugate gradients for SPD systems.
///
/// Stops when `|b - A x| <= rel_tol * |b|` or after `max_iter` iterations;
/// the achieved residual is reported either way.
pub fn conjugate_gradient<T: Real>(
    a: &CsrMatrix<T>,
    b: &[T],
    x: &mut [T],
    rel_tol: T,
    max_iter: usize,
) -> CgOutcome<T> {
    let n = a.dim();
    let diag = a.diagonal();
    let inv_d: Vec<T> = diag
        .iter()
        .map(|&d| if d > T::zero() { T::one() / d } else { T::one() })
        .collect();
    let bnorm = dot(b, b).sqrt();
    if bnorm == T::zero() {
        x.iter_mut().for_each(|xi| *xi = T::zero());
        return CgOutcome {
            iterations: 0,
            relative_residual: T::zero(),
        };
    }
    let mut r = a.mul_vec(x);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<T> = (0..n).map(|i| r[i] * inv_d[i]).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    let mut res = dot(&r, &r).sqrt() / bnorm;
    let mut it = 0;
    while it < max_iter && res > rel_tol {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= T::zero() {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        it += 1;
        // Recompute the true residual now and then to avoid drift.
        if it % 50 == 0 {
            let ax = a.mul_vec(x);
            for i in 0..n {
                r[i] = b[i] - ax[i];
            }
        }
        res = dot(&r, &r).sqrt() / bnorm;
        for i in 0..n {
            z[i] = r[i] * inv_d[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    CgOutcome {
        iterations: it,
        relative_residual: res,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> CsrMatrix<f64> {
        let mut t = TripletBuilder::new(n);
        for i in 0..n {
            t.push(i, i, 2.0);
            if i > 0 {
                t.push(i, i - 1, -1.0);
            }
            if i + 1 < n {
                t.push(i, i + 1, -1.0);
            }
        }
        t.build()
    }

    #[test]
    fn duplicates_are_summed() {
        let mut t = TripletBuilder::new(2);
        t.push(0, 0, 1.0);
        t.push(0, 0, 2.0);
        t.push(1, 0, 5.0);
        let m = t.build();
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.get(1, 0), 5.0);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn thomas_and_cg_agree() {
        let n = 50;
        let a = laplace_1d(n);
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let (lo, di, up) = a.tridiagonal_bands().unwrap();
        let x1 = solve_tridiagonal(&lo, &di, &up, &b);
        let mut x2 = vec![0.0; n];
        let out = conjugate_gradient(&a, &b, &mut x2, 1e-14, 1000);
        assert!(out.relative_residual <= 1e-14);
        for i in 0..n {
            assert!((x1[i] - x2[i]).abs() < 1e-9 * (1.0 + x1[i].abs()));
        }
        let ax = a.mul_vec(&x1);
        for i in 0..n {
            assert!((ax[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn sgs_is_symmetric_operator() {
        let n = 12;
        let mut a = laplace_1d(n);
        a.add_diagonal(&vec![0.5; n]);
        let e = |k: usize| {
            let mut v = vec![0.0; n];
            v[k] = 1.0;
            a.sgs_sweeps(&v, 3)
        };
        for i in 0..n {
            let ci = e(i);
            for j in 0..n {
                let cj = e(j);
                assert!((ci[j] - cj[i]).abs() < 1e-13);
            }
        }
    }
}
