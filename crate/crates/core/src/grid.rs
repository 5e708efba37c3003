//! Structured box grids, grid functions, the discrete gradient, and the
//! weighted norms and energies built on them.
//!
//! Nodes carry the unknowns; cells carry the matrix weight. Integrals
//! against `dv` use nodal (lumped) quadrature. Integrals against `dx` use
//! per-cell quadrature points that sit at the cell corners: at a corner the
//! gradient component along axis `d` is the difference quotient over the
//! cell edge along `d` through that corner. The mean of the corner
//! gradients is the gradient of the multilinear interpolant at the cell
//! center. In one dimension the rule degenerates to a single point.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::MAX_DIM;
use crate::scalar::{pairwise_sum_by, Real};
use crate::weight_field::MatrixWeightField;

/// Axis-aligned box grid in one to three dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    dim: usize,
    lower: [T; MAX_DIM],
    upper: [T; MAX_DIM],
    nodes: [usize; MAX_DIM],
    spacing: [T; MAX_DIM],
    node_stride: [usize; MAX_DIM],
    cell_counts: [usize; MAX_DIM],
    cell_stride: [usize; MAX_DIM],
    node_volume: Vec<T>,
    boundary: Vec<bool>,
    interior: Vec<usize>,
    quad: QuadRule,
}

/// Corner quadrature layout shared by all cells.
#[derive(Clone, Debug, PartialEq)]
struct QuadRule {
    points: usize,
    /// `edges[q][d] = (lo, hi)` local corner indices of the edge along axis
    /// `d` used by quadrature point `q`.
    edges: Vec<[(usize, usize); MAX_DIM]>,
}

impl QuadRule {
    fn new(dim: usize) -> Self {
        let points = if dim == 1 { 1 } else { 1 << dim };
        let edges = (0..points)
            .map(|q| {
                let mut e = [(0, 0); MAX_DIM];
                for (d, slot) in e.iter_mut().enumerate().take(dim) {
                    let lo = q & !(1 << d);
                    *slot = (lo, lo | (1 << d));
                }
                e
            })
            .collect();
        Self { points, edges }
    }
}

impl<T: Real> Grid<T> {
    /// `lower`/`upper` give the box, `nodes` the node count per axis (>= 3).
    pub fn new(lower: &[T], upper: &[T], nodes: &[usize]) -> Result<Self> {
        let dim = nodes.len();
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if lower.len() != dim || upper.len() != dim {
            return Err(Error::InvalidGrid("box and node counts disagree in dimension".into()));
        }
        let mut lo = [T::zero(); MAX_DIM];
        let mut up = [T::one(); MAX_DIM];
        let mut n = [1usize; MAX_DIM];
        let mut h = [T::one(); MAX_DIM];
        for d in 0..dim {
            if nodes[d] < 3 {
                return Err(Error::InvalidGrid(format!(
                    "axis {d} has {} nodes; at least 3 required",
                    nodes[d]
                )));
            }
            if !(lower[d].is_finite() && upper[d].is_finite() && upper[d] > lower[d]) {
                return Err(Error::InvalidGrid(format!("axis {d} has an empty or non-finite extent")));
            }
            lo[d] = lower[d];
            up[d] = upper[d];
            n[d] = nodes[d];
            h[d] = (upper[d] - lower[d]) / T::from_usize_lossy(nodes[d] - 1);
        }
        let mut node_stride = [1usize; MAX_DIM];
        let mut cell_counts = [1usize; MAX_DIM];
        let mut cell_stride = [1usize; MAX_DIM];
        for d in 0..dim {
            cell_counts[d] = n[d] - 1;
        }
        for d in (0..MAX_DIM - 1).rev() {
            node_stride[d] = node_stride[d + 1] * n[d + 1];
            cell_stride[d] = cell_stride[d + 1] * cell_counts[d + 1];
        }
        let total: usize = n.iter().product();
        let mut node_volume = Vec::with_capacity(total);
        let mut boundary = Vec::with_capacity(total);
        let mut interior = Vec::new();
        for idx in 0..total {
            let mut vol = T::one();
            let mut on_boundary = false;
            for d in 0..dim {
                let i = (idx / node_stride[d]) % n[d];
                let at_face = i == 0 || i == n[d] - 1;
                on_boundary |= at_face;
                vol *= if at_face { h[d] * T::lit(0.5) } else { h[d] };
            }
            node_volume.push(vol);
            boundary.push(on_boundary);
            if !on_boundary {
                interior.push(idx);
            }
        }
        Ok(Self {
            dim,
            lower: lo,
            upper: up,
            nodes: n,
            spacing: h,
            node_stride,
            cell_counts,
            cell_stride,
            node_volume,
            boundary,
            interior,
            quad: QuadRule::new(dim),
        })
    }

    /// Unit box `(0,1)^dim` with `n` nodes on every axis.
    pub fn unit(dim: usize, n: usize) -> Result<Self> {
        Self::new(&vec![T::zero(); dim], &vec![T::one(); dim], &vec![n; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> &[T] {
        &self.lower[..self.dim]
    }

    pub fn upper(&self) -> &[T] {
        &self.upper[..self.dim]
    }

    pub fn nodes_per_axis(&self) -> &[usize] {
        &self.nodes[..self.dim]
    }

    pub fn spacing(&self) -> &[T] {
        &self.spacing[..self.dim]
    }

    pub fn num_nodes(&self) -> usize {
        self.node_volume.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cell_counts.iter().product()
    }

    pub fn cell_volume(&self) -> T {
        self.spacing[..self.dim].iter().fold(T::one(), |a, &h| a * h)
    }

    /// Lumped quadrature weight of a node.
    pub fn node_volume(&self, node: usize) -> T {
        self.node_volume[node]
    }

    pub fn node_volumes(&self) -> &[T] {
        &self.node_volume
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary[node]
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    pub fn node_multi_index(&self, node: usize) -> [usize; MAX_DIM] {
        let mut m = [0; MAX_DIM];
        for (d, slot) in m.iter_mut().enumerate().take(self.dim) {
            *slot = (node / self.node_stride[d]) % self.nodes[d];
        }
        m
    }

    pub fn node_index(&self, multi: &[usize]) -> usize {
        (0..self.dim).map(|d| multi[d] * self.node_stride[d]).sum()
    }

    pub fn node_coords(&self, node: usize) -> [T; MAX_DIM] {
        let m = self.node_multi_index(node);
        let mut x = [T::zero(); MAX_DIM];
        for d in 0..self.dim {
            x[d] = if m[d] == self.nodes[d] - 1 {
                self.upper[d]
            } else {
                self.lower[d] + T::from_usize_lossy(m[d]) * self.spacing[d]
            };
        }
        x
    }

    pub fn cell_center(&self, cell: usize) -> [T; MAX_DIM] {
        let mut x = [T::zero(); MAX_DIM];
        for d in 0..self.dim {
            let i = (cell / self.cell_stride[d]) % self.cell_counts[d];
            x[d] = self.lower[d] + (T::from_usize_lossy(i) + T::lit(0.5)) * self.spacing[d];
        }
        x
    }

    /// Nodes of a cell indexed by corner bits (bit `d` set = upper side on axis `d`).
    pub fn cell_corners(&self, cell: usize) -> [usize; 1 << MAX_DIM] {
        let mut base = 0;
        for d in 0..self.dim {
            let i = (cell / self.cell_stride[d]) % self.cell_counts[d];
            base += i * self.node_stride[d];
        }
        let mut out = [0usize; 1 << MAX_DIM];
        for (b, slot) in out.iter_mut().enumerate().take(1 << self.dim) {
            let mut idx = base;
            for d in 0..self.dim {
                if b & (1 << d) != 0 {
                    idx += self.node_stride[d];
                }
            }
            *slot = idx;
        }
        out
    }

    pub fn corners_per_cell(&self) -> usize {
        1 << self.dim
    }

    /// Number of gradient quadrature points per cell.
    pub fn quad_points(&self) -> usize {
        self.quad.points
    }

    /// Quadrature weight of one gradient sample.
    pub fn quad_weight(&self) -> T {
        self.cell_volume() / T::from_usize_lossy(self.quad.points)
    }

    /// Local corner pair `(lo, hi)` for component `d` at quadrature point `q`.
    #[inline]
    pub fn quad_edge(&self, q: usize, d: usize) -> (usize, usize) {
        self.quad.edges[q][d]
    }

    /// Same shape as `other` (dimension, box, node counts).
    pub fn same_shape(&self, other: &Self) -> bool {
        self == other
    }

    /// Distance from a point to the boundary of the box.
    pub fn boundary_distance(&self, x: &[T]) -> T {
        let mut dist = T::infinity();
        for d in 0..self.dim {
            dist = dist.min(x[d] - self.lower[d]).min(self.upper[d] - x[d]);
        }
        dist.max(T::zero())
    }
}

/// Scalar field on grid nodes.
///
/// Functions built with [`GridFunction::new`] or [`GridFunction::from_fn`]
/// vanish on boundary nodes; this is the discrete zero-boundary space the
/// solver works in. [`GridFunction::from_all_nodes`] builds unconstrained
/// functions for quadrature checks.
#[derive(Clone, Debug)]
pub struct GridFunction<T> {
    grid: Arc<Grid<T>>,
    values: Vec<T>,
}

impl<T: Real> PartialEq for GridFunction<T> {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values && (Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid)
    }
}

impl<T: Real> GridFunction<T> {
    /// Wraps nodal values, requiring zero boundary values.
    pub fn new(grid: Arc<Grid<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.num_nodes() {
            return Err(Error::InvalidGrid(format!(
                "{} values for {} nodes",
                values.len(),
                grid.num_nodes()
            )));
        }
        if let Some(node) = (0..values.len()).find(|&i| grid.is_boundary(i) && values[i] != T::zero()) {
            return Err(Error::BoundaryViolation { node });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalBreakdown("non-finite nodal value".into()));
        }
        Ok(Self { grid, values })
    }

    /// Wraps nodal values without the boundary constraint.
    pub fn from_all_nodes(grid: Arc<Grid<T>>, values: Vec<T>) -> Self {
        assert_eq!(values.len(), grid.num_nodes());
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<Grid<T>>) -> Self {
        let n = grid.num_nodes();
        Self {
            grid,
            values: vec![T::zero(); n],
        }
    }

    /// Samples `f` at interior nodes; boundary nodes are set to zero.
    pub fn from_fn(grid: Arc<Grid<T>>, f: impl Fn(&[T]) -> T) -> Self {
        let values = (0..grid.num_nodes())
            .map(|i| {
                if grid.is_boundary(i) {
                    T::zero()
                } else {
                    f(&grid.node_coords(i)[..grid.dim()])
                }
            })
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn is_zero_boundary(&self) -> bool {
        (0..self.values.len()).all(|i| !self.grid.is_boundary(i) || self.values[i] == T::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == T::zero())
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: T) -> Self {
        self.map(|v| s * v)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Nodewise combination with another function on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if !self.grid.same_shape(&other.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn positive_part(&self) -> Self {
        self.map(|v| v.max(T::zero()))
    }
}

/// Vector field sampled at the gradient quadrature points of every cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellVectorField<T> {
    dim: usize,
    points: usize,
    cells: usize,
    data: Vec<T>,
}

impl<T: Real> CellVectorField<T> {
    pub fn zeros(grid: &Grid<T>) -> Self {
        let dim = grid.dim();
        let points = grid.quad_points();
        let cells = grid.num_cells();
        Self {
            dim,
            points,
            cells,
            data: vec![T::zero(); cells * points * dim],
        }
    }

    /// The same vector at every sample.
    pub fn constant(grid: &Grid<T>, g: &[T]) -> Self {
        let mut f = Self::zeros(grid);
        for chunk in f.data.chunks_mut(f.dim) {
            chunk.copy_from_slice(&g[..chunk.len()]);
        }
        f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_cell(&self) -> usize {
        self.points
    }

    pub fn num_cells(&self) -> usize {
        self.cells
    }

    #[inline]
    pub fn sample(&self, cell: usize, q: usize) -> &[T] {
        let k = (cell * self.points + q) * self.dim;
        &self.data[k..k + self.dim]
    }

    #[inline]
    pub fn sample_mut(&mut self, cell: usize, q: usize) -> &mut [T] {
        let k = (cell * self.points + q) * self.dim;
        &mut self.data[k..k + self.dim]
    }

    /// Mean over the samples of each cell: the cell-center gradient of the
    /// multilinear interpolant when the field came from [`gradient`].
    pub fn cell_means(&self) -> Vec<[T; MAX_DIM]> {
        let inv = T::one() / T::from_usize_lossy(self.points);
        (0..self.cells)
            .map(|c| {
                let mut m = [T::zero(); MAX_DIM];
                for q in 0..self.points {
                    for (d, &g) in self.sample(c, q).iter().enumerate() {
                        m[d] += g;
                    }
                }
                for x in m.iter_mut() {
                    *x *= inv;
                }
                m
            })
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Discrete gradient of a nodal function at every quadrature point.
pub fn gradient<T: Real>(u: &GridFunction<T>) -> CellVectorField<T> {
    gradient_of_values(u.grid(), u.values())
}

pub(crate) fn gradient_of_values<T: Real>(grid: &Grid<T>, u: &[T]) -> CellVectorField<T> {
    let mut g = CellVectorField::zeros(grid);
    let dim = grid.dim();
    let inv_h: Vec<T> = grid.spacing().iter().map(|&h| T::one() / h).collect();
    for c in 0..grid.num_cells() {
        let corners = grid.cell_corners(c);
        for q in 0..grid.quad_points() {
            let s = g.sample_mut(c, q);
            for d in 0..dim {
                let (lo, hi) = grid.quad_edge(q, d);
                s[d] = (u[corners[hi]] - u[corners[lo]]) * inv_h[d];
            }
        }
    }
    g
}

fn check_exponent<T: Real>(q: T, name: &str) -> Result<()> {
    if q.is_nan() || q < T::one() {
        Err(Error::InvalidExponent(format!("{name} = {q} must be >= 1")))
    } else {
        Ok(())
    }
}

/// `|sqrt(Q) g| = sqrt(g^T Q g)`.
#[inline]
pub(crate) fn weighted_length<T: Real>(field: &MatrixWeightField<T>, cell: usize, g: &[T]) -> T {
    field.cell_matrix(cell).bilinear(g, g).max(T::zero()).sqrt()
}

/// `||u||_{L^q_v}`; `q = T::infinity()` gives the max over nodes with `v > 0`.
pub fn norm_lq_v<T: Real>(u: &GridFunction<T>, q: T, field: &MatrixWeightField<T>) -> Result<T> {
    norm_lq_v_values(u.values(), q, field)
}

pub(crate) fn norm_lq_v_values<T: Real>(u: &[T], q: T, field: &MatrixWeightField<T>) -> Result<T> {
    check_exponent(q, "q")?;
    let v = field.node_weights();
    if q.is_infinite() {
        return Ok(u
            .iter()
            .zip(v)
            .filter(|(_, &w)| w > T::zero())
            .fold(T::zero(), |m, (&x, _)| m.max(x.abs())));
    }
    let mass = field.lumped_mass();
    let s = pairwise_sum_by(u.len(), |i| {
        let a = u[i].abs();
        if a == T::zero() {
            T::zero()
        } else {
            a.powf(q) * mass[i]
        }
    });
    Ok(s.powf(T::one() / q))
}

/// `||g||_{L^p_Q} = (sum |sqrt(Q_c) g|^p dx)^(1/p)`.
pub fn norm_lp_q<T: Real>(g: &CellVectorField<T>, p: T, field: &MatrixWeightField<T>) -> Result<T> {
    check_exponent(p, "p")?;
    let grid = field.grid();
    if g.num_cells() != grid.num_cells() || g.points_per_cell() != grid.quad_points() {
        return Err(Error::GridMismatch);
    }
    let w = grid.quad_weight();
    let pts = g.points_per_cell();
    let s = pairwise_sum_by(g.num_cells() * pts, |k| {
        let (c, q) = (k / pts, k % pts);
        let len = weighted_length(field, c, g.sample(c, q));
        if len == T::zero() {
            T::zero()
        } else {
            len.powf(p) * w
        }
    });
    Ok(s.powf(T::one() / p))
}

/// `||u||_{L^p_v} + ||grad u||_{L^p_Q}`.
pub fn norm_h1p_q<T: Real>(u: &GridFunction<T>, p: T, field: &MatrixWeightField<T>) -> Result<T> {
    Ok(norm_lq_v(u, p, field)? + norm_lp_q(&gradient(u), p, field)?)
}

/// `(1/p) int |sqrt(Q) grad u|^p dx`.
pub fn dirichlet_energy<T: Real>(u: &GridFunction<T>, p: T, field: &MatrixWeightField<T>) -> Result<T> {
    if p.is_nan() || p <= T::one() {
        return Err(Error::InvalidExponent(format!("p = {p} must exceed 1")));
    }
    Ok(norm_lp_q(&gradient(u), p, field)?.powf(p) / p)
}

/// `int |sqrt(Q) grad u|^p dx` evaluated directly (no root/power round trip).
pub fn gradient_p_integral<T: Real>(u: &[T], p: T, field: &MatrixWeightField<T>) -> T {
    let grid = field.grid();
    let g = gradient_of_values(grid, u);
    let w = grid.quad_weight();
    let pts = grid.quad_points();
    pairwise_sum_by(grid.num_cells() * pts, |k| {
        let (c, q) = (k / pts, k % pts);
        let len = weighted_length(field, c, g.sample(c, q));
        if len == T::zero() {
            T::zero()
        } else {
            len.powf(p) * w
        }
    })
}

/// `int u w dv` with lumped quadrature.
pub fn inner_v<T: Real>(u: &[T], w: &[T], field: &MatrixWeightField<T>) -> T {
    let mass = field.lumped_mass();
    pairwise_sum_by(u.len(), |i| u[i] * w[i] * mass[i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight_field::{build_field, WeightFamilySpec};
    use std::f64::consts::PI;

    fn identity(grid: &Arc<Grid<f64>>) -> MatrixWeightField<f64> {
        build_field(&WeightFamilySpec::Identity, grid.clone()).unwrap()
    }

    #[test]
    fn rejects_small_grids() {
        assert!(Grid::<f64>::unit(1, 2).is_err());
        assert!(Grid::<f64>::new(&[0.0], &[0.0], &[5]).is_err());
        assert!(Grid::<f64>::unit(4, 3).is_err());
    }

    #[test]
    fn boundary_flags_match_faces() {
        let g = Grid::<f64>::unit(2, 4).unwrap();
        assert_eq!(g.num_nodes(), 16);
        assert_eq!(g.interior_nodes().len(), 4);
        for i in 0..16 {
            let m = g.node_multi_index(i);
            let face = m[0] == 0 || m[0] == 3 || m[1] == 0 || m[1] == 3;
            assert_eq!(g.is_boundary(i), face);
            assert_eq!(g.node_index(&m), i);
        }
        let total: f64 = g.node_volumes().iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_gradient_of_zero() {
        let g = Arc::new(Grid::<f64>::unit(2, 5).unwrap());
        let grad = gradient(&GridFunction::zeros(g));
        assert!(grad.data.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn gradient_of_linear_1d() {
        let g = Arc::new(Grid::<f64>::unit(1, 11).unwrap());
        let s = 3.5;
        let u = GridFunction::from_fn(g.clone(), |x| s * x[0]);
        let grad = gradient(&u);
        // the last cell touches the zeroed boundary node x = 1
        for c in 0..g.num_cells() - 1 {
            assert!((grad.sample(c, 0)[0] - s).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_at_centers_is_second_order() {
        let err = |n: usize| {
            let g = Arc::new(Grid::<f64>::unit(2, n).unwrap());
            let u = GridFunction::from_fn(g.clone(), |x| x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]));
            let means = gradient(&u).cell_means();
            let mut e: f64 = 0.0;
            for (c, m) in means.iter().enumerate() {
                let x = g.cell_center(c);
                let gx = (1.0 - 2.0 * x[0]) * x[1] * (1.0 - x[1]);
                let gy = (1.0 - 2.0 * x[1]) * x[0] * (1.0 - x[0]);
                e = e.max((m[0] - gx).abs()).max((m[1] - gy).abs());
            }
            e
        };
        let (e1, e2) = (err(33), err(65));
        assert!(e2 < 1e-4);
        let order = (e1 / e2).log2();
        assert!(order > 1.8, "order {order}");
    }

    #[test]
    fn affine_gradient_exact_away_from_boundary() {
        let g = Arc::new(Grid::<f64>::unit(2, 9).unwrap());
        let u = GridFunction::from_fn(g.clone(), |x| 1.0 + 2.0 * x[0] - 0.5 * x[1]);
        let grad = gradient(&u);
        for c in 0..g.num_cells() {
            let corners = g.cell_corners(c);
            if corners[..4].iter().any(|&n| g.is_boundary(n)) {
                continue;
            }
            for q in 0..g.quad_points() {
                let s = grad.sample(c, q);
                assert!((s[0] - 2.0).abs() < 1e-12 && (s[1] + 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lq_norms_of_constants_and_sine() {
        let g = Arc::new(Grid::<f64>::unit(1, 256).unwrap());
        let f = identity(&g);
        let one = GridFunction::from_all_nodes(g.clone(), vec![1.0; g.num_nodes()]);
        for q in [1.0, 2.0, 3.5] {
            assert!((norm_lq_v(&one, q, &f).unwrap() - 1.0).abs() < 1e-13);
        }
        let zero = GridFunction::zeros(g.clone());
        assert_eq!(norm_lq_v(&zero, 2.0, &f).unwrap(), 0.0);
        assert_eq!(norm_lq_v(&zero, f64::INFINITY, &f).unwrap(), 0.0);
        let s = GridFunction::from_fn(g.clone(), |x| (PI * x[0]).sin());
        let n2 = norm_lq_v(&s, 2.0, &f).unwrap();
        assert!((n2 - 0.5f64.sqrt()).abs() < 1e-4, "{n2}");
        assert!(matches!(norm_lq_v(&s, 0.5, &f), Err(Error::InvalidExponent(_))));
    }

    #[test]
    fn lp_q_norm_examples() {
        let g = Arc::new(Grid::<f64>::unit(2, 5).unwrap());
        let cells: Vec<_> = (0..g.num_cells())
            .map(|_| crate::linalg::SymMatrix::diagonal(&[4.0, 0.0]))
            .collect();
        let f = MatrixWeightField::from_parts(g.clone(), cells, vec![4.0; g.num_nodes()]).unwrap();
        let gvec = CellVectorField::constant(&g, &[1.0, 1.0]);
        for p in [1.0, 2.0, 3.0] {
            assert!((norm_lp_q(&gvec, p, &f).unwrap() - 2.0).abs() < 1e-13);
        }
        let z = CellVectorField::zeros(&g);
        assert_eq!(norm_lp_q(&z, 2.0, &f).unwrap(), 0.0);
        let id = identity(&g);
        let gv = CellVectorField::constant(&g, &[3.0, 4.0]);
        assert!((norm_lp_q(&gv, 1.5, &id).unwrap() - 5.0).abs() < 1e-13);
    }

    #[test]
    fn energy_and_h1_norm_relations() {
        let g = Arc::new(Grid::<f64>::unit(1, 256).unwrap());
        let f = identity(&g);
        let u = GridFunction::from_fn(g.clone(), |x| (PI * x[0]).sin());
        let e = dirichlet_energy(&u, 2.0, &f).unwrap();
        assert!((e / (PI * PI / 4.0) - 1.0).abs() < 0.01, "{e}");
        let n = norm_lp_q(&gradient(&u), 2.0, &f).unwrap();
        assert_eq!(e, n.powf(2.0) / 2.0);
        let h = norm_h1p_q(&u, 3.0, &f).unwrap();
        assert_eq!(h, norm_lq_v(&u, 3.0, &f).unwrap() + norm_lp_q(&gradient(&u), 3.0, &f).unwrap());
        let h2 = norm_h1p_q(&u.scaled(2.0), 3.0, &f).unwrap();
        assert!((h2 - 2.0 * h).abs() <= 1e-12 * h);
        assert_eq!(dirichlet_energy(&GridFunction::zeros(g), 2.0, &f).unwrap(), 0.0);
    }
}
