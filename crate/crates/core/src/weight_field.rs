//! Matrix weight `Q` (per cell) and scalar weight `v` (per node), their
//! eigendata, powers, and the structural hypothesis checks.

use std::path::PathBuf;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::{Eigen, SymMatrix, MAX_DIM};
use crate::scalar::{pairwise_sum_by, Real};

/// Concrete weight families.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightFamilySpec {
    /// `Q = I`, `v = 1`.
    Identity,
    /// `v = d(x)^alpha`, `Q = d(x)^q_exponent I` with `d` the distance to the
    /// box boundary.
    IsotropicPower { alpha: f64, q_exponent: f64 },
    /// `Q = diag(|x_i|^{a_i})`, `v = v_const`.
    AnisotropicDiagonal { exponents: Vec<f64>, v_const: f64 },
    /// Cell matrices and nodal weights read from a grid-weight file.
    GridFile { path: PathBuf },
}

impl WeightFamilySpec {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::IsotropicPower { .. } => "isotropic-power",
            Self::AnisotropicDiagonal { .. } => "anisotropic-diagonal",
            Self::GridFile { .. } => "grid-file",
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Self::Identity | Self::GridFile { .. } => Ok(()),
            Self::IsotropicPower { alpha, q_exponent } => {
                if !(alpha.is_finite() && *alpha >= 0.0) {
                    return Err(Error::InvalidField(format!("alpha = {alpha} must be finite and >= 0")));
                }
                if !q_exponent.is_finite() {
                    return Err(Error::InvalidField("q_exponent must be finite".into()));
                }
                Ok(())
            }
            Self::AnisotropicDiagonal { exponents, v_const } => {
                if exponents.len() != dim {
                    return Err(Error::InvalidField(format!(
                        "{} diagonal exponents for dimension {dim}",
                        exponents.len()
                    )));
                }
                if exponents.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
                    return Err(Error::InvalidField("diagonal exponents must be finite and >= 0".into()));
                }
                if !(v_const.is_finite() && *v_const > 0.0) {
                    return Err(Error::InvalidField(format!("v_const = {v_const} must be positive")));
                }
                Ok(())
            }
        }
    }

    /// Whether the family can be evaluated pointwise (and hence refined).
    pub fn is_analytic(&self) -> bool {
        !matches!(self, Self::GridFile { .. })
    }

    fn eval_v<T: Real>(&self, grid: &Grid<T>, x: &[T]) -> T {
        match self {
            Self::Identity => T::one(),
            Self::IsotropicPower { alpha, .. } => {
                let d = grid.boundary_distance(x);
                if *alpha == 0.0 {
                    T::one()
                } else {
                    d.powf(T::lit(*alpha))
                }
            }
            Self::AnisotropicDiagonal { v_const, .. } => T::lit(*v_const),
            Self::GridFile { .. } => unreachable!("grid files are not analytic"),
        }
    }

    fn eval_q<T: Real>(&self, grid: &Grid<T>, x: &[T]) -> SymMatrix<T> {
        let dim = grid.dim();
        match self {
            Self::Identity => SymMatrix::identity(dim),
            Self::IsotropicPower { q_exponent, .. } => {
                let d = grid.boundary_distance(x);
                SymMatrix::scaled_identity(dim, d.powf(T::lit(*q_exponent)))
            }
            Self::AnisotropicDiagonal { exponents, .. } => {
                let diag: Vec<T> = (0..dim).map(|i| x[i].abs().powf(T::lit(exponents[i]))).collect();
                SymMatrix::diagonal(&diag)
            }
            Self::GridFile { .. } => unreachable!("grid files are not analytic"),
        }
    }
}

/// Immutable weight data attached to a grid.
#[derive(Clone, Debug)]
pub struct MatrixWeightField<T> {
    grid: Arc<Grid<T>>,
    cells: Vec<SymMatrix<T>>,
    eigen: Vec<Eigen<T>>,
    node_v: Vec<T>,
    cell_v: Vec<T>,
    mass: Vec<T>,
    spec: Option<WeightFamilySpec>,
}

/// Builds a weight field from a family on the given grid.
pub fn build_field<T: Real>(spec: &WeightFamilySpec, grid: Arc<Grid<T>>) -> Result<MatrixWeightField<T>> {
    spec.validate(grid.dim())?;
    if let WeightFamilySpec::GridFile { path } = spec {
        let mut field: MatrixWeightField<T> = crate::io::read_weight_file(path)?;
        if !field.grid.same_shape(&grid) {
            return Err(Error::InvalidField(format!(
                "grid file {} does not match the scenario grid",
                path.display()
            )));
        }
        field.spec = Some(spec.clone());
        return Ok(field);
    }
    let dim = grid.dim();
    let cells: Vec<SymMatrix<T>> = (0..grid.num_cells())
        .map(|c| spec.eval_q(&grid, &grid.cell_center(c)[..dim]))
        .collect();
    let node_v: Vec<T> = (0..grid.num_nodes())
        .map(|i| spec.eval_v(&grid, &grid.node_coords(i)[..dim]))
        .collect();
    let cell_v: Vec<T> = (0..grid.num_cells())
        .map(|c| spec.eval_v(&grid, &grid.cell_center(c)[..dim]))
        .collect();
    let mut field = MatrixWeightField::assemble(grid, cells, node_v, Some(cell_v))?;
    field.spec = Some(spec.clone());
    Ok(field)
}

impl<T: Real> MatrixWeightField<T> {
    /// Builds from explicit cell matrices and nodal weights; the cell-center
    /// weight is the mean of the cell's corner weights.
    pub fn from_parts(grid: Arc<Grid<T>>, cells: Vec<SymMatrix<T>>, node_v: Vec<T>) -> Result<Self> {
        Self::assemble(grid, cells, node_v, None)
    }

    fn assemble(
        grid: Arc<Grid<T>>,
        mut cells: Vec<SymMatrix<T>>,
        node_v: Vec<T>,
        cell_v: Option<Vec<T>>,
    ) -> Result<Self> {
        if cells.len() != grid.num_cells() {
            return Err(Error::InvalidField(format!(
                "{} cell matrices for {} cells",
                cells.len(),
                grid.num_cells()
            )));
        }
        if node_v.len() != grid.num_nodes() {
            return Err(Error::InvalidField(format!(
                "{} nodal weights for {} nodes",
                node_v.len(),
                grid.num_nodes()
            )));
        }
        let mut eigen = Vec::with_capacity(cells.len());
        for (c, m) in cells.iter_mut().enumerate() {
            if m.dim() != grid.dim() {
                return Err(Error::InvalidField(format!("cell {c} matrix has wrong dimension")));
            }
            if !m.is_finite() {
                return Err(Error::InvalidField(format!("cell {c} matrix has non-finite entries")));
            }
            let scale = m.max_abs();
            if m.asymmetry() > T::lit(1e-12) * scale {
                return Err(Error::InvalidField(format!("cell {c} matrix is not symmetric")));
            }
            let mut e = m.eigen();
            if e.min() < -T::lit(1e-12) * scale {
                return Err(Error::InvalidField(format!(
                    "cell {c} matrix is not positive semidefinite (eigenvalue {})",
                    e.min()
                )));
            }
            for l in e.values.iter_mut().take(e.dim) {
                *l = l.max(T::zero());
            }
            eigen.push(e);
        }
        for (i, &v) in node_v.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidField(format!("non-finite weight at node {i}")));
            }
            let positive_required = !grid.is_boundary(i);
            if (positive_required && v <= T::zero()) || v < T::zero() {
                return Err(Error::DegenerateWeight {
                    node: i,
                    value: v.to_f64_lossy(),
                });
            }
        }
        let cell_v = match cell_v {
            Some(cv) => cv,
            None => (0..grid.num_cells())
                .map(|c| {
                    let corners = grid.cell_corners(c);
                    let k = grid.corners_per_cell();
                    corners[..k].iter().fold(T::zero(), |s, &n| s + node_v[n]) / T::from_usize_lossy(k)
                })
                .collect(),
        };
        let mass = node_v
            .iter()
            .enumerate()
            .map(|(i, &v)| v * grid.node_volume(i))
            .collect();
        Ok(Self {
            grid,
            cells,
            eigen,
            node_v,
            cell_v,
            mass,
            spec: None,
        })
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn spec(&self) -> Option<&WeightFamilySpec> {
        self.spec.as_ref()
    }

    #[inline]
    pub fn cell_matrix(&self, cell: usize) -> &SymMatrix<T> {
        &self.cells[cell]
    }

    pub fn cell_matrices(&self) -> &[SymMatrix<T>] {
        &self.cells
    }

    pub fn cell_eigen(&self, cell: usize) -> &Eigen<T> {
        &self.eigen[cell]
    }

    pub fn node_weights(&self) -> &[T] {
        &self.node_v
    }

    /// `v` sampled at cell centers.
    pub fn cell_weights(&self) -> &[T] {
        &self.cell_v
    }

    /// Diagonal of the lumped `L^2_v` mass matrix: `v_i * |node volume|`.
    pub fn lumped_mass(&self) -> &[T] {
        &self.mass
    }

    /// `v(Omega)` by nodal quadrature.
    pub fn total_mass(&self) -> T {
        pairwise_sum_by(self.mass.len(), |i| self.mass[i])
    }

    /// Same field with `v` scaled so that `v(Omega) = 1`.
    pub fn normalized(&self) -> Self {
        let s = T::one() / self.total_mass();
        let mut out = self.clone();
        out.node_v.iter_mut().for_each(|v| *v *= s);
        out.cell_v.iter_mut().for_each(|v| *v *= s);
        out.mass.iter_mut().for_each(|v| *v *= s);
        out
    }
}

/// `Q^r` per cell.
pub fn matrix_power<T: Real>(field: &MatrixWeightField<T>, r: T) -> Result<Vec<SymMatrix<T>>> {
    field
        .eigen
        .iter()
        .enumerate()
        .map(|(c, e)| {
            if r < T::zero() && e.min() <= T::zero() {
                Err(Error::SingularMatrix { cell: c })
            } else {
                Ok(e.map(|l| if l == T::zero() && r > T::zero() { T::zero() } else { l.powf(r) }))
            }
        })
        .collect()
}

/// Operator norm of a symmetric positive-semidefinite matrix: its largest eigenvalue.
pub fn operator_norm<T: Real>(m: &SymMatrix<T>) -> T {
    m.eigen().max()
}

/// Per-cell lower weight `w = lambda_min^(p/2)`, with the degenerate cells listed.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerWeight<T> {
    pub values: Vec<T>,
    pub degenerate_cells: Vec<usize>,
}

impl<T> LowerWeight<T> {
    pub fn is_degenerate(&self) -> bool {
        !self.degenerate_cells.is_empty()
    }
}

pub fn derive_w<T: Real>(field: &MatrixWeightField<T>, p: T) -> LowerWeight<T> {
    let half_p = p * T::lit(0.5);
    let mut degenerate_cells = Vec::new();
    let values = field
        .eigen
        .iter()
        .enumerate()
        .map(|(c, e)| {
            let l = e.min();
            if l <= T::zero() {
                degenerate_cells.push(c);
                T::zero()
            } else {
                l.powf(half_p)
            }
        })
        .collect();
    LowerWeight {
        values,
        degenerate_cells,
    }
}

/// Integral estimated on successively refined grids.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralEstimate {
    /// Values on the base grid and on refinements by 2 and 4.
    pub levels: Vec<f64>,
    /// Richardson-type extrapolation of the sequence.
    pub extrapolated: f64,
    pub finite: bool,
    /// Always true: refinement evidence is heuristic, not a proof.
    pub heuristic: bool,
}

impl IntegralEstimate {
    fn from_levels(levels: Vec<f64>) -> Self {
        let all_finite = levels.iter().all(|x| x.is_finite());
        let (finite, extrapolated) = match levels.as_slice() {
            [a, b, c] if all_finite => {
                let (d1, d2) = (b - a, c - b);
                let tiny = 1e-12 * c.abs().max(1e-300);
                if d2.abs() <= tiny {
                    (true, *c)
                } else if d1 != 0.0 && (d2 / d1) > 0.0 && (d2 / d1) <= 0.9 {
                    let rho = d2 / d1;
                    (true, c + d2 * rho / (1.0 - rho))
                } else if d1 != 0.0 && (d2 / d1) <= 0.0 && d2.abs() <= 0.9 * d1.abs() {
                    // oscillating but shrinking increments
                    (true, *c)
                } else {
                    (false, f64::INFINITY)
                }
            }
            [.., last] => (all_finite, *last),
            [] => (false, f64::NAN),
        };
        Self {
            levels,
            extrapolated,
            finite,
            heuristic: true,
        }
    }
}

/// Upper-bound check `|sqrt(Q_c)|_op^p <= v_c` over all cells.
#[derive(Clone, Debug, PartialEq)]
pub struct OpNormBound {
    pub pass: bool,
    pub worst_cell: usize,
    /// `max_c (|sqrt(Q_c)|_op^p - v_c)`.
    pub max_excess: f64,
}

/// Sampled `w |xi|^p <= |sqrt(Q) xi|^p <= |sqrt(Q)|_op^p |xi|^p`.
#[derive(Clone, Debug, PartialEq)]
pub struct SandwichCheck {
    pub pass: bool,
    pub samples: usize,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisReport {
    pub p: f64,
    pub v_integral: IntegralEstimate,
    pub op_norm_bound: OpNormBound,
    /// `int_K |sqrt(Q)^{-1}|_op^{p'} dx` over the middle half of the box.
    pub inverse_integral: IntegralEstimate,
    pub sandwich: SandwichCheck,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.v_integral.finite && self.op_norm_bound.pass && self.inverse_integral.finite && self.sandwich.pass
    }
}

const SANDWICH_SAMPLES: usize = 100;

/// Verifies the structural hypotheses on `(Q, v)` for exponent `p`.
pub fn check_hypothesis<T: Real>(field: &MatrixWeightField<T>, p: T) -> HypothesisReport {
    let grid = field.grid();
    let half_p = p * T::lit(0.5);
    let p_conj = p / (p - T::one());
    let slack = T::lit(1e-10);

    let mut worst_cell = 0;
    let mut max_excess = T::neg_infinity();
    for c in 0..grid.num_cells() {
        let top = field.eigen[c].max().powf(half_p);
        let excess = top - field.cell_v[c];
        if excess > max_excess {
            max_excess = excess;
            worst_cell = c;
        }
    }
    let op_pass = (0..grid.num_cells()).all(|c| {
        let top = field.eigen[c].max().powf(half_p);
        top <= field.cell_v[c] + slack * field.cell_v[c].max(T::one())
    });

    let lower = derive_w(field, p);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let dim = grid.dim();
    let mut violations = 0;
    for c in 0..grid.num_cells() {
        let q = field.cell_matrix(c);
        let top = field.eigen[c].max().powf(half_p);
        for _ in 0..SANDWICH_SAMPLES {
            let mut xi = [T::zero(); MAX_DIM];
            for x in xi.iter_mut().take(dim) {
                *x = T::lit(rng.sample::<f64, _>(StandardNormal));
            }
            let n2 = xi[..dim].iter().fold(T::zero(), |s, &x| s + x * x);
            if n2 == T::zero() {
                continue;
            }
            let xp = n2.powf(half_p);
            let mid = q.bilinear(&xi, &xi).max(T::zero()).powf(half_p);
            let tol = slack * (top * xp).max(T::min_positive_value());
            if lower.values[c] * xp > mid + tol || mid > top * xp + tol {
                violations += 1;
            }
        }
    }
    let sandwich = SandwichCheck {
        pass: violations == 0 && op_pass,
        samples: grid.num_cells() * SANDWICH_SAMPLES,
        violations,
    };

    let (v_levels, inv_levels) = match field.spec() {
        Some(spec) if spec.is_analytic() => {
            let mut vl = Vec::new();
            let mut il = Vec::new();
            for factor in [1usize, 2, 4] {
                // Cap refinement work in three dimensions.
                let nodes: Vec<usize> = grid.nodes_per_axis().iter().map(|&n| (n - 1) * factor + 1).collect();
                let cells: usize = nodes.iter().map(|n| n - 1).product();
                if factor > 1 && cells > 4_000_000 {
                    break;
                }
                let Ok(g) = Grid::new(grid.lower(), grid.upper(), &nodes) else {
                    break;
                };
                vl.push(analytic_v_integral(spec, &g));
                il.push(analytic_inverse_integral(spec, &g, p_conj));
            }
            (vl, il)
        }
        _ => (
            vec![field.total_mass().to_f64_lossy()],
            vec![field_inverse_integral(field, p_conj)],
        ),
    };

    HypothesisReport {
        p: p.to_f64_lossy(),
        v_integral: IntegralEstimate::from_levels(v_levels),
        op_norm_bound: OpNormBound {
            pass: op_pass,
            worst_cell,
            max_excess: max_excess.to_f64_lossy(),
        },
        inverse_integral: IntegralEstimate::from_levels(inv_levels),
        sandwich,
    }
}

fn in_middle_half<T: Real>(grid: &Grid<T>, x: &[T]) -> bool {
    (0..grid.dim()).all(|d| {
        let (a, b) = (grid.lower()[d], grid.upper()[d]);
        let q = (b - a) * T::lit(0.25);
        x[d] >= a + q && x[d] <= b - q
    })
}

fn analytic_v_integral<T: Real>(spec: &WeightFamilySpec, g: &Grid<T>) -> f64 {
    let dim = g.dim();
    pairwise_sum_by(g.num_nodes(), |i| spec.eval_v(g, &g.node_coords(i)[..dim]) * g.node_volume(i)).to_f64_lossy()
}

fn inverse_density<T: Real>(lmin: T, p_conj: T) -> T {
    // |sqrt(Q)^{-1}|_op = lambda_min^{-1/2}
    if lmin <= T::zero() {
        T::infinity()
    } else {
        lmin.powf(-p_conj * T::lit(0.5))
    }
}

fn analytic_inverse_integral<T: Real>(spec: &WeightFamilySpec, g: &Grid<T>, p_conj: T) -> f64 {
    let dim = g.dim();
    let vol = g.cell_volume();
    pairwise_sum_by(g.num_cells(), |c| {
        let x = g.cell_center(c);
        if !in_middle_half(g, &x[..dim]) {
            return T::zero();
        }
        let l = spec.eval_q(g, &x[..dim]).eigen().min();
        inverse_density(l, p_conj) * vol
    })
    .to_f64_lossy()
}

fn field_inverse_integral<T: Real>(field: &MatrixWeightField<T>, p_conj: T) -> f64 {
    let g = field.grid();
    let dim = g.dim();
    let vol = g.cell_volume();
    pairwise_sum_by(g.num_cells(), |c| {
        let x = g.cell_center(c);
        if !in_middle_half(g, &x[..dim]) {
            return T::zero();
        }
        inverse_density(field.eigen[c].min(), p_conj) * vol
    })
    .to_f64_lossy()
}
