//! Cell loops shared by the proximal solver: gradient samples, the discrete
//! divergence (adjoint of the gradient), and assembly of stiffness-type
//! matrices on the interior unknowns.

use crate::grid::{gradient_of_values, CellVectorField, Grid};
use crate::linalg::{SymMatrix, MAX_DIM};
use crate::scalar::Real;
use crate::sparse::{CsrMatrix, TripletBuilder};
use crate::weight_field::MatrixWeightField;

const NONE: usize = usize::MAX;

/// Precomputed index maps for one weight field.
#[derive(Clone, Debug)]
pub struct Discretization<'a, T> {
    pub(crate) field: &'a MatrixWeightField<T>,
    dof_of_node: Vec<usize>,
    node_of_dof: Vec<usize>,
    corners: Vec<[usize; 1 << MAX_DIM]>,
    pattern: CsrMatrix<T>,
    /// Per cell, `k * k` positions into the matrix values (`NONE` when a
    /// corner is a boundary node).
    slots: Vec<usize>,
    k: usize,
    inv_h: [T; MAX_DIM],
    quad_w: T,
    dof_mass: Vec<T>,
}

impl<'a, T: Real> Discretization<'a, T> {
    pub fn new(field: &'a MatrixWeightField<T>) -> Self {
        let grid: &Grid<T> = field.grid();
        let mut dof_of_node = vec![NONE; grid.num_nodes()];
        let node_of_dof = grid.interior_nodes().to_vec();
        for (d, &n) in node_of_dof.iter().enumerate() {
            dof_of_node[n] = d;
        }
        let k = grid.corners_per_cell();
        let corners: Vec<_> = (0..grid.num_cells()).map(|c| grid.cell_corners(c)).collect();
        let mut t = TripletBuilder::with_capacity(node_of_dof.len(), corners.len() * k * k);
        for (d, _) in node_of_dof.iter().enumerate() {
            t.push(d, d, T::zero());
        }
        for cn in &corners {
            for a in 0..k {
                for b in 0..k {
                    let (i, j) = (dof_of_node[cn[a]], dof_of_node[cn[b]]);
                    if i != NONE && j != NONE {
                        t.push(i, j, T::zero());
                    }
                }
            }
        }
        let pattern = t.build();
        let mut slots = Vec::with_capacity(corners.len() * k * k);
        for cn in &corners {
            for a in 0..k {
                for b in 0..k {
                    let (i, j) = (dof_of_node[cn[a]], dof_of_node[cn[b]]);
                    slots.push(if i != NONE && j != NONE {
                        pattern.position(i, j).expect("entry in pattern")
                    } else {
                        NONE
                    });
                }
            }
        }
        let mut inv_h = [T::one(); MAX_DIM];
        for (d, h) in grid.spacing().iter().enumerate() {
            inv_h[d] = T::one() / *h;
        }
        let mass = field.lumped_mass();
        let dof_mass = node_of_dof.iter().map(|&n| mass[n]).collect();
        Self {
            field,
            dof_of_node,
            node_of_dof,
            corners,
            pattern,
            slots,
            k,
            inv_h,
            quad_w: grid.quad_weight(),
            dof_mass,
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        self.field.grid()
    }

    pub fn num_dofs(&self) -> usize {
        self.node_of_dof.len()
    }

    pub fn node_of_dof(&self) -> &[usize] {
        &self.node_of_dof
    }

    pub fn dof_mass(&self) -> &[T] {
        &self.dof_mass
    }

    pub fn quad_weight(&self) -> T {
        self.quad_w
    }

    pub fn samples(&self, u: &[T]) -> CellVectorField<T> {
        gradient_of_values(self.grid(), u)
    }

    pub fn gather(&self, full: &[T]) -> Vec<T> {
        self.node_of_dof.iter().map(|&n| full[n]).collect()
    }

    pub fn scatter(&self, dofs: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dof_of_node.len()];
        for (&n, &x) in self.node_of_dof.iter().zip(dofs) {
            out[n] = x;
        }
        out
    }

    /// `sum_{c,q} w * flux_{c,q} . d(grad u)_{c,q} / du_i` for every node,
    /// i.e. the adjoint of the gradient applied to a sampled flux. Boundary
    /// entries are zeroed.
    pub fn divergence(&self, flux: &CellVectorField<T>) -> Vec<T> {
        let grid = self.grid();
        let dim = grid.dim();
        let mut out = vec![T::zero(); grid.num_nodes()];
        for (c, cn) in self.corners.iter().enumerate() {
            for q in 0..grid.quad_points() {
                let f = flux.sample(c, q);
                for d in 0..dim {
                    let (lo, hi) = grid.quad_edge(q, d);
                    let x = f[d] * self.inv_h[d] * self.quad_w;
                    out[cn[hi]] += x;
                    out[cn[lo]] -= x;
                }
            }
        }
        for (i, o) in out.iter_mut().enumerate() {
            if self.dof_of_node[i] == NONE {
                *o = T::zero();
            }
        }
        out
    }

    /// Interior-dof matrix `diag(mass_scale * m) + sum_{c,q} w B_q^T H_{c,q} B_q`
    /// where `B_q` is the gradient at sample `q` and `h(c, q)` gives the
    /// sample matrix.
    pub fn assemble(&self, mass_scale: T, h: impl Fn(usize, usize) -> SymMatrix<T>) -> CsrMatrix<T> {
        let grid = self.grid();
        let dim = grid.dim();
        let k = self.k;
        let mut a = self.pattern.clone();
        let mut local = [[T::zero(); 1 << MAX_DIM]; 1 << MAX_DIM];
        for c in 0..self.corners.len() {
            for row in local.iter_mut().take(k) {
                row[..k].iter_mut().for_each(|x| *x = T::zero());
            }
            for q in 0..grid.quad_points() {
                let hm = h(c, q);
                for d in 0..dim {
                    let (lo_d, hi_d) = grid.quad_edge(q, d);
                    for e in 0..dim {
                        let (lo_e, hi_e) = grid.quad_edge(q, e);
                        let x = hm.get(d, e) * self.inv_h[d] * self.inv_h[e] * self.quad_w;
                        if x == T::zero() {
                            continue;
                        }
                        local[hi_d][hi_e] += x;
                        local[lo_d][lo_e] += x;
                        local[hi_d][lo_e] -= x;
                        local[lo_d][hi_e] -= x;
                    }
                }
            }
            let base = c * k * k;
            let vals = a.values_mut();
            for ai in 0..k {
                for bi in 0..k {
                    let s = self.slots[base + ai * k + bi];
                    if s != NONE {
                        vals[s] += local[ai][bi];
                    }
                }
            }
        }
        let diag: Vec<T> = self.dof_mass.iter().map(|&m| m * mass_scale).collect();
        a.add_diagonal(&diag);
        a
    }

    /// Stiffness matrix of `Q` plus `mass_scale` times the lumped mass.
    pub fn linear_operator(&self, mass_scale: T) -> CsrMatrix<T> {
        self.assemble(mass_scale, |c, _| *self.field.cell_matrix(c))
    }
}
