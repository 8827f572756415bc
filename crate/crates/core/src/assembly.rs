//! Global numbering, stiffness/load assembly and clamped-boundary elimination.

use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::mesh::{EntityKind, GridMesh};
use crate::poly::Deriv;
use crate::quadrature::TensorRule;
use crate::refelem::ReferenceElement;
use crate::{Error, Real, Result};

const NOT_FREE: usize = usize::MAX;

/// Identity of a global functional: lattice location and derivative.
///
/// Ordered with the last axis slowest, so that numbering sweeps the domain
/// plane by plane and keeps the matrix profile narrow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DofKey {
    /// Coordinates in units of `h / denom`.
    pub coords: [i64; 3],
    pub deriv: Deriv,
}

impl Ord for DofKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let a = (self.coords[2], self.coords[1], self.coords[0], self.deriv);
        let b = (
            other.coords[2],
            other.coords[1],
            other.coords[0],
            other.deriv,
        );
        a.cmp(&b)
    }
}

impl PartialOrd for DofKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone)]
pub struct GlobalDofMap {
    dim: usize,
    n: usize,
    denom: i64,
    per_cell: usize,
    keys: Vec<DofKey>,
    cell_dofs: Vec<usize>,
    free_index: Vec<usize>,
    free_dim: usize,
}

impl GlobalDofMap {
    pub fn total_dim(&self) -> usize {
        self.keys.len()
    }

    pub fn free_dim(&self) -> usize {
        self.free_dim
    }

    pub fn keys(&self) -> &[DofKey] {
        &self.keys
    }

    pub fn lattice_denominator(&self) -> i64 {
        self.denom
    }

    /// Global indices of the functionals of a cell, in element order.
    pub fn cell(&self, cell: usize) -> &[usize] {
        &self.cell_dofs[cell * self.per_cell..(cell + 1) * self.per_cell]
    }

    /// Reduced index of a global functional, `None` if it was eliminated.
    pub fn free_index(&self, global: usize) -> Option<usize> {
        let i = self.free_index[global];
        (i != NOT_FREE).then_some(i)
    }

    pub fn is_eliminated(&self, global: usize) -> bool {
        self.free_index[global] == NOT_FREE
    }

    pub fn lookup(&self, key: &DofKey) -> Option<usize> {
        self.keys.binary_search(key).ok()
    }

    /// Scatters a reduced vector into a full-length vector with zeros on eliminated entries.
    pub fn expand<T: Real>(&self, free: &[T]) -> Vec<T> {
        self.free_index
            .iter()
            .map(|&i| if i == NOT_FREE { T::zero() } else { free[i] })
            .collect()
    }

    pub fn restrict<T: Real>(&self, total: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.free_dim];
        for (g, &i) in self.free_index.iter().enumerate() {
            if i != NOT_FREE {
                out[i] = total[g];
            }
        }
        out
    }

    fn on_boundary(&self, key: &DofKey) -> bool {
        let limit = self.n as i64 * self.denom;
        key.coords[..self.dim].iter().any(|&c| c == 0 || c == limit)
    }
}

pub fn number_dofs<T: Real>(
    mesh: &GridMesh<T>,
    elem: &ReferenceElement<T>,
) -> Result<GlobalDofMap> {
    if mesh.dim() != elem.dim() {
        return Err(Error::DimensionMismatch(format!(
            "mesh is {}-dimensional, element is {}-dimensional",
            mesh.dim(),
            elem.dim()
        )));
    }
    let dim = mesh.dim();
    let denom = elem.lattice_denominator();
    let per_cell = elem.n_dofs();
    let ncell = mesh.cell_count();

    let mut local_keys = Vec::with_capacity(ncell * per_cell);
    for cell in 0..ncell {
        let idx = mesh.cell_multi_index(cell)?;
        for dof in elem.dofs() {
            let mut coords = [0i64; 3];
            for a in 0..dim {
                coords[a] = idx[a] as i64 * denom + dof.lattice[a];
            }
            local_keys.push((
                DofKey {
                    coords,
                    deriv: dof.deriv,
                },
                dof.entity,
            ));
        }
    }

    let mut sorted = local_keys.clone();
    sorted.sort_unstable();
    sorted.dedup();
    for pair in sorted.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(Error::Consistency(format!(
                "functional {:?} classified as both {:?} and {:?}",
                pair[0].0, pair[0].1, pair[1].1
            )));
        }
    }
    for (key, kind) in &sorted {
        let global: EntityKind = mesh.locate_lattice(&key.coords, denom)?.kind;
        if global != *kind {
            return Err(Error::Consistency(format!(
                "functional {key:?} lies on a mesh {global:?} but its element classifies it as {kind:?}"
            )));
        }
    }
    let keys: Vec<DofKey> = sorted.into_iter().map(|(k, _)| k).collect();
    let cell_dofs = local_keys
        .iter()
        .map(|(k, _)| keys.binary_search(k).expect("key was inserted"))
        .collect();
    let total = keys.len();
    Ok(GlobalDofMap {
        dim,
        n: mesh.n(),
        denom,
        per_cell,
        keys,
        cell_dofs,
        free_index: (0..total).collect(),
        free_dim: total,
    })
}

/// Removes every functional located on the boundary of the unit box.
///
/// With `u = ∂_n u = 0` on an axis-aligned facet, the value and every
/// derivative functional located on that facet vanish.
pub fn eliminate_boundary<T: Real>(mesh: &GridMesh<T>, dofmap: GlobalDofMap) -> GlobalDofMap {
    debug_assert_eq!(mesh.n(), dofmap.n);
    let mut map = dofmap;
    let mut next = 0;
    for g in 0..map.keys.len() {
        if map.on_boundary(&map.keys[g]) {
            map.free_index[g] = NOT_FREE;
        } else {
            map.free_index[g] = next;
            next += 1;
        }
    }
    map.free_dim = next;
    map
}

/// `h^|α_m|` for every functional: the factor relating the physical shape
/// function dual to a physical derivative functional to its reference counterpart.
pub fn dof_scaling<T: Real>(elem: &ReferenceElement<T>, h: T) -> Vec<T> {
    elem.dofs().iter().map(|d| h.powi(d.order())).collect()
}

/// Reference-cell matrix `∫ Δφ̂_m Δφ̂_n`.
fn reference_stiffness<T: Real>(
    elem: &ReferenceElement<T>,
    quad: &TensorRule<T>,
) -> Result<DMatrix<T>> {
    if quad.order < elem.degree() + 1 {
        return Err(Error::InvalidArgument(format!(
            "stiffness quadrature needs at least {} points per axis, got {}",
            elem.degree() + 1,
            quad.order
        )));
    }
    let lap = elem.laplacian_table(quad)?;
    let mut weighted = lap.clone();
    for (q, &w) in quad.weights.iter().enumerate() {
        weighted.column_mut(q).scale_mut(w);
    }
    let k = &weighted * lap.transpose();
    Ok((&k + k.transpose()) * T::lit(0.5))
}

/// Element stiffness `∫_T Δφ_m Δφ_n` on a cell of size `h`.
pub fn local_stiffness<T: Real>(
    elem: &ReferenceElement<T>,
    h: T,
    quad: &TensorRule<T>,
) -> Result<DMatrix<T>> {
    let mut k = reference_stiffness(elem, quad)?;
    let s = dof_scaling(elem, h);
    let factor = h.powi(elem.dim() as i32 - 4);
    let n = elem.n_dofs();
    for i in 0..n {
        for j in 0..n {
            k[(i, j)] *= factor * s[i] * s[j];
        }
    }
    Ok(k)
}

/// Symmetric matrix in compressed sparse row form with full (both-triangle) storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    pub nrows: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j)
            .map(|p| vals[p])
            .unwrap_or_else(|_| T::zero())
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.nrows).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`. Rows are processed in parallel; each row sums in column order.
    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let (cols, vals) = self.row(i);
            let mut acc = T::zero();
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            *yi = acc;
        });
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// `max |A_ij - A_ji|`.
    pub fn max_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.nrows, self.nrows);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn from_dense(m: &DMatrix<T>) -> Self {
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != T::zero() {
                    col_idx.push(j);
                    values.push(m[(i, j)]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            nrows: m.nrows(),
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Writes the lower triangle in Matrix Market symmetric coordinate format.
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
        let lower = (0..self.nrows)
            .map(|i| self.row(i).0.iter().filter(|&&j| j <= i).count())
            .sum::<usize>();
        writeln!(w, "{} {} {}", self.nrows, self.nrows, lower)?;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j <= i {
                    writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v.to_f64_lossy())?;
                }
            }
        }
        Ok(())
    }
}

/// Reduced stiffness matrix and load vector over the free functionals.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSystem<T> {
    pub matrix: CsrMatrix<T>,
    pub rhs: Vec<T>,
}

/// Quadrature rules used by [`assemble`].
#[derive(Debug, Clone)]
pub struct AssemblyRules<T> {
    pub stiffness: TensorRule<T>,
    pub load: TensorRule<T>,
}

pub fn assemble<T, F>(
    mesh: &GridMesh<T>,
    elem: &ReferenceElement<T>,
    dofmap: &GlobalDofMap,
    f: F,
    rules: &AssemblyRules<T>,
) -> Result<SparseSystem<T>>
where
    T: Real,
    F: Fn(&[T]) -> T + Sync,
{
    if mesh.dim() != elem.dim() || dofmap.dim != mesh.dim() || dofmap.n != mesh.n() {
        return Err(Error::DimensionMismatch(
            "mesh, element and numbering must describe the same discretisation".into(),
        ));
    }
    let dim = mesh.dim();
    let h = mesh.h();
    let nd = elem.n_dofs();
    let ke = local_stiffness(elem, h, &rules.stiffness)?;
    let scale = dof_scaling(elem, h);
    let values = elem.shape_table(&rules.load, &[[0; 3]])?;
    let volume = h.powi(dim as i32);

    let loads: Vec<Vec<T>> = (0..mesh.cell_count())
        .into_par_iter()
        .map(|cell| {
            let anchor = mesh.cell_anchor(cell).expect("cell index in range");
            let mut fq = Vec::with_capacity(rules.load.len());
            let mut x = [T::zero(); 3];
            for (p, &w) in rules.load.points.iter().zip(&rules.load.weights) {
                for a in 0..dim {
                    x[a] = anchor[a] + h * p[a];
                }
                fq.push(w * f(&x[..dim]));
            }
            (0..nd)
                .map(|m| {
                    let mut acc = T::zero();
                    for (q, &v) in fq.iter().enumerate() {
                        acc += values[(m, q)] * v;
                    }
                    acc * scale[m] * volume
                })
                .collect()
        })
        .collect();

    let nfree = dofmap.free_dim();
    let mut rhs = vec![T::zero(); nfree];
    let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); nfree];
    for (cell, load) in loads.iter().enumerate() {
        let free: Vec<Option<usize>> = dofmap
            .cell(cell)
            .iter()
            .map(|&g| dofmap.free_index(g))
            .collect();
        for (m, fm) in free.iter().enumerate() {
            let Some(i) = *fm else { continue };
            rhs[i] += load[m];
            for (n, fnn) in free.iter().enumerate() {
                if let Some(j) = *fnn {
                    rows[i].push((j, ke[(m, n)]));
                }
            }
        }
    }

    let mut row_ptr = Vec::with_capacity(nfree + 1);
    row_ptr.push(0);
    let mut col_idx = Vec::new();
    let mut vals = Vec::new();
    for mut row in rows {
        // stable: duplicates are summed in cell order
        row.sort_by_key(|&(c, _)| c);
        let mut iter = row.into_iter();
        if let Some((mut c, mut v)) = iter.next() {
            for (c2, v2) in iter {
                if c2 == c {
                    v += v2;
                } else {
                    col_idx.push(c);
                    vals.push(v);
                    c = c2;
                    v = v2;
                }
            }
            col_idx.push(c);
            vals.push(v);
        }
        row_ptr.push(col_idx.len());
    }
    Ok(SparseSystem {
        matrix: CsrMatrix {
            nrows: nfree,
            row_ptr,
            col_idx,
            values: vals,
        },
        rhs,
    })
}
