//! Reference elements on the unit square / unit cube.
//!
//! An element is described by a list of functionals (point values and point
//! partial derivatives) together with a polynomial space. For the BFS element
//! the space is all of Q_k. For the Bell element it is the subspace of Q_k
//! whose normal derivative on every facet lies in Q_{k-1}; that subspace is
//! obtained numerically as the null space of a facet constraint matrix.
//! Shape functions are the dual basis of the functionals.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::mesh::EntityKind;
use crate::poly::{Deriv, PolyBasis};
use crate::quadrature::TensorRule;
use crate::{Error, Real, Result};

/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;
/// Largest accepted condition number of the functional matrix.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Bell,
    Bfs,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Bell => "bell",
            Variant::Bfs => "bfs",
        }
    }

    pub fn min_degree(self) -> usize {
        match self {
            Variant::Bell => 4,
            Variant::Bfs => 3,
        }
    }

    fn check(self, k: usize, dim: usize) -> Result<()> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidArgument(format!(
                "element dimension must be 2 or 3, got {dim}"
            )));
        }
        if k < self.min_degree() {
            return Err(Error::UnsupportedDegree {
                variant: self.name(),
                k,
                min: self.min_degree(),
            });
        }
        Ok(())
    }

    /// Common denominator of all functional coordinates on the reference cell.
    pub fn lattice_denominator(self, k: usize) -> i64 {
        match self {
            Variant::Bell => ((k - 2) * (k - 3)) as i64,
            Variant::Bfs => (k - 2) as i64,
        }
    }

    /// Number of functionals of the element of degree `k` in dimension `dim`.
    pub fn dof_count(self, k: usize, dim: usize) -> usize {
        match (self, dim) {
            (Variant::Bfs, d) => (k + 1).pow(d as u32),
            (Variant::Bell, 2) => (k - 1) * (k - 1) + 4 * (k - 2) + 4,
            (Variant::Bell, _) => k * k * k + 3 * k * k + 7 - 9 * k,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One functional: `∂^deriv v` evaluated at a point of the reference cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DofSpec<T> {
    /// Per-axis derivative order, each 0 or 1.
    pub deriv: Deriv,
    /// Integer coordinates over the element's lattice denominator.
    pub lattice: [i64; 3],
    pub location: [T; 3],
    /// Reference-cell entity whose relative interior holds the point.
    pub entity: EntityKind,
}

impl<T: Real> DofSpec<T> {
    /// Total derivative order `|α|`.
    pub fn order(&self) -> i32 {
        self.deriv.iter().map(|&d| d as i32).sum()
    }

    /// Applies the functional to a function given by its partial derivatives.
    pub fn apply<F: Fn(&[T; 3], Deriv) -> T>(&self, f: F) -> T {
        f(&self.location, self.deriv)
    }
}

/// Per-axis position of a reference-cell entity: pinned to 0, pinned to 1, or free.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AxisRole {
    Lo,
    Hi,
    Free,
}

/// Entities of `[0,1]^dim`, ordered by dimension (vertices first).
fn reference_entities(dim: usize) -> Vec<[AxisRole; 3]> {
    let roles = [AxisRole::Lo, AxisRole::Hi, AxisRole::Free];
    let mut out = Vec::new();
    for free in 0..=dim {
        let total = 3usize.pow(dim as u32);
        for code in 0..total {
            let mut e = [AxisRole::Lo; 3];
            let mut rest = code;
            for slot in e.iter_mut().take(dim) {
                *slot = roles[rest % 3];
                rest /= 3;
            }
            if e[..dim].iter().filter(|&&r| r == AxisRole::Free).count() == free {
                out.push(e);
            }
        }
    }
    out
}

/// Enumerates the interior points of an entity on a uniform lattice of `steps`
/// subintervals, as numerators over `denom`.
fn entity_points(entity: &[AxisRole; 3], dim: usize, steps: usize, denom: i64) -> Vec<[i64; 3]> {
    let scale = denom / steps.max(1) as i64;
    let mut pts = vec![[0i64; 3]];
    for a in 0..dim {
        let choices: Vec<i64> = match entity[a] {
            AxisRole::Lo => vec![0],
            AxisRole::Hi => vec![denom],
            AxisRole::Free => (1..steps as i64).map(|j| j * scale).collect(),
        };
        pts = pts
            .into_iter()
            .flat_map(|p| {
                choices.iter().map(move |&c| {
                    let mut q = p;
                    q[a] = c;
                    q
                })
            })
            .collect();
    }
    // first axis fastest
    pts.sort_by_key(|p| (p[2], p[1], p[0]));
    pts
}

/// Derivative multi-indices supported on the pinned axes of an entity.
fn normal_derivs(entity: &[AxisRole; 3], dim: usize, include_value: bool) -> Vec<Deriv> {
    let pinned: Vec<usize> = (0..dim).filter(|&a| entity[a] != AxisRole::Free).collect();
    let mut out = Vec::new();
    for mask in 0..(1u32 << pinned.len()) {
        if mask == 0 && !include_value {
            continue;
        }
        let mut d = [0u8; 3];
        for (bit, &a) in pinned.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                d[a] = 1;
            }
        }
        out.push(d);
    }
    out
}

fn make_dof<T: Real>(deriv: Deriv, lattice: [i64; 3], denom: i64, dim: usize) -> DofSpec<T> {
    let mut location = [T::zero(); 3];
    for a in 0..dim {
        location[a] = T::lit(lattice[a] as f64 / denom as f64);
    }
    let span = (0..dim)
        .filter(|&a| lattice[a] != 0 && lattice[a] != denom)
        .count();
    DofSpec {
        deriv,
        lattice,
        location,
        entity: EntityKind::from_span(span, dim),
    }
}

/// Functionals of the Bell element.
///
/// On every entity (vertex, edge, face, interior) the value is taken on the
/// interior points of the lattice of step `1/(k-2)`. Derivatives normal to the
/// entity (all non-empty products of its pinned axes) are taken on the interior
/// points of the lattice of step `1/(k-3)`. In 2D this is exactly the vertex,
/// edge-derivative and value pattern of the planar element; in 3D it gives the
/// vertex octets, edge values and edge-normal derivative triples, face values and
/// face-normal derivatives, and interior values.
pub fn bell_dof_list<T: Real>(k: usize, dim: usize) -> Result<Vec<DofSpec<T>>> {
    Variant::Bell.check(k, dim)?;
    let denom = Variant::Bell.lattice_denominator(k);
    let mut dofs = Vec::with_capacity(Variant::Bell.dof_count(k, dim));
    for entity in reference_entities(dim) {
        for p in entity_points(&entity, dim, k - 2, denom) {
            dofs.push(make_dof([0; 3], p, denom, dim));
        }
        let derivs = normal_derivs(&entity, dim, false);
        if derivs.is_empty() {
            continue;
        }
        for p in entity_points(&entity, dim, k - 3, denom) {
            for &d in &derivs {
                dofs.push(make_dof(d, p, denom, dim));
            }
        }
    }
    debug_assert_eq!(dofs.len(), Variant::Bell.dof_count(k, dim));
    Ok(dofs)
}

/// Functionals of the tensor-product BFS element: products of the 1D list
/// `v(0), v'(0), v(j/(k-2)) for j = 1..k-3, v(1), v'(1)`.
pub fn bfs_dof_list<T: Real>(k: usize, dim: usize) -> Result<Vec<DofSpec<T>>> {
    Variant::Bfs.check(k, dim)?;
    let denom = Variant::Bfs.lattice_denominator(k);
    let mut dofs = Vec::with_capacity(Variant::Bfs.dof_count(k, dim));
    for entity in reference_entities(dim) {
        let derivs = normal_derivs(&entity, dim, true);
        for p in entity_points(&entity, dim, k - 2, denom) {
            for &d in &derivs {
                dofs.push(make_dof(d, p, denom, dim));
            }
        }
    }
    debug_assert_eq!(dofs.len(), Variant::Bfs.dof_count(k, dim));
    Ok(dofs)
}

pub fn dof_list<T: Real>(k: usize, dim: usize, variant: Variant) -> Result<Vec<DofSpec<T>>> {
    match variant {
        Variant::Bell => bell_dof_list(k, dim),
        Variant::Bfs => bfs_dof_list(k, dim),
    }
}

/// Facet constraints of the Bell space over tensor-Legendre coefficients.
///
/// For each facet `x_a = c` and each tangential index tuple with largest entry
/// equal to `k`, one row states that the coefficient of that tangential basis
/// function in `∂_a v |_{x_a = c}` vanishes. The rows are emitted for every
/// facet, so in 3D the set is redundant (`6 (2k+1)` rows).
pub fn constraint_matrix<T: Real>(k: usize, dim: usize) -> Result<DMatrix<T>> {
    Variant::Bell.check(k, dim)?;
    let basis = PolyBasis::<T>::new(k, dim)?;
    let ends = [basis.table_1d(T::zero()), basis.table_1d(T::one())];
    let mut rows: Vec<Vec<T>> = Vec::new();
    for normal in 0..dim {
        let tangential: Vec<usize> = (0..dim).filter(|&a| a != normal).collect();
        for end in &ends {
            let dnormal = &end.d[1];
            let count = (k + 1).pow(tangential.len() as u32);
            for code in 0..count {
                let mut multi = [0usize; 3];
                let mut rest = code;
                for &a in &tangential {
                    multi[a] = rest % (k + 1);
                    rest /= k + 1;
                }
                if tangential.iter().all(|&a| multi[a] < k) {
                    continue;
                }
                let mut row = vec![T::zero(); basis.len()];
                for (i, dn) in dnormal.iter().enumerate() {
                    multi[normal] = i;
                    row[basis.index(multi)] = *dn;
                }
                rows.push(row);
            }
        }
    }
    let n = basis.len();
    Ok(DMatrix::from_fn(rows.len(), n, |r, c| rows[r][c]))
}

/// Numerical rank: singular values above `RANK_TOLERANCE * σ_max`.
pub fn numerical_rank<T: Real>(m: &DMatrix<T>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.max();
    let cut = smax * T::tol(RANK_TOLERANCE);
    sv.iter().filter(|&&s| s > cut).count()
}

/// Orthonormal basis of the null space of `m` (as columns) and the rank of `m`.
fn null_space<T: Real>(m: &DMatrix<T>) -> (DMatrix<T>, usize) {
    let n = m.ncols();
    // Pad to square so that the SVD returns a full set of right singular vectors.
    let mut sq = DMatrix::<T>::zeros(n.max(m.nrows()), n);
    sq.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.max();
    let cut = smax * T::tol(RANK_TOLERANCE);
    let null: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= cut)
        .collect();
    let rank = svd.singular_values.len() - null.len();
    let basis = DMatrix::from_fn(n, null.len(), |r, c| vt[(null[c], r)]);
    (basis, rank)
}

/// Construction diagnostics of a reference element.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ElementReport {
    pub k: usize,
    pub dim: usize,
    pub variant: Variant,
    pub n_dofs: usize,
    pub dim_qk: usize,
    pub constraint_rows: usize,
    pub constraint_rank: usize,
    pub null_space_dim: usize,
    pub condition_number: f64,
    pub duality_residual: f64,
}

#[derive(Debug, Clone)]
pub struct ReferenceElement<T: Real> {
    k: usize,
    dim: usize,
    variant: Variant,
    denom: i64,
    dofs: Vec<DofSpec<T>>,
    basis: PolyBasis<T>,
    space_basis: DMatrix<T>,
    shape_coeffs: DMatrix<T>,
    report: ElementReport,
}

pub fn build_element<T: Real>(
    k: usize,
    dim: usize,
    variant: Variant,
) -> Result<ReferenceElement<T>> {
    ReferenceElement::new(k, dim, variant)
}

impl<T: Real> ReferenceElement<T> {
    pub fn new(k: usize, dim: usize, variant: Variant) -> Result<Self> {
        let dofs = dof_list::<T>(k, dim, variant)?;
        let basis = PolyBasis::<T>::new(k, dim)?;
        let nq = basis.len();
        let nd = dofs.len();

        let (space_basis, constraint_rows, constraint_rank) = match variant {
            Variant::Bfs => (DMatrix::identity(nq, nq), 0, 0),
            Variant::Bell => {
                let c = constraint_matrix::<T>(k, dim)?;
                let (null, rank) = null_space(&c);
                (null, c.nrows(), rank)
            }
        };
        if space_basis.ncols() != nd {
            return Err(Error::Unisolvency {
                null_dim: space_basis.ncols(),
                expected: nd,
            });
        }

        // functionals applied to every Q_k basis polynomial
        let functionals = DMatrix::from_fn(nd, nq, |_, _| T::zero());
        let mut functionals = functionals;
        for (m, dof) in dofs.iter().enumerate() {
            let row = basis.eval(&dof.location, dof.deriv)?;
            for (i, v) in row.into_iter().enumerate() {
                functionals[(m, i)] = v;
            }
        }
        let gram = &functionals * &space_basis;
        let sv = gram.clone().singular_values();
        let smin = sv.min();
        let condition = if smin > T::zero() {
            (sv.max() / smin).to_f64_lossy()
        } else {
            f64::INFINITY
        };
        if !(condition <= MAX_CONDITION) {
            return Err(Error::IllConditioned { cond: condition });
        }
        let inverse = gram
            .try_inverse()
            .ok_or(Error::IllConditioned { cond: condition })?;
        let shape_coeffs = (&space_basis * inverse).transpose();

        let duality = &functionals * shape_coeffs.transpose();
        let mut residual = T::zero();
        for i in 0..nd {
            for j in 0..nd {
                let target = if i == j { T::one() } else { T::zero() };
                residual = residual.max((duality[(i, j)] - target).abs());
            }
        }
        let report = ElementReport {
            k,
            dim,
            variant,
            n_dofs: nd,
            dim_qk: nq,
            constraint_rows,
            constraint_rank,
            null_space_dim: space_basis.ncols(),
            condition_number: condition,
            duality_residual: residual.to_f64_lossy(),
        };
        Ok(ReferenceElement {
            k,
            dim,
            variant,
            denom: variant.lattice_denominator(k),
            dofs,
            basis,
            space_basis,
            shape_coeffs,
            report,
        })
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs.len()
    }

    pub fn lattice_denominator(&self) -> i64 {
        self.denom
    }

    pub fn dofs(&self) -> &[DofSpec<T>] {
        &self.dofs
    }

    pub fn basis(&self) -> &PolyBasis<T> {
        &self.basis
    }

    /// Columns span the element space, in tensor-Legendre coefficients.
    pub fn space_basis(&self) -> &DMatrix<T> {
        &self.space_basis
    }

    /// Row `m` holds the tensor-Legendre coefficients of shape function `m`.
    pub fn shape_coeffs(&self) -> &DMatrix<T> {
        &self.shape_coeffs
    }

    pub fn report(&self) -> &ElementReport {
        &self.report
    }

    /// `∂^deriv φ_m(point)` for every shape function `m`.
    pub fn eval_shape(&self, point: &[T], deriv: Deriv) -> Result<Vec<T>> {
        let b = DVector::from_vec(self.basis.eval(point, deriv)?);
        Ok((&self.shape_coeffs * b).data.into())
    }

    /// Matrix of `∂^deriv φ_m` at every point of a rule: entry `(m, q)`.
    pub fn shape_table(&self, rule: &TensorRule<T>, derivs: &[Deriv]) -> Result<DMatrix<T>> {
        if derivs.iter().any(|d| d.iter().any(|&o| o > 2)) {
            return Err(Error::UnsupportedDerivative(
                *derivs.iter().find(|d| d.iter().any(|&o| o > 2)).unwrap(),
            ));
        }
        let nq = self.basis.len();
        let mut b = DMatrix::<T>::zeros(nq, rule.len());
        let mut buf = vec![T::zero(); nq];
        for (q, pt) in rule.points.iter().enumerate() {
            let tables = self.basis.tables(pt);
            let mut col = b.column_mut(q);
            for &d in derivs {
                self.basis.eval_from_tables(&tables, d, &mut buf);
                for i in 0..nq {
                    col[i] += buf[i];
                }
            }
        }
        Ok(&self.shape_coeffs * b)
    }

    /// Reference Laplacian of every shape function at every rule point.
    pub fn laplacian_table(&self, rule: &TensorRule<T>) -> Result<DMatrix<T>> {
        let derivs: Vec<Deriv> = (0..self.dim)
            .map(|a| {
                let mut d = [0; 3];
                d[a] = 2;
                d
            })
            .collect();
        self.shape_table(rule, &derivs)
    }
}
