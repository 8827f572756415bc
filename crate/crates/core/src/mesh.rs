//! Uniform grids on the unit square and unit cube.
//!
//! The mesh is implicit: cells, vertices, edges and faces are enumerated by
//! index arithmetic. Cells and vertices are numbered lexicographically with the
//! first axis fastest.

use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityKind {
    Vertex,
    Edge,
    Face,
    Cell,
}

impl EntityKind {
    /// Kind of an entity spanning `span` axes in a `dim`-dimensional grid.
    pub fn from_span(span: usize, dim: usize) -> Self {
        match span {
            0 => EntityKind::Vertex,
            1 => EntityKind::Edge,
            s if s == dim => EntityKind::Cell,
            _ => EntityKind::Face,
        }
    }
}

/// A mesh entity: its kind, the axes it extends along, and its index among all
/// entities of that kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EntityRef {
    pub kind: EntityKind,
    pub index: usize,
    /// `span[a]` is true iff the entity extends along axis `a`.
    pub span: [bool; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMesh<T> {
    dim: usize,
    n: usize,
    h: T,
}

pub fn build_mesh<T: Real>(dim: usize, n: usize) -> Result<GridMesh<T>> {
    GridMesh::new(dim, n)
}

impl<T: Real> GridMesh<T> {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidArgument(format!(
                "mesh dimension must be 2 or 3, got {dim}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidArgument(
                "cells per axis must be at least 1".into(),
            ));
        }
        Ok(GridMesh {
            dim,
            n,
            h: T::one() / T::from_count(n),
        })
    }

    /// Mesh of level `level` (1-based) of the halving hierarchy: `n = 2^(level-1)`.
    pub fn level(dim: usize, level: usize) -> Result<Self> {
        if level == 0 || level > 20 {
            return Err(Error::InvalidArgument(format!(
                "mesh level must be in 1..=20, got {level}"
            )));
        }
        Self::new(dim, 1 << (level - 1))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> T {
        self.h
    }

    fn ext(&self, spanned: bool) -> usize {
        if spanned {
            self.n
        } else {
            self.n + 1
        }
    }

    pub fn cell_count(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn vertex_count(&self) -> usize {
        (self.n + 1).pow(self.dim as u32)
    }

    fn span_masks(&self, kind: EntityKind) -> impl Iterator<Item = [bool; 3]> + '_ {
        let dim = self.dim;
        (0u32..(1 << dim)).filter_map(move |m| {
            let span = [m & 1 != 0, m & 2 != 0, m & 4 != 0];
            (EntityKind::from_span(m.count_ones() as usize, dim) == kind).then_some(span)
        })
    }

    fn orientation_count(&self, span: [bool; 3]) -> usize {
        (0..self.dim).map(|a| self.ext(span[a])).product()
    }

    pub fn entity_count(&self, kind: EntityKind) -> usize {
        self.span_masks(kind)
            .map(|s| self.orientation_count(s))
            .sum()
    }

    pub fn edge_count(&self) -> usize {
        self.entity_count(EntityKind::Edge)
    }

    /// Two-dimensional facets; zero for a 2D mesh, where the cells are the faces.
    pub fn face_count(&self) -> usize {
        if self.dim == 3 {
            self.entity_count(EntityKind::Face)
        } else {
            0
        }
    }

    pub fn cell_multi_index(&self, cell: usize) -> Result<[usize; 3]> {
        if cell >= self.cell_count() {
            return Err(Error::InvalidArgument(format!(
                "cell index {cell} out of range (mesh has {} cells)",
                self.cell_count()
            )));
        }
        let n = self.n;
        let mut idx = [0; 3];
        let mut rest = cell;
        for slot in idx.iter_mut().take(self.dim) {
            *slot = rest % n;
            rest /= n;
        }
        Ok(idx)
    }

    /// Lexicographically smallest corner of a cell.
    pub fn cell_anchor(&self, cell: usize) -> Result<Vec<T>> {
        let idx = self.cell_multi_index(cell)?;
        Ok(idx[..self.dim]
            .iter()
            .map(|&i| T::from_count(i) * self.h)
            .collect())
    }

    pub fn is_boundary_point(&self, point: &[T], tol: T) -> bool {
        point
            .iter()
            .take(self.dim)
            .any(|&x| x.abs() <= tol || (x - T::one()).abs() <= tol)
    }

    /// Resolves a point given in integer lattice coordinates (units of `h / denom`)
    /// to the mesh entity whose relative interior contains it.
    pub fn locate_lattice(&self, coords: &[i64], denom: i64) -> Result<EntityRef> {
        let denom = denom.max(1);
        let limit = self.n as i64 * denom;
        if coords.len() < self.dim || coords[..self.dim].iter().any(|&c| c < 0 || c > limit) {
            return Err(Error::InvalidArgument(format!(
                "lattice point {coords:?} outside the unit box"
            )));
        }
        let mut span = [false; 3];
        let mut pos = [0usize; 3];
        for a in 0..self.dim {
            span[a] = coords[a] % denom != 0;
            pos[a] = (coords[a] / denom) as usize;
        }
        let kind = EntityKind::from_span(span.iter().filter(|&&s| s).count(), self.dim);
        let mut offset = 0;
        for s in self.span_masks(kind) {
            if s == span {
                break;
            }
            offset += self.orientation_count(s);
        }
        let mut index = 0;
        let mut stride = 1;
        for a in 0..self.dim {
            index += pos[a] * stride;
            stride *= self.ext(span[a]);
        }
        Ok(EntityRef {
            kind,
            index: offset + index,
            span,
        })
    }

    /// Cells sharing vertex `vertex` (lexicographic vertex numbering).
    pub fn cells_of_vertex(&self, vertex: usize) -> Result<Vec<usize>> {
        if vertex >= self.vertex_count() {
            return Err(Error::InvalidArgument(format!(
                "vertex index {vertex} out of range"
            )));
        }
        let mut v = [0usize; 3];
        let mut rest = vertex;
        for slot in v.iter_mut().take(self.dim) {
            *slot = rest % (self.n + 1);
            rest /= self.n + 1;
        }
        let mut cells = Vec::new();
        for corner in 0..(1usize << self.dim) {
            let mut index = 0;
            let mut stride = 1;
            let mut ok = true;
            for a in 0..self.dim {
                let shift = (corner >> a) & 1;
                if v[a] < shift || v[a] - shift >= self.n {
                    ok = false;
                    break;
                }
                index += (v[a] - shift) * stride;
                stride *= self.n;
            }
            if ok {
                cells.push(index);
            }
        }
        cells.sort_unstable();
        Ok(cells)
    }
}
