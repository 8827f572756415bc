//! Rectangular C¹-Q_k finite elements for the clamped biharmonic problem.
//!
//! Two element families live here: the reduced Bell-type element, whose normal
//! derivative on every facet is one degree lower than the element degree, and
//! the classical tensor-product Bogner-Fox-Schmit (BFS) element. Both are built
//! numerically from point/derivative functionals over a tensor-Legendre basis
//! of Q_k, and both plug into the same uniform-grid assembly, solver and
//! convergence-study machinery.
//!
//! Everything numeric is generic over [`Real`]; the aliases at the crate root
//! fix the scalar to `f64`, which is what the CLI and the tables use.

pub mod analysis;
pub mod assembly;
pub mod cli;
pub mod error;
pub mod mesh;
pub mod poly;
pub mod quadrature;
pub mod refelem;
pub mod solver;

pub use error::{Error, Result};
pub use refelem::Variant;

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Scalar type used throughout the crate.
///
/// Implemented for `f32` and `f64`. All thresholds in the crate are stated for
/// `f64`; with `f32` the rank and Newton tolerances fall back to multiples of
/// machine epsilon.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + std::iter::Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("literal must fit in scalar type")
    }

    /// Converts a count or index into `Self`.
    #[inline]
    fn from_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count must fit in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// `max(threshold, 64 ε)`: a tolerance that stays meaningful in low precision.
    #[inline]
    fn tol(threshold: f64) -> Self {
        let floor = Self::default_epsilon() * Self::lit(64.0);
        let t = Self::lit(threshold);
        if t > floor {
            t
        } else {
            floor
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type QuadRule1D = quadrature::QuadRule1D<f64>;
pub type TensorRule = quadrature::TensorRule<f64>;
pub type GridMesh = mesh::GridMesh<f64>;
pub type PolyBasis = poly::PolyBasis<f64>;
pub type DofSpec = refelem::DofSpec<f64>;
pub type ReferenceElement = refelem::ReferenceElement<f64>;
pub type CsrMatrix = assembly::CsrMatrix<f64>;
pub type SparseSystem = assembly::SparseSystem<f64>;
pub type Sin2Solution = analysis::Sin2Solution<f64>;
