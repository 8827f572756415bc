//! Orthonormal tensor-Legendre basis of Q_k on the unit box.

use crate::{Error, Real, Result};

/// Per-axis derivative orders of a partial derivative.
pub type Deriv = [u8; 3];

/// Basis `L_{i0}(x) L_{i1}(y) L_{i2}(z)` of Q_k, where `L_j(t) = sqrt(2j+1) P_j(2t-1)`
/// is the Legendre polynomial shifted to `[0, 1]` and normalised in `L²(0, 1)`.
///
/// Basis functions are indexed as `i0 + (k+1) i1 + (k+1)² i2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolyBasis<T> {
    k: usize,
    dim: usize,
    _scalar: std::marker::PhantomData<T>,
}

/// Values, first and second derivatives of `L_0..=L_k` at one abscissa.
#[derive(Debug, Clone)]
pub struct Table1D<T> {
    pub d: [Vec<T>; 3],
}

impl<T: Real> PolyBasis<T> {
    pub fn new(k: usize, dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidArgument(format!(
                "polynomial basis dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        Ok(PolyBasis {
            k,
            dim,
            _scalar: std::marker::PhantomData,
        })
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        (self.k + 1).pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, multi: [usize; 3]) -> usize {
        let p = self.k + 1;
        multi[0] + p * multi[1] + p * p * multi[2]
    }

    pub fn multi_index(&self, i: usize) -> [usize; 3] {
        let p = self.k + 1;
        let mut m = [0; 3];
        let mut rest = i;
        for slot in m.iter_mut().take(self.dim) {
            *slot = rest % p;
            rest /= p;
        }
        m
    }

    pub fn table_1d(&self, t: T) -> Table1D<T> {
        let k = self.k;
        let x = t + t - T::one();
        let mut p = vec![T::zero(); k + 1];
        let mut dp = vec![T::zero(); k + 1];
        let mut ddp = vec![T::zero(); k + 1];
        p[0] = T::one();
        if k >= 1 {
            p[1] = x;
            dp[1] = T::one();
        }
        for j in 1..k {
            let a = T::from_count(2 * j + 1);
            let b = T::from_count(j);
            let c = T::from_count(j + 1);
            p[j + 1] = (a * x * p[j] - b * p[j - 1]) / c;
            dp[j + 1] = (a * (p[j] + x * dp[j]) - b * dp[j - 1]) / c;
            ddp[j + 1] = (a * (dp[j] + dp[j] + x * ddp[j]) - b * ddp[j - 1]) / c;
        }
        let two = T::lit(2.0);
        let four = T::lit(4.0);
        for j in 0..=k {
            let s = T::from_count(2 * j + 1).sqrt();
            p[j] *= s;
            dp[j] *= s * two;
            ddp[j] *= s * four;
        }
        Table1D { d: [p, dp, ddp] }
    }

    fn check_deriv(deriv: Deriv) -> Result<()> {
        if deriv.iter().any(|&d| d > 2) {
            return Err(Error::UnsupportedDerivative(deriv));
        }
        Ok(())
    }

    /// Per-axis 1D tables at `point`.
    pub fn tables(&self, point: &[T]) -> Vec<Table1D<T>> {
        (0..self.dim).map(|a| self.table_1d(point[a])).collect()
    }

    /// Values of `∂^deriv` of every basis function, from precomputed per-axis tables.
    pub fn eval_from_tables(&self, tables: &[Table1D<T>], deriv: Deriv, out: &mut [T]) {
        let p = self.k + 1;
        match self.dim {
            1 => out[..p].copy_from_slice(&tables[0].d[deriv[0] as usize]),
            2 => {
                let tx = &tables[0].d[deriv[0] as usize];
                let ty = &tables[1].d[deriv[1] as usize];
                for j in 0..p {
                    for i in 0..p {
                        out[i + p * j] = tx[i] * ty[j];
                    }
                }
            }
            _ => {
                let tx = &tables[0].d[deriv[0] as usize];
                let ty = &tables[1].d[deriv[1] as usize];
                let tz = &tables[2].d[deriv[2] as usize];
                for l in 0..p {
                    for j in 0..p {
                        let yz = ty[j] * tz[l];
                        for i in 0..p {
                            out[i + p * (j + p * l)] = tx[i] * yz;
                        }
                    }
                }
            }
        }
    }

    pub fn eval(&self, point: &[T], deriv: Deriv) -> Result<Vec<T>> {
        Self::check_deriv(deriv)?;
        if point.len() < self.dim {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coordinates, basis is {}-dimensional",
                point.len(),
                self.dim
            )));
        }
        let mut out = vec![T::zero(); self.len()];
        self.eval_from_tables(&self.tables(point), deriv, &mut out);
        Ok(out)
    }
}
