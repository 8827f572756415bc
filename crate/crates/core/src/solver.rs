//! Solvers for the reduced SPD system: Jacobi-preconditioned conjugate
//! gradients and a profile (envelope) Cholesky factorisation.

use std::time::Instant;

use crate::assembly::SparseSystem;
use crate::{Error, Real, Result};

/// Largest system handed to the direct solver.
pub const CHOLESKY_LIMIT: usize = 20_000;
/// `auto` switches from Cholesky to PCG above this many unknowns.
pub const AUTO_CHOLESKY_MAX: usize = CHOLESKY_LIMIT;
/// Restarts without progress of the true residual before PCG gives up.
const MAX_STALLED_RESTARTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pcg,
    Cholesky,
    Auto,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Pcg => "pcg",
            Method::Cholesky => "cholesky",
            Method::Auto => "auto",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::Auto,
            rel_tol: 1e-11,
            max_iter: 500_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "relative tolerance must lie in (0, 1), got {}",
                self.rel_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument(
                "iteration limit must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SolveStats {
    /// Method actually used (never `Auto`).
    pub method: Method,
    pub iterations: usize,
    pub rel_residual: f64,
    pub seconds: f64,
    /// Relative residual after every PCG iteration.
    #[serde(skip)]
    pub history: Vec<f64>,
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn relative_residual<T: Real>(system: &SparseSystem<T>, x: &[T]) -> T {
    let ax = system.matrix.mul_vec(x);
    let r: Vec<T> = system.rhs.iter().zip(&ax).map(|(&b, &y)| b - y).collect();
    let bn = norm(&system.rhs);
    if bn == T::zero() {
        norm(&r)
    } else {
        norm(&r) / bn
    }
}

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
pub fn pcg<T: Real>(
    system: &SparseSystem<T>,
    config: &SolverConfig,
) -> Result<(Vec<T>, SolveStats)> {
    config.validate()?;
    let start = Instant::now();
    let a = &system.matrix;
    let b = &system.rhs;
    let n = a.nrows;
    let mut inv_diag = Vec::with_capacity(n);
    for (i, d) in a.diagonal().into_iter().enumerate() {
        if !(d > T::zero()) {
            return Err(Error::NotSpd {
                row: i,
                pivot: d.to_f64_lossy(),
            });
        }
        inv_diag.push(T::one() / d);
    }
    let bnorm = norm(b);
    let mut x = vec![T::zero(); n];
    let mut history = Vec::new();
    if bnorm == T::zero() {
        return Ok((
            x,
            SolveStats {
                method: Method::Pcg,
                iterations: 0,
                rel_residual: 0.0,
                seconds: start.elapsed().as_secs_f64(),
                history,
            },
        ));
    }
    let tol = T::lit(config.rel_tol);
    let mut r = b.clone();
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(&r, &d)| r * d).collect();
    let mut p = z.clone();
    let mut q = vec![T::zero(); n];
    let mut rz = dot(&r, &z);
    let mut best = (T::one(), x.clone());
    let mut iterations = 0;
    let mut stalled = 0;
    let mut best_true = T::max_value().unwrap_or_else(T::one);
    while iterations < config.max_iter {
        a.mul_vec_into(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > T::zero()) {
            return Err(Error::NotSpd {
                row: iterations,
                pivot: pq.to_f64_lossy(),
            });
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        iterations += 1;
        let mut rel = norm(&r) / bnorm;
        history.push(rel.to_f64_lossy());
        if rel < best.0 {
            best.0 = rel;
            best.1.copy_from_slice(&x);
        }
        if rel <= tol {
            // guard against drift of the recursive residual
            a.mul_vec_into(&x, &mut q);
            for i in 0..n {
                r[i] = b[i] - q[i];
            }
            rel = norm(&r) / bnorm;
            if rel <= tol {
                return Ok((
                    x,
                    SolveStats {
                        method: Method::Pcg,
                        iterations,
                        rel_residual: rel.to_f64_lossy(),
                        seconds: start.elapsed().as_secs_f64(),
                        history,
                    },
                ));
            }
            // The recursive residual has reached the rounding floor; restart
            // from the true residual unless that stopped improving.
            if rel < best_true {
                best_true = rel;
                stalled = 0;
            } else {
                stalled += 1;
                if stalled >= MAX_STALLED_RESTARTS {
                    break;
                }
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
            continue;
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NonConvergence {
        iterations,
        residual: relative_residual(system, &best.1).to_f64_lossy(),
        best_iterate: best.1.iter().map(|v| v.to_f64_lossy()).collect(),
    })
}

/// Lower Cholesky factor stored row by row over each row's envelope.
struct ProfileCholesky<T> {
    first: Vec<usize>,
    offset: Vec<usize>,
    l: Vec<T>,
}

impl<T: Real> ProfileCholesky<T> {
    fn factor(system: &SparseSystem<T>) -> Result<Self> {
        let a = &system.matrix;
        let n = a.nrows;
        let mut first = Vec::with_capacity(n);
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for i in 0..n {
            let (cols, _) = a.row(i);
            let f = cols.first().copied().unwrap_or(i).min(i);
            first.push(f);
            offset.push(offset[i] + (i - f + 1));
        }
        let mut l = vec![T::zero(); offset[n]];
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j <= i {
                    l[offset[i] + j - first[i]] = v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let lo = fi.max(fj);
                let (head, tail) = l.split_at_mut(offset[i]);
                let row_i = &mut tail[..i - fi + 1];
                let s = if j < i {
                    let row_j = &head[offset[j]..offset[j] + (j - fj + 1)];
                    dot(&row_i[lo - fi..j - fi], &row_j[lo - fj..j - fj])
                } else {
                    dot(&row_i[lo - fi..j - fi], &row_i[lo - fi..j - fi])
                };
                let v = row_i[j - fi] - s;
                if j < i {
                    let djj = head[offset[j] + j - fj];
                    row_i[j - fi] = v / djj;
                } else {
                    if !(v > T::zero()) {
                        return Err(Error::NotSpd {
                            row: i,
                            pivot: v.to_f64_lossy(),
                        });
                    }
                    row_i[j - fi] = v.sqrt();
                }
            }
        }
        Ok(ProfileCholesky { first, offset, l })
    }

    fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.first.len();
        let mut y = b.to_vec();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.l[self.offset[i]..self.offset[i + 1]];
            let s = dot(&row[..i - fi], &y[fi..i]);
            y[i] = (y[i] - s) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.l[self.offset[i]..self.offset[i + 1]];
            y[i] /= row[i - fi];
            let xi = y[i];
            for (k, &lik) in (fi..i).zip(row) {
                y[k] -= lik * xi;
            }
        }
        y
    }
}

/// Direct solve by Cholesky factorisation restricted to the matrix profile.
pub fn cholesky<T: Real>(system: &SparseSystem<T>) -> Result<Vec<T>> {
    let n = system.matrix.nrows;
    if n > CHOLESKY_LIMIT {
        return Err(Error::TooLarge {
            size: n,
            limit: CHOLESKY_LIMIT,
        });
    }
    Ok(ProfileCholesky::factor(system)?.solve(&system.rhs))
}

/// Solves with the configured method; `Auto` picks Cholesky for small systems.
pub fn solve<T: Real>(
    system: &SparseSystem<T>,
    config: &SolverConfig,
) -> Result<(Vec<T>, SolveStats)> {
    config.validate()?;
    let method = match config.method {
        Method::Auto if system.matrix.nrows <= AUTO_CHOLESKY_MAX => Method::Cholesky,
        Method::Auto => Method::Pcg,
        m => m,
    };
    match method {
        Method::Cholesky => {
            let start = Instant::now();
            let x = cholesky(system)?;
            let rel = relative_residual(system, &x).to_f64_lossy();
            Ok((
                x,
                SolveStats {
                    method,
                    iterations: 0,
                    rel_residual: rel,
                    seconds: start.elapsed().as_secs_f64(),
                    history: Vec::new(),
                },
            ))
        }
        _ => pcg(system, config),
    }
}
