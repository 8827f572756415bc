//! Gauss-Legendre rules on the unit interval and their tensor products.
//!
//! The reference interval is `[0, 1]`, so that reference-cell coordinates map
//! onto physical cells as `x = anchor + h * t`.

use crate::{Error, Real, Result};

pub const MAX_POINTS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule1D<T> {
    pub points: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> QuadRule1D<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate<F: Fn(T) -> T>(&self, f: F) -> T {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Evaluates the Legendre polynomial `P_m` and its derivative at `x` in `[-1, 1]`.
fn legendre_with_derivative<T: Real>(m: usize, x: T) -> (T, T) {
    let mut p_prev = T::one();
    let mut p = x;
    if m == 0 {
        return (T::one(), T::zero());
    }
    for j in 1..m {
        let jj = T::from_count(j);
        let next = ((jj + jj + T::one()) * x * p - jj * p_prev) / (jj + T::one());
        p_prev = p;
        p = next;
    }
    // P'_m = m (x P_m - P_{m-1}) / (x^2 - 1), safe in the open interval
    let dp = T::from_count(m) * (x * p - p_prev) / (x * x - T::one());
    (p, dp)
}

/// The `m`-point Gauss-Legendre rule mapped to `[0, 1]`.
///
/// Nodes are the roots of `P_m`, seeded by the Chebyshev-type estimate
/// `cos(pi (i + 3/4) / (m + 1/2))` and polished by Newton iteration.
pub fn gauss_legendre_1d<T: Real>(m: usize) -> Result<QuadRule1D<T>> {
    if m == 0 || m > MAX_POINTS {
        return Err(Error::InvalidArgument(format!(
            "quadrature point count must be in 1..={MAX_POINTS}, got {m}"
        )));
    }
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let tol = T::tol(1e-15);
    let mut nodes = vec![T::zero(); m];
    let mut weights = vec![T::zero(); m];
    // positive roots in decreasing order `i = 0 .. m/2`, mirrored for the rest
    for i in 0..m.div_ceil(2) {
        let seed = std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5);
        let mut x = T::lit(seed.cos());
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= tol {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        if d.is_finite() {
            dp = d;
        }
        let w = two / ((T::one() - x * x) * dp * dp);
        // x is in [-1, 1]; node m-1-i is the mirror image of node i.
        nodes[m - 1 - i] = half * (T::one() + x);
        nodes[i] = half * (T::one() - x);
        weights[m - 1 - i] = half * w;
        weights[i] = half * w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = half;
    }
    Ok(QuadRule1D {
        points: nodes,
        weights,
    })
}

/// d-fold tensor product rule on `[0, 1]^d`.
///
/// Points are stored with trailing unused coordinates set to zero. Ordering is
/// lexicographic with the first axis fastest and the last axis slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorRule<T> {
    pub dim: usize,
    /// Number of points per axis.
    pub order: usize,
    pub points: Vec<[T; 3]>,
    pub weights: Vec<T>,
}

impl<T: Real> TensorRule<T> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate<F: Fn(&[T; 3]) -> T>(&self, f: F) -> T {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(x, &w)| w * f(x))
            .sum()
    }
}

pub fn tensor_rule<T: Real>(base: &QuadRule1D<T>, dim: usize) -> Result<TensorRule<T>> {
    if !(2..=3).contains(&dim) {
        return Err(Error::InvalidArgument(format!(
            "tensor rule dimension must be 2 or 3, got {dim}"
        )));
    }
    let m = base.len();
    let outer = if dim == 3 { m } else { 1 };
    let mut points = Vec::with_capacity(m.pow(dim as u32));
    let mut weights = Vec::with_capacity(points.capacity());
    for i2 in 0..outer {
        for i1 in 0..m {
            for i0 in 0..m {
                let (z, wz) = if dim == 3 {
                    (base.points[i2], base.weights[i2])
                } else {
                    (T::zero(), T::one())
                };
                points.push([base.points[i0], base.points[i1], z]);
                weights.push(base.weights[i0] * base.weights[i1] * wz);
            }
        }
    }
    Ok(TensorRule {
        dim,
        order: m,
        points,
        weights,
    })
}

/// Shorthand for `tensor_rule(gauss_legendre_1d(m)?, dim)`.
pub fn gauss_tensor<T: Real>(m: usize, dim: usize) -> Result<TensorRule<T>> {
    tensor_rule(&gauss_legendre_1d(m)?, dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn midpoint_rule() {
        let r = gauss_legendre_1d::<f64>(1).unwrap();
        assert_eq!(r.points, vec![0.5]);
        assert_relative_eq!(r.weights[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn two_point_rule_matches_closed_form() {
        let r = gauss_legendre_1d::<f64>(2).unwrap();
        let d = 1.0 / (2.0 * 3f64.sqrt());
        assert_relative_eq!(r.points[0], 0.5 - d, epsilon = 1e-15);
        assert_relative_eq!(r.points[1], 0.5 + d, epsilon = 1e-15);
        assert_relative_eq!(r.weights[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(r.weights[1], 0.5, epsilon = 1e-15);
        for j in 0..=3 {
            let exact = 1.0 / (j as f64 + 1.0);
            assert_relative_eq!(r.integrate(|x| x.powi(j)), exact, max_relative = 1e-14);
        }
    }

    #[test]
    fn five_points_integrate_degree_nine() {
        let r = gauss_legendre_1d::<f64>(5).unwrap();
        assert!((r.integrate(|x| x.powi(9)) - 0.1).abs() < 1e-14);
    }

    #[test]
    fn out_of_range_counts_are_rejected() {
        assert!(matches!(
            gauss_legendre_1d::<f64>(0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(gauss_legendre_1d::<f64>(65).is_err());
        assert!(gauss_legendre_1d::<f64>(64).is_ok());
    }

    #[test]
    fn rule_invariants_up_to_64_points() {
        for m in 1..=MAX_POINTS {
            let r = gauss_legendre_1d::<f64>(m).unwrap();
            assert!(r.points.windows(2).all(|p| p[0] < p[1]), "m={m}");
            assert!(r.points.iter().all(|&x| x > 0.0 && x < 1.0));
            assert!(r.weights.iter().all(|&w| w > 0.0));
            let total: f64 = r.weights.iter().sum();
            assert!((total - 1.0).abs() < 1e-14, "m={m} sum={total}");
            for i in 0..m {
                assert!((r.points[i] + r.points[m - 1 - i] - 1.0).abs() < 1e-14);
            }
            for j in 0..2 * m {
                let exact = 1.0 / (j as f64 + 1.0);
                let got = r.integrate(|x| x.powi(j as i32));
                assert!((got - exact).abs() <= 1e-13 * exact, "m={m} j={j}");
            }
        }
    }

    #[test]
    fn single_precision_rule() {
        let r = gauss_legendre_1d::<f32>(6).unwrap();
        let total: f32 = r.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-6);
        assert!((r.integrate(|x| x.powi(11)) - 1.0 / 12.0).abs() < 1e-6);
    }

    #[test]
    fn tensor_rules() {
        let r = gauss_tensor::<f64>(1, 2).unwrap();
        assert_eq!(r.points, vec![[0.5, 0.5, 0.0]]);
        assert_relative_eq!(r.weights[0], 1.0);

        let r = gauss_tensor::<f64>(2, 2).unwrap();
        assert_eq!(r.len(), 4);
        assert!(r.weights.iter().all(|&w| (w - 0.25).abs() < 1e-15));

        let r = gauss_tensor::<f64>(3, 3).unwrap();
        assert_eq!(r.len(), 27);
        let got = r.integrate(|p| (p[0] * p[1] * p[2]).powi(2));
        assert!((got - 1.0 / 27.0).abs() < 1e-13);
    }

    #[test]
    fn tensor_ordering_has_last_axis_slowest() {
        let base = gauss_legendre_1d::<f64>(3).unwrap();
        let r = tensor_rule(&base, 3).unwrap();
        assert_eq!(r.points[1][0], base.points[1]);
        assert_eq!(r.points[1][2], base.points[0]);
        assert_eq!(r.points[9][2], base.points[1]);
        assert_eq!(r.points[3][1], base.points[1]);
    }

    #[test]
    fn tensor_dimension_is_validated() {
        let base = gauss_legendre_1d::<f64>(2).unwrap();
        assert!(tensor_rule(&base, 1).is_err());
        assert!(tensor_rule(&base, 4).is_err());
    }
}
