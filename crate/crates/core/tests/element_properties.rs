mod common;

use c1qk::analysis::ManufacturedSolution;
use c1qk::quadrature::gauss_tensor;
use c1qk::refelem::ReferenceElement;
use c1qk::Variant;
use common::Polynomial;
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::SeedableRng;

/// Legendre coefficients of `p` by exact L² projection onto Q_k.
fn legendre_coefficients(elem: &ReferenceElement<f64>, p: &Polynomial) -> DVector<f64> {
    let basis = elem.basis();
    let rule = gauss_tensor::<f64>(elem.degree() + 1, elem.dim()).unwrap();
    let mut c = DVector::zeros(basis.len());
    for (pt, &w) in rule.points.iter().zip(&rule.weights) {
        let v = basis.eval(&pt[..], [0; 3]).unwrap();
        let pv = p.value(&pt[..elem.dim()]);
        for (ci, vi) in c.iter_mut().zip(&v) {
            *ci += w * pv * vi;
        }
    }
    c
}

#[test]
fn space_contains_total_degree_polynomials() {
    let mut rng = StdRng::seed_from_u64(7);
    for (k, dim) in [(4, 2), (5, 2), (6, 2), (7, 2), (4, 3), (5, 3)] {
        for variant in [Variant::Bell, Variant::Bfs] {
            let elem = ReferenceElement::<f64>::new(k, dim, variant).unwrap();
            let b = elem.space_basis();
            let svd = b.clone().svd(true, true);
            for _ in 0..100 {
                let p = Polynomial::random_total_degree(&mut rng, dim, k as u32);
                let c = legendre_coefficients(&elem, &p);
                let y = svd.solve(&c, 1e-12).unwrap();
                let resid = (b * y - &c).norm() / c.norm();
                assert!(
                    resid < 1e-8,
                    "k={k} dim={dim} {variant}: residual {resid:e}"
                );
            }
        }
    }
}

/// Normal derivative of every shape function on the facet `x_axis = side`,
/// fitted by tensor monomials in the centred tangential variables `s = 2t - 1`
/// at Chebyshev nodes; the top-degree coefficients vanish in `s` exactly when
/// they vanish in `t`. Returns the largest
/// coefficient with some tangential exponent equal to `k`, relative to the
/// largest coefficient of the same shape function.
fn worst_top_degree_normal_trace(elem: &ReferenceElement<f64>, axis: usize, side: f64) -> f64 {
    let k = elem.degree();
    let dim = elem.dim();
    let tang: Vec<usize> = (0..dim).filter(|&a| a != axis).collect();
    let cheb: Vec<f64> = (0..=k)
        .map(|j| ((2 * j + 1) as f64 * std::f64::consts::PI / (2 * k + 2) as f64).cos())
        .collect();
    let m = (k + 1).pow(tang.len() as u32);
    let split = |i: usize| -> Vec<usize> {
        let mut rest = i;
        tang.iter()
            .map(|_| {
                let d = rest % (k + 1);
                rest /= k + 1;
                d
            })
            .collect()
    };
    let mut vander = DMatrix::zeros(m, m);
    for row in 0..m {
        let pi = split(row);
        for col in 0..m {
            let ei = split(col);
            vander[(row, col)] = pi
                .iter()
                .zip(&ei)
                .map(|(&p, &e)| cheb[p].powi(e as i32))
                .product();
        }
    }
    let lu = vander.lu();
    let mut deriv = [0u8; 3];
    deriv[axis] = 1;
    let mut samples = DMatrix::zeros(m, elem.n_dofs());
    for row in 0..m {
        let mut x = [0.0; 3];
        x[axis] = side;
        for (&a, &p) in tang.iter().zip(&split(row)) {
            x[a] = 0.5 * (cheb[p] + 1.0);
        }
        let vals = elem.eval_shape(&x[..dim], deriv).unwrap();
        for (j, v) in vals.iter().enumerate() {
            samples[(row, j)] = *v;
        }
    }
    let coeffs = lu.solve(&samples).unwrap();
    let mut worst: f64 = 0.0;
    for j in 0..elem.n_dofs() {
        let col = coeffs.column(j);
        let scale = col.amax().max(1.0);
        for i in 0..m {
            if split(i).iter().any(|&e| e == k) {
                worst = worst.max(col[i].abs() / scale);
            }
        }
    }
    worst
}

#[test]
fn bell_normal_derivatives_drop_one_degree_on_every_facet() {
    for (k, dim) in [(4, 2), (5, 2), (6, 2), (7, 2), (4, 3), (5, 3), (6, 3)] {
        let elem = ReferenceElement::<f64>::new(k, dim, Variant::Bell).unwrap();
        for axis in 0..dim {
            for side in [0.0, 1.0] {
                let w = worst_top_degree_normal_trace(&elem, axis, side);
                assert!(w < 1e-8, "k={k} dim={dim} axis={axis} side={side}: {w:e}");
            }
        }
    }
}

#[test]
fn bfs_normal_derivatives_keep_full_degree() {
    // the trace test above must be able to fail
    let elem = ReferenceElement::<f64>::new(4, 2, Variant::Bfs).unwrap();
    assert!(worst_top_degree_normal_trace(&elem, 0, 0.0) > 1e-3);
}

#[test]
fn shape_functions_are_dual_to_the_functionals() {
    for (k, dim) in [(5, 2), (4, 3)] {
        for variant in [Variant::Bell, Variant::Bfs] {
            let elem = ReferenceElement::<f64>::new(k, dim, variant).unwrap();
            for (i, dof) in elem.dofs().iter().enumerate() {
                let vals = elem.eval_shape(&dof.location[..dim], dof.deriv).unwrap();
                for (j, v) in vals.iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (v - expect).abs() < 1e-8,
                        "{variant} k={k} dim={dim} ({i},{j})"
                    );
                }
            }
        }
    }
}
