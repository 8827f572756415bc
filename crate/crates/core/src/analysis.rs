//! Manufactured solutions, nodal interpolation, error norms and convergence studies.

use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;

use crate::assembly::{
    assemble, dof_scaling, eliminate_boundary, number_dofs, AssemblyRules, GlobalDofMap,
};
use crate::mesh::GridMesh;
use crate::poly::Deriv;
use crate::quadrature::{gauss_tensor, TensorRule};
use crate::refelem::{ReferenceElement, Variant};
use crate::solver::{solve, Method, SolveStats, SolverConfig};
use crate::{Error, Real, Result};

/// An exact solution with enough derivatives for interpolation, forcing and errors.
pub trait ManufacturedSolution<T: Real>: Sync {
    fn dim(&self) -> usize;

    /// Highest per-axis derivative order [`derivative`](Self::derivative) supports.
    fn max_order(&self) -> u8;

    fn derivative(&self, point: &[T], deriv: Deriv) -> T;

    fn value(&self, point: &[T]) -> T {
        self.derivative(point, [0; 3])
    }

    fn laplacian(&self, point: &[T]) -> T {
        (0..self.dim())
            .map(|a| {
                let mut d = [0; 3];
                d[a] = 2;
                self.derivative(point, d)
            })
            .sum()
    }

    /// `Δ²u`, expanded as `Σ ∂⁴_a u + 2 Σ_{a<b} ∂²_a ∂²_b u`.
    fn forcing(&self, point: &[T]) -> T {
        let dim = self.dim();
        let mut f = T::zero();
        for a in 0..dim {
            let mut d = [0; 3];
            d[a] = 4;
            f += self.derivative(point, d);
            for b in a + 1..dim {
                let mut d = [0; 3];
                d[a] = 2;
                d[b] = 2;
                f += T::lit(2.0) * self.derivative(point, d);
            }
        }
        f
    }
}

/// `u = Π sin²(π x_a)` on the unit square or cube.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sin2Solution<T> {
    dim: usize,
    _scalar: std::marker::PhantomData<T>,
}

pub fn sin2_solution<T: Real>(dim: usize) -> Result<Sin2Solution<T>> {
    if !(2..=3).contains(&dim) {
        return Err(Error::InvalidArgument(format!(
            "manufactured solution dimension must be 2 or 3, got {dim}"
        )));
    }
    Ok(Sin2Solution {
        dim,
        _scalar: std::marker::PhantomData,
    })
}

impl<T: Real> Sin2Solution<T> {
    /// `d^order/dt^order sin²(π t)`, using `sin²(π t) = (1 - cos 2π t) / 2`.
    fn factor(t: T, order: u8) -> T {
        let pi = T::pi();
        let w = (pi + pi) * t;
        match order {
            0 => (T::one() - w.cos()) * T::lit(0.5),
            1 => pi * w.sin(),
            2 => T::lit(2.0) * pi * pi * w.cos(),
            3 => -T::lit(4.0) * pi.powi(3) * w.sin(),
            _ => -T::lit(8.0) * pi.powi(4) * w.cos(),
        }
    }
}

impl<T: Real> ManufacturedSolution<T> for Sin2Solution<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn max_order(&self) -> u8 {
        4
    }

    fn derivative(&self, point: &[T], deriv: Deriv) -> T {
        debug_assert!(deriv.iter().all(|&d| d <= 4));
        (0..self.dim)
            .map(|a| Self::factor(point[a], deriv[a]))
            .fold(T::one(), |acc, v| acc * v)
    }
}

fn check_solution<T: Real, U: ManufacturedSolution<T> + ?Sized>(
    elem: &ReferenceElement<T>,
    u: &U,
    needed: u8,
) -> Result<()> {
    if u.dim() != elem.dim() {
        return Err(Error::DimensionMismatch(format!(
            "solution is {}-dimensional, element is {}-dimensional",
            u.dim(),
            elem.dim()
        )));
    }
    let order = elem
        .dofs()
        .iter()
        .flat_map(|d| d.deriv)
        .max()
        .unwrap_or(0)
        .max(needed);
    if order > u.max_order() {
        return Err(Error::InvalidArgument(format!(
            "solution provides derivatives up to order {} per axis, {} required",
            u.max_order(),
            order
        )));
    }
    Ok(())
}

/// Nodal interpolant: every global functional applied to `u` in physical coordinates.
pub fn interpolate<T: Real, U: ManufacturedSolution<T> + ?Sized>(
    mesh: &GridMesh<T>,
    elem: &ReferenceElement<T>,
    dofmap: &GlobalDofMap,
    u: &U,
) -> Result<Vec<T>> {
    check_solution(elem, u, 0)?;
    let scale = T::from_count(mesh.n()) * T::lit(dofmap.lattice_denominator() as f64);
    Ok(dofmap
        .keys()
        .iter()
        .map(|key| {
            let mut x = [T::zero(); 3];
            for a in 0..mesh.dim() {
                x[a] = T::lit(key.coords[a] as f64) / scale;
            }
            u.derivative(&x[..mesh.dim()], key.deriv)
        })
        .collect())
}

/// Evaluates `∂^deriv v_h` at reference point `xhat` of `cell`, for a full-length
/// coefficient vector `coeffs`.
pub fn eval_fe<T: Real>(
    mesh: &GridMesh<T>,
    elem: &ReferenceElement<T>,
    dofmap: &GlobalDofMap,
    coeffs: &[T],
    cell: usize,
    xhat: &[T],
    deriv: Deriv,
) -> Result<T> {
    let h = mesh.h();
    let phi = elem.eval_shape(xhat, deriv)?;
    let order: i32 = deriv.iter().map(|&d| d as i32).sum();
    let s = dof_scaling(elem, h);
    let g = dofmap.cell(cell);
    let mut acc = T::zero();
    for m in 0..elem.n_dofs() {
        acc += coeffs[g[m]] * s[m] * phi[m];
    }
    Ok(acc * h.powi(-order))
}

/// Which second-order quantity [`error_norms`] reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Seminorm {
    /// `‖Δ(u - u_h)‖₀`
    #[default]
    Laplacian,
    /// Full H² seminorm, `(Σ_{a,b} ‖∂_a ∂_b (u - u_h)‖₀²)^{1/2}`.
    Hessian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms<T> {
    pub l2: T,
    pub seminorm: T,
}

pub fn error_norms<T: Real, U: ManufacturedSolution<T> + ?Sized>(
    mesh: &GridMesh<T>,
    elem: &ReferenceElement<T>,
    dofmap: &GlobalDofMap,
    coeffs: &[T],
    u: &U,
    quad: &TensorRule<T>,
    seminorm: Seminorm,
) -> Result<ErrorNorms<T>> {
    check_solution(elem, u, 2)?;
    if coeffs.len() != dofmap.total_dim() {
        return Err(Error::DimensionMismatch(format!(
            "coefficient vector has length {}, space has dimension {}",
            coeffs.len(),
            dofmap.total_dim()
        )));
    }
    let dim = mesh.dim();
    let h = mesh.h();
    let nd = elem.n_dofs();
    let values = elem.shape_table(quad, &[[0; 3]])?;
    // second-derivative tables with their multiplicity in the chosen seminorm
    let mut second: Vec<(Vec<Deriv>, T)> = Vec::new();
    match seminorm {
        Seminorm::Laplacian => {
            let derivs = (0..dim)
                .map(|a| {
                    let mut d = [0; 3];
                    d[a] = 2;
                    d
                })
                .collect();
            second.push((derivs, T::one()));
        }
        Seminorm::Hessian => {
            for a in 0..dim {
                for b in a..dim {
                    let mut d = [0; 3];
                    d[a] += 1;
                    d[b] += 1;
                    let mult = if a == b { T::one() } else { T::lit(2.0) };
                    second.push((vec![d], mult));
                }
            }
        }
    }
    let tables = second
        .iter()
        .map(|(d, m)| Ok((elem.shape_table(quad, d)?, *m)))
        .collect::<Result<Vec<_>>>()?;
    let scale = dof_scaling(elem, h);
    let h2 = h * h;
    let volume = h.powi(dim as i32);

    let per_cell: Vec<(T, T)> = (0..mesh.cell_count())
        .into_par_iter()
        .map(|cell| {
            let anchor = mesh.cell_anchor(cell).expect("cell index in range");
            let g = dofmap.cell(cell);
            let c: Vec<T> = (0..nd).map(|m| coeffs[g[m]] * scale[m]).collect();
            let mut l2 = T::zero();
            let mut semi = T::zero();
            let mut x = [T::zero(); 3];
            for (q, (p, &w)) in quad.points.iter().zip(&quad.weights).enumerate() {
                for a in 0..dim {
                    x[a] = anchor[a] + h * p[a];
                }
                let xs = &x[..dim];
                let mut uh = T::zero();
                for m in 0..nd {
                    uh += c[m] * values[(m, q)];
                }
                let e = u.value(xs) - uh;
                l2 += w * e * e;
                for ((table, mult), (derivs, _)) in tables.iter().zip(&second) {
                    let mut dh = T::zero();
                    for m in 0..nd {
                        dh += c[m] * table[(m, q)];
                    }
                    let exact: T = derivs.iter().map(|&d| u.derivative(xs, d)).sum();
                    let e = exact - dh / h2;
                    semi += w * *mult * e * e;
                }
            }
            (l2 * volume, semi * volume)
        })
        .collect();
    let (l2, semi) = per_cell
        .into_iter()
        .fold((T::zero(), T::zero()), |(a, b), (c, d)| (a + c, b + d));
    Ok(ErrorNorms {
        l2: l2.sqrt(),
        seminorm: semi.sqrt(),
    })
}

/// `log₂(coarse / fine)`.
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Deepest grid a study may request, `n = 2^(MAX_LEVELS - 1)`.
pub const MAX_LEVELS: usize = 12;

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub solver: SolverConfig,
    /// Points per axis for the stiffness integrals; default `k + 1`.
    pub stiffness_quad: Option<usize>,
    /// Points per axis for load and error integrals; default `k + 3`.
    pub quad: Option<usize>,
    pub seminorm: Seminorm,
    /// Writes the finest-level matrix in Matrix Market format.
    pub export_matrix: Option<PathBuf>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            solver: SolverConfig::default(),
            stiffness_quad: None,
            quad: None,
            seminorm: Seminorm::Laplacian,
            export_matrix: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct LevelRecord {
    pub level: usize,
    pub n: usize,
    pub h: f64,
    pub dim_total: usize,
    pub dim_free: usize,
    pub l2_error: f64,
    pub l2_order: Option<f64>,
    pub h2_error: f64,
    pub h2_order: Option<f64>,
    pub solver_iters: usize,
    pub seconds: f64,
    pub solver: Method,
    pub solver_residual: f64,
    /// Errors of the nodal interpolant on the same level.
    pub interp_l2_error: f64,
    pub interp_h2_error: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ConvergenceReport {
    pub dim: usize,
    pub k: usize,
    pub element: Variant,
    pub seminorm: Seminorm,
    pub levels: Vec<LevelRecord>,
}

/// Everything computed on one level; [`run_study`] keeps only the summary.
pub struct LevelSolution<T: Real> {
    pub mesh: GridMesh<T>,
    pub dofmap: GlobalDofMap,
    pub system: crate::assembly::SparseSystem<T>,
    /// Full-length coefficient vector of the discrete solution.
    pub coeffs: Vec<T>,
    pub stats: SolveStats,
    pub errors: ErrorNorms<T>,
}

/// Assembles and solves one mesh of the study and measures its error.
pub fn solve_level<T: Real, U: ManufacturedSolution<T> + ?Sized>(
    elem: &ReferenceElement<T>,
    n: usize,
    u: &U,
    config: &StudyConfig,
) -> Result<LevelSolution<T>> {
    let k = elem.degree();
    let dim = elem.dim();
    let mesh = GridMesh::<T>::new(dim, n)?;
    let dofmap = eliminate_boundary(&mesh, number_dofs(&mesh, elem)?);
    let quad = config.quad.unwrap_or(k + 3);
    let rules = AssemblyRules {
        stiffness: gauss_tensor(config.stiffness_quad.unwrap_or(k + 1), dim)?,
        load: gauss_tensor(quad, dim)?,
    };
    let system = assemble(&mesh, elem, &dofmap, |x| u.forcing(x), &rules)?;
    let (free, stats) = solve(&system, &config.solver)?;
    let coeffs = dofmap.expand(&free);
    let errors = error_norms(
        &mesh,
        elem,
        &dofmap,
        &coeffs,
        u,
        &rules.load,
        config.seminorm,
    )?;
    Ok(LevelSolution {
        mesh,
        dofmap,
        system,
        coeffs,
        stats,
        errors,
    })
}

/// Convergence study on the halving hierarchy `n = 1, 2, 4, ...` with `u = Π sin²(π x_a)`.
pub fn run_study(
    dim: usize,
    k: usize,
    variant: Variant,
    levels: usize,
    config: &StudyConfig,
) -> Result<ConvergenceReport> {
    let u = sin2_solution::<f64>(dim)?;
    let elem = ReferenceElement::<f64>::new(k, dim, variant)?;
    run_study_with(&elem, levels, &u, config)
}

pub fn run_study_with<U: ManufacturedSolution<f64> + ?Sized>(
    elem: &ReferenceElement<f64>,
    levels: usize,
    u: &U,
    config: &StudyConfig,
) -> Result<ConvergenceReport> {
    if levels < 2 {
        return Err(Error::InvalidArgument(format!(
            "levels must be >= 2, got {levels}"
        )));
    }
    if levels > MAX_LEVELS {
        return Err(Error::InvalidArgument(format!(
            "levels must be <= {MAX_LEVELS}, got {levels}"
        )));
    }
    config.solver.validate()?;
    let k = elem.degree();
    let quad = config.quad.unwrap_or(k + 3);
    if quad < k + 3 {
        return Err(Error::InvalidArgument(format!(
            "error quadrature needs at least k+3 = {} points per axis, got {quad}",
            k + 3
        )));
    }
    let mut records: Vec<LevelRecord> = Vec::with_capacity(levels);
    for level in 1..=levels {
        let n = 1usize << (level - 1);
        let sol = solve_level(elem, n, u, config)?;
        if level == levels {
            if let Some(path) = &config.export_matrix {
                let file = std::io::BufWriter::new(std::fs::File::create(path)?);
                sol.system.matrix.write_matrix_market(file)?;
            }
        }
        let interp = interpolate(&sol.mesh, elem, &sol.dofmap, u)?;
        let rule = gauss_tensor(quad, elem.dim())?;
        let ierr = error_norms(
            &sol.mesh,
            elem,
            &sol.dofmap,
            &interp,
            u,
            &rule,
            config.seminorm,
        )?;
        let prev = records.last();
        let l2 = sol.errors.l2;
        let h2 = sol.errors.seminorm;
        records.push(LevelRecord {
            level,
            n,
            h: sol.mesh.h(),
            dim_total: sol.dofmap.total_dim(),
            dim_free: sol.dofmap.free_dim(),
            l2_error: l2,
            l2_order: prev.map(|p| observed_order(p.l2_error, l2)),
            h2_error: h2,
            h2_order: prev.map(|p| observed_order(p.h2_error, h2)),
            solver_iters: sol.stats.iterations,
            seconds: sol.stats.seconds,
            solver: sol.stats.method,
            solver_residual: sol.stats.rel_residual,
            interp_l2_error: ierr.l2,
            interp_h2_error: ierr.seminorm,
        });
    }
    Ok(ConvergenceReport {
        dim: elem.dim(),
        k,
        element: elem.variant(),
        seminorm: config.seminorm,
        levels: records,
    })
}

/// Three significant digits with a mantissa in `[0.1, 1)`, e.g. `0.101E-04`.
pub fn fortran_e(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 {
            "0.000E+00".to_string()
        } else {
            format!("{x}")
        };
    }
    let sign = if x < 0.0 { "-" } else { "" };
    let a = x.abs();
    let mut exp = a.log10().floor() as i32 + 1;
    let mut digits = (a / 10f64.powi(exp) * 1000.0).round() as i64;
    if digits >= 1000 {
        digits = 100;
        exp += 1;
    } else if digits < 100 {
        // log10 rounding just below a power of ten
        exp -= 1;
        digits = (a / 10f64.powi(exp) * 1000.0).round() as i64;
    }
    format!("{sign}0.{digits:03}E{exp:+03}")
}

fn order_cell(o: Option<f64>) -> String {
    o.map(|v| format!("{v:.1}")).unwrap_or_else(|| "-".into())
}

impl ConvergenceReport {
    pub fn title(&self) -> String {
        let name = match self.element {
            Variant::Bell => "Bell",
            Variant::Bfs => "BFS",
        };
        format!("C1-Q{} {} element, {}D", self.k, name, self.dim)
    }

    /// Aligned text table; contains no timings, so it is reproducible byte for byte.
    pub fn to_table(&self) -> String {
        let semi = match self.seminorm {
            Seminorm::Laplacian => "|u-u_h|_2",
            Seminorm::Hessian => "|u-u_h|_H2",
        };
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.title());
        let _ = writeln!(
            s,
            "{:>4} | {:>12} {:>6} | {:>12} {:>6} | {:>9} {:>9} {:>8}",
            "G_i", "||u-u_h||_0", "O(h^r)", semi, "O(h^r)", "dim V_h", "free", "iters"
        );
        let _ = writeln!(s, "{}", "-".repeat(82));
        for r in &self.levels {
            let _ = writeln!(
                s,
                "{:>4} | {:>12} {:>6} | {:>12} {:>6} | {:>9} {:>9} {:>8}",
                r.level,
                fortran_e(r.l2_error),
                order_cell(r.l2_order),
                fortran_e(r.h2_error),
                order_cell(r.h2_order),
                r.dim_total,
                r.dim_free,
                r.solver_iters
            );
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "level,n,h,dim_total,dim_free,l2_error,l2_order,h2_error,h2_order,solver_iters,seconds\n",
        );
        let opt = |o: Option<f64>| o.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.levels {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.level,
                r.n,
                r.h,
                r.dim_total,
                r.dim_free,
                r.l2_error,
                opt(r.l2_order),
                r.h2_error,
                opt(r.h2_order),
                r.solver_iters,
                r.seconds
            );
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Global space dimensions of both element families on an `n`-per-axis grid.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DofComparison {
    pub n: usize,
    pub bell: usize,
    pub bfs: usize,
    pub ratio: f64,
}

pub fn compare_dofs(dim: usize, k: usize, n_max: usize) -> Result<Vec<DofComparison>> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n-max must be at least 1".into()));
    }
    let bell = ReferenceElement::<f64>::new(k, dim, Variant::Bell)?;
    let bfs = ReferenceElement::<f64>::new(k, dim, Variant::Bfs)?;
    (1..=n_max)
        .map(|n| {
            let mesh = GridMesh::<f64>::new(dim, n)?;
            let a = number_dofs(&mesh, &bell)?.total_dim();
            let b = number_dofs(&mesh, &bfs)?.total_dim();
            Ok(DofComparison {
                n,
                bell: a,
                bfs: b,
                ratio: b as f64 / a as f64,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refelem::build_element;
    use std::f64::consts::PI;

    #[test]
    fn sin2_values() {
        let u = sin2_solution::<f64>(2).unwrap();
        assert!((u.value(&[0.5, 0.5]) - 1.0).abs() < 1e-15);
        assert!((u.forcing(&[0.5, 0.5]) - 24.0 * PI.powi(4)).abs() < 1e-10);
        assert!(sin2_solution::<f64>(1).is_err());
    }

    #[test]
    fn forcing_matches_closed_form() {
        // Δ²u = 4π⁴ (4 c_x c_y - c_x - c_y), c = cos 2π·
        let u = sin2_solution::<f64>(2).unwrap();
        for &(x, y) in &[(0.1, 0.7), (0.33, 0.5), (0.9, 0.05)] {
            let cx = (2.0 * PI * x).cos();
            let cy = (2.0 * PI * y).cos();
            let f = 4.0 * PI.powi(4) * (4.0 * cx * cy - cx - cy);
            assert!((u.forcing(&[x, y]) - f).abs() < 1e-10 * f.abs().max(1.0));
        }
    }

    #[test]
    fn forcing_matches_finite_difference_biharmonic() {
        for dim in 2..=3 {
            let u = sin2_solution::<f64>(dim).unwrap();
            let h = 1e-3;
            let p = [0.37, 0.61, 0.23];
            // 5-point fourth differences and 3x3 mixed stencils of the value only
            let val = |q: &[f64]| u.value(&q[..dim]);
            let shift = |a: usize, s: f64, b: usize, t: f64| {
                let mut q = p;
                q[a] += s;
                q[b] += t;
                q
            };
            let mut fd = 0.0;
            for a in 0..dim {
                let d4 = (val(&shift(a, -2.0 * h, a, 0.0)) - 4.0 * val(&shift(a, -h, a, 0.0))
                    + 6.0 * val(&p)
                    - 4.0 * val(&shift(a, h, a, 0.0))
                    + val(&shift(a, 2.0 * h, a, 0.0)))
                    / h.powi(4);
                fd += d4;
                for b in a + 1..dim {
                    let mut m = 0.0;
                    for (s, ws) in [(-h, 1.0), (0.0, -2.0), (h, 1.0)] {
                        for (t, wt) in [(-h, 1.0), (0.0, -2.0), (h, 1.0)] {
                            m += ws * wt * val(&shift(a, s, b, t));
                        }
                    }
                    fd += 2.0 * m / h.powi(4);
                }
            }
            let exact = u.forcing(&p[..dim]);
            assert!(
                (fd - exact).abs() < 1e-4 * exact.abs(),
                "dim={dim} fd={fd} exact={exact}"
            );
        }
    }

    #[test]
    fn clamped_on_the_boundary() {
        let u = sin2_solution::<f64>(3).unwrap();
        for &(a, b) in &[(0.3, 0.8), (0.5, 0.5), (0.11, 0.97)] {
            for c in [0.0, 1.0] {
                for normal in 0..3 {
                    let mut p = [a, b, a * b];
                    p[normal] = c;
                    assert!(u.value(&p).abs() < 1e-13);
                    let mut d = [0; 3];
                    d[normal] = 1;
                    assert!(u.derivative(&p, d).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn fortran_e_format() {
        assert_eq!(fortran_e(1.01e-5), "0.101E-04");
        assert_eq!(fortran_e(14.0), "0.140E+02");
        assert_eq!(fortran_e(0.273), "0.273E+00");
        assert_eq!(fortran_e(0.9996), "0.100E+01");
        assert_eq!(fortran_e(1.0), "0.100E+01");
        assert_eq!(fortran_e(0.0), "0.000E+00");
    }

    #[test]
    fn zero_function_interpolates_to_zero() {
        struct Zero;
        impl ManufacturedSolution<f64> for Zero {
            fn dim(&self) -> usize {
                2
            }
            fn max_order(&self) -> u8 {
                4
            }
            fn derivative(&self, _: &[f64], _: Deriv) -> f64 {
                0.0
            }
        }
        let mesh = GridMesh::<f64>::new(2, 3).unwrap();
        let elem = build_element::<f64>(4, 2, Variant::Bell).unwrap();
        let map = number_dofs(&mesh, &elem).unwrap();
        assert!(interpolate(&mesh, &elem, &map, &Zero)
            .unwrap()
            .iter()
            .all(|&c| c == 0.0));
    }

    #[test]
    fn missing_derivatives_are_reported() {
        struct ValuesOnly;
        impl ManufacturedSolution<f64> for ValuesOnly {
            fn dim(&self) -> usize {
                2
            }
            fn max_order(&self) -> u8 {
                0
            }
            fn derivative(&self, p: &[f64], _: Deriv) -> f64 {
                p[0]
            }
        }
        let mesh = GridMesh::<f64>::new(2, 1).unwrap();
        let elem = build_element::<f64>(4, 2, Variant::Bfs).unwrap();
        let map = number_dofs(&mesh, &elem).unwrap();
        assert!(matches!(
            interpolate(&mesh, &elem, &map, &ValuesOnly),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn study_requires_two_levels() {
        let err = run_study(2, 4, Variant::Bell, 1, &StudyConfig::default()).unwrap_err();
        assert!(err.to_string().contains("levels must be >= 2"));
    }

    #[test]
    fn small_study_layout() {
        let r = run_study(2, 4, Variant::Bell, 3, &StudyConfig::default()).unwrap();
        let dims: Vec<usize> = r.levels.iter().map(|l| l.dim_total).collect();
        assert_eq!(dims, vec![21, 52, 156]);
        assert!(r.levels[0].l2_order.is_none());
        assert!(r.levels[1].l2_order.is_some());
        let csv = r.to_csv();
        assert!(csv.starts_with(
            "level,n,h,dim_total,dim_free,l2_error,l2_order,h2_error,h2_order,solver_iters,seconds\n"
        ));
        assert_eq!(csv.lines().count(), 4);
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["levels"][2]["dim_total"], 156);
        assert!(r.to_table().contains("0."));
    }
}
