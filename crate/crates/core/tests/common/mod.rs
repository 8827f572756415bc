#![allow(dead_code)]

use c1qk::analysis::ManufacturedSolution;
use c1qk::poly::Deriv;
use rand::Rng;

/// Polynomial `Σ c x^e` given by monomial terms.
#[derive(Debug, Clone)]
pub struct Polynomial {
    pub dim: usize,
    pub terms: Vec<(f64, [u32; 3])>,
}

impl Polynomial {
    /// Random polynomial of total degree at most `k` with coefficients in [-1, 1].
    pub fn random_total_degree<R: Rng>(rng: &mut R, dim: usize, k: u32) -> Self {
        let mut terms = Vec::new();
        let top = |a: usize| if a < dim { k } else { 0 };
        for ez in 0..=top(2) {
            for ey in 0..=top(1) {
                for ex in 0..=top(0) {
                    if ex + ey + ez <= k {
                        terms.push((rng.gen_range(-1.0..1.0), [ex, ey, ez]));
                    }
                }
            }
        }
        Polynomial { dim, terms }
    }
}

fn falling(e: u32, d: u8) -> f64 {
    (0..d as u32).map(|j| (e as f64) - j as f64).product()
}

impl ManufacturedSolution<f64> for Polynomial {
    fn dim(&self) -> usize {
        self.dim
    }

    fn max_order(&self) -> u8 {
        4
    }

    fn derivative(&self, point: &[f64], deriv: Deriv) -> f64 {
        self.terms
            .iter()
            .map(|&(c, e)| {
                let mut v = c;
                for a in 0..self.dim {
                    let d = deriv[a];
                    if (d as u32) > e[a] {
                        return 0.0;
                    }
                    v *= falling(e[a], d) * point[a].powi((e[a] - d as u32) as i32);
                }
                v
            })
            .sum()
    }
}

/// Cell index from its per-axis grid position (first axis fastest).
pub fn cell_index(n: usize, dim: usize, idx: [usize; 3]) -> usize {
    (0..dim).rev().fold(0, |acc, a| acc * n + idx[a])
}
