//! Random diagonally dominant tridiagonal systems.

use super::{dense_solve, max_abs_diff};
use rand::Rng;
use spp_hybrid::tridiag::solve_tridiagonal;

pub struct System {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl System {
    pub fn random(rng: &mut impl Rng, n: usize) -> Self {
        let lower: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let upper: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let diag = (0..n)
            .map(|i| {
                let off = if i > 0 { lower[i - 1].abs() } else { 0.0 } + upper.get(i).map_or(0.0, |u| u.abs());
                let d = off + rng.gen_range(0.1..2.0);
                if rng.gen_bool(0.5) {
                    d
                } else {
                    -d
                }
            })
            .collect();
        let rhs = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        System { lower, diag, upper, rhs }
    }

    pub fn dense(&self) -> Vec<Vec<f64>> {
        let n = self.diag.len();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = self.diag[i];
            if i > 0 {
                a[i][i - 1] = self.lower[i - 1];
            }
            if i + 1 < n {
                a[i][i + 1] = self.upper[i];
            }
        }
        a
    }
}

/// Relative max-norm gap between the Thomas solve and dense elimination.
pub fn relative_gap(sys: &System) -> f64 {
    let fast = solve_tridiagonal(&sys.lower, &sys.diag, &sys.upper, &sys.rhs).unwrap();
    let reference = dense_solve(sys.dense(), sys.rhs.clone());
    let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    max_abs_diff(&fast, &reference) / scale
}
