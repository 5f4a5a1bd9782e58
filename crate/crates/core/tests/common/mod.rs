//! Independent reference implementations shared by the integration tests.

#![allow(dead_code)]

pub mod dmp;
pub mod draws;
pub mod systems;

use spp_hybrid::problem::{PiecewiseCoefficient, ProblemSpec, Side};
use spp_hybrid::scheme::OperatorTag;
use spp_hybrid::SpatialMesh;
use std::sync::Arc;

pub fn pow2(k: i32) -> f64 {
    2f64.powi(k)
}

/// Gaussian elimination with partial pivoting on a dense row-major matrix.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let factor = a[i][k] / a[k][k];
            if factor == 0.0 {
                continue;
            }
            let (top, bottom) = a.split_at_mut(i);
            for (x, p) in bottom[0][k..].iter_mut().zip(&top[k][k..]) {
                *x -= factor * p;
            }
            b[i] -= factor * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// `eps d2 U + mu a D U - (b + shift) U` at node `i` for the stencil family
/// `tag`, written from the difference quotients directly.
///
/// With `shift = 2/dt` this is the left-hand side of a Crank–Nicolson row;
/// with `shift = -2/dt`, `2 f - op(U^j)` is its right-hand side.
pub fn operator(spec: &ProblemSpec, mesh: &SpatialMesh, tag: OperatorTag, i: usize, t: f64, shift: f64, u: &[f64]) -> f64 {
    let x = mesh.nodes();
    let side = if i < mesh.d_index() { Side::Left } else { Side::Right };
    let (hm, hp) = (x[i] - x[i - 1], x[i + 1] - x[i]);
    let d_minus = (u[i] - u[i - 1]) / hm;
    let d_plus = (u[i + 1] - u[i]) / hp;
    let d_zero = (u[i + 1] - u[i - 1]) / (hm + hp);
    let d2 = 2.0 * (d_plus - d_minus) / (hm + hp);
    let a = |k: usize| spec.a.on(side, x[k], t);
    let b = |k: usize| spec.b.on(side, x[k], t);
    let (upwind, nb) = match side {
        Side::Left => (d_minus, i - 1),
        Side::Right => (d_plus, i + 1),
    };
    match tag {
        OperatorTag::Central => spec.eps * d2 + spec.mu * a(i) * d_zero - (b(i) + shift) * u[i],
        OperatorTag::Upwind => spec.eps * d2 + spec.mu * a(i) * upwind - (b(i) + shift) * u[i],
        OperatorTag::MidpointUpwind => {
            let a_bar = 0.5 * (a(i) + a(nb));
            let b_bar = 0.5 * (b(i) + b(nb));
            spec.eps * d2 + spec.mu * a_bar * upwind - (b_bar + shift) * 0.5 * (u[i] + u[nb])
        }
        OperatorTag::Discontinuity | OperatorTag::Boundary => unreachable!("no three-point operator"),
    }
}

/// Source term of a row of family `tag` (averaged for midpoint rows).
pub fn source(spec: &ProblemSpec, mesh: &SpatialMesh, tag: OperatorTag, i: usize, t: f64) -> f64 {
    let x = mesh.nodes();
    let side = if i < mesh.d_index() { Side::Left } else { Side::Right };
    let f = |k: usize| spec.f.on(side, x[k], t);
    match (tag, side) {
        (OperatorTag::MidpointUpwind, Side::Left) => 0.5 * (f(i) + f(i - 1)),
        (OperatorTag::MidpointUpwind, Side::Right) => 0.5 * (f(i) + f(i + 1)),
        _ => f(i),
    }
}

/// The one-sided five-point flux balance at `d`, scaled by `2 h3 h4`.
pub fn flux_balance(mesh: &SpatialMesh, u: &[f64]) -> f64 {
    let m = mesh.d_index();
    let x = mesh.nodes();
    let (h3, h4) = (x[m] - x[m - 1], x[m + 1] - x[m]);
    h3 * (-u[m + 2] + 4.0 * u[m + 1] - 3.0 * u[m]) - h4 * (u[m - 2] - 4.0 * u[m - 1] + 3.0 * u[m])
}

/// Solves one Crank–Nicolson step as a dense system in which node `N/2`
/// carries the untransformed five-point flux balance.
pub fn dense_step(spec: &ProblemSpec, mesh: &SpatialMesh, tags: &[OperatorTag], t_j: f64, dt: f64, u_prev: &[f64]) -> Vec<f64> {
    let n = mesh.n();
    let m = mesh.d_index();
    let t_mid = t_j + 0.5 * dt;
    let (left, right) = ((spec.p)(t_j + dt), (spec.r)(t_j + dt));

    // Row functionals are linear, so columns come from unit vectors.
    let row = |i: usize, u: &[f64]| {
        if i == m {
            flux_balance(mesh, u)
        } else {
            operator(spec, mesh, tags[i], i, t_mid, 2.0 / dt, u)
        }
    };
    let mut matrix = vec![vec![0.0; n - 1]; n - 1];
    let mut rhs = vec![0.0; n - 1];
    let mut basis = vec![0.0; n + 1];
    for i in 1..n {
        basis[0] = left;
        basis[n] = right;
        let boundary_part = row(i, &basis);
        basis[0] = 0.0;
        basis[n] = 0.0;
        for k in 1..n {
            basis[k] = 1.0;
            matrix[i - 1][k - 1] = row(i, &basis);
            basis[k] = 0.0;
        }
        let g = if i == m {
            0.0
        } else {
            2.0 * source(spec, mesh, tags[i], i, t_mid) - operator(spec, mesh, tags[i], i, t_mid, -2.0 / dt, u_prev)
        };
        rhs[i - 1] = g - boundary_part;
    }
    let interior = dense_solve(matrix, rhs);
    let mut level = vec![left];
    level.extend(interior);
    level.push(right);
    level
}

/// Constant-coefficient problem: `a = -a_l` left, `a_r` right; `b` and `f`
/// constant per side.
pub fn constant_problem(eps: f64, mu: f64, d: f64, a: (f64, f64), b: f64, f: (f64, f64)) -> ProblemSpec {
    let (al, ar) = a;
    let (fl, fr) = f;
    ProblemSpec {
        a: PiecewiseCoefficient::new(move |_, _| -al, move |_, _| ar),
        b: PiecewiseCoefficient::continuous(move |_, _| b),
        f: PiecewiseCoefficient::new(move |_, _| fl, move |_, _| fr),
        p: Arc::new(|_| 0.0),
        r: Arc::new(|_| 0.0),
        q: Arc::new(|_| 0.0),
        eps,
        mu,
        d,
        final_time: 1.0,
        alpha1: al,
        alpha2: ar,
        beta: b,
        rho: (b / al.max(ar)).min(1.0),
    }
}
