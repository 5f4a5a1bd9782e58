//! Random step systems that pass the sign audit.

use super::pow2;
use rand::Rng;
use spp_hybrid::mesh::{build_time_grid, shishkin_mesh};
use spp_hybrid::problem::CoefficientNorms;
use spp_hybrid::scheme::{assemble_step, audit_monotonicity, select_operators, AssembledStep, OuterRule};
use spp_hybrid::{classify_regime, ExampleId};

/// A step system whose rows all pass the sign checks, or `None`.
pub fn audited_instance(rng: &mut impl Rng) -> Option<AssembledStep> {
    let id = [ExampleId::Example1, ExampleId::Example2, ExampleId::Example3][rng.gen_range(0..3)];
    let eps = pow2(-rng.gen_range(2..=30));
    let mu = pow2(-rng.gen_range(0..=30));
    let n = [16, 32, 64, 128, 256, 512][rng.gen_range(0..6)];
    let m = [n / 4, n, 4 * n][rng.gen_range(0..3)];
    let spec = id.spec(eps, mu);
    let regime = classify_regime(&spec);
    let mesh = shishkin_mesh(&spec, regime, n).ok()?;
    let grid = build_time_grid(spec.final_time, m).ok()?;
    let norms = CoefficientNorms::estimate(&spec);
    let ops = select_operators(&spec, &norms, &mesh, regime, grid.dt(), OuterRule::Guarded);
    let u_prev: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let t = grid.levels()[rng.gen_range(0..m)];
    let step = assemble_step(&spec, &mesh, &ops, t, grid.dt(), &u_prev).ok()?;
    audit_monotonicity(&step, &mesh, &spec, &norms, grid.dt()).passed().then_some(step)
}

/// Replaces the data: `L U <= 0` in every row, boundary values `>= 0`.
pub fn with_signed_data(mut step: AssembledStep, rng: &mut impl Rng) -> AssembledStep {
    step.left_value = rng.gen_range(0.0..2.0);
    step.right_value = rng.gen_range(0.0..2.0);
    for row in &mut step.rows {
        row.rhs = if rng.gen_bool(0.2) { 0.0 } else { -rng.gen_range(0.0..10.0) };
    }
    let n = step.rows.len();
    step.rows[0].rhs -= step.rows[0].r_minus * step.left_value;
    step.rows[n - 1].rhs -= step.rows[n - 1].r_plus * step.right_value;
    step
}

/// Solves an audited instance with signed data; returns the minimum value.
pub fn signed_data_minimum(step: AssembledStep, rng: &mut impl Rng) -> f64 {
    let u = with_signed_data(step, rng).solve().unwrap();
    u.iter().cloned().fold(f64::INFINITY, f64::min)
}
