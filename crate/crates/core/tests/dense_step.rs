mod common;

use common::{constant_problem, dense_step, max_abs_diff, pow2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spp_hybrid::mesh::{build_time_grid, shishkin_mesh};
use spp_hybrid::problem::CoefficientNorms;
use spp_hybrid::scheme::{select_operators, OperatorTag, OuterRule};
use spp_hybrid::solver::step;
use spp_hybrid::{classify_regime, ExampleId, ProblemSpec};

/// Runs four steps against the dense solve and returns the operator tags.
fn check(spec: &ProblemSpec, n: usize, rule: OuterRule, seed: u64) -> Vec<OperatorTag> {
    let regime = classify_regime(spec);
    let mesh = shishkin_mesh(spec, regime, n).unwrap();
    let grid = build_time_grid(spec.final_time, n).unwrap();
    let norms = CoefficientNorms::estimate(spec);
    let ops = select_operators(spec, &norms, &mesh, regime, grid.dt(), rule);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u: Vec<f64> = mesh.nodes().iter().map(|&x| (spec.q)(x)).collect();
    for j in 0..4 {
        let t = grid.levels()[j];
        let fast = step(spec, &mesh, &ops, t, grid.dt(), &u).unwrap();
        let dense = dense_step(spec, &mesh, ops.tags(), t, grid.dt(), &u);
        // the first levels can be tiny; one step of O(1) forcing moves U by O(dt)
        let scale = dense.iter().chain(&u).fold(grid.dt(), |m, v| m.max(v.abs()));
        assert!(
            max_abs_diff(&fast, &dense) <= 1e-9 * scale,
            "level {j}: {:e} vs scale {scale:e}",
            max_abs_diff(&fast, &dense)
        );
        // next level from noisy data so every stencil sees a rough profile
        u = fast.iter().map(|v| v + rng.gen_range(-0.1..0.1)).collect();
        u[0] = fast[0];
        u[n] = fast[n];
    }
    ops.tags().to_vec()
}

#[test]
fn example1_eps_dominant_n32() {
    let spec = ExampleId::Example1.spec(pow2(-6), pow2(-16));
    let tags = check(&spec, 32, OuterRule::default(), 1);
    assert!(tags.contains(&OperatorTag::Upwind));
}

#[test]
fn example1_mu_dominant_n32() {
    let spec = ExampleId::Example1.spec(pow2(-20), pow2(-6));
    let tags = check(&spec, 32, OuterRule::Midpoint, 2);
    assert!(tags.contains(&OperatorTag::MidpointUpwind));
    // mu |a| h3 >= 2 eps at this N, so the rows beside d are not central
    assert_ne!(tags[15], OperatorTag::Central);
    assert_ne!(tags[17], OperatorTag::Central);
    let tags = check(&spec, 32, OuterRule::Guarded, 3);
    assert!(tags[1..12].iter().all(|&t| t == OperatorTag::Upwind));
}

#[test]
fn example1_mu_dominant_n128_has_central_neighbours() {
    let spec = ExampleId::Example1.spec(pow2(-20), pow2(-6));
    let tags = check(&spec, 128, OuterRule::Midpoint, 7);
    assert_eq!(tags[63], OperatorTag::Central);
    assert_eq!(tags[65], OperatorTag::Central);
}

#[test]
fn example3_both_regimes() {
    check(&ExampleId::Example3.spec(pow2(-8), pow2(-20)), 64, OuterRule::default(), 4);
    check(&ExampleId::Example3.spec(pow2(-24), pow2(-4)), 64, OuterRule::default(), 5);
}

#[test]
fn constant_toy_n16() {
    let spec = constant_problem(pow2(-4), pow2(-3), 0.5, (1.0, 2.0), 1.5, (-1.0, 2.0));
    check(&spec, 16, OuterRule::default(), 6);
}
