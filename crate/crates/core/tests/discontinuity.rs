mod common;

use common::draws::{closed_form_deviation, draw, eliminated_with_scale, Draw};
use common::{flux_balance, operator, source};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spp_hybrid::problem::Side;
use spp_hybrid::scheme::{central_row, discontinuity_row, eliminate_flux_balance, midpoint_row, upwind_row, OperatorTag};

#[test]
fn closed_form_matches_elimination() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for k in 0..200 {
        let rel = closed_form_deviation(&draw(&mut rng));
        assert!(rel <= 1e-12, "draw {k}: relative deviation {rel:e}");
    }
}

#[test]
fn transformed_row_is_an_equivalent_equation() {
    // Any level satisfying the flanking central equations and the flux
    // balance satisfies the transformed row.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let draw = draw(&mut rng);
        let input = draw.input();
        let row = discontinuity_row(&input).unwrap();
        let near = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let lhs = row.apply(near) - row.rhs;
        let (expected, rhs_scale) = eliminated_with_scale(&draw, near);
        let scale = row.r_minus.abs() + row.r_center.abs() + row.r_plus.abs() + rhs_scale;
        assert!((lhs - expected).abs() <= 1e-11 * scale);
    }
}

#[test]
fn general_elimination_reduces_to_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..100 {
        let draw = draw(&mut rng);
        let input = draw.input();
        let m = draw.mesh.d_index();
        let closed = discontinuity_row(&input).unwrap();
        let general = eliminate_flux_balance(
            &central_row(&input, m - 1),
            &central_row(&input, m + 1),
            draw.mesh.step(m),
            draw.mesh.step(m + 1),
        )
        .unwrap();
        let norm = closed.r_minus.abs().max(closed.r_center.abs()).max(closed.r_plus.abs());
        for (a, b) in [
            (closed.r_minus, general.r_minus),
            (closed.r_center, general.r_center),
            (closed.r_plus, general.r_plus),
        ] {
            assert!((a - b).abs() <= 1e-12 * norm, "{a:e} vs {b:e}");
        }
        let (_, rhs_scale) = eliminated_with_scale(&draw, [0.0; 3]);
        assert!((closed.rhs - general.rhs).abs() <= 1e-12 * rhs_scale);
    }
}

#[test]
fn general_elimination_with_one_sided_neighbours() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for k in 0..60 {
        let draw = draw(&mut rng);
        let input = draw.input();
        let m = draw.mesh.d_index();
        let (tag, left, right) = if k % 2 == 0 {
            (
                OperatorTag::MidpointUpwind,
                midpoint_row(&input, m - 1, Side::Left),
                midpoint_row(&input, m + 1, Side::Right),
            )
        } else {
            (
                OperatorTag::Upwind,
                upwind_row(&input, m - 1, Side::Left),
                upwind_row(&input, m + 1, Side::Right),
            )
        };
        let row = eliminate_flux_balance(&left, &right, draw.mesh.step(m), draw.mesh.step(m + 1)).unwrap();

        // eliminate with the reference operators of the same family
        let eval = |near: [f64; 3]| {
            let Draw { spec, mesh, dt, t_mid, u_prev } = &draw;
            let mut u = vec![0.0; mesh.n() + 1];
            u[m - 1..=m + 1].copy_from_slice(&near);
            for (node, far) in [(m - 1, m - 2), (m + 1, m + 2)] {
                let g = 2.0 * source(spec, mesh, tag, node, *t_mid) - operator(spec, mesh, tag, node, *t_mid, -2.0 / dt, u_prev);
                u[far] = 0.0;
                let base = operator(spec, mesh, tag, node, *t_mid, 2.0 / dt, &u);
                let mut unit = vec![0.0; u.len()];
                unit[far] = 1.0;
                u[far] = (g - base) / operator(spec, mesh, tag, node, *t_mid, 2.0 / dt, &unit);
            }
            flux_balance(mesh, &u)
        };
        let near = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let scale = row.r_minus.abs() + row.r_center.abs() + row.r_plus.abs() + row.rhs.abs();
        assert!((row.apply(near) - row.rhs - eval(near)).abs() <= 1e-10 * scale, "draw {k}");
    }
}
