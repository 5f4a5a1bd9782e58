//! Random discontinuity-row draws and the elimination oracle.

use super::{constant_problem, flux_balance, operator, pow2, source};
use rand::Rng;
use spp_hybrid::mesh::build_spatial_mesh;
use spp_hybrid::scheme::{discontinuity_row, OperatorTag, StepInput};
use spp_hybrid::{ProblemSpec, SpatialMesh};

pub struct Draw {
    pub spec: ProblemSpec,
    pub mesh: SpatialMesh,
    pub dt: f64,
    pub t_mid: f64,
    pub u_prev: Vec<f64>,
}

pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

pub fn draw(rng: &mut impl Rng) -> Draw {
    let n = [16, 32, 64, 128][rng.gen_range(0..4)];
    // Dyadic geometry keeps every node exact, so the two steps beside d
    // are equal to the last bit, as the closed form assumes.
    let d = rng.gen_range(77..180) as f64 / 256.0;
    let tau2 = rng.gen_range(1..64) as f64 * pow2(-rng.gen_range(10..30));
    let tau3 = rng.gen_range(1..64) as f64 * pow2(-rng.gen_range(10..30));
    let mesh = build_spatial_mesh(d, [d / 4.0, tau2, tau3, (1.0 - d) / 4.0], n).unwrap();
    let spec = constant_problem(
        log_uniform(rng, 1e-9, 0.25),
        log_uniform(rng, 1e-9, 1.0),
        d,
        (rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0)),
        rng.gen_range(0.5..4.0),
        (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)),
    );
    let dt = 1.0 / rng.gen_range(4..2048) as f64;
    let u_prev = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Draw {
        spec,
        mesh,
        dt,
        t_mid: rng.gen_range(0.0..1.0),
        u_prev,
    }
}

/// `row . (U_{m-1}, U_m, U_{m+1}) - rhs` predicted by eliminating `U_{m-2}`
/// and `U_{m+2}` from the flux balance with the neighbouring central
/// equations.
/// Also returns the summed magnitude of the terms the balance is built from.
pub fn eliminated_with_scale(draw: &Draw, near: [f64; 3]) -> (f64, f64) {
    let Draw { spec, mesh, dt, t_mid, u_prev } = draw;
    let m = mesh.d_index();
    let mut u = vec![0.0; mesh.n() + 1];
    u[m - 1] = near[0];
    u[m] = near[1];
    u[m + 1] = near[2];
    for (node, far) in [(m - 1, m - 2), (m + 1, m + 2)] {
        let g = 2.0 * source(spec, mesh, OperatorTag::Central, node, *t_mid)
            - operator(spec, mesh, OperatorTag::Central, node, *t_mid, -2.0 / dt, u_prev);
        u[far] = 0.0;
        let base = operator(spec, mesh, OperatorTag::Central, node, *t_mid, 2.0 / dt, &u);
        let mut unit = vec![0.0; u.len()];
        unit[far] = 1.0;
        let pivot = operator(spec, mesh, OperatorTag::Central, node, *t_mid, 2.0 / dt, &unit);
        u[far] = (g - base) / pivot;
    }
    let (h3, h4) = (mesh.step(m), mesh.step(m + 1));
    let terms = h4 * (u[m - 2].abs() + 4.0 * u[m - 1].abs() + 3.0 * u[m].abs())
        + h3 * (u[m + 2].abs() + 4.0 * u[m + 1].abs() + 3.0 * u[m].abs());
    (flux_balance(mesh, &u), terms)
}

impl Draw {
    pub fn input(&self) -> StepInput<'_> {
        StepInput {
            spec: &self.spec,
            mesh: &self.mesh,
            t_mid: self.t_mid,
            dt: self.dt,
            u_prev: &self.u_prev,
        }
    }
}

/// Largest relative gap between the closed-form row at `d` and the
/// eliminated flux balance, over the coefficients and the right-hand side.
pub fn closed_form_deviation(draw: &Draw) -> f64 {
    let row = discontinuity_row(&draw.input()).unwrap();
    let (offset, rhs_scale) = eliminated_with_scale(draw, [0.0; 3]);
    let closed = [row.r_minus, row.r_center, row.r_plus];
    let mut worst = (row.rhs + offset).abs() / rhs_scale.max(f64::MIN_POSITIVE);
    for (k, c) in closed.iter().enumerate() {
        let mut unit = [0.0; 3];
        unit[k] = 1.0;
        let (value, scale) = eliminated_with_scale(draw, unit);
        worst = worst.max((c - (value - offset)).abs() / (scale + rhs_scale));
    }
    worst
}
