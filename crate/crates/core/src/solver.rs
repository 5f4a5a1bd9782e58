//! Crank–Nicolson time marching.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::mesh::{build_time_grid, shishkin_mesh, SpatialMesh, TimeGrid};
use crate::problem::{classify_regime, CoefficientNorms, ProblemSpec, Regime};
use crate::scheme::{
    assemble_step, audit_monotonicity, select_operators, MonotonicityCondition, OperatorMap,
    OuterRule,
};

/// Sign-check outcome of one time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepAudit {
    /// Index of the level produced by the step.
    pub level: usize,
    pub failed_rows: usize,
    pub first_failure: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveWarning {
    /// `max |U|` exceeded the a-priori stability bound.
    StabilityBound { max_abs: f64, bound: f64 },
    /// At least one step assembled rows that fail the sign checks.
    NonMonotoneRows { steps: usize, worst: usize },
    Dispatch(String),
}

/// Discrete solution on the full space–time grid.
#[derive(Debug, Clone)]
pub struct SolutionField {
    /// Level-major: `values[j * (N + 1) + i]` approximates `u(x_i, t_j)`.
    values: Vec<f64>,
    mesh: SpatialMesh,
    grid: TimeGrid,
    regime: Regime,
    operators: OperatorMap,
    condition: MonotonicityCondition,
    audits: Vec<StepAudit>,
    warnings: Vec<SolveWarning>,
}

impl SolutionField {
    pub fn mesh(&self) -> &SpatialMesh {
        &self.mesh
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn operators(&self) -> &OperatorMap {
        &self.operators
    }

    pub fn monotonicity_condition(&self) -> MonotonicityCondition {
        self.condition
    }

    pub fn audits(&self) -> &[StepAudit] {
        &self.audits
    }

    pub fn warnings(&self) -> &[SolveWarning] {
        &self.warnings
    }

    /// `true` when every assembled row of every step passed the sign checks.
    pub fn all_rows_monotone(&self) -> bool {
        self.audits.iter().all(|a| a.failed_rows == 0)
    }

    /// Value at node `i`, level `j`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * (self.mesh.n() + 1) + i]
    }

    pub fn level(&self, j: usize) -> &[f64] {
        let w = self.mesh.n() + 1;
        &self.values[j * w..(j + 1) * w]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `x,t,u`, one row per grid point, time-major.
    pub fn write_surface_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,t,u")?;
        for (j, &t) in self.grid.levels().iter().enumerate() {
            for (&x, &u) in self.mesh.nodes().iter().zip(self.level(j)) {
                writeln!(w, "{x},{t},{u}")?;
            }
        }
        Ok(())
    }
}

/// Advances one Crank–Nicolson step from level `t_j`.
pub fn step(
    spec: &ProblemSpec,
    mesh: &SpatialMesh,
    operators: &OperatorMap,
    t_j: f64,
    dt: f64,
    u_prev: &[f64],
) -> Result<Vec<f64>> {
    assemble_step(spec, mesh, operators, t_j, dt, u_prev)?.solve()
}

/// Solves on a Shishkin mesh with `N` intervals and `M` time steps.
pub fn solve(spec: &ProblemSpec, n: usize, m: usize) -> Result<SolutionField> {
    let regime = classify_regime(spec);
    let mesh = shishkin_mesh(spec, regime, n)?;
    let grid = build_time_grid(spec.final_time, m)?;
    solve_on(spec, mesh, grid)
}

/// Solves on a given mesh and time grid (e.g. a bisected one).
pub fn solve_on(spec: &ProblemSpec, mesh: SpatialMesh, grid: TimeGrid) -> Result<SolutionField> {
    solve_with(spec, mesh, grid, OuterRule::default())
}

/// As [`solve_on`] with an explicit outer-region rule.
pub fn solve_with(spec: &ProblemSpec, mesh: SpatialMesh, grid: TimeGrid, rule: OuterRule) -> Result<SolutionField> {
    spec.validate()?;
    if mesh.n() < 16 {
        return Err(Error::InvalidMeshSize(mesh.n()));
    }
    let regime = classify_regime(spec);
    let norms = CoefficientNorms::estimate(spec);
    let dt = grid.dt();
    let operators = select_operators(spec, &norms, &mesh, regime, dt, rule);
    let condition = MonotonicityCondition::evaluate(spec, &norms, mesh.n(), dt);

    let width = mesh.n() + 1;
    let steps = grid.steps();
    let mut values = Vec::with_capacity(width * (steps + 1));
    values.extend(mesh.nodes().iter().map(|&x| (spec.q)(x)));
    let mut audits = Vec::with_capacity(steps);

    for j in 0..steps {
        let t_j = grid.levels()[j];
        let at_level = |e: Error| Error::AtLevel {
            level: j + 1,
            source: Box::new(e),
        };
        let u_prev = &values[j * width..(j + 1) * width];
        let assembled = assemble_step(spec, &mesh, &operators, t_j, dt, u_prev).map_err(at_level)?;
        let report = audit_monotonicity(&assembled, &mesh, spec, &norms, dt);
        let mut failures = report.failures();
        let first_failure = failures.next().map(|r| r.index);
        audits.push(StepAudit {
            level: j + 1,
            failed_rows: first_failure.map_or(0, |_| 1 + failures.count()),
            first_failure,
        });
        let next = assembled.solve().map_err(at_level)?;
        values.extend(next);
    }

    let mut warnings: Vec<SolveWarning> = operators
        .notes()
        .iter()
        .map(|n| SolveWarning::Dispatch(n.to_string()))
        .collect();
    let bad_steps = audits.iter().filter(|a| a.failed_rows > 0).count();
    if bad_steps > 0 {
        warnings.push(SolveWarning::NonMonotoneRows {
            steps: bad_steps,
            worst: audits.iter().map(|a| a.failed_rows).max().unwrap_or(0),
        });
    }

    let mut field = SolutionField {
        values,
        mesh,
        grid,
        regime,
        operators,
        condition,
        audits,
        warnings,
    };
    let bound = stability_bound(spec, &norms, &field);
    let max_abs = field.max_abs();
    if !(max_abs <= bound) {
        field.warnings.push(SolveWarning::StabilityBound { max_abs, bound });
    }
    Ok(field)
}

/// `max(|p|, |r|, |q|) + |f| / theta + 1e-6` with the data norms taken on
/// the grid.
fn stability_bound(spec: &ProblemSpec, norms: &CoefficientNorms, field: &SolutionField) -> f64 {
    let boundary = field
        .grid
        .levels()
        .iter()
        .flat_map(|&t| [(spec.p)(t).abs(), (spec.r)(t).abs()])
        .chain(field.mesh.nodes().iter().map(|&x| (spec.q)(x).abs()))
        .fold(0.0, f64::max);
    boundary + norms.f / spec.stability_theta() + 1e-6
}
