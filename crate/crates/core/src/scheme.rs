//! Hybrid difference operators and assembly of one Crank–Nicolson step.
//!
//! Every interior node gets one of four stencils:
//!
//! * central differences, used where the local mesh resolves the convection
//!   (`mu |a| h < 2 eps`);
//! * midpoint upwind, where `(|b| + 2/dt) h <= 2 alpha mu`;
//! * simple upwind otherwise;
//! * a five-point one-sided flux balance at `x = d`, turned into a
//!   tridiagonal row by eliminating `U_{N/2-2}` and `U_{N/2+2}` with the
//!   flanking central rows.
//!
//! Rows are stored as `r- U_{i-1} + rc U_i + r+ U_{i+1} = g`, with positive
//! off-diagonals and a negative centre when the row is monotone.

use std::fmt;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::mesh::SpatialMesh;
use crate::problem::{CoefficientNorms, ProblemSpec, Regime, Side};
use crate::tridiag::solve_tridiagonal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorTag {
    Central,
    MidpointUpwind,
    Upwind,
    Discontinuity,
    /// Dirichlet node (`i = 0` or `i = N`); never assembled into a row.
    Boundary,
}

impl OperatorTag {
    pub fn name(self) -> &'static str {
        match self {
            OperatorTag::Central => "central",
            OperatorTag::MidpointUpwind => "midpoint-upwind",
            OperatorTag::Upwind => "upwind",
            OperatorTag::Discontinuity => "discontinuity",
            OperatorTag::Boundary => "boundary",
        }
    }
}

impl fmt::Display for OperatorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeRow {
    pub r_minus: f64,
    pub r_center: f64,
    pub r_plus: f64,
    pub rhs: f64,
    pub tag: OperatorTag,
}

impl SchemeRow {
    pub fn row_sum(&self) -> f64 {
        self.r_minus + self.r_center + self.r_plus
    }

    /// `r- > 0`, `r+ > 0` and a negative row sum.
    pub fn is_monotone(&self) -> bool {
        self.r_minus > 0.0 && self.r_plus > 0.0 && self.row_sum() < 0.0
    }

    /// Applies the row to three consecutive values.
    pub fn apply(&self, u: [f64; 3]) -> f64 {
        self.r_minus * u[0] + self.r_center * u[1] + self.r_plus * u[2]
    }
}

/// Something the operator selection had to decide outside the case tables.
#[derive(Debug, Clone, PartialEq)]
pub enum DispatchNote {
    /// The prescribed central stencil failed `mu |a| h < 2 eps`.
    Fallback {
        index: usize,
        prescribed: OperatorTag,
        used: OperatorTag,
    },
    /// `h_k (|b| + 2/dt) < 2 mu alpha` failed for `k = 3` and/or `k = 4`.
    DiscontinuityGuard { left_ok: bool, right_ok: bool },
    /// Midpoint-upwind was used at `nodes` nodes where its guard fails.
    UnguardedMidpoint { nodes: usize },
}

impl fmt::Display for DispatchNote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DispatchNote::Fallback {
                index,
                prescribed,
                used,
            } => write!(f, "node {index}: {prescribed} guard failed, using {used}"),
            DispatchNote::DiscontinuityGuard { left_ok, right_ok } => write!(
                f,
                "discontinuity row guard failed (h3 ok: {left_ok}, h4 ok: {right_ok})"
            ),
            DispatchNote::UnguardedMidpoint { nodes } => {
                write!(f, "midpoint-upwind used at {nodes} nodes outside its step-size guard")
            }
        }
    }
}

/// Per-node operator tags (`N + 1` entries, boundaries included).
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMap {
    tags: Vec<OperatorTag>,
    notes: Vec<DispatchNote>,
}

impl OperatorMap {
    pub fn tags(&self) -> &[OperatorTag] {
        &self.tags
    }

    pub fn tag(&self, i: usize) -> OperatorTag {
        self.tags[i]
    }

    pub fn notes(&self) -> &[DispatchNote] {
        &self.notes
    }

    pub fn count(&self, tag: OperatorTag) -> usize {
        self.tags.iter().filter(|&&t| t == tag).count()
    }
}

/// Operator for the coarse outer regions of the mu-dominant case (transition
/// nodes excluded; they always use the guarded choice).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum OuterRule {
    /// Midpoint-upwind regardless of its step-size guard. The rows may then
    /// fail the sign checks; the audit reports them.
    #[default]
    Midpoint,
    /// Midpoint-upwind where `(|b| + 2/dt) h <= 2 alpha mu`, upwind elsewhere.
    Guarded,
}

impl OuterRule {
    pub fn name(self) -> &'static str {
        match self {
            OuterRule::Midpoint => "midpoint",
            OuterRule::Guarded => "guarded",
        }
    }
}

impl fmt::Display for OuterRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for OuterRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midpoint" => Ok(OuterRule::Midpoint),
            "guarded" => Ok(OuterRule::Guarded),
            other => Err(Error::InvalidProblem(format!(
                "unknown outer rule `{other}` (expected midpoint or guarded)"
            ))),
        }
    }
}

/// Case tables of the hybrid scheme.
///
/// All guards depend only on the mesh, `dt` and the sampled norms, so the
/// result is valid for every time step of a run. Guards are evaluated in
/// plain floating point; on a `<=` tie the first-listed operator wins.
pub fn select_operators(
    spec: &ProblemSpec,
    norms: &CoefficientNorms,
    mesh: &SpatialMesh,
    regime: Regime,
    dt: f64,
    rule: OuterRule,
) -> OperatorMap {
    let n = mesh.n();
    let mid = mesh.d_index();
    let [t1, t2, t3, t4] = mesh.transition_indices();
    let alpha = spec.alpha();
    let reaction = norms.b + 2.0 / dt;

    let central_ok = |i: usize| spec.mu * norms.a * mesh.step(i).max(mesh.step(i + 1)) < 2.0 * spec.eps;
    // The midpoint stencil leans on x_{i-1} left of d and on x_{i+1} right of
    // it; that is the step that has to be small enough.
    let midpoint_ok = |i: usize| {
        let h = if i < mid { mesh.step(i) } else { mesh.step(i + 1) };
        reaction * h <= 2.0 * alpha * spec.mu
    };
    let outer = |i: usize| {
        if midpoint_ok(i) {
            OperatorTag::MidpointUpwind
        } else {
            OperatorTag::Upwind
        }
    };
    let is_transition = |i: usize| i == t1 || i == t2 || i == t3 || i == t4;

    let mut notes = Vec::new();
    let mut tags = vec![OperatorTag::Boundary; n + 1];
    for (i, tag) in tags.iter_mut().enumerate().take(n).skip(1) {
        let prescribed_central = match regime {
            _ if i == mid => {
                *tag = OperatorTag::Discontinuity;
                continue;
            }
            _ if is_transition(i) => false,
            Regime::EpsDominant => true,
            Regime::MuDominant => i > t2 && i < t3,
        };
        *tag = if !prescribed_central {
            if rule == OuterRule::Midpoint && !is_transition(i) {
                OperatorTag::MidpointUpwind
            } else {
                outer(i)
            }
        } else if central_ok(i) {
            OperatorTag::Central
        } else {
            let used = outer(i);
            notes.push(DispatchNote::Fallback {
                index: i,
                prescribed: OperatorTag::Central,
                used,
            });
            used
        };
    }

    let unguarded = (1..n)
        .filter(|&i| tags[i] == OperatorTag::MidpointUpwind && !midpoint_ok(i))
        .count();
    if unguarded > 0 {
        notes.push(DispatchNote::UnguardedMidpoint { nodes: unguarded });
    }

    let h = mesh.seg_steps();
    let left_ok = h[2] * reaction < 2.0 * spec.mu * alpha;
    let right_ok = h[3] * reaction < 2.0 * spec.mu * alpha;
    if !(left_ok && right_ok) {
        notes.push(DispatchNote::DiscontinuityGuard { left_ok, right_ok });
    }

    OperatorMap { tags, notes }
}

/// Everything a row constructor needs for the step `t_j -> t_j + dt`.
#[derive(Clone, Copy)]
pub struct StepInput<'a> {
    pub spec: &'a ProblemSpec,
    pub mesh: &'a SpatialMesh,
    /// `t_j + dt / 2`, where the coefficients are evaluated.
    pub t_mid: f64,
    pub dt: f64,
    /// Solution at level `j`, boundaries included.
    pub u_prev: &'a [f64],
}

impl StepInput<'_> {
    fn x(&self, i: usize) -> f64 {
        self.mesh.nodes()[i]
    }

    fn coeffs(&self, side: Side, i: usize) -> (f64, f64, f64) {
        let (x, t) = (self.x(i), self.t_mid);
        (
            self.spec.a.on(side, x, t),
            self.spec.b.on(side, x, t),
            self.spec.f.on(side, x, t),
        )
    }

    fn d_plus(&self, i: usize) -> f64 {
        (self.u_prev[i + 1] - self.u_prev[i]) / (self.x(i + 1) - self.x(i))
    }

    fn d_minus(&self, i: usize) -> f64 {
        (self.u_prev[i] - self.u_prev[i - 1]) / (self.x(i) - self.x(i - 1))
    }

    fn d_zero(&self, i: usize) -> f64 {
        (self.u_prev[i + 1] - self.u_prev[i - 1]) / (self.x(i + 1) - self.x(i - 1))
    }

    fn delta2(&self, i: usize) -> f64 {
        2.0 * (self.d_plus(i) - self.d_minus(i)) / (self.x(i + 1) - self.x(i - 1))
    }
}

/// Second-order central stencil at an interior node other than `N/2`.
pub fn central_row(input: &StepInput<'_>, i: usize) -> SchemeRow {
    let StepInput { spec, mesh, dt, .. } = *input;
    let (eps, mu) = (spec.eps, spec.mu);
    let (a, b, f) = input.coeffs(mesh.side(i), i);
    let (hi, hi1, hb) = (mesh.step(i), mesh.step(i + 1), mesh.hbar(i));

    let r_minus = eps / (hi * hb) - mu * a / (2.0 * hb);
    let r_plus = eps / (hi1 * hb) + mu * a / (2.0 * hb);
    let u = input.u_prev[i];
    SchemeRow {
        r_minus,
        r_center: -r_minus - r_plus - (b + 2.0 / dt),
        r_plus,
        rhs: 2.0 * f - eps * input.delta2(i) - mu * a * input.d_zero(i) + (b - 2.0 / dt) * u,
        tag: OperatorTag::Central,
    }
}

/// Midpoint upwind stencil: convection and reaction (including the time
/// derivative) are averaged over the upwind interval, towards `x_{i-1}` left
/// of `d` and towards `x_{i+1}` right of it. The source is averaged the same
/// way.
pub fn midpoint_row(input: &StepInput<'_>, i: usize, side: Side) -> SchemeRow {
    let StepInput { spec, mesh, dt, .. } = *input;
    let (eps, mu) = (spec.eps, spec.mu);
    let (hi, hi1, hb) = (mesh.step(i), mesh.step(i + 1), mesh.hbar(i));
    let j = match side {
        Side::Left => i - 1,
        Side::Right => i + 1,
    };
    let (a0, b0, f0) = input.coeffs(side, i);
    let (a1, b1, f1) = input.coeffs(side, j);
    let (a_bar, b_bar, f_bar) = ((a0 + a1) / 2.0, (b0 + b1) / 2.0, (f0 + f1) / 2.0);
    let c_bar = b_bar + 2.0 / dt;
    let d_bar = b_bar - 2.0 / dt;
    let u_bar = (input.u_prev[i] + input.u_prev[j]) / 2.0;

    let (r_minus, r_plus, upwind_diff) = match side {
        Side::Left => (
            eps / (hi * hb) - mu * a_bar / hi - c_bar / 2.0,
            eps / (hi1 * hb),
            input.d_minus(i),
        ),
        Side::Right => (
            eps / (hi * hb),
            eps / (hi1 * hb) + mu * a_bar / hi1 - c_bar / 2.0,
            input.d_plus(i),
        ),
    };
    SchemeRow {
        r_minus,
        r_center: -r_minus - r_plus - c_bar,
        r_plus,
        rhs: 2.0 * f_bar - eps * input.delta2(i) - mu * a_bar * upwind_diff + d_bar * u_bar,
        tag: OperatorTag::MidpointUpwind,
    }
}

/// First-order upwind stencil (`D-` left of `d`, `D+` right of it).
pub fn upwind_row(input: &StepInput<'_>, i: usize, side: Side) -> SchemeRow {
    let StepInput { spec, mesh, dt, .. } = *input;
    let (eps, mu) = (spec.eps, spec.mu);
    let (a, b, f) = input.coeffs(side, i);
    let (hi, hi1, hb) = (mesh.step(i), mesh.step(i + 1), mesh.hbar(i));

    let (r_minus, r_plus, upwind_diff) = match side {
        Side::Left => (eps / (hi * hb) - mu * a / hi, eps / (hi1 * hb), input.d_minus(i)),
        Side::Right => (eps / (hi * hb), eps / (hi1 * hb) + mu * a / hi1, input.d_plus(i)),
    };
    SchemeRow {
        r_minus,
        r_center: -r_minus - r_plus - (b + 2.0 / dt),
        r_plus,
        rhs: 2.0 * f - eps * input.delta2(i) - mu * a * upwind_diff + (b - 2.0 / dt) * input.u_prev[i],
        tag: OperatorTag::Upwind,
    }
}

/// One-sided second-order flux balance at `d`:
/// `(-U_{m+2} + 4U_{m+1} - 3U_m) / 2h4 - (U_{m-2} - 4U_{m-1} + 3U_m) / 2h3`,
/// for `u = [U_{m-2}, .., U_{m+2}]`.
pub fn five_point_residual(u: [f64; 5], h3: f64, h4: f64) -> f64 {
    (-u[4] + 4.0 * u[3] - 3.0 * u[2]) / (2.0 * h4) - (u[0] - 4.0 * u[1] + 3.0 * u[2]) / (2.0 * h3)
}

/// Tridiagonal row at `x_{N/2} = d`: the five-point flux balance with
/// `U_{N/2-2}` and `U_{N/2+2}` eliminated through the central rows at
/// `N/2 - 1` and `N/2 + 1`.
pub fn discontinuity_row(input: &StepInput<'_>) -> Result<SchemeRow> {
    let StepInput { spec, mesh, t_mid, dt, .. } = *input;
    let (eps, mu) = (spec.eps, spec.mu);
    let m = mesh.d_index();
    let x = mesh.nodes();
    let (h3, h4) = (mesh.step(m), mesh.step(m + 1));

    let a_l = spec.a.left(x[m - 1], t_mid);
    let c_l = spec.b.left(x[m - 1], t_mid) + 2.0 / dt;
    let a_r = spec.a.right(x[m + 1], t_mid);
    let c_r = spec.b.right(x[m + 1], t_mid) + 2.0 / dt;

    let den_l = 2.0 * eps - h3 * mu * a_l;
    let den_r = 2.0 * eps + h4 * mu * a_r;
    for den in [den_l, den_r] {
        if !(den.abs() >= 1e-14 * eps) {
            return Err(Error::DegeneratePivot { denominator: den });
        }
    }

    let g_l = central_row(input, m - 1).rhs;
    let g_r = central_row(input, m + 1).rhs;

    Ok(SchemeRow {
        r_minus: ((-4.0 * eps - 2.0 * h3 * h3 * c_l) / den_l + 4.0) * h4,
        r_center: (2.0 * eps - h4 * mu * a_r) / den_r * h3 - 3.0 * (h3 + h4)
            + (2.0 * eps + h3 * mu * a_l) / den_l * h4,
        r_plus: ((-4.0 * eps - 2.0 * h4 * h4 * c_r) / den_r + 4.0) * h3,
        rhs: 2.0 * h3 * h3 * h4 * g_l / den_l + 2.0 * h4 * h4 * h3 * g_r / den_r,
        tag: OperatorTag::Discontinuity,
    })
}

/// Row at `d` for arbitrary neighbouring rows: the five-point flux balance,
/// scaled by `2 h3 h4`, with `U_{N/2-2}` and `U_{N/2+2}` eliminated through
/// `left` (the row at `N/2 - 1`) and `right` (the row at `N/2 + 1`).
///
/// With central neighbours this is [`discontinuity_row`] up to rounding.
pub fn eliminate_flux_balance(left: &SchemeRow, right: &SchemeRow, h3: f64, h4: f64) -> Result<SchemeRow> {
    for (pivot, rest) in [
        (left.r_minus, left.r_center.abs() + left.r_plus.abs()),
        (right.r_plus, right.r_center.abs() + right.r_minus.abs()),
    ] {
        if !(pivot.abs() > 1e-14 * rest) {
            return Err(Error::DegeneratePivot { denominator: pivot });
        }
    }
    let (l, r) = (left, right);
    Ok(SchemeRow {
        r_minus: h4 * (4.0 + l.r_center / l.r_minus),
        r_center: -3.0 * (h3 + h4) + h3 * r.r_minus / r.r_plus + h4 * l.r_plus / l.r_minus,
        r_plus: h3 * (4.0 + r.r_center / r.r_plus),
        rhs: h3 * r.rhs / r.r_plus + h4 * l.rhs / l.r_minus,
        tag: OperatorTag::Discontinuity,
    })
}

/// The tridiagonal system of one time step, boundary values folded in.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledStep {
    /// Row `k` belongs to node `k + 1`.
    pub rows: Vec<SchemeRow>,
    pub left_value: f64,
    pub right_value: f64,
}

impl AssembledStep {
    pub fn tags(&self) -> impl Iterator<Item = OperatorTag> + '_ {
        self.rows.iter().map(|r| r.tag)
    }

    /// Solves for the new level and installs the boundary values.
    ///
    /// The rows are negated first so the solve runs on the M-matrix form.
    pub fn solve(&self) -> Result<Vec<f64>> {
        let n = self.rows.len();
        let diag: Vec<f64> = self.rows.iter().map(|r| -r.r_center).collect();
        let lower: Vec<f64> = self.rows[1..].iter().map(|r| -r.r_minus).collect();
        let upper: Vec<f64> = self.rows[..n - 1].iter().map(|r| -r.r_plus).collect();
        let rhs: Vec<f64> = self.rows.iter().map(|r| -r.rhs).collect();
        let interior = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;

        let mut level = Vec::with_capacity(n + 2);
        level.push(self.left_value);
        level.extend(interior);
        level.push(self.right_value);
        Ok(level)
    }
}

/// Builds every interior row for the step `t_j -> t_j + dt`.
pub fn assemble_step(
    spec: &ProblemSpec,
    mesh: &SpatialMesh,
    operators: &OperatorMap,
    t_j: f64,
    dt: f64,
    u_prev: &[f64],
) -> Result<AssembledStep> {
    let n = mesh.n();
    if u_prev.len() != n + 1 || operators.tags().len() != n + 1 {
        return Err(Error::Dimension(format!(
            "mesh has {} nodes, previous level {}, operator map {}",
            n + 1,
            u_prev.len(),
            operators.tags().len()
        )));
    }
    let input = StepInput {
        spec,
        mesh,
        t_mid: t_j + dt / 2.0,
        dt,
        u_prev,
    };

    let three_point = |i: usize| match operators.tag(i) {
        OperatorTag::Central => Some(central_row(&input, i)),
        OperatorTag::MidpointUpwind => Some(midpoint_row(&input, i, mesh.side(i))),
        OperatorTag::Upwind => Some(upwind_row(&input, i, mesh.side(i))),
        OperatorTag::Discontinuity | OperatorTag::Boundary => None,
    };
    let at_node = |index: usize| {
        move |e: Error| Error::AtNode {
            index,
            source: Box::new(e),
        }
    };
    let mut rows = Vec::with_capacity(n - 1);
    for i in 1..n {
        let row = match operators.tag(i) {
            OperatorTag::Discontinuity => {
                let flanks = (i > 1 && i + 1 < n)
                    .then(|| three_point(i - 1).zip(three_point(i + 1)))
                    .flatten();
                match flanks {
                    Some((l, r)) if l.tag == OperatorTag::Central && r.tag == OperatorTag::Central => {
                        discontinuity_row(&input).map_err(at_node(i))?
                    }
                    Some((l, r)) => {
                        eliminate_flux_balance(&l, &r, mesh.step(i), mesh.step(i + 1)).map_err(at_node(i))?
                    }
                    None => {
                        return Err(at_node(i)(Error::Dimension(
                            "discontinuity row needs three-point rows on both sides".into(),
                        )))
                    }
                }
            }
            _ => three_point(i).ok_or_else(|| {
                at_node(i)(Error::Dimension("interior node tagged as boundary".into()))
            })?,
        };
        rows.push(row);
    }

    let t_next = t_j + dt;
    let mut step = AssembledStep {
        rows,
        left_value: (spec.p)(t_next),
        right_value: (spec.r)(t_next),
    };
    let first = &mut step.rows[0];
    first.rhs -= first.r_minus * step.left_value;
    let last = &mut step.rows[n - 2];
    last.rhs -= last.r_plus * step.right_value;
    Ok(step)
}

/// `N / ln N > 16 max(|b| / alpha, (|b| + 2/dt) / (alpha rho))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityCondition {
    pub lhs: f64,
    pub rhs: f64,
}

impl MonotonicityCondition {
    pub fn evaluate(spec: &ProblemSpec, norms: &CoefficientNorms, n: usize, dt: f64) -> Self {
        let alpha = spec.alpha();
        let nf = n as f64;
        MonotonicityCondition {
            lhs: nf / nf.ln(),
            rhs: 16.0 * (norms.b / alpha).max((norms.b + 2.0 / dt) / (alpha * spec.rho)),
        }
    }

    pub fn holds(&self) -> bool {
        self.lhs > self.rhs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowAudit {
    pub index: usize,
    pub x: f64,
    pub tag: OperatorTag,
    pub r_minus: f64,
    pub r_center: f64,
    pub r_plus: f64,
    pub row_sum: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub condition: MonotonicityCondition,
    pub rows: Vec<RowAudit>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.ok)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RowAudit> {
        self.rows.iter().filter(|r| !r.ok)
    }

    /// `i,x,tag,r_minus,r_center,r_plus,rowsum,guard_ok`
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "i,x,tag,r_minus,r_center,r_plus,rowsum,guard_ok")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.index, r.x, r.tag, r.r_minus, r.r_center, r.r_plus, r.row_sum, r.ok
            )?;
        }
        Ok(())
    }
}

/// Checks the sign pattern of every row and evaluates the monotonicity
/// condition for this `N` and `dt`.
pub fn audit_monotonicity(
    step: &AssembledStep,
    mesh: &SpatialMesh,
    spec: &ProblemSpec,
    norms: &CoefficientNorms,
    dt: f64,
) -> AuditReport {
    let rows = step
        .rows
        .iter()
        .enumerate()
        .map(|(k, row)| RowAudit {
            index: k + 1,
            x: mesh.nodes()[k + 1],
            tag: row.tag,
            r_minus: row.r_minus,
            r_center: row.r_center,
            r_plus: row.r_plus,
            row_sum: row.row_sum(),
            ok: row.is_monotone(),
        })
        .collect();
    AuditReport {
        condition: MonotonicityCondition::evaluate(spec, norms, mesh.n(), dt),
        rows,
    }
}
