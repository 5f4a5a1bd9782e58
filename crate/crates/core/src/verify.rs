//! Double-mesh error estimates, convergence orders and manufactured-solution
//! studies.

use std::cmp::Ordering;
use std::io::{self, Write};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};
use crate::mesh::{bisect, build_time_grid, shishkin_mesh};
use crate::par::{self, Execution};
use crate::problem::{classify_regime, ExactSolution, ExampleId, ProblemSpec};
use crate::scheme::OuterRule;
use crate::solver::{solve_on, solve_with, SolutionField};

/// `max_{i,j} |fine[2i][2j] - coarse[i][j]|`.
///
/// `fine` must live on the bisection of the coarse mesh and grid.
pub fn double_mesh_error(coarse: &SolutionField, fine: &SolutionField) -> Result<f64> {
    let (cx, fx) = (coarse.mesh().nodes(), fine.mesh().nodes());
    let (ct, ft) = (coarse.grid().levels(), fine.grid().levels());
    if fx.len() != 2 * cx.len() - 1 || ft.len() != 2 * ct.len() - 1 {
        return Err(Error::MeshMismatch(format!(
            "coarse {}x{} vs fine {}x{}",
            cx.len(),
            ct.len(),
            fx.len(),
            ft.len()
        )));
    }
    for (i, &x) in cx.iter().enumerate() {
        if (fx[2 * i] - x).abs() > 1e-13 {
            return Err(Error::MeshMismatch(format!(
                "coarse node {i} at {x} vs fine node {} at {}",
                2 * i,
                fx[2 * i]
            )));
        }
    }
    for (j, &t) in ct.iter().enumerate() {
        if (ft[2 * j] - t).abs() > 1e-13 {
            return Err(Error::MeshMismatch(format!("time level {j}: {t} vs {}", ft[2 * j])));
        }
    }

    let mut err = 0.0f64;
    for j in 0..ct.len() {
        let (c, f) = (coarse.level(j), fine.level(2 * j));
        for (i, &u) in c.iter().enumerate() {
            err = err.max((f[2 * i] - u).abs());
        }
    }
    Ok(err)
}

/// `log2(E_coarse / E_fine)`; `+inf` when `E_fine` is zero.
pub fn convergence_order(e_coarse: f64, e_fine: f64) -> f64 {
    if e_fine == 0.0 {
        f64::INFINITY
    } else {
        (e_coarse / e_fine).log2()
    }
}

/// Solves at `(N, N)` and on the bisected `(2N, 2N)` grid and compares.
pub fn double_mesh_cell(spec: &ProblemSpec, n: usize) -> Result<f64> {
    double_mesh_cell_with(spec, n, OuterRule::default())
}

pub fn double_mesh_cell_with(spec: &ProblemSpec, n: usize, rule: OuterRule) -> Result<f64> {
    let mesh = shishkin_mesh(spec, classify_regime(spec), n)?;
    let grid = build_time_grid(spec.final_time, n)?;
    let coarse = solve_with(spec, mesh, grid, rule)?;
    let (mesh, grid) = bisect(coarse.mesh(), coarse.grid());
    let fine = solve_with(spec, mesh, grid, rule)?;
    double_mesh_error(&coarse, &fine)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub mu: f64,
    pub n: usize,
    pub m: usize,
    /// `None` if the cell failed; see `failure`.
    pub error: Option<f64>,
    /// `None` when the next refinement is missing or failed.
    pub order: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub example: String,
    pub rho: f64,
    pub alpha: f64,
    /// Seconds since the Unix epoch; not part of the CSV output.
    pub created_unix: u64,
    pub rows: Vec<ConvergenceRow>,
}

fn cmp_rows(a: &ConvergenceRow, b: &ConvergenceRow) -> Ordering {
    a.eps
        .total_cmp(&b.eps)
        .then(a.mu.total_cmp(&b.mu))
        .then(a.n.cmp(&b.n))
}

impl ConvergenceTable {
    fn new(example: &str, spec: &ProblemSpec, mut rows: Vec<ConvergenceRow>) -> Self {
        rows.sort_by(cmp_rows);
        for k in 0..rows.len() {
            let (eps, mu, n) = (rows[k].eps, rows[k].mu, rows[k].n);
            let next = rows[k + 1..]
                .iter()
                .find(|r| r.eps == eps && r.mu == mu && r.n == 2 * n)
                .and_then(|r| r.error);
            rows[k].order = match (rows[k].error, next) {
                (Some(e), Some(e2)) => Some(convergence_order(e, e2)),
                _ => None,
            };
        }
        ConvergenceTable {
            example: example.to_string(),
            rho: spec.rho,
            alpha: spec.alpha(),
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            rows,
        }
    }

    pub fn get(&self, eps: f64, mu: f64, n: usize) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.eps == eps && r.mu == mu && r.n == n)
    }

    pub fn error(&self, eps: f64, mu: f64, n: usize) -> Option<f64> {
        self.get(eps, mu, n).and_then(|r| r.error)
    }

    pub fn order(&self, eps: f64, mu: f64, n: usize) -> Option<f64> {
        self.get(eps, mu, n).and_then(|r| r.order)
    }

    /// `example,eps,mu,N,M,E,R` with `E` and `R` to four significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "example,eps,mu,N,M,E,R")?;
        for r in &self.rows {
            let e = r.error.map(|e| format!("{e:.3e}")).unwrap_or_default();
            let o = r.order.map(|o| format!("{o:.3e}")).unwrap_or_default();
            writeln!(w, "{},{:e},{:e},{},{},{},{}", self.example, r.eps, r.mu, r.n, r.m, e, o)?;
        }
        Ok(())
    }
}

/// Double-mesh table of a built-in example over every `(eps, mu, N)`.
pub fn run_sweep(example: ExampleId, eps: &[f64], mu: &[f64], ns: &[usize], exec: Execution) -> ConvergenceTable {
    run_sweep_with(example.name(), |e, m| example.spec(e, m), OuterRule::default(), eps, mu, ns, exec)
}

/// As [`run_sweep`] for an arbitrary problem family. A failing cell is
/// recorded in its row and the sweep carries on.
pub fn run_sweep_with<F>(
    label: &str,
    make: F,
    rule: OuterRule,
    eps: &[f64],
    mu: &[f64],
    ns: &[usize],
    exec: Execution,
) -> ConvergenceTable
where
    F: Fn(f64, f64) -> ProblemSpec + Sync + Send,
{
    let cells: Vec<(f64, f64, usize)> = eps
        .iter()
        .flat_map(|&e| mu.iter().flat_map(move |&m| ns.iter().map(move |&n| (e, m, n))))
        .collect();
    let rows = par::map(exec, &cells, |&(e, m, n)| {
        let outcome = double_mesh_cell_with(&make(e, m), n, rule);
        ConvergenceRow {
            eps: e,
            mu: m,
            n,
            m: n,
            error: outcome.as_ref().ok().copied(),
            order: None,
            failure: outcome.err().map(|err| err.to_string()),
        }
    });
    let reference = make(eps[0], mu[0]);
    ConvergenceTable::new(label, &reference, rows)
}

/// `max |U - u|` over all grid points.
pub fn exact_error(field: &SolutionField, exact: &ExactSolution) -> f64 {
    let mut err = 0.0f64;
    for (j, &t) in field.grid().levels().iter().enumerate() {
        for (&x, &u) in field.mesh().nodes().iter().zip(field.level(j)) {
            err = err.max((u - exact.value(x, t)).abs());
        }
    }
    err
}

/// Least-squares slope of `ys` against `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmsStudy {
    /// Exact errors; `E` is `max |U - u|`, `R` the pairwise order.
    pub table: ConvergenceTable,
    /// Twice the least-squares slope of `ln E` against
    /// `ln(N^-2 (ln N)^3 + (T/N)^2)`; 2 when the error tracks that bound.
    pub fitted_order: Option<f64>,
    /// Minus the least-squares slope of `ln E` against `ln N`.
    pub loglog_order: Option<f64>,
}

/// Exact-error study at `M = N` for a problem with known solution.
pub fn mms_error_study(
    spec: &ProblemSpec,
    exact: &ExactSolution,
    label: &str,
    rule: OuterRule,
    ns: &[usize],
    exec: Execution,
) -> MmsStudy {
    let rows = par::map(exec, ns, |&n| {
        let outcome = shishkin_mesh(spec, classify_regime(spec), n)
            .and_then(|mesh| Ok((mesh, build_time_grid(spec.final_time, n)?)))
            .and_then(|(mesh, grid)| solve_with(spec, mesh, grid, rule))
            .map(|field| exact_error(&field, exact));
        ConvergenceRow {
            eps: spec.eps,
            mu: spec.mu,
            n,
            m: n,
            error: outcome.as_ref().ok().copied(),
            order: None,
            failure: outcome.err().map(|e| e.to_string()),
        }
    });
    let table = ConvergenceTable::new(label, spec, rows);

    let points: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter_map(|r| r.error.map(|e| (r.n as f64, e)))
        .collect();
    let usable = points.len() >= 3 && points.len() == ns.len() && points.iter().all(|&(_, e)| e > 0.0);
    let (fitted_order, loglog_order) = if usable {
        let t = spec.final_time;
        let log_e: Vec<f64> = points.iter().map(|&(_, e)| e.ln()).collect();
        let log_bound: Vec<f64> = points
            .iter()
            .map(|&(n, _)| (n.powi(-2) * n.ln().powi(3) + (t / n).powi(2)).ln())
            .collect();
        let log_n: Vec<f64> = points.iter().map(|&(n, _)| n.ln()).collect();
        (Some(2.0 * slope(&log_bound, &log_e)), Some(-slope(&log_n, &log_e)))
    } else {
        (None, None)
    };
    MmsStudy {
        table,
        fitted_order,
        loglog_order,
    }
}

/// Manufactured-solution study of a built-in `mms-*` example.
pub fn mms_example_study(example: ExampleId, eps: f64, mu: f64, ns: &[usize], exec: Execution) -> Result<MmsStudy> {
    let exact = example.exact(eps).ok_or_else(|| {
        Error::InvalidProblem(format!("{example} has no exact solution"))
    })?;
    Ok(mms_error_study(&example.spec(eps, mu), &exact, example.name(), OuterRule::default(), ns, exec))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalStudy {
    pub n: usize,
    /// `(M, max |U - u|)` in the order given.
    pub errors: Vec<(usize, f64)>,
    /// `log2(E_M / E_2M)` for consecutive entries.
    pub orders: Vec<f64>,
}

/// Refines only in time, at a fixed spatial mesh.
pub fn temporal_order_study(
    spec: &ProblemSpec,
    exact: &ExactSolution,
    n: usize,
    ms: &[usize],
    exec: Execution,
) -> Result<TemporalStudy> {
    let mesh = shishkin_mesh(spec, classify_regime(spec), n)?;
    let errors = par::map(exec, ms, |&m| {
        let grid = build_time_grid(spec.final_time, m)?;
        let field = solve_on(spec, mesh.clone(), grid)?;
        Ok((m, exact_error(&field, exact)))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let orders = errors
        .windows(2)
        .map(|w| convergence_order(w[0].1, w[1].1))
        .collect();
    Ok(TemporalStudy { n, errors, orders })
}
