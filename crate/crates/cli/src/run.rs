use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use spp_hybrid::mesh::{build_time_grid, shishkin_mesh};
use spp_hybrid::problem::CoefficientNorms;
use spp_hybrid::scheme::{assemble_step, audit_monotonicity, select_operators};
use spp_hybrid::solver::{solve_with, SolveWarning};
use spp_hybrid::verify::{mms_error_study, run_sweep_with};
use spp_hybrid::{classify_regime, ConvergenceTable, Execution, ProblemSpec};

use crate::config::{Command, RunConfig};
use crate::error::CliError;

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(&config.out).map_err(|source| CliError::Io {
        path: config.out.clone(),
        source,
    })?;
    match config.command {
        Command::Solve => solve(config),
        Command::Sweep => sweep(config),
        Command::Mms => mms(config),
        Command::Audit => audit(config),
        Command::MeshDump => mesh_dump(config),
    }
}

fn spec_for(config: &RunConfig, eps: f64, mu: f64) -> ProblemSpec {
    let spec = config.example.spec(eps, mu);
    match config.rho {
        Some(rho) => spec.with_rho(rho),
        None => spec,
    }
}

fn execution(config: &RunConfig) -> Execution {
    match config.jobs {
        Some(1) => Execution::Sequential,
        _ => Execution::default(),
    }
}

fn write_file(dir: &Path, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<(), CliError> {
    let path = dir.join(name);
    let io_err = |source| CliError::Io {
        path: path.clone(),
        source,
    };
    let mut w = BufWriter::new(File::create(&path).map_err(io_err)?);
    body(&mut w).and_then(|_| w.flush()).map_err(io_err)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn solve(config: &RunConfig) -> Result<(), CliError> {
    let spec = spec_for(config, config.eps[0], config.mu[0]);
    let regime = classify_regime(&spec);
    let mesh = shishkin_mesh(&spec, regime, config.n[0])?;
    let grid = build_time_grid(spec.final_time, config.steps())?;
    let field = solve_with(&spec, mesh, grid, config.outer)?;

    write_file(&config.out, "surface.csv", |w| field.write_surface_csv(w))?;
    write_file(&config.out, "audit.csv", |w| {
        writeln!(w, "level,t,failed_rows,first_failure")?;
        for a in field.audits() {
            let t = field.grid().levels()[a.level];
            let first = a.first_failure.map(|i| i.to_string()).unwrap_or_default();
            writeln!(w, "{},{},{},{}", a.level, t, a.failed_rows, first)?;
        }
        Ok(())
    })?;

    println!("regime {:?}, max |U| = {}", field.regime(), field.max_abs());
    for warning in field.warnings() {
        eprintln!("warning: {}", describe(warning));
    }
    let bad = field.warnings().iter().find(|w| matches!(w, SolveWarning::NonMonotoneRows { .. }));
    match bad {
        Some(w) if config.strict_audit => Err(CliError::Numerical(describe(w))),
        _ => Ok(()),
    }
}

fn describe(w: &SolveWarning) -> String {
    match w {
        SolveWarning::StabilityBound { max_abs, bound } => {
            format!("max |U| = {max_abs:e} exceeds the stability bound {bound:e}")
        }
        SolveWarning::NonMonotoneRows { steps, worst } => {
            format!("rows fail the sign checks in {steps} steps (at most {worst} rows per step)")
        }
        SolveWarning::Dispatch(note) => note.clone(),
    }
}

fn finish_table(config: &RunConfig, name: &str, table: &ConvergenceTable) -> Result<(), CliError> {
    write_file(&config.out, name, |w| table.write_csv(w))?;
    let failed: Vec<_> = table.rows.iter().filter(|r| r.failure.is_some()).collect();
    for r in &failed {
        eprintln!(
            "warning: cell eps={:e} mu={:e} N={} failed: {}",
            r.eps,
            r.mu,
            r.n,
            r.failure.as_deref().unwrap_or_default()
        );
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("{} of {} cells failed", failed.len(), table.rows.len())))
    }
}

fn sweep(config: &RunConfig) -> Result<(), CliError> {
    let table = run_sweep_with(
        config.example.name(),
        |e, m| spec_for(config, e, m),
        config.outer,
        &config.eps,
        &config.mu,
        &config.n,
        execution(config),
    );
    finish_table(config, "table.csv", &table)
}

fn mms(config: &RunConfig) -> Result<(), CliError> {
    let mut combined: Option<ConvergenceTable> = None;
    let mut eps = config.eps.clone();
    let mut mu = config.mu.clone();
    eps.sort_by(f64::total_cmp);
    mu.sort_by(f64::total_cmp);
    for &e in &eps {
        let exact = config.example.exact(e).expect("checked when parsing");
        for &m in &mu {
            let study = mms_error_study(
                &spec_for(config, e, m),
                &exact,
                config.example.name(),
                config.outer,
                &config.n,
                execution(config),
            );
            let fitted = study.fitted_order.map_or("-".into(), |o| format!("{o:.4}"));
            println!("eps={e:e} mu={m:e}: fitted order {fitted}");
            match &mut combined {
                Some(t) => t.rows.extend(study.table.rows),
                None => combined = Some(study.table),
            }
        }
    }
    finish_table(config, "mms.csv", &combined.expect("lists are nonempty"))
}

fn audit(config: &RunConfig) -> Result<(), CliError> {
    let spec = spec_for(config, config.eps[0], config.mu[0]);
    let regime = classify_regime(&spec);
    let mesh = shishkin_mesh(&spec, regime, config.n[0])?;
    let grid = build_time_grid(spec.final_time, config.steps())?;
    let norms = CoefficientNorms::estimate(&spec);
    let dt = grid.dt();
    let ops = select_operators(&spec, &norms, &mesh, regime, dt, config.outer);
    let u0: Vec<f64> = mesh.nodes().iter().map(|&x| (spec.q)(x)).collect();
    let step = assemble_step(&spec, &mesh, &ops, 0.0, dt, &u0)?;
    let report = audit_monotonicity(&step, &mesh, &spec, &norms, dt);

    write_file(&config.out, "audit.csv", |w| report.write_csv(w))?;
    let c = report.condition;
    write_file(&config.out, "condition.csv", |w| {
        writeln!(w, "N,M,lhs,rhs,holds")?;
        writeln!(w, "{},{},{},{},{}", mesh.n(), grid.steps(), c.lhs, c.rhs, c.holds())
    })?;

    let failing = report.failures().count();
    println!(
        "monotonicity condition N/ln N = {} vs {}: {}",
        c.lhs,
        c.rhs,
        if c.holds() { "holds" } else { "does not hold" }
    );
    println!("{failing} of {} rows fail the sign checks", report.rows.len());
    for note in ops.notes() {
        eprintln!("warning: {note}");
    }
    if failing > 0 && config.strict_audit {
        return Err(CliError::Numerical(format!("{failing} rows fail the sign checks")));
    }
    Ok(())
}

fn mesh_dump(config: &RunConfig) -> Result<(), CliError> {
    let spec = spec_for(config, config.eps[0], config.mu[0]);
    let mesh = shishkin_mesh(&spec, classify_regime(&spec), config.n[0])?;
    write_file(&config.out, "mesh.csv", |w| {
        writeln!(w, "i,x")?;
        for (i, x) in mesh.nodes().iter().enumerate() {
            writeln!(w, "{i},{x}")?;
        }
        Ok(())
    })
}
