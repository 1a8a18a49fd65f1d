use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use pardiff_core::elliptic::{
    harmonicity_residual, max_principle_check, mean_value_check, BiharmonicReport,
};
use pardiff_core::mollify::{convolve, l1_convergence};
use pardiff_core::{
    classify_region, fmt_real, harnack_limit, newtonian_potential, solve_biharmonic,
    solve_laplace_dirichlet, solve_poisson_dirichlet, FundamentalSolution, GridFunction,
    GridSpec, MollifierKernel, SolveReport,
};

use crate::args::{
    ApplyArgs, ClassifyArgs, ConvergenceArgs, MollifyArgs, PotentialArgs, Problem, SolveArgs,
    VerifyCommand,
};
use crate::error::{CliError, CliResult};
use crate::io::{
    check_input, check_output, default_solution_path, parse_expr, read_grid, read_stencil,
    write_atomic,
};
use crate::study::{convergence_study, study_csv, StudyProblem};

/// Where a command's text result goes.
pub enum Sink<'a> {
    Stdout(&'a mut String),
    File(&'a Path),
}

fn emit(sink: Sink<'_>, text: &str) -> CliResult<()> {
    match sink {
        Sink::Stdout(buf) => {
            buf.push_str(text);
            Ok(())
        }
        Sink::File(path) => write_atomic(path, text),
    }
}

fn join_reals(values: &[f64]) -> String {
    values.iter().map(|&v| fmt_real(v)).collect::<Vec<_>>().join(",")
}

fn numbered(prefix: &str, n: usize) -> String {
    (1..=n).map(|k| format!("{prefix}{k}")).collect::<Vec<_>>().join(",")
}

pub fn classify(args: &ClassifyArgs, stdout: &mut String) -> CliResult<()> {
    check_input(&args.stencil)?;
    if let Some(p) = &args.probe {
        check_input(p)?;
    }
    let stencil = read_stencil(&args.stencil)?;
    let op = &stencil.operator;
    let n = op.dim();
    let probe = match (&args.probe, &args.at) {
        (Some(path), _) => read_grid(path)?.spec().clone(),
        (None, Some(at)) => {
            if at.len() != n {
                return Err(CliError::Usage(format!(
                    "--at needs {n} coordinates, got {}",
                    at.len()
                )));
            }
            GridSpec::new(at.clone(), 1.0, vec![1; n])?
        }
        (None, None) => GridSpec::new(vec![0.0; n], 1.0, vec![1; n])?,
    };
    let report = classify_region(op, &probe, args.tol)?;
    let mut out = format!("{},{},label\n", numbered("x", n), numbered("lambda", n));
    for e in &report.entries {
        let _ = writeln!(
            out,
            "{},{},{}",
            join_reals(&e.point),
            join_reals(&e.eigenvalues),
            e.label
        );
    }
    emit(Sink::Stdout(stdout), &out)
}

pub fn apply(args: &ApplyArgs) -> CliResult<()> {
    check_input(&args.stencil)?;
    check_input(&args.input)?;
    check_output(&args.out)?;
    let stencil = read_stencil(&args.stencil)?;
    let stencil = stencil.into_stencil().map_err(|source| CliError::Input {
        path: args.stencil.clone(),
        source,
    })?;
    let u = read_grid(&args.input)?;
    let out = stencil.apply(&u)?;
    write_atomic(&args.out, &out.to_text())
}

pub fn solve(args: &SolveArgs, stdout: &mut String) -> CliResult<()> {
    check_input(&args.grid)?;
    let out_path = args.out.clone().unwrap_or_else(|| default_solution_path(&args.grid));
    check_output(&out_path)?;
    if let Some(r) = &args.report {
        check_output(r)?;
    }
    let boundary = parse_expr("--boundary", &args.boundary)?;
    let rhs = parse_expr("--rhs", &args.rhs)?;
    let boundary_lap = match (&args.boundary_lap, args.problem) {
        (Some(src), Problem::Biharmonic) => Some(parse_expr("--boundary-lap", src)?),
        (None, Problem::Biharmonic) => {
            return Err(CliError::Usage("biharmonic needs --boundary-lap".into()))
        }
        (Some(_), _) => {
            return Err(CliError::Usage("--boundary-lap applies to biharmonic only".into()))
        }
        (None, _) => None,
    };
    if args.problem == Problem::Laplace && args.rhs != "0" {
        return Err(CliError::Usage("laplace takes no --rhs; use poisson".into()));
    }
    let spec = read_grid(&args.grid)?.spec().clone();
    let g = GridFunction::sample_boundary(&boundary, &spec)?;

    let start = Instant::now();
    let (solution, row) = match args.problem {
        Problem::Laplace => {
            let r = solve_laplace_dirichlet(&spec, &g, args.tol, args.max_iter)?;
            report_row("laplace", &r)
        }
        Problem::Poisson => {
            let f = GridFunction::sample(&rhs, &spec)?;
            let r = solve_poisson_dirichlet(&spec, &f, &g, args.tol, args.max_iter)?;
            report_row("poisson", &r)
        }
        Problem::Biharmonic => {
            let f = GridFunction::sample(&rhs, &spec)?;
            let lap = boundary_lap.expect("checked above");
            let g_lap = GridFunction::sample_boundary(&lap, &spec)?;
            let r = solve_biharmonic(&spec, &f, &g, &g_lap, args.tol, args.max_iter)?;
            biharmonic_row(r)
        }
    };
    let seconds = start.elapsed().as_secs_f64();

    let mut header = if args.problem == Problem::Biharmonic {
        "problem,iterations,residual,composed_residual,converged".to_string()
    } else {
        "problem,iterations,residual,converged".to_string()
    };
    let mut line = row;
    if args.timing {
        header.push_str(",wall_seconds");
        let _ = write!(line, ",{}", fmt_real(seconds));
    }
    write_atomic(&out_path, &solution.to_text())?;
    let report = format!("{header}\n{line}\n");
    match &args.report {
        Some(path) => emit(Sink::File(path), &report),
        None => emit(Sink::Stdout(stdout), &report),
    }
}

fn report_row(name: &str, r: &SolveReport) -> (GridFunction, String) {
    let line = format!(
        "{name},{},{},{}",
        r.iterations,
        fmt_real(r.final_residual),
        r.converged
    );
    (r.solution.clone(), line)
}

fn biharmonic_row(r: BiharmonicReport) -> (GridFunction, String) {
    let residual = r.solution.final_residual.max(r.laplacian.final_residual);
    let line = format!(
        "biharmonic,{},{},{},{}",
        r.iterations(),
        fmt_real(residual),
        fmt_real(r.composed_residual),
        r.converged()
    );
    (r.solution.solution, line)
}

pub fn mollify(args: &MollifyArgs, stdout: &mut String) -> CliResult<()> {
    check_input(&args.input)?;
    if let Some(out) = &args.out {
        check_output(out)?;
    }
    if args.refine == 0 {
        return Err(CliError::Usage("--refine must be at least 1".into()));
    }
    let f = read_grid(&args.input)?;
    match (&args.eps_list, args.eps) {
        (Some(list), _) => {
            let study = l1_convergence(&f, list, args.refine)?;
            let mut out = String::from("eps,l1_error\n");
            for (e, err) in study.eps.iter().zip(&study.errors) {
                let _ = writeln!(out, "{},{}", fmt_real(*e), fmt_real(*err));
            }
            match &args.out {
                Some(path) => emit(Sink::File(path), &out),
                None => emit(Sink::Stdout(stdout), &out),
            }
        }
        (None, Some(eps)) => {
            let kernel = MollifierKernel::new(f.spec().dim(), eps, f.spec().h(), args.refine)?;
            let smooth = convolve(&f, &kernel)?;
            let path = args.out.as_ref().expect("required by the parser");
            write_atomic(path, &smooth.to_text())
        }
        (None, None) => Err(CliError::Usage("give --eps or --eps-list".into())),
    }
}

pub fn potential(args: &PotentialArgs) -> CliResult<()> {
    check_input(&args.source)?;
    if let Some(t) = &args.targets {
        check_input(t)?;
    }
    check_output(&args.out)?;
    let f = read_grid(&args.source)?;
    let targets = match &args.targets {
        Some(path) => read_grid(path)?.spec().clone(),
        None => f.spec().clone(),
    };
    let fs = FundamentalSolution::new(f.spec().dim())?;
    let u = newtonian_potential(&fs, &f, &targets)?;
    write_atomic(&args.out, &u.to_text())
}

pub fn verify(cmd: &VerifyCommand, stdout: &mut String) -> CliResult<()> {
    let out = match cmd {
        VerifyCommand::Residual {
            stencil,
            input,
            rhs,
        } => {
            check_input(stencil)?;
            check_input(input)?;
            check_input(rhs)?;
            let s = read_stencil(stencil)?
                .into_stencil()
                .map_err(|source| CliError::Input {
                    path: stencil.clone(),
                    source,
                })?;
            let u = read_grid(input)?;
            let f = read_grid(rhs)?;
            let (l1, linf) = s.residual(&u, &f)?;
            format!("l1,linf\n{},{}\n", fmt_real(l1), fmt_real(linf))
        }
        VerifyCommand::MaxPrinciple { input } => {
            check_input(input)?;
            let r = max_principle_check(&read_grid(input)?)?;
            let witness = r.witness.map(|w| w.to_string()).unwrap_or_default();
            format!(
                "pass,boundary_max,interior_max,witness\n{},{},{},{witness}\n",
                r.pass,
                fmt_real(r.boundary_max),
                fmt_real(r.interior_max)
            )
        }
        VerifyCommand::MeanValue {
            input,
            center,
            radius,
        } => {
            check_input(input)?;
            let r = mean_value_check(&read_grid(input)?, center, *radius)?;
            format!(
                "center_value,sphere_mean,deviation\n{},{},{}\n",
                fmt_real(r.center_value),
                fmt_real(r.sphere_mean),
                fmt_real(r.deviation)
            )
        }
        VerifyCommand::Harnack {
            input,
            margin,
            tol,
            out,
        } => {
            for p in input {
                check_input(p)?;
            }
            if let Some(o) = out {
                check_output(o)?;
            }
            let seq = input.iter().map(|p| read_grid(p)).collect::<CliResult<Vec<_>>>()?;
            let v = harnack_limit(&seq, *margin, *tol)?;
            if let (Some(path), Some(limit)) = (out, &v.limit) {
                write_atomic(path, &limit.to_text())?;
            }
            let (step, node) = match v.witness {
                Some((k, i)) => (k.to_string(), i.to_string()),
                None => (String::new(), String::new()),
            };
            format!(
                "outcome,last_deviation,witness_step,witness_node,limit_residual\n{},{},{step},{node},{}\n",
                v.outcome,
                v.deviations.last().map(|&d| fmt_real(d)).unwrap_or_default(),
                v.limit_residual.map(fmt_real).unwrap_or_default()
            )
        }
        VerifyCommand::Harmonicity {
            expr,
            lower,
            upper,
            h_list,
        } => {
            let e = parse_expr("--expr", expr)?;
            let study = harmonicity_residual(&e, lower, upper, h_list)?;
            let order = study
                .fitted_order
                .map(fmt_real)
                .unwrap_or_else(|| "exact".into());
            let mut out = String::from("h,residual,fitted_order\n");
            for (h, r) in study.h.iter().zip(&study.residuals) {
                let _ = writeln!(out, "{},{},{order}", fmt_real(*h), fmt_real(*r));
            }
            out
        }
    };
    emit(Sink::Stdout(stdout), &out)
}

pub fn convergence(args: &ConvergenceArgs, stdout: &mut String) -> CliResult<()> {
    if let Some(out) = &args.out {
        check_output(out)?;
    }
    if args.lower.len() != args.upper.len() {
        return Err(CliError::Usage("--lower and --upper differ in length".into()));
    }
    let problem = StudyProblem {
        problem: args.problem,
        lower: args.lower.clone(),
        upper: args.upper.clone(),
        reference: parse_expr("--reference", &args.reference)?,
        rhs: parse_expr("--rhs", &args.rhs)?,
        reference_lap: args
            .reference_lap
            .as_deref()
            .map(|s| parse_expr("--reference-lap", s))
            .transpose()?,
    };
    let rows = convergence_study(&problem, &args.h_list, args.tol, args.max_iter)?;
    let csv = study_csv(&rows);
    match &args.out {
        Some(path) => emit(Sink::File(path), &csv),
        None => emit(Sink::Stdout(stdout), &csv),
    }
}
