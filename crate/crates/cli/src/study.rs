use std::fmt::Write as _;

use pardiff_core::grid::NormKind;
use pardiff_core::{
    fmt_real, solve_biharmonic, solve_laplace_dirichlet, solve_poisson_dirichlet, CoeffExpr,
    Error, GridFunction, GridSpec, Result,
};

use crate::args::Problem;

/// A Dirichlet problem with a known solution on the box `[lower, upper]`.
#[derive(Debug, Clone)]
pub struct StudyProblem {
    pub problem: Problem,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub reference: CoeffExpr,
    pub rhs: CoeffExpr,
    /// `Δu` of the reference, needed for the biharmonic boundary data.
    pub reference_lap: Option<CoeffExpr>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObservedOrder {
    /// Both errors sit at the solver tolerance, so there is nothing to fit.
    Exact,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub h: f64,
    pub error: f64,
    pub iterations: usize,
    /// Order against the previous row; `None` on the first.
    pub order: Option<ObservedOrder>,
}

/// Errors below this multiple of the solver tolerance count as exact.
const EXACT_FACTOR: f64 = 10.0;

pub fn convergence_study(
    p: &StudyProblem,
    h_list: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<StudyRow>> {
    if h_list.len() < 2 {
        return Err(Error::InvalidArgument(
            "a convergence study needs at least two spacings".into(),
        ));
    }
    if h_list.iter().any(|&h| !(h > 0.0)) || h_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "spacings must be positive and strictly decreasing".into(),
        ));
    }
    if p.problem == Problem::Biharmonic && p.reference_lap.is_none() {
        return Err(Error::InvalidArgument(
            "biharmonic study needs the Laplacian of the reference".into(),
        ));
    }
    let mut rows: Vec<StudyRow> = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let spec = GridSpec::covering(&p.lower, &p.upper, h)?;
        let exact = GridFunction::sample(&p.reference, &spec)?;
        let f = GridFunction::sample(&p.rhs, &spec)?;
        let (solution, iterations) = match p.problem {
            Problem::Laplace => {
                let r = solve_laplace_dirichlet(&spec, &exact, tol, max_iter)?;
                (r.solution, r.iterations)
            }
            Problem::Poisson => {
                let r = solve_poisson_dirichlet(&spec, &f, &exact, tol, max_iter)?;
                (r.solution, r.iterations)
            }
            Problem::Biharmonic => {
                let lap_expr = p.reference_lap.as_ref().expect("checked above");
                let lap = GridFunction::sample(lap_expr, &spec)?;
                let r = solve_biharmonic(&spec, &f, &exact, &lap, tol, max_iter)?;
                let iterations = r.iterations();
                (r.solution.solution, iterations)
            }
        };
        let error = solution.axpby(1.0, &exact, -1.0)?.norm(NormKind::LInf);
        let order = rows.last().map(|prev| {
            let floor = EXACT_FACTOR * tol;
            if error <= floor {
                ObservedOrder::Exact
            } else {
                ObservedOrder::Value((prev.error / error).ln() / (prev.h / h).ln())
            }
        });
        rows.push(StudyRow {
            h,
            error,
            iterations,
            order,
        });
    }
    Ok(rows)
}

pub fn study_csv(rows: &[StudyRow]) -> String {
    let mut out = String::from("h,error,order\n");
    for r in rows {
        let order = match r.order {
            None => String::new(),
            Some(ObservedOrder::Exact) => "exact".into(),
            Some(ObservedOrder::Value(p)) => fmt_real(p),
        };
        let _ = writeln!(out, "{},{},{order}", fmt_real(r.h), fmt_real(r.error));
    }
    out
}
