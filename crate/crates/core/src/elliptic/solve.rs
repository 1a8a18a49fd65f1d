//! Dirichlet solvers for the centred discrete Laplacian, by red-black
//! successive over-relaxation, and the split biharmonic solver built on them.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec, NormKind};
use crate::stencil::centered_laplace_stencil;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: GridFunction,
    pub iterations: usize,
    /// Max-norm of the scaled centred residual `Δ_h u - f` on the interior.
    pub final_residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiharmonicReport {
    /// Stage two: `Δ_h u = v`, `u = g_u` on the boundary.
    pub solution: SolveReport,
    /// Stage one: `Δ_h v = f`, `v = g_lap` on the boundary.
    pub laplacian: SolveReport,
    /// Max-norm of `Δ_h Δ_h u - f` where the composed operator is defined.
    pub composed_residual: f64,
}

impl BiharmonicReport {
    pub fn converged(&self) -> bool {
        self.solution.converged && self.laplacian.converged
    }

    pub fn iterations(&self) -> usize {
        self.solution.iterations + self.laplacian.iterations
    }
}

fn check_grid(spec: &GridSpec) -> Result<()> {
    if spec.extents().iter().any(|&e| e < 3) {
        return Err(Error::InvalidGrid(
            "a Dirichlet problem needs at least 3 nodes per axis".into(),
        ));
    }
    Ok(())
}

fn check_same_grid(spec: &GridSpec, g: &GridFunction, what: &str) -> Result<()> {
    let other = g.spec();
    let aligned = other.dim() == spec.dim()
        && other.extents() == spec.extents()
        && spec.offset_of(other).map(|o| o.iter().all(|&k| k == 0)).unwrap_or(false);
    if !aligned {
        return Err(Error::Incompatible(format!(
            "{what} is not sampled on the solver grid"
        )));
    }
    Ok(())
}

fn check_tolerances(tol: f64, max_iter: usize) -> Result<()> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    Ok(())
}

struct Sor<'a> {
    spec: &'a GridSpec,
    strides: Vec<usize>,
    /// Interior nodes split by parity of the index sum.
    colors: [Vec<usize>; 2],
    omega: f64,
}

impl<'a> Sor<'a> {
    fn new(spec: &'a GridSpec) -> Self {
        let mut colors = [Vec::new(), Vec::new()];
        let mut it = spec.nodes();
        while let Some((flat, multi, _)) = it.next_node() {
            if !spec.is_boundary(multi) {
                colors[multi.iter().sum::<usize>() % 2].push(flat);
            }
        }
        let longest = *spec.extents().iter().max().unwrap_or(&3) - 1;
        let omega = 2.0 / (1.0 + (PI / longest as f64).sin());
        Self {
            spec,
            strides: spec.strides(),
            colors,
            omega,
        }
    }

    /// `h² Δ_h u` at `idx`, summed as neighbour differences to keep the
    /// rounding floor proportional to the local variation of `u`.
    fn second_difference(&self, u: &[f64], idx: usize) -> f64 {
        let c = u[idx];
        self.strides
            .iter()
            .map(|&s| (u[idx + s] - c) + (u[idx - s] - c))
            .sum()
    }

    fn residual(&self, u: &[f64], f: &[f64]) -> f64 {
        let h2 = self.spec.h() * self.spec.h();
        self.colors
            .iter()
            .flatten()
            .map(|&i| (self.second_difference(u, i) / h2 - f[i]).abs())
            .fold(0.0, f64::max)
    }

    fn run(&self, f: &[f64], boundary: &GridFunction, tol: f64, max_iter: usize) -> Result<SolveReport> {
        let h2 = self.spec.h() * self.spec.h();
        let centre = 2.0 * self.spec.dim() as f64;
        let mut u = boundary.values().to_vec();
        for &i in self.colors.iter().flatten() {
            u[i] = 0.0;
        }
        let mut residual = self.residual(&u, f);
        let mut iterations = 0;
        while residual > tol && iterations < max_iter {
            for color in &self.colors {
                for &i in color {
                    let step = (self.second_difference(&u, i) - h2 * f[i]) / centre;
                    u[i] += self.omega * step;
                }
            }
            iterations += 1;
            residual = self.residual(&u, f);
            if !residual.is_finite() {
                return Err(Error::NoConvergence { iterations, residual });
            }
        }
        Ok(SolveReport {
            solution: GridFunction::new(self.spec.clone(), u)?,
            iterations,
            final_residual: residual,
            converged: residual <= tol,
        })
    }
}

/// Solves `Δ_h u = f` in the interior with `u = g` on the boundary nodes.
/// Only boundary values of `boundary` are read. Returns
/// [`Error::NoConvergence`] when `max_iter` sweeps do not reach `tol`.
pub fn solve_poisson_dirichlet(
    spec: &GridSpec,
    f: &GridFunction,
    boundary: &GridFunction,
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport> {
    let report = solve_poisson_unchecked(spec, f, boundary, tol, max_iter)?;
    if !report.converged {
        return Err(Error::NoConvergence {
            iterations: report.iterations,
            residual: report.final_residual,
        });
    }
    Ok(report)
}

pub fn solve_laplace_dirichlet(
    spec: &GridSpec,
    boundary: &GridFunction,
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport> {
    solve_poisson_dirichlet(spec, &GridFunction::zeros(spec.clone()), boundary, tol, max_iter)
}

fn solve_poisson_unchecked(
    spec: &GridSpec,
    f: &GridFunction,
    boundary: &GridFunction,
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport> {
    check_grid(spec)?;
    check_tolerances(tol, max_iter)?;
    check_same_grid(spec, f, "right-hand side")?;
    check_same_grid(spec, boundary, "boundary data")?;
    Sor::new(spec).run(f.values(), boundary, tol, max_iter)
}

/// Solves `Δ_h Δ_h u = f` by splitting: `Δ_h v = f` with `v = g_lap`, then
/// `Δ_h u = v` with `u = g_u`, both on the boundary nodes.
pub fn solve_biharmonic(
    spec: &GridSpec,
    f: &GridFunction,
    g_u: &GridFunction,
    g_lap: &GridFunction,
    tol: f64,
    max_iter: usize,
) -> Result<BiharmonicReport> {
    let laplacian = solve_poisson_dirichlet(spec, f, g_lap, tol, max_iter)?;
    let solution = solve_poisson_dirichlet(spec, &laplacian.solution, g_u, tol, max_iter)?;
    let lap = centered_laplace_stencil(spec.dim(), spec.h(), true)?;
    let composed = if spec.extents().iter().all(|&e| e >= 5) {
        let bi = lap.apply(&lap.apply(&solution.solution)?)?;
        bi.axpby(1.0, f, -1.0)?.norm(NormKind::LInf)
    } else {
        0.0
    };
    Ok(BiharmonicReport {
        solution,
        laplacian,
        composed_residual: composed,
    })
}
