//! Partial difference operators on uniform grids.
//!
//! The crate builds stencils from forward partial differences, classifies
//! linear difference operators as elliptic, parabolic or hyperbolic through
//! their second-moment coefficient matrix, and solves and verifies the
//! discrete Laplace, Poisson and biharmonic equations.
//!
//! Modules, bottom-up:
//!
//! - [`grid`]: uniform grids and sampled functions, grid file format
//! - [`expr`]: coefficient expressions `γ(x1, …, xn)`
//! - [`stencil`]: difference operators, constructors, application, stencil files
//! - [`classify`]: coefficient matrix, symmetric eigenvalues, type labels
//! - [`mollify`]: bump-function mollifiers, discrete convolution, validators
//! - [`elliptic`]: fundamental solutions, potentials, SOR solvers, harmonicity checks

pub mod classify;
pub mod elliptic;
pub mod error;
pub mod expr;
pub mod grid;
pub mod mollify;
pub mod stencil;

pub use classify::{
    classify_at, classify_region, coefficient_matrix, eigen_symmetric, ClassificationReport,
    CoefficientMatrix, OperatorType,
};
pub use elliptic::{
    harnack_limit, newtonian_potential, solve_biharmonic, solve_laplace_dirichlet,
    solve_poisson_dirichlet, BiharmonicReport, FundamentalSolution, HarnackOutcome,
    HarnackVerdict, SolveReport,
};
pub use error::{Error, Result};
pub use expr::{parse, CoeffExpr};
pub use grid::{GridFunction, GridSpec, NormKind};
pub use mollify::MollifierKernel;
pub use stencil::{DifferenceOperator, Stencil, StencilTerm};

/// Shortest decimal text that reads back to the same `f64`. Integral values
/// print without a fraction (`2`, not `2.0`).
pub fn fmt_real(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if v.fract() == 0.0 && v.abs() < 1e15 {
        return format!("{}", v as i64);
    }
    format!("{v:?}")
}
