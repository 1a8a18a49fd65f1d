//! Elliptic problems: fundamental solutions, Dirichlet solvers and checks of
//! harmonic behaviour.

mod fundamental;
mod solve;
mod validate;

pub use fundamental::{gamma, newtonian_potential, sphere_area, FundamentalSolution};
pub use solve::{
    solve_biharmonic, solve_laplace_dirichlet, solve_poisson_dirichlet, BiharmonicReport,
    SolveReport,
};
pub use validate::{
    harmonicity_residual, harnack_limit, interpolate, max_principle_check, mean_value_check,
    HarmonicityStudy, HarnackOutcome, HarnackVerdict, MaxPrincipleReport, MeanValueReport,
};
