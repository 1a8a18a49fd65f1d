use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Accepts a decimal number or a fraction such as `1/16`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
            let den: f64 = den.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
            if den == 0.0 {
                return Err(format!("`{s}` divides by zero"));
            }
            num / den
        }
        None => s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "pardiff", version, about = "Partial difference operators on uniform grids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a stencil as elliptic, parabolic or hyperbolic.
    #[command(after_help = "CSV: x1..xn,lambda1..lambdan,label (one row per point)")]
    Classify(ClassifyArgs),
    /// Apply a stencil to a grid function.
    Apply(ApplyArgs),
    /// Solve a Dirichlet problem on the box of a grid file.
    #[command(after_help = "CSV: problem,iterations,residual,converged[,wall_seconds]\n\
        biharmonic adds composed_residual after residual")]
    Solve(SolveArgs),
    /// Mollify a grid function, or study L1 convergence over several eps.
    #[command(after_help = "CSV with --eps-list: eps,l1_error")]
    Mollify(MollifyArgs),
    /// Newtonian potential of a compactly supported source.
    Potential(PotentialArgs),
    /// Checks on computed grid functions.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Error and observed order of a solver against an exact solution.
    #[command(after_help = "CSV: h,error,order (order is empty on the first row)")]
    Convergence(ConvergenceArgs),
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub stencil: PathBuf,
    /// Point at which to classify; defaults to the origin.
    #[arg(long, num_args = 1.., allow_negative_numbers = true, value_parser = parse_real, conflicts_with = "probe")]
    pub at: Option<Vec<f64>>,
    /// Grid file whose nodes are the probe points.
    #[arg(long)]
    pub probe: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-12, value_parser = parse_real)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct ApplyArgs {
    #[arg(long)]
    pub stencil: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Problem {
    Laplace,
    Poisson,
    Biharmonic,
}

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::Laplace => "laplace",
            Problem::Poisson => "poisson",
            Problem::Biharmonic => "biharmonic",
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub problem: Problem,
    /// Grid file defining the domain; its values are ignored.
    #[arg(long)]
    pub grid: PathBuf,
    /// Boundary values of u, as an expression in x1..xn.
    #[arg(long)]
    pub boundary: String,
    /// Right-hand side f.
    #[arg(long, default_value = "0")]
    pub rhs: String,
    /// Boundary values of Δu (biharmonic only).
    #[arg(long)]
    pub boundary_lap: Option<String>,
    #[arg(long, default_value_t = 1e-10, value_parser = parse_real)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    /// Solution grid file; defaults to the grid path with `.sol.grd`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report CSV file; defaults to standard output.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Add wall-clock seconds to the report.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct MollifyArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_real, required_unless_present = "eps_list", conflicts_with = "eps_list")]
    pub eps: Option<f64>,
    /// Strictly decreasing eps values for an L1 convergence study.
    #[arg(long, value_delimiter = ',', value_parser = parse_real)]
    pub eps_list: Option<Vec<f64>>,
    /// Quadrature panels per grid cell for the normalization constant.
    #[arg(long, default_value_t = 8)]
    pub refine: usize,
    /// Output grid (single eps) or CSV (study); study CSV defaults to stdout.
    #[arg(long, required_unless_present = "eps_list")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PotentialArgs {
    #[arg(long)]
    pub source: PathBuf,
    /// Grid file whose nodes are the evaluation points; defaults to the source grid.
    #[arg(long)]
    pub targets: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Residual of a stencil equation: CSV l1,linf.
    Residual {
        #[arg(long)]
        stencil: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        rhs: PathBuf,
    },
    /// Discrete maximum principle: CSV pass,boundary_max,interior_max,witness.
    MaxPrinciple {
        #[arg(long)]
        input: PathBuf,
    },
    /// Mean-value property on a sphere: CSV center_value,sphere_mean,deviation.
    MeanValue {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, num_args = 1.., allow_negative_numbers = true, value_parser = parse_real)]
        center: Vec<f64>,
        #[arg(long, value_parser = parse_real)]
        radius: f64,
    },
    /// Limit of a nondecreasing sequence:
    /// CSV outcome,last_deviation,witness_step,witness_node,limit_residual.
    Harnack {
        /// Sequence members, in order.
        #[arg(long, num_args = 1.., required = true)]
        input: Vec<PathBuf>,
        #[arg(long, default_value_t = 1)]
        margin: usize,
        #[arg(long, default_value_t = 1e-8, value_parser = parse_real)]
        tol: f64,
        /// Where to write the limit grid when it exists.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Truncation residual of the forward Laplacian: CSV h,residual,fitted_order.
    Harmonicity {
        #[arg(long)]
        expr: String,
        #[arg(long, num_args = 1.., allow_negative_numbers = true, value_parser = parse_real)]
        lower: Vec<f64>,
        #[arg(long, num_args = 1.., allow_negative_numbers = true, value_parser = parse_real)]
        upper: Vec<f64>,
        #[arg(long, value_delimiter = ',', value_parser = parse_real, required = true)]
        h_list: Vec<f64>,
    },
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    pub problem: Problem,
    /// Exact solution u; also supplies the boundary data.
    #[arg(long)]
    pub reference: String,
    #[arg(long, default_value = "0")]
    pub rhs: String,
    /// Exact Δu, for the biharmonic boundary data.
    #[arg(long)]
    pub reference_lap: Option<String>,
    #[arg(long, num_args = 1.., allow_negative_numbers = true, value_parser = parse_real)]
    pub lower: Vec<f64>,
    #[arg(long, num_args = 1.., allow_negative_numbers = true, value_parser = parse_real)]
    pub upper: Vec<f64>,
    /// Strictly decreasing spacings, e.g. `1/16,1/32,1/64`.
    #[arg(long, value_delimiter = ',', value_parser = parse_real, required = true)]
    pub h_list: Vec<f64>,
    #[arg(long, default_value_t = 1e-10, value_parser = parse_real)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    /// CSV file; defaults to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
