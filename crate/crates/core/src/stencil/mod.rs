//! Linear difference operators `u ↦ h^(-p) Σ γ_i(x) u(x + ρ_i h)`.
//!
//! A [`Stencil`] has integer shifts and can be applied to grid functions.
//! A [`DifferenceOperator`] allows real shifts; it is what classification
//! works on and what stencil files parse into.

mod build;
mod file;

pub use build::{
    axis_difference, biharmonic_stencil, centered_laplace_stencil, laplace_stencil,
    mixed_difference,
};
pub use file::{parse_stencil_file, StencilFile};

use crate::error::{Error, Result};
use crate::expr::{BinOp, CoeffExpr};
use crate::grid::{GridFunction, GridSpec, NormKind};

#[derive(Debug, Clone, PartialEq)]
pub struct StencilTerm {
    pub shift: Vec<i64>,
    pub coeff: CoeffExpr,
}

impl StencilTerm {
    pub fn new(shift: Vec<i64>, coeff: f64) -> Self {
        Self {
            shift,
            coeff: CoeffExpr::Num(coeff),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    dim: usize,
    h: f64,
    terms: Vec<StencilTerm>,
    scale_exp: u32,
}

impl Stencil {
    /// Builds a stencil, merging terms that share a shift and ordering terms
    /// by shift. Constant
    /// coefficients are added; anything else becomes a symbolic sum.
    pub fn new(dim: usize, h: f64, terms: Vec<StencilTerm>, scale_exp: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("stencil dimension must be at least 1".into()));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("spacing must be positive, got {h}")));
        }
        if terms.is_empty() {
            return Err(Error::InvalidArgument("stencil has no terms".into()));
        }
        let mut merged: Vec<StencilTerm> = Vec::with_capacity(terms.len());
        for term in terms {
            if term.shift.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: term.shift.len(),
                });
            }
            if let Some(k) = term.coeff.max_variable() {
                if k > dim {
                    return Err(Error::InvalidArgument(format!(
                        "coefficient uses x{k} in a {dim}-dimensional stencil"
                    )));
                }
            }
            match merged.iter_mut().find(|t| t.shift == term.shift) {
                Some(existing) => {
                    existing.coeff = match (existing.coeff.constant(), term.coeff.constant()) {
                        (Some(a), Some(b)) => CoeffExpr::Num(a + b),
                        _ => CoeffExpr::binary(BinOp::Add, existing.coeff.clone(), term.coeff),
                    }
                }
                None => merged.push(term),
            }
        }
        merged.sort_by(|a, b| a.shift.cmp(&b.shift));
        Ok(Self {
            dim,
            h,
            terms: merged,
            scale_exp,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn terms(&self) -> &[StencilTerm] {
        &self.terms
    }

    pub fn scale_exp(&self) -> u32 {
        self.scale_exp
    }

    /// Overall factor `h^(-p)`.
    pub fn scale_factor(&self) -> f64 {
        self.h.powi(-(self.scale_exp as i32))
    }

    pub fn with_scale_exp(mut self, p: u32) -> Self {
        self.scale_exp = p;
        self
    }

    /// Constant coefficient at `shift`, or `None` if absent or non-constant.
    pub fn coefficient_at(&self, shift: &[i64]) -> Option<f64> {
        self.terms
            .iter()
            .find(|t| t.shift == shift)
            .and_then(|t| t.coeff.constant())
    }

    /// Per-axis `(low, high)` node margins outside which some shift would
    /// leave the grid.
    pub fn margins(&self) -> Vec<(usize, usize)> {
        (0..self.dim)
            .map(|k| {
                let lo = self.terms.iter().map(|t| t.shift[k]).min().unwrap_or(0);
                let hi = self.terms.iter().map(|t| t.shift[k]).max().unwrap_or(0);
                ((-lo).max(0) as usize, hi.max(0) as usize)
            })
            .collect()
    }

    /// The operator with real shifts, for classification.
    pub fn operator(&self) -> DifferenceOperator {
        DifferenceOperator {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| (t.shift.iter().map(|&s| s as f64).collect(), t.coeff.clone()))
                .collect(),
        }
    }

    /// Output grid of [`Stencil::apply`] on a function over `spec`.
    pub fn valid_region(&self, spec: &GridSpec) -> Result<GridSpec> {
        self.check_grid(spec)?;
        spec.shrunk(&self.margins())
    }

    fn check_grid(&self, spec: &GridSpec) -> Result<()> {
        if spec.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: spec.dim(),
            });
        }
        if (spec.h() - self.h).abs() > 1e-12 * self.h {
            return Err(Error::Incompatible(format!(
                "stencil spacing {} differs from grid spacing {}",
                self.h,
                spec.h()
            )));
        }
        Ok(())
    }

    /// Applies the operator at every node where all shifts stay in the grid.
    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        let out_spec = self.valid_region(u.spec())?;
        let margins = self.margins();
        let strides = u.spec().strides();
        let offsets: Vec<isize> = self
            .terms
            .iter()
            .map(|t| {
                t.shift
                    .iter()
                    .zip(&strides)
                    .map(|(&s, &st)| s as isize * st as isize)
                    .sum()
            })
            .collect();
        let constants: Option<Vec<f64>> = self.terms.iter().map(|t| t.coeff.constant()).collect();
        let scale = self.scale_factor();
        let input = u.values();

        let mut values = Vec::with_capacity(out_spec.len());
        let mut it = out_spec.nodes();
        while let Some((flat, multi, x)) = it.next_node() {
            let base: usize = multi
                .iter()
                .zip(&margins)
                .zip(&strides)
                .map(|((&i, &(lo, _)), &st)| (i + lo) * st)
                .sum();
            let mut acc = 0.0;
            match &constants {
                Some(c) => {
                    for (gamma, &off) in c.iter().zip(&offsets) {
                        acc += gamma * input[(base as isize + off) as usize];
                    }
                }
                None => {
                    for (term, &off) in self.terms.iter().zip(&offsets) {
                        let gamma = term.coeff.eval(x).map_err(|e| Error::NodeEval {
                            node: flat,
                            cause: Box::new(e),
                        })?;
                        acc += gamma * input[(base as isize + off) as usize];
                    }
                }
            }
            values.push(scale * acc);
        }
        GridFunction::new(out_spec, values)
    }

    /// `(l1, linf)` norms of `apply(u) - rhs` where both are defined.
    pub fn residual(&self, u: &GridFunction, rhs: &GridFunction) -> Result<(f64, f64)> {
        let lhs = self.apply(u)?;
        let diff = lhs.axpby(1.0, rhs, -1.0)?;
        Ok((diff.norm(NormKind::L1), diff.norm(NormKind::LInf)))
    }
}

/// The general operator `Σ γ_i(x) u(x + ρ_i h)` with real shifts `ρ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceOperator {
    dim: usize,
    terms: Vec<(Vec<f64>, CoeffExpr)>,
}

impl DifferenceOperator {
    pub fn new(dim: usize, terms: Vec<(Vec<f64>, CoeffExpr)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("operator dimension must be at least 1".into()));
        }
        if terms.is_empty() {
            return Err(Error::InvalidArgument("operator has no terms".into()));
        }
        for (shift, coeff) in &terms {
            if shift.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: shift.len(),
                });
            }
            if shift.iter().any(|s| !s.is_finite()) {
                return Err(Error::InvalidArgument("shifts must be finite".into()));
            }
            if let Some(k) = coeff.max_variable() {
                if k > dim {
                    return Err(Error::InvalidArgument(format!(
                        "coefficient uses x{k} in a {dim}-dimensional operator"
                    )));
                }
            }
        }
        Ok(Self { dim, terms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(Vec<f64>, CoeffExpr)] {
        &self.terms
    }

    /// Every coefficient multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(s, e)| {
                let coeff = match e.constant() {
                    Some(v) => CoeffExpr::Num(c * v),
                    None => CoeffExpr::binary(BinOp::Mul, CoeffExpr::Num(c), e.clone()),
                };
                (s.clone(), coeff)
            })
            .collect();
        Self {
            dim: self.dim,
            terms,
        }
    }
}

impl From<&Stencil> for DifferenceOperator {
    fn from(s: &Stencil) -> Self {
        s.operator()
    }
}
