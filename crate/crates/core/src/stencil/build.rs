//! Stencil constructors built from forward partial differences.

use super::{Stencil, StencilTerm};
use crate::error::{Error, Result};

fn binomial(k: u32, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (k - i) as f64 / (i + 1) as f64)
}

/// `(Δ_h)^k` along axis `axis` (1-based): shifts `j·e_axis`, coefficients
/// `(-1)^(k-j) C(k, j)`.
pub fn axis_difference(dim: usize, axis: usize, order: u32, h: f64) -> Result<Stencil> {
    if axis == 0 || axis > dim {
        return Err(Error::InvalidArgument(format!(
            "axis {axis} out of range for dimension {dim}"
        )));
    }
    if order == 0 {
        return Err(Error::InvalidArgument("difference order must be at least 1".into()));
    }
    let mut orders = vec![0; dim];
    orders[axis - 1] = order;
    mixed_difference(&orders, h)
}

/// `Δ^N` over `(x1^k1, …, xn^kn)`: the tensor product of per-axis forward
/// differences.
pub fn mixed_difference(orders: &[u32], h: f64) -> Result<Stencil> {
    let dim = orders.len();
    if orders.iter().sum::<u32>() == 0 {
        return Err(Error::InvalidArgument("total difference order must be at least 1".into()));
    }
    let count: usize = orders.iter().map(|&k| k as usize + 1).product();
    let mut terms = Vec::with_capacity(count);
    let mut j = vec![0u32; dim];
    for _ in 0..count {
        let coeff = orders.iter().zip(&j).fold(1.0, |acc, (&k, &jk)| {
            let sign = if (k - jk) % 2 == 0 { 1.0 } else { -1.0 };
            acc * sign * binomial(k, jk)
        });
        terms.push(StencilTerm::new(j.iter().map(|&v| v as i64).collect(), coeff));
        for axis in (0..dim).rev() {
            j[axis] += 1;
            if j[axis] <= orders[axis] {
                break;
            }
            j[axis] = 0;
        }
    }
    Stencil::new(dim, h, terms, 0)
}

fn sum_of(dim: usize, h: f64, parts: Vec<Stencil>, scale_exp: u32) -> Result<Stencil> {
    let terms = parts.into_iter().flat_map(|s| s.terms).collect();
    Stencil::new(dim, h, terms, scale_exp)
}

/// `Σ_i Δ²_(x_i)` with forward shifts; `scaled` adds the `1/h²` prefactor.
pub fn laplace_stencil(dim: usize, h: f64, scaled: bool) -> Result<Stencil> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let parts = (1..=dim)
        .map(|i| axis_difference(dim, i, 2, h))
        .collect::<Result<Vec<_>>>()?;
    sum_of(dim, h, parts, if scaled { 2 } else { 0 })
}

/// `Σ_i Δ⁴_(x_i) + Σ_(i≠j) Δ⁴_(x_i² x_j²)` with forward shifts; `scaled`
/// adds the `1/h⁴` prefactor.
pub fn biharmonic_stencil(dim: usize, h: f64, scaled: bool) -> Result<Stencil> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let mut parts = Vec::new();
    for i in 1..=dim {
        parts.push(axis_difference(dim, i, 4, h)?);
    }
    for i in 0..dim {
        for j in 0..dim {
            if i != j {
                let mut orders = vec![0; dim];
                orders[i] = 2;
                orders[j] = 2;
                parts.push(mixed_difference(&orders, h)?);
            }
        }
    }
    sum_of(dim, h, parts, if scaled { 4 } else { 0 })
}

/// The symmetric `2n+1`-point Laplacian `Σ_i [u(x+e_i h) - 2u(x) + u(x-e_i h)]`
/// used by the boundary-value solvers.
pub fn centered_laplace_stencil(dim: usize, h: f64, scaled: bool) -> Result<Stencil> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let mut terms = vec![StencilTerm::new(vec![0; dim], -2.0 * dim as f64)];
    for i in 0..dim {
        for s in [1, -1] {
            let mut shift = vec![0; dim];
            shift[i] = s;
            terms.push(StencilTerm::new(shift, 1.0));
        }
    }
    Stencil::new(dim, h, terms, if scaled { 2 } else { 0 })
}
