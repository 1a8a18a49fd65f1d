//! Checks of harmonic behaviour: mean values, the maximum principle,
//! monotone limits and the truncation residual of the Laplacian.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::expr::CoeffExpr;
use crate::grid::{GridFunction, GridSpec, NormKind};
use crate::stencil::{centered_laplace_stencil, laplace_stencil};

/// Multilinear interpolation of `u` at `x`; `x` must lie in the grid box.
pub fn interpolate(u: &GridFunction, x: &[f64]) -> Result<f64> {
    let spec = u.spec();
    let n = spec.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    let h = spec.h();
    let mut base = vec![0usize; n];
    let mut frac = vec![0.0; n];
    for k in 0..n {
        let e = spec.extents()[k];
        let t = (x[k] - spec.origin()[k]) / h;
        let slack = 1e-9 * (e as f64).max(1.0);
        if !(t >= -slack && t <= (e - 1) as f64 + slack) {
            return Err(Error::OutOfGrid(format!(
                "point {x:?} leaves the grid on axis {}",
                k + 1
            )));
        }
        if e == 1 {
            continue;
        }
        let t = t.clamp(0.0, (e - 1) as f64);
        let cell = (t.floor() as usize).min(e - 2);
        base[k] = cell;
        frac[k] = t - cell as f64;
    }
    let strides = spec.strides();
    let mut acc = 0.0;
    for corner in 0..1usize << n {
        let mut w = 1.0;
        let mut idx = 0;
        for k in 0..n {
            let up = corner >> k & 1 == 1;
            if spec.extents()[k] == 1 && up {
                w = 0.0;
                break;
            }
            w *= if up { frac[k] } else { 1.0 - frac[k] };
            idx += (base[k] + up as usize) * strides[k];
        }
        if w != 0.0 {
            acc += w * u.values()[idx];
        }
    }
    Ok(acc)
}

/// Unit vectors used to sample the sphere of radius `r`, equal-area in every
/// supported dimension.
fn sphere_directions(n: usize) -> Result<Vec<Vec<f64>>> {
    match n {
        1 => Ok(vec![vec![1.0], vec![-1.0]]),
        2 => Ok((0..256)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / 256.0;
                vec![t.cos(), t.sin()]
            })
            .collect()),
        3 => {
            let (bands, turns) = (32, 64);
            let mut dirs = Vec::with_capacity(bands * turns);
            for b in 0..bands {
                let z = -1.0 + (2.0 * b as f64 + 1.0) / bands as f64;
                let rho = (1.0 - z * z).sqrt();
                for a in 0..turns {
                    let t = 2.0 * PI * (a as f64 + 0.5 * (b % 2) as f64) / turns as f64;
                    dirs.push(vec![rho * t.cos(), rho * t.sin(), z]);
                }
            }
            Ok(dirs)
        }
        _ => Err(Error::InvalidArgument(format!(
            "mean-value check supports dimensions 1 to 3, got {n}"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanValueReport {
    pub center_value: f64,
    pub sphere_mean: f64,
    pub deviation: f64,
    pub samples: usize,
}

/// Compares `u(center)` with the mean of `u` over the sphere of radius `r`.
pub fn mean_value_check(u: &GridFunction, center: &[f64], r: f64) -> Result<MeanValueReport> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    let dirs = sphere_directions(u.spec().dim())?;
    let center_value = interpolate(u, center)?;
    let mut sum = 0.0;
    let mut p = vec![0.0; center.len()];
    for d in &dirs {
        for k in 0..p.len() {
            p[k] = center[k] + r * d[k];
        }
        sum += interpolate(u, &p)?;
    }
    let sphere_mean = sum / dirs.len() as f64;
    Ok(MeanValueReport {
        center_value,
        sphere_mean,
        deviation: (center_value - sphere_mean).abs(),
        samples: dirs.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxPrincipleReport {
    pub pass: bool,
    pub boundary_max: f64,
    pub interior_max: f64,
    /// First interior node (flat index) exceeding the boundary maximum.
    pub witness: Option<usize>,
}

pub fn max_principle_check(u: &GridFunction) -> Result<MaxPrincipleReport> {
    let spec = u.spec();
    if spec.extents().iter().any(|&e| e < 3) {
        return Err(Error::InvalidGrid("grid has no interior nodes".into()));
    }
    let mut boundary_max = f64::NEG_INFINITY;
    let mut interior_max = f64::NEG_INFINITY;
    let mut it = spec.nodes();
    while let Some((flat, multi, _)) = it.next_node() {
        let v = u.values()[flat];
        if spec.is_boundary(multi) {
            boundary_max = boundary_max.max(v);
        } else {
            interior_max = interior_max.max(v);
        }
    }
    let witness = if interior_max > boundary_max {
        let mut it = spec.nodes();
        let mut found = None;
        while let Some((flat, multi, _)) = it.next_node() {
            if !spec.is_boundary(multi) && u.values()[flat] > boundary_max {
                found = Some(flat);
                break;
            }
        }
        found
    } else {
        None
    };
    Ok(MaxPrincipleReport {
        pass: witness.is_none(),
        boundary_max,
        interior_max,
        witness,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarnackOutcome {
    FiniteLimit,
    Divergent,
    /// The sequence is not nondecreasing.
    Violation,
    /// Bounded so far but not yet within tolerance of a limit.
    Undecided,
}

impl std::fmt::Display for HarnackOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::FiniteLimit => "finite_limit",
            Self::Divergent => "divergent",
            Self::Violation => "violation",
            Self::Undecided => "undecided",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarnackVerdict {
    pub outcome: HarnackOutcome,
    /// Max-norm of `u_{k+1} - u_k` over the inner box, per step.
    pub deviations: Vec<f64>,
    /// `(k, node)` with `u_k(node) < u_{k-1}(node)` for a violation.
    pub witness: Option<(usize, usize)>,
    pub limit: Option<GridFunction>,
    /// Max-norm of the scaled centred Laplacian of the limit.
    pub limit_residual: Option<f64>,
}

/// Classifies a nondecreasing sequence of grid functions on a common grid.
/// Deviations are measured on the box shrunk by `margin` nodes per side.
pub fn harnack_limit(seq: &[GridFunction], margin: usize, tol: f64) -> Result<HarnackVerdict> {
    if seq.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 sequence members, got {}",
            seq.len()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let spec = seq[0].spec();
    if seq.iter().any(|u| u.spec() != spec) {
        return Err(Error::Incompatible("sequence members use different grids".into()));
    }
    let inner = spec.shrunk(&vec![(margin, margin); spec.dim()])?;

    for k in 1..seq.len() {
        let (prev, next) = (seq[k - 1].values(), seq[k].values());
        if let Some(node) = (0..prev.len()).find(|&i| next[i] < prev[i]) {
            return Ok(HarnackVerdict {
                outcome: HarnackOutcome::Violation,
                deviations: Vec::new(),
                witness: Some((k, node)),
                limit: None,
                limit_residual: None,
            });
        }
    }

    let restricted: Vec<GridFunction> =
        seq.iter().map(|u| u.restrict(&inner)).collect::<Result<_>>()?;
    let deviations: Vec<f64> = restricted
        .windows(2)
        .map(|w| w[1].axpby(1.0, &w[0], -1.0).map(|d| d.norm(NormKind::LInf)))
        .collect::<Result<_>>()?;

    let last = seq.last().expect("length checked");
    let inner_min = restricted
        .last()
        .expect("length checked")
        .values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let (outcome, limit) = if inner_min > 1.0 / tol {
        (HarnackOutcome::Divergent, None)
    } else if *deviations.last().expect("length checked") < tol {
        (HarnackOutcome::FiniteLimit, Some(last.clone()))
    } else {
        (HarnackOutcome::Undecided, None)
    };
    let limit_residual = match &limit {
        Some(u) if spec.extents().iter().all(|&e| e >= 3) => {
            let lap = centered_laplace_stencil(spec.dim(), spec.h(), true)?;
            Some(lap.apply(u)?.norm(NormKind::LInf))
        }
        _ => None,
    };
    Ok(HarnackVerdict {
        outcome,
        deviations,
        witness: None,
        limit,
        limit_residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicityStudy {
    pub h: Vec<f64>,
    /// Sup of the unscaled forward Laplacian over the nodes where it is defined.
    pub residuals: Vec<f64>,
    /// Least-squares slope of `log residual` against `log h`; `None` when the
    /// residual vanishes to rounding at every spacing.
    pub fitted_order: Option<f64>,
}

/// Truncation residual of the unscaled forward Laplacian applied to samples
/// of `u` on the box `[lower, upper]` at each spacing.
pub fn harmonicity_residual(
    u: &CoeffExpr,
    lower: &[f64],
    upper: &[f64],
    h_list: &[f64],
) -> Result<HarmonicityStudy> {
    if h_list.len() < 2 {
        return Err(Error::InvalidArgument("need at least two spacings".into()));
    }
    let mut residuals = Vec::with_capacity(h_list.len());
    let mut exact = true;
    for &h in h_list {
        let spec = GridSpec::covering(lower, upper, h)?;
        let samples = GridFunction::sample(u, &spec)?;
        let lap = laplace_stencil(spec.dim(), h, false)?;
        let r = lap.apply(&samples)?.norm(NormKind::LInf);
        let scale = samples.norm(NormKind::LInf).max(1.0);
        if r > 1e-12 * scale {
            exact = false;
        }
        residuals.push(r);
    }
    let fitted_order = if exact {
        None
    } else {
        let pts: Vec<(f64, f64)> = h_list
            .iter()
            .zip(&residuals)
            .filter(|(_, &r)| r > 0.0)
            .map(|(&h, &r)| (h.ln(), r.ln()))
            .collect();
        least_squares_slope(&pts)
    };
    Ok(HarmonicityStudy {
        h: h_list.to_vec(),
        residuals,
        fitted_order,
    })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
