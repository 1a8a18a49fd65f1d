//! Bump-function mollifiers and discrete convolution.
//!
//! `ω(x) = φ(‖x‖²) / Z` with `φ(s) = exp(-1/(1-s))` for `s < 1` and zero
//! otherwise, `Z = ∫ φ(‖x‖²) dx`, and `ω_ε(x) = ε^(-n) ω(x/ε)`. Kernels are
//! sampled on the lattice of the grid they will be convolved with.

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec, NormKind};

/// Budget of integrand evaluations for the normalization quadrature.
const Z_EVAL_BUDGET: f64 = 4_194_304.0;

/// `exp(-1/(1-s))` for `s < 1`, else `0`.
pub fn bump(s: f64) -> f64 {
    if s < 1.0 {
        (-1.0 / (1.0 - s)).exp()
    } else {
        0.0
    }
}

/// `∫_[-1,1]^n φ(‖x‖²) dx` by tensor-product midpoint rule with `panels`
/// panels per axis (rounded up to even). Integrates one orthant and uses
/// the symmetry of the midpoint lattice.
pub fn normalization_constant(dim: usize, panels: usize) -> f64 {
    let half = panels.div_ceil(2).max(1);
    let step = 1.0 / half as f64;
    let mids: Vec<f64> = (0..half).map(|i| (i as f64 + 0.5) * step).collect();
    let squares: Vec<f64> = mids.iter().map(|m| m * m).collect();
    let mut idx = vec![0usize; dim];
    let mut sum = 0.0;
    'outer: loop {
        let s: f64 = idx.iter().map(|&i| squares[i]).sum();
        sum += bump(s);
        for k in (0..dim).rev() {
            idx[k] += 1;
            if idx[k] < half {
                continue 'outer;
            }
            idx[k] = 0;
        }
        break;
    }
    sum * (2.0 * step).powi(dim as i32)
}

/// A sampled, unit-mass `ω_ε` centred at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct MollifierKernel {
    eps: f64,
    radius: usize,
    samples: GridFunction,
    mass: f64,
    raw_mass: f64,
    z: f64,
}

/// Contract checks on a constructed kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelDiagnostics {
    pub mass_deviation: f64,
    /// Largest sample at a node farther than `ε` from the centre.
    pub outside_support: f64,
    /// Largest `|k(x) - k(-x)|`.
    pub symmetry_deviation: f64,
    pub min_sample: f64,
}

impl MollifierKernel {
    /// Builds `ω_ε` on a lattice of spacing `h`. The normalization integral
    /// uses `refine` quadrature panels per lattice cell, capped by an
    /// evaluation budget in higher dimensions.
    pub fn new(dim: usize, eps: f64, h: f64, refine: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if !(h > 0.0) || !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidArgument("eps and h must be positive".into()));
        }
        if refine == 0 {
            return Err(Error::InvalidArgument("refine must be at least 1".into()));
        }
        if eps < h * (1.0 - 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "eps = {eps} is below one grid step h = {h}"
            )));
        }
        let cells_per_radius = (eps / h).ceil() as usize;
        let cap = Z_EVAL_BUDGET.powf(1.0 / dim as f64).floor() as usize;
        let half_panels = (refine * cells_per_radius).min(cap.max(8));
        let z = normalization_constant(dim, 2 * half_panels);

        let radius = ((eps / h) * (1.0 + 1e-12)).floor() as usize;
        let spec = GridSpec::new(
            vec![-(radius as f64) * h; dim],
            h,
            vec![2 * radius + 1; dim],
        )?;
        let scale = eps.powi(-(dim as i32)) / z;
        let mut values = Vec::with_capacity(spec.len());
        let mut it = spec.nodes();
        while let Some((_, multi, _)) = it.next_node() {
            // Build ‖x/ε‖² from signed lattice offsets so that x and -x give
            // bitwise-identical samples.
            let r2: f64 = multi
                .iter()
                .map(|&i| {
                    let t = (i as f64 - radius as f64).abs() * h / eps;
                    t * t
                })
                .sum();
            values.push(scale * bump(r2));
        }
        let cell = spec.cell_volume();
        let raw_mass = cell * values.iter().sum::<f64>();
        if (raw_mass - 1.0).abs() > 0.1 {
            return Err(Error::CoarseKernel { mass: raw_mass });
        }
        for v in &mut values {
            *v /= raw_mass;
        }
        let mass = cell * values.iter().sum::<f64>();
        Ok(Self {
            eps,
            radius,
            samples: GridFunction::new(spec, values)?,
            mass,
            raw_mass,
            z,
        })
    }

    pub fn dim(&self) -> usize {
        self.samples.spec().dim()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn spacing(&self) -> f64 {
        self.samples.spec().h()
    }

    /// Kernel half-width in lattice nodes.
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn samples(&self) -> &GridFunction {
        &self.samples
    }

    /// Discrete mass after normalization.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Discrete mass before renormalization.
    pub fn raw_mass(&self) -> f64 {
        self.raw_mass
    }

    /// `∫ φ(‖x‖²) dx` over the unit ball.
    pub fn normalization(&self) -> f64 {
        self.z
    }

    pub fn diagnostics(&self) -> KernelDiagnostics {
        let spec = self.samples.spec();
        let values = self.samples.values();
        let n = values.len();
        let h = spec.h();
        let mut outside: f64 = 0.0;
        let mut asym: f64 = 0.0;
        let mut it = spec.nodes();
        while let Some((flat, multi, _)) = it.next_node() {
            // Row-major order makes -x the mirror index.
            asym = asym.max((values[flat] - values[n - 1 - flat]).abs());
            let r2: f64 = multi
                .iter()
                .map(|&i| {
                    let t = (i as f64 - self.radius as f64) * h;
                    t * t
                })
                .sum();
            if r2.sqrt() > self.eps {
                outside = outside.max(values[flat].abs());
            }
        }
        KernelDiagnostics {
            mass_deviation: (self.mass - 1.0).abs(),
            outside_support: outside,
            symmetry_deviation: asym,
            min_sample: values.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

fn check_compatible(f: &GridFunction, kernel: &GridFunction) -> Result<()> {
    if f.spec().dim() != kernel.spec().dim() {
        return Err(Error::DimensionMismatch {
            expected: kernel.spec().dim(),
            found: f.spec().dim(),
        });
    }
    if (f.spec().h() - kernel.spec().h()).abs() > 1e-12 * f.spec().h() {
        return Err(Error::Incompatible(format!(
            "kernel spacing {} differs from grid spacing {}",
            kernel.spec().h(),
            f.spec().h()
        )));
    }
    Ok(())
}

/// `h^n Σ_x f(x) k(z - x)` for a kernel centred at the origin with odd
/// extents, on the interior where the whole kernel fits.
fn lattice_convolve(f: &GridFunction, kernel: &GridFunction) -> Result<GridFunction> {
    check_compatible(f, kernel)?;
    let kspec = kernel.spec();
    let dim = kspec.dim();
    let radii: Vec<usize> = kspec.extents().iter().map(|e| e / 2).collect();
    let margins: Vec<(usize, usize)> = radii.iter().map(|&r| (r, r)).collect();
    let out_spec = f.spec().shrunk(&margins)?;
    let strides = f.spec().strides();

    // Nonzero kernel taps as (flat offset of z - x, weight).
    let mut taps = Vec::new();
    let mut it = kspec.nodes();
    while let Some((flat, multi, _)) = it.next_node() {
        let w = kernel.values()[flat];
        if w != 0.0 {
            let off: isize = (0..dim)
                .map(|k| -(multi[k] as isize - radii[k] as isize) * strides[k] as isize)
                .sum();
            taps.push((off, w));
        }
    }
    let cell = f.spec().cell_volume();
    let input = f.values();
    let mut values = Vec::with_capacity(out_spec.len());
    let mut it = out_spec.nodes();
    while let Some((_, multi, _)) = it.next_node() {
        let center: usize = (0..dim).map(|k| (multi[k] + radii[k]) * strides[k]).sum();
        let acc: f64 = taps
            .iter()
            .map(|&(off, w)| w * input[(center as isize + off) as usize])
            .sum();
        values.push(cell * acc);
    }
    GridFunction::new(out_spec, values)
}

/// `f ∗ ω_ε` on the interior of `f`'s grid shrunk by the kernel radius.
pub fn convolve(f: &GridFunction, kernel: &MollifierKernel) -> Result<GridFunction> {
    lattice_convolve(f, &kernel.samples)
}

#[derive(Debug, Clone, PartialEq)]
pub struct L1Convergence {
    pub eps: Vec<f64>,
    pub errors: Vec<f64>,
    /// Errors never grow by more than 5% from one ε to the next.
    pub non_increasing: bool,
}

/// `‖f ∗ ω_ε − f‖_L1` over the interior common to every ε.
pub fn l1_convergence(f: &GridFunction, eps_list: &[f64], refine: usize) -> Result<L1Convergence> {
    if eps_list.is_empty() {
        return Err(Error::InvalidArgument("empty eps list".into()));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("eps list must be strictly descending".into()));
    }
    let h = f.spec().h();
    let dim = f.spec().dim();
    let kernels = eps_list
        .iter()
        .map(|&e| MollifierKernel::new(dim, e, h, refine))
        .collect::<Result<Vec<_>>>()?;
    let widest = kernels.iter().map(|k| k.radius()).max().unwrap_or(0);
    let common = f.spec().shrunk(&vec![(widest, widest); dim])?;
    let base = f.restrict(&common)?;
    let mut errors = Vec::with_capacity(kernels.len());
    for k in &kernels {
        let smooth = convolve(f, k)?.restrict(&common)?;
        errors.push(smooth.axpby(1.0, &base, -1.0)?.norm(NormKind::L1));
    }
    let non_increasing = errors.windows(2).all(|w| w[1] <= 1.05 * w[0]);
    Ok(L1Convergence {
        eps: eps_list.to_vec(),
        errors,
        non_increasing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommuteReport {
    pub deviation: f64,
    /// `‖f‖∞ · h^n Σ|∂k|`, the natural size of either side.
    pub scale: f64,
}

/// Compares `∂_i (f ∗ k)` with `f ∗ ∂_i k`, both with centred differences.
pub fn derivative_commute(
    f: &GridFunction,
    kernel: &MollifierKernel,
    axis: usize,
) -> Result<CommuteReport> {
    let dim = kernel.dim();
    if axis == 0 || axis > dim {
        return Err(Error::InvalidArgument(format!("axis {axis} out of range")));
    }
    check_compatible(f, &kernel.samples)?;
    let r = kernel.radius();
    if f.spec().extents().iter().any(|&e| e < 2 * r + 3) {
        return Err(Error::EmptyRegion(
            "grid needs one node of margin beyond the kernel radius".into(),
        ));
    }
    let h = kernel.spacing();
    let a = axis - 1;

    // Kernel padded by one node and differenced along the axis.
    let kspec = kernel.samples.spec();
    let padded_spec = GridSpec::new(vec![-((r + 1) as f64) * h; dim], h, vec![2 * r + 3; dim])?;
    let dk = GridFunction::from_fn(padded_spec.clone(), |_| 0.0)?;
    let mut dk_values = dk.into_values();
    let mut it = padded_spec.nodes();
    let mut probe = vec![0isize; dim];
    while let Some((flat, multi, _)) = it.next_node() {
        let sample = |shift: isize, probe: &mut Vec<isize>| -> f64 {
            for k in 0..dim {
                probe[k] = multi[k] as isize - 1 + if k == a { shift } else { 0 };
            }
            if probe.iter().all(|&p| p >= 0 && p < (2 * r + 1) as isize) {
                let idx: Vec<usize> = probe.iter().map(|&p| p as usize).collect();
                kernel.samples.values()[kspec.flat_index(&idx)]
            } else {
                0.0
            }
        };
        dk_values[flat] = (sample(1, &mut probe) - sample(-1, &mut probe)) / (2.0 * h);
    }
    let dk = GridFunction::new(padded_spec, dk_values)?;
    let rhs = lattice_convolve(f, &dk)?;

    let smooth = convolve(f, kernel)?;
    let mut margins = vec![(0, 0); dim];
    margins[a] = (1, 1);
    let plus = {
        let mut m = margins.clone();
        m[a] = (2, 0);
        smooth.shrink(&m)?
    };
    let minus = {
        let mut m = margins.clone();
        m[a] = (0, 2);
        smooth.shrink(&m)?
    };
    // plus/minus sit on the grid of `smooth` shrunk along the axis; re-anchor
    // both onto the centre grid before differencing.
    let center_spec = smooth.spec().shrunk(&margins)?;
    let plus = GridFunction::new(center_spec.clone(), plus.into_values())?;
    let minus = GridFunction::new(center_spec, minus.into_values())?;
    let lhs = plus.axpby(1.0 / (2.0 * h), &minus, -1.0 / (2.0 * h))?;

    let diff = lhs.axpby(1.0, &rhs, -1.0)?;
    let dk_l1 = dk.norm(NormKind::L1);
    Ok(CommuteReport {
        deviation: diff.norm(NormKind::LInf),
        scale: f.norm(NormKind::LInf) * dk_l1,
    })
}
