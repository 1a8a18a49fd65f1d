//! Fundamental solution of the Laplacian and Newtonian potentials.
//!
//! Sign convention: `ΔΦ = δ`, so `u = Φ ∗ f` solves `Δu = f`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function, Lanczos approximation (g = 7, nine terms) with the
/// reflection formula below 1/2.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// Surface area of the unit sphere in `R^n`, `2 π^(n/2) / Γ(n/2)`.
pub fn sphere_area(n: usize) -> f64 {
    let half = n as f64 / 2.0;
    2.0 * PI.powf(half) / gamma(half)
}

/// Euclidean norm that is invariant, bit for bit, under permutations and
/// sign flips of the coordinates.
fn symmetric_norm(x: &[f64]) -> f64 {
    let mut sq: Vec<f64> = x.iter().map(|v| v * v).collect();
    sq.sort_by(f64::total_cmp);
    sq.iter().sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalSolution {
    dim: usize,
    sphere_area: f64,
}

impl FundamentalSolution {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument(format!(
                "fundamental solution needs dimension >= 2, got {dim}"
            )));
        }
        Ok(Self {
            dim,
            sphere_area: sphere_area(dim),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sphere_area(&self) -> f64 {
        self.sphere_area
    }

    fn radial(&self, r: f64) -> f64 {
        if self.dim == 2 {
            r.ln() / (2.0 * PI)
        } else {
            let n = self.dim as f64;
            -r.powf(2.0 - n) / ((n - 2.0) * self.sphere_area)
        }
    }

    /// `Φ(x)`; the origin is a singularity.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        let r = symmetric_norm(x);
        if r == 0.0 {
            return Err(Error::Singularity("Φ is singular at the origin".into()));
        }
        Ok(self.radial(r))
    }

    /// Mean of `Φ` over the cube `[-h/2, h/2]^n`, by the midpoint rule on
    /// `sub^n` subcells (the singular point is never a midpoint for even
    /// `sub`).
    pub fn cell_average(&self, h: f64) -> f64 {
        let sub: usize = if self.dim <= 3 { 16 } else { 8 };
        let step = h / sub as f64;
        let mids: Vec<f64> = (0..sub).map(|i| -0.5 * h + (i as f64 + 0.5) * step).collect();
        let mut idx = vec![0usize; self.dim];
        let mut point = vec![0.0; self.dim];
        let mut sum = 0.0;
        let total = sub.pow(self.dim as u32);
        for _ in 0..total {
            for k in 0..self.dim {
                point[k] = mids[idx[k]];
            }
            sum += self.radial(symmetric_norm(&point));
            for k in (0..self.dim).rev() {
                idx[k] += 1;
                if idx[k] < sub {
                    break;
                }
                idx[k] = 0;
            }
        }
        sum / total as f64
    }
}

/// `u(x) = h^n Σ_y Φ(x - y) f(y)` over the nodes `x` of `targets`, with the
/// additive constant fixed to zero. A target that coincides with a source
/// node takes the cell average of `Φ` for that node.
pub fn newtonian_potential(
    fs: &FundamentalSolution,
    f: &GridFunction,
    targets: &GridSpec,
) -> Result<GridFunction> {
    let spec = f.spec();
    if spec.dim() != fs.dim() || targets.dim() != fs.dim() {
        return Err(Error::DimensionMismatch {
            expected: fs.dim(),
            found: if spec.dim() != fs.dim() {
                spec.dim()
            } else {
                targets.dim()
            },
        });
    }
    let h = spec.h();
    let mut sources: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut it = spec.nodes();
    while let Some((flat, multi, x)) = it.next_node() {
        let v = f.values()[flat];
        if v != 0.0 {
            if spec.is_boundary(multi) {
                return Err(Error::NotCompactlySupported { node: flat });
            }
            sources.push((x.to_vec(), v));
        }
    }
    let self_term = fs.cell_average(h);
    let coincide = 1e-9 * h;
    let cell = spec.cell_volume();

    let mut d = vec![0.0; fs.dim()];
    let mut values = Vec::with_capacity(targets.len());
    let mut it = targets.nodes();
    while let Some((_, _, x)) = it.next_node() {
        let mut acc = 0.0;
        for (y, fy) in &sources {
            for k in 0..d.len() {
                d[k] = x[k] - y[k];
            }
            let r = symmetric_norm(&d);
            let phi = if r < coincide { self_term } else { fs.radial(r) };
            acc += phi * fy;
        }
        values.push(cell * acc);
    }
    GridFunction::new(targets.clone(), values)
}
