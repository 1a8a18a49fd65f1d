//! Elliptic / hyperbolic / parabolic classification of difference operators.
//!
//! For `D u(x) = Σ γ_i(x) u(x + ρ_i h)` the coefficient matrix is
//! `A_kl(x) = Σ_i ρ_(k,i) ρ_(l,i) γ_i(x)`. The operator is elliptic where
//! `A` is definite (either sign), hyperbolic where it is indefinite, and
//! parabolic where it is semidefinite but singular.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::stencil::DifferenceOperator;

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    dim: usize,
    entries: Vec<f64>,
    point: Vec<f64>,
}

impl CoefficientMatrix {
    /// Symmetric matrix from row-major entries; the upper triangle is
    /// mirrored into the lower one.
    pub fn from_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        let mut e = entries.to_vec();
        for k in 0..dim {
            for l in 0..k {
                e[k * dim + l] = e[l * dim + k];
            }
        }
        Ok(Self {
            dim,
            entries: e,
            point: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.entries[k * self.dim + l]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }
}

/// `A_kl(x)` for every pair of axes. The `h^(-p)` prefactor is a positive
/// factor and does not enter.
pub fn coefficient_matrix(op: &DifferenceOperator, x: &[f64]) -> Result<CoefficientMatrix> {
    let n = op.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    let mut entries = vec![0.0; n * n];
    for (shift, coeff) in op.terms() {
        let gamma = coeff.eval(x)?;
        for k in 0..n {
            for l in k..n {
                entries[k * n + l] += shift[k] * shift[l] * gamma;
            }
        }
    }
    for k in 0..n {
        for l in 0..k {
            entries[k * n + l] = entries[l * n + k];
        }
    }
    Ok(CoefficientMatrix {
        dim: n,
        entries,
        point: x.to_vec(),
    })
}

/// Eigenvalues of a symmetric matrix in ascending order, by cyclic Jacobi
/// rotations.
pub fn eigen_symmetric(q: &CoefficientMatrix) -> Vec<f64> {
    let n = q.dim;
    let mut a = q.entries.clone();
    let frob: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |r| (p, r)))
            .map(|(p, r)| a[p * n + r] * a[p * n + r])
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * 1e-3 * frob || off == 0.0 {
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apr = a[p * n + r];
                if apr == 0.0 {
                    continue;
                }
                let theta = (a[r * n + r] - a[p * n + p]) / (2.0 * apr);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                a[p * n + p] -= t * apr;
                a[r * n + r] += t * apr;
                a[p * n + r] = 0.0;
                a[r * n + p] = 0.0;
                for k in 0..n {
                    if k == p || k == r {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akr = a[k * n + r];
                    let new_kp = c * akp - s * akr;
                    let new_kr = s * akp + c * akr;
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + r] = new_kr;
                    a[r * n + k] = new_kr;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|k| a[k * n + k]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OperatorType {
    Elliptic,
    Hyperbolic,
    Parabolic,
}

impl fmt::Display for OperatorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OperatorType::Elliptic => "elliptic",
            OperatorType::Hyperbolic => "hyperbolic",
            OperatorType::Parabolic => "parabolic",
        })
    }
}

/// Sign analysis with threshold `tol · max(1, max|λ|)`.
pub fn label_from_eigenvalues(eigenvalues: &[f64], tol: f64) -> OperatorType {
    let scale = eigenvalues.iter().fold(1.0f64, |m, l| m.max(l.abs()));
    let thr = tol * scale;
    let pos = eigenvalues.iter().filter(|&&l| l > thr).count();
    let neg = eigenvalues.iter().filter(|&&l| l < -thr).count();
    let n = eigenvalues.len();
    if pos > 0 && neg > 0 {
        OperatorType::Hyperbolic
    } else if n > 0 && (pos == n || neg == n) {
        OperatorType::Elliptic
    } else {
        OperatorType::Parabolic
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointClassification {
    pub point: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub label: OperatorType,
}

pub fn classify_point(op: &DifferenceOperator, x: &[f64], tol: f64) -> Result<PointClassification> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let q = coefficient_matrix(op, x)?;
    let eigenvalues = eigen_symmetric(&q);
    let label = label_from_eigenvalues(&eigenvalues, tol);
    Ok(PointClassification {
        point: x.to_vec(),
        eigenvalues,
        label,
    })
}

pub fn classify_at(op: &DifferenceOperator, x: &[f64], tol: f64) -> Result<OperatorType> {
    Ok(classify_point(op, x, tol)?.label)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub tol: f64,
    pub entries: Vec<PointClassification>,
}

impl ClassificationReport {
    pub fn count(&self, label: OperatorType) -> usize {
        self.entries.iter().filter(|e| e.label == label).count()
    }
}

/// Classifies at every node of `probe`, in row-major order.
pub fn classify_region(
    op: &DifferenceOperator,
    probe: &GridSpec,
    tol: f64,
) -> Result<ClassificationReport> {
    if probe.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: probe.dim(),
        });
    }
    let mut entries = Vec::with_capacity(probe.len());
    let mut it = probe.nodes();
    while let Some((_, _, x)) = it.next_node() {
        entries.push(classify_point(op, x, tol)?);
    }
    Ok(ClassificationReport { tol, entries })
}
