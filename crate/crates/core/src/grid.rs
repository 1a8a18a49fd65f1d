//! Uniform axis-aligned grids and functions sampled on them.
//!
//! Nodes are stored row-major: the last axis varies fastest. Every axis
//! shares the same spacing `h`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::expr::CoeffExpr;
use crate::fmt_real;

/// Relative tolerance used when deciding whether two grids share a lattice.
const ALIGN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    origin: Vec<f64>,
    h: f64,
    extents: Vec<usize>,
}

impl GridSpec {
    pub fn new(origin: Vec<f64>, h: f64, extents: Vec<usize>) -> Result<Self> {
        if origin.is_empty() {
            return Err(Error::InvalidGrid("dimension must be at least 1".into()));
        }
        if origin.len() != extents.len() {
            return Err(Error::DimensionMismatch {
                expected: origin.len(),
                found: extents.len(),
            });
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {h}")));
        }
        if let Some(axis) = extents.iter().position(|&e| e == 0) {
            return Err(Error::InvalidGrid(format!("axis {} has no nodes", axis + 1)));
        }
        if origin.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(Self { origin, h, extents })
    }

    /// Box `[lower, upper]` covered with spacing `h`. Each side length must
    /// be an integer multiple of `h` (to within rounding).
    pub fn covering(lower: &[f64], upper: &[f64], h: f64) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        let mut extents = Vec::with_capacity(lower.len());
        for (axis, (&lo, &hi)) in lower.iter().zip(upper).enumerate() {
            let steps = (hi - lo) / h;
            let rounded = steps.round();
            if !(rounded >= 0.0) || (steps - rounded).abs() > 1e-6 * rounded.max(1.0) {
                return Err(Error::InvalidGrid(format!(
                    "side {} of length {} is not a multiple of h = {h}",
                    axis + 1,
                    hi - lo
                )));
            }
            extents.push(rounded as usize + 1);
        }
        Self::new(lower.to_vec(), h, extents)
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Volume of one lattice cell, `h^n`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dim()];
        for k in (0..self.dim().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.extents[k + 1];
        }
        strides
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .zip(&self.extents)
            .fold(0, |acc, (&i, &e)| acc * e + i)
    }

    pub fn multi_index(&self, mut flat: usize, out: &mut [usize]) {
        for k in (0..self.dim()).rev() {
            out[k] = flat % self.extents[k];
            flat /= self.extents[k];
        }
    }

    /// Coordinates of the node with multi-index `multi`.
    pub fn coords(&self, multi: &[usize], out: &mut [f64]) {
        for k in 0..self.dim() {
            out[k] = self.origin[k] + self.h * multi[k] as f64;
        }
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        let mut multi = vec![0; self.dim()];
        let mut x = vec![0.0; self.dim()];
        self.multi_index(flat, &mut multi);
        self.coords(&multi, &mut x);
        x
    }

    pub fn is_boundary(&self, multi: &[usize]) -> bool {
        multi
            .iter()
            .zip(&self.extents)
            .any(|(&i, &e)| i == 0 || i + 1 == e)
    }

    /// Row-major walk over every node.
    pub fn nodes(&self) -> NodeIter<'_> {
        NodeIter {
            spec: self,
            multi: vec![0; self.dim()],
            coords: self.origin.clone(),
            flat: 0,
        }
    }

    /// Sub-grid that drops `margins[k] = (low, high)` nodes from each side.
    pub fn shrunk(&self, margins: &[(usize, usize)]) -> Result<Self> {
        if margins.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: margins.len(),
            });
        }
        let mut origin = self.origin.clone();
        let mut extents = self.extents.clone();
        for (k, &(lo, hi)) in margins.iter().enumerate() {
            if lo + hi >= extents[k] {
                return Err(Error::EmptyRegion(format!(
                    "axis {} has {} nodes, margins remove {}",
                    k + 1,
                    extents[k],
                    lo + hi
                )));
            }
            extents[k] -= lo + hi;
            origin[k] += self.h * lo as f64;
        }
        Ok(Self {
            origin,
            h: self.h,
            extents,
        })
    }

    fn check_same_lattice(&self, other: &GridSpec) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        if (self.h - other.h).abs() > ALIGN_TOL * self.h {
            return Err(Error::Incompatible(format!(
                "spacings differ ({} vs {})",
                self.h, other.h
            )));
        }
        Ok(())
    }

    /// Integer node offset of `other`'s origin relative to ours, if both
    /// grids lie on a common lattice.
    pub fn offset_of(&self, other: &GridSpec) -> Result<Vec<isize>> {
        self.check_same_lattice(other)?;
        let mut offset = Vec::with_capacity(self.dim());
        for k in 0..self.dim() {
            let steps = (other.origin[k] - self.origin[k]) / self.h;
            let rounded = steps.round();
            if (steps - rounded).abs() > ALIGN_TOL * rounded.abs().max(1.0) {
                return Err(Error::Incompatible(format!(
                    "origins are not lattice-aligned on axis {}",
                    k + 1
                )));
            }
            offset.push(rounded as isize);
        }
        Ok(offset)
    }

    /// Common sub-grid of two lattice-aligned grids.
    pub fn intersection(&self, other: &GridSpec) -> Result<GridSpec> {
        let offset = self.offset_of(other)?;
        let mut lo = Vec::with_capacity(self.dim());
        let mut extents = Vec::with_capacity(self.dim());
        for k in 0..self.dim() {
            let start = offset[k].max(0);
            let end = (self.extents[k] as isize).min(offset[k] + other.extents[k] as isize);
            if end <= start {
                return Err(Error::EmptyRegion("grids do not overlap".into()));
            }
            lo.push(start as usize);
            extents.push((end - start) as usize);
        }
        let origin = (0..self.dim())
            .map(|k| self.origin[k] + self.h * lo[k] as f64)
            .collect();
        Ok(GridSpec {
            origin,
            h: self.h,
            extents,
        })
    }
}

/// Row-major node walker yielding `(flat index, multi-index, coordinates)`.
pub struct NodeIter<'a> {
    spec: &'a GridSpec,
    multi: Vec<usize>,
    coords: Vec<f64>,
    flat: usize,
}

impl NodeIter<'_> {
    /// Advances to the next node; returns `None` once exhausted.
    pub fn next_node(&mut self) -> Option<(usize, &[usize], &[f64])> {
        if self.flat >= self.spec.len() {
            return None;
        }
        if self.flat > 0 {
            let mut k = self.spec.dim();
            while k > 0 {
                k -= 1;
                self.multi[k] += 1;
                if self.multi[k] < self.spec.extents[k] {
                    break;
                }
                self.multi[k] = 0;
            }
            self.spec.coords(&self.multi, &mut self.coords);
        }
        let flat = self.flat;
        self.flat += 1;
        Some((flat, &self.multi, &self.coords))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L1,
    LInf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    spec: GridSpec,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for {} nodes",
                values.len(),
                spec.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite value at node {i}")));
        }
        Ok(Self { spec, values })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        let values = vec![0.0; spec.len()];
        Self { spec, values }
    }

    pub fn constant(spec: GridSpec, c: f64) -> Result<Self> {
        let values = vec![c; spec.len()];
        Self::new(spec, values)
    }

    /// Samples a closure at every node.
    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(spec.len());
        let mut it = spec.nodes();
        while let Some((_, _, x)) = it.next_node() {
            values.push(f(x));
        }
        Self::new(spec, values)
    }

    /// Samples a coefficient expression at every node, in row-major order.
    pub fn sample(expr: &CoeffExpr, spec: &GridSpec) -> Result<Self> {
        Self::sample_where(expr, spec, |_| true)
    }

    /// Samples on the boundary nodes only; interior values are zero.
    pub fn sample_boundary(expr: &CoeffExpr, spec: &GridSpec) -> Result<Self> {
        Self::sample_where(expr, spec, |multi| spec.is_boundary(multi))
    }

    fn sample_where(
        expr: &CoeffExpr,
        spec: &GridSpec,
        keep: impl Fn(&[usize]) -> bool,
    ) -> Result<Self> {
        if let Some(k) = expr.max_variable() {
            if k > spec.dim() {
                return Err(Error::InvalidArgument(format!(
                    "expression uses x{k} on a {}-dimensional grid",
                    spec.dim()
                )));
            }
        }
        let mut values = Vec::with_capacity(spec.len());
        let mut it = spec.nodes();
        while let Some((flat, multi, x)) = it.next_node() {
            if !keep(multi) {
                values.push(0.0);
                continue;
            }
            let v = expr.eval(x).map_err(|e| Error::NodeEval {
                node: flat,
                cause: Box::new(e),
            })?;
            values.push(v);
        }
        Ok(Self {
            spec: spec.clone(),
            values,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, multi: &[usize]) -> f64 {
        self.values[self.spec.flat_index(multi)]
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::L1 => {
                self.spec.cell_volume() * self.values.iter().map(|v| v.abs()).sum::<f64>()
            }
            NormKind::LInf => self.values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    pub fn shrink(&self, margins: &[(usize, usize)]) -> Result<Self> {
        let spec = self.spec.shrunk(margins)?;
        self.restrict(&spec)
    }

    /// Copies the values on `target`, which must be a lattice-aligned
    /// sub-grid of this function's grid.
    pub fn restrict(&self, target: &GridSpec) -> Result<Self> {
        let offset = self.spec.offset_of(target)?;
        for k in 0..target.dim() {
            if offset[k] < 0 || offset[k] as usize + target.extents[k] > self.spec.extents[k] {
                return Err(Error::Incompatible(format!(
                    "target grid leaves the source grid on axis {}",
                    k + 1
                )));
            }
        }
        let strides = self.spec.strides();
        let base: usize = offset
            .iter()
            .zip(&strides)
            .map(|(&o, &s)| o as usize * s)
            .sum();
        let mut values = Vec::with_capacity(target.len());
        let mut it = target.nodes();
        while let Some((_, multi, _)) = it.next_node() {
            let idx = base + multi.iter().zip(&strides).map(|(i, s)| i * s).sum::<usize>();
            values.push(self.values[idx]);
        }
        Ok(Self {
            spec: target.clone(),
            values,
        })
    }

    /// Pointwise `a·self + b·other` on a common grid.
    pub fn axpby(&self, a: f64, other: &GridFunction, b: f64) -> Result<Self> {
        let common = self.spec.intersection(&other.spec)?;
        let lhs = self.restrict(&common)?;
        let rhs = other.restrict(&common)?;
        let values = lhs
            .values
            .iter()
            .zip(&rhs.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        GridFunction::new(common, values)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        GridFunction::new(self.spec.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Grid file text: header lines followed by one value per line.
    pub fn to_text(&self) -> String {
        let spec = &self.spec;
        let mut out = String::new();
        let _ = writeln!(out, "dim {}", spec.dim());
        let origin: Vec<String> = spec.origin.iter().map(|&v| fmt_real(v)).collect();
        let _ = writeln!(out, "origin {}", origin.join(" "));
        let _ = writeln!(out, "h {}", fmt_real(spec.h));
        let extents: Vec<String> = spec.extents.iter().map(|e| e.to_string()).collect();
        let _ = writeln!(out, "extents {}", extents.join(" "));
        for &v in &self.values {
            out.push_str(&fmt_real(v));
            out.push('\n');
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut dim = None;
        let mut origin = None;
        let mut h = None;
        let mut extents = None;
        let mut values = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let trimmed = raw.trim_start();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let lead = raw.len() - trimmed.len();
            let fields = split_fields(raw);
            let (key_off, key) = fields[0];
            let rest = &fields[1..];
            match key {
                "dim" => {
                    let [(off, tok)] = rest else {
                        return Err(format_err(line, lead, "expected `dim N`"));
                    };
                    dim = Some(parse_usize(line, *off, tok)?);
                }
                "origin" => {
                    let v = rest
                        .iter()
                        .map(|&(off, tok)| parse_f64(line, off, tok))
                        .collect::<Result<Vec<_>>>()?;
                    origin = Some(v);
                }
                "h" => {
                    let [(off, tok)] = rest else {
                        return Err(format_err(line, lead, "expected `h v`"));
                    };
                    h = Some(parse_f64(line, *off, tok)?);
                }
                "extents" => {
                    let v = rest
                        .iter()
                        .map(|&(off, tok)| parse_usize(line, off, tok))
                        .collect::<Result<Vec<_>>>()?;
                    extents = Some(v);
                }
                _ => {
                    if !rest.is_empty() {
                        return Err(format_err(line, fields[1].0, "one value per line expected"));
                    }
                    values.push(parse_f64(line, key_off, key)?);
                }
            }
        }
        let missing = |what: &str| Error::Format {
            line: 0,
            offset: 0,
            message: format!("missing `{what}` header"),
        };
        let dim = dim.ok_or_else(|| missing("dim"))?;
        let origin = origin.ok_or_else(|| missing("origin"))?;
        let h = h.ok_or_else(|| missing("h"))?;
        let extents = extents.ok_or_else(|| missing("extents"))?;
        if origin.len() != dim || extents.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: if origin.len() != dim {
                    origin.len()
                } else {
                    extents.len()
                },
            });
        }
        let spec = GridSpec::new(origin, h, extents)?;
        GridFunction::new(spec, values)
    }
}

/// Whitespace-separated fields with their byte offsets.
pub(crate) fn split_fields(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out
}

pub(crate) fn format_err(line: usize, offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        line,
        offset,
        message: message.into(),
    }
}

pub(crate) fn parse_f64(line: usize, offset: usize, tok: &str) -> Result<f64> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format_err(line, offset, format!("`{tok}` is not a finite number"))),
    }
}

pub(crate) fn parse_usize(line: usize, offset: usize, tok: &str) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| format_err(line, offset, format!("`{tok}` is not a nonnegative integer")))
}
