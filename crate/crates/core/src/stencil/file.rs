//! Stencil file format.
//!
//! ```text
//! # five-point Laplacian, forward form
//! dim 2
//! h 0.1
//! scale 2
//! term 2 0  1
//! term 1 0  -2
//! term 0 0  "2 + x1*x2"
//! ```
//!
//! A coefficient is a numeric literal or a double-quoted expression. Shifts
//! may be real; only integer shifts can be turned into a [`Stencil`].

use std::fmt::Write as _;

use super::{DifferenceOperator, Stencil, StencilTerm};
use crate::error::{Error, Result};
use crate::expr::{parse, CoeffExpr};
use crate::fmt_real;
use crate::grid::{format_err, parse_f64, parse_usize, split_fields};

#[derive(Debug, Clone, PartialEq)]
pub struct StencilFile {
    pub h: f64,
    pub scale_exp: u32,
    pub operator: DifferenceOperator,
    /// Source line of each term, for error reporting.
    term_lines: Vec<usize>,
}

impl StencilFile {
    pub fn into_stencil(self) -> Result<Stencil> {
        let dim = self.operator.dim();
        let mut terms = Vec::with_capacity(self.operator.terms().len());
        for ((shift, coeff), &line) in self.operator.terms().iter().zip(&self.term_lines) {
            let mut ints = Vec::with_capacity(dim);
            for &s in shift {
                if s.fract() != 0.0 || s.abs() > 1e9 {
                    return Err(format_err(
                        line,
                        0,
                        format!("shift {s} is not an integer; grids need integer shifts"),
                    ));
                }
                ints.push(s as i64);
            }
            terms.push(StencilTerm {
                shift: ints,
                coeff: coeff.clone(),
            });
        }
        Stencil::new(dim, self.h, terms, self.scale_exp)
    }
}

pub fn parse_stencil_file(text: &str) -> Result<StencilFile> {
    let mut dim: Option<usize> = None;
    let mut h = None;
    let mut scale = 0u32;
    let mut terms = Vec::new();
    let mut term_lines = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let lead = raw.len() - trimmed.len();
        let fields = split_fields(raw);
        let (_, key) = fields[0];
        match key {
            "dim" => match &fields[1..] {
                [(off, tok)] => dim = Some(parse_usize(line, *off, tok)?),
                _ => return Err(format_err(line, lead, "expected `dim N`")),
            },
            "h" => match &fields[1..] {
                [(off, tok)] => {
                    let v = parse_f64(line, *off, tok)?;
                    if v <= 0.0 {
                        return Err(format_err(line, *off, "spacing must be positive"));
                    }
                    h = Some(v);
                }
                _ => return Err(format_err(line, lead, "expected `h v`")),
            },
            "scale" => match &fields[1..] {
                [(off, tok)] => {
                    scale = tok.parse().map_err(|_| {
                        format_err(line, *off, format!("`{tok}` is not a nonnegative integer"))
                    })?
                }
                _ => return Err(format_err(line, lead, "expected `scale p`")),
            },
            "term" => {
                let n = dim.ok_or_else(|| format_err(line, lead, "`term` before `dim`"))?;
                let (shift, coeff) = parse_term(raw, line, lead + 4, n)?;
                terms.push((shift, coeff));
                term_lines.push(line);
            }
            other => {
                return Err(format_err(line, lead, format!("unknown directive `{other}`")));
            }
        }
    }
    let header = |what: &str| format_err(0, 0, format!("missing `{what}` header"));
    let dim = dim.ok_or_else(|| header("dim"))?;
    let h = h.ok_or_else(|| header("h"))?;
    if terms.is_empty() {
        return Err(format_err(0, 0, "stencil has no `term` lines"));
    }
    let operator = DifferenceOperator::new(dim, terms)?;
    Ok(StencilFile {
        h,
        scale_exp: scale,
        operator,
        term_lines,
    })
}

fn parse_term(raw: &str, line: usize, mut pos: usize, dim: usize) -> Result<(Vec<f64>, CoeffExpr)> {
    let bytes = raw.as_bytes();
    let skip_ws = |mut p: usize| {
        while p < bytes.len() && bytes[p].is_ascii_whitespace() {
            p += 1;
        }
        p
    };
    let mut shift = Vec::with_capacity(dim);
    for _ in 0..dim {
        pos = skip_ws(pos);
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(format_err(line, start, format!("expected {dim} shift components")));
        }
        shift.push(parse_f64(line, start, &raw[start..pos])?);
    }
    pos = skip_ws(pos);
    if pos >= bytes.len() {
        return Err(format_err(line, pos, "missing coefficient"));
    }
    let coeff = if bytes[pos] == b'"' {
        let body = pos + 1;
        let close = raw[body..]
            .find('"')
            .map(|i| body + i)
            .ok_or_else(|| format_err(line, pos, "unterminated quoted expression"))?;
        let expr = parse(&raw[body..close]).map_err(|e| match e {
            Error::Syntax { offset, message } => format_err(line, body + offset, message),
            Error::UnknownIdentifier { name, offset } => {
                format_err(line, body + offset, format!("unknown identifier `{name}`"))
            }
            other => other,
        })?;
        pos = close + 1;
        expr
    } else {
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        CoeffExpr::Num(parse_f64(line, start, &raw[start..pos])?)
    };
    pos = skip_ws(pos);
    if pos < bytes.len() {
        return Err(format_err(line, pos, "unexpected trailing text"));
    }
    Ok((shift, coeff))
}

impl Stencil {
    /// Stencil file text; re-parses to an equal stencil.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "dim {}", self.dim);
        let _ = writeln!(out, "h {}", fmt_real(self.h));
        let _ = writeln!(out, "scale {}", self.scale_exp);
        for t in &self.terms {
            let shift: Vec<String> = t.shift.iter().map(|s| s.to_string()).collect();
            let coeff = match t.coeff.constant() {
                Some(v) => fmt_real(v),
                None => format!("\"{}\"", t.coeff),
            };
            let _ = writeln!(out, "term {} {coeff}", shift.join(" "));
        }
        out
    }
}
