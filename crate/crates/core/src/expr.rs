//! Coefficient expressions `γ(x1, …, xn)`.
//!
//! Grammar, lowest to highest precedence:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?          right-associative
//! atom    := number | 'x' digits | func '(' sum ')' | '(' sum ')'
//! ```
//!
//! Evaluation is real-valued; any non-finite intermediate is an error.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoeffExpr {
    Num(f64),
    /// 1-based variable index.
    Var(usize),
    Neg(Box<CoeffExpr>),
    Call(Func, Box<CoeffExpr>),
    Binary(BinOp, Box<CoeffExpr>, Box<CoeffExpr>),
}

impl CoeffExpr {
    pub fn constant(&self) -> Option<f64> {
        match *self {
            CoeffExpr::Num(v) => Some(v),
            _ => None,
        }
    }

    pub fn binary(op: BinOp, lhs: CoeffExpr, rhs: CoeffExpr) -> Self {
        CoeffExpr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Largest variable index referenced, if any.
    pub fn max_variable(&self) -> Option<usize> {
        match self {
            CoeffExpr::Num(_) => None,
            CoeffExpr::Var(k) => Some(*k),
            CoeffExpr::Neg(e) | CoeffExpr::Call(_, e) => e.max_variable(),
            CoeffExpr::Binary(_, a, b) => match (a.max_variable(), b.max_variable()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        let fail = |cause: String| Error::Eval {
            point: point.to_vec(),
            cause,
        };
        let v = match self {
            CoeffExpr::Num(v) => *v,
            CoeffExpr::Var(k) => match point.get(k - 1) {
                Some(&v) => v,
                None => {
                    return Err(fail(format!(
                        "x{k} referenced at a {}-dimensional point",
                        point.len()
                    )))
                }
            },
            CoeffExpr::Neg(e) => -e.eval(point)?,
            CoeffExpr::Call(f, e) => {
                let a = e.eval(point)?;
                match f {
                    Func::Exp => a.exp(),
                    Func::Ln if a <= 0.0 => return Err(fail(format!("ln of nonpositive {a}"))),
                    Func::Ln => a.ln(),
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Sqrt if a < 0.0 => return Err(fail(format!("sqrt of negative {a}"))),
                    Func::Sqrt => a.sqrt(),
                    Func::Abs => a.abs(),
                }
            }
            CoeffExpr::Binary(op, a, b) => {
                let x = a.eval(point)?;
                let y = b.eval(point)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div if y == 0.0 => return Err(fail("division by zero".into())),
                    BinOp::Div => x / y,
                    BinOp::Pow if x < 0.0 && y.fract() != 0.0 => {
                        return Err(fail(format!("{x} raised to non-integer power {y}")))
                    }
                    BinOp::Pow => x.powf(y),
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(fail(format!("non-finite result in `{self}`")))
        }
    }
}

/// Canonical, fully parenthesized form; re-parses to the same tree.
impl fmt::Display for CoeffExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffExpr::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => {
                write!(f, "(-{:?})", -v)
            }
            CoeffExpr::Num(v) => write!(f, "{v:?}"),
            CoeffExpr::Var(k) => write!(f, "x{k}"),
            CoeffExpr::Neg(e) => write!(f, "(-{e})"),
            CoeffExpr::Call(func, e) => write!(f, "{}({e})", func.name()),
            CoeffExpr::Binary(op, a, b) => write!(f, "({a}{}{b})", op.symbol()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                out.push((i, Tok::Op(c as char)));
                i += 1;
            }
            b'(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lit = &text[start..i];
                let v: f64 = lit.parse().map_err(|_| Error::Syntax {
                    offset: start,
                    message: format!("malformed number `{lit}`"),
                })?;
                out.push((start, Tok::Num(v)));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(Error::Syntax {
                    offset: i,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn unexpected(&self) -> Error {
        let message = match self.peek() {
            None => "unexpected end of input".to_string(),
            Some(Tok::Num(v)) => format!("unexpected number {v}"),
            Some(Tok::Ident(s)) => format!("unexpected identifier `{s}`"),
            Some(Tok::Op(c)) => format!("unexpected `{c}`"),
            Some(Tok::LParen) => "unexpected `(`".to_string(),
            Some(Tok::RParen) => "unexpected `)`".to_string(),
        };
        Error::Syntax {
            offset: self.offset(),
            message,
        }
    }

    fn eat_op(&mut self, ops: &[char]) -> Option<char> {
        match self.peek() {
            Some(Tok::Op(c)) if ops.contains(c) => {
                let c = *c;
                self.pos += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn sum(&mut self) -> Result<CoeffExpr> {
        let mut lhs = self.product()?;
        while let Some(c) = self.eat_op(&['+', '-']) {
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = CoeffExpr::binary(op, lhs, self.product()?);
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<CoeffExpr> {
        let mut lhs = self.unary()?;
        while let Some(c) = self.eat_op(&['*', '/']) {
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = CoeffExpr::binary(op, lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<CoeffExpr> {
        if self.eat_op(&['-']).is_some() {
            // A negated literal is stored as a negative literal.
            return Ok(match self.unary()? {
                CoeffExpr::Num(v) => CoeffExpr::Num(-v),
                e => CoeffExpr::Neg(Box::new(e)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<CoeffExpr> {
        let base = self.atom()?;
        if self.eat_op(&['^']).is_some() {
            let exp = self.unary()?;
            return Ok(CoeffExpr::binary(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<CoeffExpr> {
        let offset = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(CoeffExpr::Num(v))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(func) = Func::from_name(&name) {
                    if self.peek() != Some(&Tok::LParen) {
                        return Err(Error::Syntax {
                            offset: self.offset(),
                            message: format!("expected `(` after `{name}`"),
                        });
                    }
                    self.pos += 1;
                    let arg = self.sum()?;
                    self.expect_rparen()?;
                    return Ok(CoeffExpr::Call(func, Box::new(arg)));
                }
                match name.strip_prefix('x').map(str::parse::<usize>) {
                    Some(Ok(k)) if k >= 1 && !name[1..].starts_with('0') => Ok(CoeffExpr::Var(k)),
                    _ => Err(Error::UnknownIdentifier { name, offset }),
                }
            }
            _ => Err(self.unexpected()),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }
}

pub fn parse(text: &str) -> Result<CoeffExpr> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let e = p.sum()?;
    if p.pos != p.toks.len() {
        return Err(p.unexpected());
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use BinOp::*;
    use CoeffExpr::*;

    fn b(op: BinOp, x: CoeffExpr, y: CoeffExpr) -> CoeffExpr {
        CoeffExpr::binary(op, x, y)
    }

    #[test]
    fn parse_examples() {
        assert_eq!(
            parse("x1^2+1").unwrap(),
            b(Add, b(Pow, Var(1), Num(2.0)), Num(1.0))
        );
        assert_eq!(
            parse("2*x1+x2").unwrap(),
            b(Add, b(Mul, Num(2.0), Var(1)), Var(2))
        );
        assert_eq!(
            parse("x1+*2").unwrap_err(),
            Error::Syntax {
                offset: 3,
                message: "unexpected `*`".into()
            }
        );
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse("x1^2^3").unwrap().eval(&[2.0]).unwrap(), 256.0);
        assert_eq!(parse("-2^2").unwrap().eval(&[]).unwrap(), -4.0);
        assert_eq!(parse("2^-1").unwrap().eval(&[]).unwrap(), 0.5);
        assert_eq!(parse("8/4/2").unwrap().eval(&[]).unwrap(), 1.0);
        assert_eq!(parse("1-2-3").unwrap().eval(&[]).unwrap(), -4.0);
        assert_eq!(parse(" 2 * ( x1 + 1 ) ").unwrap().eval(&[3.0]).unwrap(), 8.0);
        assert_eq!(parse("1.5e1 + 2E-1").unwrap().eval(&[]).unwrap(), 15.2);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(matches!(parse("2x1"), Err(Error::Syntax { offset: 1, .. })));
        assert!(matches!(parse("(x1"), Err(Error::Syntax { offset: 3, .. })));
        assert!(matches!(parse(""), Err(Error::Syntax { offset: 0, .. })));
        assert!(matches!(parse("x1 $"), Err(Error::Syntax { offset: 3, .. })));
        assert_eq!(
            parse("y+1").unwrap_err(),
            Error::UnknownIdentifier {
                name: "y".into(),
                offset: 0
            }
        );
        assert!(matches!(parse("x0"), Err(Error::UnknownIdentifier { .. })));
        assert!(matches!(parse("sin x1"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn eval_examples() {
        assert_eq!(parse("x1^2+1").unwrap().eval(&[2.0]).unwrap(), 5.0);
        assert_eq!(parse("exp(0)").unwrap().eval(&[7.0, 8.0]).unwrap(), 1.0);
        let err = parse("1/x1").unwrap().eval(&[0.0]).unwrap_err();
        assert!(matches!(err, Error::Eval { ref point, .. } if point == &[0.0]));
    }

    #[test]
    fn eval_failures() {
        for (text, x) in [
            ("ln(x1)", 0.0),
            ("ln(x1)", -1.0),
            ("sqrt(x1)", -1.0),
            ("x1^0.5", -4.0),
            ("exp(x1)", 1000.0),
            ("x2", 1.0),
        ] {
            assert!(parse(text).unwrap().eval(&[x]).is_err(), "{text} at {x}");
        }
        assert_eq!(parse("x1^3").unwrap().eval(&[-2.0]).unwrap(), -8.0);
        assert_eq!(parse("abs(x1)").unwrap().eval(&[-2.5]).unwrap(), 2.5);
    }

    #[test]
    fn max_variable() {
        assert_eq!(parse("3").unwrap().max_variable(), None);
        assert_eq!(parse("x3*sin(x12)+x1").unwrap().max_variable(), Some(12));
    }

    fn arb_expr() -> impl Strategy<Value = CoeffExpr> {
        let leaf = prop_oneof![
            (-1e3f64..1e3).prop_map(Num),
            (1usize..4).prop_map(Var),
        ];
        leaf.prop_recursive(4, 32, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Neg(Box::new(e))),
                (0usize..6, inner.clone()).prop_map(|(f, e)| {
                    let f = [Func::Exp, Func::Ln, Func::Sin, Func::Cos, Func::Sqrt, Func::Abs][f];
                    Call(f, Box::new(e))
                }),
                (0usize..5, inner.clone(), inner).prop_map(|(op, a, b)| {
                    let op = [Add, Sub, Mul, Div, Pow][op];
                    CoeffExpr::binary(op, a, b)
                }),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in arb_expr()) {
            let printed = e.to_string();
            let reparsed = parse(&printed).unwrap();
            // A `Neg` of a literal folds into the literal on parse, so compare
            // the canonical forms.
            prop_assert_eq!(parse(&reparsed.to_string()).unwrap(), reparsed.clone());
            prop_assert_eq!(reparsed.to_string(), parse(&printed).unwrap().to_string());
        }

        #[test]
        fn eval_is_deterministic(e in arb_expr(), x in proptest::collection::vec(-2.0f64..2.0, 3)) {
            let a = e.eval(&x);
            let b = e.eval(&x);
            prop_assert_eq!(a, b);
        }
    }
}
