//! Group laws given as coordinate formulas, e.g. `mul = ["x0*y0", "x0*y1 + x1"]`.
//!
//! Formulas use the variables `x0, x1, …` (left factor) and `y0, y1, …`
//! (right factor), numeric literals, `+ - * /`, integer powers `^n`, and
//! the functions `exp ln sqrt sin cos`.

use nalgebra::DMatrix;

use super::dual::Scalar;
use super::law::GenericLaw;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    X(usize),
    Y(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Powi(Box<Expr>, i32),
    #[allow(private_interfaces)]
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0, src };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Expression(format!(
                "unexpected trailing input in {src:?}"
            )));
        }
        Ok(e)
    }

    pub fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        match self {
            Expr::Const(c) => S::cst(*c),
            Expr::X(i) => x[*i],
            Expr::Y(i) => y[*i],
            Expr::Add(a, b) => a.eval(x, y) + b.eval(x, y),
            Expr::Sub(a, b) => a.eval(x, y) - b.eval(x, y),
            Expr::Mul(a, b) => a.eval(x, y) * b.eval(x, y),
            Expr::Div(a, b) => a.eval(x, y) / b.eval(x, y),
            Expr::Neg(a) => -a.eval(x, y),
            Expr::Powi(a, n) => {
                let v = a.eval(x, y);
                if *n >= 0 {
                    v.powi(*n)
                } else {
                    S::cst(1.0) / v.powi(-*n)
                }
            }
            Expr::Call(f, a) => {
                let v = a.eval(x, y);
                match f {
                    Func::Exp => v.exp(),
                    Func::Ln => v.ln(),
                    Func::Sqrt => v.sqrt(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                }
            }
        }
    }

    /// Largest `(x index, y index)` referenced, if any.
    fn max_vars(&self) -> (Option<usize>, Option<usize>) {
        fn merge(a: Option<usize>, b: Option<usize>) -> Option<usize> {
            match (a, b) {
                (Some(p), Some(q)) => Some(p.max(q)),
                (p, q) => p.or(q),
            }
        }
        match self {
            Expr::Const(_) => (None, None),
            Expr::X(i) => (Some(*i), None),
            Expr::Y(i) => (None, Some(*i)),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let (ax, ay) = a.max_vars();
                let (bx, by) = b.max_vars();
                (merge(ax, bx), merge(ay, by))
            }
            Expr::Neg(a) | Expr::Powi(a, _) | Expr::Call(_, a) => a.max_vars(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let save = i;
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                if i < chars.len() && chars[i].is_ascii_digit() {
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                } else {
                    i = save;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| Error::Expression(format!("bad number {text:?} in {src:?}")))?;
            out.push(Tok::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Expression(format!(
                "unexpected character {c:?} in {src:?}"
            )));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Tok>,
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn err(&self, msg: &str) -> Error {
        Error::Expression(format!("{msg} in {:?}", self.src))
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            let neg = self.eat('-');
            match self.tokens.get(self.pos).cloned() {
                Some(Tok::Num(v)) if v.fract() == 0.0 && v.abs() < 1e6 => {
                    self.pos += 1;
                    let n = if neg { -(v as i32) } else { v as i32 };
                    return Ok(Expr::Powi(Box::new(base), n));
                }
                _ => return Err(self.err("exponent must be an integer literal")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.tokens.get(self.pos).cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err("missing ')'"));
                }
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let func = match name.as_str() {
                    "exp" => Some(Func::Exp),
                    "ln" => Some(Func::Ln),
                    "sqrt" => Some(Func::Sqrt),
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    _ => None,
                };
                if let Some(f) = func {
                    if !self.eat('(') {
                        return Err(self.err("expected '(' after function name"));
                    }
                    let e = self.expr()?;
                    if !self.eat(')') {
                        return Err(self.err("missing ')'"));
                    }
                    return Ok(Expr::Call(f, Box::new(e)));
                }
                let (head, idx) = name.split_at(1);
                let idx: usize = idx
                    .parse()
                    .map_err(|_| self.err(&format!("unknown identifier {name:?}")))?;
                match head {
                    "x" => Ok(Expr::X(idx)),
                    "y" => Ok(Expr::Y(idx)),
                    _ => Err(self.err(&format!("unknown identifier {name:?}"))),
                }
            }
            _ => Err(self.err("unexpected end of expression")),
        }
    }
}

/// A group law defined by formulas.
#[derive(Debug, Clone)]
pub struct ExprLaw {
    dim: usize,
    mul: Vec<Expr>,
    inv: Vec<Expr>,
    embed: Option<Vec<Vec<Expr>>>,
}

impl ExprLaw {
    pub fn new(
        dim: usize,
        mul: &[String],
        inv: &[String],
        embed: Option<&[Vec<String>]>,
    ) -> Result<ExprLaw> {
        if mul.len() != dim || inv.len() != dim {
            return Err(Error::Expression(format!(
                "need {dim} mul and inv formulas, got {} and {}",
                mul.len(),
                inv.len()
            )));
        }
        let parse_all = |v: &[String]| v.iter().map(|s| Expr::parse(s)).collect::<Result<Vec<_>>>();
        let mul = parse_all(mul)?;
        let inv = parse_all(inv)?;
        let embed = match embed {
            Some(rows) => Some(rows.iter().map(|r| parse_all(r)).collect::<Result<Vec<_>>>()?),
            None => None,
        };
        let check = |e: &Expr, allow_y: bool| -> Result<()> {
            let (mx, my) = e.max_vars();
            if mx.is_some_and(|i| i >= dim) || my.is_some_and(|i| i >= dim) {
                return Err(Error::Expression(format!(
                    "variable index out of range for dimension {dim}"
                )));
            }
            if !allow_y && my.is_some() {
                return Err(Error::Expression(
                    "inverse and embedding formulas may only use x variables".into(),
                ));
            }
            Ok(())
        };
        for e in &mul {
            check(e, true)?;
        }
        for e in &inv {
            check(e, false)?;
        }
        if let Some(rows) = &embed {
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(Error::Expression("embedding must be a square matrix".into()));
            }
            for e in rows.iter().flatten() {
                check(e, false)?;
            }
        }
        Ok(ExprLaw { dim, mul, inv, embed })
    }
}

impl GenericLaw for ExprLaw {
    fn dim(&self) -> usize {
        self.dim
    }
    fn mul<S: Scalar>(&self, x: &[S], y: &[S], out: &mut [S]) {
        for (o, e) in out.iter_mut().zip(&self.mul) {
            *o = e.eval(x, y);
        }
    }
    fn inv<S: Scalar>(&self, x: &[S], out: &mut [S]) {
        for (o, e) in out.iter_mut().zip(&self.inv) {
            *o = e.eval(x, &[]);
        }
    }
    fn embed(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let rows = self.embed.as_ref()?;
        let n = rows.len();
        Some(DMatrix::from_fn(n, n, |i, j| rows[i][j].eval(x, &[])))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_core::dual::Dual;

    #[test]
    fn precedence_and_powers() {
        let e = Expr::parse("1 + 2*x0^2 - -x1/4").unwrap();
        assert_eq!(e.eval(&[3.0, 8.0], &[]), 1.0 + 18.0 + 2.0);
        let e = Expr::parse("x0^-2").unwrap();
        assert_eq!(e.eval(&[2.0], &[]), 0.25);
        let e = Expr::parse("exp(ln(x0)) * 1e-1").unwrap();
        assert!((e.eval(&[5.0], &[]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dual_evaluation_differentiates() {
        let e = Expr::parse("x0*y1 + x1").unwrap();
        let x = [Dual::constant(2.0), Dual::constant(1.0)];
        let y = [Dual::variable(3.0, 0), Dual::variable(4.0, 1)];
        let v = e.eval(&x, &y);
        assert_eq!(v.re, 9.0);
        assert_eq!(v.eps[1], 2.0);
        assert_eq!(v.eps[0], 0.0);
    }

    #[test]
    fn rejects_malformed_formulas() {
        assert!(Expr::parse("x0 +").is_err());
        assert!(Expr::parse("z3").is_err());
        assert!(Expr::parse("x0 ^ 0.5").is_err());
        assert!(Expr::parse("(x0").is_err());
        let bad = ExprLaw::new(1, &["x0+y0".into()], &["-y0".into()], None);
        assert!(bad.is_err());
        let bad = ExprLaw::new(1, &["x0+y1".into()], &["-x0".into()], None);
        assert!(bad.is_err());
    }
}
