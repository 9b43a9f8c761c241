//! Arithmetic expressions for right-hand sides `f(x, y, p)`.
//!
//! Grammar (whitespace insensitive):
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := primary ('^' unary)?          exponent must fold to an integer in [0, 12]
//! primary  := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` binds tighter than unary minus, so `-p^2` is `-(p^2)`, and is right
//! associative (`2^1^3` is `2^(1^3)`). Identifiers `x`, `y`, `p` are the
//! variables, `pi` is a constant, `sin cos tan sec exp log sqrt` are functions
//! and any other identifier is a parameter bound at evaluation time.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::jet::{Jet, Var};

/// Largest exponent accepted after `^`.
pub const MAX_EXPONENT: u32 = 12;
const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Sec,
    Exp,
    Log,
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Constant(f64),
    Variable(Var),
    Parameter(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl UnaryOp {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "tan" => UnaryOp::Tan,
            "sec" => UnaryOp::Sec,
            "exp" => UnaryOp::Exp,
            "log" => UnaryOp::Log,
            "sqrt" => UnaryOp::Sqrt,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Sec => "sec",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sqrt => "sqrt",
        }
    }
}

/// Numbers an [`Expr`] can be evaluated over.
pub trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    fn constant(v: f64) -> Self;
    fn variable(var: Var, v: f64) -> Self;
    fn div(self, rhs: Self) -> Result<Self>;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Result<Self>;
    fn sec(self) -> Result<Self>;
    fn exp(self) -> Self;
    fn ln(self) -> Result<Self>;
    fn sqrt(self) -> Result<Self>;
    fn powi(self, n: u32) -> Self;
}

impl Scalar for f64 {
    fn constant(v: f64) -> Self {
        v
    }
    fn variable(_: Var, v: f64) -> Self {
        v
    }
    fn div(self, rhs: Self) -> Result<Self> {
        if rhs == 0.0 || !rhs.is_finite() {
            return Err(Error::Domain(format!("division by {rhs}")));
        }
        Ok(self / rhs)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Result<Self> {
        Scalar::div(f64::sin(self), f64::cos(self))
    }
    fn sec(self) -> Result<Self> {
        Scalar::div(1.0, f64::cos(self))
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Result<Self> {
        if !(self > 0.0) {
            return Err(Error::Domain(format!("log of non-positive value {self}")));
        }
        Ok(f64::ln(self))
    }
    fn sqrt(self) -> Result<Self> {
        if !(self > 0.0) {
            return Err(Error::Domain(format!("sqrt of non-positive value {self}")));
        }
        Ok(f64::sqrt(self))
    }
    fn powi(self, n: u32) -> Self {
        f64::powi(self, n as i32)
    }
}

impl Scalar for Jet {
    fn constant(v: f64) -> Self {
        Jet::constant(v)
    }
    fn variable(var: Var, v: f64) -> Self {
        Jet::variable(var, v)
    }
    fn div(self, rhs: Self) -> Result<Self> {
        self.checked_div(&rhs)
    }
    fn sin(self) -> Self {
        Jet::sin(&self)
    }
    fn cos(self) -> Self {
        Jet::cos(&self)
    }
    fn tan(self) -> Result<Self> {
        Jet::tan(&self)
    }
    fn sec(self) -> Result<Self> {
        Jet::sec(&self)
    }
    fn exp(self) -> Self {
        Jet::exp(&self)
    }
    fn ln(self) -> Result<Self> {
        Jet::ln(&self)
    }
    fn sqrt(self) -> Result<Self> {
        Jet::sqrt(&self)
    }
    fn powi(self, n: u32) -> Self {
        Jet::powi(&self, n)
    }
}

impl Expr {
    pub fn parse(source: &str) -> Result<Expr> {
        parse(source)
    }

    /// Evaluates the tree with `x, y, p` seeded as independent variables.
    pub fn eval<S: Scalar>(&self, x: f64, y: f64, p: f64, params: &BTreeMap<String, f64>) -> Result<S> {
        let vars = [S::variable(Var::X, x), S::variable(Var::Y, y), S::variable(Var::P, p)];
        self.eval_with(&vars, params)
    }

    fn eval_with<S: Scalar>(&self, vars: &[S; 3], params: &BTreeMap<String, f64>) -> Result<S> {
        Ok(match self {
            Expr::Constant(v) => S::constant(*v),
            Expr::Variable(Var::X) => vars[0],
            Expr::Variable(Var::Y) => vars[1],
            Expr::Variable(Var::P) => vars[2],
            Expr::Parameter(name) => {
                S::constant(*params.get(name).ok_or_else(|| Error::UnboundParameter { name: name.clone() })?)
            }
            Expr::Unary(op, a) => {
                let a = a.eval_with(vars, params)?;
                match op {
                    UnaryOp::Neg => -a,
                    UnaryOp::Sin => a.sin(),
                    UnaryOp::Cos => a.cos(),
                    UnaryOp::Tan => a.tan()?,
                    UnaryOp::Sec => a.sec()?,
                    UnaryOp::Exp => a.exp(),
                    UnaryOp::Log => a.ln()?,
                    UnaryOp::Sqrt => a.sqrt()?,
                }
            }
            Expr::Binary(op, a, b) => {
                let a = a.eval_with(vars, params)?;
                let b = b.eval_with(vars, params)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => a.div(b)?,
                }
            }
            Expr::Pow(a, n) => a.eval_with(vars, params)?.powi(*n),
        })
    }

    /// Names of all parameters referenced by the tree.
    pub fn parameters(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_parameters(&mut out);
        out
    }

    fn collect_parameters(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Parameter(name) => {
                out.insert(name.clone());
            }
            Expr::Unary(_, a) | Expr::Pow(a, _) => a.collect_parameters(out),
            Expr::Binary(_, a, b) => {
                a.collect_parameters(out);
                b.collect_parameters(out);
            }
            Expr::Constant(_) | Expr::Variable(_) => {}
        }
    }

    fn is_closed_constant(&self) -> bool {
        match self {
            Expr::Constant(_) => true,
            Expr::Variable(_) | Expr::Parameter(_) => false,
            Expr::Unary(_, a) | Expr::Pow(a, _) => a.is_closed_constant(),
            Expr::Binary(_, a, b) => a.is_closed_constant() && b.is_closed_constant(),
        }
    }
}

/// Fully parenthesised form; re-parses to an identical tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Constant(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => {
                write!(f, "(-{:?})", -v)
            }
            Expr::Constant(v) => write!(f, "{v:?}"),
            Expr::Variable(Var::X) => f.write_str("x"),
            Expr::Variable(Var::Y) => f.write_str("y"),
            Expr::Variable(Var::P) => f.write_str("p"),
            Expr::Parameter(name) => f.write_str(name),
            Expr::Unary(UnaryOp::Neg, a) => write!(f, "(-{a})"),
            Expr::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Expr::Binary(op, a, b) => {
                let sym = match op {
                    BinaryOp::Add => '+',
                    BinaryOp::Sub => '-',
                    BinaryOp::Mul => '*',
                    BinaryOp::Div => '/',
                };
                write!(f, "({a} {sym} {b})")
            }
            Expr::Pow(a, n) => write!(f, "({a}^{n})"),
        }
    }
}

/// Parses `source` into an expression tree.
pub fn parse(source: &str) -> Result<Expr> {
    let mut parser = Parser { src: source.as_bytes(), pos: 0, depth: 0 };
    parser.skip_ws();
    if parser.pos >= parser.src.len() {
        return Err(parser.error("empty expression"));
    }
    let expr = parser.expr()?;
    parser.skip_ws();
    if parser.pos < parser.src.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(expr)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    depth: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Syntax { offset: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn enter(&mut self) -> Result<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error("expression nested too deeply"));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr> {
        self.enter()?;
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == b'+' { BinaryOp::Add } else { BinaryOp::Sub };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == b'*' { BinaryOp::Mul } else { BinaryOp::Div };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        self.enter()?;
        let out = if self.peek() == Some(b'-') {
            self.pos += 1;
            Expr::Unary(UnaryOp::Neg, Box::new(self.unary()?))
        } else {
            self.power()?
        };
        self.depth -= 1;
        Ok(out)
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        let exp_offset = self.pos;
        let exponent = self.unary()?;
        let bad = || Error::Syntax {
            offset: exp_offset,
            message: format!("exponent must be an integer constant in [0, {MAX_EXPONENT}]"),
        };
        if !exponent.is_closed_constant() {
            return Err(bad());
        }
        let value: f64 = exponent.eval(0.0, 0.0, 0.0, &BTreeMap::new()).map_err(|_| bad())?;
        if value.fract() != 0.0 || !(0.0..=MAX_EXPONENT as f64).contains(&value) {
            return Err(bad());
        }
        Ok(Expr::Pow(Box::new(base), value as u32))
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(_) => Err(self.error("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            self.pos = start;
            return Err(self.error("malformed number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
                return Err(self.error("malformed exponent"));
            }
        }
        // The slice is pure ASCII by construction.
        let text = std::str::from_utf8(&self.src[start..self.pos]).map_err(|_| self.error("malformed number"))?;
        let value: f64 =
            text.parse().map_err(|_| Error::Syntax { offset: start, message: format!("malformed number `{text}`") })?;
        if !value.is_finite() {
            return Err(Error::Syntax { offset: start, message: "number out of range".into() });
        }
        Ok(Expr::Constant(value))
    }

    fn identifier(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        let name =
            std::str::from_utf8(&self.src[start..self.pos]).map_err(|_| self.error("invalid identifier"))?.to_string();
        if self.peek() == Some(b'(') {
            let op = UnaryOp::from_name(&name).ok_or(Error::UnknownIdentifier { name: name.clone() })?;
            self.pos += 1;
            let arg = self.expr()?;
            if self.peek() != Some(b')') {
                return Err(self.error("expected `)` after function argument"));
            }
            self.pos += 1;
            return Ok(Expr::Unary(op, Box::new(arg)));
        }
        if UnaryOp::from_name(&name).is_some() {
            return Err(Error::Syntax { offset: start, message: format!("function `{name}` needs an argument") });
        }
        Ok(match name.as_str() {
            "x" => Expr::Variable(Var::X),
            "y" => Expr::Variable(Var::Y),
            "p" => Expr::Variable(Var::P),
            "pi" => Expr::Constant(std::f64::consts::PI),
            _ => Expr::Parameter(name),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(src: &str, x: f64, y: f64, p: f64) -> f64 {
        parse(src).unwrap().eval(x, y, p, &BTreeMap::new()).unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("1 - 2 - 3", 0., 0., 0.), -4.0);
        assert_eq!(eval("8 / 4 / 2", 0., 0., 0.), 1.0);
        assert_eq!(eval("2 + 3 * 4", 0., 0., 0.), 14.0);
        assert_eq!(eval("-p^2", 0., 0., 3.0), -9.0);
        assert_eq!(eval("(-p)^2", 0., 0., 3.0), 9.0);
        assert_eq!(eval("2^3^0", 0., 0., 0.), 2.0);
        assert_eq!(eval("2^(1+2)", 0., 0., 0.), 8.0);
        assert_eq!(eval(" ( x*p - y ) ^ 3 ", 1.0, 0.0, 1.0), 1.0);
    }

    #[test]
    fn hooke_expression() {
        let e = parse("(x*p - y)^3").unwrap();
        assert_eq!(e.eval::<f64>(2.0, 1.0, 3.0, &BTreeMap::new()).unwrap(), 125.0);
    }

    #[test]
    fn zero_is_constant() {
        assert_eq!(parse("0").unwrap(), Expr::Constant(0.0));
    }

    #[test]
    fn parameters_are_collected() {
        let e = parse("p^4 + a*sin(x) + b").unwrap();
        let names: Vec<_> = e.parameters().into_iter().collect();
        assert_eq!(names, ["a", "b"]);
        let mut params = BTreeMap::new();
        params.insert("a".to_string(), 0.0);
        params.insert("b".to_string(), 0.0);
        let v: f64 = e.eval(0.0, 0.0, 1.0, &params).unwrap();
        assert_eq!(v, 1.0);
        params.remove("b");
        assert_eq!(e.eval::<f64>(0.0, 0.0, 1.0, &params), Err(Error::UnboundParameter { name: "b".into() }));
    }

    #[test]
    fn errors_carry_offsets() {
        assert!(matches!(parse("p^13"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("p^x"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("p^0.5"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("p^-1"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("1 +"), Err(Error::Syntax { offset: 3, .. })));
        assert!(matches!(parse("(1"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("1 2"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse(""), Err(Error::Syntax { offset: 0, .. })));
        assert!(matches!(parse("   "), Err(Error::Syntax { .. })));
        assert!(matches!(parse("sin"), Err(Error::Syntax { offset: 0, .. })));
        assert!(matches!(parse("1e"), Err(Error::Syntax { .. })));
        assert_eq!(parse("foo(x)"), Err(Error::UnknownIdentifier { name: "foo".into() }));
    }

    #[test]
    fn deep_nesting_is_rejected_not_overflowed() {
        let src = "(".repeat(3000) + "1" + &")".repeat(3000);
        assert!(matches!(parse(&src), Err(Error::Syntax { .. })));
        let src = "-".repeat(3000) + "1";
        assert!(matches!(parse(&src), Err(Error::Syntax { .. })));
    }

    #[test]
    fn display_reparses_to_same_tree() {
        for src in ["(x*p-y)^3", "-p^2 + 1e-3*sec(y)/2", "sqrt(exp(x)+pi) - log(2)", "a - -b"] {
            let e = parse(src).unwrap();
            assert_eq!(parse(&e.to_string()).unwrap(), e, "{src} -> {e}");
        }
    }
}
