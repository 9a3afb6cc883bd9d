//! Scalar expressions of time.
//!
//! The oscillator coefficients `a, b, c, d, f, g` are given as short formulas in
//! the single variable `t`. This module parses them into immutable trees,
//! evaluates them, and differentiates them symbolically. The grammar is closed:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          // right associative
//! primary := number | 't' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Only literal subtrees are folded; no other rewriting takes place, so the
//! domain behaviour of a derivative is the one its structure implies.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
}

impl UnaryOp {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "tan" => UnaryOp::Tan,
            "sinh" => UnaryOp::Sinh,
            "cosh" => UnaryOp::Cosh,
            "tanh" => UnaryOp::Tanh,
            "exp" => UnaryOp::Exp,
            "log" => UnaryOp::Log,
            "sqrt" => UnaryOp::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Sinh => "sinh",
            UnaryOp::Cosh => "cosh",
            UnaryOp::Tanh => "tanh",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sqrt => "sqrt",
        }
    }

    /// `None` marks a value outside the mathematical domain.
    fn apply(self, x: f64) -> Option<f64> {
        let y = match self {
            UnaryOp::Neg => -x,
            UnaryOp::Sin => x.sin(),
            UnaryOp::Cos => x.cos(),
            UnaryOp::Tan => x.tan(),
            UnaryOp::Sinh => x.sinh(),
            UnaryOp::Cosh => x.cosh(),
            UnaryOp::Tanh => x.tanh(),
            UnaryOp::Exp => x.exp(),
            UnaryOp::Log if x <= 0.0 => return None,
            UnaryOp::Log => x.ln(),
            UnaryOp::Sqrt if x < 0.0 => return None,
            UnaryOp::Sqrt => x.sqrt(),
        };
        y.is_finite().then_some(y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    pub fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }

    fn apply(self, x: f64, y: f64) -> Option<f64> {
        let z = match self {
            BinaryOp::Add => x + y,
            BinaryOp::Sub => x - y,
            BinaryOp::Mul => x * y,
            BinaryOp::Div if y == 0.0 => return None,
            BinaryOp::Div => x / y,
            BinaryOp::Pow => x.powf(y),
        };
        z.is_finite().then_some(z)
    }
}

/// Expression tree in the variable `t`.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprNode {
    Const(f64),
    Time,
    Unary(UnaryOp, Box<ExprNode>),
    Binary(BinaryOp, Box<ExprNode>, Box<ExprNode>),
}

impl ExprNode {
    pub fn constant(v: f64) -> Self {
        ExprNode::Const(v)
    }

    /// Builds a unary node, folding it when the child is a literal.
    pub fn unary(op: UnaryOp, child: ExprNode) -> Self {
        if let ExprNode::Const(v) = child {
            if let Some(y) = op.apply(v) {
                return ExprNode::Const(y);
            }
        }
        ExprNode::Unary(op, Box::new(child))
    }

    /// Builds a binary node, folding it when both children are literals.
    pub fn binary(op: BinaryOp, lhs: ExprNode, rhs: ExprNode) -> Self {
        if let (ExprNode::Const(x), ExprNode::Const(y)) = (&lhs, &rhs) {
            if let Some(z) = op.apply(*x, *y) {
                return ExprNode::Const(z);
            }
        }
        ExprNode::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// True when the subtree does not mention `t`.
    pub fn is_time_free(&self) -> bool {
        match self {
            ExprNode::Const(_) => true,
            ExprNode::Time => false,
            ExprNode::Unary(_, c) => c.is_time_free(),
            ExprNode::Binary(_, l, r) => l.is_time_free() && r.is_time_free(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            ExprNode::Const(_) | ExprNode::Time => 1,
            ExprNode::Unary(_, c) => 1 + c.depth(),
            ExprNode::Binary(_, l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    pub fn evaluate(&self, t: f64) -> Result<f64> {
        evaluate(self, t)
    }

    pub fn differentiate(&self) -> ExprNode {
        differentiate(self)
    }
}

impl fmt::Display for ExprNode {
    /// Fully parenthesised form that parses back to an identical value.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprNode::Const(v) if *v < 0.0 => write!(f, "(-{:?})", -v),
            ExprNode::Const(v) => write!(f, "{v:?}"),
            ExprNode::Time => write!(f, "t"),
            ExprNode::Unary(UnaryOp::Neg, c) => write!(f, "(-{c})"),
            ExprNode::Unary(op, c) => write!(f, "{}({c})", op.name()),
            ExprNode::Binary(op, l, r) => write!(f, "({l}{}{r})", op.symbol()),
        }
    }
}

pub fn evaluate(expr: &ExprNode, t: f64) -> Result<f64> {
    let domain = || Error::Domain {
        node: expr.to_string(),
        t,
    };
    match expr {
        ExprNode::Const(v) => Ok(*v),
        ExprNode::Time => Ok(t),
        ExprNode::Unary(op, c) => {
            let x = evaluate(c, t)?;
            op.apply(x).ok_or_else(domain)
        }
        ExprNode::Binary(op, l, r) => {
            let x = evaluate(l, t)?;
            let y = evaluate(r, t)?;
            op.apply(x, y).ok_or_else(domain)
        }
    }
}

/// Exact derivative with respect to `t`.
pub fn differentiate(expr: &ExprNode) -> ExprNode {
    use BinaryOp::*;
    use ExprNode as E;
    use UnaryOp::*;

    let c = E::constant;
    match expr {
        E::Const(_) => c(0.0),
        E::Time => c(1.0),
        E::Unary(op, u) => {
            let du = differentiate(u);
            let u = (**u).clone();
            let outer = match op {
                Neg => return E::unary(Neg, du),
                Sin => E::unary(Cos, u),
                Cos => E::unary(Neg, E::unary(Sin, u)),
                Tan => E::binary(Div, c(1.0), E::binary(Pow, E::unary(Cos, u), c(2.0))),
                Sinh => E::unary(Cosh, u),
                Cosh => E::unary(Sinh, u),
                Tanh => E::binary(Sub, c(1.0), E::binary(Pow, E::unary(Tanh, u), c(2.0))),
                Exp => E::unary(Exp, u),
                Log => E::binary(Div, c(1.0), u),
                Sqrt => E::binary(Div, c(1.0), E::binary(Mul, c(2.0), E::unary(Sqrt, u))),
            };
            E::binary(Mul, outer, du)
        }
        E::Binary(op, l, r) => {
            let dl = differentiate(l);
            let dr = differentiate(r);
            let (l, r) = ((**l).clone(), (**r).clone());
            match op {
                Add => E::binary(Add, dl, dr),
                Sub => E::binary(Sub, dl, dr),
                Mul => E::binary(
                    Add,
                    E::binary(Mul, dl, r.clone()),
                    E::binary(Mul, l, dr),
                ),
                Div => E::binary(
                    Div,
                    E::binary(
                        Sub,
                        E::binary(Mul, dl, r.clone()),
                        E::binary(Mul, l, dr),
                    ),
                    E::binary(Pow, r, c(2.0)),
                ),
                Pow if r.is_time_free() => {
                    // k u^(k-1) u'
                    let km1 = E::binary(Sub, r.clone(), c(1.0));
                    E::binary(
                        Mul,
                        E::binary(Mul, r, E::binary(Pow, l, km1)),
                        dl,
                    )
                }
                // 0^v is identically zero wherever it is defined
                Pow if l == E::Const(0.0) => c(0.0),
                Pow if l.is_time_free() => E::binary(
                    Mul,
                    E::binary(Pow, l.clone(), r),
                    E::binary(Mul, E::unary(Log, l), dr),
                ),
                Pow => {
                    // u^v (v' ln u + v u'/u)
                    let inner = E::binary(
                        Add,
                        E::binary(Mul, dr, E::unary(Log, l.clone())),
                        E::binary(Div, E::binary(Mul, r.clone(), dl), l.clone()),
                    );
                    E::binary(Mul, E::binary(Pow, l, r), inner)
                }
            }
        }
    }
}

pub fn parse(text: &str) -> Result<ExprNode> {
    if !text.is_ascii() {
        let offset = text
            .char_indices()
            .find(|(_, ch)| !ch.is_ascii())
            .map(|(i, _)| i)
            .unwrap_or(0);
        return Err(Error::Syntax {
            offset,
            message: "non-ASCII character".into(),
        });
    }
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    if p.pos == p.src.len() {
        return Err(Error::EmptyInput);
    }
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn syntax(&self, message: &str) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn expr(&mut self) -> Result<ExprNode> {
        let mut lhs = self.term()?;
        while let Some(ch @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if ch == b'+' { BinaryOp::Add } else { BinaryOp::Sub };
            lhs = ExprNode::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<ExprNode> {
        let mut lhs = self.unary()?;
        while let Some(ch @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if ch == b'*' { BinaryOp::Mul } else { BinaryOp::Div };
            lhs = ExprNode::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<ExprNode> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(ExprNode::unary(UnaryOp::Neg, inner));
        }
        self.power()
    }

    fn power(&mut self) -> Result<ExprNode> {
        let base = self.primary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(ExprNode::binary(BinaryOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<ExprNode> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.syntax("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(ch) if ch.is_ascii_digit() || ch == b'.' => self.number(),
            Some(ch) if ch.is_ascii_alphabetic() || ch == b'_' => self.identifier(),
            Some(_) => Err(self.syntax("expected a number, identifier or `(`")),
        }
    }

    fn number(&mut self) -> Result<ExprNode> {
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
            return Err(self.syntax("malformed number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = mark;
                return Err(self.syntax("malformed exponent"));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>()
            .map(ExprNode::Const)
            .map_err(|_| Error::Syntax {
                offset: start,
                message: "malformed number".into(),
            })
    }

    fn identifier(&mut self) -> Result<ExprNode> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        match name {
            "t" => return Ok(ExprNode::Time),
            "pi" => return Ok(ExprNode::Const(std::f64::consts::PI)),
            "e" => return Ok(ExprNode::Const(std::f64::consts::E)),
            _ => {}
        }
        let Some(op) = UnaryOp::from_name(name) else {
            return Err(Error::UnknownIdentifier {
                name: name.to_string(),
                offset: start,
            });
        };
        if self.peek() != Some(b'(') {
            return Err(self.syntax("expected `(` after function name"));
        }
        self.pos += 1;
        let arg = self.expr()?;
        if self.peek() != Some(b')') {
            return Err(self.syntax("expected `)`"));
        }
        self.pos += 1;
        Ok(ExprNode::unary(op, arg))
    }
}

/// Point values of all coefficients, plus `a'` and `d'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffValues {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub f: f64,
    pub g: f64,
    pub da: f64,
    pub dd: f64,
}

/// The six coefficient functions of the quadratic Hamiltonian, with the
/// derivatives of `a` and `d` generated symbolically.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub a: ExprNode,
    pub b: ExprNode,
    pub c: ExprNode,
    pub d: ExprNode,
    pub f: ExprNode,
    pub g: ExprNode,
    pub da: ExprNode,
    pub dd: ExprNode,
}

impl CoefficientSet {
    pub fn new(a: ExprNode, b: ExprNode, c: ExprNode, d: ExprNode, f: ExprNode, g: ExprNode) -> Self {
        let da = differentiate(&a);
        let dd = differentiate(&d);
        CoefficientSet { a, b, c, d, f, g, da, dd }
    }

    /// Parses `[a, b, c, d, f, g]`.
    pub fn parse(texts: [&str; 6]) -> Result<Self> {
        let [a, b, c, d, f, g] = texts.map(parse);
        Ok(Self::new(a?, b?, c?, d?, f?, g?))
    }

    pub fn at(&self, t: f64) -> Result<CoeffValues> {
        Ok(CoeffValues {
            a: self.a.evaluate(t)?,
            b: self.b.evaluate(t)?,
            c: self.c.evaluate(t)?,
            d: self.d.evaluate(t)?,
            f: self.f.evaluate(t)?,
            g: self.g.evaluate(t)?,
            da: self.da.evaluate(t)?,
            dd: self.dd.evaluate(t)?,
        })
    }
}
