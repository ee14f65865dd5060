//! Syntax trees for expressions and conditions, and their printers.
//!
//! Printing is the inverse of parsing up to whitespace: every tree the
//! parser produces prints to text that parses back to the same tree.

use std::fmt;

use henselk_core::scalar::fmt_rational;
use henselk_core::Rational;
use num_traits::Signed;

/// A polynomial expression over `Q[t]` in named variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    /// Nonnegative rational literal `p` or `p/q`.
    Num(Rational),
    T,
    Var(String),
    /// `O(t^n)`.
    BigO(i64),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
}

/// A value-group symbol: `v(expr)` or a bare variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VAtom {
    Val(Expr),
    Var(String),
}

/// `coeff·atom`, or the constant `coeff`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VMono {
    pub coeff: i128,
    pub atom: Option<VAtom>,
}

/// A linear combination of value-group symbols, kept in source order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VTerm {
    pub monos: Vec<VMono>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Eq,
    Le,
    Ge,
    Lt,
    Gt,
}

impl Cmp {
    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Eq => "=",
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Lt => "<",
            Cmp::Gt => ">",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quant {
    Exists,
    Forall,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cond {
    Bool(bool),
    Cmp(VTerm, Cmp, VTerm),
    /// `lhs === rhs mod m`.
    Cong(VTerm, VTerm, i128),
    /// `ac(expr) = q`.
    Ac(Expr, Rational),
    /// `v(expr) = inf`.
    Inf(Expr),
    Not(Box<Cond>),
    And(Vec<Cond>),
    Or(Vec<Cond>),
    Quant(Quant, String, Box<Cond>),
}

// binding strength, loosest first
const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const ATOM: u8 = 5;

impl Expr {
    fn level(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => SUM,
            Expr::Mul(..) => PRODUCT,
            Expr::Neg(_) => UNARY,
            Expr::Pow(..) => 4,
            Expr::Num(q) if q.is_negative() => UNARY,
            _ => ATOM,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.level() < min {
            f.write_str("(")?;
            self.write_at(f, 0)?;
            return f.write_str(")");
        }
        match self {
            Expr::Num(q) => f.write_str(&fmt_rational(q)),
            Expr::T => f.write_str("t"),
            Expr::Var(v) => f.write_str(v),
            Expr::BigO(n) => write!(f, "O(t^{n})"),
            Expr::Neg(e) => {
                f.write_str("-")?;
                e.write_at(f, UNARY)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                a.write_at(f, SUM)?;
                f.write_str(if matches!(self, Expr::Add(..)) {
                    " + "
                } else {
                    " - "
                })?;
                b.write_at(f, PRODUCT)
            }
            Expr::Mul(a, b) => {
                a.write_at(f, PRODUCT)?;
                f.write_str("*")?;
                b.write_at(f, UNARY)
            }
            Expr::Pow(b, k) => {
                b.write_at(f, ATOM)?;
                write!(f, "^{k}")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

impl fmt::Display for VAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VAtom::Val(e) => write!(f, "v({e})"),
            VAtom::Var(v) => f.write_str(v),
        }
    }
}

impl fmt::Display for VTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.monos.iter().enumerate() {
            let c = m.coeff.abs();
            match (i, m.coeff < 0) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            match &m.atom {
                None => write!(f, "{c}")?,
                Some(a) if c == 1 => write!(f, "{a}")?,
                Some(a) => write!(f, "{c}*{a}")?,
            }
        }
        Ok(())
    }
}

impl Cond {
    fn write_child(&self, f: &mut fmt::Formatter<'_>, wrap: bool) -> fmt::Result {
        if wrap {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cond::Bool(b) => write!(f, "{b}"),
            Cond::Cmp(l, op, r) => write!(f, "{l} {} {r}", op.symbol()),
            Cond::Cong(l, r, m) => write!(f, "{l} === {r} mod {m}"),
            Cond::Ac(e, q) => write!(f, "ac({e}) = {}", fmt_rational(q)),
            Cond::Inf(e) => write!(f, "v({e}) = inf"),
            Cond::Not(c) => write!(f, "!({c})"),
            Cond::And(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" & ")?;
                    }
                    c.write_child(f, matches!(c, Cond::And(_) | Cond::Or(_) | Cond::Quant(..)))?;
                }
                Ok(())
            }
            Cond::Or(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    c.write_child(f, matches!(c, Cond::Or(_) | Cond::Quant(..)))?;
                }
                Ok(())
            }
            Cond::Quant(q, v, body) => {
                let kw = match q {
                    Quant::Exists => "exists",
                    Quant::Forall => "forall",
                };
                write!(f, "{kw} {v}. ({body})")
            }
        }
    }
}
