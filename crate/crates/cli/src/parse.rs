//! Lexer and recursive-descent parser for expressions and conditions.

use std::collections::BTreeSet;
use std::fmt;

use henselk_core::Rational;
use num_bigint::BigInt;
use num_traits::Zero;

use crate::ast::{Cmp, Cond, Expr, Quant, VAtom, VMono, VTerm};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub expected: BTreeSet<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let exp: Vec<&str> = self.expected.iter().map(String::as_str).collect();
        write!(
            f,
            "line {}, column {}: expected {}, found {}",
            self.line,
            self.column,
            exp.join(" or "),
            self.found
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(n) => write!(f, "integer {n}"),
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Sym(s) => write!(f, "'{s}'"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

// longest first
const SYMBOLS: [&str; 18] = [
    "===", "<=", ">=", "+", "-", "*", "^", "/", "(", ")", ".", ",", "&", "|", "!", "=", "<", ">",
];

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let mut out = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = (line, col);
        let tok = if c.is_ascii_digit() {
            let s: String = chars[i..]
                .iter()
                .take_while(|c| c.is_ascii_digit())
                .collect();
            i += s.len();
            col += s.len();
            Tok::Int(s.parse().expect("digits"))
        } else if c.is_alphabetic() || c == '_' {
            let s: String = chars[i..]
                .iter()
                .take_while(|c| c.is_alphanumeric() || **c == '_' || **c == '\'')
                .collect();
            i += s.chars().count();
            col += s.chars().count();
            Tok::Ident(s)
        } else {
            let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
            let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(*s)) else {
                return Err(ParseError {
                    line,
                    column: col,
                    expected: ["a token".to_string()].into(),
                    found: format!("'{c}'"),
                });
            };
            i += sym.len();
            col += sym.len();
            Tok::Sym(sym)
        };
        out.push(Token {
            tok,
            line: start.0,
            column: start.1,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

fn is_keyword(s: &str) -> bool {
    matches!(s, "t" | "inf" | "mod" | "true" | "false")
}

impl Parser {
    fn new(src: &str) -> PResult<Self> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(ParseError {
            line: t.line,
            column: t.column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.tok.to_string(),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        let hit = self.is_sym(s);
        if hit {
            self.bump();
        }
        hit
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(&[&format!("'{s}'")])
        }
    }

    fn expect_ident(&mut self, s: &str) -> PResult<()> {
        if self.is_ident(s) {
            self.bump();
            Ok(())
        } else {
            self.error(&[&format!("'{s}'")])
        }
    }

    fn expect_eof(&self) -> PResult<()> {
        match self.peek() {
            Tok::Eof => Ok(()),
            _ => self.error(&["end of input"]),
        }
    }

    fn integer(&mut self) -> PResult<BigInt> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.error(&["integer"]),
        }
    }

    fn small_int<T: TryFrom<BigInt>>(&mut self) -> PResult<T> {
        let save = self.pos;
        let n = self.integer()?;
        T::try_from(n).or_else(|_| {
            self.pos = save;
            self.error(&["integer of machine size"])
        })
    }

    fn signed_int<T: TryFrom<BigInt>>(&mut self) -> PResult<T> {
        let save = self.pos;
        let neg = self.eat_sym("-");
        let n = self.integer()?;
        T::try_from(if neg { -n } else { n }).or_else(|_| {
            self.pos = save;
            self.error(&["integer of machine size"])
        })
    }

    fn rational(&mut self) -> PResult<Rational> {
        let neg = self.eat_sym("-");
        let p = self.integer()?;
        let q = if self.eat_sym("/") {
            let save = self.pos;
            let q = self.integer()?;
            if q.is_zero() {
                self.pos = save;
                return self.error(&["nonzero denominator"]);
            }
            q
        } else {
            BigInt::from(1)
        };
        let r = Rational::new(p, q);
        Ok(if neg { -r } else { r })
    }

    // expressions

    fn expr(&mut self) -> PResult<Expr> {
        let mut acc = self.product()?;
        loop {
            if self.eat_sym("+") {
                acc = Expr::Add(Box::new(acc), Box::new(self.product()?));
            } else if self.eat_sym("-") {
                acc = Expr::Sub(Box::new(acc), Box::new(self.product()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> PResult<Expr> {
        let mut acc = self.unary()?;
        while self.eat_sym("*") {
            acc = Expr::Mul(Box::new(acc), Box::new(self.unary()?));
        }
        Ok(acc)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_sym("-") {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Expr> {
        let base = self.atom()?;
        if self.eat_sym("^") {
            let k = self.signed_int::<i64>()?;
            return Ok(Expr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Int(_) => {
                let p = self.integer()?;
                if self.is_sym("/") && matches!(self.peek_at(1), Tok::Int(_)) {
                    self.bump();
                    let save = self.pos;
                    let q = self.integer()?;
                    if q.is_zero() {
                        self.pos = save;
                        return self.error(&["nonzero denominator"]);
                    }
                    return Ok(Expr::Num(Rational::new(p, q)));
                }
                Ok(Expr::Num(Rational::from_integer(p)))
            }
            Tok::Ident(s) if s == "t" => {
                self.bump();
                Ok(Expr::T)
            }
            Tok::Ident(s) if s == "O" && matches!(self.peek_at(1), Tok::Sym("(")) => {
                self.bump();
                self.bump();
                self.expect_ident("t")?;
                let n = if self.eat_sym("^") {
                    self.signed_int::<i64>()?
                } else {
                    1
                };
                self.expect_sym(")")?;
                Ok(Expr::BigO(n))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(Expr::Var(s))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            _ => self.error(&["expression"]),
        }
    }

    // value-group terms

    fn vterm(&mut self) -> PResult<VTerm> {
        let mut sign = if self.eat_sym("-") { -1 } else { 1 };
        let mut monos = Vec::new();
        loop {
            let mut m = self.vmono()?;
            m.coeff *= sign;
            monos.push(m);
            sign = if self.eat_sym("+") {
                1
            } else if self.eat_sym("-") {
                -1
            } else {
                return Ok(VTerm { monos });
            };
        }
    }

    fn vmono(&mut self) -> PResult<VMono> {
        if let Tok::Int(_) = self.peek() {
            let c = self.small_int::<i128>()?;
            if self.eat_sym("*") {
                return Ok(VMono {
                    coeff: c,
                    atom: Some(self.vatom()?),
                });
            }
            return Ok(VMono {
                coeff: c,
                atom: None,
            });
        }
        Ok(VMono {
            coeff: 1,
            atom: Some(self.vatom()?),
        })
    }

    fn vatom(&mut self) -> PResult<VAtom> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "v" && matches!(self.peek_at(1), Tok::Sym("(")) => {
                self.bump();
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(VAtom::Val(e))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(VAtom::Var(s))
            }
            _ => self.error(&["'v('", "integer", "variable"]),
        }
    }

    // conditions

    fn cond(&mut self) -> PResult<Cond> {
        let mut items = vec![self.conj()?];
        while self.eat_sym("|") {
            items.push(self.conj()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Cond::Or(items)
        })
    }

    fn conj(&mut self) -> PResult<Cond> {
        let mut items = vec![self.unary_cond()?];
        while self.eat_sym("&") {
            items.push(self.unary_cond()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Cond::And(items)
        })
    }

    fn quantifier(&self) -> Option<Quant> {
        let Tok::Ident(kw) = self.peek() else {
            return None;
        };
        let q = match kw.as_str() {
            "exists" | "E" => Quant::Exists,
            "forall" | "A" => Quant::Forall,
            _ => return None,
        };
        let binds = matches!(self.peek_at(1), Tok::Ident(v) if !is_keyword(v))
            && matches!(self.peek_at(2), Tok::Sym("."));
        binds.then_some(q)
    }

    fn unary_cond(&mut self) -> PResult<Cond> {
        if self.eat_sym("!") {
            return Ok(Cond::Not(Box::new(self.unary_cond()?)));
        }
        if let Some(q) = self.quantifier() {
            self.bump();
            let Tok::Ident(v) = self.bump() else {
                unreachable!()
            };
            self.bump();
            return Ok(Cond::Quant(q, v, Box::new(self.cond()?)));
        }
        if self.eat_sym("(") {
            let c = self.cond()?;
            self.expect_sym(")")?;
            return Ok(c);
        }
        self.catom()
    }

    fn catom(&mut self) -> PResult<Cond> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                return Ok(Cond::Bool(s == "true"));
            }
            Tok::Ident(s) if s == "ac" && matches!(self.peek_at(1), Tok::Sym("(")) => {
                self.bump();
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                self.expect_sym("=")?;
                let q = self.rational()?;
                return Ok(Cond::Ac(e, q));
            }
            _ => {}
        }
        let start = self.pos;
        let lhs = self.vterm().map_err(|mut e| {
            if self.pos == start {
                e.expected
                    .extend(["'!'", "'('", "'ac('", "condition"].map(String::from));
            }
            e
        })?;
        if self.eat_sym("===") {
            let rhs = self.vterm()?;
            self.expect_ident("mod")?;
            let save = self.pos;
            let m = self.small_int::<i128>()?;
            if m <= 0 {
                self.pos = save;
                return self.error(&["positive modulus"]);
            }
            return Ok(Cond::Cong(lhs, rhs, m));
        }
        let op = match self.peek() {
            Tok::Sym("=") => Cmp::Eq,
            Tok::Sym("<=") => Cmp::Le,
            Tok::Sym(">=") => Cmp::Ge,
            Tok::Sym("<") => Cmp::Lt,
            Tok::Sym(">") => Cmp::Gt,
            _ => return self.error(&["'='", "'<='", "'>='", "'<'", "'>'", "'==='", "'+'", "'-'"]),
        };
        self.bump();
        if self.is_ident("inf") {
            if let (
                Cmp::Eq,
                [VMono {
                    coeff: 1,
                    atom: Some(VAtom::Val(e)),
                }],
            ) = (op, &lhs.monos[..])
            {
                self.bump();
                return Ok(Cond::Inf(e.clone()));
            }
            return self.error(&["value-group term"]);
        }
        Ok(Cond::Cmp(lhs, op, self.vterm()?))
    }
}

pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

pub fn parse_cond(src: &str) -> Result<Cond, ParseError> {
    let mut p = Parser::new(src)?;
    let c = p.cond()?;
    p.expect_eof()?;
    Ok(c)
}

pub fn parse_vterm(src: &str) -> Result<VTerm, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.vterm()?;
    p.expect_eof()?;
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Parsed {
    Expr(Expr),
    Cond(Cond),
}

/// A condition if the text reads as one, else an expression; on failure the
/// error that got further into the input.
pub fn parse_any(src: &str) -> Result<Parsed, ParseError> {
    let c = match parse_cond(src) {
        Ok(c) => return Ok(Parsed::Cond(c)),
        Err(e) => e,
    };
    let e = match parse_expr(src) {
        Ok(e) => return Ok(Parsed::Expr(e)),
        Err(e) => e,
    };
    Err(if (e.line, e.column) > (c.line, c.column) {
        e
    } else {
        c
    })
}

/// Comma-separated expressions.
pub fn parse_tuple(src: &str) -> Result<Vec<Expr>, ParseError> {
    let mut p = Parser::new(src)?;
    let mut out = vec![p.expr()?];
    while p.eat_sym(",") {
        out.push(p.expr()?);
    }
    p.expect_eof()?;
    Ok(out)
}
