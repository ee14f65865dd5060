//! Structured views of syntax trees and the plain-text output format.

use henselk_core::scalar::fmt_rational;
use serde_json::{json, Value};

use crate::ast::{Cond, Expr, Quant, VAtom, VTerm};
use crate::parse::Parsed;

fn expr(e: &Expr) -> Value {
    match e {
        Expr::Num(q) => json!({ "num": fmt_rational(q) }),
        Expr::T => json!("t"),
        Expr::Var(v) => json!({ "var": v }),
        Expr::BigO(n) => json!({ "big_o": n }),
        Expr::Neg(a) => json!({ "neg": expr(a) }),
        Expr::Add(a, b) => json!({ "add": [expr(a), expr(b)] }),
        Expr::Sub(a, b) => json!({ "sub": [expr(a), expr(b)] }),
        Expr::Mul(a, b) => json!({ "mul": [expr(a), expr(b)] }),
        Expr::Pow(a, k) => json!({ "pow": [expr(a), k] }),
    }
}

fn vterm(t: &VTerm) -> Value {
    Value::Array(
        t.monos
            .iter()
            .map(|m| {
                let atom = match &m.atom {
                    None => Value::Null,
                    Some(VAtom::Val(e)) => json!({ "v": expr(e) }),
                    Some(VAtom::Var(v)) => json!({ "var": v }),
                };
                json!({ "coeff": m.coeff.to_string(), "atom": atom })
            })
            .collect(),
    )
}

fn cond(c: &Cond) -> Value {
    match c {
        Cond::Bool(b) => json!(b),
        Cond::Cmp(l, op, r) => json!({ "cmp": op.symbol(), "lhs": vterm(l), "rhs": vterm(r) }),
        Cond::Cong(l, r, m) => json!({ "cong": m.to_string(), "lhs": vterm(l), "rhs": vterm(r) }),
        Cond::Ac(e, q) => json!({ "ac": expr(e), "value": fmt_rational(q) }),
        Cond::Inf(e) => json!({ "zero": expr(e) }),
        Cond::Not(a) => json!({ "not": cond(a) }),
        Cond::And(cs) => json!({ "and": cs.iter().map(cond).collect::<Vec<_>>() }),
        Cond::Or(cs) => json!({ "or": cs.iter().map(cond).collect::<Vec<_>>() }),
        Cond::Quant(q, v, b) => {
            let k = match q {
                Quant::Exists => "exists",
                Quant::Forall => "forall",
            };
            json!({ k: v, "body": cond(b) })
        }
    }
}

pub fn ast_json(p: &Parsed) -> Value {
    match p {
        Parsed::Expr(e) => expr(e),
        Parsed::Cond(c) => cond(c),
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a)
            if a.iter()
                .all(|x| matches!(x, Value::Number(_) | Value::String(_))) =>
        {
            Some(format!(
                "[{}]",
                a.iter().filter_map(scalar).collect::<Vec<_>>().join(", ")
            ))
        }
        _ => None,
    }
}

fn write_text(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) => {
            let width = m.keys().map(String::len).max().unwrap_or(0);
            for (k, x) in m {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}{k:width$}  {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}\n"));
                        write_text(x, indent + 1, out);
                    }
                }
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}[{i}] {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}[{i}]\n"));
                        write_text(x, indent + 1, out);
                    }
                }
            }
        }
        x => out.push_str(&format!("{pad}{}\n", scalar(x).unwrap_or_default())),
    }
}

/// Aligned `key  value` lines, nested records indented.
pub fn text(v: &Value) -> String {
    let mut out = String::new();
    write_text(v, 0, &mut out);
    out
}
