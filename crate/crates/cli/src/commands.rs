//! Subcommands: argument parsing, dispatch and JSON records.

use clap::{Parser, Subcommand, ValueEnum};
use henselk_core::arcs::{anisotropic_form, loja_exponent, select_arc, ArcSource};
use henselk_core::closedness::{
    construct_closure_point, fiber_shrink, is_in_closure, ClosureOutcome, ShrinkResult,
    TraceOutcome,
};
use henselk_core::hensel::{
    hensel_decompose, hensel_lift, newton_polygon, puiseux_expand_with, Branch, Limit,
};
use henselk_core::numberfield::DEFAULT_DEGREE_CAP;
use henselk_core::presburger::{
    extremum, find_ray, find_ray_in, qe, sat, Direction, Extremum, Formula, Int, Point, RayResult,
    SatResult,
};
use henselk_core::scalar::{fmt_rational, int};
use henselk_core::{Precision, Series, ValResult};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::ast::Cond;
use crate::convert::{self, ConvertError};
use crate::parse::{
    parse_any, parse_cond, parse_expr, parse_tuple, parse_vterm, ParseError, Parsed,
};
use crate::render;

#[derive(Parser, Debug)]
#[command(name = "henselk", version, about = "Exact computation in Q((t))")]
pub struct Cli {
    /// Working precision in powers of t.
    #[arg(long, global = true, env = "HENSELK_PRECISION", default_value_t = 32)]
    pub precision: i64,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Largest number field degree.
    #[arg(long = "degree-cap", global = true, default_value_t = DEFAULT_DEGREE_CAP)]
    pub degree_cap: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Dir {
    Sup,
    Inf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Auto,
    Expr,
    Cond,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Eliminate the quantifiers of a Presburger formula.
    Qe { formula: String },
    /// Satisfiability with a witness.
    Sat { formula: String },
    /// Supremum or infimum of a linear term over a formula.
    Extremum {
        formula: String,
        objective: String,
        #[arg(long, value_enum, default_value_t = Dir::Sup)]
        direction: Dir,
    },
    /// A semi-line with positive direction inside a set.
    Ray {
        formula: String,
        /// Coordinate order, comma separated.
        #[arg(long)]
        vars: Option<String>,
    },
    /// Lift a simple residue root of a polynomial in y over K.
    HenselLift {
        poly: String,
        #[arg(long)]
        root: String,
    },
    /// Split a polynomial in y along the factorization of its residue.
    HenselDecompose { poly: String },
    /// Newton polygon of a polynomial in x and y.
    Polygon { poly: String },
    /// Puiseux branches at x = 0.
    Puiseux {
        poly: String,
        #[arg(long, default_value_t = 16)]
        order: i64,
    },
    /// Limits of the branches at x = 0.
    Limits { poly: String },
    /// A point in the closure of a cell union accumulating at x = 0.
    Closure {
        set: String,
        #[arg(short = 'N', default_value_t = 16)]
        n: i64,
    },
    /// A ray of valuation vectors along which a set shrinks to the origin.
    Shrink { set: String },
    /// Closure membership of a point given as comma-separated series.
    Member {
        set: String,
        point: String,
        #[arg(short = 'N', default_value_t = 16)]
        n: i64,
    },
    /// An arc inside a plane set through a point.
    Arc {
        set: String,
        #[arg(long, default_value_t = 16)]
        order: i64,
        /// Target point `a, b`.
        #[arg(long, default_value = "0, 0")]
        at: String,
    },
    /// Lojasiewicz exponent with a division certificate.
    Loja { f: String, g: String },
    /// A form in r variables whose only zero is the origin.
    Gform {
        r: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Parse and pretty-print an expression or condition.
    Parse {
        text: String,
        #[arg(long, value_enum, default_value_t = Kind::Auto)]
        kind: Kind,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Qe { .. } => "qe",
            Command::Sat { .. } => "sat",
            Command::Extremum { .. } => "extremum",
            Command::Ray { .. } => "ray",
            Command::HenselLift { .. } => "hensel-lift",
            Command::HenselDecompose { .. } => "hensel-decompose",
            Command::Polygon { .. } => "polygon",
            Command::Puiseux { .. } => "puiseux",
            Command::Limits { .. } => "limits",
            Command::Closure { .. } => "closure",
            Command::Shrink { .. } => "shrink",
            Command::Member { .. } => "member",
            Command::Arc { .. } => "arc",
            Command::Loja { .. } => "loja",
            Command::Gform { .. } => "gform",
            Command::Parse { .. } => "parse",
        }
    }
}

/// A failed command: the error kind is the name of the error case.
#[derive(Debug)]
pub struct Failure {
    pub kind: String,
    pub message: String,
    pub usage: bool,
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure {
            kind: "ParseError".into(),
            message: e.to_string(),
            usage: true,
        }
    }
}

/// Innermost variant name in a `Debug` rendering, looking through
/// transparent wrappers such as `Hensel(Field(..))`.
pub fn error_kind(debug: &str) -> String {
    let mut s = debug;
    loop {
        let name: String = s
            .chars()
            .take_while(|c| c.is_alphanumeric() || *c == '_')
            .collect();
        let rest = &s[name.len()..];
        match rest.strip_prefix('(') {
            Some(inner) if inner.starts_with(|c: char| c.is_ascii_uppercase()) => s = inner,
            _ => return name,
        }
    }
}

fn domain<E: std::fmt::Debug + std::fmt::Display>(e: E) -> Failure {
    Failure {
        kind: error_kind(&format!("{e:?}")),
        message: e.to_string(),
        usage: false,
    }
}

impl From<ConvertError> for Failure {
    fn from(e: ConvertError) -> Self {
        domain(e)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        kind: "UsageError".into(),
        message: msg.into(),
        usage: true,
    }
}

pub fn int_json(n: Int) -> Value {
    match i64::try_from(n) {
        Ok(k) => json!(k),
        Err(_) => json!(n.to_string()),
    }
}

fn point_json(p: &Point) -> Value {
    Value::Object(p.iter().map(|(k, v)| (k.clone(), int_json(*v))).collect())
}

fn ints(v: &[Int]) -> Value {
    Value::Array(v.iter().map(|n| int_json(*n)).collect())
}

fn valuation_json(v: ValResult) -> Value {
    match v {
        ValResult::Finite(k) => json!(k),
        ValResult::Infinity => json!("inf"),
        ValResult::AtLeastPrecision(p) => json!(format!(">= {p}")),
    }
}

fn precision_json(p: Precision) -> Value {
    match p {
        Precision::At(n) => json!(n),
        Precision::Exact => json!("exact"),
    }
}

fn condition(text: &str) -> Result<Cond, Failure> {
    Ok(parse_cond(text)?)
}

fn formula(text: &str) -> Result<Formula, Failure> {
    Ok(convert::formula(&condition(text)?)?)
}

fn branch_json(b: &Branch) -> Value {
    json!({
        "q": b.ram_index,
        "x_scale": b.x_scale.to_string(),
        "series": b.series.to_string_in("s"),
        "limit": b.limit.to_string(),
        "field": b.field.as_ref().map(|k| k.min_poly().to_string_in(k.generator_name())),
        "k_rational": b.is_k_rational,
        "multiplicity": b.multiplicity,
        "slope_line": b.slope_line.to_string(),
    })
}

fn run_command(cli: &Cli) -> Result<Value, Failure> {
    let prec = cli.precision;
    if prec < 1 {
        return Err(usage("--precision must be positive"));
    }
    Ok(match &cli.command {
        Command::Qe { formula: text } => {
            let f = formula(text)?;
            json!({ "input": f.to_string(), "result": qe(&f).to_string() })
        }
        Command::Sat { formula: text } => match sat(&formula(text)?) {
            SatResult::Sat(p) => json!({ "sat": true, "witness": point_json(&p) }),
            SatResult::Unsat => json!({ "sat": false, "witness": null }),
        },
        Command::Extremum {
            formula: text,
            objective,
            direction,
        } => {
            let f = formula(text)?;
            let obj = convert::linterm(&parse_vterm(objective)?)?;
            let mode = match direction {
                Dir::Sup => Direction::Sup,
                Dir::Inf => Direction::Inf,
            };
            match extremum(&f, &obj, mode) {
                Extremum::Empty => json!({ "result": "empty" }),
                Extremum::Finite { value, witness } => json!({
                    "result": "finite",
                    "value": int_json(value),
                    "witness": point_json(&witness),
                }),
                Extremum::Unbounded { certificate, vars } => json!({
                    "result": "unbounded",
                    "vars": vars,
                    "certificate": certificate.map(|l| json!({
                        "base": ints(&l.base),
                        "direction": ints(&l.direction),
                        "step": int_json(l.step),
                    })),
                }),
            }
        }
        Command::Ray {
            formula: text,
            vars,
        } => {
            let f = formula(text)?;
            let res = match vars {
                Some(vs) => {
                    let vs: Vec<String> = vs.split(',').map(|s| s.trim().to_string()).collect();
                    find_ray_in(&f, &vs)
                }
                None => find_ray(&f),
            };
            match res {
                RayResult::Ray(ray) => {
                    let member = ray.membership_formula(&f);
                    json!({
                        "result": "ray",
                        "vars": ray.vars,
                        "base": ints(&ray.base),
                        "direction": ints(&ray.direction),
                        "step": int_json(ray.step),
                        "membership": member.to_string(),
                        "membership_qe": qe(&member).to_string(),
                    })
                }
                RayResult::NoRay { bound } => {
                    json!({ "result": "no_ray", "bound": int_json(bound) })
                }
            }
        }
        Command::HenselLift { poly, root } => {
            let f = convert::polyk(&parse_expr(poly)?)?;
            let r0 = convert::rational(&parse_expr(root)?)?;
            let y = hensel_lift(&f, &r0, prec).map_err(domain)?;
            json!({
                "root": y.to_string(),
                "precision": precision_json(y.precision()),
                "residual_valuation": valuation_json(f.eval(&y).valuation()),
            })
        }
        Command::HenselDecompose { poly } => {
            let p = convert::polyk(&parse_expr(poly)?)?;
            let h = hensel_decompose(&p, prec).map_err(domain)?;
            let factors: Vec<Value> = h
                .factors
                .iter()
                .map(|f| {
                    json!({
                        "factor": f.factor.to_string(),
                        "residue_factor": f.residue_factor.to_string_in("y"),
                        "multiplicity": f.multiplicity,
                        "residue_root": f.residue_root.to_string(),
                    })
                })
                .collect();
            json!({
                "unit": h.unit.to_string(),
                "factors": factors,
                "precision": precision_json(h.precision),
            })
        }
        Command::Polygon { poly } => {
            let p = convert::bivar(&parse_expr(poly)?)?;
            if p.is_zero() {
                return Err(domain(henselk_core::hensel::HenselError::ZeroPolynomial));
            }
            let np = newton_polygon(&p);
            let edges: Vec<Value> = np
                .edges
                .iter()
                .map(|e| {
                    json!({
                        "from": [e.from.0, e.from.1],
                        "to": [e.to.0, e.to.1],
                        "slope": fmt_rational(&e.slope),
                        "exponent": fmt_rational(&e.exponent()),
                        "length": e.length,
                    })
                })
                .collect();
            json!({ "edges": edges })
        }
        Command::Puiseux { poly, order } => {
            let p = convert::bivar(&parse_expr(poly)?)?;
            let bs = puiseux_expand_with(&p, *order, cli.degree_cap).map_err(domain)?;
            json!({ "order": order, "branches": bs.iter().map(branch_json).collect::<Vec<_>>() })
        }
        Command::Limits { poly } => {
            let p = convert::bivar(&parse_expr(poly)?)?;
            let bs = puiseux_expand_with(&p, 1, cli.degree_cap).map_err(domain)?;
            let limits: Vec<Value> = bs
                .iter()
                .map(|b| {
                    json!({
                        "limit": b.limit.to_string(),
                        "finite": !matches!(b.limit, Limit::AtInfinity),
                        "k_rational": b.is_k_rational,
                        "multiplicity": b.multiplicity,
                        "slope_line": b.slope_line.to_string(),
                        "field": b.field.as_ref().map(|k| k.min_poly().to_string_in(k.generator_name())),
                    })
                })
                .collect();
            json!({ "limits": limits })
        }
        Command::Closure { set, n } => {
            let s = convert::cell_set(&condition(set)?)?;
            match construct_closure_point(&s, *n).map_err(domain)? {
                ClosureOutcome::Point(p) => {
                    let (outcome, tail) = match &p.trace.outcome {
                        TraceOutcome::Converged(w) => ("converged", w),
                        TraceOutcome::Stopped(w) => ("stopped", w),
                    };
                    json!({
                        "result": "point",
                        "x": vec!["0"; s.n()],
                        "w": p.w.to_string(),
                        "disjunct": p.disjunct,
                        "trace": p.trace.steps.iter().map(|st| json!({
                            "l": int_json(st.l),
                            "xi": fmt_rational(&st.xi),
                            "lambda": st.lambda.to_string(),
                        })).collect::<Vec<_>>(),
                        "outcome": outcome,
                        "outcome_value": tail.to_string(),
                        "certificates": p.certificates.iter().map(|(nu, w)| json!({
                            "nu": nu,
                            "witness": point_json(w),
                        })).collect::<Vec<_>>(),
                    })
                }
                ClosureOutcome::NotInClosure { bound } => json!({
                    "result": "not_in_closure",
                    "bound": bound.map(int_json),
                }),
            }
        }
        Command::Shrink { set } => {
            let s = convert::cell_set(&condition(set)?)?;
            match fiber_shrink(&s).map_err(domain)? {
                ShrinkResult::Shrink {
                    permutation,
                    ray,
                    description,
                } => {
                    let member = ray.membership_formula(&description);
                    json!({
                        "result": "shrink",
                        "permutation": permutation,
                        "vars": ray.vars,
                        "base": ints(&ray.base),
                        "direction": ints(&ray.direction),
                        "step": int_json(ray.step),
                        "description": description.to_string(),
                        "membership_qe": qe(&member).to_string(),
                    })
                }
                ShrinkResult::NoShrink { bound } => json!({
                    "result": "no_shrink",
                    "bound": bound.map(int_json),
                }),
                ShrinkResult::NoRay { bound } => {
                    json!({ "result": "no_ray", "bound": int_json(bound) })
                }
            }
        }
        Command::Member { set, point, n } => {
            let s = convert::cell_set(&condition(set)?)?;
            let coords = parse_tuple(point)?
                .iter()
                .map(convert::series)
                .collect::<Result<Vec<Series>, _>>()?;
            let m = is_in_closure(&s, &coords, *n).map_err(domain)?;
            json!({
                "coordinates": s.x_vars.iter().cloned().chain(["y".to_string()]).collect::<Vec<_>>(),
                "member": m.member,
                "failing_level": m.failing_level,
                "certificates": m.certificates.iter().map(|(nu, d, w)| json!({
                    "nu": nu,
                    "disjunct": d,
                    "witness": point_json(w),
                })).collect::<Vec<_>>(),
            })
        }
        Command::Arc { set, order, at } => {
            let ps = convert::plane_set(&condition(set)?)?;
            let a = parse_tuple(at)?
                .iter()
                .map(convert::rational)
                .collect::<Result<Vec<_>, _>>()?;
            let [a0, a1] =
                <[_; 2]>::try_from(a).map_err(|_| usage("--at takes two coordinates"))?;
            let arc = select_arc(&ps, &(a0, a1), *order).map_err(domain)?;
            let source = match &arc.source {
                ArcSource::Branch { poly, swapped } => {
                    json!({ "branch": poly, "swapped": swapped })
                }
                ArcSource::Monomial { r, w } => {
                    json!({ "monomial": [r.0, r.1], "coefficients": [w.0, w.1] })
                }
            };
            json!({
                "phi": [arc.components.0.to_string_in("z"), arc.components.1.to_string_in("z")],
                "domain": arc.domain.to_string(),
                "order": precision_json(arc.order),
                "valuations": Value::Object(arc.valuations.iter().map(|(k, v)| (k.clone(), json!(v))).collect()),
                "source": source,
                "display": arc.to_string(),
            })
        }
        Command::Loja { f, g } => {
            let fp = convert::polyk(&parse_expr(f)?)?;
            let gp = convert::polyk(&parse_expr(g)?)?;
            let cert = loja_exponent(&fp, &gp).map_err(domain)?;
            let checked = cert.check(&fp, &gp).map_err(domain)?;
            json!({
                "s": cert.s,
                "h": cert.h_string(),
                "check": checked,
                "gamma0": cert.gamma0,
                "roots": cert.roots.iter().map(|r| json!({
                    "root": r.root.to_string(),
                    "mult_f": r.mult_f,
                    "mult_g": r.mult_g,
                    "sigma": fmt_rational(&r.sigma),
                    "f_lead": r.f_lead,
                    "g_lead": r.g_lead,
                })).collect::<Vec<_>>(),
                "minimality": cert.minimality.as_ref().map(|m| json!({
                    "root": m.root,
                    "samples": m.samples.iter().map(|(m, a, b)| json!({
                        "m": m, "v_f_pow": a, "v_g": b,
                    })).collect::<Vec<_>>(),
                })),
            })
        }
        Command::Gform { r, samples } => {
            if *r == 0 {
                return Err(usage("r must be at least 1"));
            }
            let g = anisotropic_form(*r);
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let mut nonzero = 0;
            for _ in 0..*samples {
                let xs = loop {
                    let xs: Vec<Series> = (0..*r)
                        .map(|_| Series::exact((-3..=3).map(|e| (e, int(rng.gen_range(-3..=3))))))
                        .collect();
                    if !xs.iter().all(Series::is_exact_zero) {
                        break xs;
                    }
                };
                if !g.poly.eval(&xs).is_exact_zero() {
                    nonzero += 1;
                }
            }
            json!({
                "r": r,
                "poly": g.poly.to_string(),
                "nested": g.nested,
                "degrees": g.degrees,
                "proof": g.proof.iter().map(|p| json!({
                    "level": p.level,
                    "prev_degree": p.prev_degree,
                })).collect::<Vec<_>>(),
                "check": g.check(),
                "samples": samples,
                "nonzero_samples": nonzero,
            })
        }
        Command::Parse { text, kind } => {
            let parsed = match kind {
                Kind::Auto => parse_any(text)?,
                Kind::Expr => Parsed::Expr(parse_expr(text)?),
                Kind::Cond => Parsed::Cond(parse_cond(text)?),
            };
            let (k, printed, again) = match &parsed {
                Parsed::Expr(e) => (
                    "expr",
                    e.to_string(),
                    parse_expr(&e.to_string()).map(Parsed::Expr),
                ),
                Parsed::Cond(c) => (
                    "condition",
                    c.to_string(),
                    parse_cond(&c.to_string()).map(Parsed::Cond),
                ),
            };
            json!({
                "kind": k,
                "printed": printed,
                "ast": render::ast_json(&parsed),
                "round_trip": again.as_ref() == Ok(&parsed),
            })
        }
    })
}

/// Runs one invocation; returns the output text and the exit code.
pub fn run<I, S>(args: I) -> (String, i32)
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return (e.to_string(), 0);
            }
            let rec = json!({
                "status": "error",
                "error": { "kind": "UsageError", "message": e.to_string().trim_end() },
            });
            return (format!("{rec}\n"), 2);
        }
    };
    let mut rec = Map::new();
    rec.insert("command".into(), json!(cli.command.name()));
    let code = match run_command(&cli) {
        Ok(payload) => {
            rec.insert("status".into(), json!("ok"));
            if let Value::Object(m) = payload {
                rec.extend(m);
            }
            0
        }
        Err(f) => {
            rec.insert("status".into(), json!("error"));
            rec.insert(
                "error".into(),
                json!({ "kind": f.kind, "message": f.message }),
            );
            if f.usage {
                2
            } else {
                1
            }
        }
    };
    let rec = Value::Object(rec);
    let out = match cli.format {
        Format::Json => format!("{rec}\n"),
        Format::Text => render::text(&rec),
    };
    (out, code)
}
