#![allow(dead_code)]

use std::path::PathBuf;

use henselk_cli::parse::Parsed;
use henselk_cli::{parse_cond, parse_expr, run};

/// `(name, arguments)` for every golden invocation.
pub const CORPUS: &[(&str, &[&str])] = &[
    ("qe_evenness", &["qe", "exists y. x = 2*y"]),
    ("qe_box", &["qe", "exists y. 0 <= y & y <= 5 & x = 3*y + 1"]),
    ("qe_gap", &["qe", "exists y. y < x & x < y + 1"]),
    ("sat_unsat", &["sat", "k > 0 & k < 1"]),
    ("sat_congruence", &["sat", "k === 2 mod 5 & k >= 100"]),
    ("sat_true", &["sat", "true"]),
    (
        "extremum_sup",
        &["extremum", "k === 1 mod 3 & k <= 10", "k"],
    ),
    ("extremum_unbounded", &["extremum", "k === 1 mod 3", "k"]),
    (
        "extremum_inf",
        &[
            "extremum",
            "k > 5 & k === 0 mod 4",
            "k",
            "--direction",
            "inf",
        ],
    ),
    ("ray_line", &["ray", "k2 = 2*k1 & k1 === 0 mod 3"]),
    ("ray_half_line", &["ray", "k >= 7"]),
    ("ray_none", &["ray", "k1 + k2 = 0"]),
    (
        "hensel_lift_sqrt",
        &[
            "hensel-lift",
            "y^2 - (1+t)",
            "--root",
            "1",
            "--precision",
            "4",
        ],
    ),
    (
        "hensel_lift_cbrt",
        &[
            "hensel-lift",
            "y^3 - (1+t)",
            "--root",
            "1",
            "--precision",
            "3",
        ],
    ),
    (
        "hensel_lift_identity",
        &["hensel-lift", "y - t^5", "--root", "0"],
    ),
    (
        "hensel_lift_double_root",
        &["hensel-lift", "y^2 - t^2", "--root", "0"],
    ),
    (
        "hensel_lift_not_a_root",
        &["hensel-lift", "y^2 - 2", "--root", "1"],
    ),
    (
        "hensel_decompose_sqrt",
        &["hensel-decompose", "y^2 - (1+t)", "--precision", "4"],
    ),
    (
        "hensel_decompose_exact",
        &["hensel-decompose", "y^2 - 3*y + 2"],
    ),
    (
        "hensel_decompose_weierstrass",
        &["hensel-decompose", "y^2 - t"],
    ),
    (
        "hensel_decompose_leading",
        &["hensel-decompose", "t*y^2 + y"],
    ),
    ("polygon_cusp", &["polygon", "y^2 - x^3"]),
    ("polygon_node", &["polygon", "y^2 - x^2*(1+x)"]),
    ("polygon_two_roots", &["polygon", "y*(y-1) - x"]),
    ("puiseux_cusp", &["puiseux", "y^2 - x^3", "--order", "8"]),
    (
        "puiseux_node",
        &["puiseux", "y^2 - x^2 - x^3", "--order", "4"],
    ),
    (
        "puiseux_shifted",
        &["puiseux", "(y-1)^2 - x", "--order", "6"],
    ),
    (
        "puiseux_degree_cap",
        &["puiseux", "y^3 - 2 - x", "--degree-cap", "2"],
    ),
    ("puiseux_constant", &["puiseux", "x - 1"]),
    ("limits_shifted", &["limits", "(y-1)^2 - x"]),
    ("limits_infinity", &["limits", "x*y - 1"]),
    ("limits_sqrt2", &["limits", "y^2 - 2 - x"]),
    (
        "closure_zero_limit",
        &[
            "closure",
            "v(y) = 2*v(x) & ac(y) = 3 & v(x) >= 1",
            "-N",
            "8",
        ],
    ),
    (
        "closure_line",
        &["closure", "v(y-(1+t)) >= 2*v(x) & v(x) >= 1", "-N", "8"],
    ),
    (
        "closure_parity",
        &[
            "closure",
            "v(y - t) = 3*v(x) & v(x) === 0 mod 2 & v(x) >= 2",
            "-N",
            "8",
        ],
    ),
    (
        "closure_bounded",
        &["closure", "v(x) >= 1 & v(x) <= 4", "-N", "8"],
    ),
    (
        "closure_two_centers",
        &["closure", "v(y - 1) >= v(x) & v(y) >= 0"],
    ),
    ("closure_ac_zero", &["closure", "v(x) >= 1 & ac(x) = 0"]),
    ("shrink_line", &["shrink", "v(x2) = 2*v(x1) & v(x1) >= 1"]),
    (
        "shrink_parity",
        &["shrink", "v(x1) === 1 mod 2 & v(x2) >= v(x1)"],
    ),
    ("shrink_single", &["shrink", "v(x) >= 0"]),
    ("shrink_bounded", &["shrink", "v(x1) <= 3 & v(x2) >= 0"]),
    (
        "member_on_center",
        &["member", "v(y-t) >= v(x)", "0, t", "-N", "8"],
    ),
    ("member_unit", &["member", "v(y) = 0", "0, t", "-N", "8"]),
    (
        "member_line",
        &[
            "member",
            "v(y-(1+t)) >= 2*v(x) & v(x) >= 1",
            "0, 1+t",
            "-N",
            "8",
        ],
    ),
    ("member_arity", &["member", "v(y) >= v(x)", "0"]),
    ("arc_cusp", &["arc", "v(y^2 - x^3) = inf"]),
    ("arc_cone", &["arc", "v(y) >= 2*v(x) & v(x) >= 1"]),
    (
        "arc_node",
        &["arc", "v(y^2 - x^2 - x^3) = inf", "--order", "8"],
    ),
    (
        "arc_translated",
        &["arc", "v(y - 1 - x^2) = inf", "--at", "0, 1"],
    ),
    ("arc_none", &["arc", "v(y) = 13*v(x)", "--order", "8"]),
    ("loja_cube", &["loja", "y", "y^3"]),
    ("loja_square", &["loja", "y^2", "y^3"]),
    ("loja_shifted", &["loja", "y*(y - t)", "y^3"]),
    ("loja_hypothesis", &["loja", "y - 1", "y"]),
    ("loja_inexact", &["loja", "y + O(t^3)", "y"]),
    ("gform_1", &["gform", "1"]),
    ("gform_3", &["gform", "3", "--seed", "5"]),
    ("gform_5", &["gform", "5", "--samples", "20"]),
    ("gform_text", &["gform", "2", "--format", "text"]),
    ("parse_polynomial", &["parse", "y^2 - (1+t)*x^3"]),
    (
        "parse_condition",
        &["parse", "v(y - (1+t)) >= 2*v(x) & ac(x) = 1"],
    ),
    (
        "parse_quantifiers",
        &["parse", "forall k. k >= 0 | exists j. j = 2*k"],
    ),
    ("parse_error", &["parse", "v("]),
    (
        "parse_series",
        &["parse", "1 + 1/2*t + O(t^4)", "--kind", "expr"],
    ),
    ("parse_bad_token", &["parse", "v(x) >= 1 && v(y) >= 0"]),
    (
        "unsupported_variable",
        &["hensel-lift", "y^2 - z", "--root", "1"],
    ),
    ("unknown_command", &["frobnicate"]),
];

/// Inputs of the round-trip suite.
pub const ROUND_TRIP: &[&str] = &[
    "y^2 - (1+t)*x^3",
    "y^2 - x^3",
    "(y-1)^2 - x",
    "x*y - 1",
    "y^2 - 2 - x",
    "1 + t + O(t^3)",
    "-(x - y)^3 * t^-2",
    "1/2*t - 3/4*t^2",
    "--x",
    "x - -y",
    "(-x)^2",
    "(x^2)^3",
    "a - (b - c)",
    "a*(b*c)",
    "v(y - (1+t)) >= 2*v(x) & ac(x) = 1",
    "v(y-(1+t)) >= 2*v(x) & v(x) >= 1",
    "v(y) = 2*v(x) & ac(y) = 3 & v(x) >= 1",
    "v(y - t) = 3*v(x) & v(x) === 0 mod 2 & v(x) >= 2",
    "v(y^2 - x^3) = inf",
    "ac(y - 1) = -1/2",
    "exists y. x = 2*y",
    "forall k. k >= 0 | exists j. j = 2*k",
    "!(k > 0) & (a = 0 | b < 3) & (c = 1 & d = 2)",
    "(a = 1 | b = 2) | c = 3",
    "E v. (v - 2*w = 0)",
    "A r. (!(r >= 0) | (0 = 0 & 3*r === 0 mod 3))",
    "-k + 3 - 0*v(x) <= 2*j - 1",
    "true & !(false)",
];

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("golden")
}

pub fn invoke(args: &[&str]) -> String {
    let argv = std::iter::once("henselk").chain(args.iter().copied());
    let (out, code) = run(argv.map(String::from));
    format!("exit: {code}\n{out}")
}

/// Runs every corpus entry twice and compares with the golden files,
/// rewriting them when `UPDATE_GOLDEN` is set.
pub fn check_golden() -> Result<usize, String> {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let dir = golden_dir();
    let mut failures = Vec::new();
    for (name, args) in CORPUS {
        let first = invoke(args);
        let second = invoke(args);
        if first != second {
            failures.push(format!("{name}: two runs differ"));
            continue;
        }
        let path = dir.join(format!("{name}.out"));
        if update {
            std::fs::write(&path, &first).map_err(|e| e.to_string())?;
            continue;
        }
        match std::fs::read_to_string(&path) {
            Ok(expected) if expected == first => {}
            Ok(_) => failures.push(format!("{name}: output differs from {}", path.display())),
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    if failures.is_empty() {
        Ok(CORPUS.len())
    } else {
        Err(failures.join("\n"))
    }
}

pub fn reparse(src: &str) -> Result<(), String> {
    let parsed = henselk_cli::parse_any(src).map_err(|e| format!("{src}: {e}"))?;
    let again = match &parsed {
        Parsed::Expr(e) => parse_expr(&e.to_string()).map(Parsed::Expr),
        Parsed::Cond(c) => parse_cond(&c.to_string()).map(Parsed::Cond),
    };
    match again {
        Ok(a) if a == parsed => Ok(()),
        Ok(_) => Err(format!("{src}: printed form parses differently")),
        Err(e) => Err(format!("{src}: printed form fails to parse: {e}")),
    }
}

pub fn check_round_trip() -> Result<usize, String> {
    let errs: Vec<String> = ROUND_TRIP.iter().filter_map(|s| reparse(s).err()).collect();
    if errs.is_empty() {
        Ok(ROUND_TRIP.len())
    } else {
        Err(errs.join("\n"))
    }
}
