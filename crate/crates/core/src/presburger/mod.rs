//! Presburger arithmetic over the value group `Z`: quantifier elimination,
//! satisfiability, extrema and semi-lines.

mod cooper;
mod formula;
mod solve;
mod term;

pub use cooper::qe;
pub use formula::{fresh_name, simplify, Atom, AtomKind, Formula};
pub use solve::{
    extremum, find_ray, find_ray_in, line_membership, sat, Direction, Extremum, Line, Point, Ray,
    RayResult, SatResult, DIRECTION_BOUND,
};
pub use term::{Int, LinTerm};
