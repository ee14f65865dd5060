//! Hensel lifting over `Q[[t]]`, Newton polygons and Newton–Puiseux branches
//! of plane algebraic curves at `x = 0`.

mod lift;
mod polygon;
mod puiseux;

use thiserror::Error;

use crate::numberfield::NfError;
use crate::series::SeriesError;

pub use lift::{hensel_decompose, hensel_lift, newton_root, HenselFactor, HenselFactorization};
pub use polygon::{lower_hull, newton_polygon, Edge, NewtonPolygon};
pub use puiseux::{
    branch_limits, puiseux_expand, puiseux_expand_with, Branch, BranchLimit, Limit, SlopeLine,
};
pub(crate) use puiseux::{primitive_part, to_qx};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HenselError {
    #[error("the residue value at the proposed root is nonzero")]
    NotARoot,
    #[error("the residue root is not simple")]
    NotASimpleRoot,
    #[error("coefficients must lie in Q[[t]]")]
    NotIntegral,
    #[error("the leading coefficient vanishes modulo t after normalization")]
    LeadingCoefficientVanishes,
    #[error("the polynomial is zero")]
    ZeroPolynomial,
    #[error("the polynomial has degree 0 in y")]
    ConstantInY,
    #[error(transparent)]
    Field(#[from] NfError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}
