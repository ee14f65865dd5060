//! Curve selection for plane sets, Łojasiewicz exponents in one variable
//! and polynomials whose only zero is the origin.

mod arc;
mod gform;
mod loja;

use thiserror::Error;

use crate::hensel::HenselError;
use crate::scalar::Rational;
use crate::series::LaurentSeries;

pub use arc::{select_arc, Arc, ArcDomain, ArcSource, PlaneSet, MONOMIAL_BOUND};
pub use gform::{anisotropic_form, AnisotropicForm, MPoly, ParityStep};
pub use loja::{fmt_qx, loja_exponent, CommonRoot, LojaCertificate, MinimalityWitness};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArcError {
    #[error("no arc among {tried} candidates (branch arcs and monomial arcs with exponents up to {bound})", bound = MONOMIAL_BOUND)]
    NoArcFound { tried: usize },
    #[error("g vanishes at {root} in R but f does not")]
    HypothesisFails { root: LaurentSeries<Rational> },
    #[error("coefficients must be exact")]
    InexactCoefficients,
    #[error("the polynomial is zero")]
    ZeroPolynomial,
    #[error("unsupported set: {0}")]
    UnsupportedSet(String),
    #[error(transparent)]
    Hensel(#[from] HenselError),
}
