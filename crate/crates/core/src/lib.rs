//! Exact computation in the Henselian valued field `K = Q((t))`.

pub mod arcs;
pub mod bivar;
pub mod closedness;
pub mod hensel;
pub mod numberfield;
pub mod polyk;
pub mod presburger;
pub mod ratfunc;
pub mod scalar;
pub mod series;
pub mod upoly;

pub use bivar::{Bivar, BivarPoly};
pub use numberfield::{NfElement, NumberField};
pub use polyk::PolyK;
pub use scalar::{Rational, Scalar};
pub use series::{LaurentSeries, Precision, SeriesError, ValResult};
pub use upoly::{QPoly, UPoly};

/// Laurent series over the rationals: elements of `K`.
pub type Series = LaurentSeries<Rational>;
/// Polynomials in `y` over `K`.
pub type PolyQ = PolyK<Rational>;
/// Laurent series with number field coefficients.
pub type NfSeries = LaurentSeries<NfElement>;
