//! Exact arithmetic over ℚ, prime fields, rational function fields, truncated
//! Laurent series and number fields.

pub mod cyclotomic;
pub mod embedding;
pub mod error;
pub mod expr;
pub mod field;
pub mod irreducible;
pub mod laurent;
pub mod matrix;
mod qpoly;
pub mod number_field;
pub mod poly;
pub mod prime_field;
pub mod ratfunc;

pub use error::ExactError;
pub use field::Field;
pub use laurent::{TruncatedLaurentSeries, Valuation};
pub use matrix::Matrix;
pub use number_field::{
    compositum, embedding_absolute_values, is_algebraic_integer, is_root_of_unity,
    minimal_polynomial, AlgebraicNumber, Compositum, NumberField, NumberFieldElement,
};
pub use poly::{poly_gcd, Polynomial};
pub use prime_field::Fp;
pub use ratfunc::RationalFunction;

pub type Rational = num_rational::BigRational;
pub type QPoly = Polynomial<Rational>;
pub type QRatFunc = RationalFunction<Rational>;
pub type QMatrix = Matrix<Rational>;
pub type FpPoly = Polynomial<Fp>;
pub type FpRatFunc = RationalFunction<Fp>;
pub type NfElem = NumberFieldElement;
pub type NfMatrix = Matrix<NumberFieldElement>;
pub type FpMatrix = Matrix<Fp>;
