//! Exact integer algebra: Smith normal form, (co)chain complexes, Morse and
//! Poincaré polynomials.

mod complex;
mod poly;
mod snf;

pub use complex::{homology, Direction, HomologyResult, IntegerChainComplex};
pub use poly::{double_manifold_check, duality_symmetry_check, morse_inequality_quotient, DoubleManifoldReport, IntPolynomial};
pub use snf::{smith_normal_form, IntMatrix, SmithForm};
