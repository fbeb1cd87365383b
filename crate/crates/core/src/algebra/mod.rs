//! Exact symbolic layer: rationals, polynomials, polynomial vector fields,
//! and memoized iterated Lie brackets.

pub mod bracket;
pub mod polynomial;
pub mod vecfield;

pub use bracket::{BracketTable, MultiIndex};
pub use polynomial::{parse_rat, rat, rat_frac, rat_to_string, Polynomial, Rat};
pub use vecfield::PolyVectorField;
