//! Desarguesian projective spaces PG(n,q) and the field-reduction spread.

mod space;
mod spread;

pub use space::{gaussian_binomial, theta, Hyperplane, Point, ProjSpace, Subspace, DEFAULT_POINT_BUDGET};
pub use spread::{parse_spread_file, Spread, SpreadElement};
