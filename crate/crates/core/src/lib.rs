//! p-ary codes of points and hyperplanes of Desarguesian projective spaces,
//! blocking sets with respect to lines, the field-reduction spread, and the
//! minimum-weight searches that certify their parameters at desk scale.

pub mod blocking;
pub mod codes;
pub mod error;
pub mod fplinalg;
pub mod gfq;
pub mod projgeom;
pub mod verify;
pub mod wsearch;

pub use error::{Error, Result};
