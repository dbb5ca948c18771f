//! Positivity of exterior powers of the tangent bundle of smooth complete
//! toric varieties, decided from the fan.
//!
//! The pipeline is:
//!
//! * [`fan`]: the fan model, validation and wall enumeration,
//! * [`positivity`]: wall relations, splitting types of `T_X` on invariant
//!   curves and the ample/nef verdict for every exterior power,
//! * [`mmp`]: curve classes, extremal rays, contraction types and the
//!   classification driver built on point blowdowns,
//! * [`constructions`]: projective spaces, products, star subdivisions,
//!   Hirzebruch surfaces and point blowdowns.
//!
//! The linear algebra in [`lattice`] is generic over the exact integer type;
//! the rest of the crate works over arbitrary-precision integers through the
//! aliases below.

pub mod constructions;
pub mod fan;
pub mod io;
pub mod lattice;
pub mod mmp;
pub mod positivity;

pub use fan::{Fan, FanError, SmoothFan, ValidationReport, Wall};
pub use lattice::{LatticeError, Matrix, Scalar};
pub use mmp::{Classification, ContractionInfo, ContractionKind, CurveClass, MmpError, Mode, Outcome};
pub use positivity::{PositivityError, PositivityVerdict, SplittingType, WallRelation};

/// Arbitrary-precision lattice integer.
pub type Int = num_bigint::BigInt;
/// Exact rational over [`Int`].
pub type Rational = num_rational::BigRational;
pub type IntMatrix = Matrix<Int>;
pub type LatticeVector = Vec<Int>;
pub type RationalVector = Vec<Rational>;
