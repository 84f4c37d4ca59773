//! Exact computational algebra for graded free resolutions over polynomial rings.
//!
//! The crate builds the classical resolution families (Koszul complexes,
//! Eagon-Northcott complexes, Buchsbaum-Eisenbud pfaffian resolutions),
//! trims generators out of the resolved ideals by mapping cones, and reads
//! off graded Betti tables.  Everything is exact: coefficients are either
//! arbitrary-precision rationals or elements of a prime field.
//!
//! Module layout:
//! * [`ring`] - sparse multivariate polynomial arithmetic,
//! * [`linalg`] - exact dense/sparse linear algebra and homogeneous lifting,
//! * [`chain`] - graded free complexes, mapping cones, Betti tables,
//! * [`builders`] - Koszul / Eagon-Northcott / pfaffian constructors,
//! * [`trim`] - the trimming-complex pipeline,
//! * [`detfacet`] - closed-form tables, matching combinatorics, f-vectors,
//! * [`oracle`] - independent brute-force verification (degree slices, Tor).

// index-style loops are the clearest way to write the matrix kernels here
#![allow(clippy::needless_range_loop)]
#![allow(clippy::manual_is_multiple_of)]

pub mod builders;
pub mod chain;
pub mod detfacet;
pub mod linalg;
pub mod oracle;
pub mod ring;
pub mod trim;
