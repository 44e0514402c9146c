//! Dyadic finite-dimensional Gaussian approximations of Wiener measure.
//!
//! A path on `[0, a]` vanishing at the origin is seen through its values on
//! the dyadic grid `a k / 2^n`, or equivalently through its `2^n` successive
//! increments. Under the level-`n` law those increments are independent
//! `N(0, a / 2^n)` variables. For a closed path set `K`, the probability that
//! the grid image of a sampled path lies in the grid image of `K` is
//! nonincreasing in `n`, and its limit is the Wiener measure of `K`.
//!
//! The crate estimates these probabilities by Monte Carlo for a catalog of
//! concrete sets (sup balls, tubes, Hölder balls and boolean combinations),
//! evaluates the analytic lower bounds that drive tightness, extends the
//! picture to `[0, ∞)` with the weighted locally-uniform metric, and ships
//! independent oracles (reflection series, Nyström quadrature, fine random
//! walks) to cross-check the numbers.
//!
//! Path values are generic over the scalar type. Everything that only needs
//! ring arithmetic (increments, cumulation, refinement) works with exact
//! rationals as well; the Monte Carlo and metric code needs [`Scalar`]
//! (`f32` or `f64`). The aliases below fix the common choices.

pub mod dyadic;
pub mod error;
pub mod gaussian;
pub mod horizon;
pub mod measure;
pub mod oracles;
pub mod path_sets;
pub mod report;
mod scalar;

pub use dyadic::{DyadicGrid, GridPath, IncrementVector};
pub use error::{Error, Result};
pub use gaussian::{
    abs_moment, chebyshev_tail, normal_cdf, sample_increments, two_sided_probability, NormalLaw,
    PolarNormal, SeedSpec,
};
pub use horizon::{LongPath, MetricValue};
pub use measure::{
    BoundCheck, BoundReport, CheckReport, EstimateResult, MeasureSequence, MonteCarlo,
    NestedFamily, Sampling,
};
pub use path_sets::{HolderValue, PathSetDocument, PathSetSpec};
pub use scalar::Scalar;

/// Grid path with `f64` values.
pub type GridPathF64 = GridPath<f64>;
/// Grid path with `f32` values.
pub type GridPathF32 = GridPath<f32>;
/// Increment coordinates with `f64` values.
pub type IncrementVectorF64 = IncrementVector<f64>;
/// Increment coordinates with `f32` values.
pub type IncrementVectorF32 = IncrementVector<f32>;
/// Path set whose tube centers carry `f64` values.
pub type PathSetF64 = PathSetSpec<f64>;
/// Path set whose tube centers carry `f32` values.
pub type PathSetF32 = PathSetSpec<f32>;
/// Path on `[0, R]` with `f64` values.
pub type LongPathF64 = LongPath<f64>;

/// Report schema tag embedded in every JSON document the crate writes.
pub const REPORT_SCHEMA: &str = "wiener-meter/1";
