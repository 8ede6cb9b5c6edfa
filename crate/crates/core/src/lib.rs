//! Numerical toolkit for the commuting pair
//!
//! ```text
//! X = x^a y^b [ m x d/dx - n y d/dy ]
//! Y = g(x^n y^m) [ x(-bm + P) d/dx + y(am - (n/m) P) d/dy ],   P = x^a y^b f(x^n y^m)
//! ```
//!
//! with `am - bn = ±1`, `g` holomorphic and `f` possibly meromorphic at the
//! origin. The crate decides univalence of the pair from Laurent data, lifts
//! loops along the leaves of the suspended foliation, extracts holonomy and
//! monodromy maps, and assembles the leaf-space classification of the
//! suspension together with its Hausdorff separation data.
//!
//! Modules:
//! - [`series`]: truncated Laurent series for `f`, `g` and `1/g`.
//! - [`fields`]: the pair, its suspension and the chart expressions.
//! - [`lift`]: adaptive Runge-Kutta path lifting, return-map fitting, monodromy.
//! - [`semicomplete`]: univalence classifier, time-form integrals, witnesses.
//! - [`leafspace`]: leaf-space report, separation coordinates, worked examples.
//! - [`verify`]: the acceptance criteria as runnable checks.

pub mod error;
pub mod fields;
pub mod leafspace;
pub mod lift;
pub mod quadrature;
pub mod semicomplete;
pub mod series;
pub mod verify;

pub use error::{Error, Result};
pub use fields::{PairParams, ValidationReport};
pub use series::LaurentSeries;

pub type C64 = num_complex::Complex64;

/// `2πi`
pub const TWO_PI_I: C64 = C64::new(0.0, std::f64::consts::TAU);
