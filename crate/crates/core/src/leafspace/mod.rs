//! Leaf spaces of the suspended foliation: the stratum-by-stratum
//! classification, separation coordinates, the projective-line and ellipse
//! examples and the composition law of the local action.

mod examples;
mod flows;
mod separation;
mod table;

pub use examples::*;
pub use flows::*;
pub use separation::*;
pub use table::*;
