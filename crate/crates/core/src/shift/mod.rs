//! Eventually periodic points of the one-sided full shift and the dyadic
//! metric between them.

mod orbit;
mod point;
mod word;

pub use orbit::{
    recurrence_point,
    follows_in_order, minimal_recurrence, periodic_point_from_recurrence, shadows, stays_close,
    OrbitSegment, PeriodicOrbit,
};
pub use point::{d, first_disagreement, Point, PointRepr};
pub use word::{Alphabet, Word};
