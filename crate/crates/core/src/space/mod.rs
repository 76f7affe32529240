//! A-sequences, the metric `d_A`, and locally constant observables with
//! their variation and norm functionals.

mod aseq;
mod cylinder;

pub use aseq::{ASequence, Lacunarized, SuperContinuity};
pub use cylinder::{
    birkhoff_sum, d_a, d_a_to_orbit_truncated, ergodic_average, CylinderFunction, NormReport,
};
