//! Exact ergodic optimization for locally constant functions on the full
//! shift: maximizing periodic orbits, sub-actions and normal forms, and the
//! lock-in perturbation that makes a periodic optimizer stable on an open
//! ball in an A-norm.

pub mod error;
pub mod exact;
pub mod io;
pub mod lockin;
pub mod maxplus;
pub mod rational;
pub mod shift;
pub mod space;
pub mod verify;

pub use error::{Error, Result};
