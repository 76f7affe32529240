//! The lock-in construction: a penalty that pins the optimizer to one
//! periodic orbit, its explicit constants, and exact trials over the ball
//! of admissible perturbations.

mod constants;
mod engine;
mod gap;
mod perturb;
mod plan;
mod report;
mod walk;

pub use constants::{alpha, choose_k, choose_k_from_norm, constants, constants_from_norm, l_constant, Constants, MAX_K};
pub use plan::{
    build_perturbation, recurrence_of, FTilde, Mode, PerturbationPlan, PlanNormalForm, PlanOptions, Recurrence,
    DEFAULT_TABLE_LIMIT,
};
pub use perturb::{penalty_direction, penalty_table, prefix_levels, sample_perturbation, Perturbation, Sampling, RANGE};
pub use engine::{Engine, Solved, TrialVerdict};
pub use report::{empirical_radius, lockin_report, lockin_trial, theorem_radius, LockInReport, RadiusSearch, RadiusStep, MAX_DOUBLINGS};
pub use walk::{backward_walk, backward_walk_solved, random_point, walk_suite, WalkSuite, WalkTrace};
pub use gap::{shadow_gap_check, shadow_offsets, ShadowGapReport};
