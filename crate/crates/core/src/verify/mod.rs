//! Randomized property suites over generated instances, with exact
//! arithmetic throughout.

mod generator;
mod report;
mod suites;

pub use generator::{Gen, InstanceGenerator, Ranges};
pub use report::{run_suite, Checker, Counterexample, PropertyStats, Status, SuiteConfig, SuiteReport};
pub use suites::{
    default_instances, run_named, suite_cohomology_bounds, suite_fixed_point, suite_in_order, suite_oracle,
    suite_parallel_orbit, suite_shadow_gap, suite_shadowing, SUITES,
};
