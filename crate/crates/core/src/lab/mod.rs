//! Experiment harness: the MVC fixture, violation injection, the exhaustive
//! oracle and the two experiments built on them.

pub mod experiment;
pub mod fixture;
pub mod oracle;
pub mod random;
pub mod stats;

pub use experiment::{
    misplaced_units, reconstruction_experiment, refactoring_experiment, ReconstructionRow,
    ReconstructionTable, RefactoringRun, MAX_INJECTED,
};
pub use fixture::{
    build_mvc_fixture, inject_violations, intended_architecture, FixtureSpec, Injection,
    InjectionKind, InjectionPlan, Role,
};
pub use oracle::{exhaustive_oracle, for_each_partition, ORACLE_UNIT_LIMIT};
pub use random::{random_model, RandomModelSpec};
pub use stats::spearman;
