//! Behavior-preserving model transformations and the greedy migration
//! search built on them.

mod ledger;
mod search;
mod transform;

pub use ledger::{BehaviorLedger, Triple};
pub use search::{
    candidate_transformations, evaluate, generate_candidates, migrate, select_fittest, Candidate,
    GenerationRecord, MigrationConfig, MigrationLog, MigrationOutcome,
};
pub use transform::{exclude_parameter, listener_name, move_member, moved_name, Transformation};
