//! Layered architecture reconstruction and behavior-preserving migration
//! over a language-neutral code model.

pub mod error;
pub mod fitness;
pub mod graph;
pub mod lab;
pub mod model;
pub mod reconstruction;
pub mod refactoring;
pub mod report;

pub use error::{FitnessError, LabError, ModelError, ReconstructionError, RefactorError};
pub use fitness::{
    check_conformance, detect_violations, order_layers, solution_quality, Classification,
    FitnessConfig, LayeredAssignment, ResolvabilityTable, SolutionQuality, ViolationReport,
};
pub use graph::{unit_dependency_graph, DependencyEdge, DependencyGraph};
pub use model::{
    load_model, CodeModel, Diagnostic, ImplementationUnit, Member, MemberRef, Reference,
};
pub use reconstruction::{reconstruct, ReconstructionConfig, ReflexionModel};
pub use refactoring::{migrate, MigrationConfig, MigrationLog, MigrationOutcome, Transformation};
