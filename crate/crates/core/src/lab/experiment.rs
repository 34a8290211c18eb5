//! Reconstruction and refactoring experiments on the eroded MVC fixture.

use std::fmt::Write;

use serde::Serialize;

use crate::error::LabError;
use crate::fitness::{detect_violations, LayeredAssignment};
use crate::graph::unit_dependency_graph;
use crate::model::SCHEMA_VERSION;
use crate::reconstruction::{reconstruct, ReconstructionConfig, ReflexionModel};
use crate::refactoring::{migrate, MigrationConfig, MigrationLog, MigrationOutcome};

use super::fixture::{build_mvc_fixture, inject_violations, FixtureSpec, Injection, InjectionPlan};

pub const MAX_INJECTED: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionRow {
    pub injected: usize,
    pub layers: usize,
    pub misplaced_units: usize,
    pub violations: usize,
    pub quality: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionTable {
    pub seed: u64,
    pub rows: Vec<ReconstructionRow>,
}

/// Units whose reconstructed layer disagrees with the intended one under the
/// best one-to-one matching of layers.
pub fn misplaced_units(reconstructed: &LayeredAssignment, intended: &LayeredAssignment) -> usize {
    let overlap: Vec<Vec<usize>> = reconstructed
        .layers()
        .iter()
        .map(|r| {
            intended
                .layers()
                .iter()
                .map(|i| r.iter().filter(|u| i.binary_search(u).is_ok()).count())
                .collect()
        })
        .collect();
    fn best(row: usize, used: &mut Vec<bool>, overlap: &[Vec<usize>]) -> usize {
        if row == overlap.len() {
            return 0;
        }
        // leaving a reconstructed layer unmatched is allowed when it has more
        // layers than the intended architecture
        let mut top = best(row + 1, used, overlap);
        for col in 0..used.len() {
            if !used[col] {
                used[col] = true;
                top = top.max(overlap[row][col] + best(row + 1, used, overlap));
                used[col] = false;
            }
        }
        top
    }
    let mut used = vec![false; intended.layer_count()];
    reconstructed.unit_count() - best(0, &mut used, &overlap)
}

/// For k = 0..=10: inject k violations into a fresh fixture and reconstruct.
pub fn reconstruction_experiment(
    seed: u64,
    config: &ReconstructionConfig,
) -> Result<ReconstructionTable, LabError> {
    let (fixture, intended) = build_mvc_fixture(&FixtureSpec::default());
    let config = ReconstructionConfig { seed, ..*config };
    let mut rows = Vec::with_capacity(MAX_INJECTED + 1);
    for k in 0..=MAX_INJECTED {
        let (eroded, _) = inject_violations(&fixture, &InjectionPlan { count: k, seed })?;
        let r = reconstruct(&eroded, &config)?;
        rows.push(ReconstructionRow {
            injected: k,
            layers: r.architecture.layer_count(),
            misplaced_units: misplaced_units(&r.architecture, &intended),
            violations: r.violation_count(),
            quality: r.quality.value,
        });
    }
    Ok(ReconstructionTable { seed, rows })
}

impl ReconstructionTable {
    pub fn to_text(&self, config: &ReconstructionConfig) -> String {
        let mut out = format!(
            "# reconstruction experiment seed={} factor_resolvable={} factor_unresolvable={} max_layers={} restarts={}\n",
            self.seed, config.factor_resolvable, config.factor_unresolvable, config.max_layers, config.restarts
        );
        let _ = writeln!(
            out,
            "{:<38}  {:<10}  {:<32}  {:<24}  Solution Quality",
            "No. Injected Architecture Violations",
            "No. Layers",
            "Misplaced implementation units",
            "Architecture violations",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<38}  {:<10}  {:<32}  {:<24}  {:.5}",
                r.injected, r.layers, r.misplaced_units, r.violations, r.quality
            );
        }
        out
    }

    pub fn to_json(&self, config: &ReconstructionConfig) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            schema_version: u32,
            experiment: &'static str,
            config: &'a ReconstructionConfig,
            seed: u64,
            rows: &'a [ReconstructionRow],
        }
        let mut s = serde_json::to_string_pretty(&Doc {
            schema_version: SCHEMA_VERSION,
            experiment: "reconstruction",
            config,
            seed: self.seed,
            rows: &self.rows,
        })
        .expect("serializable");
        s.push('\n');
        s
    }
}

/// Everything produced by one refactoring experiment run.
#[derive(Debug, Clone)]
pub struct RefactoringRun {
    pub seed: u64,
    pub injections: Vec<Injection>,
    pub reflexion: ReflexionModel,
    pub outcome: MigrationOutcome,
}

impl RefactoringRun {
    pub fn log(&self) -> &MigrationLog {
        &self.outcome.log
    }

    /// Whether the injected dependency no longer violates the reconstructed
    /// architecture after migration, wherever the member now lives.
    pub fn is_resolved(&self, injection: &Injection) -> bool {
        let original = format!("{}.{}", injection.source_unit, injection.member);
        let Some(at) = self.outcome.ledger.locate(&original) else {
            return false;
        };
        let graph = unit_dependency_graph(&self.outcome.model);
        let Ok(report) = detect_violations(&graph, &self.reflexion.architecture) else {
            return false;
        };
        let still_violating = report.violations().any(|v| {
            v.from == at.unit
                && graph.edge(&v.from, &v.to).is_some_and(|e| {
                    e.contributing_refs.iter().any(|c| {
                        c.member == at.member && c.reference.to_unit == injection.target_unit
                    })
                })
        });
        !still_violating
    }
}

/// Fixture with ten injected violations, reconstructed, then migrated
/// toward the reconstructed architecture.
pub fn refactoring_experiment(
    seed: u64,
    reconstruction: &ReconstructionConfig,
    migration: &MigrationConfig,
) -> Result<RefactoringRun, LabError> {
    let (fixture, _) = build_mvc_fixture(&FixtureSpec::default());
    let (eroded, injections) = inject_violations(
        &fixture,
        &InjectionPlan {
            count: MAX_INJECTED,
            seed,
        },
    )?;
    let reflexion = reconstruct(
        &eroded,
        &ReconstructionConfig {
            seed,
            ..*reconstruction
        },
    )?;
    let outcome = migrate(&eroded, &reflexion.architecture, migration)?;
    Ok(RefactoringRun {
        seed,
        injections,
        reflexion,
        outcome,
    })
}
