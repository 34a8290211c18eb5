//! Generational greedy migration toward a fixed conceptual architecture.

use std::collections::HashSet;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::RefactorError;
use crate::fitness::{
    assess_edge, check_conformance, solution_quality, FitnessConfig, LayeredAssignment,
    SolutionQuality, TransformationKind, ViolationReport,
};
use crate::graph::unit_dependency_graph;
use crate::model::{CodeModel, MemberRef, SCHEMA_VERSION};

use super::ledger::BehaviorLedger;
use super::transform::Transformation;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MigrationConfig {
    pub max_generations: usize,
    pub max_candidates: usize,
    pub fitness: FitnessConfig,
}

impl Default for MigrationConfig {
    fn default() -> Self {
        MigrationConfig {
            max_generations: 100,
            max_candidates: 10_000,
            fitness: FitnessConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub model: CodeModel,
    pub transformation: Transformation,
    pub violation_count: usize,
    pub quality: SolutionQuality,
}

/// Violation count and quality of `model` against a fixed architecture.
pub fn evaluate(
    model: &CodeModel,
    architecture: &LayeredAssignment,
    config: &FitnessConfig,
) -> Result<(ViolationReport, SolutionQuality), RefactorError> {
    let graph = unit_dependency_graph(model);
    let (report, table) = check_conformance(model, &graph, architecture)
        .map_err(|e| RefactorError::ArchitectureMismatch(e.to_string()))?;
    let quality = solution_quality(&graph, architecture, &table, config)
        .map_err(|e| RefactorError::ArchitectureMismatch(e.to_string()))?;
    Ok((report, quality))
}

/// Transformations applicable to the violating edges of `report`, in
/// canonical order: per edge, every move (member, then target unit name)
/// before every parameter exclusion.
pub fn candidate_transformations(
    model: &CodeModel,
    report: &ViolationReport,
) -> Vec<Transformation> {
    let graph = unit_dependency_graph(model);
    let units = model.unit_names();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for entry in report.violations() {
        let Some(edge) = graph.edge(&entry.from, &entry.to) else {
            continue;
        };
        let assessment = assess_edge(model, edge);
        let mut excludes = Vec::new();
        for mc in &assessment.members {
            let subject = MemberRef::new(&edge.from_unit, &mc.member);
            let movable = mc
                .transformations
                .contains(&TransformationKind::MoveConstant)
                || mc.transformations.contains(&TransformationKind::MoveMethod);
            if movable {
                for target in units.iter().filter(|u| **u != edge.from_unit) {
                    out.push(Transformation::MoveMember {
                        subject: subject.clone(),
                        target_unit: target.clone(),
                    });
                }
            }
            for &i in &mc.excludable_params {
                excludes.push(Transformation::ExcludeParameter {
                    subject: subject.clone(),
                    param_index: i,
                });
            }
        }
        out.extend(excludes);
    }
    out.retain(|t| seen.insert(t.clone()));
    out
}

/// One candidate per applicable transformation, each scored against the
/// fixed architecture. Candidates producing an already-seen model are
/// dropped; at most `config.max_candidates` transformations are tried.
pub fn generate_candidates(
    model: &CodeModel,
    architecture: &LayeredAssignment,
    report: &ViolationReport,
    config: &MigrationConfig,
) -> Result<Vec<Candidate>, RefactorError> {
    if report.violation_count() == 0 {
        return Err(RefactorError::NoViolations);
    }
    let mut transformations = candidate_transformations(model, report);
    transformations.truncate(config.max_candidates);
    let mut seen: HashSet<CodeModel> = HashSet::new();
    let mut out = Vec::with_capacity(transformations.len());
    for t in transformations {
        let next = t.apply(model)?;
        if !seen.insert(next.clone()) {
            continue;
        }
        let (r, quality) = evaluate(&next, architecture, &config.fitness)?;
        out.push(Candidate {
            model: next,
            transformation: t,
            violation_count: r.violation_count(),
            quality,
        });
    }
    Ok(out)
}

/// Fewest violations first, then highest quality, then generation order.
pub fn select_fittest(candidates: &[Candidate]) -> Result<&Candidate, RefactorError> {
    let mut best: Option<&Candidate> = None;
    for c in candidates {
        best = match best {
            None => Some(c),
            Some(b)
                if c.violation_count < b.violation_count
                    || (c.violation_count == b.violation_count
                        && c.quality.value > b.quality.value) =>
            {
                Some(c)
            }
            keep => keep,
        };
    }
    best.ok_or(RefactorError::EmptyPopulation)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub candidate_count: usize,
    pub transformation: Option<Transformation>,
    pub violation_count: usize,
    pub quality: f64,
}

/// Row 1 is the starting model; each later row is one generation. The final
/// row of a stalled run repeats the previous violation count with no
/// transformation.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MigrationLog {
    pub generations: Vec<GenerationRecord>,
}

#[derive(Serialize)]
struct LogDocument<'a> {
    schema_version: u32,
    factors: &'a FitnessConfig,
    generations: &'a [GenerationRecord],
}

impl MigrationLog {
    pub fn initial_violations(&self) -> usize {
        self.generations.first().map_or(0, |g| g.violation_count)
    }

    pub fn final_violations(&self) -> usize {
        self.generations.last().map_or(0, |g| g.violation_count)
    }

    pub fn violation_sequence(&self) -> Vec<usize> {
        self.generations.iter().map(|g| g.violation_count).collect()
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<10}  {:<32}  {:<16}  {:<10}  {}\n",
            "Generation",
            "Number of Architecture Violations",
            "Solution Quality",
            "Candidates",
            "Transformation"
        );
        for g in &self.generations {
            let t = g
                .transformation
                .as_ref()
                .map_or_else(|| "-".to_string(), |t| t.to_string());
            let _ = writeln!(
                out,
                "{:<10}  {:<32}  {:<16.5}  {:<10}  {}",
                g.generation, g.violation_count, g.quality, g.candidate_count, t
            );
        }
        out
    }

    pub fn to_json(&self, factors: &FitnessConfig) -> String {
        let doc = LogDocument {
            schema_version: SCHEMA_VERSION,
            factors,
            generations: &self.generations,
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MigrationOutcome {
    pub model: CodeModel,
    pub log: MigrationLog,
    /// Model adopted at each generation, in order.
    pub snapshots: Vec<CodeModel>,
    /// Ledger that verified every adopted transformation.
    pub ledger: BehaviorLedger,
}

fn check_units(model: &CodeModel, architecture: &LayeredAssignment) -> Result<(), RefactorError> {
    architecture
        .check_covers(&model.unit_names())
        .map_err(|e| RefactorError::ArchitectureMismatch(e.to_string()))
}

/// Repeatedly applies the fittest candidate until violations reach zero, no
/// candidate strictly reduces them, or the generation budget runs out.
pub fn migrate(
    model: &CodeModel,
    architecture: &LayeredAssignment,
    config: &MigrationConfig,
) -> Result<MigrationOutcome, RefactorError> {
    check_units(model, architecture)?;
    let mut ledger = BehaviorLedger::new(model);
    let mut current = model.clone();
    let (mut report, mut quality) = evaluate(&current, architecture, &config.fitness)?;
    let mut log = MigrationLog::default();
    let mut snapshots = Vec::new();
    log.generations.push(GenerationRecord {
        generation: 1,
        candidate_count: 0,
        transformation: None,
        violation_count: report.violation_count(),
        quality: quality.value,
    });

    let mut steps = 0;
    while report.violation_count() > 0 && steps < config.max_generations {
        steps += 1;
        let generation = steps + 1;
        let candidates = generate_candidates(&current, architecture, &report, config)?;
        let winner = select_fittest(&candidates)
            .ok()
            .filter(|c| c.violation_count < report.violation_count());
        let Some(winner) = winner else {
            log.generations.push(GenerationRecord {
                generation,
                candidate_count: candidates.len(),
                transformation: None,
                violation_count: report.violation_count(),
                quality: quality.value,
            });
            break;
        };
        ledger.record(&current, &winner.transformation, &winner.model)?;
        current = winner.model.clone();
        let (r, q) = evaluate(&current, architecture, &config.fitness)?;
        report = r;
        quality = q;
        snapshots.push(current.clone());
        log.generations.push(GenerationRecord {
            generation,
            candidate_count: candidates.len(),
            transformation: Some(winner.transformation.clone()),
            violation_count: report.violation_count(),
            quality: quality.value,
        });
    }
    Ok(MigrationOutcome {
        model: current,
        log,
        snapshots,
        ledger,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ImplementationUnit, Member, RefKind, Reference};

    fn call(unit: &str, member: &str) -> Reference {
        Reference::new(unit, Some(member), RefKind::Invocation)
    }

    fn arch(layers: &[&[&str]]) -> LayeredAssignment {
        LayeredAssignment::from_layers(
            layers
                .iter()
                .map(|l| l.iter().map(|s| s.to_string()).collect())
                .collect(),
            3,
        )
        .unwrap()
    }

    fn fake(count: usize, value: f64, target: &str) -> Candidate {
        Candidate {
            model: CodeModel::default(),
            transformation: Transformation::MoveMember {
                subject: MemberRef::new("A", "x"),
                target_unit: target.into(),
            },
            violation_count: count,
            quality: SolutionQuality {
                value,
                cohesion_sum: 0.0,
                coupling_sum: 0.0,
                layer_factor: 1.0,
                per_edge_breakdown: vec![],
            },
        }
    }

    #[test]
    fn selection_rules() {
        let one = [fake(1, 0.1, "B")];
        assert_eq!(select_fittest(&one).unwrap(), &one[0]);
        let c = [fake(4, 0.9, "B"), fake(3, 0.5, "C"), fake(3, 0.6, "D")];
        assert_eq!(select_fittest(&c).unwrap().quality.value, 0.6);
        let tie = [fake(2, 0.5, "B"), fake(2, 0.5, "C")];
        assert_eq!(
            select_fittest(&tie).unwrap().transformation,
            tie[0].transformation
        );
        assert_eq!(select_fittest(&[]), Err(RefactorError::EmptyPopulation));
    }

    /// 3 units stacked bottom to top: Low, Mid, Top. Low has a misplaced
    /// constant pointing at Top.
    fn constant_case() -> CodeModel {
        CodeModel::new(vec![
            ImplementationUnit::new("Low")
                .with_member(Member::method("base"))
                .with_member(Member::constant("K").with_ref(call("Top", "t"))),
            ImplementationUnit::new("Mid")
                .with_member(Member::method("m").with_ref(call("Low", "base"))),
            ImplementationUnit::new("Top")
                .with_member(Member::method("t").with_ref(call("Mid", "m"))),
        ])
    }

    #[test]
    fn constant_edge_yields_one_candidate_per_other_unit() {
        let m = constant_case();
        let a = arch(&[&["Low"], &["Mid"], &["Top"]]);
        let (report, _) = evaluate(&m, &a, &FitnessConfig::default()).unwrap();
        let c = generate_candidates(&m, &a, &report, &MigrationConfig::default()).unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn no_violations_is_an_error_for_generation() {
        let m = constant_case();
        let a = arch(&[&["Low", "Mid", "Top"]]);
        let (report, _) = evaluate(&m, &a, &FitnessConfig::default()).unwrap();
        assert_eq!(
            generate_candidates(&m, &a, &report, &MigrationConfig::default()),
            Err(RefactorError::NoViolations)
        );
    }

    #[test]
    fn unresolvable_edges_give_no_candidates() {
        let m = CodeModel::new(vec![
            ImplementationUnit::new("Low")
                .with_member(Member::method("h"))
                .with_member(
                    Member::method("m")
                        .with_ref(call("Top", "t"))
                        .with_ref(call("Low", "h")),
                ),
            ImplementationUnit::new("Top").with_member(Member::method("t")),
        ]);
        let a = arch(&[&["Low"], &["Top"]]);
        let (report, _) = evaluate(&m, &a, &FitnessConfig::default()).unwrap();
        let c = generate_candidates(&m, &a, &report, &MigrationConfig::default()).unwrap();
        assert!(c.is_empty());
        let out = migrate(&m, &a, &MigrationConfig::default()).unwrap();
        assert_eq!(out.log.violation_sequence(), vec![1, 1]);
    }

    #[test]
    fn single_constant_resolves_in_one_generation() {
        let m = constant_case();
        let a = arch(&[&["Low"], &["Mid"], &["Top"]]);
        let out = migrate(&m, &a, &MigrationConfig::default()).unwrap();
        assert_eq!(out.log.violation_sequence(), vec![1, 0]);
        assert_eq!(out.ledger.checks(), 1);
        assert_eq!(out.snapshots.len(), 1);
    }

    #[test]
    fn clean_model_logs_one_row() {
        let m = constant_case();
        let a = arch(&[&["Low", "Mid", "Top"]]);
        let out = migrate(&m, &a, &MigrationConfig::default()).unwrap();
        assert_eq!(out.log.generations.len(), 1);
        assert_eq!(out.log.final_violations(), 0);
    }

    #[test]
    fn mismatched_architecture_is_rejected() {
        let m = constant_case();
        let a = arch(&[&["Low", "Mid"]]);
        assert!(matches!(
            migrate(&m, &a, &MigrationConfig::default()),
            Err(RefactorError::ArchitectureMismatch(_))
        ));
    }
}
