//! Stable text, structured and DOT renderings of reconstruction results.

use std::fmt::Write;

use serde::Serialize;

use crate::fitness::{
    Classification, FitnessConfig, LayeredAssignment, SolutionQuality, ViolationEntry,
    ViolationReport,
};
use crate::graph::DependencyGraph;
use crate::model::SCHEMA_VERSION;
use crate::reconstruction::ReflexionModel;

/// Coupling factors in effect, repeated in every report so overridden runs
/// describe themselves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Factors {
    pub factor_resolvable: f64,
    pub factor_unresolvable: f64,
    pub max_layers: usize,
}

impl From<&FitnessConfig> for Factors {
    fn from(c: &FitnessConfig) -> Self {
        Factors {
            factor_resolvable: c.factor_resolvable,
            factor_unresolvable: c.factor_unresolvable,
            max_layers: c.max_layers,
        }
    }
}

/// `# factors resolvable=0.25 unresolvable=2 max_layers=3`
pub fn factors_line(config: &FitnessConfig) -> String {
    format!(
        "# factors resolvable={} unresolvable={} max_layers={}",
        config.factor_resolvable, config.factor_unresolvable, config.max_layers
    )
}

/// `layers=<n> violations=<v> quality=<q>`
pub fn summary_line(reflexion: &ReflexionModel) -> String {
    format!(
        "layers={} violations={} quality={:.5}",
        reflexion.architecture.layer_count(),
        reflexion.violation_count(),
        reflexion.quality.value
    )
}

#[derive(Serialize)]
struct ViolationDocument<'a> {
    schema_version: u32,
    factors: Factors,
    layer_count: usize,
    violation_count: usize,
    quality: &'a SolutionQuality,
    edges: &'a [ViolationEntry],
}

pub fn violations_json(
    report: &ViolationReport,
    architecture: &LayeredAssignment,
    quality: &SolutionQuality,
    config: &FitnessConfig,
) -> String {
    let mut s = serde_json::to_string_pretty(&ViolationDocument {
        schema_version: SCHEMA_VERSION,
        factors: config.into(),
        layer_count: architecture.layer_count(),
        violation_count: report.violation_count(),
        quality,
        edges: &report.edges,
    })
    .expect("serializable");
    s.push('\n');
    s
}

fn classification_label(c: Option<Classification>) -> &'static str {
    match c {
        Some(Classification::ResolvableViolation) => "resolvable",
        Some(Classification::UnresolvableViolation) => "unresolvable",
        Some(Classification::Conformant) | None => "conformant",
    }
}

/// Plain-text violation listing, one line per violating edge.
pub fn violations_text(report: &ViolationReport, config: &FitnessConfig) -> String {
    let mut out = factors_line(config);
    out.push('\n');
    let _ = writeln!(out, "violations={}", report.violation_count());
    for v in report.violations() {
        let kinds: Vec<&str> = v
            .applicable_transformations
            .iter()
            .map(|t| t.as_str())
            .collect();
        let _ = writeln!(
            out,
            "{} (layer {}) -> {} (layer {}) w={} {} [{}]",
            v.from,
            v.from_layer,
            v.to,
            v.to_layer,
            v.weight,
            classification_label(v.classification),
            kinds.join(",")
        );
    }
    out
}

/// Dependency graph with one cluster per layer (top layer first). Violating
/// edges are red, dashed when a transformation could resolve them.
pub fn reflexion_dot(
    graph: &DependencyGraph,
    architecture: &LayeredAssignment,
    report: &ViolationReport,
) -> String {
    let mut out = String::from("digraph reflexion {\n  rankdir=TB;\n  node [shape=box];\n");
    for (i, units) in architecture.layers().iter().enumerate().rev() {
        let _ = writeln!(out, "  subgraph cluster_layer{} {{", i + 1);
        let _ = writeln!(out, "    label=\"layer {}\";", i + 1);
        for u in units {
            let _ = writeln!(out, "    \"{u}\";");
        }
        out.push_str("  }\n");
    }
    for e in &graph.edges {
        let entry = report
            .edges
            .iter()
            .find(|v| v.from == e.from_unit && v.to == e.to_unit);
        let style = match entry.and_then(|v| v.violating.then_some(v.classification)) {
            None => String::new(),
            Some(Some(Classification::ResolvableViolation)) => {
                ", color=red, fontcolor=red, style=dashed".to_string()
            }
            Some(_) => ", color=red, fontcolor=red, penwidth=2".to_string(),
        };
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"w={}\"{}];",
            e.from_unit, e.to_unit, e.weight, style
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitness::check_conformance;
    use crate::graph::unit_dependency_graph;
    use crate::model::{CodeModel, ImplementationUnit, Member, RefKind, Reference};

    fn upward() -> (CodeModel, LayeredAssignment) {
        let m = CodeModel::new(vec![
            ImplementationUnit::new("Low").with_member(
                Member::constant("K").with_ref(Reference::new(
                    "High",
                    Some("f"),
                    RefKind::Invocation,
                )),
            ),
            ImplementationUnit::new("High").with_member(Member::method("f")),
        ]);
        let a = LayeredAssignment::from_layers(vec![vec!["Low".into()], vec!["High".into()]], 3)
            .unwrap();
        (m, a)
    }

    #[test]
    fn dot_marks_violations() {
        let (m, a) = upward();
        let g = unit_dependency_graph(&m);
        let (report, _) = check_conformance(&m, &g, &a).unwrap();
        let dot = reflexion_dot(&g, &a, &report);
        assert!(dot.contains("subgraph cluster_layer2"));
        assert!(dot.contains(
            "\"Low\" -> \"High\" [label=\"w=1\", color=red, fontcolor=red, style=dashed];"
        ));
    }

    #[test]
    fn text_lists_classification() {
        let (m, a) = upward();
        let g = unit_dependency_graph(&m);
        let (report, _) = check_conformance(&m, &g, &a).unwrap();
        let text = violations_text(&report, &FitnessConfig::default());
        assert!(text.starts_with("# factors resolvable=0.25 unresolvable=2 max_layers=3\n"));
        assert!(text.contains("Low (layer 1) -> High (layer 2) w=1 resolvable [move_constant]"));
    }
}
