//! Unit-level dependency graph with CBO edge weights.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use serde::Serialize;

use crate::model::{CodeModel, RefKind, Reference};

/// A reference together with the name of the member it originates from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContributingRef {
    pub member: String,
    pub reference: Reference,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DependencyEdge {
    pub from_unit: String,
    pub to_unit: String,
    pub weight: f64,
    pub contributing_refs: Vec<ContributingRef>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DependencyGraph {
    pub nodes: Vec<String>,
    /// Sorted by `(from_unit, to_unit)`.
    pub edges: Vec<DependencyEdge>,
    /// References that stay inside their unit, keyed by unit.
    pub intra_unit: BTreeMap<String, Vec<ContributingRef>>,
}

/// Coupling weight of a set of references sharing one ordered unit pair: the
/// number of distinct `(from_member, to_member, kind)` triples. Occurrence
/// counts and routes do not contribute.
pub fn cbo_weight(refs: &[ContributingRef]) -> f64 {
    let triples: BTreeSet<(&str, Option<&str>, RefKind)> = refs
        .iter()
        .filter(|c| !c.reference.external)
        .map(|c| {
            (
                c.member.as_str(),
                c.reference.to_member.as_deref(),
                c.reference.kind,
            )
        })
        .collect();
    triples.len() as f64
}

pub fn unit_dependency_graph(model: &CodeModel) -> DependencyGraph {
    let mut pairs: BTreeMap<(String, String), Vec<ContributingRef>> = BTreeMap::new();
    let mut intra_unit: BTreeMap<String, Vec<ContributingRef>> = BTreeMap::new();
    for (at, r) in model.references() {
        if r.external {
            continue;
        }
        let c = ContributingRef {
            member: at.member.clone(),
            reference: r.clone(),
        };
        if r.to_unit == at.unit {
            intra_unit.entry(at.unit).or_default().push(c);
        } else {
            pairs
                .entry((at.unit, r.to_unit.clone()))
                .or_default()
                .push(c);
        }
    }
    let edges = pairs
        .into_iter()
        .map(|((from_unit, to_unit), contributing_refs)| DependencyEdge {
            weight: cbo_weight(&contributing_refs),
            from_unit,
            to_unit,
            contributing_refs,
        })
        .collect();
    DependencyGraph {
        nodes: model.unit_names(),
        edges,
        intra_unit,
    }
}

impl DependencyGraph {
    pub fn edge(&self, from: &str, to: &str) -> Option<&DependencyEdge> {
        self.edges
            .binary_search_by(|e| (e.from_unit.as_str(), e.to_unit.as_str()).cmp(&(from, to)))
            .ok()
            .map(|i| &self.edges[i])
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Plain DOT rendering; edges are labelled `w=<weight>`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph dependencies {\n  node [shape=box];\n");
        for n in &self.nodes {
            let _ = writeln!(out, "  \"{n}\";");
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"w={}\"];",
                e.from_unit, e.to_unit, e.weight
            );
        }
        out.push_str("}\n");
        out
    }
}
