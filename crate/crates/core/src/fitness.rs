//! Layered assignments, layer ordering, violation detection and the
//! Solution Quality fitness.
//!
//! Layers are numbered from 1 (bottom). A dependency is an architecture
//! violation when it points from a lower layer to a higher one; same-layer
//! and downward edges (including edges skipping layers) are conformant.
//!
//! Solution Quality rewards intra-layer CBO weight (cohesion) and penalizes
//! inter-layer weight (coupling). Upward edges are weighted by how well the
//! refactoring transformations can remove them: resolvable violations count
//! a quarter, unresolvable ones double. The cohesion ratio is scaled by
//! `layer_count / max_layers`, so the value stays in `[0, 1]` while more
//! layers still score higher.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::FitnessError;
use crate::graph::{DependencyEdge, DependencyGraph};
use crate::model::{CodeModel, MemberKind, Via, SCHEMA_VERSION};

pub const DEFAULT_MAX_LAYERS: usize = 3;
pub const DEFAULT_FACTOR_RESOLVABLE: f64 = 0.25;
pub const DEFAULT_FACTOR_UNRESOLVABLE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessConfig {
    pub max_layers: usize,
    pub factor_resolvable: f64,
    pub factor_unresolvable: f64,
    /// Lower bound applied to the cohesion sum. Zero keeps the raw ratio.
    pub cohesion_floor: f64,
}

impl Default for FitnessConfig {
    fn default() -> Self {
        FitnessConfig {
            max_layers: DEFAULT_MAX_LAYERS,
            factor_resolvable: DEFAULT_FACTOR_RESOLVABLE,
            factor_unresolvable: DEFAULT_FACTOR_UNRESOLVABLE,
            cohesion_floor: 0.0,
        }
    }
}

impl FitnessConfig {
    fn layer_factor(&self, layer_count: usize) -> f64 {
        layer_count as f64 / self.max_layers as f64
    }

    fn combine(&self, cohesion: f64, coupling: f64, layer_count: usize) -> f64 {
        let cohesion = cohesion.max(self.cohesion_floor);
        let layer_factor = self.layer_factor(layer_count);
        let total = cohesion + coupling;
        if total > 0.0 {
            cohesion / total * layer_factor
        } else {
            layer_factor
        }
    }
}

/// An ordered list of layers (index 0 is layer 1, the bottom) and the
/// unit-to-layer map derived from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayeredAssignment {
    layers: Vec<Vec<String>>,
    mapping: BTreeMap<String, usize>,
}

impl LayeredAssignment {
    /// Builds an assignment from bottom-first layers. Units inside a layer
    /// are sorted by name.
    pub fn from_layers(
        mut layers: Vec<Vec<String>>,
        max_layers: usize,
    ) -> Result<Self, FitnessError> {
        if layers.len() > max_layers {
            return Err(FitnessError::TooManyLayers(layers.len(), max_layers));
        }
        let mut mapping = BTreeMap::new();
        for (i, layer) in layers.iter_mut().enumerate() {
            if layer.is_empty() {
                return Err(FitnessError::EmptyCluster(i));
            }
            layer.sort();
            for unit in layer.iter() {
                if mapping.insert(unit.clone(), i + 1).is_some() {
                    return Err(FitnessError::InconsistentInputs(format!(
                        "unit {unit} appears in more than one layer"
                    )));
                }
            }
        }
        Ok(LayeredAssignment { layers, mapping })
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    /// Bottom-first layers.
    pub fn layers(&self) -> &[Vec<String>] {
        &self.layers
    }

    /// 1-based layer index of `unit`.
    pub fn layer_of(&self, unit: &str) -> Option<usize> {
        self.mapping.get(unit).copied()
    }

    pub fn units(&self) -> impl Iterator<Item = &String> {
        self.mapping.keys()
    }

    pub fn unit_count(&self) -> usize {
        self.mapping.len()
    }

    /// Fails unless the assignment covers exactly `nodes`.
    pub fn check_covers(&self, nodes: &[String]) -> Result<(), FitnessError> {
        if let Some(missing) = nodes.iter().find(|n| !self.mapping.contains_key(*n)) {
            return Err(FitnessError::InconsistentInputs(format!(
                "unit {missing} has no layer"
            )));
        }
        if self.mapping.len() != nodes.len() {
            let extra = self
                .mapping
                .keys()
                .find(|u| nodes.binary_search(u).is_err())
                .cloned()
                .unwrap_or_default();
            return Err(FitnessError::InconsistentInputs(format!(
                "layer unit {extra} is not part of the model"
            )));
        }
        Ok(())
    }

    pub fn to_document(&self) -> ArchitectureDocument {
        ArchitectureDocument {
            schema_version: SCHEMA_VERSION,
            layers: self
                .layers
                .iter()
                .enumerate()
                .map(|(i, units)| LayerEntry {
                    index: i + 1,
                    units: units.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_document()).expect("serializable");
        s.push('\n');
        s
    }

    /// Reads an architecture document. Layers may appear in any order; their
    /// `index` fields must form `1..=n`.
    pub fn from_json(text: &str, max_layers: usize) -> Result<Self, ArchitectureParseError> {
        let doc: ArchitectureDocument = serde_json::from_str(text)
            .map_err(|e| ArchitectureParseError::Syntax(e.to_string()))?;
        let mut entries = doc.layers;
        entries.sort_by_key(|l| l.index);
        for (i, l) in entries.iter().enumerate() {
            if l.index != i + 1 {
                return Err(ArchitectureParseError::Structure(format!(
                    "layer indices must be 1..={}, found {}",
                    entries.len(),
                    l.index
                )));
            }
        }
        LayeredAssignment::from_layers(
            entries.into_iter().map(|l| l.units).collect(),
            max_layers.max(1),
        )
        .map_err(|e| ArchitectureParseError::Structure(e.to_string()))
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ArchitectureParseError {
    #[error("malformed architecture document: {0}")]
    Syntax(String),
    #[error("invalid architecture: {0}")]
    Structure(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureDocument {
    #[serde(default = "schema_default")]
    pub schema_version: u32,
    pub layers: Vec<LayerEntry>,
}

fn schema_default() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerEntry {
    pub index: usize,
    pub units: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformationKind {
    MoveMethod,
    MoveConstant,
    ExcludeParameter,
}

impl TransformationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TransformationKind::MoveMethod => "move_method",
            TransformationKind::MoveConstant => "move_constant",
            TransformationKind::ExcludeParameter => "exclude_parameter",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Conformant,
    ResolvableViolation,
    UnresolvableViolation,
}

/// How one member's references along an edge can be removed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MemberCoverage {
    pub member: String,
    pub kind: MemberKind,
    pub transformations: BTreeSet<TransformationKind>,
    /// Parameters whose exclusion removes every reference of this member
    /// along the edge.
    pub excludable_params: Vec<usize>,
    /// Every reference of this member along the edge is covered.
    pub covered: bool,
}

/// Assignment-independent resolvability of an edge's contributing
/// references.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeAssessment {
    pub resolvable: bool,
    pub transformations: BTreeSet<TransformationKind>,
    pub members: Vec<MemberCoverage>,
}

/// Decides, reference by reference, which transformation could eliminate the
/// edge's contributions:
/// constants can always be moved; a method can be moved when it does not
/// touch other members of its own unit; a parameter-borne reference can be
/// excluded when all of the method's references to the target flow through
/// that same parameter.
pub fn assess_edge(model: &CodeModel, edge: &DependencyEdge) -> EdgeAssessment {
    let unit = model.unit(&edge.from_unit);
    let mut by_member: BTreeMap<&str, Vec<&crate::model::Reference>> = BTreeMap::new();
    for c in &edge.contributing_refs {
        by_member.entry(&c.member).or_default().push(&c.reference);
    }
    let mut members = Vec::new();
    let mut all_covered = true;
    let mut transformations = BTreeSet::new();
    for (name, refs) in by_member {
        let Some(member) = unit.and_then(|u| u.member(name)) else {
            all_covered = false;
            continue;
        };
        let mut kinds = BTreeSet::new();
        let mut excludable = BTreeSet::new();
        let mut covered = true;
        let to_target: Vec<_> = member
            .references
            .iter()
            .filter(|r| !r.external && r.to_unit == edge.to_unit)
            .collect();
        let movable_method = member.is_method()
            && !member.references.iter().any(|r| {
                !r.external
                    && r.to_unit == edge.from_unit
                    && r.to_member.is_some()
                    && r.to_member.as_deref() != Some(name)
            });
        for r in refs {
            let ok = match (member.kind, r.via) {
                (MemberKind::Constant, _) => {
                    kinds.insert(TransformationKind::MoveConstant);
                    true
                }
                (MemberKind::Method, Via::Direct) => {
                    if movable_method {
                        kinds.insert(TransformationKind::MoveMethod);
                    }
                    movable_method
                }
                (MemberKind::Method, Via::Parameter(i)) => {
                    let single_route = to_target.iter().all(|t| t.via == Via::Parameter(i));
                    if single_route {
                        kinds.insert(TransformationKind::ExcludeParameter);
                        excludable.insert(i);
                    }
                    single_route
                }
            };
            covered &= ok;
        }
        all_covered &= covered;
        transformations.extend(kinds.iter().copied());
        members.push(MemberCoverage {
            member: name.to_string(),
            kind: member.kind,
            transformations: kinds,
            excludable_params: excludable.into_iter().collect(),
            covered,
        });
    }
    EdgeAssessment {
        resolvable: all_covered && !members.is_empty(),
        transformations,
        members,
    }
}

/// Assessments for every edge of a graph, keyed by `(from, to)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResolvabilityTable {
    entries: BTreeMap<(String, String), EdgeAssessment>,
}

impl ResolvabilityTable {
    pub fn build(model: &CodeModel, graph: &DependencyGraph) -> Self {
        let entries = graph
            .edges
            .iter()
            .map(|e| {
                (
                    (e.from_unit.clone(), e.to_unit.clone()),
                    assess_edge(model, e),
                )
            })
            .collect();
        ResolvabilityTable { entries }
    }

    pub fn get(&self, from: &str, to: &str) -> Option<&EdgeAssessment> {
        self.entries.get(&(from.to_string(), to.to_string()))
    }

    pub fn is_resolvable(&self, from: &str, to: &str) -> bool {
        self.get(from, to).is_some_and(|a| a.resolvable)
    }

    /// Overrides an edge's resolvability; mostly useful for what-if scoring.
    pub fn set_resolvable(&mut self, from: &str, to: &str, resolvable: bool) {
        let entry = self
            .entries
            .entry((from.to_string(), to.to_string()))
            .or_insert_with(|| EdgeAssessment {
                resolvable,
                transformations: BTreeSet::new(),
                members: Vec::new(),
            });
        entry.resolvable = resolvable;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
struct RankKey {
    ratio: f64,
    size: usize,
    min_member: usize,
}

/// Descending ratio, then larger cluster, then smallest member index.
fn bottom_first(a: &RankKey, b: &RankKey) -> Ordering {
    b.ratio
        .partial_cmp(&a.ratio)
        .unwrap_or(Ordering::Equal)
        .then(b.size.cmp(&a.size))
        .then(a.min_member.cmp(&b.min_member))
}

fn ratio(incoming: f64, outgoing: f64) -> f64 {
    if outgoing == 0.0 {
        f64::INFINITY
    } else {
        incoming / outgoing
    }
}

/// Orders clusters into layers by their incoming/outgoing inter-cluster
/// weight ratio: the most depended-upon cluster becomes layer 1.
pub fn order_layers(
    clusters: &[Vec<String>],
    graph: &DependencyGraph,
    max_layers: usize,
) -> Result<LayeredAssignment, FitnessError> {
    if clusters.len() > max_layers {
        return Err(FitnessError::TooManyLayers(clusters.len(), max_layers));
    }
    let mut label = vec![usize::MAX; graph.nodes.len()];
    for (c, cluster) in clusters.iter().enumerate() {
        if cluster.is_empty() {
            return Err(FitnessError::EmptyCluster(c));
        }
        for unit in cluster {
            let i = graph.node_index(unit).ok_or_else(|| {
                FitnessError::InconsistentInputs(format!("unit {unit} is not a graph node"))
            })?;
            if label[i] != usize::MAX {
                return Err(FitnessError::InconsistentInputs(format!(
                    "unit {unit} appears in more than one cluster"
                )));
            }
            label[i] = c;
        }
    }
    if let Some(i) = label.iter().position(|&l| l == usize::MAX) {
        return Err(FitnessError::InconsistentInputs(format!(
            "unit {} is not in any cluster",
            graph.nodes[i]
        )));
    }
    let edges: Vec<IndexedEdge> = graph
        .edges
        .iter()
        .map(|e| IndexedEdge {
            from: graph
                .node_index(&e.from_unit)
                .expect("edge endpoint is a node"),
            to: graph
                .node_index(&e.to_unit)
                .expect("edge endpoint is a node"),
            weight: e.weight,
            resolvable: false,
        })
        .collect();
    let layer_of_cluster = cluster_layers(&edges, &label, clusters.len());
    let mut layers = vec![Vec::new(); clusters.len()];
    for (c, cluster) in clusters.iter().enumerate() {
        layers[layer_of_cluster[c]] = cluster.clone();
    }
    LayeredAssignment::from_layers(layers, max_layers)
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct IndexedEdge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
    pub resolvable: bool,
}

pub(crate) const UNPLACED: usize = usize::MAX;

/// Returns the 0-based layer of each cluster. Units labelled `UNPLACED` and
/// their edges are ignored.
pub(crate) fn cluster_layers(edges: &[IndexedEdge], label: &[usize], k: usize) -> Vec<usize> {
    let mut incoming = vec![0.0; k];
    let mut outgoing = vec![0.0; k];
    let mut size = vec![0usize; k];
    let mut min_member = vec![usize::MAX; k];
    for (i, &c) in label.iter().enumerate() {
        if c != UNPLACED {
            size[c] += 1;
            min_member[c] = min_member[c].min(i);
        }
    }
    for e in edges {
        let (a, b) = (label[e.from], label[e.to]);
        if a == UNPLACED || b == UNPLACED || a == b {
            continue;
        }
        outgoing[a] += e.weight;
        incoming[b] += e.weight;
    }
    let mut order: Vec<usize> = (0..k).collect();
    let keys: Vec<RankKey> = (0..k)
        .map(|c| RankKey {
            ratio: ratio(incoming[c], outgoing[c]),
            size: size[c],
            min_member: min_member[c],
        })
        .collect();
    order.sort_by(|&a, &b| bottom_first(&keys[a], &keys[b]));
    let mut layer = vec![0; k];
    for (pos, &c) in order.iter().enumerate() {
        layer[c] = pos;
    }
    layer
}

/// Fast scorer over index-labelled cluster assignments; used by the search
/// routines, which evaluate many neighbouring assignments of one graph.
#[derive(Debug, Clone)]
pub(crate) struct Evaluator {
    pub nodes: Vec<String>,
    pub edges: Vec<IndexedEdge>,
    pub config: FitnessConfig,
}

impl Evaluator {
    pub fn new(graph: &DependencyGraph, table: &ResolvabilityTable, config: FitnessConfig) -> Self {
        let edges = graph
            .edges
            .iter()
            .map(|e| IndexedEdge {
                from: graph
                    .node_index(&e.from_unit)
                    .expect("edge endpoint is a node"),
                to: graph
                    .node_index(&e.to_unit)
                    .expect("edge endpoint is a node"),
                weight: e.weight,
                resolvable: table.is_resolvable(&e.from_unit, &e.to_unit),
            })
            .collect();
        Evaluator {
            nodes: graph.nodes.clone(),
            edges,
            config,
        }
    }

    pub fn unit_count(&self) -> usize {
        self.nodes.len()
    }

    /// Quality of `label` (cluster per unit, `UNPLACED` allowed) with `k`
    /// non-empty clusters, after ordering the clusters into layers.
    pub fn value(&self, label: &[usize], k: usize) -> f64 {
        let layer = cluster_layers(&self.edges, label, k);
        let mut cohesion = 0.0;
        let mut coupling = 0.0;
        for e in &self.edges {
            let (a, b) = (label[e.from], label[e.to]);
            if a == UNPLACED || b == UNPLACED {
                continue;
            }
            if a == b {
                cohesion += e.weight;
            } else if layer[a] < layer[b] {
                let f = if e.resolvable {
                    self.config.factor_resolvable
                } else {
                    self.config.factor_unresolvable
                };
                coupling += e.weight * f;
            } else {
                coupling += e.weight;
            }
        }
        self.config.combine(cohesion, coupling, k)
    }

    /// Converts a complete labelling into an ordered assignment.
    pub fn to_assignment(&self, label: &[usize], k: usize) -> LayeredAssignment {
        let layer = cluster_layers(&self.edges, label, k);
        let mut layers = vec![Vec::new(); k];
        for (i, &c) in label.iter().enumerate() {
            layers[layer[c]].push(self.nodes[i].clone());
        }
        LayeredAssignment::from_layers(layers, self.config.max_layers.max(k))
            .expect("complete labelling yields a valid assignment")
    }

    /// Labels (layer index, 0-based) for an existing assignment.
    pub fn labels_of(&self, assignment: &LayeredAssignment) -> Vec<usize> {
        self.nodes
            .iter()
            .map(|n| assignment.layer_of(n).expect("assignment covers graph") - 1)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeFactor {
    pub from: String,
    pub to: String,
    pub raw_weight: f64,
    /// `None` for intra-layer (cohesive) edges.
    pub factor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionQuality {
    pub value: f64,
    pub cohesion_sum: f64,
    pub coupling_sum: f64,
    pub layer_factor: f64,
    pub per_edge_breakdown: Vec<EdgeFactor>,
}

/// Scores an assignment as given; layers are not re-ordered.
pub fn solution_quality(
    graph: &DependencyGraph,
    assignment: &LayeredAssignment,
    table: &ResolvabilityTable,
    config: &FitnessConfig,
) -> Result<SolutionQuality, FitnessError> {
    assignment.check_covers(&graph.nodes)?;
    let mut cohesion = 0.0;
    let mut coupling = 0.0;
    let mut per_edge_breakdown = Vec::with_capacity(graph.edges.len());
    for e in &graph.edges {
        let lf = assignment.layer_of(&e.from_unit).expect("covered");
        let lt = assignment.layer_of(&e.to_unit).expect("covered");
        let factor = match lf.cmp(&lt) {
            Ordering::Equal => None,
            Ordering::Greater => Some(1.0),
            Ordering::Less if table.is_resolvable(&e.from_unit, &e.to_unit) => {
                Some(config.factor_resolvable)
            }
            Ordering::Less => Some(config.factor_unresolvable),
        };
        match factor {
            None => cohesion += e.weight,
            Some(f) => coupling += e.weight * f,
        }
        per_edge_breakdown.push(EdgeFactor {
            from: e.from_unit.clone(),
            to: e.to_unit.clone(),
            raw_weight: e.weight,
            factor,
        });
    }
    let k = assignment.layer_count();
    Ok(SolutionQuality {
        value: config.combine(cohesion, coupling, k),
        cohesion_sum: cohesion.max(config.cohesion_floor),
        coupling_sum: coupling,
        layer_factor: config.layer_factor(k),
        per_edge_breakdown,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationEntry {
    pub from: String,
    pub to: String,
    pub weight: f64,
    pub from_layer: usize,
    pub to_layer: usize,
    pub violating: bool,
    /// Filled in by [`classify_report`].
    pub classification: Option<Classification>,
    pub applicable_transformations: BTreeSet<TransformationKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationReport {
    pub edges: Vec<ViolationEntry>,
}

impl ViolationReport {
    pub fn violation_count(&self) -> usize {
        self.edges.iter().filter(|e| e.violating).count()
    }

    pub fn violations(&self) -> impl Iterator<Item = &ViolationEntry> {
        self.edges.iter().filter(|e| e.violating)
    }
}

/// Flags every edge pointing from a lower layer to a higher one.
pub fn detect_violations(
    graph: &DependencyGraph,
    assignment: &LayeredAssignment,
) -> Result<ViolationReport, FitnessError> {
    assignment.check_covers(&graph.nodes)?;
    let edges = graph
        .edges
        .iter()
        .map(|e| {
            let from_layer = assignment.layer_of(&e.from_unit).expect("covered");
            let to_layer = assignment.layer_of(&e.to_unit).expect("covered");
            ViolationEntry {
                from: e.from_unit.clone(),
                to: e.to_unit.clone(),
                weight: e.weight,
                from_layer,
                to_layer,
                violating: from_layer < to_layer,
                classification: None,
                applicable_transformations: BTreeSet::new(),
            }
        })
        .collect();
    Ok(ViolationReport { edges })
}

pub fn classify_resolvability(
    model: &CodeModel,
    edge: &DependencyEdge,
    assignment: &LayeredAssignment,
) -> Result<(Classification, BTreeSet<TransformationKind>), FitnessError> {
    let violating = match (
        assignment.layer_of(&edge.from_unit),
        assignment.layer_of(&edge.to_unit),
    ) {
        (Some(a), Some(b)) => a < b,
        _ => {
            return Err(FitnessError::InconsistentInputs(format!(
                "edge {} -> {} has an endpoint without a layer",
                edge.from_unit, edge.to_unit
            )))
        }
    };
    if !violating {
        return Err(FitnessError::NotAViolation {
            from: edge.from_unit.clone(),
            to: edge.to_unit.clone(),
        });
    }
    let a = assess_edge(model, edge);
    let class = if a.resolvable {
        Classification::ResolvableViolation
    } else {
        Classification::UnresolvableViolation
    };
    Ok((class, a.transformations))
}

/// Fills classification and applicable transformations for every entry.
pub fn classify_report(
    model: &CodeModel,
    graph: &DependencyGraph,
    table: &ResolvabilityTable,
    report: &mut ViolationReport,
) {
    for entry in &mut report.edges {
        if !entry.violating {
            entry.classification = Some(Classification::Conformant);
            continue;
        }
        let assessment = match table.get(&entry.from, &entry.to) {
            Some(a) => a.clone(),
            None => assess_edge(
                model,
                graph
                    .edge(&entry.from, &entry.to)
                    .expect("report edge exists"),
            ),
        };
        entry.classification = Some(if assessment.resolvable {
            Classification::ResolvableViolation
        } else {
            Classification::UnresolvableViolation
        });
        entry.applicable_transformations = assessment.transformations;
    }
}

/// Reflexion check: detect and classify every edge against `assignment`.
pub fn check_conformance(
    model: &CodeModel,
    graph: &DependencyGraph,
    assignment: &LayeredAssignment,
) -> Result<(ViolationReport, ResolvabilityTable), FitnessError> {
    let table = ResolvabilityTable::build(model, graph);
    let mut report = detect_violations(graph, assignment)?;
    classify_report(model, graph, &table, &mut report);
    Ok((report, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::unit_dependency_graph;
    use crate::model::{ImplementationUnit, Member, RefKind, Reference};

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    fn call(unit: &str, member: &str) -> Reference {
        Reference::new(unit, Some(member), RefKind::Invocation)
    }

    /// A -> B -> C, one method each.
    fn chain() -> CodeModel {
        CodeModel::new(vec![
            ImplementationUnit::new("A").with_member(Member::method("a").with_ref(call("B", "b"))),
            ImplementationUnit::new("B").with_member(Member::method("b").with_ref(call("C", "c"))),
            ImplementationUnit::new("C").with_member(Member::method("c")),
        ])
    }

    #[test]
    fn single_cluster_is_single_layer() {
        let g = unit_dependency_graph(&chain());
        let a = order_layers(&[s(&["A", "B", "C"])], &g, 3).unwrap();
        assert_eq!(a.layer_count(), 1);
        assert_eq!(a.layer_of("B"), Some(1));
    }

    #[test]
    fn chain_orders_sink_to_bottom() {
        let g = unit_dependency_graph(&chain());
        let a = order_layers(&[s(&["A"]), s(&["B"]), s(&["C"])], &g, 3).unwrap();
        assert_eq!(a.layers(), &[s(&["C"]), s(&["B"]), s(&["A"])]);
    }

    #[test]
    fn ordering_rejects_bad_clusters() {
        let g = unit_dependency_graph(&chain());
        assert_eq!(
            order_layers(&[s(&["A", "B"]), vec![], s(&["C"])], &g, 3),
            Err(FitnessError::EmptyCluster(1))
        );
        assert!(matches!(
            order_layers(&[s(&["A", "B"])], &g, 3),
            Err(FitnessError::InconsistentInputs(_))
        ));
        assert!(matches!(
            order_layers(&[s(&["A"]), s(&["B"]), s(&["C"])], &g, 2),
            Err(FitnessError::TooManyLayers(3, 2))
        ));
    }

    #[test]
    fn ordering_ties_prefer_larger_then_smaller_name() {
        // no edges: all ratios infinite
        let m = CodeModel::new(vec![
            ImplementationUnit::new("A"),
            ImplementationUnit::new("B"),
            ImplementationUnit::new("C"),
        ]);
        let g = unit_dependency_graph(&m);
        let a = order_layers(&[s(&["C"]), s(&["A", "B"])], &g, 3).unwrap();
        assert_eq!(a.layers(), &[s(&["A", "B"]), s(&["C"])]);
        let a = order_layers(&[s(&["C"]), s(&["B"]), s(&["A"])], &g, 3).unwrap();
        assert_eq!(a.layers(), &[s(&["A"]), s(&["B"]), s(&["C"])]);
    }

    #[test]
    fn one_layer_has_no_violations() {
        let g = unit_dependency_graph(&chain());
        let a = LayeredAssignment::from_layers(vec![s(&["A", "B", "C"])], 3).unwrap();
        assert_eq!(detect_violations(&g, &a).unwrap().violation_count(), 0);
    }

    #[test]
    fn upward_edge_is_a_violation_skip_layers_are_not() {
        let mut m = chain();
        m.unit_mut("A").unwrap().members[0].add_reference(call("C", "c"));
        m.unit_mut("C").unwrap().members[0].add_reference(call("A", "a"));
        let g = unit_dependency_graph(&m);
        let a = LayeredAssignment::from_layers(vec![s(&["C"]), s(&["B"]), s(&["A"])], 3).unwrap();
        let r = detect_violations(&g, &a).unwrap();
        let v: Vec<_> = r
            .violations()
            .map(|e| (e.from.as_str(), e.to.as_str()))
            .collect();
        assert_eq!(v, vec![("C", "A")]);
    }

    #[test]
    fn classify_rejects_conformant_edges() {
        let m = chain();
        let g = unit_dependency_graph(&m);
        let a = LayeredAssignment::from_layers(vec![s(&["C"]), s(&["B"]), s(&["A"])], 3).unwrap();
        assert!(matches!(
            classify_resolvability(&m, g.edge("A", "B").unwrap(), &a),
            Err(FitnessError::NotAViolation { .. })
        ));
    }

    fn bottom_top(m: &CodeModel) -> LayeredAssignment {
        let units = m.unit_names();
        LayeredAssignment::from_layers(vec![vec![units[0].clone()], vec![units[1].clone()]], 3)
            .unwrap()
    }

    #[test]
    fn misplaced_constant_is_resolvable() {
        let m = CodeModel::new(vec![
            ImplementationUnit::new("Low")
                .with_member(Member::constant("K").with_ref(call("Up", "f"))),
            ImplementationUnit::new("Up").with_member(Member::method("f")),
        ]);
        let g = unit_dependency_graph(&m);
        let (c, t) =
            classify_resolvability(&m, g.edge("Low", "Up").unwrap(), &bottom_top(&m)).unwrap();
        assert_eq!(c, Classification::ResolvableViolation);
        assert_eq!(
            t.into_iter().collect::<Vec<_>>(),
            vec![TransformationKind::MoveConstant]
        );
    }

    #[test]
    fn method_tied_to_its_unit_is_unresolvable() {
        let m = CodeModel::new(vec![
            ImplementationUnit::new("Low")
                .with_member(Member::method("helper"))
                .with_member(
                    Member::method("m")
                        .with_ref(call("Up", "f"))
                        .with_ref(call("Low", "helper")),
                ),
            ImplementationUnit::new("Up").with_member(Member::method("f")),
        ]);
        let g = unit_dependency_graph(&m);
        let (c, t) =
            classify_resolvability(&m, g.edge("Low", "Up").unwrap(), &bottom_top(&m)).unwrap();
        assert_eq!(c, Classification::UnresolvableViolation);
        assert!(t.is_empty());
    }

    #[test]
    fn free_method_is_movable() {
        let m = CodeModel::new(vec![
            ImplementationUnit::new("Low").with_member(
                Member::method("m")
                    .with_ref(call("Up", "f"))
                    .with_ref(call("Low", "m")),
            ),
            ImplementationUnit::new("Up").with_member(Member::method("f")),
        ]);
        let g = unit_dependency_graph(&m);
        let (c, t) =
            classify_resolvability(&m, g.edge("Low", "Up").unwrap(), &bottom_top(&m)).unwrap();
        assert_eq!(c, Classification::ResolvableViolation);
        assert!(t.contains(&TransformationKind::MoveMethod));
    }

    #[test]
    fn parameter_route_resolvability() {
        let via0 = || call("Up", "f").via(Via::Parameter(0));
        let single = CodeModel::new(vec![
            ImplementationUnit::new("Low")
                .with_member(
                    Member::method("m")
                        .with_param("u", Some("Up"))
                        .with_ref(via0())
                        .with_ref(
                            Reference::new("Up", Some("g"), RefKind::StateAccess)
                                .via(Via::Parameter(0)),
                        )
                        .with_ref(call("Low", "other")),
                )
                .with_member(Member::method("other")),
            ImplementationUnit::new("Up")
                .with_member(Member::method("f"))
                .with_member(Member::method("g")),
        ]);
        let g = unit_dependency_graph(&single);
        let a = bottom_top(&single);
        let (c, t) = classify_resolvability(&single, g.edge("Low", "Up").unwrap(), &a).unwrap();
        assert_eq!(c, Classification::ResolvableViolation);
        assert_eq!(
            t.into_iter().collect::<Vec<_>>(),
            vec![TransformationKind::ExcludeParameter]
        );

        // a second, direct route to the same unit defeats exclusion
        let mut mixed = single.clone();
        mixed
            .member_mut(&crate::model::MemberRef::new("Low", "m"))
            .unwrap()
            .add_reference(call("Up", "g"));
        let g = unit_dependency_graph(&mixed);
        let (c, _) = classify_resolvability(&mixed, g.edge("Low", "Up").unwrap(), &a).unwrap();
        assert_eq!(c, Classification::UnresolvableViolation);
    }

    fn quality_of(m: &CodeModel, layers: Vec<Vec<String>>) -> SolutionQuality {
        let g = unit_dependency_graph(m);
        let t = ResolvabilityTable::build(m, &g);
        let a = LayeredAssignment::from_layers(layers, 3).unwrap();
        solution_quality(&g, &a, &t, &FitnessConfig::default()).unwrap()
    }

    #[test]
    fn one_layer_scores_a_third() {
        let q = quality_of(&chain(), vec![s(&["A", "B", "C"])]);
        assert!((q.value - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(q.coupling_sum, 0.0);
    }

    #[test]
    fn edgeless_three_layers_score_one() {
        let m = CodeModel::new(vec![
            ImplementationUnit::new("A"),
            ImplementationUnit::new("B"),
            ImplementationUnit::new("C"),
        ]);
        let q = quality_of(&m, vec![s(&["A"]), s(&["B"]), s(&["C"])]);
        assert_eq!(q.value, 1.0);
    }

    #[test]
    fn chain_singletons_score_zero() {
        let q = quality_of(&chain(), vec![s(&["C"]), s(&["B"]), s(&["A"])]);
        assert_eq!(q.cohesion_sum, 0.0);
        assert_eq!(q.coupling_sum, 2.0);
        assert_eq!(q.value, 0.0);
    }

    #[test]
    fn cohesion_floor_lifts_chain() {
        let m = chain();
        let g = unit_dependency_graph(&m);
        let t = ResolvabilityTable::build(&m, &g);
        let a = LayeredAssignment::from_layers(vec![s(&["C"]), s(&["B"]), s(&["A"])], 3).unwrap();
        let cfg = FitnessConfig {
            cohesion_floor: 1.0,
            ..FitnessConfig::default()
        };
        let q = solution_quality(&g, &a, &t, &cfg).unwrap();
        assert!((q.value - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn violation_factors_apply() {
        // C -> A upward and unresolvable (method also calls sibling)
        let m = CodeModel::new(vec![
            ImplementationUnit::new("A").with_member(Member::method("a")),
            ImplementationUnit::new("C")
                .with_member(
                    Member::method("c")
                        .with_ref(call("A", "a"))
                        .with_ref(call("C", "d")),
                )
                .with_member(Member::method("d")),
        ]);
        let q = quality_of(&m, vec![s(&["C"]), s(&["A"])]);
        assert_eq!(q.coupling_sum, 2.0);
        assert_eq!(q.per_edge_breakdown[0].factor, Some(2.0));
    }

    #[test]
    fn mismatched_assignment_is_rejected() {
        let m = chain();
        let g = unit_dependency_graph(&m);
        let t = ResolvabilityTable::build(&m, &g);
        let a = LayeredAssignment::from_layers(vec![s(&["A", "B"])], 3).unwrap();
        assert!(matches!(
            solution_quality(&g, &a, &t, &FitnessConfig::default()),
            Err(FitnessError::InconsistentInputs(_))
        ));
    }

    #[test]
    fn evaluator_matches_public_scoring() {
        let m = chain();
        let g = unit_dependency_graph(&m);
        let t = ResolvabilityTable::build(&m, &g);
        let ev = Evaluator::new(&g, &t, FitnessConfig::default());
        for labels in [[0, 0, 1], [0, 1, 2], [1, 0, 0], [0, 1, 0]] {
            let k = labels.iter().max().unwrap() + 1;
            let a = ev.to_assignment(&labels, k);
            let q = solution_quality(&g, &a, &t, &FitnessConfig::default()).unwrap();
            assert!((ev.value(&labels, k) - q.value).abs() < 1e-12);
        }
    }

    #[test]
    fn architecture_document_round_trip() {
        let a = LayeredAssignment::from_layers(vec![s(&["M1", "M2"]), s(&["V1"])], 3).unwrap();
        let back = LayeredAssignment::from_json(&a.to_json(), 3).unwrap();
        assert_eq!(a, back);
        let text = r#"{"layers":[{"index":2,"units":["V1"]},{"index":1,"units":["M1"]}]}"#;
        let b = LayeredAssignment::from_json(text, 3).unwrap();
        assert_eq!(b.layer_of("V1"), Some(2));
        assert!(
            LayeredAssignment::from_json(r#"{"layers":[{"index":2,"units":["V1"]}]}"#, 3).is_err()
        );
    }
}
