//! Search for a layered conceptual architecture: greedy construction of a
//! start solution followed by steepest-ascent hill climbing, repeated over
//! seeded restarts.

use rand::seq::IndexedRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ReconstructionError;
use crate::fitness::{
    check_conformance, cluster_layers, solution_quality, Evaluator, FitnessConfig,
    LayeredAssignment, ResolvabilityTable, SolutionQuality, ViolationReport,
    DEFAULT_FACTOR_RESOLVABLE, DEFAULT_FACTOR_UNRESOLVABLE, DEFAULT_MAX_LAYERS, UNPLACED,
};
use crate::graph::{unit_dependency_graph, DependencyGraph};
use crate::model::CodeModel;

/// Improvements smaller than this are treated as ties.
const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionConfig {
    pub max_layers: usize,
    pub restarts: usize,
    pub seed: u64,
    pub factor_resolvable: f64,
    pub factor_unresolvable: f64,
    pub max_hill_steps: usize,
    pub cohesion_floor: f64,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        ReconstructionConfig {
            max_layers: DEFAULT_MAX_LAYERS,
            restarts: 5,
            seed: 0,
            factor_resolvable: DEFAULT_FACTOR_RESOLVABLE,
            factor_unresolvable: DEFAULT_FACTOR_UNRESOLVABLE,
            max_hill_steps: 10_000,
            cohesion_floor: 0.0,
        }
    }
}

impl ReconstructionConfig {
    pub fn fitness(&self) -> FitnessConfig {
        FitnessConfig {
            max_layers: self.max_layers,
            factor_resolvable: self.factor_resolvable,
            factor_unresolvable: self.factor_unresolvable,
            cohesion_floor: self.cohesion_floor,
        }
    }

    pub fn validate(&self) -> Result<(), ReconstructionError> {
        if self.max_layers == 0 {
            return Err(ReconstructionError::InvalidConfig(
                "max_layers must be at least 1".into(),
            ));
        }
        if self.restarts == 0 {
            return Err(ReconstructionError::InvalidConfig(
                "restarts must be at least 1".into(),
            ));
        }
        if !(self.factor_resolvable > 0.0 && self.factor_unresolvable > 0.0) {
            return Err(ReconstructionError::InvalidConfig(
                "violation factors must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Conceptual architecture paired with the code model and the classified
/// dependencies.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflexionModel {
    pub model: CodeModel,
    pub architecture: LayeredAssignment,
    pub report: ViolationReport,
    pub quality: SolutionQuality,
}

impl ReflexionModel {
    /// Classifies `model` against a given architecture.
    pub fn build(
        model: CodeModel,
        architecture: LayeredAssignment,
        config: &FitnessConfig,
    ) -> Result<Self, ReconstructionError> {
        let graph = unit_dependency_graph(&model);
        let (report, table) = check_conformance(&model, &graph, &architecture)?;
        let quality = solution_quality(&graph, &architecture, &table, config)?;
        Ok(ReflexionModel {
            model,
            architecture,
            report,
            quality,
        })
    }

    pub fn violation_count(&self) -> usize {
        self.report.violation_count()
    }
}

/// Greedy start solution. Units are visited by descending incident weight
/// and each goes to the cluster (possibly a new one, up to `layer_cap`)
/// that maximizes the quality of the partial assignment. With an rng, visit
/// order is jittered and equally good placements are picked at random.
pub fn greedy_seed(
    graph: &DependencyGraph,
    model: &CodeModel,
    config: &ReconstructionConfig,
    layer_cap: usize,
    rng: Option<&mut dyn RngCore>,
) -> Result<LayeredAssignment, ReconstructionError> {
    config.validate()?;
    if graph.nodes.is_empty() {
        return Err(ReconstructionError::EmptyModel);
    }
    let table = ResolvabilityTable::build(model, graph);
    let ev = Evaluator::new(graph, &table, config.fitness());
    let (labels, k) = greedy_labels(&ev, layer_cap.clamp(1, config.max_layers), rng);
    Ok(ev.to_assignment(&labels, k))
}

fn greedy_labels(
    ev: &Evaluator,
    layer_cap: usize,
    mut rng: Option<&mut dyn RngCore>,
) -> (Vec<usize>, usize) {
    let n = ev.unit_count();
    let mut incident = vec![0.0; n];
    for e in &ev.edges {
        incident[e.from] += e.weight;
        incident[e.to] += e.weight;
    }
    if let Some(r) = rng.as_deref_mut() {
        for w in &mut incident {
            *w *= r.random_range(0.5..1.5);
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        incident[b]
            .partial_cmp(&incident[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut labels = vec![UNPLACED; n];
    let mut k = 0;
    for u in order {
        let options = if k < layer_cap { k + 1 } else { k };
        let mut best_value = f64::NEG_INFINITY;
        let mut best: Vec<usize> = Vec::new();
        for c in 0..options {
            labels[u] = c;
            let v = ev.value(&labels, k.max(c + 1));
            if v > best_value + EPS {
                best_value = v;
                best.clear();
                best.push(c);
            } else if (v - best_value).abs() <= EPS {
                best.push(c);
            }
        }
        let choice = match rng.as_deref_mut() {
            Some(r) => *best.choose(r).expect("at least one option"),
            None => best[0],
        };
        labels[u] = choice;
        k = k.max(choice + 1);
    }
    (labels, k)
}

/// Steepest-ascent hill climbing over single-unit relocations and pairwise
/// swaps between layers. Never empties a layer, so the layer count is fixed.
/// Climbing re-orders layers by in/out ratio; when the caller's own order of
/// `start` scores higher than anything reached, `start` is returned as is.
pub fn hill_climb(
    start: &LayeredAssignment,
    graph: &DependencyGraph,
    model: &CodeModel,
    config: &ReconstructionConfig,
) -> Result<LayeredAssignment, ReconstructionError> {
    start.check_covers(&graph.nodes)?;
    let table = ResolvabilityTable::build(model, graph);
    let ev = Evaluator::new(graph, &table, config.fitness());
    let labels = ev.labels_of(start);
    let k = start.layer_count();
    let (labels, reached) = climb(&ev, labels, k, config.max_hill_steps);
    let given = solution_quality(graph, start, &table, &config.fitness())?.value;
    if given > reached {
        return Ok(start.clone());
    }
    Ok(ev.to_assignment(&labels, k))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Move {
    Relocate { unit: usize, to: usize },
    Swap { a: usize, b: usize },
}

fn apply(labels: &mut [usize], mv: Move) {
    match mv {
        Move::Relocate { unit, to } => labels[unit] = to,
        Move::Swap { a, b } => labels.swap(a, b),
    }
}

/// Renames cluster ids so that id == 0-based layer index.
fn relabel_by_layer(ev: &Evaluator, labels: &mut [usize], k: usize) {
    let layer = cluster_layers(&ev.edges, labels, k);
    for l in labels.iter_mut() {
        *l = layer[*l];
    }
}

/// Labels are cluster ids in `0..k`; layer order is recomputed inside the
/// evaluator for each tentative neighbour.
fn climb(ev: &Evaluator, mut labels: Vec<usize>, k: usize, max_steps: usize) -> (Vec<usize>, f64) {
    let n = labels.len();
    relabel_by_layer(ev, &mut labels, k);
    let mut current = ev.value(&labels, k);
    for _ in 0..max_steps {
        let mut sizes = vec![0usize; k];
        for &c in &labels {
            sizes[c] += 1;
        }
        let mut best: Option<(Move, f64)> = None;
        let consider = |labels: &mut Vec<usize>, mv: Move, best: &mut Option<(Move, f64)>| {
            let saved = labels.clone();
            apply(labels, mv);
            let v = ev.value(labels, k);
            labels.copy_from_slice(&saved);
            let threshold = best.map_or(current, |(_, b)| b);
            if v > threshold + EPS {
                *best = Some((mv, v));
            }
        };
        for unit in 0..n {
            let from = labels[unit];
            if sizes[from] <= 1 {
                continue;
            }
            for to in 0..k {
                if to != from {
                    consider(&mut labels, Move::Relocate { unit, to }, &mut best);
                }
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                if labels[a] != labels[b] {
                    consider(&mut labels, Move::Swap { a, b }, &mut best);
                }
            }
        }
        match best {
            Some((mv, v)) => {
                apply(&mut labels, mv);
                relabel_by_layer(ev, &mut labels, k);
                current = v;
            }
            None => break,
        }
    }
    (labels, current)
}

/// Full reconstruction. Each restart seeds one greedy pass per layer cap
/// (`max_layers` down to 1) and climbs from it; the best result wins, with
/// earlier passes winning ties. Restart 0 is unperturbed.
pub fn reconstruct(
    model: &CodeModel,
    config: &ReconstructionConfig,
) -> Result<ReflexionModel, ReconstructionError> {
    config.validate()?;
    if model.units.is_empty() {
        return Err(ReconstructionError::EmptyModel);
    }
    let graph = unit_dependency_graph(model);
    let table = ResolvabilityTable::build(model, &graph);
    let ev = Evaluator::new(&graph, &table, config.fitness());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut best: Option<(Vec<usize>, usize, f64)> = None;
    for restart in 0..config.restarts {
        for cap in (1..=config.max_layers).rev() {
            let (start, k) = if restart == 0 {
                greedy_labels(&ev, cap, None)
            } else {
                greedy_labels(&ev, cap, Some(&mut rng))
            };
            let (labels, value) = climb(&ev, start, k, config.max_hill_steps);
            if best.as_ref().is_none_or(|(_, _, b)| value > b + EPS) {
                best = Some((labels, k, value));
            }
        }
    }
    let (labels, k, _) = best.expect("at least one pass");
    let architecture = ev.to_assignment(&labels, k);
    let (report, table) = check_conformance(model, &graph, &architecture)?;
    let quality = solution_quality(&graph, &architecture, &table, &config.fitness())?;
    Ok(ReflexionModel {
        model: model.clone(),
        architecture,
        report,
        quality,
    })
}

/// Quality of `assignment` for `model` under `config`.
pub fn assignment_quality(
    model: &CodeModel,
    assignment: &LayeredAssignment,
    config: &FitnessConfig,
) -> Result<SolutionQuality, ReconstructionError> {
    let graph = unit_dependency_graph(model);
    let table = ResolvabilityTable::build(model, &graph);
    Ok(solution_quality(&graph, assignment, &table, config)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ImplementationUnit, Member, RefKind, Reference};

    fn lone(names: &[&str]) -> CodeModel {
        CodeModel::new(names.iter().map(|n| ImplementationUnit::new(n)).collect())
    }

    #[test]
    fn single_unit_single_layer() {
        let m = lone(&["A"]);
        let g = unit_dependency_graph(&m);
        let a = greedy_seed(&g, &m, &ReconstructionConfig::default(), 3, None).unwrap();
        assert_eq!(a.layer_count(), 1);
    }

    #[test]
    fn independent_units_split() {
        let m = lone(&["A", "B"]);
        let g = unit_dependency_graph(&m);
        let a = greedy_seed(&g, &m, &ReconstructionConfig::default(), 3, None).unwrap();
        assert_eq!(a.layer_count(), 2);
    }

    #[test]
    fn empty_model_is_rejected() {
        let m = CodeModel::default();
        assert_eq!(
            reconstruct(&m, &ReconstructionConfig::default()),
            Err(ReconstructionError::EmptyModel)
        );
        let g = unit_dependency_graph(&m);
        assert_eq!(
            greedy_seed(&g, &m, &ReconstructionConfig::default(), 3, None),
            Err(ReconstructionError::EmptyModel)
        );
    }

    #[test]
    fn bad_config_is_rejected() {
        let m = lone(&["A"]);
        let cfg = ReconstructionConfig {
            restarts: 0,
            ..Default::default()
        };
        assert!(matches!(
            reconstruct(&m, &cfg),
            Err(ReconstructionError::InvalidConfig(_))
        ));
    }

    #[test]
    fn local_optimum_is_a_fixpoint() {
        // A -> B; every split of two units either couples or merges
        let m = CodeModel::new(vec![
            ImplementationUnit::new("A").with_member(Member::method("a").with_ref(Reference::new(
                "B",
                Some("b"),
                RefKind::Invocation,
            ))),
            ImplementationUnit::new("B").with_member(Member::method("b")),
        ]);
        let g = unit_dependency_graph(&m);
        let start = LayeredAssignment::from_layers(vec![vec!["A".into(), "B".into()]], 3).unwrap();
        let out = hill_climb(&start, &g, &m, &ReconstructionConfig::default()).unwrap();
        assert_eq!(out, start);
    }

    #[test]
    fn reconstruct_is_deterministic() {
        let m = CodeModel::new(vec![
            ImplementationUnit::new("A").with_member(Member::method("a").with_ref(Reference::new(
                "B",
                Some("b"),
                RefKind::Invocation,
            ))),
            ImplementationUnit::new("B").with_member(Member::method("b")),
            ImplementationUnit::new("C"),
        ]);
        let cfg = ReconstructionConfig {
            seed: 42,
            ..Default::default()
        };
        assert_eq!(
            reconstruct(&m, &cfg).unwrap(),
            reconstruct(&m, &cfg).unwrap()
        );
    }

    #[test]
    fn single_layer_cap_has_no_violations() {
        let m = CodeModel::new(vec![
            ImplementationUnit::new("A").with_member(Member::method("a").with_ref(Reference::new(
                "B",
                Some("b"),
                RefKind::Invocation,
            ))),
            ImplementationUnit::new("B").with_member(Member::method("b").with_ref(Reference::new(
                "A",
                Some("a"),
                RefKind::Invocation,
            ))),
        ]);
        let cfg = ReconstructionConfig {
            max_layers: 1,
            ..Default::default()
        };
        let r = reconstruct(&m, &cfg).unwrap();
        assert_eq!(r.architecture.layer_count(), 1);
        assert_eq!(r.violation_count(), 0);
    }
}
