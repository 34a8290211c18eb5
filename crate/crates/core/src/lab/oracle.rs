//! Brute-force reference search over every layered assignment.

use crate::error::LabError;
use crate::fitness::{
    order_layers, solution_quality, LayeredAssignment, ResolvabilityTable, SolutionQuality,
};
use crate::graph::unit_dependency_graph;
use crate::model::CodeModel;
use crate::reconstruction::ReconstructionConfig;

pub const ORACLE_UNIT_LIMIT: usize = 10;

/// Calls `visit` with every restricted growth string of length `n` using at
/// most `max_blocks` distinct values, in lexicographic order. Each string
/// encodes one set partition.
pub fn for_each_partition(n: usize, max_blocks: usize, mut visit: impl FnMut(&[usize], usize)) {
    if n == 0 || max_blocks == 0 {
        return;
    }
    let mut rgs = vec![0usize; n];
    fn rec(
        i: usize,
        used: usize,
        rgs: &mut Vec<usize>,
        max_blocks: usize,
        visit: &mut dyn FnMut(&[usize], usize),
    ) {
        if i == rgs.len() {
            visit(rgs, used);
            return;
        }
        for b in 0..=used.min(max_blocks - 1) {
            rgs[i] = b;
            rec(i + 1, used.max(b + 1), rgs, max_blocks, visit);
        }
    }
    rgs[0] = 0;
    rec(1, 1, &mut rgs, max_blocks, &mut visit);
}

/// Best assignment over all partitions into `1..=max_layers` clusters, each
/// ordered by `order_layers` and scored by `solution_quality`. The first
/// partition in enumeration order wins ties.
pub fn exhaustive_oracle(
    model: &CodeModel,
    config: &ReconstructionConfig,
) -> Result<(LayeredAssignment, SolutionQuality), LabError> {
    let n = model.units.len();
    if n > ORACLE_UNIT_LIMIT {
        return Err(LabError::TooLarge {
            units: n,
            limit: ORACLE_UNIT_LIMIT,
        });
    }
    if n == 0 {
        return Err(crate::error::ReconstructionError::EmptyModel.into());
    }
    let graph = unit_dependency_graph(model);
    let table = ResolvabilityTable::build(model, &graph);
    let fitness = config.fitness();
    let mut best: Option<(LayeredAssignment, SolutionQuality)> = None;
    let mut failure = None;
    for_each_partition(n, config.max_layers, |rgs, blocks| {
        if failure.is_some() {
            return;
        }
        let mut clusters = vec![Vec::new(); blocks];
        for (i, &b) in rgs.iter().enumerate() {
            clusters[b].push(graph.nodes[i].clone());
        }
        let scored = order_layers(&clusters, &graph, config.max_layers)
            .and_then(|a| solution_quality(&graph, &a, &table, &fitness).map(|q| (a, q)));
        match scored {
            Ok((a, q)) => {
                if best.as_ref().is_none_or(|(_, b)| q.value > b.value) {
                    best = Some((a, q));
                }
            }
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(crate::error::ReconstructionError::from(e).into());
    }
    Ok(best.expect("at least one partition"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ImplementationUnit;

    #[test]
    fn partition_counts_are_stirling_sums() {
        // S(5,1)+S(5,2)+S(5,3) = 1 + 15 + 25
        let mut count = 0;
        for_each_partition(5, 3, |_, _| count += 1);
        assert_eq!(count, 41);
        let mut count = 0;
        for_each_partition(4, 4, |_, _| count += 1);
        assert_eq!(count, 15); // Bell(4)
    }

    #[test]
    fn one_unit() {
        let m = CodeModel::new(vec![ImplementationUnit::new("A")]);
        let (a, q) = exhaustive_oracle(&m, &ReconstructionConfig::default()).unwrap();
        assert_eq!(a.layer_count(), 1);
        assert!((q.value - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn two_isolated_units_split() {
        let m = CodeModel::new(vec![
            ImplementationUnit::new("A"),
            ImplementationUnit::new("B"),
        ]);
        let (a, q) = exhaustive_oracle(&m, &ReconstructionConfig::default()).unwrap();
        assert_eq!(a.layer_count(), 2);
        assert!((q.value - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn refuses_large_models() {
        let m = CodeModel::new(
            (0..11)
                .map(|i| ImplementationUnit::new(&format!("U{i}")))
                .collect(),
        );
        assert!(matches!(
            exhaustive_oracle(&m, &ReconstructionConfig::default()),
            Err(LabError::TooLarge { units: 11, .. })
        ));
    }
}
