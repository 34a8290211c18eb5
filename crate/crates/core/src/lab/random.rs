//! Random small models for cross-checking the search against the oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{CodeModel, ImplementationUnit, Member, RefKind, Reference, Via};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomModelSpec {
    pub min_units: usize,
    pub max_units: usize,
    pub max_members: usize,
    /// Chance that any given member references a given other unit.
    pub density: f64,
}

impl Default for RandomModelSpec {
    fn default() -> Self {
        RandomModelSpec {
            min_units: 2,
            max_units: 8,
            max_members: 3,
            density: 0.3,
        }
    }
}

/// A valid model drawn from `seed`. Units are named `U0`, `U1`, ...; every
/// unit has at least one member so references always have a target.
pub fn random_model(seed: u64, spec: &RandomModelSpec) -> CodeModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(spec.min_units..=spec.max_units);
    let shapes: Vec<Vec<bool>> = (0..n)
        .map(|_| {
            (0..rng.random_range(1..=spec.max_members))
                .map(|_| rng.random_bool(0.75))
                .collect()
        })
        .collect();
    let name = |i: usize, method: bool| {
        if method {
            format!("m{i}")
        } else {
            format!("C{i}")
        }
    };
    let mut units = Vec::with_capacity(n);
    for (u, shape) in shapes.iter().enumerate() {
        let mut unit = ImplementationUnit::new(&format!("U{u}"));
        for (i, &is_method) in shape.iter().enumerate() {
            let mut member = if is_method {
                Member::method(&name(i, true))
            } else {
                Member::constant(&name(i, false))
            };
            for (t, target) in shapes.iter().enumerate() {
                if t == u || !rng.random_bool(spec.density) {
                    continue;
                }
                let j = rng.random_range(0..target.len());
                let to_unit = format!("U{t}");
                let to_member = name(j, target[j]);
                let kind = if target[j] {
                    RefKind::Invocation
                } else {
                    RefKind::StateAccess
                };
                let mut r =
                    Reference::new(&to_unit, Some(&to_member), kind).times(rng.random_range(1..=3));
                if is_method && rng.random_bool(0.3) {
                    let p = member.parameters.len();
                    member = member.with_param(&format!("p{p}"), Some(&to_unit));
                    r = r.via(Via::Parameter(p));
                }
                member.add_reference(r);
            }
            // an occasional call to a sibling keeps some methods unmovable
            if is_method && shape.len() > 1 && rng.random_bool(0.3) {
                let j = (i + 1) % shape.len();
                let kind = if shape[j] {
                    RefKind::Invocation
                } else {
                    RefKind::StateAccess
                };
                member.add_reference(Reference::new(
                    &format!("U{u}"),
                    Some(&name(j, shape[j])),
                    kind,
                ));
            }
            unit = unit.with_member(member);
        }
        units.push(unit);
    }
    CodeModel::new(units)
}
