//! The reference MVC system and controlled violation injection.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::LabError;
use crate::fitness::LayeredAssignment;
use crate::graph::unit_dependency_graph;
use crate::model::{CodeModel, ImplementationUnit, Member, MemberRef, RefKind, Reference, Via};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Model,
    View,
    Controller,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::Model, Role::View, Role::Controller];

    pub fn prefix(self) -> &'static str {
        match self {
            Role::Model => "Model",
            Role::View => "View",
            Role::Controller => "Controller",
        }
    }

    /// Role of a fixture unit name such as `View3`.
    pub fn of(unit: &str) -> Option<Role> {
        Role::ALL.into_iter().find(|r| {
            unit.strip_prefix(r.prefix())
                .is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
        })
    }

    /// Layer of the role in the intended architecture (1 = bottom).
    pub fn layer(self) -> usize {
        self as usize + 1
    }

    /// Member that higher roles call on this role. Units of the same role
    /// never call it, so excluding one of its parameters only touches
    /// callers above.
    fn entry_point(self) -> &'static str {
        match self {
            Role::Model => "load",
            Role::View => "render",
            Role::Controller => "handle",
        }
    }

    /// Own-unit reference that ties a method to its unit.
    fn tie(self, unit: &str) -> Reference {
        match self {
            Role::Model => read(unit, "CAPACITY"),
            Role::View => call(unit, "scroll"),
            Role::Controller => call(unit, "route"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub units_per_role: usize,
    /// References from each view unit to the model layer.
    pub baseline_density: usize,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        FixtureSpec {
            units_per_role: 5,
            baseline_density: 2,
        }
    }
}

fn unit_name(role: Role, i: usize) -> String {
    format!("{}{}", role.prefix(), i + 1)
}

fn call(unit: &str, member: &str) -> Reference {
    Reference::new(unit, Some(member), RefKind::Invocation)
}

fn read(unit: &str, member: &str) -> Reference {
    Reference::new(unit, Some(member), RefKind::StateAccess)
}

/// Two peer methods reference every other unit of the same role, one
/// triple each. The first is also tied to its own unit, which keeps
/// intra-role edges unresolvable when they violate.
fn peer_methods(
    role: Role,
    me: &str,
    peers: &[String],
    targets: [(&str, Reference); 2],
) -> [Member; 2] {
    let mut first = true;
    targets.map(|(name, target)| {
        let mut m = Member::method(name);
        for peer in peers.iter().filter(|p| p.as_str() != me) {
            let mut r = target.clone();
            r.to_unit = peer.clone();
            m.add_reference(r);
        }
        if std::mem::take(&mut first) && peers.len() > 1 {
            m.add_reference(role.tie(me));
        }
        m
    })
}

/// Builds the MVC fixture and its intended three-layer architecture.
///
/// Units of one role all depend on each other with two coupling triples per
/// pair, so roles are strongly cohesive. Views invoke the model layer
/// (`baseline_density` methods each). Controllers drive one view through
/// two of its methods and one model. No reference points upward.
pub fn build_mvc_fixture(spec: &FixtureSpec) -> (CodeModel, LayeredAssignment) {
    let n = spec.units_per_role.max(1);
    let names = |role: Role| (0..n).map(|i| unit_name(role, i)).collect::<Vec<_>>();
    let mut units = Vec::with_capacity(3 * n);

    let models = names(Role::Model);
    for me in &models {
        let [store, sync] = peer_methods(
            Role::Model,
            me,
            &models,
            [("store", call("", "sync")), ("sync", read("", "CAPACITY"))],
        );
        units.push(
            ImplementationUnit::new(me)
                .with_member(Member::constant("CAPACITY"))
                .with_member(Member::method("load").with_ref(read(me, "CAPACITY")))
                .with_member(store)
                .with_member(sync),
        );
    }

    let views = names(Role::View);
    for (i, me) in views.iter().enumerate() {
        let mut unit = ImplementationUnit::new(me);
        for d in 0..spec.baseline_density.max(1) {
            let name = match d {
                0 => "render".to_string(),
                1 => "refresh".to_string(),
                _ => format!("paint{d}"),
            };
            unit = unit
                .with_member(Member::method(&name).with_ref(call(&models[(i + d) % n], "load")));
        }
        let [layout, scroll] = peer_methods(
            Role::View,
            me,
            &views,
            [
                ("layout", call("", "layout")),
                ("scroll", Reference::new("", None, RefKind::TypeUse)),
            ],
        );
        units.push(unit.with_member(layout).with_member(scroll));
    }

    let controllers = names(Role::Controller);
    for (i, me) in controllers.iter().enumerate() {
        let [dispatch, route] = peer_methods(
            Role::Controller,
            me,
            &controllers,
            [
                ("dispatch", call("", "route")),
                ("route", call("", "dispatch")),
            ],
        );
        units.push(
            ImplementationUnit::new(me)
                .with_member(
                    Member::method("handle")
                        .with_ref(call(&views[i], "render"))
                        .with_ref(call(&views[i], "refresh")),
                )
                .with_member(Member::method("update").with_ref(call(&models[i], "load")))
                .with_member(dispatch)
                .with_member(route),
        );
    }

    let model = CodeModel::new(units);
    let layers = Role::ALL
        .iter()
        .map(|&r| (0..n).map(|i| unit_name(r, i)).collect())
        .collect();
    let intended = LayeredAssignment::from_layers(layers, 3).expect("three non-empty roles");
    (model, intended)
}

/// Intended MVC layering for any model whose units are all fixture-named.
pub fn intended_architecture(model: &CodeModel) -> Result<LayeredAssignment, LabError> {
    let mut layers: Vec<Vec<String>> = vec![Vec::new(); 3];
    for u in &model.units {
        let role = Role::of(&u.name)
            .ok_or_else(|| LabError::NotAFixture(format!("unit {} has no MVC role", u.name)))?;
        layers[role as usize].push(u.name.clone());
    }
    if layers.iter().any(Vec::is_empty) {
        return Err(LabError::NotAFixture(
            "every role needs at least one unit".into(),
        ));
    }
    Ok(LayeredAssignment::from_layers(layers, 3).expect("non-empty roles"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InjectionKind {
    MisplacedMethod,
    MisplacedConstant,
    WrongParameter,
}

impl InjectionKind {
    pub const CYCLE: [InjectionKind; 3] = [
        InjectionKind::MisplacedMethod,
        InjectionKind::MisplacedConstant,
        InjectionKind::WrongParameter,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectionPlan {
    pub count: usize,
    pub seed: u64,
}

/// Record of one injected violation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Injection {
    pub kind: InjectionKind,
    pub source_unit: String,
    pub target_unit: String,
    /// Member added or modified in the source unit.
    pub member: String,
    /// Misplaced methods that also use a sibling member cannot be moved.
    pub tied_to_unit: bool,
}

/// Adds `plan.count` upward dependencies, cycling through misplaced method,
/// misplaced constant and wrongly injected parameter. Each injection picks a
/// fresh (lower role, higher role) unit pair that has no edge yet, so it
/// always creates a new violating edge against the intended layering.
/// Wrong parameters only span adjacent roles.
/// Every second misplaced method also calls a sibling in its own unit.
///
/// Injections for a seed are a prefix of those for any larger count.
pub fn inject_violations(
    model: &CodeModel,
    plan: &InjectionPlan,
) -> Result<(CodeModel, Vec<Injection>), LabError> {
    intended_architecture(model)?;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut out = model.clone();
    let mut log = Vec::with_capacity(plan.count);
    for j in 0..plan.count {
        let kind = InjectionKind::CYCLE[j % 3];
        let graph = unit_dependency_graph(&out);
        let taken: BTreeSet<(&str, &str)> = graph
            .edges
            .iter()
            .map(|e| (e.from_unit.as_str(), e.to_unit.as_str()))
            .collect();
        let mut pairs = Vec::new();
        for low in &out.units {
            for high in &out.units {
                let (Some(rl), Some(rh)) = (Role::of(&low.name), Role::of(&high.name)) else {
                    continue;
                };
                // an injected parameter belongs to the method the role
                // directly above calls, so only adjacent roles qualify
                let reachable = match kind {
                    InjectionKind::WrongParameter => rh as usize == rl as usize + 1,
                    _ => rl < rh,
                };
                if reachable && !taken.contains(&(low.name.as_str(), high.name.as_str())) {
                    pairs.push((low.name.clone(), rh, high.name.clone()));
                }
            }
        }
        if pairs.is_empty() {
            return Err(LabError::InjectionExhausted(j));
        }
        let (source, target_role, target) = pairs[rng.random_range(0..pairs.len())].clone();
        let source_role = Role::of(&source).expect("fixture unit");
        let upward = call(&target, target_role.entry_point());
        let mut tied_to_unit = false;
        let member = match kind {
            InjectionKind::MisplacedMethod => {
                let name = format!("misplaced_method_{j}");
                let mut m = Member::method(&name).with_ref(upward);
                tied_to_unit = (j / 3) % 2 == 1;
                if tied_to_unit {
                    m = m.with_ref(source_role.tie(&source));
                }
                out.unit_mut(&source).expect("listed").members.push(m);
                name
            }
            InjectionKind::MisplacedConstant => {
                let name = format!("misplaced_const_{j}");
                out.unit_mut(&source)
                    .expect("listed")
                    .members
                    .push(Member::constant(&name).with_ref(upward));
                name
            }
            InjectionKind::WrongParameter => {
                let at = MemberRef::new(&source, source_role.entry_point());
                let m = out.member_mut(&at).expect("fixture entry point");
                let index = m.parameters.len();
                m.parameters.push(crate::model::Parameter {
                    name: format!("injected_{j}"),
                    type_unit: Some(target.clone()),
                });
                m.add_reference(upward.via(Via::Parameter(index)));
                at.member
            }
        };
        log.push(Injection {
            kind,
            source_unit: source,
            target_unit: target,
            member,
            tied_to_unit,
        });
    }
    out.canonicalize();
    Ok((out, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitness::detect_violations;

    #[test]
    fn default_fixture_is_clean() {
        let (m, a) = build_mvc_fixture(&FixtureSpec::default());
        assert_eq!(m.units.len(), 15);
        assert!(m.validate().is_empty());
        let g = unit_dependency_graph(&m);
        assert_eq!(detect_violations(&g, &a).unwrap().violation_count(), 0);
    }

    #[test]
    fn every_edge_flows_down_the_roles() {
        let (m, _) = build_mvc_fixture(&FixtureSpec::default());
        for e in &unit_dependency_graph(&m).edges {
            let (from, to) = (
                Role::of(&e.from_unit).unwrap(),
                Role::of(&e.to_unit).unwrap(),
            );
            assert!(from >= to, "{} -> {}", e.from_unit, e.to_unit);
        }
    }

    #[test]
    fn fixture_bytes_are_deterministic() {
        let spec = FixtureSpec::default();
        assert_eq!(
            build_mvc_fixture(&spec).0.to_json(),
            build_mvc_fixture(&spec).0.to_json()
        );
    }

    #[test]
    fn mini_fixture_intended_layering_is_the_oracle_optimum() {
        use crate::lab::oracle::exhaustive_oracle;
        use crate::reconstruction::ReconstructionConfig;
        let (m, intended) = build_mvc_fixture(&FixtureSpec {
            units_per_role: 2,
            ..Default::default()
        });
        let (best, _) = exhaustive_oracle(&m, &ReconstructionConfig::default()).unwrap();
        assert_eq!(best, intended);
    }

    fn upward_refs(model: &CodeModel, intended: &LayeredAssignment) -> u32 {
        model
            .references()
            .filter(|(at, r)| {
                !r.external && intended.layer_of(&at.unit) < intended.layer_of(&r.to_unit)
            })
            .map(|(_, r)| r.count)
            .sum()
    }

    #[test]
    fn every_injection_adds_an_upward_reference() {
        let (m, intended) = build_mvc_fixture(&FixtureSpec::default());
        for seed in 0..5 {
            let mut last = 0;
            for count in 1..=10 {
                let (out, _) = inject_violations(&m, &InjectionPlan { count, seed }).unwrap();
                let now = upward_refs(&out, &intended);
                assert!(now > last, "seed {seed} count {count}");
                last = now;
            }
            assert!(last >= 10);
            let (out, _) = inject_violations(&m, &InjectionPlan { count: 10, seed }).unwrap();
            let g = unit_dependency_graph(&out);
            assert_eq!(
                detect_violations(&g, &intended).unwrap().violation_count(),
                10
            );
        }
    }

    #[test]
    fn injected_kinds_classify_as_designed() {
        use crate::fitness::{check_conformance, Classification};
        let (m, intended) = build_mvc_fixture(&FixtureSpec::default());
        let (out, log) = inject_violations(&m, &InjectionPlan { count: 6, seed: 3 }).unwrap();
        let g = unit_dependency_graph(&out);
        let (report, _) = check_conformance(&out, &g, &intended).unwrap();
        for inj in &log {
            let entry = report
                .edges
                .iter()
                .find(|e| e.from == inj.source_unit && e.to == inj.target_unit)
                .unwrap();
            let expected = if inj.tied_to_unit {
                Classification::UnresolvableViolation
            } else {
                Classification::ResolvableViolation
            };
            assert_eq!(entry.classification, Some(expected), "{inj:?}");
        }
        assert!(log.iter().any(|i| i.tied_to_unit));
    }

    #[test]
    fn wrong_parameters_span_adjacent_roles() {
        let (m, _) = build_mvc_fixture(&FixtureSpec::default());
        for seed in 0..10 {
            let (_, log) = inject_violations(&m, &InjectionPlan { count: 9, seed }).unwrap();
            for inj in log
                .iter()
                .filter(|i| i.kind == InjectionKind::WrongParameter)
            {
                let (from, to) = (
                    Role::of(&inj.source_unit).unwrap(),
                    Role::of(&inj.target_unit).unwrap(),
                );
                assert_eq!(to.layer(), from.layer() + 1);
            }
        }
    }

    #[test]
    fn one_per_role_is_a_chain() {
        let (m, _) = build_mvc_fixture(&FixtureSpec {
            units_per_role: 1,
            ..Default::default()
        });
        let g = unit_dependency_graph(&m);
        let pairs: Vec<_> = g
            .edges
            .iter()
            .map(|e| (e.from_unit.as_str(), e.to_unit.as_str()))
            .collect();
        assert_eq!(
            pairs,
            vec![
                ("Controller1", "Model1"),
                ("Controller1", "View1"),
                ("View1", "Model1")
            ]
        );
    }

    #[test]
    fn role_names() {
        assert_eq!(Role::of("View12"), Some(Role::View));
        assert_eq!(Role::of("View"), None);
        assert_eq!(Role::of("Viewer1"), None);
    }

    #[test]
    fn zero_injections_change_nothing() {
        let (m, _) = build_mvc_fixture(&FixtureSpec::default());
        let (out, log) = inject_violations(&m, &InjectionPlan { count: 0, seed: 1 }).unwrap();
        assert_eq!(out, m);
        assert!(log.is_empty());
    }

    #[test]
    fn three_injections_cover_each_kind() {
        let (m, _) = build_mvc_fixture(&FixtureSpec::default());
        let (out, log) = inject_violations(&m, &InjectionPlan { count: 3, seed: 1 }).unwrap();
        let kinds: Vec<_> = log.iter().map(|i| i.kind).collect();
        assert_eq!(kinds, InjectionKind::CYCLE.to_vec());
        assert!(out.validate().is_empty());
    }

    #[test]
    fn injections_are_prefix_stable() {
        let (m, _) = build_mvc_fixture(&FixtureSpec::default());
        let (_, short) = inject_violations(&m, &InjectionPlan { count: 4, seed: 9 }).unwrap();
        let (_, long) = inject_violations(&m, &InjectionPlan { count: 10, seed: 9 }).unwrap();
        assert_eq!(short[..], long[..4]);
    }

    #[test]
    fn non_fixture_is_rejected() {
        let m = CodeModel::new(vec![ImplementationUnit::new("Service")]);
        assert!(matches!(
            inject_violations(&m, &InjectionPlan { count: 1, seed: 0 }),
            Err(LabError::NotAFixture(_))
        ));
    }
}
