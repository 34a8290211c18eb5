//! Identity-tracking behavior ledger.
//!
//! Each member gets a logical identity that survives relocation and renames.
//! The ledger keeps the multiset of `(caller, callee, kind)` triples over
//! logical identities and checks that a transformation changed it only in
//! the permitted way: moves must leave it untouched, parameter exclusion may
//! only re-attribute parameter-borne references to the callers and add the
//! listener invocations.

use std::collections::BTreeMap;

use crate::error::RefactorError;
use crate::model::{CodeModel, MemberRef, RefKind, Reference, Via};

use super::transform::{listener_name, moved_name, Transformation};

pub type Triple = (String, String, RefKind);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BehaviorLedger {
    identity: BTreeMap<MemberRef, String>,
    checks: usize,
}

impl BehaviorLedger {
    pub fn new(model: &CodeModel) -> Self {
        let identity = model
            .units
            .iter()
            .flat_map(|u| {
                u.members.iter().map(move |m| {
                    (
                        MemberRef::new(&u.name, &m.name),
                        format!("{}.{}", u.name, m.name),
                    )
                })
            })
            .collect();
        BehaviorLedger {
            identity,
            checks: 0,
        }
    }

    /// Number of transformations verified so far.
    pub fn checks(&self) -> usize {
        self.checks
    }

    pub fn identity_of(&self, at: &MemberRef) -> String {
        self.identity
            .get(at)
            .cloned()
            .unwrap_or_else(|| at.to_string())
    }

    /// Current location of the member whose original location was
    /// `identity` (written `Unit.member`).
    pub fn locate(&self, identity: &str) -> Option<MemberRef> {
        self.identity
            .iter()
            .find(|(_, id)| id.as_str() == identity)
            .map(|(at, _)| at.clone())
    }

    fn callee_id(&self, r: &Reference) -> String {
        match (&r.to_member, r.external) {
            (_, true) => format!(
                "external:{}.{}",
                r.to_unit,
                r.to_member.as_deref().unwrap_or("*")
            ),
            (None, false) => format!("unit:{}", r.to_unit),
            (Some(m), false) => self.identity_of(&MemberRef::new(&r.to_unit, m)),
        }
    }

    /// Triple multiset of `model` under the current identities.
    pub fn triples(&self, model: &CodeModel) -> BTreeMap<Triple, u64> {
        let mut out = BTreeMap::new();
        for (at, r) in model.references() {
            let key = (self.identity_of(&at), self.callee_id(r), r.kind);
            *out.entry(key).or_insert(0) += u64::from(r.count);
        }
        out
    }

    /// Verifies `after = transformation(before)` against the ledger and
    /// advances the identities.
    pub fn record(
        &mut self,
        before: &CodeModel,
        transformation: &Transformation,
        after: &CodeModel,
    ) -> Result<(), RefactorError> {
        let mut expected = self.triples(before);
        match transformation {
            Transformation::MoveMember {
                subject,
                target_unit,
            } => {
                let name = moved_name(before, &subject.member, target_unit);
                let id = self.identity_of(subject);
                self.identity.remove(subject);
                self.identity.insert(MemberRef::new(target_unit, name), id);
            }
            Transformation::ExcludeParameter {
                subject,
                param_index,
            } => {
                let method = before
                    .member(subject)
                    .ok_or_else(|| RefactorError::NoSuchMethod(subject.to_string()))?;
                let method_id = self.identity_of(subject);
                let listener_at = MemberRef::new(&subject.unit, listener_name(&subject.member));
                let listener_id = self
                    .identity
                    .entry(listener_at)
                    .or_insert_with(|| format!("listener:{method_id}"))
                    .clone();
                let callers: Vec<String> = before
                    .callers_of(subject)
                    .iter()
                    .map(|c| self.identity_of(c))
                    .collect();
                for r in method
                    .references
                    .iter()
                    .filter(|r| r.via == Via::Parameter(*param_index))
                {
                    let callee = self.callee_id(r);
                    let n = u64::from(r.count);
                    remove(
                        &mut expected,
                        (method_id.clone(), callee.clone(), r.kind),
                        n,
                    );
                    for c in &callers {
                        *expected
                            .entry((c.clone(), callee.clone(), r.kind))
                            .or_insert(0) += n;
                    }
                }
                for c in &callers {
                    *expected
                        .entry((c.clone(), listener_id.clone(), RefKind::Invocation))
                        .or_insert(0) += 1;
                }
            }
        }
        let actual = self.triples(after);
        self.checks += 1;
        if actual != expected {
            return Err(RefactorError::LedgerViolation {
                transformation: transformation.to_string(),
                detail: describe_diff(&expected, &actual),
            });
        }
        Ok(())
    }
}

fn remove(map: &mut BTreeMap<Triple, u64>, key: Triple, n: u64) {
    if let Some(v) = map.get_mut(&key) {
        *v = v.saturating_sub(n);
        if *v == 0 {
            map.remove(&key);
        }
    }
}

fn describe_diff(expected: &BTreeMap<Triple, u64>, actual: &BTreeMap<Triple, u64>) -> String {
    let mut parts = Vec::new();
    for (k, v) in expected {
        if actual.get(k) != Some(v) {
            parts.push(format!(
                "{} -> {} ({}): expected {v}, got {}",
                k.0,
                k.1,
                k.2,
                actual.get(k).copied().unwrap_or(0)
            ));
        }
    }
    for (k, v) in actual {
        if !expected.contains_key(k) {
            parts.push(format!("{} -> {} ({}): unexpected {v}", k.0, k.1, k.2));
        }
    }
    parts.join("; ")
}
