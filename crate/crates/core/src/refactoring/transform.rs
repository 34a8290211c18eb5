use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::RefactorError;
use crate::model::{CodeModel, Member, MemberRef, RefKind, Reference, Via};

/// A model-level refactoring. `MoveMember` covers both move method and move
/// constant; the member's kind decides which one it is.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transformation {
    MoveMember {
        subject: MemberRef,
        target_unit: String,
    },
    ExcludeParameter {
        subject: MemberRef,
        param_index: usize,
    },
}

impl Transformation {
    pub fn subject(&self) -> &MemberRef {
        match self {
            Transformation::MoveMember { subject, .. }
            | Transformation::ExcludeParameter { subject, .. } => subject,
        }
    }

    pub fn apply(&self, model: &CodeModel) -> Result<CodeModel, RefactorError> {
        match self {
            Transformation::MoveMember {
                subject,
                target_unit,
            } => move_member(model, subject, target_unit),
            Transformation::ExcludeParameter {
                subject,
                param_index,
            } => exclude_parameter(model, subject, *param_index),
        }
    }
}

impl fmt::Display for Transformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transformation::MoveMember {
                subject,
                target_unit,
            } => write!(f, "move {subject} -> {target_unit}"),
            Transformation::ExcludeParameter {
                subject,
                param_index,
            } => write!(f, "exclude {subject}#{param_index}"),
        }
    }
}

/// Name `member` will carry once moved into `target_unit`: unchanged unless
/// it collides, in which case the smallest free `_moved<k>` suffix is used.
pub fn moved_name(model: &CodeModel, member: &str, target_unit: &str) -> String {
    let Some(target) = model.unit(target_unit) else {
        return member.to_string();
    };
    if target.member(member).is_none() {
        return member.to_string();
    }
    (1..)
        .map(|k| format!("{member}_moved{k}"))
        .find(|candidate| target.member(candidate).is_none())
        .expect("unbounded suffix search")
}

pub fn listener_name(method: &str) -> String {
    format!("on_{method}_listener")
}

/// Relocates a member into another unit and retargets every reference to it.
/// The member's own references keep their targets, so former sibling calls
/// become inter-unit dependencies.
pub fn move_member(
    model: &CodeModel,
    member: &MemberRef,
    target_unit: &str,
) -> Result<CodeModel, RefactorError> {
    if model.member(member).is_none() {
        return Err(RefactorError::NoSuchMember(member.to_string()));
    }
    if model.unit(target_unit).is_none() {
        return Err(RefactorError::NoSuchUnit(target_unit.to_string()));
    }
    if member.unit == target_unit {
        return Err(RefactorError::TargetIsSource(member.to_string()));
    }
    let new_name = moved_name(model, &member.member, target_unit);
    let mut out = model.clone();
    let source = out.unit_mut(&member.unit).expect("checked above");
    let pos = source
        .members
        .iter()
        .position(|m| m.name == member.member)
        .expect("checked above");
    let mut moving = source.members.remove(pos);
    moving.name = new_name.clone();
    out.unit_mut(target_unit)
        .expect("checked above")
        .members
        .push(moving);

    // A parameter that only ever reaches the moved member is retyped to the
    // new host; other parameter-borne calls to it become direct.
    for unit in &mut out.units {
        for m in &mut unit.members {
            let only_reaches_moved = |i: usize| {
                m.references
                    .iter()
                    .filter(|r| r.via == Via::Parameter(i))
                    .all(|r| r.targets(&member.unit, &member.member))
            };
            let retype: Vec<bool> = (0..m.parameters.len()).map(only_reaches_moved).collect();
            for r in &mut m.references {
                if r.targets(&member.unit, &member.member) {
                    r.to_unit = target_unit.to_string();
                    r.to_member = Some(new_name.clone());
                    if let Via::Parameter(i) = r.via {
                        if retype[i] {
                            m.parameters[i].type_unit = Some(target_unit.to_string());
                        } else {
                            r.via = Via::Direct;
                        }
                    }
                }
            }
        }
    }
    out.canonicalize();
    Ok(out)
}

/// Removes a parameter from a method. References that went through the
/// parameter are re-homed, as direct references, into every caller of the
/// method; a listener marker is added to the method's unit and each caller
/// invokes it. Without callers the parameter-borne references are dropped.
pub fn exclude_parameter(
    model: &CodeModel,
    method: &MemberRef,
    param_index: usize,
) -> Result<CodeModel, RefactorError> {
    let m = model
        .member(method)
        .filter(|m| m.is_method())
        .ok_or_else(|| RefactorError::NoSuchMethod(method.to_string()))?;
    if param_index >= m.parameters.len() {
        return Err(RefactorError::BadParamIndex {
            method: method.to_string(),
            index: param_index,
            count: m.parameters.len(),
        });
    }
    let callers = model.callers_of(method);
    let mut out = model.clone();

    let target = out.member_mut(method).expect("checked above");
    target.parameters.remove(param_index);
    let mut borne = Vec::new();
    let mut kept = Vec::new();
    for mut r in std::mem::take(&mut target.references) {
        match r.via {
            Via::Parameter(i) if i == param_index => {
                r.via = Via::Direct;
                borne.push(r);
            }
            Via::Parameter(i) if i > param_index => {
                r.via = Via::Parameter(i - 1);
                kept.push(r);
            }
            _ => kept.push(r),
        }
    }
    target.references = kept;

    let listener = listener_name(&method.member);
    let unit = out.unit_mut(&method.unit).expect("checked above");
    if unit.member(&listener).is_none() {
        unit.members.push(Member::constant(&listener));
    }

    for caller in &callers {
        let c = out.member_mut(caller).expect("callers exist");
        for r in &borne {
            c.add_reference(r.clone());
        }
        c.add_reference(Reference::new(
            &method.unit,
            Some(&listener),
            RefKind::Invocation,
        ));
    }
    out.canonicalize();
    Ok(out)
}
