//! Language-neutral code model: implementation units, their members and the
//! references between them.
//!
//! Models are exchanged as JSON documents (`schema_version` 1). Loading a
//! document validates it and brings it into canonical order, so two loads of
//! semantically equal documents compare equal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeModel {
    pub schema_version: u32,
    #[serde(default)]
    pub units: Vec<ImplementationUnit>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImplementationUnit {
    pub name: String,
    #[serde(default)]
    pub members: Vec<Member>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemberKind {
    Method,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Member {
    pub name: String,
    pub kind: MemberKind,
    #[serde(default)]
    pub parameters: Vec<Parameter>,
    #[serde(default)]
    pub references: Vec<Reference>,
}

/// A formal parameter. `type_unit = None` marks a type outside the system
/// (primitives, library classes).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameter {
    pub name: String,
    pub type_unit: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefKind {
    Invocation,
    StateAccess,
    TypeUse,
}

impl fmt::Display for RefKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RefKind::Invocation => "invocation",
            RefKind::StateAccess => "state_access",
            RefKind::TypeUse => "type_use",
        })
    }
}

/// How the referencing member reaches the target: directly, or through one
/// of its own parameters.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Via {
    #[default]
    Direct,
    Parameter(usize),
}

fn default_count() -> u32 {
    1
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// Field order doubles as the canonical sort key.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reference {
    pub to_unit: String,
    #[serde(default)]
    pub to_member: Option<String>,
    pub kind: RefKind,
    #[serde(default)]
    pub via: Via,
    #[serde(default = "default_count")]
    pub count: u32,
    /// Target lies outside the analysed system; never validated, never weighted.
    #[serde(default, skip_serializing_if = "is_false")]
    pub external: bool,
}

impl Reference {
    pub fn new(to_unit: &str, to_member: Option<&str>, kind: RefKind) -> Self {
        Reference {
            to_unit: to_unit.to_string(),
            to_member: to_member.map(str::to_string),
            kind,
            via: Via::Direct,
            count: 1,
            external: false,
        }
    }

    pub fn via(mut self, via: Via) -> Self {
        self.via = via;
        self
    }

    pub fn times(mut self, count: u32) -> Self {
        self.count = count;
        self
    }

    /// Same target, kind and route; counts may differ.
    pub fn same_site(&self, other: &Reference) -> bool {
        self.to_unit == other.to_unit
            && self.to_member == other.to_member
            && self.kind == other.kind
            && self.via == other.via
            && self.external == other.external
    }

    pub fn targets(&self, unit: &str, member: &str) -> bool {
        !self.external && self.to_unit == unit && self.to_member.as_deref() == Some(member)
    }
}

/// Fully qualified member name, `unit.member`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MemberRef {
    pub unit: String,
    pub member: String,
}

impl MemberRef {
    pub fn new(unit: impl Into<String>, member: impl Into<String>) -> Self {
        MemberRef {
            unit: unit.into(),
            member: member.into(),
        }
    }
}

impl fmt::Display for MemberRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.unit, self.member)
    }
}

impl Member {
    pub fn method(name: &str) -> Self {
        Member {
            name: name.to_string(),
            kind: MemberKind::Method,
            parameters: Vec::new(),
            references: Vec::new(),
        }
    }

    pub fn constant(name: &str) -> Self {
        Member {
            name: name.to_string(),
            kind: MemberKind::Constant,
            parameters: Vec::new(),
            references: Vec::new(),
        }
    }

    pub fn with_param(mut self, name: &str, type_unit: Option<&str>) -> Self {
        self.parameters.push(Parameter {
            name: name.to_string(),
            type_unit: type_unit.map(str::to_string),
        });
        self
    }

    pub fn with_ref(mut self, reference: Reference) -> Self {
        self.add_reference(reference);
        self
    }

    /// Adds a reference, merging occurrence counts into an existing one at the
    /// same site.
    pub fn add_reference(&mut self, reference: Reference) {
        match self.references.iter_mut().find(|r| r.same_site(&reference)) {
            Some(existing) => existing.count += reference.count,
            None => self.references.push(reference),
        }
    }

    pub fn is_method(&self) -> bool {
        self.kind == MemberKind::Method
    }

    pub fn is_constant(&self) -> bool {
        self.kind == MemberKind::Constant
    }
}

impl ImplementationUnit {
    pub fn new(name: &str) -> Self {
        ImplementationUnit {
            name: name.to_string(),
            members: Vec::new(),
        }
    }

    pub fn with_member(mut self, member: Member) -> Self {
        self.members.push(member);
        self
    }

    pub fn member(&self, name: &str) -> Option<&Member> {
        self.members.iter().find(|m| m.name == name)
    }

    pub fn member_mut(&mut self, name: &str) -> Option<&mut Member> {
        self.members.iter_mut().find(|m| m.name == name)
    }
}

impl Default for CodeModel {
    fn default() -> Self {
        CodeModel::new(Vec::new())
    }
}

impl CodeModel {
    pub fn new(units: Vec<ImplementationUnit>) -> Self {
        let mut model = CodeModel {
            schema_version: SCHEMA_VERSION,
            units,
        };
        model.canonicalize();
        model
    }

    pub fn unit(&self, name: &str) -> Option<&ImplementationUnit> {
        self.units.iter().find(|u| u.name == name)
    }

    pub fn unit_mut(&mut self, name: &str) -> Option<&mut ImplementationUnit> {
        self.units.iter_mut().find(|u| u.name == name)
    }

    pub fn member(&self, at: &MemberRef) -> Option<&Member> {
        self.unit(&at.unit)?.member(&at.member)
    }

    pub fn member_mut(&mut self, at: &MemberRef) -> Option<&mut Member> {
        self.unit_mut(&at.unit)?.member_mut(&at.member)
    }

    pub fn unit_names(&self) -> Vec<String> {
        self.units.iter().map(|u| u.name.clone()).collect()
    }

    /// Every `(member, reference)` pair in canonical order.
    pub fn references(&self) -> impl Iterator<Item = (MemberRef, &Reference)> + '_ {
        self.units.iter().flat_map(|u| {
            u.members.iter().flat_map(move |m| {
                m.references
                    .iter()
                    .map(move |r| (MemberRef::new(&u.name, &m.name), r))
            })
        })
    }

    /// Members holding an invocation reference to `callee` (excluding the
    /// callee itself).
    pub fn callers_of(&self, callee: &MemberRef) -> Vec<MemberRef> {
        let mut out = Vec::new();
        for unit in &self.units {
            for member in &unit.members {
                if unit.name == callee.unit && member.name == callee.member {
                    continue;
                }
                let calls = member.references.iter().any(|r| {
                    r.kind == RefKind::Invocation && r.targets(&callee.unit, &callee.member)
                });
                if calls {
                    out.push(MemberRef::new(&unit.name, &member.name));
                }
            }
        }
        out
    }

    /// Sorts units and members by name and references by
    /// `(to_unit, to_member, kind, via)`, merging duplicate sites.
    pub fn canonicalize(&mut self) {
        self.units.sort_by(|a, b| a.name.cmp(&b.name));
        for unit in &mut self.units {
            unit.members.sort_by(|a, b| a.name.cmp(&b.name));
            for member in &mut unit.members {
                let refs = std::mem::take(&mut member.references);
                for r in refs {
                    member.add_reference(r);
                }
                member.references.sort();
            }
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("code model serializes");
        text.push('\n');
        text
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        validate(self)
    }
}

/// Parses, validates and canonicalizes a model document.
pub fn load_model(text: &str) -> Result<CodeModel, ModelError> {
    let mut model: CodeModel = serde_json::from_str(text).map_err(|e| ModelError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let diagnostics = validate(&model);
    if !diagnostics.is_empty() {
        return Err(ModelError::Validation(diagnostics));
    }
    model.canonicalize();
    Ok(model)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DiagnosticCode {
    UnsupportedSchema,
    EmptyUnitName,
    DuplicateUnit,
    EmptyMemberName,
    DuplicateMember,
    ConstantHasParams,
    BadParamIndex,
    ParamTypeMismatch,
    ViaParamOnConstant,
    UnknownParamType,
    UnknownUnit,
    UnknownMember,
    ZeroCount,
}

impl DiagnosticCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DiagnosticCode::UnsupportedSchema => "UNSUPPORTED_SCHEMA",
            DiagnosticCode::EmptyUnitName => "EMPTY_UNIT_NAME",
            DiagnosticCode::DuplicateUnit => "DUPLICATE_UNIT",
            DiagnosticCode::EmptyMemberName => "EMPTY_MEMBER_NAME",
            DiagnosticCode::DuplicateMember => "DUPLICATE_MEMBER",
            DiagnosticCode::ConstantHasParams => "CONSTANT_HAS_PARAMS",
            DiagnosticCode::BadParamIndex => "BAD_PARAM_INDEX",
            DiagnosticCode::ParamTypeMismatch => "PARAM_TYPE_MISMATCH",
            DiagnosticCode::ViaParamOnConstant => "VIA_PARAM_ON_CONSTANT",
            DiagnosticCode::UnknownParamType => "UNKNOWN_PARAM_TYPE",
            DiagnosticCode::UnknownUnit => "UNKNOWN_UNIT",
            DiagnosticCode::UnknownMember => "UNKNOWN_MEMBER",
            DiagnosticCode::ZeroCount => "ZERO_COUNT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", self.code.as_str(), self.path, self.message)
    }
}

fn reference_path(unit: &str, member: &str, r: &Reference) -> String {
    match &r.to_member {
        Some(m) => format!("{unit}.{member} -> {}.{m}", r.to_unit),
        None => format!("{unit}.{member} -> {}", r.to_unit),
    }
}

/// Checks every model invariant and reports all violations found.
pub fn validate(model: &CodeModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |code, path: String, message: String| {
        out.push(Diagnostic {
            code,
            path,
            message,
        })
    };

    if model.schema_version != SCHEMA_VERSION {
        push(
            DiagnosticCode::UnsupportedSchema,
            "schema_version".into(),
            format!(
                "expected schema_version {SCHEMA_VERSION}, got {}",
                model.schema_version
            ),
        );
    }

    let mut members_by_unit: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for unit in &model.units {
        if unit.name.is_empty() {
            push(
                DiagnosticCode::EmptyUnitName,
                "<unnamed>".into(),
                "unit name must not be empty".into(),
            );
        }
        if members_by_unit.contains_key(unit.name.as_str()) {
            push(
                DiagnosticCode::DuplicateUnit,
                unit.name.clone(),
                format!("unit {} declared more than once", unit.name),
            );
            continue;
        }
        let mut names = BTreeSet::new();
        for member in &unit.members {
            if member.name.is_empty() {
                push(
                    DiagnosticCode::EmptyMemberName,
                    format!("{}.<unnamed>", unit.name),
                    "member name must not be empty".into(),
                );
            }
            if !names.insert(member.name.as_str()) {
                push(
                    DiagnosticCode::DuplicateMember,
                    format!("{}.{}", unit.name, member.name),
                    format!("member {} declared more than once", member.name),
                );
            }
        }
        members_by_unit.insert(unit.name.as_str(), names);
    }

    for unit in &model.units {
        for member in &unit.members {
            let here = format!("{}.{}", unit.name, member.name);
            if member.is_constant() && !member.parameters.is_empty() {
                push(
                    DiagnosticCode::ConstantHasParams,
                    here.clone(),
                    format!("constant declares {} parameter(s)", member.parameters.len()),
                );
            }
            for p in &member.parameters {
                if let Some(t) = &p.type_unit {
                    if !members_by_unit.contains_key(t.as_str()) {
                        push(
                            DiagnosticCode::UnknownParamType,
                            format!("{here}({})", p.name),
                            format!("parameter type {t} is not a unit of the model"),
                        );
                    }
                }
            }
            for r in &member.references {
                let path = reference_path(&unit.name, &member.name, r);
                if r.count == 0 {
                    push(
                        DiagnosticCode::ZeroCount,
                        path.clone(),
                        "reference count must be at least 1".into(),
                    );
                }
                if let Via::Parameter(i) = r.via {
                    if member.is_constant() {
                        push(
                            DiagnosticCode::ViaParamOnConstant,
                            path.clone(),
                            "constants have no parameters to route through".into(),
                        );
                    } else if i >= member.parameters.len() {
                        push(
                            DiagnosticCode::BadParamIndex,
                            path.clone(),
                            format!(
                                "via parameter {i} but method has {} parameter(s)",
                                member.parameters.len()
                            ),
                        );
                    } else if !r.external
                        && member.parameters[i].type_unit.as_deref() != Some(r.to_unit.as_str())
                    {
                        push(
                            DiagnosticCode::ParamTypeMismatch,
                            path.clone(),
                            format!(
                                "parameter {} is not typed by {}",
                                member.parameters[i].name, r.to_unit
                            ),
                        );
                    }
                }
                if r.external {
                    continue;
                }
                match members_by_unit.get(r.to_unit.as_str()) {
                    None => push(
                        DiagnosticCode::UnknownUnit,
                        path,
                        format!("target unit {} does not exist", r.to_unit),
                    ),
                    Some(names) => {
                        if let Some(m) = &r.to_member {
                            if !names.contains(m.as_str()) {
                                push(
                                    DiagnosticCode::UnknownMember,
                                    path,
                                    format!("unit {} has no member {m}", r.to_unit),
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    out
}
