//! Refactoring type definitions: typed parameter slots per revision side and
//! the autofill rules attached to them.
//!
//! The JSON form keys parameters by name inside a `before`/`after` object.
//! Parameter order within a side is kept as written, but readers accept keys
//! in any order and reject unknown keys.

use std::fmt;

use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::model::{ElementType, RevisionSide};
use crate::registry::RegistryError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutofillKind {
    /// Identifiers whose simple name equals the source declaration's name.
    Reference,
    /// The innermost element of `ancestor_type` enclosing the source value.
    Ancestor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AutofillRule {
    pub kind: AutofillKind,
    pub follows: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ancestor_type: Option<ElementType>,
}

impl AutofillRule {
    pub fn reference(follows: impl Into<String>) -> Self {
        AutofillRule { kind: AutofillKind::Reference, follows: follows.into(), ancestor_type: None }
    }

    pub fn ancestor(follows: impl Into<String>, ancestor_type: ElementType) -> Self {
        AutofillRule {
            kind: AutofillKind::Ancestor,
            follows: follows.into(),
            ancestor_type: Some(ancestor_type),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParameterSchema {
    pub name: String,
    pub side: RevisionSide,
    pub element_type: ElementType,
    pub multiple: bool,
    pub required: bool,
    pub autofill: Option<AutofillRule>,
}

impl ParameterSchema {
    pub fn new(name: impl Into<String>, side: RevisionSide, element_type: ElementType) -> Self {
        ParameterSchema {
            name: name.into(),
            side,
            element_type,
            multiple: false,
            required: false,
            autofill: None,
        }
    }

    pub fn required(mut self) -> Self {
        self.required = true;
        self
    }

    pub fn multiple(mut self) -> Self {
        self.multiple = true;
        self
    }

    pub fn with_autofill(mut self, rule: AutofillRule) -> Self {
        self.autofill = Some(rule);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefactoringTypeDefinition {
    pub name: String,
    pub before: Vec<ParameterSchema>,
    pub after: Vec<ParameterSchema>,
    pub builtin: bool,
}

impl RefactoringTypeDefinition {
    pub fn new(
        name: impl Into<String>,
        before: Vec<ParameterSchema>,
        after: Vec<ParameterSchema>,
    ) -> Self {
        RefactoringTypeDefinition { name: name.into(), before, after, builtin: false }
    }

    pub fn side(&self, side: RevisionSide) -> &[ParameterSchema] {
        match side {
            RevisionSide::Before => &self.before,
            RevisionSide::After => &self.after,
        }
    }

    pub fn parameter(&self, side: RevisionSide, name: &str) -> Option<&ParameterSchema> {
        self.side(side).iter().find(|p| p.name == name)
    }

    /// All parameters, before side first, in declaration order.
    pub fn parameters(&self) -> impl Iterator<Item = &ParameterSchema> {
        self.before.iter().chain(self.after.iter())
    }

    /// The parameter an autofill rule on `target_side` draws from: a parameter
    /// of that name on the same side, otherwise on the opposite side.
    pub fn autofill_source(&self, target_side: RevisionSide, rule: &AutofillRule) -> Option<&ParameterSchema> {
        self.parameter(target_side, &rule.follows)
            .or_else(|| self.parameter(target_side.other(), &rule.follows))
    }

    pub fn validate(&self) -> Result<(), RegistryError> {
        let invalid = |msg: String| Err(RegistryError::InvalidSchema(format!("{}: {msg}", self.name)));
        if self.name.trim().is_empty() {
            return Err(RegistryError::InvalidSchema("type name must be non-empty".into()));
        }
        if self.before.is_empty() && self.after.is_empty() {
            return invalid("at least one parameter is required".into());
        }
        for side in RevisionSide::BOTH {
            let params = self.side(side);
            for (i, p) in params.iter().enumerate() {
                if p.side != side {
                    return invalid(format!("parameter {:?} listed under {side} but declared {}", p.name, p.side));
                }
                if p.name.trim().is_empty() {
                    return invalid(format!("empty parameter name on {side}"));
                }
                if params[..i].iter().any(|q| q.name == p.name) {
                    return invalid(format!("duplicate parameter {:?} on {side}", p.name));
                }
            }
        }
        for p in self.parameters() {
            let Some(rule) = &p.autofill else { continue };
            let Some(source) = self.autofill_source(p.side, rule) else {
                return invalid(format!("autofill of {:?} follows unknown parameter {:?}", p.name, rule.follows));
            };
            if source.side == p.side && source.name == p.name {
                return invalid(format!("autofill of {:?} follows itself", p.name));
            }
            if source.element_type == ElementType::CodeFragment && rule.kind == AutofillKind::Reference {
                return invalid(format!("reference autofill of {:?} cannot follow a CodeFragment", p.name));
            }
            match rule.kind {
                AutofillKind::Reference => {
                    if !p.multiple || p.element_type != ElementType::Identifier {
                        return invalid(format!(
                            "reference autofill target {:?} must be a multiple Identifier parameter",
                            p.name
                        ));
                    }
                    if rule.ancestor_type.is_some() {
                        return invalid(format!("reference autofill of {:?} takes no ancestorType", p.name));
                    }
                }
                AutofillKind::Ancestor => {
                    let Some(ancestor) = rule.ancestor_type else {
                        return invalid(format!("ancestor autofill of {:?} needs ancestorType", p.name));
                    };
                    if !ancestor.is_concrete() || ancestor != p.element_type {
                        return invalid(format!(
                            "ancestor autofill of {:?} must derive its own element type, got {ancestor}",
                            p.name
                        ));
                    }
                    if source.side != p.side {
                        return invalid(format!("ancestor autofill of {:?} must follow a same-side parameter", p.name));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, RegistryError> {
        let doc: TypeDocument =
            serde_json::from_str(text).map_err(|e| RegistryError::InvalidSchema(e.to_string()))?;
        let def = doc.into_definition();
        def.validate()?;
        Ok(def)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&TypeDocument::from(self)).expect("type documents always serialize")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(TypeDocument::from(self)).expect("type documents always serialize")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamSpec {
    #[serde(rename = "type")]
    element_type: ElementType,
    #[serde(default)]
    multiple: bool,
    #[serde(default)]
    required: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    autofill: Option<AutofillRule>,
}

/// Parameter objects that remember the order their keys were written in.
#[derive(Debug, Clone, Default)]
struct OrderedParams(Vec<(String, ParamSpec)>);

impl Serialize for OrderedParams {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for OrderedParams {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ParamsVisitor;

        impl<'de> Visitor<'de> for ParamsVisitor {
            type Value = OrderedParams;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object of parameter name to parameter spec")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
                let mut out: Vec<(String, ParamSpec)> = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, ParamSpec>()? {
                    if out.iter().any(|(name, _)| *name == k) {
                        return Err(de::Error::custom(format!("duplicate parameter {k:?}")));
                    }
                    out.push((k, v));
                }
                Ok(OrderedParams(out))
            }
        }

        deserializer.deserialize_map(ParamsVisitor)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TypeDocument {
    name: String,
    #[serde(default)]
    before: OrderedParams,
    #[serde(default)]
    after: OrderedParams,
}

impl TypeDocument {
    fn into_definition(self) -> RefactoringTypeDefinition {
        let convert = |side: RevisionSide, params: OrderedParams| {
            params
                .0
                .into_iter()
                .map(|(name, spec)| ParameterSchema {
                    name,
                    side,
                    element_type: spec.element_type,
                    multiple: spec.multiple,
                    required: spec.required,
                    autofill: spec.autofill,
                })
                .collect()
        };
        RefactoringTypeDefinition {
            name: self.name,
            before: convert(RevisionSide::Before, self.before),
            after: convert(RevisionSide::After, self.after),
            builtin: false,
        }
    }
}

impl From<&RefactoringTypeDefinition> for TypeDocument {
    fn from(def: &RefactoringTypeDefinition) -> Self {
        let convert = |params: &[ParameterSchema]| {
            OrderedParams(
                params
                    .iter()
                    .map(|p| {
                        (
                            p.name.clone(),
                            ParamSpec {
                                element_type: p.element_type,
                                multiple: p.multiple,
                                required: p.required,
                                autofill: p.autofill.clone(),
                            },
                        )
                    })
                    .collect(),
            )
        };
        TypeDocument { name: def.name.clone(), before: convert(&def.before), after: convert(&def.after) }
    }
}
