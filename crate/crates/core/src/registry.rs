//! The refactoring-type registry: the predefined study types plus any
//! user-defined types.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::ElementType::*;
use crate::model::RevisionSide::{After, Before};
use crate::schema::{AutofillRule, ParameterSchema, RefactoringTypeDefinition};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("refactoring type {0:?} is already registered")]
    DuplicateName(String),
    #[error("invalid refactoring type schema: {0}")]
    InvalidSchema(String),
    #[error("refactoring type {0:?} is predefined and cannot be replaced")]
    BuiltinOverwrite(String),
    #[error("unknown refactoring type {0:?}")]
    UnknownType(String),
}

fn builtin(name: &str, before: Vec<ParameterSchema>, after: Vec<ParameterSchema>) -> RefactoringTypeDefinition {
    RefactoringTypeDefinition { builtin: true, ..RefactoringTypeDefinition::new(name, before, after) }
}

/// The predefined refactoring types, sorted by name.
pub fn predefined_types() -> Vec<RefactoringTypeDefinition> {
    let references = |follows: &str, side| {
        ParameterSchema::new("references", side, Identifier)
            .multiple()
            .with_autofill(AutofillRule::reference(follows))
    };
    vec![
        builtin(
            "ExtractMethod",
            vec![ParameterSchema::new("extracted code", Before, CodeFragment).required()],
            vec![
                ParameterSchema::new("extracted method", After, MethodDeclaration).required(),
                ParameterSchema::new("invocation", After, MethodInvocation).required(),
            ],
        ),
        builtin(
            "MoveClass",
            vec![
                ParameterSchema::new("moved class", Before, ClassDeclaration).required(),
                references("moved class", Before),
            ],
            vec![ParameterSchema::new("moved class", After, ClassDeclaration).required()],
        ),
        builtin(
            "MoveField",
            vec![
                ParameterSchema::new("moved field", Before, FieldDeclaration).required(),
                references("moved field", Before),
            ],
            vec![
                ParameterSchema::new("moved field", After, FieldDeclaration).required(),
                references("moved field", After),
            ],
        ),
        builtin(
            "RenameVariable",
            vec![
                ParameterSchema::new("old variable", Before, VariableDeclaration).required(),
                references("old variable", Before),
            ],
            vec![
                ParameterSchema::new("new variable", After, VariableDeclaration).required(),
                references("new variable", After),
            ],
        ),
    ]
}

/// Immutable once built; the store serializes registrations.
#[derive(Debug, Clone)]
pub struct TypeRegistry {
    types: BTreeMap<String, RefactoringTypeDefinition>,
}

impl Default for TypeRegistry {
    fn default() -> Self {
        Self::with_predefined()
    }
}

impl TypeRegistry {
    pub fn empty() -> Self {
        TypeRegistry { types: BTreeMap::new() }
    }

    pub fn with_predefined() -> Self {
        let types = predefined_types().into_iter().map(|d| (d.name.clone(), d)).collect();
        TypeRegistry { types }
    }

    /// Adds a user-defined type. The stored copy is never marked builtin.
    pub fn register_type(&mut self, def: RefactoringTypeDefinition) -> Result<&RefactoringTypeDefinition, RegistryError> {
        def.validate()?;
        match self.types.get(&def.name) {
            Some(existing) if existing.builtin => return Err(RegistryError::BuiltinOverwrite(def.name)),
            Some(_) => return Err(RegistryError::DuplicateName(def.name)),
            None => {}
        }
        let name = def.name.clone();
        let def = RefactoringTypeDefinition { builtin: false, ..def };
        Ok(self.types.entry(name).or_insert(def))
    }

    pub fn lookup_type(&self, name: &str) -> Result<&RefactoringTypeDefinition, RegistryError> {
        self.types.get(name).ok_or_else(|| RegistryError::UnknownType(name.to_string()))
    }

    /// All registered types sorted by name.
    pub fn types(&self) -> impl Iterator<Item = &RefactoringTypeDefinition> {
        self.types.values()
    }
}
