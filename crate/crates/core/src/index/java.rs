//! Java element extraction on top of the tree-sitter Java grammar.

use tree_sitter::{Node, Parser};

use super::{Extracted, MethodBody};
use crate::model::{CodeElement, ElementType, RevisionSide, TextRange};
use crate::text::LineIndex;

const CLASS_KINDS: &[&str] = &[
    "class_declaration",
    "interface_declaration",
    "enum_declaration",
    "record_declaration",
    "annotation_type_declaration",
];
const METHOD_KINDS: &[&str] = &["method_declaration", "constructor_declaration", "compact_constructor_declaration"];
const FIELD_KINDS: &[&str] = &["field_declaration", "constant_declaration"];
const PARAMETER_KINDS: &[&str] = &["formal_parameter", "catch_formal_parameter", "spread_parameter"];

pub(super) fn extract(text: &str, path: &str, side: RevisionSide) -> Result<Extracted, String> {
    let mut parser = Parser::new();
    parser
        .set_language(&tree_sitter_java::LANGUAGE.into())
        .map_err(|e| format!("cannot load Java grammar: {e}"))?;
    let tree = parser.parse(text, None).ok_or_else(|| "parser gave up".to_string())?;
    let root = tree.root_node();
    if root.has_error() {
        let at = first_error(root).map(|n| n.start_position()).unwrap_or_default();
        return Err(format!("syntax error near line {}, column {}", at.row + 1, at.column + 1));
    }
    let mut ex = Extractor { text, path, side, lines: LineIndex::new(text), out: Extracted::default() };
    ex.walk(root)?;
    Ok(ex.out)
}

fn first_error(node: Node) -> Option<Node> {
    if node.is_error() || node.is_missing() {
        return Some(node);
    }
    let mut cursor = node.walk();
    let children: Vec<Node> = node.children(&mut cursor).collect();
    children.into_iter().filter(|c| c.has_error()).find_map(first_error)
}

struct Extractor<'a> {
    text: &'a str,
    path: &'a str,
    side: RevisionSide,
    lines: LineIndex,
    out: Extracted,
}

impl<'a> Extractor<'a> {
    fn range(&self, start_byte: usize, end_byte: usize) -> Result<TextRange, String> {
        TextRange::new(
            self.path,
            self.lines.position(self.text, start_byte),
            self.lines.position(self.text, end_byte),
        )
        .map_err(|e| e.to_string())
    }

    fn node_range(&self, node: Node) -> Result<TextRange, String> {
        self.range(node.start_byte(), node.end_byte())
    }

    fn node_text(&self, node: Node) -> &'a str {
        &self.text[node.byte_range()]
    }

    fn field_text(&self, node: Node, field: &str) -> Option<String> {
        node.child_by_field_name(field).map(|n| self.node_text(n).to_string())
    }

    fn push(&mut self, element_type: ElementType, range: TextRange, name: Option<String>, enclosing: &Option<TextRange>) {
        self.out.elements.push(CodeElement {
            element_type,
            range,
            side: self.side,
            name,
            enclosing_method: enclosing.clone(),
        });
    }

    // Iterative pre-order walk; deep expression chains would overflow a recursive one.
    fn walk(&mut self, root: Node) -> Result<(), String> {
        let mut stack: Vec<(Node, Option<TextRange>)> = vec![(root, None)];
        while let Some((node, enclosing)) = stack.pop() {
            let kind = node.kind();
            if matches!(kind, "package_declaration" | "import_declaration" | "module_declaration") {
                continue;
            }
            let mut child_enclosing = enclosing.clone();

            if CLASS_KINDS.contains(&kind) {
                let range = self.node_range(node)?;
                let name = self.field_text(node, "name");
                self.push(ElementType::ClassDeclaration, range, name, &enclosing);
            } else if METHOD_KINDS.contains(&kind) {
                let range = self.node_range(node)?;
                let name = self.field_text(node, "name");
                if let Some(body) = node.child_by_field_name("body") {
                    // Interior excludes the braces, which are one byte each.
                    let interior_start = self.lines.position(self.text, body.start_byte() + 1);
                    let interior_end = self.lines.position(self.text, body.end_byte().saturating_sub(1));
                    self.out.bodies.push(MethodBody { method: range.clone(), interior_start, interior_end });
                }
                self.push(ElementType::MethodDeclaration, range.clone(), name, &enclosing);
                child_enclosing = Some(range);
            } else if FIELD_KINDS.contains(&kind) {
                let range = self.node_range(node)?;
                let name = node
                    .child_by_field_name("declarator")
                    .and_then(|d| self.field_text(d, "name"));
                self.push(ElementType::FieldDeclaration, range, name, &enclosing);
            } else if kind == "variable_declarator"
                && node.parent().is_some_and(|p| p.kind() == "local_variable_declaration")
            {
                let range = self.node_range(node)?;
                let name = self.field_text(node, "name");
                self.push(ElementType::VariableDeclaration, range, name, &enclosing);
            } else if kind == "enhanced_for_statement" {
                if let Some(name_node) = node.child_by_field_name("name") {
                    let mut cursor = node.walk();
                    let start = node
                        .named_children(&mut cursor)
                        .find(|c| c.kind() == "modifiers")
                        .or_else(|| node.child_by_field_name("type"))
                        .unwrap_or(name_node);
                    let range = self.range(start.start_byte(), name_node.end_byte())?;
                    let name = Some(self.node_text(name_node).to_string());
                    self.push(ElementType::VariableDeclaration, range, name, &enclosing);
                }
            } else if kind == "resource" && node.child_by_field_name("name").is_some() {
                let range = self.node_range(node)?;
                let name = self.field_text(node, "name");
                self.push(ElementType::VariableDeclaration, range, name, &enclosing);
            } else if PARAMETER_KINDS.contains(&kind) {
                let range = self.node_range(node)?;
                let name = self.field_text(node, "name").or_else(|| {
                    let mut cursor = node.walk();
                    let declarator = node.named_children(&mut cursor).find(|c| c.kind() == "variable_declarator");
                    declarator.and_then(|d| self.field_text(d, "name"))
                });
                self.push(ElementType::ParameterDeclaration, range, name, &enclosing);
            } else if kind == "method_invocation" {
                let range = self.node_range(node)?;
                let name = self.field_text(node, "name");
                self.push(ElementType::MethodInvocation, range, name, &enclosing);
            } else if matches!(kind, "identifier" | "type_identifier") {
                let range = self.node_range(node)?;
                let name = Some(self.node_text(node).to_string());
                self.push(ElementType::Identifier, range, name, &enclosing);
            }

            let mut cursor = node.walk();
            let children: Vec<Node> = node.children(&mut cursor).collect();
            for child in children.into_iter().rev() {
                stack.push((child, child_enclosing.clone()));
            }
        }
        Ok(())
    }
}
