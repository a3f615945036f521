//! Syntax tree of rule files, before normalization.

use std::fmt;

use crate::diagnostic::SourceSpan;
use crate::model::Modifier;

/// A name position that is not itself a replacement.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Fixed(String),
    /// Schema variable including its `$`.
    Var(String),
}

impl Atom {
    pub fn as_str(&self) -> &str {
        match self {
            Atom::Fixed(s) | Atom::Var(s) => s,
        }
    }

    pub fn var(&self) -> Option<&str> {
        match self {
            Atom::Var(v) => Some(v),
            Atom::Fixed(_) => None,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Name term: an atom or a `[[ left :- right ]]` replacement. Replacements
/// cannot nest, which the atom-only sides enforce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NameTerm {
    Atom(Atom),
    Replace {
        left: Option<Atom>,
        right: Option<Atom>,
    },
}

impl NameTerm {
    pub fn left(&self) -> Option<&Atom> {
        match self {
            NameTerm::Atom(a) => Some(a),
            NameTerm::Replace { left, .. } => left.as_ref(),
        }
    }

    pub fn right(&self) -> Option<&Atom> {
        match self {
            NameTerm::Atom(a) => Some(a),
            NameTerm::Replace { right, .. } => right.as_ref(),
        }
    }

    pub fn is_replacement(&self) -> bool {
        matches!(self, NameTerm::Replace { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModifierItem {
    Plain(Modifier),
    Replace {
        left: Vec<Modifier>,
        right: Vec<Modifier>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatePattern {
    pub name: NameTerm,
    pub modifiers: Vec<ModifierItem>,
    pub body: Vec<Element>,
    pub deleted: bool,
    pub created: bool,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionPattern {
    /// Object id such as `$T`, from `Transition $T [[ … ]]`.
    pub id: Option<String>,
    pub source: NameTerm,
    pub label: NameTerm,
    pub target: NameTerm,
    pub deleted: bool,
    pub created: bool,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Element {
    State(StatePattern),
    Transition(TransitionPattern),
}

impl Element {
    pub fn span(&self) -> SourceSpan {
        match self {
            Element::State(s) => s.span,
            Element::Transition(t) => t.span,
        }
    }

    pub(crate) fn mark(&mut self, deleted: bool) {
        match self {
            Element::State(s) => {
                if deleted {
                    s.deleted = true;
                } else {
                    s.created = true;
                }
                for c in &mut s.body {
                    c.mark(deleted);
                }
            }
            Element::Transition(t) => {
                if deleted {
                    t.deleted = true;
                } else {
                    t.created = true;
                }
            }
        }
    }

    /// True if this element or anything inside it uses integrated-notation
    /// replacement syntax.
    pub fn has_replacement(&self) -> bool {
        match self {
            Element::State(s) => {
                s.deleted
                    || s.created
                    || s.name.is_replacement()
                    || s.modifiers
                        .iter()
                        .any(|m| matches!(m, ModifierItem::Replace { .. }))
                    || s.body.iter().any(Element::has_replacement)
            }
            Element::Transition(t) => {
                t.deleted
                    || t.created
                    || t.source.is_replacement()
                    || t.label.is_replacement()
                    || t.target.is_replacement()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompareOp {
    Eq,
    Ne,
}

impl fmt::Display for CompareOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CompareOp::Eq => "==",
            CompareOp::Ne => "!=",
        })
    }
}

/// `where` constraint between two atoms, compared as identifier strings.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub left: Atom,
    pub op: CompareOp,
    pub right: Atom,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.left, self.op, self.right)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum RuleItem {
    Element(Element),
    /// Negative application condition, `not { … }`.
    Nac(Vec<Element>),
    Where(Vec<Constraint>),
    Match(Vec<RuleItem>),
    Replace(Vec<RuleItem>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub items: Vec<RuleItem>,
    pub span: SourceSpan,
}

impl Rule {
    pub fn is_separated(&self) -> bool {
        self.items
            .iter()
            .any(|i| matches!(i, RuleItem::Match(_) | RuleItem::Replace(_)))
    }

    /// Number of top-level pattern elements (states and transitions written
    /// directly in the rule body or in its `match` block).
    pub fn element_count(&self) -> usize {
        self.items
            .iter()
            .map(|i| match i {
                RuleItem::Element(_) => 1,
                RuleItem::Match(inner) => inner
                    .iter()
                    .filter(|i| matches!(i, RuleItem::Element(_)))
                    .count(),
                _ => 0,
            })
            .sum()
    }
}
