//! Transformation rules written in the automata's own concrete syntax.
//!
//! A rule either interleaves both sides through `[[ left :- right ]]`
//! replacements (integrated notation) or spells them out in `match { … }
//! replace { … }` blocks, naming unnamed elements with object ids such as
//! `Transition $T [[ … ]]` (separated notation). Both normalize to a
//! [`NormalizedRule`].

mod ast;
mod normalize;
mod parser;

pub use ast::*;
pub use normalize::{
    modifier_delta, normalize_rule, ElemRef, NormalizeError, NormalizedRule, PatState,
    PatTransition, Pattern,
};
pub use parser::parse_rules;

use std::collections::BTreeSet;

impl Rule {
    /// Distinct schema variables at name and label positions.
    pub fn schema_variables(&self) -> BTreeSet<String> {
        fn term(t: &NameTerm, out: &mut BTreeSet<String>) {
            match t {
                NameTerm::Atom(a) => out.extend(a.var().map(str::to_string)),
                NameTerm::Replace { left, right } => {
                    for a in left.iter().chain(right.iter()) {
                        out.extend(a.var().map(str::to_string));
                    }
                }
            }
        }
        fn element(e: &Element, out: &mut BTreeSet<String>) {
            match e {
                Element::State(s) => {
                    term(&s.name, out);
                    s.body.iter().for_each(|c| element(c, out));
                }
                Element::Transition(t) => {
                    term(&t.source, out);
                    term(&t.label, out);
                    term(&t.target, out);
                }
            }
        }
        fn item(i: &RuleItem, out: &mut BTreeSet<String>) {
            match i {
                RuleItem::Element(e) => element(e, out),
                RuleItem::Nac(es) => es.iter().for_each(|e| element(e, out)),
                RuleItem::Where(cs) => {
                    for c in cs {
                        out.extend(c.left.var().map(str::to_string));
                        out.extend(c.right.var().map(str::to_string));
                    }
                }
                RuleItem::Match(is) | RuleItem::Replace(is) => is.iter().for_each(|i| item(i, out)),
            }
        }
        let mut out = BTreeSet::new();
        self.items.iter().for_each(|i| item(i, &mut out));
        out
    }
}

/// Parses `text` and normalizes the rule called `name`.
pub fn load_rule(text: &str, name: &str) -> Result<Option<NormalizedRule>, Vec<crate::Diagnostic>> {
    let rules = parse_rules(text)?;
    match rules.iter().find(|r| r.name == name) {
        Some(r) => normalize_rule(r)
            .map(Some)
            .map_err(|e| vec![e.to_diagnostic()]),
        None => Ok(None),
    }
}
