use std::fmt::Write;

use crate::diagnostic::{has_errors, Diagnostic};
use crate::model::{validate, Automaton, Modifiers, State};

/// Canonical text of a valid model.
pub fn print_model(model: &Automaton) -> Result<String, Vec<Diagnostic>> {
    let diags = validate(model);
    if has_errors(&diags) {
        return Err(diags);
    }
    Ok(render_model(model))
}

/// Canonical rendering without the validity check.
pub(crate) fn render_model(model: &Automaton) -> String {
    let mut out = String::new();
    for s in &model.states {
        write_state(&mut out, s, 0);
    }
    if !model.transitions.is_empty() {
        if !model.states.is_empty() {
            out.push('\n');
        }
        for t in &model.transitions {
            let _ = writeln!(out, "{t};");
        }
    }
    out
}

pub(crate) fn modifier_suffix(mods: Modifiers) -> String {
    if mods.is_empty() {
        return String::new();
    }
    let words: Vec<&str> = mods.iter().map(|m| m.keyword()).collect();
    format!(" <<{}>>", words.join(" "))
}

fn write_state(out: &mut String, s: &State, level: usize) {
    let pad = "  ".repeat(level);
    let _ = write!(out, "{pad}state {}{}", s.name, modifier_suffix(s.modifiers));
    if s.is_leaf() {
        out.push_str(";\n");
    } else {
        out.push_str(" {\n");
        for c in &s.substates {
            write_state(out, c, level + 1);
        }
        let _ = writeln!(out, "{pad}}}");
    }
}
