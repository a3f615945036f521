//! A workbench for hierarchical automata: a textual modelling language,
//! transformation rules written in that same language, a flattener and a
//! bounded trace-equivalence oracle.

pub mod cli;
pub mod diagnostic;
pub mod flatten;
pub mod matching;
pub mod model;
pub mod oracle;
pub mod rewrite;
pub mod rules;
pub mod syntax;

pub use diagnostic::{Code, Diagnostic, Location, Severity, SourceSpan};
pub use flatten::{copy_down_sources, fig3_rule, flatten, forward_targets};
pub use matching::{find_matches, find_rule_matches, Binding, Match};
pub use model::{validate, Automaton, Modifier, Modifiers, State, Transition};
pub use oracle::{
    equivalent, initial_configuration, step, traces, Configuration, SemanticsError, Trace,
};
pub use rewrite::{apply, apply_at, ApplyReport, RewriteError, Strategy};
pub use rules::{load_rule, normalize_rule, parse_rules, NormalizedRule, Rule};
pub use syntax::{parse_model, print_model, Parsed};
