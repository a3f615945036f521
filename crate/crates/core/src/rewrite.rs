//! Applying normalized rules at matches, and simple application strategies.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::diagnostic::{has_errors, Code, Diagnostic};
use crate::matching::{find_rule_matches, Binding, Match};
use crate::model::{validate, Automaton, Modifiers, State, Transition};
use crate::rules::{modifier_delta, Atom, ElemRef, NormalizedRule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("deleting state \"{state}\" would leave {reason}")]
    Dangling { state: String, reason: String },
    #[error("state name \"{name}\" would occur twice")]
    NameCollision { name: String },
    #[error("variable {var} is not bound by the match")]
    UnboundRhsVar { var: String },
    #[error("rewritten model is invalid: {}", summarize(.0))]
    InvalidResult(Vec<Diagnostic>),
    #[error("no fixpoint after {iterations} applications")]
    MaxIterExceeded { iterations: usize },
}

fn summarize(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| format!("{} {}", d.code, d.message))
        .collect::<Vec<_>>()
        .join("; ")
}

impl RewriteError {
    pub fn code(&self) -> Code {
        match self {
            RewriteError::Dangling { .. } => Code::Dangling,
            RewriteError::NameCollision { .. } => Code::NameCollision,
            RewriteError::UnboundRhsVar { .. } => Code::UnboundRhsVar,
            RewriteError::InvalidResult(_) => Code::InvalidResult,
            RewriteError::MaxIterExceeded { .. } => Code::MaxIterExceeded,
        }
    }

    pub fn to_diagnostic(&self) -> Diagnostic {
        Diagnostic::error(self.code(), self.to_string(), None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Apply at the first match, if any.
    Once,
    /// Apply repeatedly until no match applies.
    Fixpoint { max_iterations: usize },
}

impl Strategy {
    pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

    pub fn fixpoint() -> Strategy {
        Strategy::Fixpoint {
            max_iterations: Strategy::DEFAULT_MAX_ITERATIONS,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Once => f.write_str("once"),
            Strategy::Fixpoint { max_iterations } => write!(f, "fixpoint (max {max_iterations})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Application {
    pub rule: String,
    pub binding: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApplyReport {
    pub applications: usize,
    pub final_model: Automaton,
    pub steps: Vec<Application>,
    pub warnings: Vec<Diagnostic>,
}

fn resolve(atom: &Atom, binding: &Binding) -> Result<String, RewriteError> {
    match atom {
        Atom::Fixed(s) => Ok(s.clone()),
        Atom::Var(v) => binding
            .get(v)
            .cloned()
            .ok_or_else(|| RewriteError::UnboundRhsVar { var: v.clone() }),
    }
}

/// Replaces the occurrence `m` of `rule`'s left-hand side in `model` by the
/// right-hand side. Host content outside the match is left untouched.
pub fn apply_at(
    model: &Automaton,
    rule: &NormalizedRule,
    m: &Match,
) -> Result<Automaton, RewriteError> {
    let binding = &m.binding;
    let lhs = &rule.lhs;
    let rhs = &rule.rhs;

    // resolve every RHS name up front so unbound variables fail early
    let rhs_state_names = rhs
        .states
        .iter()
        .map(|s| resolve(&s.name, binding))
        .collect::<Result<Vec<_>, _>>()?;
    let rhs_transitions = rhs
        .transitions
        .iter()
        .map(|t| {
            Ok(Transition {
                source: resolve(&t.source, binding)?,
                label: resolve(&t.label, binding)?,
                target: resolve(&t.target, binding)?,
            })
        })
        .collect::<Result<Vec<_>, RewriteError>>()?;

    let deleted_states: HashSet<&str> = (0..lhs.states.len())
        .filter(|&i| rule.rhs_for(ElemRef::State(i)).is_none())
        .map(|i| m.states[i].as_str())
        .collect();
    let deleted_transitions: HashSet<usize> = (0..lhs.transitions.len())
        .filter(|&i| rule.rhs_for(ElemRef::Transition(i)).is_none())
        .map(|i| m.transitions[i])
        .collect();

    // dangling condition
    for (i, name) in m.states.iter().enumerate() {
        if !deleted_states.contains(name.as_str()) {
            continue;
        }
        let host = model.find_state(name).expect("match refers to host states");
        if let Some(child) = host
            .substates
            .iter()
            .find(|c| !deleted_states.contains(c.name.as_str()))
        {
            return Err(RewriteError::Dangling {
                state: name.clone(),
                reason: format!("substate \"{}\" without a parent", child.name),
            });
        }
        if let Some((_, t)) = model.transitions.iter().enumerate().find(|(ti, t)| {
            (t.source == *name || t.target == *name) && !deleted_transitions.contains(ti)
        }) {
            return Err(RewriteError::Dangling {
                state: name.clone(),
                reason: format!("transition \"{t}\" dangling"),
            });
        }
        debug_assert!(rule.rhs_for(ElemRef::State(i)).is_none());
    }

    // per host state: new name and modifier edits
    let mut renames: HashMap<&str, &str> = HashMap::new();
    let mut edits: HashMap<&str, (Modifiers, Modifiers)> = HashMap::new();
    for &(l, r) in &rule.correspondence {
        if let (ElemRef::State(l), ElemRef::State(r)) = (l, r) {
            let host = m.states[l].as_str();
            let new = rhs_state_names[r].as_str();
            if new != host {
                renames.insert(host, new);
            }
            let (removed, added) = modifier_delta(lhs.states[l].modifiers, rhs.states[r].modifiers);
            edits.insert(
                host,
                (removed.into_iter().collect(), added.into_iter().collect()),
            );
        }
    }
    let renamed = |n: &str| renames.get(n).copied().unwrap_or(n).to_string();

    fn rebuild(
        states: &[State],
        deleted: &HashSet<&str>,
        renames: &HashMap<&str, &str>,
        edits: &HashMap<&str, (Modifiers, Modifiers)>,
    ) -> Vec<State> {
        states
            .iter()
            .filter(|s| !deleted.contains(s.name.as_str()))
            .map(|s| {
                let mut modifiers = s.modifiers;
                if let Some((removed, added)) = edits.get(s.name.as_str()) {
                    removed.iter().for_each(|m| modifiers.remove(m));
                    added.iter().for_each(|m| {
                        modifiers.insert(m);
                    });
                }
                State {
                    name: renames
                        .get(s.name.as_str())
                        .map(|n| n.to_string())
                        .unwrap_or_else(|| s.name.clone()),
                    modifiers,
                    substates: rebuild(&s.substates, deleted, renames, edits),
                }
            })
            .collect()
    }
    let mut out = Automaton {
        states: rebuild(&model.states, &deleted_states, &renames, &edits),
        transitions: Vec::new(),
    };

    // existing transitions: retarget matched ones, follow renames elsewhere
    let matched: HashMap<usize, usize> = rule
        .correspondence
        .iter()
        .filter_map(|&(l, r)| match (l, r) {
            (ElemRef::Transition(l), ElemRef::Transition(r)) => Some((m.transitions[l], r)),
            _ => None,
        })
        .collect();
    for (ti, t) in model.transitions.iter().enumerate() {
        if deleted_transitions.contains(&ti) {
            continue;
        }
        let next = match matched.get(&ti) {
            Some(&r) => rhs_transitions[r].clone(),
            None => Transition {
                source: renamed(&t.source),
                label: t.label.clone(),
                target: renamed(&t.target),
            },
        };
        out.add_transition(next);
    }

    // created states, in RHS order, at the end of their parent's substates
    let mut introduced: Vec<String> = renames.values().map(|n| n.to_string()).collect();
    for (r, ps) in rhs.states.iter().enumerate() {
        if rule.lhs_for(ElemRef::State(r)).is_some() {
            continue;
        }
        let name = rhs_state_names[r].clone();
        let state = State {
            name: name.clone(),
            modifiers: ps.modifiers,
            substates: Vec::new(),
        };
        match ps.parent {
            None => out.states.push(state),
            Some(p) => {
                let parent = &rhs_state_names[p];
                out.find_state_mut(parent)
                    .expect("parent of a created state exists")
                    .substates
                    .push(state);
            }
        }
        introduced.push(name);
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for s in out.walk_states() {
        *counts.entry(s.name.as_str()).or_default() += 1;
    }
    introduced.sort();
    if let Some(name) = introduced
        .iter()
        .find(|n| counts.get(n.as_str()).copied() > Some(1))
    {
        return Err(RewriteError::NameCollision { name: name.clone() });
    }

    for (r, t) in rhs_transitions.into_iter().enumerate() {
        if rule.lhs_for(ElemRef::Transition(r)).is_none() {
            out.add_transition(t);
        }
    }

    let diags = validate(&out);
    if has_errors(&diags) {
        return Err(RewriteError::InvalidResult(diags));
    }
    Ok(out)
}

/// Runs `rule` on `model` under `strategy`.
pub fn apply(
    model: &Automaton,
    rule: &NormalizedRule,
    strategy: Strategy,
) -> Result<ApplyReport, RewriteError> {
    let mut report = ApplyReport {
        applications: 0,
        final_model: model.clone(),
        steps: Vec::new(),
        warnings: Vec::new(),
    };
    let record = |report: &mut ApplyReport, m: &Match, next: Automaton| {
        report.applications += 1;
        report.final_model = next;
        report.steps.push(Application {
            rule: rule.name.clone(),
            binding: m.binding_summary(),
        });
    };
    match strategy {
        Strategy::Once => {
            if let Some(m) = find_rule_matches(rule, model).first() {
                let next = apply_at(model, rule, m)?;
                record(&mut report, m, next);
            }
        }
        Strategy::Fixpoint { max_iterations } => loop {
            let matches = find_rule_matches(rule, &report.final_model);
            if matches.is_empty() {
                break;
            }
            let mut first_error = None;
            let mut step = None;
            for m in &matches {
                match apply_at(&report.final_model, rule, m) {
                    Ok(next) => {
                        step = Some((m, next));
                        break;
                    }
                    Err(e) => {
                        first_error.get_or_insert(e);
                    }
                }
            }
            let Some((m, next)) = step else {
                let cause = first_error.expect("at least one match failed");
                report.warnings.push(Diagnostic::warning(
                    Code::AllMatchesBlocked,
                    format!(
                        "{} match(es) found but none applicable; first: {} {}",
                        matches.len(),
                        cause.code(),
                        cause
                    ),
                    None,
                ));
                break;
            };
            if report.applications == max_iterations {
                return Err(RewriteError::MaxIterExceeded {
                    iterations: max_iterations,
                });
            }
            let m = m.clone();
            record(&mut report, &m, next);
        },
    }
    Ok(report)
}
