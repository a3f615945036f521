//! Finding occurrences of a rule's left-hand side in a host automaton.
//!
//! Matching is injective on elements and open-world on properties: a host
//! state may carry more modifiers and more substates than the pattern
//! mentions. Nested pattern states require direct containment in the host;
//! top-level pattern states may match at any depth. Repeated schema
//! variables must bind to the same identifier.

use std::collections::BTreeMap;

use crate::model::{Automaton, StateIndex, Transition};
use crate::rules::{Atom, CompareOp, Constraint, ElemRef, NormalizedRule, Pattern};

/// Schema variable (with `$`) to identifier.
pub type Binding = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum HostElem {
    State(String),
    Transition(Transition),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Match {
    pub binding: Binding,
    /// Host state name for each LHS pattern state.
    pub states: Vec<String>,
    /// Host transition index for each LHS pattern transition.
    pub transitions: Vec<usize>,
}

impl Match {
    pub fn element_map(&self, model: &Automaton) -> Vec<(ElemRef, HostElem)> {
        let states = self
            .states
            .iter()
            .enumerate()
            .map(|(i, n)| (ElemRef::State(i), HostElem::State(n.clone())));
        let trans = self.transitions.iter().enumerate().map(|(i, &h)| {
            (
                ElemRef::Transition(i),
                HostElem::Transition(model.transitions[h].clone()),
            )
        });
        states.chain(trans).collect()
    }

    /// `$var=value` pairs separated by spaces, variables in sorted order.
    pub fn binding_summary(&self) -> String {
        self.binding
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Value bound to a transition object id.
pub fn transition_key(t: &Transition) -> String {
    format!("{}-{}>{}", t.source, t.label, t.target)
}

/// All matches of `rule`'s left-hand side in canonical order.
pub fn find_rule_matches(rule: &NormalizedRule, model: &Automaton) -> Vec<Match> {
    find_matches(&rule.lhs, &rule.nacs, &rule.constraints, model)
}

/// All matches of `lhs` in `model` satisfying `constraints` and admitting no
/// embedding of any NAC that extends the match's binding.
///
/// Matches are ordered lexicographically by the host candidates chosen for
/// the pattern elements, taken in declaration order; host states are
/// enumerated in document order, host transitions in declaration order.
pub fn find_matches(
    lhs: &Pattern,
    nacs: &[Pattern],
    constraints: &[Constraint],
    model: &Automaton,
) -> Vec<Match> {
    let host = Host::new(model);
    let mut out = Vec::new();
    let mut search = Search::new(lhs, &host, Binding::new());
    search.run(0, &mut |a: &Search| {
        if !constraints.iter().all(|c| holds(c, &a.binding)) {
            return true;
        }
        if nacs.iter().any(|n| embeds(n, &host, &a.binding)) {
            return true;
        }
        out.push(a.to_match(&host));
        true
    });
    out
}

/// Whether `pattern` embeds into `model` extending `binding`.
pub fn has_embedding(pattern: &Pattern, model: &Automaton, binding: &Binding) -> bool {
    embeds(pattern, &Host::new(model), binding)
}

fn embeds(pattern: &Pattern, host: &Host, binding: &Binding) -> bool {
    let mut found = false;
    Search::new(pattern, host, binding.clone()).run(0, &mut |_| {
        found = true;
        false
    });
    found
}

fn resolve<'b>(atom: &'b Atom, binding: &'b Binding) -> Option<&'b str> {
    match atom {
        Atom::Fixed(s) => Some(s),
        Atom::Var(v) => binding.get(v).map(String::as_str),
    }
}

fn holds(c: &Constraint, binding: &Binding) -> bool {
    match (resolve(&c.left, binding), resolve(&c.right, binding)) {
        (Some(l), Some(r)) => match c.op {
            CompareOp::Eq => l == r,
            CompareOp::Ne => l != r,
        },
        _ => false,
    }
}

struct Host<'m> {
    model: &'m Automaton,
    index: StateIndex<'m>,
    /// Child positions per state position; `children[len]` holds the roots.
    children: Vec<Vec<usize>>,
}

impl<'m> Host<'m> {
    fn new(model: &'m Automaton) -> Host<'m> {
        let index = StateIndex::build(model);
        let mut children = vec![Vec::new(); index.len() + 1];
        for (pos, (_, e)) in index.iter().enumerate() {
            let slot = e
                .parent
                .and_then(|p| index.position(p))
                .unwrap_or(index.len());
            children[slot].push(pos);
        }
        Host {
            model,
            index,
            children,
        }
    }
}

struct Search<'p, 'h, 'm> {
    pattern: &'p Pattern,
    host: &'h Host<'m>,
    binding: Binding,
    state_img: Vec<Option<usize>>,
    trans_img: Vec<Option<usize>>,
    used_states: Vec<bool>,
    used_trans: Vec<bool>,
}

impl<'p, 'h, 'm> Search<'p, 'h, 'm> {
    fn new(pattern: &'p Pattern, host: &'h Host<'m>, binding: Binding) -> Self {
        Search {
            pattern,
            host,
            binding,
            state_img: vec![None; pattern.states.len()],
            trans_img: vec![None; pattern.transitions.len()],
            used_states: vec![false; host.index.len()],
            used_trans: vec![false; host.model.transitions.len()],
        }
    }

    fn to_match(&self, host: &Host) -> Match {
        Match {
            binding: self.binding.clone(),
            states: self
                .state_img
                .iter()
                .map(|p| host.index.at(p.unwrap()).unwrap().0.to_string())
                .collect(),
            transitions: self.trans_img.iter().map(|t| t.unwrap()).collect(),
        }
    }

    /// Binds `atom` to `value`, recording a fresh variable in `fresh`.
    fn unify(&mut self, atom: &Atom, value: &str, fresh: &mut Vec<String>) -> bool {
        match atom {
            Atom::Fixed(s) => s == value,
            Atom::Var(v) => match self.binding.get(v) {
                Some(b) => b == value,
                None => {
                    self.binding.insert(v.clone(), value.to_string());
                    fresh.push(v.clone());
                    true
                }
            },
        }
    }

    fn undo(&mut self, fresh: Vec<String>) {
        for v in fresh {
            self.binding.remove(&v);
        }
    }

    /// Depth-first over pattern elements. `visit` returns `false` to stop;
    /// the return value propagates that request.
    fn run(&mut self, step: usize, visit: &mut dyn FnMut(&Search) -> bool) -> bool {
        let (pattern, host) = (self.pattern, self.host);
        let Some(&elem) = pattern.order.get(step) else {
            return visit(self);
        };
        match elem {
            ElemRef::State(i) => {
                let ps = &pattern.states[i];
                let slot = match ps.parent {
                    Some(p) => self.state_img[p].expect("parent assigned first"),
                    None => self.host.index.len(),
                };
                let candidates: Vec<usize> = if ps.parent.is_some() {
                    self.host.children[slot].clone()
                } else {
                    (0..self.host.index.len()).collect()
                };
                for pos in candidates {
                    if self.used_states[pos] {
                        continue;
                    }
                    let (name, entry) = host.index.at(pos).unwrap();
                    if !ps.modifiers.is_subset(entry.state.modifiers) {
                        continue;
                    }
                    let mut fresh = Vec::new();
                    if self.unify(&ps.name, name, &mut fresh) {
                        self.used_states[pos] = true;
                        self.state_img[i] = Some(pos);
                        let go_on = self.run(step + 1, visit);
                        self.state_img[i] = None;
                        self.used_states[pos] = false;
                        if !go_on {
                            self.undo(fresh);
                            return false;
                        }
                    }
                    self.undo(fresh);
                }
            }
            ElemRef::Transition(i) => {
                let pt = &pattern.transitions[i];
                for (pos, ht) in host.model.transitions.iter().enumerate() {
                    if self.used_trans[pos] {
                        continue;
                    }
                    let mut fresh = Vec::new();
                    let ok = self.unify(&pt.source, &ht.source, &mut fresh)
                        && self.unify(&pt.label, &ht.label, &mut fresh)
                        && self.unify(&pt.target, &ht.target, &mut fresh)
                        && match &pt.id {
                            Some(id) => {
                                self.unify(&Atom::Var(id.clone()), &transition_key(ht), &mut fresh)
                            }
                            None => true,
                        };
                    if ok {
                        self.used_trans[pos] = true;
                        self.trans_img[i] = Some(pos);
                        let go_on = self.run(step + 1, visit);
                        self.trans_img[i] = None;
                        self.used_trans[pos] = false;
                        if !go_on {
                            self.undo(fresh);
                            return false;
                        }
                    }
                    self.undo(fresh);
                }
            }
        }
        true
    }
}
