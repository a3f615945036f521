//! In-memory representation of hierarchical automata.
//!
//! An [`Automaton`] is a forest of named [`State`]s plus one global, ordered
//! set of [`Transition`]s. State names live in a single flat namespace, so a
//! transition refers to its endpoints by name regardless of nesting depth.

use std::collections::HashSet;
use std::fmt;

use indexmap::IndexMap;

use crate::diagnostic::{Code, Diagnostic, Location};

/// A state modifier as written between `<<` and `>>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Modifier {
    Initial,
    Final,
}

impl Modifier {
    pub fn keyword(self) -> &'static str {
        match self {
            Modifier::Initial => "initial",
            Modifier::Final => "final",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Modifier> {
        match word {
            "initial" => Some(Modifier::Initial),
            "final" => Some(Modifier::Final),
            _ => None,
        }
    }
}

impl fmt::Display for Modifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Set of modifiers. Iteration order is fixed: `initial` before `final`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Modifiers {
    pub initial: bool,
    pub final_: bool,
}

impl Modifiers {
    pub const NONE: Modifiers = Modifiers {
        initial: false,
        final_: false,
    };

    pub fn contains(self, m: Modifier) -> bool {
        match m {
            Modifier::Initial => self.initial,
            Modifier::Final => self.final_,
        }
    }

    /// Inserts `m`, returning `false` if it was already present.
    pub fn insert(&mut self, m: Modifier) -> bool {
        let slot = match m {
            Modifier::Initial => &mut self.initial,
            Modifier::Final => &mut self.final_,
        };
        let fresh = !*slot;
        *slot = true;
        fresh
    }

    pub fn remove(&mut self, m: Modifier) {
        match m {
            Modifier::Initial => self.initial = false,
            Modifier::Final => self.final_ = false,
        }
    }

    pub fn is_empty(self) -> bool {
        !self.initial && !self.final_
    }

    pub fn is_subset(self, other: Modifiers) -> bool {
        (!self.initial || other.initial) && (!self.final_ || other.final_)
    }

    pub fn iter(self) -> impl Iterator<Item = Modifier> {
        [Modifier::Initial, Modifier::Final]
            .into_iter()
            .filter(move |m| self.contains(*m))
    }
}

impl FromIterator<Modifier> for Modifiers {
    fn from_iter<I: IntoIterator<Item = Modifier>>(iter: I) -> Self {
        let mut set = Modifiers::NONE;
        for m in iter {
            set.insert(m);
        }
        set
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    pub name: String,
    pub modifiers: Modifiers,
    pub substates: Vec<State>,
}

impl State {
    pub fn leaf(name: impl Into<String>) -> State {
        State {
            name: name.into(),
            modifiers: Modifiers::NONE,
            substates: Vec::new(),
        }
    }

    pub fn with(mut self, m: Modifier) -> State {
        self.modifiers.insert(m);
        self
    }

    pub fn initial(self) -> State {
        self.with(Modifier::Initial)
    }

    pub fn final_(self) -> State {
        self.with(Modifier::Final)
    }

    pub fn containing(mut self, children: impl IntoIterator<Item = State>) -> State {
        self.substates.extend(children);
        self
    }

    pub fn is_leaf(&self) -> bool {
        self.substates.is_empty()
    }

    /// Pre-order walk over this state and all of its descendants.
    pub fn walk(&self) -> impl Iterator<Item = &State> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let next = stack.pop()?;
            stack.extend(next.substates.iter().rev());
            Some(next)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub source: String,
    pub label: String,
    pub target: String,
}

impl Transition {
    pub fn new(
        source: impl Into<String>,
        label: impl Into<String>,
        target: impl Into<String>,
    ) -> Transition {
        Transition {
            source: source.into(),
            label: label.into(),
            target: target.into(),
        }
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -{}> {}", self.source, self.label, self.target)
    }
}

/// A hierarchical automaton: top-level states plus global transitions.
///
/// `transitions` keeps declaration order. Set semantics on the triple is an
/// invariant checked by [`validate`]; [`Automaton::add_transition`] upholds it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Automaton {
    pub states: Vec<State>,
    pub transitions: Vec<Transition>,
}

impl Automaton {
    pub fn new() -> Automaton {
        Automaton::default()
    }

    pub fn with_states(mut self, states: impl IntoIterator<Item = State>) -> Automaton {
        self.states.extend(states);
        self
    }

    pub fn with_transition(mut self, source: &str, label: &str, target: &str) -> Automaton {
        self.add_transition(Transition::new(source, label, target));
        self
    }

    /// Appends `t` unless an equal triple is already present.
    pub fn add_transition(&mut self, t: Transition) -> bool {
        if self.transitions.contains(&t) {
            return false;
        }
        self.transitions.push(t);
        true
    }

    /// All states in document order (depth-first, declaration order).
    pub fn walk_states(&self) -> impl Iterator<Item = &State> {
        self.states.iter().flat_map(State::walk)
    }

    pub fn state_count(&self) -> usize {
        self.walk_states().count()
    }

    pub fn find_state(&self, name: &str) -> Option<&State> {
        self.walk_states().find(|s| s.name == name)
    }

    pub fn find_state_mut(&mut self, name: &str) -> Option<&mut State> {
        fn go<'a>(states: &'a mut [State], name: &str) -> Option<&'a mut State> {
            for s in states {
                if s.name == name {
                    return Some(s);
                }
                if let Some(found) = go(&mut s.substates, name) {
                    return Some(found);
                }
            }
            None
        }
        go(&mut self.states, name)
    }

    /// Maximum nesting depth; 0 for a flat automaton (or an empty one).
    pub fn depth(&self) -> usize {
        fn go(s: &State) -> usize {
            s.substates.iter().map(|c| 1 + go(c)).max().unwrap_or(0)
        }
        self.states.iter().map(go).max().unwrap_or(0)
    }

    pub fn is_flat(&self) -> bool {
        self.states.iter().all(State::is_leaf)
    }

    /// Leaf names in document order.
    pub fn leaf_names(&self) -> Vec<&str> {
        self.walk_states()
            .filter(|s| s.is_leaf())
            .map(|s| s.name.as_str())
            .collect()
    }
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// What a validation diagnostic is about; lets callers attach source spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subject {
    /// The n-th state in document order.
    State(usize),
    /// The n-th transition.
    Transition(usize),
}

/// Checks every automaton invariant, one error diagnostic per violation.
pub fn validate(model: &Automaton) -> Vec<Diagnostic> {
    validate_located(model, |_| None)
}

pub(crate) fn validate_located(
    model: &Automaton,
    locate: impl Fn(Subject) -> Option<Location>,
) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut seen: HashSet<&str> = HashSet::new();
    for (i, state) in model.walk_states().enumerate() {
        let at = locate(Subject::State(i));
        if !is_identifier(&state.name) {
            out.push(Diagnostic::error(
                Code::BadIdent,
                format!("invalid state name \"{}\"", state.name),
                at,
            ));
        } else if !seen.insert(&state.name) {
            out.push(Diagnostic::error(
                Code::DupName,
                format!("duplicate state name \"{}\"", state.name),
                at,
            ));
        }
    }

    let declared: HashSet<&str> = model.walk_states().map(|s| s.name.as_str()).collect();
    let mut triples: HashSet<&Transition> = HashSet::new();
    for (i, t) in model.transitions.iter().enumerate() {
        let at = locate(Subject::Transition(i));
        if !is_identifier(&t.label) {
            out.push(Diagnostic::error(
                Code::BadIdent,
                format!("invalid transition label \"{}\"", t.label),
                at,
            ));
        }
        for end in [&t.source, &t.target] {
            if !declared.contains(end.as_str()) {
                out.push(Diagnostic::error(
                    Code::UndeclaredRef,
                    format!("undeclared state \"{end}\""),
                    at,
                ));
            }
        }
        if !triples.insert(t) {
            out.push(Diagnostic::error(
                Code::DupTransition,
                format!("duplicate transition \"{t}\""),
                at,
            ));
        }
    }
    out
}

/// Non-fatal findings on an otherwise valid model: sibling states sharing
/// the `initial` marker.
pub fn lint(model: &Automaton) -> Vec<Diagnostic> {
    lint_located(model, |_| None)
}

pub(crate) fn lint_located(
    model: &Automaton,
    locate: impl Fn(Subject) -> Option<Location>,
) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let ordinal: IndexMap<&str, usize> = model
        .walk_states()
        .enumerate()
        .map(|(i, s)| (s.name.as_str(), i))
        .collect();
    let mut check = |siblings: &[State], parent: Option<&str>| {
        let initial: Vec<&State> = siblings.iter().filter(|s| s.modifiers.initial).collect();
        if initial.len() > 1 {
            let names: Vec<&str> = initial.iter().map(|s| s.name.as_str()).collect();
            let scope = match parent {
                Some(p) => format!("inside \"{p}\""),
                None => "at top level".to_string(),
            };
            let at = ordinal
                .get(initial[1].name.as_str())
                .and_then(|&i| locate(Subject::State(i)));
            out.push(Diagnostic::warning(
                Code::MultipleInitial,
                format!("several initial states {scope}: {}", names.join(", ")),
                at,
            ));
        }
    };
    check(&model.states, None);
    for s in model.walk_states() {
        if !s.is_leaf() {
            check(&s.substates, Some(&s.name));
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct IndexEntry<'a> {
    pub state: &'a State,
    pub parent: Option<&'a str>,
    pub depth: usize,
}

/// Name lookup over a validated automaton, in document order.
#[derive(Debug, Clone)]
pub struct StateIndex<'a> {
    entries: IndexMap<&'a str, IndexEntry<'a>>,
}

impl<'a> StateIndex<'a> {
    /// Builds the index. Fails with the validation errors if `model` is invalid.
    pub fn new(model: &'a Automaton) -> Result<StateIndex<'a>, Vec<Diagnostic>> {
        let errors: Vec<Diagnostic> = validate(model)
            .into_iter()
            .filter(Diagnostic::is_error)
            .collect();
        if !errors.is_empty() {
            return Err(errors);
        }
        Ok(StateIndex::build(model))
    }

    /// Builds without validating. Names must already be unique.
    pub(crate) fn build(model: &'a Automaton) -> StateIndex<'a> {
        fn go<'a>(
            states: &'a [State],
            parent: Option<&'a str>,
            depth: usize,
            out: &mut IndexMap<&'a str, IndexEntry<'a>>,
        ) {
            for s in states {
                out.insert(
                    &s.name,
                    IndexEntry {
                        state: s,
                        parent,
                        depth,
                    },
                );
                go(&s.substates, Some(&s.name), depth + 1, out);
            }
        }
        let mut entries = IndexMap::new();
        go(&model.states, None, 0, &mut entries);
        StateIndex { entries }
    }

    pub fn get(&self, name: &str) -> Option<&IndexEntry<'a>> {
        self.entries.get(name)
    }

    /// Position of `name` in document order.
    pub fn position(&self, name: &str) -> Option<usize> {
        self.entries.get_index_of(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'a str, &IndexEntry<'a>)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    pub fn at(&self, position: usize) -> Option<(&'a str, &IndexEntry<'a>)> {
        self.entries.get_index(position).map(|(k, v)| (*k, v))
    }

    /// `name` followed by its ancestors, innermost first.
    pub fn ancestry(&self, name: &'a str) -> Vec<&'a str> {
        let mut chain = vec![name];
        let mut cur = name;
        while let Some(p) = self.get(cur).and_then(|e| e.parent) {
            chain.push(p);
            cur = p;
        }
        chain
    }

    /// True if `inner` equals `outer` or is nested somewhere below it.
    pub fn is_within(&self, inner: &'a str, outer: &str) -> bool {
        self.ancestry(inner).contains(&outer)
    }
}
