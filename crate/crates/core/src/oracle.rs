//! Reference interpreter and bounded trace equivalence.
//!
//! Execution semantics: a configuration is the current innermost state.
//! Entering a state descends through unique `initial` substates. On a label,
//! the nearest state among the configuration and its ancestors that has an
//! outgoing transition with that label fires all of them (inner-first
//! priority, nondeterminism allowed). A trace is accepted if some reaching
//! configuration is final or nested inside a final state.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::diagnostic::{Code, Diagnostic};
use crate::model::{Automaton, State, StateIndex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("state \"{state}\" has {found} initial substates, expected exactly one")]
    NoUniqueInitial { state: String, found: usize },
    #[error("several top-level initial states: {}", .names.join(", "))]
    MultipleTopInitial { names: Vec<String> },
    #[error("no top-level initial state")]
    NoTopInitial,
    #[error("transition \"{transition}\" still targets a composite state")]
    CompositeTarget { transition: String },
}

impl SemanticsError {
    pub fn code(&self) -> Code {
        match self {
            SemanticsError::NoUniqueInitial { .. } => Code::NoUniqueInitial,
            SemanticsError::MultipleTopInitial { .. } => Code::MultipleTopInitial,
            SemanticsError::NoTopInitial => Code::NoTopInitial,
            SemanticsError::CompositeTarget { .. } => Code::CompositeTarget,
        }
    }

    pub fn to_diagnostic(&self) -> Diagnostic {
        Diagnostic::error(self.code(), self.to_string(), None)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration(pub String);

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trace {
    pub labels: Vec<String>,
    pub accepted: bool,
}

/// Space-separated labels; `ε` for the empty trace.
pub fn format_labels(labels: &[String]) -> String {
    if labels.is_empty() {
        "ε".to_string()
    } else {
        labels.join(" ")
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_labels(&self.labels))?;
        if self.accepted {
            f.write_str(" (accepted)")?;
        }
        Ok(())
    }
}

pub(crate) fn initial_children(s: &State) -> impl Iterator<Item = &State> {
    s.substates.iter().filter(|c| c.modifiers.initial)
}

/// Precomputed lookup tables for executing one automaton.
pub struct Interpreter<'m> {
    model: &'m Automaton,
    index: StateIndex<'m>,
    outgoing: HashMap<&'m str, BTreeMap<&'m str, Vec<&'m str>>>,
}

impl<'m> Interpreter<'m> {
    /// `model` must be valid.
    pub fn new(model: &'m Automaton) -> Interpreter<'m> {
        let mut outgoing: HashMap<&str, BTreeMap<&str, Vec<&str>>> = HashMap::new();
        for t in &model.transitions {
            outgoing
                .entry(&t.source)
                .or_default()
                .entry(&t.label)
                .or_default()
                .push(&t.target);
        }
        Interpreter {
            model,
            index: StateIndex::build(model),
            outgoing,
        }
    }

    pub fn initial_configuration(&self) -> Result<Configuration, SemanticsError> {
        let top: Vec<&State> = self
            .model
            .states
            .iter()
            .filter(|s| s.modifiers.initial)
            .collect();
        let mut cur = match top.as_slice() {
            [] => return Err(SemanticsError::NoTopInitial),
            [one] => *one,
            many => {
                return Err(SemanticsError::MultipleTopInitial {
                    names: many.iter().map(|s| s.name.clone()).collect(),
                })
            }
        };
        while !cur.is_leaf() {
            let inits: Vec<&State> = initial_children(cur).collect();
            match inits.as_slice() {
                [one] => cur = one,
                _ => {
                    return Err(SemanticsError::NoUniqueInitial {
                        state: cur.name.clone(),
                        found: inits.len(),
                    })
                }
            }
        }
        Ok(Configuration(cur.name.clone()))
    }

    /// Enters `name` and follows initial substates down. A composite without
    /// any initial substate is where the descent rests.
    fn enter(&self, name: &'m str) -> Result<&'m str, SemanticsError> {
        let mut cur = self.index.get(name).expect("declared state").state;
        loop {
            let inits: Vec<&State> = initial_children(cur).collect();
            match inits.as_slice() {
                [] => return Ok(&cur.name),
                [one] => cur = one,
                many => {
                    return Err(SemanticsError::NoUniqueInitial {
                        state: cur.name.clone(),
                        found: many.len(),
                    })
                }
            }
        }
    }

    pub fn step(
        &self,
        config: &Configuration,
        label: &str,
    ) -> Result<BTreeSet<Configuration>, SemanticsError> {
        let Some((name, _)) = self
            .index
            .get(&config.0)
            .map(|e| (e.state.name.as_str(), e))
        else {
            return Ok(BTreeSet::new());
        };
        for holder in self.index.ancestry(name) {
            if let Some(targets) = self.outgoing.get(holder).and_then(|m| m.get(label)) {
                return targets
                    .iter()
                    .map(|t| self.enter(t).map(|s| Configuration(s.to_string())))
                    .collect();
            }
        }
        Ok(BTreeSet::new())
    }

    pub fn is_accepting(&self, config: &Configuration) -> bool {
        match self.index.get(&config.0) {
            Some(e) => self
                .index
                .ancestry(e.state.name.as_str())
                .iter()
                .any(|n| self.index.get(n).is_some_and(|e| e.state.modifiers.final_)),
            None => false,
        }
    }

    /// Distinct labels, sorted.
    pub fn alphabet(&self) -> Vec<&'m str> {
        let set: BTreeSet<&str> = self
            .model
            .transitions
            .iter()
            .map(|t| t.label.as_str())
            .collect();
        set.into_iter().collect()
    }

    /// Every executable label sequence of length at most `k`, mapped to
    /// whether it is accepted.
    pub fn trace_map(&self, k: usize) -> Result<BTreeMap<Vec<String>, bool>, SemanticsError> {
        let init = self.initial_configuration()?;
        let alphabet = self.alphabet();
        let mut out = BTreeMap::new();
        let mut frontier: Vec<(Vec<String>, BTreeSet<Configuration>)> =
            vec![(Vec::new(), BTreeSet::from([init]))];
        for depth in 0..=k {
            let mut next = Vec::new();
            for (seq, configs) in frontier {
                out.insert(seq.clone(), configs.iter().any(|c| self.is_accepting(c)));
                if depth == k {
                    continue;
                }
                for label in &alphabet {
                    let mut reached = BTreeSet::new();
                    for c in &configs {
                        reached.extend(self.step(c, label)?);
                    }
                    if !reached.is_empty() {
                        let mut longer = seq.clone();
                        longer.push(label.to_string());
                        next.push((longer, reached));
                    }
                }
            }
            frontier = next;
        }
        Ok(out)
    }
}

pub fn initial_configuration(model: &Automaton) -> Result<Configuration, SemanticsError> {
    Interpreter::new(model).initial_configuration()
}

pub fn step(
    model: &Automaton,
    config: &Configuration,
    label: &str,
) -> Result<BTreeSet<Configuration>, SemanticsError> {
    Interpreter::new(model).step(config, label)
}

pub fn traces(model: &Automaton, k: usize) -> Result<BTreeSet<Trace>, SemanticsError> {
    Ok(Interpreter::new(model)
        .trace_map(k)?
        .into_iter()
        .map(|(labels, accepted)| Trace { labels, accepted })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub labels: Vec<String>,
    /// `None` if the trace is not executable in that model; otherwise
    /// whether it is accepted there.
    pub first: Option<bool>,
    pub second: Option<bool>,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_labels(&self.labels))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equivalence {
    pub equivalent: bool,
    pub counterexample: Option<Counterexample>,
}

/// Compares traces and acceptance up to length `k`. On a difference the
/// shortest, then lexicographically least, differing trace is reported.
pub fn equivalent(m1: &Automaton, m2: &Automaton, k: usize) -> Result<Equivalence, SemanticsError> {
    let a = Interpreter::new(m1).trace_map(k)?;
    let b = Interpreter::new(m2).trace_map(k)?;
    let witness = a
        .keys()
        .chain(b.keys())
        .filter(|seq| a.get(*seq) != b.get(*seq))
        .min_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
    Ok(match witness {
        None => Equivalence {
            equivalent: true,
            counterexample: None,
        },
        Some(seq) => Equivalence {
            equivalent: false,
            counterexample: Some(Counterexample {
                labels: seq.clone(),
                first: a.get(seq).copied(),
                second: b.get(seq).copied(),
            }),
        },
    })
}
