//! Shared helpers for integration tests: seeded model generators and a
//! brute-force matcher used as an oracle.

#![allow(dead_code)]

use std::collections::BTreeSet;

use hautomata::matching::{transition_key, Binding};
use hautomata::model::{Automaton, Modifiers, State, Transition};
use hautomata::rules::{Atom, CompareOp, Constraint, NormalizedRule, Pattern};
use hautomata::{parse_model, Match};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const LABELS: [&str; 3] = ["x", "y", "z"];

pub fn model(text: &str) -> Automaton {
    match parse_model(text) {
        Ok(p) => p.value,
        Err(d) => panic!("{text}: {d:?}"),
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_states: usize,
    pub max_depth: usize,
    pub max_transitions: usize,
    /// Every composite gets exactly one initial child and exactly one
    /// top-level state is initial.
    pub runnable: bool,
}

impl Shape {
    pub const SMALL: Shape = Shape {
        max_states: 6,
        max_depth: 3,
        max_transitions: 6,
        runnable: false,
    };
    pub const CORPUS: Shape = Shape {
        max_states: 12,
        max_depth: 3,
        max_transitions: 14,
        runnable: true,
    };
}

/// Random valid model. Names are drawn from a pool that includes words
/// the parser treats as keywords elsewhere.
pub fn random_model(rng: &mut ChaCha8Rng, shape: Shape) -> Automaton {
    const POOL: [&str; 16] = [
        "a", "b", "c", "d", "e", "f", "g", "h", "idle", "run", "s_1", "Done", "state", "initial",
        "final", "rule",
    ];
    let n = rng.gen_range(1..=shape.max_states);
    let mut names: Vec<&str> = POOL.to_vec();
    names.shuffle(rng);
    names.truncate(n);

    // parent[i] < i, so a parent always precedes its children.
    let mut parent: Vec<Option<usize>> = Vec::with_capacity(n);
    let mut depth: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        let choices: Vec<usize> = (0..i).filter(|&p| depth[p] < shape.max_depth).collect();
        if !choices.is_empty() && rng.gen_bool(0.55) {
            let p = *choices.choose(rng).unwrap();
            parent.push(Some(p));
            depth.push(depth[p] + 1);
        } else {
            parent.push(None);
            depth.push(0);
        }
    }

    let mut mods = vec![Modifiers::NONE; n];
    for m in mods.iter_mut() {
        m.final_ = rng.gen_bool(0.25);
        if !shape.runnable {
            m.initial = rng.gen_bool(0.3);
        }
    }
    if shape.runnable {
        let mut groups: Vec<Option<usize>> = vec![None];
        groups.extend((0..n).map(Some));
        for g in groups {
            let kids: Vec<usize> = (0..n).filter(|&i| parent[i] == g).collect();
            if let Some(&k) = kids.choose(rng) {
                mods[k].initial = true;
            }
        }
    }

    fn build(i: usize, names: &[&str], parent: &[Option<usize>], mods: &[Modifiers]) -> State {
        let mut s = State::leaf(names[i]);
        s.modifiers = mods[i];
        s.substates = (0..names.len())
            .filter(|&j| parent[j] == Some(i))
            .map(|j| build(j, names, parent, mods))
            .collect();
        s
    }
    let mut m = Automaton::new();
    m.states = (0..n)
        .filter(|&i| parent[i].is_none())
        .map(|i| build(i, &names, &parent, &mods))
        .collect();
    let t = rng.gen_range(0..=shape.max_transitions);
    for _ in 0..t {
        let s = names[rng.gen_range(0..n)];
        let d = names[rng.gen_range(0..n)];
        let l = LABELS[rng.gen_range(0..LABELS.len())];
        m.add_transition(Transition::new(s, l, d));
    }
    m
}

/// Host states in document order with their parents.
fn host_states(model: &Automaton) -> Vec<(&State, Option<&str>)> {
    fn go<'a>(ss: &'a [State], p: Option<&'a str>, out: &mut Vec<(&'a State, Option<&'a str>)>) {
        for s in ss {
            out.push((s, p));
            go(&s.substates, Some(&s.name), out);
        }
    }
    let mut out = Vec::new();
    go(&model.states, None, &mut out);
    out
}

fn injective(k: usize, n: usize) -> Vec<Vec<usize>> {
    fn go(k: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !cur.contains(&i) {
                cur.push(i);
                go(k, n, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(k, n, &mut Vec::new(), &mut out);
    out
}

fn bind(binding: &mut Binding, atom: &Atom, value: &str) -> bool {
    match atom {
        Atom::Fixed(s) => s == value,
        Atom::Var(v) => match binding.get(v) {
            Some(b) => b == value,
            None => {
                binding.insert(v.clone(), value.to_string());
                true
            }
        },
    }
}

/// Every injective embedding of `pattern` extending `seed`, found by
/// enumerating all assignments and checking each condition separately.
pub fn brute_embeddings(
    pattern: &Pattern,
    model: &Automaton,
    seed: &Binding,
) -> Vec<(Binding, Vec<usize>, Vec<usize>)> {
    let hosts = host_states(model);
    let mut out = Vec::new();
    for sa in injective(pattern.states.len(), hosts.len()) {
        'trans: for ta in injective(pattern.transitions.len(), model.transitions.len()) {
            let mut b = seed.clone();
            for (i, ps) in pattern.states.iter().enumerate() {
                let (hs, hp) = hosts[sa[i]];
                if !ps.modifiers.is_subset(hs.modifiers) || !bind(&mut b, &ps.name, &hs.name) {
                    continue 'trans;
                }
                if let Some(p) = ps.parent {
                    if hp != Some(hosts[sa[p]].0.name.as_str()) {
                        continue 'trans;
                    }
                }
            }
            for (i, pt) in pattern.transitions.iter().enumerate() {
                let ht = &model.transitions[ta[i]];
                let ok = bind(&mut b, &pt.source, &ht.source)
                    && bind(&mut b, &pt.label, &ht.label)
                    && bind(&mut b, &pt.target, &ht.target)
                    && pt
                        .id
                        .as_ref()
                        .is_none_or(|id| bind(&mut b, &Atom::Var(id.clone()), &transition_key(ht)));
                if !ok {
                    continue 'trans;
                }
            }
            out.push((b, sa.clone(), ta));
        }
    }
    out
}

/// Binding pairs, host state names, host transition indices.
pub type MatchSet = BTreeSet<(Vec<(String, String)>, Vec<String>, Vec<usize>)>;

fn holds(c: &Constraint, b: &Binding) -> bool {
    let get = |a: &Atom| match a {
        Atom::Fixed(s) => Some(s.clone()),
        Atom::Var(v) => b.get(v).cloned(),
    };
    match (get(&c.left), get(&c.right)) {
        (Some(l), Some(r)) => (l == r) == (c.op == CompareOp::Eq),
        _ => false,
    }
}

/// Brute-force counterpart of `find_rule_matches`, as a set.
pub fn brute_matches(rule: &NormalizedRule, model: &Automaton) -> MatchSet {
    let hosts = host_states(model);
    brute_embeddings(&rule.lhs, model, &Binding::new())
        .into_iter()
        .filter(|(b, _, _)| rule.constraints.iter().all(|c| holds(c, b)))
        .filter(|(b, _, _)| {
            rule.nacs
                .iter()
                .all(|n| brute_embeddings(n, model, b).is_empty())
        })
        .map(|(b, sa, ta)| {
            (
                b.into_iter().collect(),
                sa.iter().map(|&i| hosts[i].0.name.clone()).collect(),
                ta,
            )
        })
        .collect()
}

pub fn engine_matches(ms: &[Match]) -> MatchSet {
    ms.iter()
        .map(|m| {
            (
                m.binding.clone().into_iter().collect(),
                m.states.clone(),
                m.transitions.clone(),
            )
        })
        .collect()
}

/// Fixed patterns exercising nesting, modifiers, repeated variables, NACs
/// and constraints.
pub const PATTERNS: [&str; 10] = [
    include_str!("../../examples/fig3.rul"),
    "rule p { state $s <<initial>>; }",
    "rule p { state $o { state $i; } }",
    "rule p { $s -$e> $s; }",
    "rule p { $s -x> $t; $t -$e> $s; }",
    "rule p { state $a <<final>>; $a -$e> $b; }",
    "rule p { state $o { state $i <<initial>>; state $j; } }",
    "rule p { $s -$e> $t; not { $t -$e> $s; } }",
    "rule p { state $s; state $t; $s -$e> $t; where $s != $t; }",
    "rule p { state $o { state $i { state $k; } } $k -$e> $o; }",
];

pub fn rule(text: &str) -> NormalizedRule {
    let rules = hautomata::parse_rules(text).unwrap_or_else(|d| panic!("{text}: {d:?}"));
    hautomata::normalize_rule(&rules[0]).unwrap_or_else(|e| panic!("{text}: {e}"))
}
