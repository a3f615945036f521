//! Flattening hierarchical automata into depth-0 automata.
//!
//! Pipeline: forward transitions that target composites to the innermost
//! initial leaf, copy transitions leaving composites down to the leaves they
//! are not shadowed in, push modifiers down to the leaves, then hoist the
//! leaves to top level.

use std::collections::{HashMap, HashSet};

use crate::model::{Automaton, State, StateIndex, Transition};
use crate::oracle::{initial_children, SemanticsError};
use crate::rules::{load_rule, NormalizedRule};

const FIG3_RULE: &str = include_str!("../examples/fig3.rul");

/// The bundled simplified forwarding rule, verbatim.
pub fn fig3_rule() -> &'static str {
    FIG3_RULE
}

/// The bundled rule, parsed and normalized.
pub fn fig3_normalized() -> NormalizedRule {
    load_rule(FIG3_RULE, "forward")
        .expect("bundled rule parses")
        .expect("bundled rule is named forward")
}

/// Every composite must have exactly one initial substate.
fn check_unique_initial(model: &Automaton) -> Result<(), SemanticsError> {
    for s in model.walk_states() {
        if s.is_leaf() {
            continue;
        }
        let found = initial_children(s).count();
        if found != 1 {
            return Err(SemanticsError::NoUniqueInitial {
                state: s.name.clone(),
                found,
            });
        }
    }
    Ok(())
}

fn check_top_initial(model: &Automaton) -> Result<Option<&State>, SemanticsError> {
    let top: Vec<&State> = model
        .states
        .iter()
        .filter(|s| s.modifiers.initial)
        .collect();
    match top.as_slice() {
        [] => Ok(None),
        [one] => Ok(Some(one)),
        many => Err(SemanticsError::MultipleTopInitial {
            names: many.iter().map(|s| s.name.clone()).collect(),
        }),
    }
}

/// Follows initial substates down to a leaf. Assumes unique initials.
fn innermost_initial(s: &State) -> &State {
    let mut cur = s;
    while let Some(next) = initial_children(cur).next() {
        cur = next;
    }
    cur
}

fn dedup(transitions: Vec<Transition>) -> Vec<Transition> {
    let mut seen = HashSet::new();
    transitions
        .into_iter()
        .filter(|t| seen.insert(t.clone()))
        .collect()
}

/// Retargets every transition into a composite to its innermost initial
/// leaf. `initial` modifiers are kept.
pub fn forward_targets(model: &Automaton) -> Result<Automaton, SemanticsError> {
    check_unique_initial(model)?;
    let index = StateIndex::build(model);
    let transitions = model
        .transitions
        .iter()
        .map(|t| {
            let target = match index.get(&t.target) {
                Some(e) => innermost_initial(e.state).name.clone(),
                None => t.target.clone(),
            };
            Transition::new(&t.source, &t.label, target)
        })
        .collect();
    Ok(Automaton {
        states: model.states.clone(),
        transitions: dedup(transitions),
    })
}

/// Replaces every transition leaving a composite by copies leaving each of
/// its leaves, skipping leaves where a state at or below the leaf but
/// strictly inside the composite already handles the label.
pub fn copy_down_sources(model: &Automaton) -> Result<Automaton, SemanticsError> {
    let index = StateIndex::build(model);
    for t in &model.transitions {
        if index.get(&t.target).is_some_and(|e| !e.state.is_leaf()) {
            return Err(SemanticsError::CompositeTarget {
                transition: t.to_string(),
            });
        }
    }
    let mut labels: HashMap<&str, HashSet<&str>> = HashMap::new();
    for t in &model.transitions {
        labels.entry(&t.source).or_default().insert(&t.label);
    }
    let handles = |s: &str, label: &str| labels.get(s).is_some_and(|l| l.contains(label));

    let mut out = Vec::with_capacity(model.transitions.len());
    for t in &model.transitions {
        let source = match index.get(&t.source) {
            Some(e) if !e.state.is_leaf() => e.state,
            _ => {
                out.push(t.clone());
                continue;
            }
        };
        for leaf in source.walk().filter(|s| s.is_leaf()) {
            let shadowed = index
                .ancestry(&leaf.name)
                .into_iter()
                .take_while(|n| *n != source.name)
                .any(|n| handles(n, &t.label));
            if !shadowed {
                out.push(Transition::new(&leaf.name, &t.label, &t.target));
            }
        }
    }
    Ok(Automaton {
        states: model.states.clone(),
        transitions: dedup(out),
    })
}

/// Full pipeline. The result is flat and trace-equivalent to `model`.
pub fn flatten(model: &Automaton) -> Result<Automaton, SemanticsError> {
    check_unique_initial(model)?;
    let start = check_top_initial(model)?.map(|s| innermost_initial(s).name.clone());
    let forwarded = forward_targets(model)?;
    let copied = copy_down_sources(&forwarded)?;

    let mut states = Vec::new();
    fn hoist(s: &State, final_above: bool, start: Option<&str>, out: &mut Vec<State>) {
        let is_final = final_above || s.modifiers.final_;
        if s.is_leaf() {
            let mut leaf = State::leaf(&s.name);
            leaf.modifiers.final_ = is_final;
            leaf.modifiers.initial = start == Some(s.name.as_str());
            out.push(leaf);
        }
        for c in &s.substates {
            hoist(c, is_final, start, out);
        }
    }
    for s in &model.states {
        hoist(s, false, start.as_deref(), &mut states);
    }
    Ok(Automaton {
        states,
        transitions: copied.transitions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostic::Code;
    use crate::oracle::equivalent;
    use crate::rewrite::{apply, Strategy};
    use crate::syntax::{parse_model, print_model};

    fn model(text: &str) -> Automaton {
        parse_model(text).unwrap().value
    }

    fn show(m: &Automaton) -> String {
        print_model(m).unwrap()
    }

    fn edges(m: &Automaton) -> Vec<String> {
        m.transitions.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn forwards_all_incoming() {
        let m = model("state a; state b { state c <<initial>>; } a -x> b; a -y> b;");
        let f = forward_targets(&m).unwrap();
        assert_eq!(edges(&f), ["a -x> c", "a -y> c"]);
        assert!(f.find_state("c").unwrap().modifiers.initial);
    }

    #[test]
    fn forwards_through_two_levels() {
        let m = model("state a; state b { state c <<initial>> { state e <<initial>>; } } a -x> b;");
        assert_eq!(edges(&forward_targets(&m).unwrap()), ["a -x> e"]);
    }

    #[test]
    fn forward_requires_unique_initial() {
        let m = model("state a; state b { state c; state d; } a -x> b;");
        let err = forward_targets(&m).unwrap_err();
        assert_eq!(err.code(), Code::NoUniqueInitial);
        assert!(err.to_string().contains("\"b\""));
    }

    #[test]
    fn copies_down_unshadowed() {
        let m = model("state a <<initial>>; state b { state c <<initial>>; state d; } b -z> a;");
        assert_eq!(
            edges(&copy_down_sources(&m).unwrap()),
            ["c -z> a", "d -z> a"]
        );
        let m = model(
            "state a <<initial>>; state b { state c <<initial>>; state d; } c -z> d; b -z> a;",
        );
        assert_eq!(
            edges(&copy_down_sources(&m).unwrap()),
            ["c -z> d", "d -z> a"]
        );
    }

    #[test]
    fn copy_down_rejects_composite_target() {
        let m = model("state a; state b { state c <<initial>>; } a -x> b;");
        assert_eq!(
            copy_down_sources(&m).unwrap_err().code(),
            Code::CompositeTarget
        );
    }

    #[test]
    fn flatten_examples() {
        let m = model(
            "state a <<initial>>; state b { state c <<initial>>; state d; } a -x> b; c -y> d;",
        );
        let f = flatten(&m).unwrap();
        assert_eq!(
            show(&f),
            show(&model(
                "state a <<initial>>; state c; state d; a -x> c; c -y> d;"
            ))
        );
        let m = model("state a <<initial>>; state b <<final>> { state c <<initial>>; } a -x> b;");
        assert_eq!(
            show(&flatten(&m).unwrap()),
            show(&model("state a <<initial>>; state c <<final>>; a -x> c;"))
        );
    }

    #[test]
    fn flat_is_fixed_point() {
        let m = model("state a <<initial>>; state b <<final>>; a -x> b; b -y> a;");
        assert_eq!(flatten(&m).unwrap(), m);
        assert_eq!(forward_targets(&m).unwrap(), m);
        assert_eq!(copy_down_sources(&m).unwrap(), m);
    }

    #[test]
    fn flatten_keeps_only_start_initial() {
        let m = model(
            "state a; state b <<initial>> { state c <<initial>>; state d { state e <<initial>>; } }",
        );
        let f = flatten(&m).unwrap();
        let initials: Vec<&str> = f
            .states
            .iter()
            .filter(|s| s.modifiers.initial)
            .map(|s| s.name.as_str())
            .collect();
        assert_eq!(initials, ["c"]);
        assert_eq!(f.leaf_names(), ["a", "c", "e"]);
    }

    #[test]
    fn flatten_rejects_several_top_initials() {
        let m = model("state a <<initial>>; state b <<initial>>;");
        assert_eq!(flatten(&m).unwrap_err().code(), Code::MultipleTopInitial);
    }

    #[test]
    fn flatten_preserves_traces() {
        let m = model(
            "state a <<initial>>; state b <<final>> { state c <<initial>>; state d; }
             a -x> b; c -y> d; b -z> a; c -z> c; d -w> b;",
        );
        let f = flatten(&m).unwrap();
        assert!(f.is_flat());
        assert!(equivalent(&m, &f, 6).unwrap().equivalent);
    }

    #[test]
    fn bundled_rule_parses() {
        let rules = crate::rules::parse_rules(fig3_rule()).unwrap();
        assert_eq!(rules.len(), 1);
        fig3_normalized();
    }

    #[test]
    fn fig3_agrees_with_forwarding_on_single_incoming() {
        let m = model("state a; state b { state c <<initial>>; state d; } a -x> b; c -y> d;");
        let by_rule = apply(&m, &fig3_normalized(), Strategy::fixpoint())
            .unwrap()
            .final_model;
        let mut forwarded = forward_targets(&m).unwrap();
        forwarded.find_state_mut("c").unwrap().modifiers.initial = false;
        assert_eq!(by_rule, forwarded);
    }

    #[test]
    fn fig3_forwards_only_one_of_two() {
        let m = model("state a; state b { state c <<initial>>; } a -x> b; a -y> b;");
        let r = apply(&m, &fig3_normalized(), Strategy::fixpoint()).unwrap();
        assert_eq!(r.applications, 1);
        assert_eq!(edges(&r.final_model), ["a -x> c", "a -y> b"]);
    }
}
