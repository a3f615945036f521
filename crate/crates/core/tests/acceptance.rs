//! Acceptance suite. Runs every criterion twice, prints one PASS/FAIL line
//! per criterion and fails if any criterion fails, exceeds its time limit,
//! or produces different output on the second run.

mod common;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use common::*;
use hautomata::flatten::{fig3_normalized, fig3_rule};
use hautomata::model::Automaton;
use hautomata::oracle::{equivalent, format_labels, traces};
use hautomata::rewrite::{apply, Strategy};
use hautomata::{find_rule_matches, flatten, parse_model, print_model};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

const SEED_MODEL: &str = "state a; state b { state c <<initial>>; state d; } a -x> b; c -y> d;";
const FIG3_SEPARATED: &str = include_str!("../examples/fig3_separated.rul");

/// The published integrated rule, line numbers removed.
const FIGURE_TEXT: &str = "state $source;

state $outer {
  state $inner << [[ initial :- ]] >>;
}

$source -$event> [[ $outer :- $inner]];
";

fn show(m: &Automaton) -> String {
    print_model(m).expect("valid model")
}

fn c1_fig3_fidelity() -> Outcome {
    let text = fig3_rule();
    let body = text
        .strip_prefix("rule forward {\n")
        .and_then(|t| t.strip_suffix("}\n"))
        .ok_or("bundled rule lacks the wrapper")?;
    ensure!(
        body == FIGURE_TEXT,
        "bundled rule differs from the published text:\n{body}"
    );
    let rules = hautomata::parse_rules(text).map_err(|d| format!("{d:?}"))?;
    ensure!(rules.len() == 1, "expected one rule");
    let report =
        apply(&model(SEED_MODEL), &fig3_normalized(), Strategy::Once).map_err(|e| e.to_string())?;
    let got = show(&report.final_model);
    let want = "state a;\nstate b {\n  state c;\n  state d;\n}\n\na -x> c;\nc -y> d;\n";
    ensure!(got == want, "got\n{got}");
    Ok(got)
}

fn c2_subset_matching() -> Outcome {
    let r = rule("rule p { state $s <<initial>>; }");
    let ms = find_rule_matches(&r, &model("state q <<initial final>>;"));
    ensure!(ms.len() == 1, "expected one match, got {}", ms.len());
    ensure!(ms[0].binding["$s"] == "q", "wrong binding");
    Ok(ms[0].binding_summary())
}

fn c3_variable_consistency() -> Outcome {
    let host = model(
        "state a; state e; state b { state c <<initial>>; state d; }
         a -x> b; e -y> b; c -z> b; d -x> a;",
    );
    ensure!(host.state_count() == 5, "host must have five states");
    let coupled = fig3_normalized();
    let decoupled = rule(
        "rule p { state $source; state $outer { state $inner <<initial>>; } $other -$event> $outer; }",
    );
    let got = find_rule_matches(&coupled, &host);
    ensure!(
        engine_matches(&got) == brute_matches(&coupled, &host),
        "engine and brute force disagree"
    );
    let agreeing: BTreeSet<String> = find_rule_matches(&decoupled, &host)
        .into_iter()
        .filter(|m| m.binding["$source"] == m.binding["$other"])
        .map(|m| {
            let mut b = m.binding.clone();
            b.remove("$other");
            format!("{b:?}")
        })
        .collect();
    let coupled_set: BTreeSet<String> = got.iter().map(|m| format!("{:?}", m.binding)).collect();
    ensure!(coupled_set == agreeing, "{coupled_set:?} vs {agreeing:?}");
    ensure!(
        got.len() == 2,
        "expected the a and e matches, got {}",
        got.len()
    );
    Ok(got.iter().map(|m| m.binding_summary() + "\n").collect())
}

fn c4_matcher_oracle() -> Outcome {
    let rules: Vec<_> = PATTERNS.iter().map(|p| rule(p)).collect();
    let mut out = String::new();
    let mut total = 0;
    for seed in 0..50 {
        let m = random_model(&mut rng(1000 + seed), Shape::SMALL);
        ensure!(
            m.state_count() <= 6 && m.depth() <= 3 && m.transitions.len() <= 6,
            "shape"
        );
        for (i, r) in rules.iter().enumerate() {
            let got = find_rule_matches(r, &m);
            ensure!(
                engine_matches(&got) == brute_matches(r, &m),
                "seed {seed}, pattern {i} disagrees"
            );
            total += got.len();
            let _ = writeln!(out, "{seed}/{i}: {}", got.len());
        }
    }
    ensure!(total > 0, "no matches at all; the comparison is vacuous");
    Ok(out)
}

fn c5_round_trip() -> Outcome {
    let mut out = String::new();
    for seed in 0..200 {
        let m = random_model(&mut rng(5000 + seed), Shape::SMALL);
        let text = show(&m);
        let back = parse_model(&text)
            .map_err(|d| format!("seed {seed}: {d:?}"))?
            .value;
        ensure!(back == m, "seed {seed}: parse(print(m)) != m");
        ensure!(show(&back) == text, "seed {seed}: print not idempotent");
        out.push_str(&text);
    }
    Ok(out)
}

fn c6_simplified_rule_caveat() -> Outcome {
    let original = model(include_str!("../examples/two_incoming.aut"));
    let report =
        apply(&original, &fig3_normalized(), Strategy::fixpoint()).map_err(|e| e.to_string())?;
    ensure!(
        report.applications == 1,
        "rule applied {} times",
        report.applications
    );
    let still_composite = report
        .final_model
        .transitions
        .iter()
        .filter(|t| t.target == "b")
        .count();
    ensure!(still_composite == 1, "expected one unforwarded transition");
    let verdict = equivalent(&original, &report.final_model, 6).map_err(|e| e.to_string())?;
    let witness = verdict
        .counterexample
        .ok_or("rule output judged equivalent")?;
    ensure!(witness.labels == ["y", "z"], "counterexample {witness}");

    let flat = flatten(&original).map_err(|e| e.to_string())?;
    ensure!(
        flat.transitions.iter().filter(|t| t.target == "c").count() == 2,
        "flatten did not forward both transitions"
    );
    let verdict = equivalent(&original, &flat, 8).map_err(|e| e.to_string())?;
    ensure!(
        verdict.equivalent,
        "flatten inequivalent: {:?}",
        verdict.counterexample
    );
    Ok(format!(
        "{}differ: {witness}\n{}",
        show(&report.final_model),
        show(&flat)
    ))
}

/// Hand-computed trace sets, checked before the oracle is trusted.
fn hand_traces() -> Result<(), String> {
    type Case = (&'static str, usize, &'static [(&'static str, bool)]);
    let cases: [Case; 3] = [
        (
            "state a <<initial>>; state b { state c <<initial>>; state d <<final>>; } a -x> b; c -y> d;",
            3,
            &[("ε", false), ("x", false), ("x y", true)],
        ),
        (
            "state p <<initial>> { state q <<initial>>; state r <<final>>; q -a> r; } p -b> p;",
            2,
            &[("ε", false), ("a", true), ("b", false), ("a b", false), ("b a", true), ("b b", false)],
        ),
        (
            "state s <<initial>>; state t <<final>>; state u; s -a> t; s -a> u; u -b> s;",
            2,
            &[("ε", false), ("a", true), ("a b", false)],
        ),
    ];
    for (text, k, want) in cases {
        let got: BTreeSet<(String, bool)> = traces(&model(text), k)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|t| (format_labels(&t.labels), t.accepted))
            .collect();
        let want: BTreeSet<(String, bool)> =
            want.iter().map(|(l, a)| (l.to_string(), *a)).collect();
        ensure!(got == want, "{text}: {got:?}");
    }
    Ok(())
}

fn c7_flattening_theorem() -> Outcome {
    hand_traces()?;
    let mut corpus: Vec<Automaton> = vec![
        model(include_str!("../examples/controller.aut")),
        model(include_str!("../examples/two_incoming.aut")),
    ];
    let mut seed = 7000;
    while corpus.len() < 24 {
        let m = random_model(&mut rng(seed), Shape::CORPUS);
        seed += 1;
        if m.depth() >= 1 {
            corpus.push(m);
        }
    }
    let mut out = String::new();
    for (i, m) in corpus.iter().enumerate() {
        ensure!(
            m.state_count() <= 12 && m.depth() <= 3,
            "model {i} outside the corpus shape"
        );
        let f = flatten(m).map_err(|e| format!("model {i}: {e}"))?;
        ensure!(f.depth() == 0, "model {i}: not flat");
        ensure!(
            flatten(&f).map_err(|e| e.to_string())? == f,
            "model {i}: not idempotent"
        );
        let v = equivalent(m, &f, 8).map_err(|e| e.to_string())?;
        ensure!(
            v.equivalent,
            "model {i}: counterexample {:?}",
            v.counterexample
        );
        out.push_str(&show(&f));
    }
    Ok(out)
}

fn c8_notation_equivalence() -> Outcome {
    let integrated = fig3_normalized();
    let separated = hautomata::load_rule(FIG3_SEPARATED, "forward")
        .map_err(|d| format!("{d:?}"))?
        .ok_or("separated rule missing")?;
    ensure!(
        integrated.without_object_ids() == separated.without_object_ids(),
        "normalized rules differ"
    );
    let seed = model(SEED_MODEL);
    let a = apply(&seed, &integrated, Strategy::Once).map_err(|e| e.to_string())?;
    let b = apply(&seed, &separated, Strategy::Once).map_err(|e| e.to_string())?;
    let (a, b) = (show(&a.final_model), show(&b.final_model));
    ensure!(a == b, "outputs differ:\n{a}\n{b}");
    Ok(a)
}

struct Criterion {
    id: usize,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

const fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

const CRITERIA: [Criterion; 8] = [
    Criterion {
        id: 1,
        name: "forwarding rule fidelity",
        limit: secs(1),
        run: c1_fig3_fidelity,
    },
    Criterion {
        id: 2,
        name: "subset matching",
        limit: secs(1),
        run: c2_subset_matching,
    },
    Criterion {
        id: 3,
        name: "variable consistency",
        limit: secs(5),
        run: c3_variable_consistency,
    },
    Criterion {
        id: 4,
        name: "matcher oracle equivalence",
        limit: secs(60),
        run: c4_matcher_oracle,
    },
    Criterion {
        id: 5,
        name: "round-trip",
        limit: secs(10),
        run: c5_round_trip,
    },
    Criterion {
        id: 6,
        name: "simplified rule caveat",
        limit: secs(5),
        run: c6_simplified_rule_caveat,
    },
    Criterion {
        id: 7,
        name: "flattening preserves traces",
        limit: secs(60),
        run: c7_flattening_theorem,
    },
    Criterion {
        id: 8,
        name: "notation equivalence",
        limit: secs(1),
        run: c8_notation_equivalence,
    },
];

fn timed(c: &Criterion) -> (Outcome, Duration) {
    let start = Instant::now();
    let outcome = (c.run)();
    (outcome, start.elapsed())
}

fn main() {
    let mut failures = 0;
    let mut deterministic = Ok(());
    for c in &CRITERIA {
        let (first, t1) = timed(c);
        let (second, t2) = timed(c);
        let slowest = t1.max(t2);
        let verdict = match (&first, &second) {
            (Err(e), _) | (_, Err(e)) => Err(e.clone()),
            _ if slowest > c.limit => Err(format!("took {slowest:?}, limit {:?}", c.limit)),
            _ => Ok(()),
        };
        if first != second && deterministic.is_ok() {
            deterministic = Err(format!("criterion {} output changed between runs", c.id));
        }
        match verdict {
            Ok(()) => println!("criterion {} ({}): PASS in {:?}", c.id, c.name, slowest),
            Err(e) => {
                failures += 1;
                println!("criterion {} ({}): FAIL: {e}", c.id, c.name);
            }
        }
    }
    match deterministic {
        Ok(()) => println!("criterion 9 (determinism): PASS"),
        Err(e) => {
            failures += 1;
            println!("criterion 9 (determinism): FAIL: {e}");
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
