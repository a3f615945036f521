//! Command-line front end. Artifacts go to stdout, everything else to
//! stderr.
//!
//! Exit codes: 0 success, 1 parse or validation diagnostics, 2 application
//! or semantics errors, 3 usage (including unreadable files and unknown
//! rule names).

use std::ffi::OsString;
use std::io::{self, Read, Write};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::diagnostic::Diagnostic;
use crate::flatten::{fig3_normalized, flatten};
use crate::matching::find_rule_matches;
use crate::model::{Automaton, State};
use crate::oracle::{equivalent, SemanticsError};
use crate::rewrite::{apply, RewriteError, Strategy};
use crate::rules::{load_rule, NormalizedRule};
use crate::syntax::{parse_model, print_model};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_SEMANTICS: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "hautomata", version, about = "Hierarchical automata workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a model; optionally dump it as JSON.
    Parse {
        model: String,
        #[arg(long)]
        ast: bool,
    },
    /// Pretty-print a model in canonical form.
    Print { model: String },
    /// List the matches of a rule's left-hand side.
    Matches {
        rules: String,
        model: String,
        #[arg(long)]
        rule: String,
    },
    /// Apply a rule to a model.
    Apply {
        rules: String,
        model: String,
        #[arg(long)]
        rule: String,
        #[arg(long, value_enum, default_value_t = StrategyArg::Once)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = Strategy::DEFAULT_MAX_ITERATIONS)]
        max_iter: usize,
    },
    /// Flatten a hierarchical model.
    Flatten { model: String },
    /// Compare two models by their traces up to a depth.
    Equiv {
        first: String,
        second: String,
        #[arg(long)]
        depth: usize,
    },
    /// Apply the bundled forwarding rule to fixpoint.
    Fig3 { model: String },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum StrategyArg {
    Once,
    Fixpoint,
}

/// Failure carrying its exit code; messages are already written.
struct Exit(i32);

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Io<'_> {
    fn diagnostics(&mut self, file: &str, diags: &[Diagnostic]) {
        for d in diags {
            let _ = writeln!(self.err, "{}", d.render(file));
        }
    }

    fn read(&mut self, path: &str) -> Result<String, Exit> {
        let result = if path == "-" {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map(|_| s)
        } else {
            std::fs::read_to_string(path)
        };
        result.map_err(|e| {
            let _ = writeln!(self.err, "{path}: cannot read: {e}");
            Exit(EXIT_USAGE)
        })
    }

    fn model(&mut self, path: &str) -> Result<Automaton, Exit> {
        let text = self.read(path)?;
        match parse_model(&text) {
            Ok(parsed) => {
                self.diagnostics(display_name(path), &parsed.warnings);
                Ok(parsed.value)
            }
            Err(diags) => {
                self.diagnostics(display_name(path), &diags);
                Err(Exit(EXIT_DIAGNOSTICS))
            }
        }
    }

    fn rule(&mut self, path: &str, name: &str) -> Result<NormalizedRule, Exit> {
        let text = self.read(path)?;
        match load_rule(&text, name) {
            Ok(Some(rule)) => Ok(rule),
            Ok(None) => {
                let _ = writeln!(self.err, "{}: no rule named \"{name}\"", display_name(path));
                Err(Exit(EXIT_USAGE))
            }
            Err(diags) => {
                self.diagnostics(display_name(path), &diags);
                Err(Exit(EXIT_DIAGNOSTICS))
            }
        }
    }

    fn emit(&mut self, file: &str, model: &Automaton) -> Result<(), Exit> {
        match print_model(model) {
            Ok(text) => {
                let _ = self.out.write_all(text.as_bytes());
                Ok(())
            }
            Err(diags) => {
                self.diagnostics(file, &diags);
                Err(Exit(EXIT_DIAGNOSTICS))
            }
        }
    }

    fn semantics(&mut self, file: &str, e: &SemanticsError) -> Exit {
        self.diagnostics(file, &[e.to_diagnostic()]);
        Exit(EXIT_SEMANTICS)
    }

    fn rewrite(&mut self, file: &str, e: &RewriteError) -> Exit {
        self.diagnostics(file, &[e.to_diagnostic()]);
        Exit(EXIT_SEMANTICS)
    }
}

fn display_name(path: &str) -> &str {
    if path == "-" {
        "<stdin>"
    } else {
        path
    }
}

fn state_json(s: &State) -> Value {
    let modifiers: Vec<&str> = s.modifiers.iter().map(|m| m.keyword()).collect();
    json!({
        "name": s.name,
        "modifiers": modifiers,
        "substates": s.substates.iter().map(state_json).collect::<Vec<_>>(),
    })
}

/// JSON document for `parse --ast`, keys in declaration order.
pub fn model_json(model: &Automaton) -> String {
    let doc = json!({
        "states": model.states.iter().map(state_json).collect::<Vec<_>>(),
        "transitions": model.transitions.iter().map(|t| json!({
            "source": t.source,
            "label": t.label,
            "target": t.target,
        })).collect::<Vec<_>>(),
    });
    serde_json::to_string_pretty(&doc).expect("json serializes")
}

fn apply_and_report(
    io: &mut Io<'_>,
    file: &str,
    model: &Automaton,
    rule: &NormalizedRule,
    strategy: Strategy,
) -> Result<(), Exit> {
    let report = apply(model, rule, strategy).map_err(|e| io.rewrite(file, &e))?;
    io.diagnostics(file, &report.warnings);
    for (i, step) in report.steps.iter().enumerate() {
        let _ = writeln!(io.err, "step {}: {} {}", i + 1, step.rule, step.binding);
    }
    let _ = writeln!(
        io.err,
        "{} application(s), strategy {strategy}",
        report.applications
    );
    io.emit(file, &report.final_model)
}

fn dispatch(cmd: Command, io: &mut Io<'_>) -> Result<(), Exit> {
    match cmd {
        Command::Parse { model, ast } => {
            let m = io.model(&model)?;
            if ast {
                let _ = writeln!(io.out, "{}", model_json(&m));
            }
            Ok(())
        }
        Command::Print { model } => {
            let m = io.model(&model)?;
            io.emit(display_name(&model), &m)
        }
        Command::Matches { rules, model, rule } => {
            let r = io.rule(&rules, &rule)?;
            let m = io.model(&model)?;
            for (i, found) in find_rule_matches(&r, &m).iter().enumerate() {
                let _ = writeln!(io.out, "#{} {}", i + 1, found.binding_summary());
            }
            Ok(())
        }
        Command::Apply {
            rules,
            model,
            rule,
            strategy,
            max_iter,
        } => {
            let r = io.rule(&rules, &rule)?;
            let m = io.model(&model)?;
            let strategy = match strategy {
                StrategyArg::Once => Strategy::Once,
                StrategyArg::Fixpoint => Strategy::Fixpoint {
                    max_iterations: max_iter,
                },
            };
            apply_and_report(io, display_name(&model), &m, &r, strategy)
        }
        Command::Flatten { model } => {
            let m = io.model(&model)?;
            let flat = flatten(&m).map_err(|e| io.semantics(display_name(&model), &e))?;
            io.emit(display_name(&model), &flat)
        }
        Command::Equiv {
            first,
            second,
            depth,
        } => {
            let m1 = io.model(&first)?;
            let m2 = io.model(&second)?;
            let verdict = match equivalent(&m1, &m2, depth) {
                Ok(v) => v,
                Err(e) => {
                    // Attribute the error to whichever model cannot run.
                    let file = match crate::oracle::initial_configuration(&m1) {
                        Err(_) => &first,
                        Ok(_) => &second,
                    };
                    return Err(io.semantics(display_name(file), &e));
                }
            };
            match verdict.counterexample {
                None => {
                    let _ = writeln!(io.out, "equivalent");
                }
                Some(c) => {
                    let _ = writeln!(io.out, "differ: {c}");
                    let side = |v: Option<bool>| match v {
                        None => "not executable",
                        Some(true) => "accepted",
                        Some(false) => "not accepted",
                    };
                    let _ = writeln!(
                        io.err,
                        "{}: {}; {}: {}",
                        display_name(&first),
                        side(c.first),
                        display_name(&second),
                        side(c.second)
                    );
                }
            }
            Ok(())
        }
        Command::Fig3 { model } => {
            let m = io.model(&model)?;
            apply_and_report(
                io,
                display_name(&model),
                &m,
                &fig3_normalized(),
                Strategy::fixpoint(),
            )
        }
    }
}

/// Runs the command line `args` (program name first).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let mut io = Io { out, err };
    let code = match dispatch(cli.command, &mut io) {
        Ok(()) => EXIT_OK,
        Err(Exit(code)) => code,
    };
    let _ = io.out.flush();
    code
}
