//! Recursive-descent parser for model files.
//!
//! ```text
//! model      := element* ;
//! element    := stateDecl | transition ;
//! stateDecl  := 'state' IDENT modifiers? ( ';' | '{' element* '}' ) ;
//! modifiers  := '<<' ('initial' | 'final')* '>>' ;
//! transition := IDENT '-' IDENT '>' IDENT ';' ;
//! ```
//!
//! Transitions may appear inside state bodies; they are collected into the
//! automaton's global transition list in declaration order.

use crate::diagnostic::{has_errors, Code, Diagnostic, SourceSpan};
use crate::model::{
    lint_located, validate_located, Automaton, Modifier, Modifiers, State, Subject, Transition,
};

use super::lexer::{tokenize, TokenKind};
use super::stream::TokenStream;

/// A successfully parsed value together with any warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub value: T,
    pub warnings: Vec<Diagnostic>,
}

/// Parses and validates a model. On failure every collected diagnostic is
/// returned (at least one of them an error).
pub fn parse_model(text: &str) -> Result<Parsed<Automaton>, Vec<Diagnostic>> {
    let tokens = tokenize(text).map_err(|d| vec![d])?;
    let mut p = ModelParser {
        ts: TokenStream::new(tokens),
        state_spans: Vec::new(),
        transition_spans: Vec::new(),
        transitions: Vec::new(),
        warnings: Vec::new(),
    };
    let states = p.elements(true).map_err(|d| vec![d])?;
    let model = Automaton {
        states,
        transitions: std::mem::take(&mut p.transitions),
    };

    let locate = |s: Subject| match s {
        Subject::State(i) => p.state_spans.get(i).map(|sp| sp.start),
        Subject::Transition(i) => p.transition_spans.get(i).map(|sp| sp.start),
    };
    let mut diags = p.warnings.clone();
    diags.extend(validate_located(&model, locate));
    if has_errors(&diags) {
        return Err(diags);
    }
    diags.extend(lint_located(&model, locate));
    Ok(Parsed {
        value: model,
        warnings: diags,
    })
}

struct ModelParser {
    ts: TokenStream,
    // both in the order the validator enumerates subjects
    state_spans: Vec<SourceSpan>,
    transition_spans: Vec<SourceSpan>,
    transitions: Vec<Transition>,
    warnings: Vec<Diagnostic>,
}

impl ModelParser {
    fn elements(&mut self, top: bool) -> Result<Vec<State>, Diagnostic> {
        let mut states = Vec::new();
        loop {
            match &self.ts.peek().kind {
                TokenKind::Eof if top => return Ok(states),
                TokenKind::RBrace if !top => return Ok(states),
                TokenKind::Ident(w) if w == "state" && !self.transition_ahead() => {
                    states.push(self.state_decl()?);
                }
                TokenKind::Ident(_) | TokenKind::Var(_) => self.transition()?,
                _ => {
                    let expected = if top {
                        "`state` or a transition"
                    } else {
                        "`state`, a transition or `}`"
                    };
                    return Err(self.ts.unexpected(expected));
                }
            }
        }
    }

    /// `state` used as the source name of a transition.
    fn transition_ahead(&self) -> bool {
        self.ts.peek_at(1).kind == TokenKind::Minus
    }

    fn ident(&mut self, what: &str) -> Result<String, Diagnostic> {
        let tok = self.ts.peek().clone();
        match tok.kind {
            TokenKind::Ident(name) => {
                self.ts.bump();
                Ok(name)
            }
            TokenKind::Var(name) => Err(Diagnostic::error(
                Code::BadIdent,
                format!("{name}: `$` is reserved for schema variables in rules"),
                Some(tok.span.start),
            )),
            _ => Err(self.ts.unexpected(what)),
        }
    }

    fn state_decl(&mut self) -> Result<State, Diagnostic> {
        let start = self.ts.expect_word("state")?.span;
        let name = self.ident("a state name")?;
        self.state_spans.push(start);
        let modifiers = if self.ts.at(&TokenKind::OpenMods) {
            self.modifiers()?
        } else {
            Modifiers::NONE
        };
        let substates = if self.ts.eat(&TokenKind::LBrace).is_some() {
            let inner = self.elements(false)?;
            self.ts.expect(&TokenKind::RBrace)?;
            inner
        } else {
            self.ts.expect(&TokenKind::Semi)?;
            Vec::new()
        };
        Ok(State {
            name,
            modifiers,
            substates,
        })
    }

    fn modifiers(&mut self) -> Result<Modifiers, Diagnostic> {
        self.ts.expect(&TokenKind::OpenMods)?;
        let mut set = Modifiers::NONE;
        while self.ts.eat(&TokenKind::CloseMods).is_none() {
            let tok = self.ts.peek().clone();
            let m = match &tok.kind {
                TokenKind::Ident(w) => Modifier::from_keyword(w),
                _ => None,
            }
            .ok_or_else(|| self.ts.unexpected("`initial`, `final` or `>>`"))?;
            self.ts.bump();
            if !set.insert(m) {
                self.warnings.push(Diagnostic::warning(
                    Code::DupModifier,
                    format!("modifier `{m}` given more than once"),
                    Some(tok.span.start),
                ));
            }
        }
        Ok(set)
    }

    fn transition(&mut self) -> Result<(), Diagnostic> {
        let start = self.ts.span_here();
        let source = self.ident("a state name")?;
        self.ts.expect(&TokenKind::Minus)?;
        let label = self.ident("a transition label")?;
        self.ts.expect(&TokenKind::Gt)?;
        let target = self.ident("a state name")?;
        self.ts.expect(&TokenKind::Semi)?;
        let t = Transition {
            source,
            label,
            target,
        };
        if self.transitions.contains(&t) {
            self.warnings.push(Diagnostic::warning(
                Code::DupTransition,
                format!("duplicate transition \"{t}\" ignored"),
                Some(start.start),
            ));
        } else {
            self.transitions.push(t);
            self.transition_spans.push(start);
        }
        Ok(())
    }
}
