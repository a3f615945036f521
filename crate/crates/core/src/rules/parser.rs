//! Parser for rule files.
//!
//! The grammar is the model grammar with schema variables (`$x`) allowed at
//! every identifier position, plus:
//!
//! ```text
//! file        := rule* ;
//! rule        := 'rule' IDENT '{' item* '}' ;
//! item        := element | nac | where | 'match' '{' item* '}' | 'replace' '{' element* '}' ;
//! nac         := 'not' '{' element* '}' ;
//! where       := 'where' constraint (',' constraint)* ';' ;
//! constraint  := atom ('==' | '!=') atom ;
//! element     := stateDecl | transition | idTransition | '[[' element* ':-' element* ']]' ';'? ;
//! idTransition:= 'Transition' VAR '[[' transition ']]' ';'? ;
//! name        := atom | '[[' atom? ':-' atom? ']]' ;
//! modifiers   := '<<' (MOD | '[[' MOD* ':-' MOD* ']]')* '>>' ;
//! ```

use std::collections::HashSet;

use crate::diagnostic::{Code, Diagnostic, SourceSpan};
use crate::model::Modifier;
use crate::syntax::lexer::{tokenize, TokenKind};
use crate::syntax::stream::TokenStream;

use super::ast::*;

/// Parses every `rule` block in `text`, in source order.
pub fn parse_rules(text: &str) -> Result<Vec<Rule>, Vec<Diagnostic>> {
    let tokens = tokenize(text).map_err(|d| vec![d])?;
    let mut p = RuleParser {
        ts: TokenStream::new(tokens),
    };
    let mut rules: Vec<Rule> = Vec::new();
    let mut names = HashSet::new();
    let mut errors = Vec::new();
    while !p.ts.at_eof() {
        let rule = p.rule().map_err(|d| vec![d])?;
        if !names.insert(rule.name.clone()) {
            errors.push(Diagnostic::error(
                Code::DupRule,
                format!("rule \"{}\" defined more than once", rule.name),
                Some(rule.span.start),
            ));
        }
        if let Err(d) = check_form(&rule) {
            errors.push(d);
        }
        rules.push(rule);
    }
    if errors.is_empty() {
        Ok(rules)
    } else {
        Err(errors)
    }
}

fn check_form(rule: &Rule) -> Result<(), Diagnostic> {
    if !rule.is_separated() {
        return Ok(());
    }
    let mixed = |span: SourceSpan| {
        Diagnostic::error(
            Code::MixedForm,
            format!(
                "rule \"{}\" mixes integrated replacements with match/replace blocks",
                rule.name
            ),
            Some(span.start),
        )
    };
    let mut blocks = Vec::new();
    for item in &rule.items {
        match item {
            RuleItem::Element(e) => return Err(mixed(e.span())),
            RuleItem::Match(inner) | RuleItem::Replace(inner) => {
                blocks.push(matches!(item, RuleItem::Match(_)));
                for i in inner {
                    if let RuleItem::Element(e) = i {
                        if e.has_replacement() {
                            return Err(mixed(e.span()));
                        }
                    }
                }
            }
            RuleItem::Nac(_) | RuleItem::Where(_) => {}
        }
    }
    if blocks != [true, false] {
        return Err(Diagnostic::error(
            Code::SyntaxError,
            format!(
                "rule \"{}\" needs exactly one match block followed by one replace block",
                rule.name
            ),
            Some(rule.span.start),
        ));
    }
    Ok(())
}

struct RuleParser {
    ts: TokenStream,
}

/// Where an element is being parsed.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Plain,
    /// Inside a whole-element replacement; further `[[` would nest.
    InReplacement,
    /// Inside `not { … }`; replacements are meaningless there.
    Nac,
}

impl RuleParser {
    fn rule(&mut self) -> Result<Rule, Diagnostic> {
        let start = self.ts.expect_word("rule")?.span;
        let name = match self.ts.peek().kind.clone() {
            TokenKind::Ident(n) => {
                self.ts.bump();
                n
            }
            _ => return Err(self.ts.unexpected("a rule name")),
        };
        self.ts.expect(&TokenKind::LBrace)?;
        let mut items = Vec::new();
        while !self.ts.at(&TokenKind::RBrace) {
            if self.ts.at_word("match") && self.ts.peek_at(1).kind == TokenKind::LBrace {
                self.ts.bump();
                self.ts.bump();
                let mut inner = Vec::new();
                while !self.ts.at(&TokenKind::RBrace) {
                    if self.at_block_keyword("match") || self.at_block_keyword("replace") {
                        return Err(self.ts.unexpected("an element or `}`"));
                    }
                    self.item(&mut inner)?;
                }
                self.ts.bump();
                items.push(RuleItem::Match(inner));
            } else if self.at_block_keyword("replace") {
                self.ts.bump();
                self.ts.bump();
                let inner = self.elements_until(&TokenKind::RBrace, Ctx::Plain)?;
                self.ts.bump();
                items.push(RuleItem::Replace(
                    inner.into_iter().map(RuleItem::Element).collect(),
                ));
            } else {
                self.item(&mut items)?;
            }
        }
        let end = self.ts.bump().span;
        Ok(Rule {
            name,
            items,
            span: start.to(end),
        })
    }

    fn at_block_keyword(&self, word: &str) -> bool {
        self.ts.at_word(word) && self.ts.peek_at(1).kind == TokenKind::LBrace
    }

    fn item(&mut self, items: &mut Vec<RuleItem>) -> Result<(), Diagnostic> {
        if self.at_block_keyword("not") {
            self.ts.bump();
            self.ts.bump();
            let body = self.elements_until(&TokenKind::RBrace, Ctx::Nac)?;
            self.ts.bump();
            items.push(RuleItem::Nac(body));
            return Ok(());
        }
        if self.ts.at_word("where") && self.ts.peek_at(1).kind != TokenKind::Minus {
            self.ts.bump();
            let mut cs = vec![self.constraint()?];
            while self.ts.eat(&TokenKind::Comma).is_some() {
                cs.push(self.constraint()?);
            }
            self.ts.expect(&TokenKind::Semi)?;
            items.push(RuleItem::Where(cs));
            return Ok(());
        }
        // a whole-element replacement can yield several elements
        let mut out = Vec::new();
        self.element(Ctx::Plain, &mut out)?;
        items.extend(out.into_iter().map(RuleItem::Element));
        Ok(())
    }

    fn constraint(&mut self) -> Result<Constraint, Diagnostic> {
        let left = self.atom("a name or variable")?;
        let op = if self.ts.eat(&TokenKind::EqEq).is_some() {
            CompareOp::Eq
        } else if self.ts.eat(&TokenKind::NotEq).is_some() {
            CompareOp::Ne
        } else {
            return Err(self.ts.unexpected("`==` or `!=`"));
        };
        let right = self.atom("a name or variable")?;
        Ok(Constraint { left, op, right })
    }

    fn elements_until(&mut self, end: &TokenKind, ctx: Ctx) -> Result<Vec<Element>, Diagnostic> {
        let mut out = Vec::new();
        while !self.ts.at(end) {
            if self.ts.at_eof() {
                return Err(self.ts.unexpected(&end.to_string()));
            }
            self.element(ctx, &mut out)?;
        }
        Ok(out)
    }

    fn nested_error(&self) -> Diagnostic {
        Diagnostic::error(
            Code::NestedRepl,
            "replacements cannot be nested",
            Some(self.ts.span_here().start),
        )
    }

    fn no_replacement_here(&self, ctx: Ctx) -> Diagnostic {
        match ctx {
            Ctx::Nac => Diagnostic::error(
                Code::BadReplacement,
                "replacements are not allowed inside `not` blocks",
                Some(self.ts.span_here().start),
            ),
            _ => self.nested_error(),
        }
    }

    fn element(&mut self, ctx: Ctx, out: &mut Vec<Element>) -> Result<(), Diagnostic> {
        let tok = self.ts.peek().clone();
        match &tok.kind {
            TokenKind::Ident(w) if w == "state" && !self.transition_ahead(0) => {
                out.push(Element::State(self.state(ctx)?));
            }
            TokenKind::Ident(w)
                if w == "Transition" && matches!(self.ts.peek_at(1).kind, TokenKind::Var(_)) =>
            {
                out.push(Element::Transition(self.id_transition(ctx)?));
            }
            TokenKind::OpenRepl if self.element_replacement_ahead() => {
                if ctx != Ctx::Plain {
                    return Err(self.no_replacement_here(ctx));
                }
                self.ts.bump();
                let mut left = self.elements_until(&TokenKind::Turnstile, Ctx::InReplacement)?;
                self.ts.bump();
                let mut right = self.elements_until(&TokenKind::CloseRepl, Ctx::InReplacement)?;
                self.ts.bump();
                self.ts.eat(&TokenKind::Semi);
                if left.is_empty() && right.is_empty() {
                    return Err(Diagnostic::error(
                        Code::BadReplacement,
                        "replacement has neither a left nor a right side",
                        Some(tok.span.start),
                    ));
                }
                left.iter_mut().for_each(|e| e.mark(true));
                right.iter_mut().for_each(|e| e.mark(false));
                out.extend(left);
                out.extend(right);
            }
            TokenKind::Ident(_) | TokenKind::Var(_) | TokenKind::OpenRepl => {
                let t = self.transition_body(ctx, None, tok.span)?;
                self.ts.expect(&TokenKind::Semi)?;
                out.push(Element::Transition(t));
            }
            _ => return Err(self.ts.unexpected("a state, a transition or `}`")),
        }
        Ok(())
    }

    fn transition_ahead(&self, offset: usize) -> bool {
        self.ts.peek_at(offset + 1).kind == TokenKind::Minus
    }

    /// After `[[`: does a whole element follow (rather than a name)?
    fn element_replacement_ahead(&self) -> bool {
        let starts_element = |i: usize| match &self.ts.peek_at(i).kind {
            TokenKind::Ident(w) if w == "state" || w == "Transition" => true,
            TokenKind::Ident(_) | TokenKind::Var(_) => self.transition_ahead(i),
            TokenKind::OpenRepl => true,
            _ => false,
        };
        match &self.ts.peek_at(1).kind {
            TokenKind::Turnstile => {
                starts_element(2) || self.ts.peek_at(2).kind == TokenKind::CloseRepl
            }
            _ => starts_element(1),
        }
    }

    fn state(&mut self, ctx: Ctx) -> Result<StatePattern, Diagnostic> {
        let start = self.ts.expect_word("state")?.span;
        let name = self.name_term(ctx, "a state name")?;
        let modifiers = if self.ts.at(&TokenKind::OpenMods) {
            self.modifiers(ctx)?
        } else {
            Vec::new()
        };
        let body = if self.ts.eat(&TokenKind::LBrace).is_some() {
            let inner = self.elements_until(&TokenKind::RBrace, ctx)?;
            self.ts.bump();
            inner
        } else {
            self.ts.expect(&TokenKind::Semi)?;
            Vec::new()
        };
        Ok(StatePattern {
            name,
            modifiers,
            body,
            deleted: false,
            created: false,
            span: start,
        })
    }

    fn modifier(&mut self) -> Result<Modifier, Diagnostic> {
        let m = match &self.ts.peek().kind {
            TokenKind::Ident(w) => Modifier::from_keyword(w),
            _ => None,
        };
        match m {
            Some(m) => {
                self.ts.bump();
                Ok(m)
            }
            None => Err(self.ts.unexpected("`initial` or `final`")),
        }
    }

    fn modifiers(&mut self, ctx: Ctx) -> Result<Vec<ModifierItem>, Diagnostic> {
        self.ts.expect(&TokenKind::OpenMods)?;
        let mut items = Vec::new();
        while self.ts.eat(&TokenKind::CloseMods).is_none() {
            if self.ts.at(&TokenKind::OpenRepl) {
                if ctx != Ctx::Plain {
                    return Err(self.no_replacement_here(ctx));
                }
                self.ts.bump();
                let mut left = Vec::new();
                while !self.ts.at(&TokenKind::Turnstile) {
                    if self.ts.at(&TokenKind::OpenRepl) {
                        return Err(self.nested_error());
                    }
                    left.push(self.modifier()?);
                }
                self.ts.bump();
                let mut right = Vec::new();
                while !self.ts.at(&TokenKind::CloseRepl) {
                    if self.ts.at(&TokenKind::OpenRepl) {
                        return Err(self.nested_error());
                    }
                    right.push(self.modifier()?);
                }
                self.ts.bump();
                items.push(ModifierItem::Replace { left, right });
            } else {
                items.push(ModifierItem::Plain(self.modifier()?));
            }
        }
        Ok(items)
    }

    fn atom(&mut self, what: &str) -> Result<Atom, Diagnostic> {
        let atom = match &self.ts.peek().kind {
            TokenKind::Ident(s) => Atom::Fixed(s.clone()),
            TokenKind::Var(s) => Atom::Var(s.clone()),
            _ => return Err(self.ts.unexpected(what)),
        };
        self.ts.bump();
        Ok(atom)
    }

    fn name_term(&mut self, ctx: Ctx, what: &str) -> Result<NameTerm, Diagnostic> {
        if !self.ts.at(&TokenKind::OpenRepl) {
            return Ok(NameTerm::Atom(self.atom(what)?));
        }
        if ctx != Ctx::Plain {
            return Err(self.no_replacement_here(ctx));
        }
        let start = self.ts.bump().span;
        let side = |p: &mut RuleParser, end: &TokenKind| -> Result<Option<Atom>, Diagnostic> {
            if p.ts.at(&TokenKind::OpenRepl) {
                return Err(p.nested_error());
            }
            if p.ts.at(end) {
                Ok(None)
            } else {
                p.atom(what).map(Some)
            }
        };
        let left = side(self, &TokenKind::Turnstile)?;
        self.ts.expect(&TokenKind::Turnstile)?;
        let right = side(self, &TokenKind::CloseRepl)?;
        self.ts.expect(&TokenKind::CloseRepl)?;
        if left.is_none() && right.is_none() {
            return Err(Diagnostic::error(
                Code::BadReplacement,
                "replacement has neither a left nor a right side",
                Some(start.start),
            ));
        }
        Ok(NameTerm::Replace { left, right })
    }

    fn transition_body(
        &mut self,
        ctx: Ctx,
        id: Option<String>,
        span: SourceSpan,
    ) -> Result<TransitionPattern, Diagnostic> {
        let source = self.name_term(ctx, "a state name")?;
        self.ts.expect(&TokenKind::Minus)?;
        let label = self.name_term(ctx, "a transition label")?;
        self.ts.expect(&TokenKind::Gt)?;
        let target = self.name_term(ctx, "a state name")?;
        Ok(TransitionPattern {
            id,
            source,
            label,
            target,
            deleted: false,
            created: false,
            span,
        })
    }

    fn id_transition(&mut self, ctx: Ctx) -> Result<TransitionPattern, Diagnostic> {
        let span = self.ts.expect_word("Transition")?.span;
        let id = match self.ts.bump().kind {
            TokenKind::Var(v) => v,
            _ => unreachable!("checked by caller"),
        };
        self.ts.expect(&TokenKind::OpenRepl)?;
        let t = self.transition_body(ctx, Some(id), span)?;
        self.ts.eat(&TokenKind::Semi);
        self.ts.expect(&TokenKind::CloseRepl)?;
        self.ts.eat(&TokenKind::Semi);
        Ok(t)
    }
}
