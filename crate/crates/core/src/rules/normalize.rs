//! Normalization of parsed rules into LHS/RHS patterns plus a correspondence.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::diagnostic::{Code, Diagnostic, Location};
use crate::model::{Modifier, Modifiers};
use crate::syntax::modifier_suffix;

use super::ast::*;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatState {
    pub name: Atom,
    pub modifiers: Modifiers,
    /// Index of the enclosing pattern state, if any.
    pub parent: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PatTransition {
    pub id: Option<String>,
    pub source: Atom,
    pub label: Atom,
    pub target: Atom,
}

impl PatTransition {
    fn same_shape(&self, other: &PatTransition) -> bool {
        self.source == other.source && self.label == other.label && self.target == other.target
    }
}

impl fmt::Display for PatTransition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.id {
            Some(id) => write!(
                f,
                "Transition {id} [[ {} -{}> {}; ]]",
                self.source, self.label, self.target
            ),
            None => write!(f, "{} -{}> {};", self.source, self.label, self.target),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElemRef {
    State(usize),
    Transition(usize),
}

/// A replacement-free pattern: states in pre-order with parent links, plus
/// transitions. `order` lists every element in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Pattern {
    pub states: Vec<PatState>,
    pub transitions: Vec<PatTransition>,
    pub order: Vec<ElemRef>,
}

impl Pattern {
    pub fn is_empty(&self) -> bool {
        self.states.is_empty() && self.transitions.is_empty()
    }

    pub fn children(&self, parent: Option<usize>) -> impl Iterator<Item = usize> + '_ {
        self.states
            .iter()
            .enumerate()
            .filter(move |(_, s)| s.parent == parent)
            .map(|(i, _)| i)
    }

    /// Schema variables at name and label positions (object ids excluded).
    pub fn variables(&self) -> BTreeSet<&str> {
        let states = self.states.iter().filter_map(|s| s.name.var());
        let trans = self
            .transitions
            .iter()
            .flat_map(|t| [&t.source, &t.label, &t.target])
            .filter_map(Atom::var);
        states.chain(trans).collect()
    }

    fn push_state(&mut self, s: PatState) -> usize {
        self.states.push(s);
        let i = self.states.len() - 1;
        self.order.push(ElemRef::State(i));
        i
    }

    fn push_transition(&mut self, t: PatTransition) -> usize {
        self.transitions.push(t);
        let i = self.transitions.len() - 1;
        self.order.push(ElemRef::Transition(i));
        i
    }

    fn write_state(&self, f: &mut fmt::Formatter<'_>, i: usize, level: usize) -> fmt::Result {
        let s = &self.states[i];
        let pad = "  ".repeat(level);
        write!(f, "{pad}state {}{}", s.name, modifier_suffix(s.modifiers))?;
        let kids: Vec<usize> = self.children(Some(i)).collect();
        if kids.is_empty() {
            writeln!(f, ";")
        } else {
            writeln!(f, " {{")?;
            for k in kids {
                self.write_state(f, k, level + 1)?;
            }
            writeln!(f, "{pad}}}")
        }
    }
}

/// Renders the pattern in concrete rule syntax (without a `rule` wrapper).
impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in self.children(None).collect::<Vec<_>>() {
            self.write_state(f, i, 0)?;
        }
        for t in &self.transitions {
            writeln!(f, "{t}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedRule {
    pub name: String,
    pub lhs: Pattern,
    pub rhs: Pattern,
    /// Pairs of corresponding (lhs, rhs) elements, in LHS order.
    pub correspondence: Vec<(ElemRef, ElemRef)>,
    pub nacs: Vec<Pattern>,
    pub constraints: Vec<Constraint>,
}

impl NormalizedRule {
    pub fn rhs_for(&self, lhs: ElemRef) -> Option<ElemRef> {
        self.correspondence
            .iter()
            .find(|(l, _)| *l == lhs)
            .map(|(_, r)| *r)
    }

    pub fn lhs_for(&self, rhs: ElemRef) -> Option<ElemRef> {
        self.correspondence
            .iter()
            .find(|(_, r)| *r == rhs)
            .map(|(l, _)| *l)
    }

    /// Copy with transition object ids removed. Two notations of the same
    /// rule agree up to these labels.
    pub fn without_object_ids(&self) -> NormalizedRule {
        let mut r = self.clone();
        for p in std::iter::once(&mut r.lhs)
            .chain(std::iter::once(&mut r.rhs))
            .chain(r.nacs.iter_mut())
        {
            for t in &mut p.transitions {
                t.id = None;
            }
        }
        r
    }

    /// True if the rule leaves every matched element unchanged.
    pub fn is_identity(&self) -> bool {
        self.lhs == self.rhs
            && self.correspondence.len() == self.lhs.order.len()
            && self.correspondence.iter().all(|(l, r)| l == r)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("variable {var} is used on the right-hand side but never bound on the left")]
    UnboundRhsVar { var: String, at: Option<Location> },
    #[error("variable {var} in a where-constraint is never bound on the left")]
    UnboundConstraintVar { var: String },
    #[error("cannot decide which elements correspond: {detail}")]
    AmbiguousCorrespondence {
        detail: String,
        at: Option<Location>,
    },
    #[error("{detail}")]
    BadReplacement {
        detail: String,
        at: Option<Location>,
    },
}

impl NormalizeError {
    pub fn code(&self) -> Code {
        match self {
            NormalizeError::UnboundRhsVar { .. } | NormalizeError::UnboundConstraintVar { .. } => {
                Code::UnboundRhsVar
            }
            NormalizeError::AmbiguousCorrespondence { .. } => Code::AmbiguousCorrespondence,
            NormalizeError::BadReplacement { .. } => Code::BadReplacement,
        }
    }

    pub fn to_diagnostic(&self) -> Diagnostic {
        let at = match self {
            NormalizeError::UnboundRhsVar { at, .. }
            | NormalizeError::AmbiguousCorrespondence { at, .. }
            | NormalizeError::BadReplacement { at, .. } => *at,
            NormalizeError::UnboundConstraintVar { .. } => None,
        };
        Diagnostic::error(self.code(), self.to_string(), at)
    }
}

pub fn normalize_rule(rule: &Rule) -> Result<NormalizedRule, NormalizeError> {
    let mut out = NormalizedRule {
        name: rule.name.clone(),
        lhs: Pattern::default(),
        rhs: Pattern::default(),
        correspondence: Vec::new(),
        nacs: Vec::new(),
        constraints: Vec::new(),
    };
    let mut rhs_spans = Vec::new();
    if rule.is_separated() {
        for item in &rule.items {
            match item {
                RuleItem::Match(inner) => {
                    let mut lhs_spans = Vec::new();
                    for i in inner {
                        match i {
                            RuleItem::Element(e) => {
                                plain_element(e, None, &mut out.lhs, &mut lhs_spans)
                            }
                            other => side_item(other, &mut out),
                        }
                    }
                }
                RuleItem::Replace(inner) => {
                    for i in inner {
                        if let RuleItem::Element(e) = i {
                            plain_element(e, None, &mut out.rhs, &mut rhs_spans);
                        }
                    }
                }
                other => side_item(other, &mut out),
            }
        }
        out.correspondence = correspond_separated(&out.lhs, &out.rhs, &rhs_spans)?;
    } else {
        let mut w = Integrated {
            rule: &mut out,
            rhs_spans: &mut rhs_spans,
        };
        for item in &rule.items {
            match item {
                RuleItem::Element(e) => w.element(e, Some(None), Some(None))?,
                other => side_item(other, w.rule),
            }
        }
    }
    check_bound(&out, &rhs_spans)?;
    Ok(out)
}

fn side_item(item: &RuleItem, out: &mut NormalizedRule) {
    match item {
        RuleItem::Nac(elems) => {
            let mut p = Pattern::default();
            let mut spans = Vec::new();
            for e in elems {
                plain_element(e, None, &mut p, &mut spans);
            }
            out.nacs.push(p);
        }
        RuleItem::Where(cs) => out.constraints.extend(cs.iter().cloned()),
        RuleItem::Element(_) | RuleItem::Match(_) | RuleItem::Replace(_) => {}
    }
}

fn modifier_sides(items: &[ModifierItem]) -> (Modifiers, Modifiers) {
    let mut left = Modifiers::NONE;
    let mut right = Modifiers::NONE;
    for item in items {
        match item {
            ModifierItem::Plain(m) => {
                left.insert(*m);
                right.insert(*m);
            }
            ModifierItem::Replace { left: l, right: r } => {
                l.iter().for_each(|m| {
                    left.insert(*m);
                });
                r.iter().for_each(|m| {
                    right.insert(*m);
                });
            }
        }
    }
    (left, right)
}

fn required(term: Option<&Atom>) -> Atom {
    term.cloned().expect("replacement-free element")
}

/// Adds a replacement-free element (match, replace and NAC blocks).
fn plain_element(e: &Element, parent: Option<usize>, p: &mut Pattern, spans: &mut Vec<Location>) {
    match e {
        Element::State(s) => {
            let (mods, _) = modifier_sides(&s.modifiers);
            let i = p.push_state(PatState {
                name: required(s.name.left()),
                modifiers: mods,
                parent,
            });
            spans.push(s.span.start);
            for c in &s.body {
                plain_element(c, Some(i), p, spans);
            }
        }
        Element::Transition(t) => {
            p.push_transition(PatTransition {
                id: t.id.clone(),
                source: required(t.source.left()),
                label: required(t.label.left()),
                target: required(t.target.left()),
            });
            spans.push(t.span.start);
        }
    }
}

struct Integrated<'a> {
    rule: &'a mut NormalizedRule,
    rhs_spans: &'a mut Vec<Location>,
}

/// `None` = the enclosing state is absent on that side;
/// `Some(parent)` = present, with `parent` as the containing pattern state.
type SideParent = Option<Option<usize>>;

impl Integrated<'_> {
    fn element(
        &mut self,
        e: &Element,
        lp: SideParent,
        rp: SideParent,
    ) -> Result<(), NormalizeError> {
        let at = Some(e.span().start);
        match e {
            Element::State(s) => {
                let on_left = !s.created && s.name.left().is_some();
                let on_right = !s.deleted && s.name.right().is_some();
                if (on_left && lp.is_none()) || (on_right && rp.is_none()) {
                    return Err(NormalizeError::BadReplacement {
                        detail: "element is kept on a side where its enclosing state is removed"
                            .into(),
                        at,
                    });
                }
                if !on_left && !on_right {
                    return Err(NormalizeError::BadReplacement {
                        detail: "state is absent from both sides of the rule".into(),
                        at,
                    });
                }
                let (lm, rm) = modifier_sides(&s.modifiers);
                let li = on_left.then(|| {
                    self.rule.lhs.push_state(PatState {
                        name: required(s.name.left()),
                        modifiers: lm,
                        parent: lp.flatten(),
                    })
                });
                let ri = on_right.then(|| {
                    self.rhs_spans.push(s.span.start);
                    self.rule.rhs.push_state(PatState {
                        name: required(s.name.right()),
                        modifiers: rm,
                        parent: rp.flatten(),
                    })
                });
                if let (Some(l), Some(r)) = (li, ri) {
                    self.rule
                        .correspondence
                        .push((ElemRef::State(l), ElemRef::State(r)));
                }
                for c in &s.body {
                    self.element(c, li.map(Some), ri.map(Some))?;
                }
            }
            Element::Transition(t) => {
                let fields = [&t.source, &t.label, &t.target];
                let left: Option<Vec<Atom>> = (!t.created)
                    .then(|| fields.iter().map(|f| f.left().cloned()).collect())
                    .flatten();
                let right: Option<Vec<Atom>> = (!t.deleted)
                    .then(|| fields.iter().map(|f| f.right().cloned()).collect())
                    .flatten();
                let build = |mut v: Vec<Atom>| {
                    let target = v.pop().unwrap();
                    let label = v.pop().unwrap();
                    let source = v.pop().unwrap();
                    PatTransition {
                        id: t.id.clone(),
                        source,
                        label,
                        target,
                    }
                };
                let li = left.map(|v| self.rule.lhs.push_transition(build(v)));
                let ri = right.map(|v| {
                    self.rhs_spans.push(t.span.start);
                    self.rule.rhs.push_transition(build(v))
                });
                match (li, ri) {
                    (Some(l), Some(r)) => self
                        .rule
                        .correspondence
                        .push((ElemRef::Transition(l), ElemRef::Transition(r))),
                    (None, None) => {
                        return Err(NormalizeError::BadReplacement {
                            detail: "transition is incomplete on both sides of the rule".into(),
                            at,
                        })
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

fn correspond_separated(
    lhs: &Pattern,
    rhs: &Pattern,
    rhs_spans: &[Location],
) -> Result<Vec<(ElemRef, ElemRef)>, NormalizeError> {
    let rhs_at = |r: ElemRef| {
        rhs.order
            .iter()
            .position(|x| *x == r)
            .and_then(|i| rhs_spans.get(i).copied())
    };
    let mut pairs = Vec::new();

    let mut lhs_names: HashMap<&Atom, Vec<usize>> = HashMap::new();
    for (i, s) in lhs.states.iter().enumerate() {
        lhs_names.entry(&s.name).or_default().push(i);
    }
    let mut rhs_names: HashMap<&Atom, Vec<usize>> = HashMap::new();
    for (i, s) in rhs.states.iter().enumerate() {
        rhs_names.entry(&s.name).or_default().push(i);
    }
    let mut state_pairs: HashMap<usize, usize> = HashMap::new();
    for (li, s) in lhs.states.iter().enumerate() {
        let Some(rs) = rhs_names.get(&s.name) else {
            continue;
        };
        if rs.len() > 1 || lhs_names[&s.name].len() > 1 {
            return Err(NormalizeError::AmbiguousCorrespondence {
                detail: format!("state {} occurs more than once", s.name),
                at: rhs_at(ElemRef::State(rs[0])),
            });
        }
        state_pairs.insert(li, rs[0]);
    }
    for (&l, &r) in &state_pairs {
        let lp = lhs.states[l].parent;
        let rp = rhs.states[r].parent;
        let same_parent = match (lp, rp) {
            (None, None) => true,
            (Some(a), Some(b)) => state_pairs.get(&a) == Some(&b),
            _ => false,
        };
        if !same_parent {
            return Err(NormalizeError::BadReplacement {
                detail: format!("state {} moves to a different parent", lhs.states[l].name),
                at: rhs_at(ElemRef::State(r)),
            });
        }
    }

    let mut trans_pairs: Vec<(usize, usize)> = Vec::new();
    for (li, t) in lhs.transitions.iter().enumerate() {
        let candidates: Vec<usize> = match &t.id {
            Some(id) => {
                let same_id = |p: &Pattern| {
                    p.transitions
                        .iter()
                        .enumerate()
                        .filter(|(_, u)| u.id.as_deref() == Some(id))
                        .map(|(i, _)| i)
                        .collect::<Vec<_>>()
                };
                let on_left = same_id(lhs).len();
                let found = same_id(rhs);
                if on_left > 1 || found.len() > 1 {
                    return Err(NormalizeError::AmbiguousCorrespondence {
                        detail: format!("object id {id} is used more than once"),
                        at: found.first().and_then(|&r| rhs_at(ElemRef::Transition(r))),
                    });
                }
                found
            }
            None => {
                let twins = lhs
                    .transitions
                    .iter()
                    .filter(|u| u.id.is_none() && u.same_shape(t))
                    .count();
                let found: Vec<usize> = rhs
                    .transitions
                    .iter()
                    .enumerate()
                    .filter(|(_, u)| u.id.is_none() && u.same_shape(t))
                    .map(|(i, _)| i)
                    .collect();
                if !found.is_empty() && (found.len() > 1 || twins > 1) {
                    return Err(NormalizeError::AmbiguousCorrespondence {
                        detail: format!(
                            "unnamed transition {} -{}> {} has several equal counterparts",
                            t.source, t.label, t.target
                        ),
                        at: rhs_at(ElemRef::Transition(found[0])),
                    });
                }
                found
            }
        };
        if let Some(&ri) = candidates.first() {
            trans_pairs.push((li, ri));
        }
    }

    for r in &lhs.order {
        let pair = match *r {
            ElemRef::State(l) => state_pairs.get(&l).map(|&r| ElemRef::State(r)),
            ElemRef::Transition(l) => trans_pairs
                .iter()
                .find(|(x, _)| *x == l)
                .map(|(_, r)| ElemRef::Transition(*r)),
        };
        if let Some(p) = pair {
            pairs.push((*r, p));
        }
    }
    Ok(pairs)
}

fn check_bound(rule: &NormalizedRule, rhs_spans: &[Location]) -> Result<(), NormalizeError> {
    let bound = rule.lhs.variables();
    for (pos, r) in rule.rhs.order.iter().enumerate() {
        let atoms: Vec<&Atom> = match *r {
            ElemRef::State(i) => vec![&rule.rhs.states[i].name],
            ElemRef::Transition(i) => {
                let t = &rule.rhs.transitions[i];
                vec![&t.source, &t.label, &t.target]
            }
        };
        for a in atoms {
            if let Some(v) = a.var() {
                if !bound.contains(v) {
                    return Err(NormalizeError::UnboundRhsVar {
                        var: v.to_string(),
                        at: rhs_spans.get(pos).copied(),
                    });
                }
            }
        }
    }
    let ids: BTreeSet<&str> = rule
        .lhs
        .transitions
        .iter()
        .filter_map(|t| t.id.as_deref())
        .collect();
    for c in &rule.constraints {
        for a in [&c.left, &c.right] {
            if let Some(v) = a.var() {
                if !bound.contains(v) && !ids.contains(v) {
                    return Err(NormalizeError::UnboundConstraintVar { var: v.to_string() });
                }
            }
        }
    }
    Ok(())
}

/// Modifiers removed (`.0`) and added (`.1`) between corresponding states.
pub fn modifier_delta(lhs: Modifiers, rhs: Modifiers) -> (Vec<Modifier>, Vec<Modifier>) {
    let removed = lhs.iter().filter(|m| !rhs.contains(*m)).collect();
    let added = rhs.iter().filter(|m| !lhs.contains(*m)).collect();
    (removed, added)
}
