//! The textual pattern language: parsing, validation, rendering and
//! normalization into per-branch [`ChainPattern`]s.
//!
//! ```text
//! PATTERN SEQ(A a, B+ b[], C c)
//! WHERE skip_till_any_match { AVG(b[i].x) < c.y }
//! WITHIN 1 hour
//! ```

mod dnf;
pub mod expr;
mod lexer;
mod parser;
mod render;

use std::collections::{BTreeMap, BTreeSet};

use crate::error::PatternError;
use crate::event::{EventType, Window};
use crate::scalar::Scalar;

pub use dnf::to_dnf;
pub use expr::{ArithOp, Bound, CmpOp, Env, Expr, Index};
pub use parser::parse_duration;
pub use render::{render_chains, render_pattern};

/// A typed, named pattern element such as `A a`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Leaf {
    pub etype: EventType,
    pub role: String,
}

impl Leaf {
    pub fn new(etype: &str, role: &str) -> Self {
        Leaf {
            etype: EventType::from(etype),
            role: role.to_string(),
        }
    }
}

/// Operator tree of the PATTERN clause.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Seq(Vec<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
    Not(Leaf),
    /// `B+ b[]`
    Kleene(Leaf),
    /// `B{min,max} b[]`
    Repeat { leaf: Leaf, min: usize, max: usize },
    Leaf(Leaf),
}

impl Node {
    pub fn leaves(&self) -> Vec<&Leaf> {
        let mut out = Vec::new();
        self.walk_leaves(&mut |l, _| out.push(l));
        out
    }

    /// Calls `f(leaf, is_iterated)` for every leaf, negated ones included.
    fn walk_leaves<'a>(&'a self, f: &mut impl FnMut(&'a Leaf, bool)) {
        match self {
            Node::Seq(xs) | Node::And(xs) | Node::Or(xs) => {
                xs.iter().for_each(|x| x.walk_leaves(f))
            }
            Node::Not(l) | Node::Leaf(l) => f(l, false),
            Node::Kleene(l) | Node::Repeat { leaf: l, .. } => f(l, true),
        }
    }
}

/// A parsed and validated pattern. The selection strategy is always
/// skip-till-any-match.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternAst<S = f64> {
    pub root: Node,
    pub predicate: Option<Expr<S>>,
    pub window: Window,
    /// Iterated role -> attribute whose value partitions its subsets.
    pub group_by: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Iteration {
    pub min: usize,
    /// `None` is unbounded (Kleene plus).
    pub max: Option<usize>,
    pub group_by: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositiveRole {
    pub role: String,
    pub etype: EventType,
    pub iteration: Option<Iteration>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NegatedRole<S = f64> {
    pub role: String,
    pub etype: EventType,
    /// Conjuncts that mention this negated role.
    pub atoms: Vec<Expr<S>>,
}

/// One disjunct of a pattern's normal form: a conjunction of positive roles
/// with a strict partial order, negations, at most one iteration in practice,
/// a conjunction of predicate atoms and the window.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainPattern<S = f64> {
    /// OR-free operator tree this branch came from.
    pub shape: Node,
    pub positives: Vec<PositiveRole>,
    pub negations: Vec<NegatedRole<S>>,
    /// Transitively closed `(before, after)` role pairs. Pairs between two
    /// negated roles are not recorded.
    pub temporal: BTreeSet<(String, String)>,
    /// Conjuncts over positive roles only.
    pub atoms: Vec<Expr<S>>,
    pub window: Window,
}

impl<S: Scalar> ChainPattern<S> {
    pub fn before(&self, u: &str, v: &str) -> bool {
        self.temporal.contains(&(u.to_string(), v.to_string()))
    }

    /// Positive roles that must precede `role`.
    pub fn preds(&self, role: &str) -> Vec<&str> {
        self.positives
            .iter()
            .map(|p| p.role.as_str())
            .filter(|u| self.before(u, role))
            .collect()
    }

    /// Positive roles that must follow `role`.
    pub fn succs(&self, role: &str) -> Vec<&str> {
        self.positives
            .iter()
            .map(|p| p.role.as_str())
            .filter(|v| self.before(role, v))
            .collect()
    }

    pub fn positive(&self, role: &str) -> Option<&PositiveRole> {
        self.positives.iter().find(|p| p.role == role)
    }

    pub fn iterated(&self) -> Vec<&PositiveRole> {
        self.positives
            .iter()
            .filter(|p| p.iteration.is_some())
            .collect()
    }

    pub fn positive_types(&self) -> Vec<EventType> {
        self.positives.iter().map(|p| p.etype.clone()).collect()
    }

    pub fn all_types(&self) -> Vec<EventType> {
        self.positives
            .iter()
            .map(|p| p.etype.clone())
            .chain(self.negations.iter().map(|n| n.etype.clone()))
            .collect()
    }

    pub fn role_of_type(&self, t: &EventType) -> Option<&str> {
        self.positives
            .iter()
            .find(|p| &p.etype == t)
            .map(|p| p.role.as_str())
    }

    /// True when the temporal order is total on the positive roles.
    pub fn is_full_sequence(&self) -> bool {
        let ps = &self.positives;
        ps.iter().enumerate().all(|(i, a)| {
            ps[i + 1..]
                .iter()
                .all(|b| self.before(&a.role, &b.role) || self.before(&b.role, &a.role))
        })
    }

    /// True when no temporal constraint relates two positive roles.
    pub fn is_conjunction(&self) -> bool {
        self.positives.iter().all(|p| self.preds(&p.role).is_empty())
    }

    /// Positive roles sorted by name; the canonical identity of a branch.
    pub fn sorted_roles(&self) -> Vec<String> {
        let mut roles: Vec<String> = self
            .positives
            .iter()
            .map(|p| p.role.clone())
            .chain(self.negations.iter().map(|n| n.role.clone()))
            .collect();
        roles.sort();
        roles
    }
}

/// Parses and validates pattern text.
pub fn parse_pattern<S: Scalar>(text: &str) -> Result<PatternAst<S>, PatternError> {
    let ast = parser::Parser::new(text)?.parse_pattern()?;
    validate(&ast)?;
    Ok(ast)
}

fn validate<S: Scalar>(ast: &PatternAst<S>) -> Result<(), PatternError> {
    let mut types: BTreeMap<&str, (&EventType, bool)> = BTreeMap::new();
    let mut err = None;
    ast.root.walk_leaves(&mut |leaf, iterated| {
        if err.is_some() {
            return;
        }
        match types.get(leaf.role.as_str()) {
            Some((t, _)) if **t != leaf.etype => {
                err = Some(PatternError::RoleTypeConflict {
                    role: leaf.role.clone(),
                    first: (*t).clone(),
                    second: leaf.etype.clone(),
                })
            }
            Some((_, it)) if *it != iterated => {
                err = Some(PatternError::DuplicateRole(leaf.role.clone()))
            }
            _ => {
                types.insert(&leaf.role, (&leaf.etype, iterated));
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    check_repeats(&ast.root)?;

    if let Some(pred) = &ast.predicate {
        let mut err = None;
        pred.visit(&mut |e| {
            if err.is_some() {
                return;
            }
            let (role, iterated_ref, is_agg) = match e {
                Expr::Attr { role, index, .. } => (role, *index != Index::Plain, false),
                Expr::Agg { role, .. } => (role, true, true),
                _ => return,
            };
            err = match types.get(role.as_str()) {
                None => Some(PatternError::UnknownRole(role.clone())),
                Some((_, false)) if is_agg => {
                    Some(PatternError::AggregateOverNonIterated(role.clone()))
                }
                Some((_, false)) if iterated_ref => {
                    Some(PatternError::IndexedRefOnNonIterated(role.clone()))
                }
                Some((_, true)) if !iterated_ref => {
                    Some(PatternError::BareIteratedRef(role.clone()))
                }
                _ => None,
            };
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    for role in ast.group_by.keys() {
        match types.get(role.as_str()) {
            Some((_, true)) => {}
            Some(_) => return Err(PatternError::GroupByNotIterated(role.clone())),
            None => return Err(PatternError::UnknownRole(role.clone())),
        }
    }
    // Branch-level checks (NOT placement, duplicates, negation atoms).
    to_dnf(ast).map(|_| ())
}

fn check_repeats(node: &Node) -> Result<(), PatternError> {
    match node {
        Node::Repeat { min, max, .. } if *min < 1 || min > max => Err(PatternError::RepeatBounds {
            l: *min,
            m: *max,
        }),
        Node::Seq(xs) | Node::And(xs) | Node::Or(xs) => xs.iter().try_for_each(check_repeats),
        _ => Ok(()),
    }
}
