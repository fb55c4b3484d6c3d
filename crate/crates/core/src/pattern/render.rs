use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use super::expr::Expr;
use super::{ChainPattern, Node, PatternAst};
use crate::scalar::Scalar;

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Seq(xs) | Node::And(xs) | Node::Or(xs) => {
                let op = match self {
                    Node::Seq(_) => "SEQ",
                    Node::And(_) => "AND",
                    _ => "OR",
                };
                write!(f, "{op}(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
            Node::Not(l) => write!(f, "NOT({} {})", l.etype, l.role),
            Node::Kleene(l) => write!(f, "{}+ {}[]", l.etype, l.role),
            Node::Repeat { leaf, min, max } => {
                write!(f, "{}{{{min},{max}}} {}[]", leaf.etype, leaf.role)
            }
            Node::Leaf(l) => write!(f, "{} {}", l.etype, l.role),
        }
    }
}

/// Renders a pattern as text that parses back to an equal tree.
pub fn render_pattern<S: Scalar>(ast: &PatternAst<S>) -> String {
    let mut out = format!("PATTERN {}\n", ast.root);
    if let Some(p) = &ast.predicate {
        let _ = writeln!(out, "WHERE skip_till_any_match {{ {p} }}");
    }
    let _ = write!(out, "WITHIN {} msec", ast.window.millis());
    if !ast.group_by.is_empty() {
        let keys: Vec<String> = ast
            .group_by
            .iter()
            .map(|(r, a)| format!("{r}.{a}"))
            .collect();
        let _ = write!(out, "\nGROUPBY {}", keys.join(", "));
    }
    out.push('\n');
    out
}

/// Reassembles normalized branches into one pattern: an OR of the branch
/// shapes with the union of their predicate conjuncts.
pub fn chains_to_ast<S: Scalar>(chains: &[ChainPattern<S>]) -> Option<PatternAst<S>> {
    let first = chains.first()?;
    let root = if chains.len() == 1 {
        first.shape.clone()
    } else {
        Node::Or(chains.iter().map(|c| c.shape.clone()).collect())
    };
    let mut atoms: Vec<Expr<S>> = Vec::new();
    let mut group_by = BTreeMap::new();
    for c in chains {
        let all = c.atoms.iter().chain(c.negations.iter().flat_map(|n| &n.atoms));
        for a in all {
            if !atoms.contains(a) {
                atoms.push(a.clone());
            }
        }
        for p in &c.positives {
            if let Some(g) = p.iteration.as_ref().and_then(|it| it.group_by.clone()) {
                group_by.insert(p.role.clone(), g);
            }
        }
    }
    let predicate = match atoms.len() {
        0 => None,
        1 => atoms.pop(),
        _ => Some(Expr::And(atoms)),
    };
    Some(PatternAst {
        root,
        predicate,
        window: first.window,
        group_by,
    })
}

/// Text form of a normalized pattern.
pub fn render_chains<S: Scalar>(chains: &[ChainPattern<S>]) -> String {
    chains_to_ast(chains).map(|a| render_pattern(&a)).unwrap_or_default()
}
