use std::collections::BTreeSet;

use super::expr::Expr;
use super::{ChainPattern, Iteration, NegatedRole, Node, PatternAst, PositiveRole};
use crate::error::PatternError;
use crate::scalar::Scalar;

/// Distributes OR over SEQ/AND so every branch is OR-free. Branches come back
/// sorted by their role sets.
fn expand(node: &Node, allow_not: bool) -> Result<Vec<Node>, PatternError> {
    match node {
        Node::Not(_) if !allow_not => Err(PatternError::NegationPlacement),
        Node::Not(_) | Node::Leaf(_) | Node::Kleene(_) | Node::Repeat { .. } => {
            Ok(vec![node.clone()])
        }
        Node::Or(kids) => {
            let mut out = Vec::new();
            for k in kids {
                out.extend(expand(k, false)?);
            }
            Ok(out)
        }
        Node::Seq(kids) | Node::And(kids) => {
            let mut acc: Vec<Vec<Node>> = vec![Vec::new()];
            for k in kids {
                let options = expand(k, true)?;
                acc = acc
                    .into_iter()
                    .flat_map(|prefix| {
                        options.iter().map(move |o| {
                            let mut p = prefix.clone();
                            p.push(o.clone());
                            p
                        })
                    })
                    .collect();
            }
            let seq = matches!(node, Node::Seq(_));
            Ok(acc
                .into_iter()
                .map(|kids| if seq { Node::Seq(kids) } else { Node::And(kids) })
                .collect())
        }
    }
}

fn roles_of(node: &Node) -> Vec<String> {
    node.leaves().into_iter().map(|l| l.role.clone()).collect()
}

fn temporal_pairs(node: &Node, negated: &BTreeSet<String>, out: &mut BTreeSet<(String, String)>) {
    match node {
        Node::Seq(kids) => {
            for (i, a) in kids.iter().enumerate() {
                for b in &kids[i + 1..] {
                    for x in roles_of(a) {
                        for y in roles_of(b) {
                            if !(negated.contains(&x) && negated.contains(&y)) {
                                out.insert((x.clone(), y));
                            }
                        }
                    }
                }
            }
            kids.iter().for_each(|k| temporal_pairs(k, negated, out));
        }
        Node::And(kids) | Node::Or(kids) => {
            kids.iter().for_each(|k| temporal_pairs(k, negated, out))
        }
        _ => {}
    }
}

fn build_chain<S: Scalar>(
    shape: Node,
    atoms: &[Expr<S>],
    ast: &PatternAst<S>,
) -> Result<ChainPattern<S>, PatternError> {
    let mut positives = Vec::new();
    let mut negations: Vec<NegatedRole<S>> = Vec::new();
    let mut seen_roles = BTreeSet::new();
    let mut seen_types = BTreeSet::new();
    collect(&shape, &mut |node| {
        let leaf = match node {
            Node::Not(l) | Node::Leaf(l) | Node::Kleene(l) | Node::Repeat { leaf: l, .. } => l,
            _ => return Ok(()),
        };
        if !seen_roles.insert(leaf.role.clone()) {
            return Err(PatternError::DuplicateRole(leaf.role.clone()));
        }
        if !seen_types.insert(leaf.etype.clone()) {
            return Err(PatternError::DuplicateType(leaf.etype.clone()));
        }
        let group_by = || ast.group_by.get(&leaf.role).cloned();
        let iteration = match node {
            Node::Kleene(_) => Some(Iteration {
                min: 1,
                max: None,
                group_by: group_by(),
            }),
            Node::Repeat { min, max, .. } => Some(Iteration {
                min: *min,
                max: Some(*max),
                group_by: group_by(),
            }),
            _ => None,
        };
        if matches!(node, Node::Not(_)) {
            negations.push(NegatedRole {
                role: leaf.role.clone(),
                etype: leaf.etype.clone(),
                atoms: Vec::new(),
            });
        } else {
            positives.push(PositiveRole {
                role: leaf.role.clone(),
                etype: leaf.etype.clone(),
                iteration,
            });
        }
        Ok(())
    })?;
    if positives.is_empty() {
        return Err(PatternError::NoPositive);
    }

    let negated: BTreeSet<String> = negations.iter().map(|n| n.role.clone()).collect();
    let mut temporal = BTreeSet::new();
    temporal_pairs(&shape, &negated, &mut temporal);

    let mut pos_atoms = Vec::new();
    for atom in atoms {
        let roles = atom.roles();
        if !roles.is_subset(&seen_roles) {
            continue;
        }
        let negs: Vec<&String> = roles.iter().filter(|r| negated.contains(*r)).collect();
        match negs.as_slice() {
            [] => pos_atoms.push(atom.clone()),
            [n] => negations
                .iter_mut()
                .find(|x| &&x.role == n)
                .expect("negated role present")
                .atoms
                .push(atom.clone()),
            [a, b, ..] => return Err(PatternError::MultiNegationAtom((*a).clone(), (*b).clone())),
        }
    }

    Ok(ChainPattern {
        shape,
        positives,
        negations,
        temporal,
        atoms: pos_atoms,
        window: ast.window,
    })
}

fn collect(
    node: &Node,
    f: &mut impl FnMut(&Node) -> Result<(), PatternError>,
) -> Result<(), PatternError> {
    match node {
        Node::Seq(kids) | Node::And(kids) | Node::Or(kids) => {
            kids.iter().try_for_each(|k| collect(k, f))
        }
        leaf => f(leaf),
    }
}

/// Normalizes a pattern into OR-free branches. Predicate conjuncts that name a
/// role missing from a branch are dropped for that branch.
pub fn to_dnf<S: Scalar>(ast: &PatternAst<S>) -> Result<Vec<ChainPattern<S>>, PatternError> {
    let atoms = ast.predicate.clone().map(Expr::conjuncts).unwrap_or_default();
    let mut keyed = Vec::new();
    for shape in expand(&ast.root, false)? {
        let chain = build_chain(shape, &atoms, ast)?;
        keyed.push((chain.sorted_roles(), chain));
    }
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(keyed.into_iter().map(|(_, c)| c).collect())
}
