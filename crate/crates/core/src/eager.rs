//! Eager automaton: one state per downward-closed set of bound positive
//! roles; every event is processed as it arrives.

use std::collections::BTreeMap;

use crate::build::ChainRoles;
use crate::error::BuildError;
use crate::nfa::{Condition, EdgeKind, Nfa, RoleId, StateId, StateKind};
use crate::pattern::ChainPattern;
use crate::scalar::Scalar;

const MAX_POSITIVES: usize = 16;

/// Builds the eager automaton for one branch.
pub fn build_eager<S: Scalar>(chain: &ChainPattern<S>) -> Result<Nfa<S>, BuildError> {
    let mut cr = ChainRoles::new(chain);
    let n = cr.pos.len();
    if n > MAX_POSITIVES {
        return Err(BuildError::Unsupported(format!(
            "eager construction is limited to {MAX_POSITIVES} positive roles, got {n}"
        )));
    }
    let pos = cr.pos.clone();
    let bit = |i: usize| 1u32 << i;
    let pred_mask: Vec<u32> = (0..n)
        .map(|i| (0..n).filter(|&j| cr.before(pos[j], pos[i])).map(bit).sum())
        .collect();
    let succ_mask: Vec<u32> = (0..n)
        .map(|i| (0..n).filter(|&j| cr.before(pos[i], pos[j])).map(bit).sum())
        .collect();
    let roles_of = |mask: u32| -> Vec<RoleId> {
        (0..n).filter(|&i| mask & bit(i) != 0).map(|i| pos[i]).collect()
    };
    let full = (1u32 << n) - 1;
    let iterated: Vec<bool> = (0..cr.nfa.roles.len()).map(|r| cr.is_iterated(r)).collect();
    let deferred = |rs: &std::collections::BTreeSet<RoleId>| {
        rs.is_empty() || rs.iter().any(|&r| iterated[r])
    };

    cr.nfa.states[cr.nfa.initial].name = "{}".into();
    let grows = |mask: u32, i: usize| {
        mask & bit(i) != 0 && iterated[pos[i]] && succ_mask[i] & mask == 0
    };
    let grows_at_full = (0..n).any(|i| grows(full, i));
    let negs = cr.neg.clone();
    let entry = cr.negation_block(&negs);
    let final_atoms: Vec<_> = cr
        .atoms
        .iter()
        .filter(|(_, rs)| deferred(rs))
        .map(|(a, _)| a.clone())
        .collect();
    let sizes: Vec<RoleId> = pos.iter().copied().filter(|&r| iterated[r]).collect();

    // The full set of roles is the final state, unless an iterated role can
    // still grow there; then it gets a state of its own that copies every
    // instance towards the final state.
    let mut ids: BTreeMap<u32, StateId> = BTreeMap::new();
    ids.insert(0, cr.nfa.initial);
    if grows_at_full {
        let names: Vec<&str> = pos.iter().map(|&r| cr.name(r)).collect();
        let open = cr
            .nfa
            .add_state(format!("{{{}}}", names.join(",")), StateKind::Positive);
        let cond = Condition {
            atoms: final_atoms.clone(),
            sizes: sizes.clone(),
            ..Condition::default()
        };
        cr.nfa.add_edge(open, entry, EdgeKind::Epsilon, cond);
        ids.insert(full, open);
    }
    let mut queue = vec![0u32];
    let mut head = 0;
    while head < queue.len() {
        let mask = queue[head];
        head += 1;
        let from = ids[&mask];
        let bound = roles_of(mask);
        for i in 0..n {
            if mask & bit(i) != 0 || pred_mask[i] & !mask != 0 {
                continue;
            }
            let next = mask | bit(i);
            let to = match ids.get(&next) {
                Some(&s) => s,
                None if next == full => entry,
                None => {
                    let names: Vec<&str> = roles_of(next).iter().map(|&r| cr.name(r)).collect();
                    let s = cr
                        .nfa
                        .add_state(format!("{{{}}}", names.join(",")), StateKind::Positive);
                    ids.insert(next, s);
                    queue.push(next);
                    s
                }
            };
            let mut cond = cr.temporal(pos[i], &bound);
            let after = roles_of(next);
            cond.atoms = cr
                .atoms
                .iter()
                .filter(|(_, rs)| {
                    !deferred(rs)
                        && rs.iter().all(|r| after.contains(r))
                        && !rs.iter().all(|r| bound.contains(r))
                })
                .map(|(a, _)| a.clone())
                .collect();
            if next == full && !grows_at_full {
                cond.atoms.extend(final_atoms.iter().cloned());
                cond.sizes = sizes.clone();
            }
            cr.nfa.add_edge(
                from,
                to,
                EdgeKind::Take {
                    role: pos[i],
                    from_buffer: false,
                },
                cond,
            );
        }
    }

    // Iterated roles keep growing while none of their successors is bound.
    for (&mask, &state) in &ids {
        for i in 0..n {
            if grows(mask, i) {
                let cond = cr.temporal(pos[i], &roles_of(mask));
                cr.nfa.add_edge(
                    state,
                    state,
                    EdgeKind::Take {
                        role: pos[i],
                        from_buffer: false,
                    },
                    cond,
                );
            }
        }
    }

    for (&mask, &state) in &ids {
        if !cr.neg.is_empty() {
            cr.store_negated(state);
        }
        if mask != 0 {
            cr.add_timeout(state);
        }
    }
    Ok(cr.nfa)
}
