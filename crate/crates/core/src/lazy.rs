//! Lazy chain automata: positive events are bound in ascending order of
//! arrival rate, with more frequent types buffered until they are needed.

use std::collections::{BTreeMap, BTreeSet};

use crate::build::ChainRoles;
use crate::error::BuildError;
use crate::event::EventType;
use crate::nfa::{EdgeKind, Nfa, RoleId, StateId, StateKind};
use crate::pattern::ChainPattern;
use crate::scalar::Scalar;

/// Arrival rate per event type (events per time unit; only ratios matter).
pub type Rates = BTreeMap<EventType, f64>;

/// How negated roles are checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NegationStrategy {
    /// After every positive role is bound.
    PostProcess,
    /// As soon as every role the negation depends on is bound.
    FirstChance,
}

/// Sorts types by ascending rate, ties by name.
pub fn ascending_freq_order(types: &[EventType], rates: &Rates) -> Result<Vec<EventType>, BuildError> {
    let mut keyed = Vec::with_capacity(types.len());
    for t in types {
        let r = *rates.get(t).ok_or_else(|| BuildError::MissingRate(t.clone()))?;
        keyed.push((r, t.clone()));
    }
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    Ok(keyed.into_iter().map(|(_, t)| t).collect())
}

/// Ascending frequency order over every type of a branch, negated ones
/// included.
pub fn chain_freq_order<S: Scalar>(chain: &ChainPattern<S>, rates: &Rates) -> Result<Vec<EventType>, BuildError> {
    ascending_freq_order(&chain.all_types(), rates)
}

/// Ordering filters for the positive type `etype` under `order`: the types
/// bound earlier in the chain that must precede it (`prec`) or follow it
/// (`succ`) in time.
pub fn partial_filters<S: Scalar>(
    chain: &ChainPattern<S>,
    order: &[EventType],
    etype: &EventType,
) -> Result<(BTreeSet<EventType>, BTreeSet<EventType>), BuildError> {
    let role = chain.role_of_type(etype).ok_or(BuildError::BadFreqOrder)?;
    let at = order.iter().position(|t| t == etype).ok_or(BuildError::BadFreqOrder)?;
    let mut prec = BTreeSet::new();
    let mut succ = BTreeSet::new();
    for t in &order[..at] {
        let Some(other) = chain.positive(chain.role_of_type(t).unwrap_or("")) else {
            continue;
        };
        if chain.before(&other.role, role) {
            prec.insert(t.clone());
        } else if chain.before(role, &other.role) {
            succ.insert(t.clone());
        }
    }
    Ok((prec, succ))
}

/// Single-element ordering filters: the latest type of `prec` and the
/// earliest of `succ` with respect to the pattern's temporal order.
pub fn sequence_filters<S: Scalar>(
    chain: &ChainPattern<S>,
    order: &[EventType],
    etype: &EventType,
) -> Result<(Option<EventType>, Option<EventType>), BuildError> {
    let (prec, succ) = partial_filters(chain, order, etype)?;
    let role = |t: &EventType| chain.role_of_type(t).unwrap_or_default().to_string();
    let latest = prec
        .iter()
        .find(|p| !prec.iter().any(|q| chain.before(&role(p), &role(q))))
        .cloned();
    let earliest = succ
        .iter()
        .find(|p| !succ.iter().any(|q| chain.before(&role(q), &role(p))))
        .cloned();
    Ok((latest, earliest))
}

/// Builds a lazy chain for one branch. `order` must list every positive type
/// of the branch exactly once (negated types may be interleaved); an iterated
/// role is always bound last.
pub fn build_lazy_chain<S: Scalar>(
    chain: &ChainPattern<S>,
    order: &[EventType],
    strategy: NegationStrategy,
) -> Result<Nfa<S>, BuildError> {
    let mut cr = ChainRoles::new(chain);
    let type_of = |cr: &ChainRoles<S>, r: RoleId| cr.nfa.types[cr.nfa.roles[r].etype].clone();

    let mut seq: Vec<RoleId> = Vec::new();
    for t in order {
        if let Some(&r) = cr.pos.iter().find(|&&r| &type_of(&cr, r) == t) {
            if seq.contains(&r) {
                return Err(BuildError::BadFreqOrder);
            }
            seq.push(r);
        } else if !cr.neg.iter().any(|&h| &type_of(&cr, h) == t) {
            return Err(BuildError::BadFreqOrder);
        }
    }
    if seq.len() != cr.pos.len() {
        return Err(BuildError::BadFreqOrder);
    }
    let iterated: Vec<RoleId> = seq.iter().copied().filter(|&r| cr.is_iterated(r)).collect();
    if iterated.len() > 1 {
        return Err(BuildError::Unsupported(
            "a lazy chain supports at most one iterated role".into(),
        ));
    }
    if let Some(&b) = iterated.first() {
        seq.retain(|&r| r != b);
        seq.push(b);
    }
    let n = seq.len();

    // Negations, most frequent first.
    let rank = |h: RoleId| order.iter().position(|t| *t == type_of(&cr, h));
    let mut negs = cr.neg.clone();
    negs.sort_by_key(|&h| std::cmp::Reverse(rank(h).map_or(0, |p| p + 1)));

    // Position after which each negation is checked; `n` is the end.
    let mut at: BTreeMap<usize, Vec<RoleId>> = BTreeMap::new();
    for &h in &negs {
        let pos = match strategy {
            NegationStrategy::PostProcess => n,
            NegationStrategy::FirstChance => first_chance_position(&cr, &seq, h)?,
        };
        at.entry(pos).or_default().push(h);
    }

    let mut q: Vec<StateId> = vec![cr.nfa.initial];
    for i in 1..n {
        q.push(cr.nfa.add_state(format!("q{}", i + 1), StateKind::Positive));
    }
    let end = {
        let finals = at.remove(&n).unwrap_or_default();
        cr.negation_block(&finals)
    };
    for i in 0..n {
        let r = seq[i];
        let bound = &seq[..i];
        let mut target = if i + 1 < n { q[i + 1] } else { end };
        if let Some(hs) = at.get(&(i + 1)) {
            let bound_after = &seq[..=i];
            for &h in hs.iter().rev() {
                target = cr.search_state(h, bound_after, target);
            }
        }
        let mut cond = cr.temporal(r, bound);
        cond.atoms = cr
            .atoms
            .iter()
            .filter(|(_, rs)| {
                let covered = rs.iter().all(|x| *x == r || bound.contains(x));
                let fresh = rs.contains(&r) || (i == 0 && rs.is_empty());
                covered && fresh
            })
            .map(|(a, _)| a.clone())
            .collect();
        let kind = if cr.is_iterated(r) {
            cond.sizes.push(r);
            let t = cr.nfa.roles[r].etype;
            cr.nfa.store(q[i], t);
            EdgeKind::Iterate { role: r }
        } else {
            EdgeKind::Take {
                role: r,
                from_buffer: true,
            }
        };
        cr.nfa.add_edge(q[i], target, kind, cond);
        for &later in &seq[i + 1..] {
            let t = cr.nfa.roles[later].etype;
            cr.nfa.store(q[i], t);
        }
        if !cr.neg.is_empty() {
            cr.store_negated(q[i]);
        }
        if i > 0 {
            cr.add_timeout(q[i]);
        }
    }
    Ok(cr.nfa)
}

/// Index in `seq` after which every role the negation depends on is bound.
fn first_chance_position<S: Scalar>(
    cr: &ChainRoles<S>,
    seq: &[RoleId],
    h: RoleId,
) -> Result<usize, BuildError> {
    let preds = cr.preds(h);
    let succs = cr.succs(h);
    if succs.is_empty() {
        return Err(BuildError::NegationAtEnd(cr.name(h).to_string()));
    }
    // A leading negation's window depends on every positive event.
    if preds.is_empty() {
        return Ok(seq.len());
    }
    let mut dep: BTreeSet<RoleId> = BTreeSet::new();
    dep.extend(preds.iter().copied().filter(|&u| !preds.iter().any(|&v| cr.before(u, v))));
    dep.extend(succs.iter().copied().filter(|&u| !succs.iter().any(|&v| cr.before(v, u))));
    for atom in &cr.neg_atoms[cr.neg_index(h)] {
        dep.extend(atom.roles().into_iter().filter(|r| *r != h));
    }
    if dep.iter().any(|&r| cr.is_iterated(r)) {
        return Ok(seq.len());
    }
    Ok(dep
        .iter()
        .map(|r| seq.iter().position(|x| x == r).expect("positive role") + 1)
        .max()
        .unwrap_or(seq.len()))
}

/// Merges branch automata into one, sharing the initial, final and reject
/// states.
pub fn merge_chains<S: Scalar>(nfas: Vec<Nfa<S>>) -> Result<Nfa<S>, BuildError> {
    let mut it = nfas.into_iter();
    let first = it.next().ok_or(BuildError::EmptyChainList)?;
    let mut merged = Nfa::skeleton(first.window);
    merged.absorb(first);
    for nfa in it {
        merged.absorb(nfa);
    }
    Ok(merged)
}

/// One lazy chain per branch, merged.
pub fn build_multi_chain<S: Scalar>(
    chains: &[ChainPattern<S>],
    rates: &Rates,
    strategy: NegationStrategy,
) -> Result<Nfa<S>, BuildError> {
    let mut nfas = Vec::with_capacity(chains.len());
    for c in chains {
        let order = chain_freq_order(c, rates)?;
        nfas.push(build_lazy_chain(c, &order, strategy)?);
    }
    merge_chains(nfas)
}
