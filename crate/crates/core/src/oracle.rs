//! Brute-force reference matcher for small streams.
//!
//! Enumerates every assignment of stream events to the positive roles of
//! each branch and keeps those satisfying the temporal order, the window,
//! the predicate and every negation.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::error::{EvalError, OracleError};
use crate::event::{Event, EventKey};
use crate::pattern::{Bound, ChainPattern, Env, PositiveRole};
use crate::scalar::Scalar;

pub use crate::nfa::MatchKey;

/// Default stream length limit.
pub const DEFAULT_CAP: usize = 30;

type Assignment<S> = BTreeMap<String, Vec<Arc<Event<S>>>>;

struct NameEnv<'a, S> {
    map: &'a Assignment<S>,
    iterated: &'a BTreeSet<String>,
}

impl<S> Env<S, String> for NameEnv<'_, S> {
    fn bound(&self, role: &String) -> Option<Bound<'_, S>> {
        let evs = self.map.get(role)?;
        if self.iterated.contains(role) {
            Some(Bound::Many(evs))
        } else {
            evs.first().map(|e| Bound::One(e))
        }
    }
}

/// All matches of `chains` over `events`, as sorted canonical keys (a
/// multiset: a match found by two branches appears twice).
pub fn oracle_matches<S: Scalar>(
    chains: &[ChainPattern<S>],
    events: &[Arc<Event<S>>],
    cap: usize,
) -> Result<Vec<MatchKey>, OracleError> {
    if events.len() > cap {
        return Err(OracleError::CapExceeded {
            len: events.len(),
            cap,
        });
    }
    let mut out = Vec::new();
    for chain in chains {
        let mut ctx = Ctx {
            chain,
            events,
            iterated: chain
                .positives
                .iter()
                .filter(|p| p.iteration.is_some())
                .map(|p| p.role.clone())
                .collect(),
            assign: Assignment::new(),
            out: &mut out,
        };
        ctx.assign_role(0)?;
    }
    out.sort();
    Ok(out)
}

struct Ctx<'a, S> {
    chain: &'a ChainPattern<S>,
    events: &'a [Arc<Event<S>>],
    iterated: BTreeSet<String>,
    assign: Assignment<S>,
    out: &'a mut Vec<MatchKey>,
}

impl<S: Scalar> Ctx<'_, S> {
    fn assign_role(&mut self, k: usize) -> Result<(), EvalError> {
        let Some(role) = self.chain.positives.get(k) else {
            if self.accept()? {
                self.out.push(key_of(&self.assign));
            }
            return Ok(());
        };
        let cands: Vec<Arc<Event<S>>> = self
            .events
            .iter()
            .filter(|e| e.etype == role.etype)
            .cloned()
            .collect();
        match &role.iteration {
            None => {
                for c in cands {
                    self.assign.insert(role.role.clone(), vec![c]);
                    self.assign_role(k + 1)?;
                }
            }
            Some(_) => {
                let mut subsets = Vec::new();
                all_subsets(&cands, 0, &mut Vec::new(), &mut subsets);
                for s in subsets {
                    if self.subset_ok(role, &s)? {
                        self.assign.insert(role.role.clone(), s);
                        self.assign_role(k + 1)?;
                    }
                }
            }
        }
        self.assign.remove(&role.role);
        Ok(())
    }

    fn subset_ok(&self, role: &PositiveRole, s: &[Arc<Event<S>>]) -> Result<bool, EvalError> {
        let it = role.iteration.as_ref().expect("iterated");
        if s.len() < it.min || it.max.is_some_and(|m| s.len() > m) {
            return Ok(false);
        }
        if let Some(g) = &it.group_by {
            let vals: Result<Vec<_>, EvalError> = s
                .iter()
                .map(|e| {
                    e.attr(g).ok_or_else(|| EvalError::MissingAttribute {
                        etype: e.etype.clone(),
                        attr: g.clone(),
                    })
                })
                .collect();
            let vals = vals?;
            if vals.iter().any(|v| *v != vals[0]) {
                return Ok(false);
            }
        }
        let lo = s.iter().map(|e| e.ts).min().unwrap_or(0);
        let hi = s.iter().map(|e| e.ts).max().unwrap_or(0);
        Ok(self.chain.window.contains(lo, hi))
    }

    fn accept(&self) -> Result<bool, EvalError> {
        let key = |e: &Arc<Event<S>>| EventKey::new(e.ts, e.seq);
        for (u, v) in &self.chain.temporal {
            let (Some(us), Some(vs)) = (self.assign.get(u), self.assign.get(v)) else {
                continue;
            };
            if !us.iter().all(|x| vs.iter().all(|y| key(x) < key(y))) {
                return Ok(false);
            }
        }
        let all = || self.assign.values().flatten();
        let lo = all().map(|e| e.ts).min().expect("at least one positive");
        let hi = all().map(|e| e.ts).max().expect("at least one positive");
        if !self.chain.window.contains(lo, hi) {
            return Ok(false);
        }
        let env = NameEnv {
            map: &self.assign,
            iterated: &self.iterated,
        };
        for atom in &self.chain.atoms {
            if !atom.eval_bool(&env)? {
                return Ok(false);
            }
        }
        for neg in &self.chain.negations {
            for x in self.events.iter().filter(|e| e.etype == neg.etype) {
                if self.violates(neg, x, lo, hi)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn violates(
        &self,
        neg: &crate::pattern::NegatedRole<S>,
        x: &Arc<Event<S>>,
        lo: i64,
        hi: i64,
    ) -> Result<bool, EvalError> {
        let xk = EventKey::new(x.ts, x.seq);
        for (u, v) in &self.chain.temporal {
            if *v == neg.role {
                if let Some(us) = self.assign.get(u) {
                    if !us.iter().all(|e| EventKey::new(e.ts, e.seq) < xk) {
                        return Ok(false);
                    }
                }
            } else if *u == neg.role {
                if let Some(vs) = self.assign.get(v) {
                    if !vs.iter().all(|e| xk < EventKey::new(e.ts, e.seq)) {
                        return Ok(false);
                    }
                }
            }
        }
        if !self.chain.window.contains(lo.min(x.ts), hi.max(x.ts)) {
            return Ok(false);
        }
        let mut with_x = self.assign.clone();
        with_x.insert(neg.role.clone(), vec![x.clone()]);
        let env = NameEnv {
            map: &with_x,
            iterated: &self.iterated,
        };
        for atom in &neg.atoms {
            if !atom.eval_bool(&env)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn key_of<S>(assign: &Assignment<S>) -> MatchKey {
    let mut k: MatchKey = assign
        .iter()
        .flat_map(|(r, evs)| evs.iter().map(move |e| (r.clone(), e.ts, e.seq)))
        .collect();
    k.sort();
    k
}

fn all_subsets<T: Clone>(xs: &[T], start: usize, cur: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
    if !cur.is_empty() {
        out.push(cur.clone());
    }
    for i in start..xs.len() {
        cur.push(xs[i].clone());
        all_subsets(xs, i + 1, cur, out);
        cur.pop();
    }
}
