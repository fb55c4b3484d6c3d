//! Pieces shared by the eager and lazy builders.

use std::collections::BTreeSet;

use crate::nfa::{Condition, EdgeKind, Nfa, RoleId, RoleInfo, StateId, StateKind};
use crate::pattern::{ChainPattern, Expr};
use crate::scalar::Scalar;

/// A chain whose roles are registered in a fresh automaton: positives first
/// (in declaration order), then negations.
pub(crate) struct ChainRoles<'c, S> {
    pub chain: &'c ChainPattern<S>,
    pub nfa: Nfa<S>,
    pub pos: Vec<RoleId>,
    pub neg: Vec<RoleId>,
    /// Positive atoms with the roles they mention.
    pub atoms: Vec<(Expr<S, RoleId>, BTreeSet<RoleId>)>,
    /// Per negation, its atoms.
    pub neg_atoms: Vec<Vec<Expr<S, RoleId>>>,
}

impl<'c, S: Scalar> ChainRoles<'c, S> {
    pub fn new(chain: &'c ChainPattern<S>) -> Self {
        let mut nfa = Nfa::skeleton(chain.window);
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for p in &chain.positives {
            let etype = nfa.intern_type(&p.etype);
            pos.push(nfa.add_role(RoleInfo {
                name: p.role.clone(),
                etype,
                negated: false,
                iteration: p.iteration.clone(),
            }));
        }
        for n in &chain.negations {
            let etype = nfa.intern_type(&n.etype);
            neg.push(nfa.add_role(RoleInfo {
                name: n.role.clone(),
                etype,
                negated: true,
                iteration: None,
            }));
        }
        let id = |name: &String| -> RoleId {
            nfa.roles
                .iter()
                .position(|r| &r.name == name)
                .expect("atom roles are validated against the chain")
        };
        let atoms = chain
            .atoms
            .iter()
            .map(|a| {
                let e = a.map_roles(&mut |r| id(r));
                let rs = e.roles();
                (e, rs)
            })
            .collect();
        let neg_atoms = chain
            .negations
            .iter()
            .map(|n| n.atoms.iter().map(|a| a.map_roles(&mut |r| id(r))).collect())
            .collect();
        ChainRoles {
            chain,
            nfa,
            pos,
            neg,
            atoms,
            neg_atoms,
        }
    }

    pub fn name(&self, r: RoleId) -> &str {
        &self.nfa.roles[r].name
    }

    pub fn before(&self, u: RoleId, v: RoleId) -> bool {
        self.chain.before(self.name(u), self.name(v))
    }

    pub fn is_iterated(&self, r: RoleId) -> bool {
        self.nfa.roles[r].iteration.is_some()
    }

    /// Positive roles that must precede `r`.
    pub fn preds(&self, r: RoleId) -> Vec<RoleId> {
        self.pos.iter().copied().filter(|&u| self.before(u, r)).collect()
    }

    /// Positive roles that must follow `r`.
    pub fn succs(&self, r: RoleId) -> Vec<RoleId> {
        self.pos.iter().copied().filter(|&v| self.before(r, v)).collect()
    }

    /// Temporal guard for a candidate of `r` given the bound roles.
    pub fn temporal(&self, r: RoleId, bound: &[RoleId]) -> Condition<S> {
        Condition {
            after: bound.iter().copied().filter(|&u| self.before(u, r)).collect(),
            before: bound.iter().copied().filter(|&u| self.before(r, u)).collect(),
            ..Condition::default()
        }
    }

    pub fn neg_index(&self, h: RoleId) -> usize {
        self.neg.iter().position(|&x| x == h).expect("negated role")
    }

    /// Stores every negated type in `state`.
    pub fn store_negated(&mut self, state: StateId) {
        for i in 0..self.neg.len() {
            let t = self.nfa.roles[self.neg[i]].etype;
            self.nfa.store(state, t);
        }
    }

    /// Builds the checks for `negs` that run once every positive is bound,
    /// ending in the final state. Negations with a positive successor are
    /// searched for in the buffer, in the given order; the rest share one
    /// state that waits for the window to close. Returns the entry state.
    pub fn negation_block(&mut self, negs: &[RoleId]) -> StateId {
        let all = self.pos.clone();
        let (searched, waiting): (Vec<RoleId>, Vec<RoleId>) =
            negs.iter().partition(|&&h| !self.succs(h).is_empty());
        let mut entry = self.nfa.accept;
        if !waiting.is_empty() {
            let names: Vec<&str> = waiting.iter().map(|&h| self.name(h)).collect();
            let st = self
                .nfa
                .add_state(format!("not({})", names.join(",")), StateKind::Negative);
            for &h in &waiting {
                let cond = self.kill_condition(h, &all);
                let reject = self.nfa.reject;
                self.nfa.add_edge(st, reject, EdgeKind::Kill { role: h }, cond);
            }
            let accept = self.nfa.accept;
            self.nfa
                .add_edge(st, accept, EdgeKind::Timeout, Condition::default());
            entry = st;
        }
        for &h in searched.iter().rev() {
            entry = self.search_state(h, &all, entry);
        }
        entry
    }

    /// A state that kills the instance if a matching `h` event is buffered,
    /// and otherwise moves on to `next`.
    pub fn search_state(&mut self, h: RoleId, bound: &[RoleId], next: StateId) -> StateId {
        let st = self
            .nfa
            .add_state(format!("not({})", self.name(h)), StateKind::Negative);
        let cond = self.kill_condition(h, bound);
        let reject = self.nfa.reject;
        self.nfa.add_edge(st, reject, EdgeKind::Kill { role: h }, cond);
        self.nfa
            .add_edge(st, next, EdgeKind::SearchFailed, Condition::default());
        st
    }

    pub fn kill_condition(&self, h: RoleId, bound: &[RoleId]) -> Condition<S> {
        let mut cond = self.temporal(h, bound);
        cond.atoms = self.neg_atoms[self.neg_index(h)].clone();
        cond
    }

    pub fn add_timeout(&mut self, state: StateId) {
        let reject = self.nfa.reject;
        self.nfa
            .add_edge(state, reject, EdgeKind::Timeout, Condition::default());
    }
}
