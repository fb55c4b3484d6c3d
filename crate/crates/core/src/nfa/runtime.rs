use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::Arc;

use super::{
    for_each_subset, Condition, Edge, EdgeKind, InputBuffer, Nfa, RoleId, RoleInfo, StateId,
    StateKind, TypeId,
};
use crate::error::{EvalError, RuntimeError};
use crate::event::{Event, EventKey, Timestamp, Value};
use crate::pattern::{Bound, Env};
use crate::scalar::Scalar;

/// Work counters collected while running an automaton.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Counters {
    pub events: u64,
    pub matches: u64,
    pub predicate_evaluations: u64,
    pub instance_create: u64,
    pub instance_retire: u64,
    pub buffer_insert: u64,
    pub buffer_remove: u64,
    pub buffer_search: u64,
    pub buffer_scanned: u64,
    pub subsets: u64,
    pub peak_live_instances: u64,
    pub peak_buffered: u64,
    pub audit_searches: u64,
    pub audit_mismatches: u64,
}

impl Counters {
    /// Name/value pairs in a fixed order.
    pub fn fields(&self) -> [(&'static str, u64); 14] {
        [
            ("events", self.events),
            ("matches", self.matches),
            ("predicate_evaluations", self.predicate_evaluations),
            ("instance_create", self.instance_create),
            ("instance_retire", self.instance_retire),
            ("buffer_insert", self.buffer_insert),
            ("buffer_remove", self.buffer_remove),
            ("buffer_search", self.buffer_search),
            ("buffer_scanned", self.buffer_scanned),
            ("subsets", self.subsets),
            ("peak_live_instances", self.peak_live_instances),
            ("peak_buffered", self.peak_buffered),
            ("audit_searches", self.audit_searches),
            ("audit_mismatches", self.audit_mismatches),
        ]
    }
}

/// A detected match.
#[derive(Debug, Clone, PartialEq)]
pub struct Match<S = f64> {
    /// Positive roles with their bound events in stream order.
    pub bindings: Vec<(String, Vec<Arc<Event<S>>>)>,
    /// Key of the event whose processing produced the match;
    /// `(i64::MAX, u64::MAX)` when produced at end of stream.
    pub detected: EventKey,
}

/// Canonical identity of a match: sorted `(role, ts, seq)` triples.
pub type MatchKey = Vec<(String, Timestamp, u64)>;

impl<S> Match<S> {
    pub fn key(&self) -> MatchKey {
        let mut k: MatchKey = self
            .bindings
            .iter()
            .flat_map(|(r, evs)| evs.iter().map(move |e| (r.clone(), e.ts, e.seq)))
            .collect();
        k.sort();
        k
    }
}

pub const END_OF_STREAM: EventKey = EventKey::new(i64::MAX, u64::MAX);

#[derive(Debug, Clone)]
struct Instance<S> {
    uid: u64,
    state: StateId,
    binds: Vec<Vec<Arc<Event<S>>>>,
    min_ts: Option<Timestamp>,
    max_ts: Option<Timestamp>,
    private: Option<InputBuffer<S>>,
}

struct InstEnv<'a, S> {
    roles: &'a [RoleInfo],
    binds: &'a [Vec<Arc<Event<S>>>],
    role: Option<RoleId>,
    cand: &'a [Arc<Event<S>>],
}

impl<S> Env<S, RoleId> for InstEnv<'_, S> {
    fn bound(&self, r: &RoleId) -> Option<Bound<'_, S>> {
        let evs: &[Arc<Event<S>>] = if self.role == Some(*r) {
            self.cand
        } else {
            &self.binds[*r]
        };
        match evs.first() {
            None => None,
            Some(_) if self.roles[*r].iteration.is_some() => Some(Bound::Many(evs)),
            Some(e) => Some(Bound::One(e)),
        }
    }
}

fn group_value<'a, S: Scalar>(e: &'a Event<S>, attr: &str) -> Result<&'a Value<S>, EvalError> {
    e.attr(attr).ok_or_else(|| EvalError::MissingAttribute {
        etype: e.etype.clone(),
        attr: attr.to_string(),
    })
}

/// Executes an automaton over a stream, one event at a time.
///
/// Events of types that are stored by some state go into a single shared
/// buffer. In audit mode every instance additionally keeps a private buffer
/// filled only while it sits in a storing state; each search compares the
/// two and counts disagreements.
pub struct Runtime<'a, S: Scalar = f64> {
    nfa: &'a Nfa<S>,
    slots: Vec<Option<Instance<S>>>,
    free: Vec<usize>,
    members: Vec<Vec<(usize, u64)>>,
    deadlines: BinaryHeap<Reverse<(Timestamp, u64, usize)>>,
    buffer: InputBuffer<S>,
    triggers: Vec<Vec<StateId>>,
    stored: Vec<bool>,
    timeout_edge: Vec<Option<usize>>,
    counters: Counters,
    last: Option<EventKey>,
    now: Timestamp,
    detected: EventKey,
    next_uid: u64,
    live: usize,
    audit: bool,
    out: Vec<Match<S>>,
    pending: Vec<Instance<S>>,
    steps: u64,
}

impl<'a, S: Scalar> Runtime<'a, S> {
    pub fn new(nfa: &'a Nfa<S>) -> Self {
        Self::build(nfa, false)
    }

    pub fn with_audit(nfa: &'a Nfa<S>) -> Self {
        Self::build(nfa, true)
    }

    fn build(nfa: &'a Nfa<S>, audit: bool) -> Self {
        let ntypes = nfa.types.len();
        let mut triggers = vec![Vec::new(); ntypes];
        let mut stored = vec![false; ntypes];
        let mut timeout_edge = vec![None; nfa.states.len()];
        for (sid, st) in nfa.states.iter().enumerate() {
            for &t in &st.store {
                stored[t] = true;
            }
            for &ei in &st.out {
                let e = &nfa.edges[ei];
                if let Some(t) = nfa.edge_type(e) {
                    if !triggers[t].contains(&sid) {
                        triggers[t].push(sid);
                    }
                }
                if e.kind == EdgeKind::Timeout {
                    timeout_edge[sid] = Some(ei);
                }
            }
        }
        let mut rt = Runtime {
            nfa,
            slots: Vec::new(),
            free: Vec::new(),
            members: vec![Vec::new(); nfa.states.len()],
            deadlines: BinaryHeap::new(),
            buffer: InputBuffer::new(ntypes),
            triggers,
            stored,
            timeout_edge,
            counters: Counters::default(),
            last: None,
            now: i64::MIN,
            detected: EventKey::new(i64::MIN, 0),
            next_uid: 0,
            live: 0,
            audit,
            out: Vec::new(),
            pending: Vec::new(),
            steps: 0,
        };
        let seed = Instance {
            uid: rt.fresh_uid(),
            state: nfa.initial,
            binds: vec![Vec::new(); nfa.roles.len()],
            min_ts: None,
            max_ts: None,
            private: audit.then(|| InputBuffer::new(ntypes)),
        };
        rt.counters.instance_create += 1;
        rt.pending.push(seed);
        rt.drain().expect("seed entry evaluates no predicates on events");
        rt
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    pub fn live_instances(&self) -> usize {
        self.live
    }

    pub fn buffered(&self) -> usize {
        self.buffer.len()
    }

    /// Processes one event and returns the matches it completes, sorted by
    /// canonical key.
    pub fn step(&mut self, e: Arc<Event<S>>) -> Result<Vec<Match<S>>, RuntimeError> {
        let key = e.key();
        if let Some(last) = self.last {
            if key <= last {
                return Err(RuntimeError::OutOfOrder { last, next: key });
            }
        }
        self.last = Some(key);
        self.counters.events += 1;
        self.now = e.ts;
        self.detected = key;

        self.fire_timeouts()?;
        self.expire();
        if let Some(t) = self.nfa.type_id(&e.etype) {
            self.process(t, &e)?;
            if self.stored[t] {
                self.buffer.push(t, e.clone());
                self.counters.buffer_insert += 1;
                self.counters.peak_buffered = self.counters.peak_buffered.max(self.buffer.len() as u64);
            }
            if self.audit {
                self.store_private(t, &e);
            }
        }
        self.steps += 1;
        if self.steps % 4096 == 0 {
            self.compact();
        }
        Ok(self.take_output())
    }

    /// Ends the stream: instances waiting only for their window to close are
    /// resolved.
    pub fn flush(&mut self) -> Result<Vec<Match<S>>, RuntimeError> {
        self.now = i64::MAX;
        self.detected = END_OF_STREAM;
        let mut slots: Vec<(u64, usize)> = self
            .slots
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.as_ref().map(|x| (x.uid, i)))
            .collect();
        slots.sort_unstable();
        for (_, slot) in slots {
            let state = self.slots[slot].as_ref().map(|i| i.state);
            if let Some(ei) = state.and_then(|s| self.timeout_edge[s]) {
                let mut inst = self.vacate(slot);
                inst.state = self.nfa.edges[ei].to;
                self.pending.push(inst);
            }
        }
        self.drain()?;
        Ok(self.take_output())
    }

    /// Runs a whole stream and flushes.
    pub fn run<I>(&mut self, events: I) -> Result<Vec<Match<S>>, RuntimeError>
    where
        I: IntoIterator<Item = Arc<Event<S>>>,
    {
        let mut all = Vec::new();
        for e in events {
            all.extend(self.step(e)?);
        }
        all.extend(self.flush()?);
        Ok(all)
    }

    fn take_output(&mut self) -> Vec<Match<S>> {
        let mut out = std::mem::take(&mut self.out);
        out.sort_by_cached_key(|m| m.key());
        out
    }

    fn fresh_uid(&mut self) -> u64 {
        self.next_uid += 1;
        self.next_uid
    }

    fn valid(&self, slot: usize, uid: u64) -> bool {
        self.slots
            .get(slot)
            .and_then(|s| s.as_ref())
            .is_some_and(|i| i.uid == uid)
    }

    fn vacate(&mut self, slot: usize) -> Instance<S> {
        let inst = self.slots[slot].take().expect("occupied slot");
        self.free.push(slot);
        self.live -= 1;
        inst
    }

    fn retire(&mut self) {
        self.counters.instance_retire += 1;
    }

    fn park(&mut self, inst: Instance<S>) {
        let state = inst.state;
        let uid = inst.uid;
        let deadline = inst.min_ts.map(|m| m.saturating_add(self.nfa.window.millis()));
        let slot = match self.free.pop() {
            Some(s) => {
                self.slots[s] = Some(inst);
                s
            }
            None => {
                self.slots.push(Some(inst));
                self.slots.len() - 1
            }
        };
        self.members[state].push((slot, uid));
        if let (Some(d), Some(_)) = (deadline, self.timeout_edge[state]) {
            self.deadlines.push(Reverse((d, uid, slot)));
        }
        self.live += 1;
        self.counters.peak_live_instances = self.counters.peak_live_instances.max(self.live as u64);
    }

    fn fire_timeouts(&mut self) -> Result<(), RuntimeError> {
        while let Some(&Reverse((deadline, uid, slot))) = self.deadlines.peek() {
            if deadline >= self.now {
                break;
            }
            self.deadlines.pop();
            if !self.valid(slot, uid) {
                continue;
            }
            let mut inst = self.vacate(slot);
            let ei = self.timeout_edge[inst.state].expect("deadline only set with a timeout edge");
            inst.state = self.nfa.edges[ei].to;
            self.pending.push(inst);
        }
        self.drain()
    }

    fn expire(&mut self) {
        let cutoff = self.now.saturating_sub(self.nfa.window.millis());
        self.counters.buffer_remove += self.buffer.expire(cutoff) as u64;
        if self.audit {
            for inst in self.slots.iter_mut().flatten() {
                if let Some(p) = &mut inst.private {
                    p.expire(cutoff);
                }
            }
        }
    }

    fn store_private(&mut self, t: TypeId, e: &Arc<Event<S>>) {
        let nfa = self.nfa;
        for inst in self.slots.iter_mut().flatten() {
            if nfa.states[inst.state].store.contains(&t) {
                if let Some(p) = &mut inst.private {
                    p.push(t, e.clone());
                }
            }
        }
    }

    fn compact(&mut self) {
        for state in 0..self.members.len() {
            let list = std::mem::take(&mut self.members[state]);
            self.members[state] = list
                .into_iter()
                .filter(|&(slot, uid)| self.valid(slot, uid))
                .collect();
        }
    }

    fn process(&mut self, t: TypeId, e: &Arc<Event<S>>) -> Result<(), RuntimeError> {
        let nfa = self.nfa;
        for &s in &self.triggers[t].clone() {
            let list = std::mem::take(&mut self.members[s]);
            let list: Vec<(usize, u64)> = list
                .into_iter()
                .filter(|&(slot, uid)| {
                    self.slots[slot]
                        .as_ref()
                        .is_some_and(|i| i.uid == uid && i.state == s)
                })
                .collect();
            self.members[s] = list.clone();
            for (slot, uid) in list {
                if !self.valid(slot, uid) {
                    continue;
                }
                let inst = self.slots[slot].take().expect("valid slot");
                let mut killed = false;
                for &ei in &nfa.states[s].out {
                    let edge = &nfa.edges[ei];
                    if nfa.edge_type(edge) != Some(t) {
                        continue;
                    }
                    match edge.kind {
                        EdgeKind::Kill { role } => {
                            if self.check(&inst, &edge.cond, Some(role), std::slice::from_ref(e))? {
                                killed = true;
                                break;
                            }
                        }
                        EdgeKind::Take { role, .. } => {
                            let cand = std::slice::from_ref(e);
                            if self.check(&inst, &edge.cond, Some(role), cand)? {
                                let child = self.child(&inst, edge.to, role, cand);
                                self.pending.push(child);
                            }
                        }
                        EdgeKind::Iterate { role } => {
                            self.iterate(&inst, edge, role, Some(e))?;
                        }
                        _ => {}
                    }
                }
                self.slots[slot] = Some(inst);
                if killed {
                    self.vacate(slot);
                    self.retire();
                }
            }
        }
        self.drain()
    }

    fn drain(&mut self) -> Result<(), RuntimeError> {
        while let Some(inst) = self.pending.pop() {
            self.enter(inst)?;
        }
        Ok(())
    }

    fn enter(&mut self, mut inst: Instance<S>) -> Result<(), RuntimeError> {
        let nfa = self.nfa;
        let st = &nfa.states[inst.state];
        match st.kind {
            StateKind::Final => {
                self.emit(&inst);
                self.retire();
                return Ok(());
            }
            StateKind::Reject => {
                self.retire();
                return Ok(());
            }
            _ => {}
        }
        for &ei in &st.out {
            let edge = &nfa.edges[ei];
            if let EdgeKind::Kill { role } = edge.kind {
                for cand in self.search(&inst, edge, role) {
                    if self.check(&inst, &edge.cond, Some(role), std::slice::from_ref(&cand))? {
                        self.retire();
                        return Ok(());
                    }
                }
            }
        }
        let mut moved = None;
        for &ei in &st.out {
            let edge = &nfa.edges[ei];
            match edge.kind {
                EdgeKind::Epsilon => {
                    if self.check(&inst, &edge.cond, None, &[])? {
                        let child = self.child(&inst, edge.to, 0, &[]);
                        self.pending.push(child);
                    }
                }
                EdgeKind::Take {
                    role,
                    from_buffer: true,
                } => {
                    for cand in self.search(&inst, edge, role) {
                        let cand = std::slice::from_ref(&cand);
                        if self.check(&inst, &edge.cond, Some(role), cand)? {
                            let child = self.child(&inst, edge.to, role, cand);
                            self.pending.push(child);
                        }
                    }
                }
                EdgeKind::Iterate { role } => self.iterate(&inst, edge, role, None)?,
                EdgeKind::SearchFailed => moved = Some(edge.to),
                _ => {}
            }
        }
        if let Some(to) = moved {
            inst.state = to;
            self.pending.push(inst);
        } else if st.transient {
            self.retire();
        } else {
            self.park(inst);
        }
        Ok(())
    }

    fn emit(&mut self, inst: &Instance<S>) {
        let bindings = self
            .nfa
            .roles
            .iter()
            .zip(&inst.binds)
            .filter(|(r, evs)| !r.negated && !evs.is_empty())
            .map(|(r, evs)| (r.name.clone(), evs.clone()))
            .collect();
        self.counters.matches += 1;
        self.out.push(Match {
            bindings,
            detected: self.detected,
        });
    }

    fn child(&mut self, inst: &Instance<S>, to: StateId, role: RoleId, evs: &[Arc<Event<S>>]) -> Instance<S> {
        let mut binds = inst.binds.clone();
        let (mut lo, mut hi) = (inst.min_ts, inst.max_ts);
        if !evs.is_empty() {
            binds[role].extend(evs.iter().cloned());
            for e in evs {
                lo = Some(lo.map_or(e.ts, |m| m.min(e.ts)));
                hi = Some(hi.map_or(e.ts, |m| m.max(e.ts)));
            }
        }
        self.counters.instance_create += 1;
        Instance {
            uid: self.fresh_uid(),
            state: to,
            binds,
            min_ts: lo,
            max_ts: hi,
            private: inst.private.clone(),
        }
    }

    /// Key bounds (both exclusive) for candidates of an edge's role: the
    /// temporal constraints plus the window around already bound events.
    fn bounds(&self, inst: &Instance<S>, cond: &Condition<S>) -> (Option<EventKey>, Option<EventKey>) {
        let w = self.nfa.window.millis();
        let mut lo = inst
            .max_ts
            .map(|m| EventKey::new(m.saturating_sub(w).saturating_sub(1), u64::MAX));
        let mut hi = inst
            .min_ts
            .map(|m| EventKey::new(m.saturating_add(w).saturating_add(1), 0));
        for &u in &cond.after {
            if let Some(e) = inst.binds[u].last() {
                lo = lo.max(Some(e.key()));
            }
        }
        for &u in &cond.before {
            if let Some(e) = inst.binds[u].first() {
                let k = e.key();
                hi = Some(hi.map_or(k, |h| h.min(k)));
            }
        }
        (lo, hi)
    }

    fn search(&mut self, inst: &Instance<S>, edge: &Edge<S>, role: RoleId) -> Vec<Arc<Event<S>>> {
        let t = self.nfa.roles[role].etype;
        let (lo, hi) = self.bounds(inst, &edge.cond);
        let found: Vec<Arc<Event<S>>> = self.buffer.range(t, lo, hi).cloned().collect();
        self.counters.buffer_search += 1;
        self.counters.buffer_scanned += found.len() as u64;
        if let Some(p) = &inst.private {
            self.counters.audit_searches += 1;
            let mine: Vec<EventKey> = p.range(t, lo, hi).map(|e| e.key()).collect();
            if !found.iter().map(|e| e.key()).eq(mine) {
                self.counters.audit_mismatches += 1;
            }
        }
        found
    }

    /// Evaluates an edge condition with `cand` bound to `role` (appended to
    /// the role's existing binding when it is iterated).
    fn check(
        &mut self,
        inst: &Instance<S>,
        cond: &Condition<S>,
        role: Option<RoleId>,
        cand: &[Arc<Event<S>>],
    ) -> Result<bool, EvalError> {
        let roles = &self.nfa.roles;
        let merged: Vec<Arc<Event<S>>>;
        let mut cand = cand;
        if let (Some(r), Some(first), Some(last)) = (role, cand.first(), cand.last()) {
            let (fk, lk) = (first.key(), last.key());
            for &u in &cond.after {
                if inst.binds[u].last().is_some_and(|x| x.key() >= fk) {
                    return Ok(false);
                }
            }
            for &u in &cond.before {
                if inst.binds[u].first().is_some_and(|x| x.key() <= lk) {
                    return Ok(false);
                }
            }
            let lo = inst.min_ts.map_or(first.ts, |m| m.min(first.ts));
            let hi = inst.max_ts.map_or(last.ts, |m| m.max(last.ts));
            if !self.nfa.window.contains(lo, hi) {
                return Ok(false);
            }
            if let Some(it) = &roles[r].iteration {
                let existing = &inst.binds[r];
                if it.max.is_some_and(|m| existing.len() + cand.len() > m) {
                    return Ok(false);
                }
                if let Some(g) = &it.group_by {
                    let first_val = group_value(existing.first().unwrap_or(first), g)?;
                    for e in existing.iter().chain(cand) {
                        if group_value(e, g)? != first_val {
                            return Ok(false);
                        }
                    }
                }
                if !existing.is_empty() {
                    merged = existing.iter().chain(cand).cloned().collect();
                    cand = &merged;
                }
            }
        }
        for &r in &cond.sizes {
            let n = if role == Some(r) { cand.len() } else { inst.binds[r].len() };
            let it = roles[r].iteration.as_ref().expect("size check on iterated role");
            if n < it.min || it.max.is_some_and(|m| n > m) {
                return Ok(false);
            }
        }
        let env = InstEnv {
            roles,
            binds: &inst.binds,
            role,
            cand,
        };
        for atom in &cond.atoms {
            self.counters.predicate_evaluations += 1;
            if !atom.eval_bool(&env)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Binds subsets to an iterated role: from the buffer on entry, or on
    /// arrival of `arrived`, every subset containing it.
    fn iterate(
        &mut self,
        inst: &Instance<S>,
        edge: &Edge<S>,
        role: RoleId,
        arrived: Option<&Arc<Event<S>>>,
    ) -> Result<(), RuntimeError> {
        let it = self.nfa.roles[role]
            .iteration
            .clone()
            .expect("iterate edge on iterated role");
        let w = self.nfa.window;
        if let Some(e) = arrived {
            // The arrival must itself be admissible as a member.
            if !self.check_member(inst, &edge.cond, e)? {
                return Ok(());
            }
        }
        let mut cands: Vec<Arc<Event<S>>> = Vec::new();
        for c in self.search(inst, edge, role) {
            let in_window = match arrived {
                Some(e) => w.contains(inst.min_ts.map_or(c.ts, |m| m.min(c.ts)), e.ts),
                None => true,
            };
            let same_group = match (&it.group_by, arrived) {
                (Some(g), Some(e)) => group_value(&c, g)? == group_value(e, g)?,
                _ => true,
            };
            if in_window && same_group {
                cands.push(c);
            }
        }
        let groups: Vec<Vec<Arc<Event<S>>>> = match (&it.group_by, arrived) {
            (Some(g), None) => {
                let mut groups: Vec<(Value<S>, Vec<Arc<Event<S>>>)> = Vec::new();
                for c in cands {
                    let v = group_value(&c, g)?.clone();
                    match groups.iter_mut().find(|(k, _)| *k == v) {
                        Some((_, xs)) => xs.push(c),
                        None => groups.push((v, vec![c])),
                    }
                }
                groups.into_iter().map(|(_, xs)| xs).collect()
            }
            _ => vec![cands],
        };
        let max = it.max.unwrap_or(usize::MAX);
        let mut chosen_sets: Vec<Vec<Arc<Event<S>>>> = Vec::new();
        for group in &groups {
            match arrived {
                Some(e) => {
                    if it.min <= 1 {
                        chosen_sets.push(vec![e.clone()]);
                    }
                    if max >= 2 {
                        for_each_subset(
                            group.len(),
                            it.min.saturating_sub(1).max(1),
                            max - 1,
                            |_, _| true,
                            |idx| {
                                let mut set: Vec<Arc<Event<S>>> =
                                    idx.iter().map(|&i| group[i].clone()).collect();
                                set.push(e.clone());
                                chosen_sets.push(set);
                            },
                        );
                    }
                }
                None => {
                    let (bmin, bmax) = (inst.min_ts, inst.max_ts);
                    for_each_subset(
                        group.len(),
                        it.min.max(1),
                        max,
                        |chosen, next| match chosen.first() {
                            None => true,
                            Some(&f) => {
                                let lo = bmin.map_or(group[f].ts, |m| m.min(group[f].ts));
                                let hi = bmax.map_or(group[next].ts, |m| m.max(group[next].ts));
                                w.contains(lo, hi)
                            }
                        },
                        |idx| chosen_sets.push(idx.iter().map(|&i| group[i].clone()).collect()),
                    );
                }
            }
        }
        self.counters.subsets += chosen_sets.len() as u64;
        for set in chosen_sets {
            if self.check(inst, &edge.cond, Some(role), &set)? {
                let child = self.child(inst, edge.to, role, &set);
                self.pending.push(child);
            }
        }
        Ok(())
    }

    /// Temporal and window admissibility of a single member.
    fn check_member(&self, inst: &Instance<S>, cond: &Condition<S>, e: &Event<S>) -> Result<bool, EvalError> {
        let k = e.key();
        let after_ok = cond
            .after
            .iter()
            .all(|&u| inst.binds[u].last().is_none_or(|x| x.key() < k));
        let before_ok = cond
            .before
            .iter()
            .all(|&u| inst.binds[u].first().is_none_or(|x| x.key() > k));
        let lo = inst.min_ts.map_or(e.ts, |m| m.min(e.ts));
        let hi = inst.max_ts.map_or(e.ts, |m| m.max(e.ts));
        Ok(after_ok && before_ok && self.nfa.window.contains(lo, hi))
    }
}
