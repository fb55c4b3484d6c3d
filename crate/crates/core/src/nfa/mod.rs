//! Automaton representation shared by the eager and lazy builders, and the
//! runtime that executes it over a stream.

mod buffer;
mod runtime;
mod subsets;

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::sync::Arc;

use crate::event::{EventType, Window};
use crate::pattern::{Expr, Iteration};

pub use buffer::InputBuffer;
pub use runtime::{Counters, Match, MatchKey, Runtime, END_OF_STREAM};
pub use subsets::for_each_subset;

pub type RoleId = usize;
pub type StateId = usize;
pub type TypeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct RoleInfo {
    pub name: String,
    pub etype: TypeId,
    pub negated: bool,
    pub iteration: Option<Iteration>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Initial,
    Positive,
    Negative,
    Final,
    Reject,
}

#[derive(Debug, Clone)]
pub struct State {
    pub name: String,
    pub kind: StateKind,
    /// Types whose events are kept for later buffer searches while an
    /// instance sits here.
    pub store: Vec<TypeId>,
    /// Instances do not stay here once entry processing is done.
    pub transient: bool,
    pub out: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    /// Bind one event to the role. With `from_buffer` the buffer is searched
    /// when an instance enters the source state, in addition to stream
    /// arrivals.
    Take { role: RoleId, from_buffer: bool },
    /// Bind a non-empty subset of buffered and arriving events to an iterated
    /// role.
    Iterate { role: RoleId },
    /// An event satisfying the condition kills the instance.
    Kill { role: RoleId },
    /// Fires once the instance can no longer extend within the window.
    Timeout,
    /// Fires on entry when no kill edge of the state found an event.
    SearchFailed,
    /// Copies the instance on entry when the condition holds.
    Epsilon,
}

/// Guard attached to an edge. Temporal bounds refer to roles already bound
/// when the edge is evaluated.
#[derive(Debug, Clone)]
pub struct Condition<S = f64> {
    pub atoms: Vec<Expr<S, RoleId>>,
    /// The candidate must follow every event bound to these roles.
    pub after: Vec<RoleId>,
    /// The candidate must precede every event bound to these roles.
    pub before: Vec<RoleId>,
    /// Iterated roles whose binding size must lie within its bounds.
    pub sizes: Vec<RoleId>,
}

impl<S> Default for Condition<S> {
    fn default() -> Self {
        Condition {
            atoms: Vec::new(),
            after: Vec::new(),
            before: Vec::new(),
            sizes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Edge<S = f64> {
    pub from: StateId,
    pub to: StateId,
    pub kind: EdgeKind,
    pub cond: Condition<S>,
}

impl<S> Edge<S> {
    pub fn trigger_role(&self) -> Option<RoleId> {
        match self.kind {
            EdgeKind::Take { role, .. } | EdgeKind::Iterate { role } | EdgeKind::Kill { role } => {
                Some(role)
            }
            _ => None,
        }
    }
}

/// A compiled automaton.
#[derive(Debug, Clone)]
pub struct Nfa<S = f64> {
    pub types: Vec<EventType>,
    pub roles: Vec<RoleInfo>,
    pub states: Vec<State>,
    pub edges: Vec<Edge<S>>,
    pub initial: StateId,
    pub accept: StateId,
    pub reject: StateId,
    pub window: Window,
}

impl<S> Nfa<S> {
    /// An automaton with only its initial, final and reject states.
    pub fn skeleton(window: Window) -> Self {
        let mk = |name: &str, kind| State {
            name: name.to_string(),
            kind,
            store: Vec::new(),
            transient: false,
            out: Vec::new(),
        };
        Nfa {
            types: Vec::new(),
            roles: Vec::new(),
            states: vec![
                mk("q1", StateKind::Initial),
                mk("F", StateKind::Final),
                mk("R", StateKind::Reject),
            ],
            edges: Vec::new(),
            initial: 0,
            accept: 1,
            reject: 2,
            window,
        }
    }

    pub fn type_id(&self, t: &EventType) -> Option<TypeId> {
        self.types.iter().position(|x| x == t)
    }

    pub fn intern_type(&mut self, t: &EventType) -> TypeId {
        self.type_id(t).unwrap_or_else(|| {
            self.types.push(t.clone());
            self.types.len() - 1
        })
    }

    pub fn add_role(&mut self, info: RoleInfo) -> RoleId {
        self.roles.push(info);
        self.roles.len() - 1
    }

    pub fn add_state(&mut self, name: impl Into<String>, kind: StateKind) -> StateId {
        self.states.push(State {
            name: name.into(),
            kind,
            store: Vec::new(),
            transient: false,
            out: Vec::new(),
        });
        self.states.len() - 1
    }

    pub fn add_edge(&mut self, from: StateId, to: StateId, kind: EdgeKind, cond: Condition<S>) {
        self.states[from].out.push(self.edges.len());
        self.edges.push(Edge {
            from,
            to,
            kind,
            cond,
        });
    }

    pub fn store(&mut self, state: StateId, t: TypeId) {
        let s = &mut self.states[state].store;
        if !s.contains(&t) {
            s.push(t);
            s.sort_unstable();
        }
    }

    /// Number of states that are neither final nor reject.
    pub fn working_states(&self) -> usize {
        self.states
            .iter()
            .filter(|s| !matches!(s.kind, StateKind::Final | StateKind::Reject))
            .count()
    }

    /// Edge type of the event that triggers `edge`, if any.
    pub fn edge_type(&self, edge: &Edge<S>) -> Option<TypeId> {
        edge.trigger_role().map(|r| self.roles[r].etype)
    }
}

impl<S: crate::scalar::Scalar> Nfa<S> {
    /// Appends another automaton, identifying its initial, final and reject
    /// states with ours. Returns the role id offset of the appended roles.
    pub fn absorb(&mut self, other: Nfa<S>) -> usize {
        let role_off = self.roles.len();
        let type_map: Vec<TypeId> = other.types.iter().map(|t| self.intern_type(t)).collect();
        for mut r in other.roles {
            r.etype = type_map[r.etype];
            self.roles.push(r);
        }
        let mut state_map = vec![0; other.states.len()];
        for (i, st) in other.states.iter().enumerate() {
            state_map[i] = if i == other.initial {
                self.initial
            } else if i == other.accept {
                self.accept
            } else if i == other.reject {
                self.reject
            } else {
                self.add_state(st.name.clone(), st.kind)
            };
            let target = state_map[i];
            for &t in &st.store {
                self.store(target, type_map[t]);
            }
            if i != other.initial && i != other.accept && i != other.reject {
                self.states[target].transient = st.transient;
            }
        }
        for e in other.edges {
            let shift = |r: RoleId| r + role_off;
            let kind = match e.kind {
                EdgeKind::Take { role, from_buffer } => EdgeKind::Take {
                    role: shift(role),
                    from_buffer,
                },
                EdgeKind::Iterate { role } => EdgeKind::Iterate { role: shift(role) },
                EdgeKind::Kill { role } => EdgeKind::Kill { role: shift(role) },
                k => k,
            };
            let cond = Condition {
                atoms: e.cond.atoms.iter().map(|a| a.map_roles(&mut |r| shift(*r))).collect(),
                after: e.cond.after.iter().map(|&r| shift(r)).collect(),
                before: e.cond.before.iter().map(|&r| shift(r)).collect(),
                sizes: e.cond.sizes.iter().map(|&r| shift(r)).collect(),
            };
            self.add_edge(state_map[e.from], state_map[e.to], kind, cond);
        }
        role_off
    }

    /// Human-readable listing of states and edges.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        let role = |r: RoleId| self.roles[r].name.as_str();
        let ty = |r: RoleId| self.types[self.roles[r].etype].as_str();
        for (i, st) in self.states.iter().enumerate() {
            let store: Vec<&str> = st.store.iter().map(|&t| self.types[t].as_str()).collect();
            let _ = writeln!(
                out,
                "state {i} {} {:?}{} store=[{}]",
                st.name,
                st.kind,
                if st.transient { " transient" } else { "" },
                store.join(",")
            );
            for &e in &st.out {
                let e = &self.edges[e];
                let label = match e.kind {
                    EdgeKind::Take { role: r, from_buffer } => format!(
                        "take {} {}{}",
                        ty(r),
                        role(r),
                        if from_buffer { " (buffer)" } else { "" }
                    ),
                    EdgeKind::Iterate { role: r } => format!("iterate {} {}[]", ty(r), role(r)),
                    EdgeKind::Kill { role: r } => format!("kill {} {}", ty(r), role(r)),
                    EdgeKind::Timeout => "timeout".into(),
                    EdgeKind::SearchFailed => "search_failed".into(),
                    EdgeKind::Epsilon => "epsilon".into(),
                };
                let atoms: Vec<String> = e
                    .cond
                    .atoms
                    .iter()
                    .map(|a| a.map_roles(&mut |r| role(*r).to_string()).to_string())
                    .collect();
                let _ = writeln!(
                    out,
                    "  -> {} {label} after=[{}] before=[{}]{}",
                    self.states[e.to].name,
                    e.cond.after.iter().map(|&r| role(r)).collect::<Vec<_>>().join(","),
                    e.cond.before.iter().map(|&r| role(r)).collect::<Vec<_>>().join(","),
                    if atoms.is_empty() {
                        String::new()
                    } else {
                        format!(" where {}", atoms.join(" AND "))
                    }
                );
            }
        }
        out
    }
}

impl<S: crate::scalar::Scalar> fmt::Display for Nfa<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

/// Role name -> bound events, in stream order.
pub type Bindings<S> = BTreeMap<String, Vec<Arc<crate::event::Event<S>>>>;
