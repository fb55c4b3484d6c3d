//! Complex event pattern detection with eager and lazy (chain) automata.
//!
//! A pattern is parsed into a [`PatternAst`], normalized into OR-free
//! [`ChainPattern`] branches and compiled into an [`Nfa`] by one of the
//! builders. A [`Runtime`] then runs the automaton over a time-ordered
//! stream. [`oracle`] holds a brute-force reference matcher.
//!
//! ```
//! use std::sync::Arc;
//! use cep_core::{build_for_mode, parse_pattern, to_dnf, Event64, Mode, Runtime};
//!
//! let ast = parse_pattern::<f64>("PATTERN SEQ(A a, B b) WHERE { a.x < b.x } WITHIN 10 msec").unwrap();
//! let chains = to_dnf(&ast).unwrap();
//! let nfa = build_for_mode(&chains, Mode::Eager, None).unwrap();
//! let stream = vec![
//!     Event64::new("A", 1, 0).with_num("x", 1.0),
//!     Event64::new("B", 5, 1).with_num("x", 2.0),
//! ];
//! let matches = Runtime::new(&nfa).run(stream.into_iter().map(Arc::new)).unwrap();
//! assert_eq!(matches.len(), 1);
//! ```
//!
//! Every type carrying numbers is generic over a [`Scalar`] (`f32` or
//! `f64`); the aliases below fix the common choices.

mod build;
pub mod difftest;
pub mod eager;
pub mod engine;
pub mod error;
pub mod event;
pub mod lazy;
pub mod nfa;
pub mod oracle;
pub mod pattern;
pub mod scalar;
pub mod stats;

pub use eager::build_eager;
pub use engine::{build_for_mode, Mode};
pub use error::{BuildError, EvalError, EventError, OracleError, PatternError, RuntimeError, StatsError};
pub use event::{event_order, within_window, Event, EventKey, EventType, Timestamp, Value, Window};
pub use lazy::{
    ascending_freq_order, build_lazy_chain, build_multi_chain, chain_freq_order, merge_chains,
    partial_filters, sequence_filters, NegationStrategy, Rates,
};
pub use nfa::{Counters, Match, MatchKey, Nfa, Runtime};
pub use oracle::oracle_matches;
pub use pattern::{parse_duration, parse_pattern, render_chains, render_pattern, to_dnf, ChainPattern, PatternAst};
pub use scalar::Scalar;
pub use stats::pearson;

pub type Event64 = Event<f64>;
pub type Event32 = Event<f32>;
pub type Value64 = Value<f64>;
pub type Value32 = Value<f32>;
pub type Nfa64 = Nfa<f64>;
pub type Nfa32 = Nfa<f32>;
pub type Pattern64 = PatternAst<f64>;
pub type Pattern32 = PatternAst<f32>;
pub type Chain64 = ChainPattern<f64>;
pub type Chain32 = ChainPattern<f32>;
pub type Match64 = Match<f64>;
pub type Match32 = Match<f32>;
