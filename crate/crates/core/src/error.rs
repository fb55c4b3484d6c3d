use thiserror::Error;

use crate::event::{EventKey, EventType, Timestamp};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EventError {
    #[error("event type name must be non-empty")]
    EmptyTypeName,
    #[error("window duration must be positive, got {0} ms")]
    NonPositiveWindow(i64),
    #[error("earliest timestamp {earliest} is after latest timestamp {latest}")]
    ReversedInterval {
        earliest: Timestamp,
        latest: Timestamp,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("duplicate role `{0}`")]
    DuplicateRole(String),
    #[error("role `{role}` is declared with types {first} and {second}")]
    RoleTypeConflict {
        role: String,
        first: EventType,
        second: EventType,
    },
    #[error("event type {0} appears more than once in one pattern branch")]
    DuplicateType(EventType),
    #[error("unknown role `{0}` in WHERE clause")]
    UnknownRole(String),
    #[error("aggregate over `{0}`, which is not under an iteration operator")]
    AggregateOverNonIterated(String),
    #[error("indexed reference `{0}[i]` on a role that is not under an iteration operator")]
    IndexedRefOnNonIterated(String),
    #[error("iterated role `{0}` must be referenced as `{0}[i]` or through an aggregate")]
    BareIteratedRef(String),
    #[error("repetition bounds {l}..{m} are invalid (need 1 <= l <= m)")]
    RepeatBounds { l: usize, m: usize },
    #[error("NOT may only appear as a direct child of SEQ or AND")]
    NegationPlacement,
    #[error("pattern branch has no positive event")]
    NoPositive,
    #[error("predicate references negated roles `{0}` and `{1}` together")]
    MultiNegationAtom(String, String),
    #[error("group-by role `{0}` is not an iterated role")]
    GroupByNotIterated(String),
    #[error("invalid duration: {0}")]
    Duration(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("unsupported pattern: {0}")]
    Unsupported(String),
    #[error("no arrival rate given for event type {0}")]
    MissingRate(EventType),
    #[error("frequency order is not a permutation of the pattern's positive types")]
    BadFreqOrder,
    #[error("negated role `{0}` may occur after every positive event; first-chance negation cannot handle it (use post-processing)")]
    NegationAtEnd(String),
    #[error("multi-chain construction needs at least one chain")]
    EmptyChainList,
    #[error("pattern normalizes to {0} branches; use the multi-chain mode")]
    NeedsMultiChain(usize),
}

/// Errors caused by stream data that does not fit the pattern.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("event of type {etype} has no attribute `{attr}`")]
    MissingAttribute { etype: EventType, attr: String },
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error(transparent)]
    Data(#[from] EvalError),
    #[error("stream order violated: {next:?} arrived after {last:?}")]
    OutOfOrder { last: EventKey, next: EventKey },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("stream of {len} events exceeds the oracle cap of {cap}")]
    CapExceeded { len: usize, cap: usize },
    #[error(transparent)]
    Data(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least two samples, got {0}")]
    TooShort(usize),
    #[error("correlation undefined for zero-variance input")]
    ZeroVariance,
}
