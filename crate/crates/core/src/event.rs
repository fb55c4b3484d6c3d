//! Events, timestamps and time windows.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::EventError;
use crate::scalar::Scalar;

/// Timestamp in integer milliseconds.
pub type Timestamp = i64;

/// Symbolic, case-sensitive event type name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventType(Arc<str>);

impl EventType {
    pub fn new(name: impl AsRef<str>) -> Result<Self, EventError> {
        let name = name.as_ref();
        if name.is_empty() {
            return Err(EventError::EmptyTypeName);
        }
        Ok(EventType(Arc::from(name)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for EventType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for EventType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EventType {
    /// Panics on an empty name; use [`EventType::new`] for untrusted input.
    fn from(s: &str) -> Self {
        EventType::new(s).expect("event type name must be non-empty")
    }
}

/// Position of an event in the stream: `(ts, seq)`, ordered lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventKey {
    pub ts: Timestamp,
    pub seq: u64,
}

impl EventKey {
    pub const fn new(ts: Timestamp, seq: u64) -> Self {
        EventKey { ts, seq }
    }
}

/// Attribute value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value<S = f64> {
    Num(S),
    Str(Arc<str>),
    List(Arc<[S]>),
}

impl<S: Scalar> Value<S> {
    pub fn as_num(&self) -> Option<S> {
        match self {
            Value::Num(v) => Some(*v),
            _ => None,
        }
    }
}

impl<S: Scalar> fmt::Display for Value<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(v) => write!(f, "{v}"),
            Value::Str(s) => f.write_str(s),
            Value::List(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(";")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
        }
    }
}

/// A timestamped, typed record with named attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct Event<S = f64> {
    pub etype: EventType,
    pub ts: Timestamp,
    pub seq: u64,
    pub attrs: BTreeMap<String, Value<S>>,
}

impl<S: Scalar> Event<S> {
    pub fn new(etype: impl Into<EventType>, ts: Timestamp, seq: u64) -> Self {
        Event {
            etype: etype.into(),
            ts,
            seq,
            attrs: BTreeMap::new(),
        }
    }

    pub fn with_num(mut self, name: &str, v: f64) -> Self {
        self.attrs
            .insert(name.to_string(), Value::Num(S::from_literal(v)));
        self
    }

    pub fn with_str(mut self, name: &str, v: &str) -> Self {
        self.attrs.insert(name.to_string(), Value::Str(Arc::from(v)));
        self
    }

    pub fn with_list(mut self, name: &str, v: &[f64]) -> Self {
        let list: Vec<S> = v.iter().map(|x| S::from_literal(*x)).collect();
        self.attrs.insert(name.to_string(), Value::List(list.into()));
        self
    }

    pub fn key(&self) -> EventKey {
        EventKey::new(self.ts, self.seq)
    }

    pub fn attr(&self, name: &str) -> Option<&Value<S>> {
        self.attrs.get(name)
    }
}

/// Total order on events: lexicographic on `(ts, seq)`.
pub fn event_order<S>(a: &Event<S>, b: &Event<S>) -> Ordering {
    (a.ts, a.seq).cmp(&(b.ts, b.seq))
}

/// Maximal allowed interval between the earliest and latest event of a match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window {
    duration: i64,
}

impl Window {
    pub fn new(duration_ms: i64) -> Result<Self, EventError> {
        if duration_ms <= 0 {
            return Err(EventError::NonPositiveWindow(duration_ms));
        }
        Ok(Window {
            duration: duration_ms,
        })
    }

    pub fn millis(&self) -> i64 {
        self.duration
    }

    /// Inclusive containment test.
    pub fn contains(&self, earliest: Timestamp, latest: Timestamp) -> bool {
        latest.saturating_sub(earliest) <= self.duration
    }
}

/// True iff `latest_ts - earliest_ts <= w` (the boundary is inclusive).
pub fn within_window(
    earliest_ts: Timestamp,
    latest_ts: Timestamp,
    w: Window,
) -> Result<bool, EventError> {
    if earliest_ts > latest_ts {
        return Err(EventError::ReversedInterval {
            earliest: earliest_ts,
            latest: latest_ts,
        });
    }
    Ok(w.contains(earliest_ts, latest_ts))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(ts: i64, seq: u64) -> Event {
        Event::new("A", ts, seq)
    }

    #[test]
    fn window_boundary_is_inclusive() {
        let w = Window::new(3_600_000).unwrap();
        assert!(within_window(0, 3_600_000, w).unwrap());
        assert!(!within_window(0, 3_600_001, w).unwrap());
        assert!(within_window(5, 5, Window::new(1).unwrap()).unwrap());
    }

    #[test]
    fn reversed_interval_is_an_error() {
        let w = Window::new(10).unwrap();
        assert!(matches!(
            within_window(7, 3, w),
            Err(EventError::ReversedInterval { .. })
        ));
    }

    #[test]
    fn window_must_be_positive() {
        assert!(Window::new(0).is_err());
        assert!(Window::new(-5).is_err());
    }

    #[test]
    fn order_uses_seq_as_tiebreak() {
        assert_eq!(event_order(&ev(1, 1), &ev(2, 2)), Ordering::Less);
        assert_eq!(event_order(&ev(1, 1), &ev(1, 2)), Ordering::Less);
        assert_eq!(event_order(&ev(1, 3), &ev(1, 3)), Ordering::Equal);
    }

    #[test]
    fn empty_type_name_rejected() {
        assert!(EventType::new("").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn event_order_is_total(xs in proptest::collection::vec((0i64..20, 0u64..20), 3)) {
                let es: Vec<Event> = xs.iter().map(|(t, s)| ev(*t, *s)).collect();
                let (a, b, c) = (&es[0], &es[1], &es[2]);
                prop_assert_eq!(event_order(a, b), event_order(b, a).reverse());
                if event_order(a, b) != Ordering::Greater && event_order(b, c) != Ordering::Greater {
                    prop_assert_ne!(event_order(a, c), Ordering::Greater);
                }
            }

            #[test]
            fn shrinking_window_never_admits_more(a in 0i64..1000, d in 0i64..1000, w in 1i64..500, shrink in 0i64..500) {
                let big = Window::new(w + shrink).unwrap();
                let small = Window::new(w).unwrap();
                if within_window(a, a + d, small).unwrap() {
                    prop_assert!(within_window(a, a + d, big).unwrap());
                }
            }
        }
    }
}
