use std::collections::VecDeque;
use std::sync::Arc;

use super::TypeId;
use crate::event::{Event, EventKey, Timestamp};

/// Per-type queues of stored events in stream order.
#[derive(Debug, Clone)]
pub struct InputBuffer<S = f64> {
    queues: Vec<VecDeque<Arc<Event<S>>>>,
    len: usize,
}

impl<S> InputBuffer<S> {
    pub fn new(types: usize) -> Self {
        InputBuffer {
            queues: (0..types).map(|_| VecDeque::new()).collect(),
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, t: TypeId, e: Arc<Event<S>>) {
        self.queues[t].push_back(e);
        self.len += 1;
    }

    /// Drops events with `ts < cutoff`; returns how many were removed.
    pub fn expire(&mut self, cutoff: Timestamp) -> usize {
        let mut removed = 0;
        for q in &mut self.queues {
            while q.front().is_some_and(|e| e.ts < cutoff) {
                q.pop_front();
                removed += 1;
            }
        }
        self.len -= removed;
        removed
    }

    /// Events of type `t` with key strictly between `lo` and `hi`.
    pub fn range(
        &self,
        t: TypeId,
        lo: Option<EventKey>,
        hi: Option<EventKey>,
    ) -> impl Iterator<Item = &Arc<Event<S>>> + '_ {
        let q = &self.queues[t];
        let start = lo.map_or(0, |lo| q.partition_point(|e| EventKey::new(e.ts, e.seq) <= lo));
        let end = hi.map_or(q.len(), |hi| q.partition_point(|e| EventKey::new(e.ts, e.seq) < hi));
        q.range(start..end.max(start))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(ts: i64, seq: u64) -> Arc<Event> {
        Arc::new(Event::new("A", ts, seq))
    }

    #[test]
    fn range_is_exclusive_on_both_ends() {
        let mut b = InputBuffer::new(1);
        for (i, ts) in [1, 2, 2, 5, 9].into_iter().enumerate() {
            b.push(0, ev(ts, i as u64));
        }
        let keys: Vec<u64> = b
            .range(0, Some(EventKey::new(2, 1)), Some(EventKey::new(9, 4)))
            .map(|e| e.seq)
            .collect();
        assert_eq!(keys, [2, 3]);
        assert_eq!(b.range(0, None, None).count(), 5);
        assert_eq!(b.range(0, Some(EventKey::new(9, 4)), None).count(), 0);
    }

    #[test]
    fn expiry_is_strict() {
        let mut b = InputBuffer::new(2);
        b.push(0, ev(1, 0));
        b.push(1, ev(3, 1));
        b.push(0, ev(4, 2));
        assert_eq!(b.expire(3), 1);
        assert_eq!(b.len(), 2);
        assert_eq!(b.range(1, None, None).count(), 1);
    }
}
